//! User configuration, read from `comodi.toml` in the toolchain home.
//!
//! ```toml
//! platform = "linux-x86_64"
//! local_repo = "cache"          # relative to the home
//!
//! [repository]
//! url = "http://repo.example:7070"
//!
//! [compiler]
//! command = "cc -shared -fPIC -o {output} {sources}"
//!
//! [compile_server]
//! url = "http://build.example:7070"
//! ```
//! Every key is optional. The home is `$COMODI_HOME`, else `~/.comodi`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::compile::{CompileError, CompileService, LocalCompiler, RemoteCompiler};
use crate::RepoError;

pub const CONFIG_FILE: &str = "comodi.toml";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub home: PathBuf,
    pub repository: Option<String>,
    pub compiler: Option<String>,
    pub compile_server: Option<String>,
    pub local_repo: PathBuf,
    pub platform: String,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct File {
    platform: Option<String>,
    local_repo: Option<PathBuf>,
    repository: Option<Url>,
    compiler: Option<Command>,
    compile_server: Option<Url>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Url {
    url: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Command {
    command: String,
}

pub fn default_platform() -> String {
    format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH)
}

impl Config {
    pub fn home_from_env() -> PathBuf {
        if let Some(h) = std::env::var_os("COMODI_HOME").filter(|h| !h.is_empty()) {
            return PathBuf::from(h);
        }
        let base = std::env::var_os("HOME").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
        base.join(".comodi")
    }

    pub fn from_env() -> Result<Config, RepoError> {
        Config::load(&Self::home_from_env())
    }

    /// Reads `<home>/comodi.toml`; a missing file means all defaults.
    pub fn load(home: &Path) -> Result<Config, RepoError> {
        let path = home.join(CONFIG_FILE);
        match std::fs::read_to_string(&path) {
            Ok(text) => Config::parse(home, &text).map_err(|message| RepoError::Io {
                path: path.display().to_string(),
                message,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Config::defaults(home)),
            Err(e) => Err(RepoError::io(&path, e)),
        }
    }

    pub fn defaults(home: &Path) -> Config {
        Config {
            home: home.to_path_buf(),
            repository: None,
            compiler: None,
            compile_server: None,
            local_repo: home.join("cache"),
            platform: default_platform(),
        }
    }

    pub fn parse(home: &Path, text: &str) -> Result<Config, String> {
        let f: File = toml::from_str(text).map_err(|e| e.to_string())?;
        let d = Config::defaults(home);
        Ok(Config {
            home: d.home,
            repository: f.repository.map(|u| u.url),
            compiler: f.compiler.map(|c| c.command),
            compile_server: f.compile_server.map(|u| u.url),
            local_repo: f.local_repo.map_or(d.local_repo, |p| home.join(p)),
            platform: f.platform.unwrap_or(d.platform),
        })
    }

    /// The compile server if one is named, else the local compiler command.
    pub fn compile_service(&self) -> Result<Arc<dyn CompileService>, CompileError> {
        match (&self.compile_server, &self.compiler) {
            (Some(url), _) => Ok(Arc::new(RemoteCompiler::new(url))),
            (None, Some(cmd)) => Ok(Arc::new(LocalCompiler::new(cmd))),
            (None, None) => Err(CompileError::NotConfigured),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_fields() {
        let home = Path::new("/h");
        let c = Config::parse(
            home,
            "platform = \"p\"\nlocal_repo = \"c\"\n[repository]\nurl = \"http://r:1\"\n[compiler]\ncommand = \"cc {sources}\"\n",
        )
        .unwrap();
        assert_eq!(c.repository.as_deref(), Some("http://r:1"));
        assert_eq!(c.local_repo, Path::new("/h/c"));
        assert_eq!(c.platform, "p");
        assert!(c.compile_service().is_ok());
    }

    #[test]
    fn unconfigured_compile() {
        let c = Config::defaults(Path::new("/h"));
        assert!(matches!(c.compile_service(), Err(CompileError::NotConfigured)));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = Config::parse(Path::new("/h"), "[mirror]\nurl = \"x\"\n").unwrap_err();
        assert!(err.contains("mirror"), "{err}");
    }
}
