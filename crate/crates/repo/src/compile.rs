//! Turning package sources into a platform binary, here or on a server.

use std::io::Read;
use std::path::Path;
use std::process::Command;

use base64::Engine as _;
use comodi_core::xml::{self, Element, XmlError};
use thiserror::Error;

use crate::endpoint::status_error;
use crate::manifest::sha256_hex;
use crate::multipart::{self, Part};
use crate::RepoError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileRequest {
    pub language: String,
    pub platform: String,
    /// File name → contents. Names are plain file names, no directories.
    pub sources: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileResult {
    pub platform: String,
    pub success: bool,
    pub binary: Option<Vec<u8>>,
    pub log: String,
    /// Each input file with its SHA-256, in request order.
    pub inputs: Vec<(String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("no compile service configured; set compiler.command or compile_server.url in comodi.toml")]
    NotConfigured,
    #[error("compiler {0} not found")]
    CompilerNotFound(String),
    #[error("bad compile request: {0}")]
    BadRequest(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Xml(#[from] XmlError),
}

impl CompileError {
    pub fn code(&self) -> &'static str {
        match self {
            CompileError::NotConfigured => "NotConfigured",
            CompileError::CompilerNotFound(_) => "CompilerNotFound",
            CompileError::BadRequest(_) => "BadRequest",
            CompileError::Io(_) => "Io",
            CompileError::Repo(e) => e.code(),
            CompileError::Xml(_) => "Xml",
        }
    }
}

pub trait CompileService: Send + Sync {
    fn compile(&self, request: &CompileRequest) -> Result<CompileResult, CompileError>;
}

fn safe_file_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.bytes().all(|b| b.is_ascii_alphanumeric() || b"._-".contains(&b))
}

impl CompileRequest {
    fn check(&self) -> Result<(), CompileError> {
        if self.sources.is_empty() {
            return Err(CompileError::BadRequest("no sources".into()));
        }
        for (name, _) in &self.sources {
            if !safe_file_name(name) {
                return Err(CompileError::BadRequest(format!("unsafe source name {name:?}")));
            }
        }
        Ok(())
    }

    fn to_parts(&self) -> Vec<Part> {
        let mut parts = vec![Part::field("language", &self.language), Part::field("platform", &self.platform)];
        parts.extend(self.sources.iter().map(|(n, d)| Part::file("source", n, d)));
        parts
    }
}

pub(crate) fn request_from_parts(parts: &[Part]) -> Result<CompileRequest, String> {
    let field = |name: &str| -> Result<String, String> {
        parts
            .iter()
            .find(|p| p.name == name && p.filename.is_none())
            .ok_or(format!("missing field {name}"))?
            .text()
    };
    let sources = parts
        .iter()
        .filter(|p| p.name == "source")
        .map(|p| {
            let name = p.filename.clone().ok_or("source part without a file name")?;
            Ok((name, p.data.clone()))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(CompileRequest {
        language: field("language")?,
        platform: field("platform")?,
        sources,
    })
}

impl CompileResult {
    pub fn to_xml(&self) -> Element {
        let mut el = Element::new("compileResult")
            .attr("platform", self.platform.as_str())
            .attr("success", if self.success { "true" } else { "false" });
        for (name, sha) in &self.inputs {
            el.push(Element::new("input").attr("name", name.as_str()).attr("sha256", sha.as_str()));
        }
        el.push(Element::new("log").text(self.log.as_str()));
        if let Some(b) = &self.binary {
            el.push(Element::new("binary").text(base64::engine::general_purpose::STANDARD.encode(b)));
        }
        el
    }

    pub fn parse(text: &str) -> Result<CompileResult, XmlError> {
        let root = xml::parse(text)?;
        let path = "/compileResult";
        if root.name != "compileResult" {
            return Err(XmlError::schema("/", "expected compileResult root"));
        }
        root.only_attrs(&["platform", "success"], path)?;
        let success = match root.require("success", path)? {
            "true" => true,
            "false" => false,
            other => return Err(XmlError::schema(format!("{path}@success"), format!("expected true or false, got {other}"))),
        };
        let mut inputs = Vec::new();
        for (i, el) in root.elements_named("input").enumerate() {
            let here = format!("{path}/input[{i}]");
            inputs.push((el.require("name", &here)?.to_string(), el.require("sha256", &here)?.to_string()));
        }
        let binary = match root.first("binary") {
            Some(el) => Some(
                base64::engine::general_purpose::STANDARD
                    .decode(el.text_content().trim())
                    .map_err(|e| XmlError::schema(format!("{path}/binary"), e.to_string()))?,
            ),
            None => None,
        };
        Ok(CompileResult {
            platform: root.require("platform", path)?.to_string(),
            success,
            binary,
            log: root.first("log").map(|l| l.text_content()).unwrap_or_default(),
            inputs,
        })
    }
}

/// Runs a compiler command on this machine.
///
/// The command is a list of words; `{output}` is replaced by the output path
/// and a lone `{sources}` word expands to every source that is not a header.
#[derive(Debug, Clone)]
pub struct LocalCompiler {
    command: Vec<String>,
}

pub const DEFAULT_COMPILER: &str = "cc -shared -fPIC -o {output} {sources}";

impl Default for LocalCompiler {
    fn default() -> Self {
        LocalCompiler::new(DEFAULT_COMPILER)
    }
}

impl LocalCompiler {
    pub fn new(template: &str) -> Self {
        LocalCompiler {
            command: template.split_whitespace().map(str::to_string).collect(),
        }
    }

    fn argv(&self, dir: &Path, output: &Path, sources: &[&str]) -> Vec<String> {
        let mut argv = Vec::new();
        for word in &self.command {
            if word == "{sources}" {
                argv.extend(sources.iter().map(|s| dir.join(s).display().to_string()));
            } else {
                argv.push(word.replace("{output}", &output.display().to_string()));
            }
        }
        argv
    }
}

impl CompileService for LocalCompiler {
    fn compile(&self, request: &CompileRequest) -> Result<CompileResult, CompileError> {
        request.check()?;
        let scratch = tempfile::tempdir().map_err(|e| CompileError::Io(e.to_string()))?;
        for (name, data) in &request.sources {
            std::fs::write(scratch.path().join(name), data).map_err(|e| CompileError::Io(e.to_string()))?;
        }
        let output = scratch.path().join("component.so");
        let units: Vec<&str> = request
            .sources
            .iter()
            .map(|(n, _)| n.as_str())
            .filter(|n| !n.ends_with(".h"))
            .collect();
        let argv = self.argv(scratch.path(), &output, &units);
        let Some((program, args)) = argv.split_first() else {
            return Err(CompileError::CompilerNotFound(String::new()));
        };
        let out = match Command::new(program).args(args).current_dir(scratch.path()).output() {
            Ok(o) => o,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CompileError::CompilerNotFound(program.clone()))
            }
            Err(e) => return Err(CompileError::Io(format!("{program}: {e}"))),
        };
        let mut log = String::from_utf8_lossy(&out.stdout).into_owned();
        log.push_str(&String::from_utf8_lossy(&out.stderr));
        let binary = if out.status.success() {
            Some(std::fs::read(&output).map_err(|e| CompileError::Io(format!("compiler produced no output: {e}")))?)
        } else {
            if log.is_empty() {
                log = format!("{program} exited with {}", out.status);
            }
            None
        };
        Ok(CompileResult {
            platform: request.platform.clone(),
            success: binary.is_some(),
            binary,
            log,
            inputs: request.sources.iter().map(|(n, d)| (n.clone(), sha256_hex(d))).collect(),
        })
    }
}

/// Sends the sources to a repository server's compile route.
pub struct RemoteCompiler {
    url: String,
    agent: ureq::Agent,
}

impl RemoteCompiler {
    pub fn new(base: &str) -> Self {
        RemoteCompiler {
            url: format!("{}/compile", base.trim_end_matches('/')),
            agent: ureq::AgentBuilder::new().build(),
        }
    }
}

impl CompileService for RemoteCompiler {
    fn compile(&self, request: &CompileRequest) -> Result<CompileResult, CompileError> {
        request.check()?;
        let (content_type, body) = multipart::write(&request.to_parts());
        let resp = self
            .agent
            .post(&self.url)
            .set("Content-Type", &content_type)
            .send_bytes(&body)
            .map_err(status_error)?;
        let mut text = String::new();
        resp.into_reader()
            .read_to_string(&mut text)
            .map_err(|e| RepoError::Transport(e.to_string()))?;
        Ok(CompileResult::parse(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(src: &str) -> CompileRequest {
        CompileRequest {
            language: "c".into(),
            platform: "test".into(),
            sources: vec![("a.c".into(), src.as_bytes().to_vec()), ("a.h".into(), b"int f(void);\n".to_vec())],
        }
    }

    #[test]
    fn result_xml_round_trip() {
        let r = CompileResult {
            platform: "linux-x86_64".into(),
            success: true,
            binary: Some(vec![0, 1, 2, 255]),
            log: "warning: <x> & y\n".into(),
            inputs: vec![("a.c".into(), sha256_hex(b"x"))],
        };
        assert_eq!(CompileResult::parse(&r.to_xml().to_document()).unwrap(), r);
    }

    #[test]
    fn parts_round_trip() {
        let r = request("int f(void) { return 1; }\n");
        let (ct, body) = multipart::write(&r.to_parts());
        let parts = multipart::parse(&ct, &body).unwrap();
        assert_eq!(request_from_parts(&parts).unwrap(), r);
    }

    #[test]
    fn unsafe_names_rejected() {
        let mut r = request("");
        r.sources[0].0 = "../evil.c".into();
        assert!(matches!(LocalCompiler::default().compile(&r), Err(CompileError::BadRequest(_))));
    }

    #[test]
    fn missing_compiler() {
        let c = LocalCompiler::new("no-such-compiler-here {sources}");
        assert!(matches!(c.compile(&request("")), Err(CompileError::CompilerNotFound(_))));
    }

    #[test]
    fn syntax_error_gives_log_and_no_binary() {
        if Command::new("cc").arg("--version").output().is_err() {
            return;
        }
        let r = LocalCompiler::default().compile(&request("int f(void) { return 1 }\n")).unwrap();
        assert!(!r.success);
        assert!(r.binary.is_none());
        assert!(!r.log.trim().is_empty());
        assert_eq!(r.inputs.len(), 2);
    }

    #[test]
    fn builds_a_shared_object() {
        if Command::new("cc").arg("--version").output().is_err() {
            return;
        }
        let r = LocalCompiler::default().compile(&request("int f(void) { return 1; }\n")).unwrap();
        assert!(r.success, "{}", r.log);
        assert!(!r.binary.unwrap().is_empty());
    }
}
