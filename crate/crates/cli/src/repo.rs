//! Repository commands: register, serve, fetch.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use comodi_core::cdl::Version;
use comodi_repo::index::entry_to_xml;
use comodi_repo::{open_endpoint, serve_repo, CompileService, LocalCompiler, LocalRepo, RepoEndpoint, RepoError};

use crate::develop::load_config;
use crate::output::Format;
use crate::{read_bytes, Failure, Io, Outcome};

pub(crate) fn repo_failure(e: RepoError) -> Failure {
    match &e {
        RepoError::Io { .. } | RepoError::Transport(_) | RepoError::UnknownEndpoint(_) => {
            Failure::Environment(e.to_string())
        }
        RepoError::Protocol { status, .. } if *status >= 500 => Failure::Environment(e.to_string()),
        _ => Failure::Diagnostics(e.to_string()),
    }
}

/// `--repo` if given, else the configured repository.
pub(crate) fn endpoint(location: Option<&str>) -> Result<Box<dyn RepoEndpoint>, Failure> {
    let location = match location {
        Some(l) => l.to_string(),
        None => load_config()?
            .repository
            .ok_or_else(|| Failure::Environment("no repository given and none configured".into()))?,
    };
    open_endpoint(&location).map_err(repo_failure)
}

pub(crate) fn local_repo(cache: Option<&PathBuf>) -> Result<LocalRepo, Failure> {
    Ok(match cache {
        Some(c) => LocalRepo::new(c),
        None => LocalRepo::new(&load_config()?.local_repo),
    })
}

#[derive(Args, Debug)]
pub struct RegisterArgs {
    archive: PathBuf,
    /// Repository directory or http(s) URL.
    #[arg(long)]
    repo: Option<String>,
}

pub fn register(a: RegisterArgs, io: &mut Io) -> Outcome {
    let ep = endpoint(a.repo.as_deref())?;
    let receipt = ep.put(&read_bytes(&a.archive)?).map_err(repo_failure)?;
    let out = match io.format {
        Format::Xml => entry_to_xml(&receipt).to_document(),
        Format::Text => format!("registered {} {} sha256:{}\n", receipt.name, receipt.version, receipt.digest),
    };
    io.emit(None, out.as_bytes())
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Offer a compile service running this command template.
    #[arg(long)]
    compiler: Option<String>,
}

pub fn serve(a: ServeArgs, io: &mut Io) -> Outcome {
    let compiler = a.compiler.as_deref().map(|c| Arc::new(LocalCompiler::new(c)) as Arc<dyn CompileService>);
    let handle = serve_repo(&a.dir, &a.addr, compiler).map_err(repo_failure)?;
    io.emit(None, format!("{}\n", handle.url()).as_bytes())?;
    let _ = io.out.flush();
    handle.wait();
    Ok(())
}

#[derive(Args, Debug)]
pub struct FetchArgs {
    name: String,
    version: Version,
    #[arg(long)]
    repo: Option<String>,
    /// Local repository root; defaults to the configured one.
    #[arg(long)]
    cache: Option<PathBuf>,
}

pub fn fetch(a: FetchArgs, io: &mut Io) -> Outcome {
    let local = local_repo(a.cache.as_ref())?;
    let path = match local.cached(&a.name, a.version) {
        Some(p) => p,
        None => local.fetch(endpoint(a.repo.as_deref())?.as_ref(), &a.name, a.version).map_err(repo_failure)?,
    };
    io.emit(None, format!("{}\n", path.display()).as_bytes())
}
