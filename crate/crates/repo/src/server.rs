//! HTTP front for a [`RepoStore`].
//!
//! ```text
//! GET  /index                   index document
//! GET  /pkg/<name>/<version>    archive bytes; entry in X-Comodi-Entry
//! PUT  /pkg/<name>/<version>    register; receipt document
//! POST /compile                 multipart source bundle; compile result
//! ```
//! Errors come back as `<error code message .../>` with a 4xx/5xx status.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use comodi_core::cdl::Version;
use comodi_core::xml::Element;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::archive::{unpack_verify, FormatRegistry};
use crate::compile::{self, CompileService};
use crate::index::entry_to_xml;
use crate::store::RepoStore;
use crate::{multipart, RepoError};

const WORKERS: usize = 8;

pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
    transfers: Arc<AtomicUsize>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Number of package downloads served so far.
    pub fn transfers(&self) -> usize {
        self.transfers.load(Ordering::SeqCst)
    }

    /// Blocks until the server is stopped from another thread or fails.
    pub fn wait(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

struct State {
    store: RepoStore,
    compiler: Option<Arc<dyn CompileService>>,
    transfers: Arc<AtomicUsize>,
}

/// Serves the repository in `dir` on `addr` (use port 0 for any free port).
pub fn serve_repo(
    dir: &Path,
    addr: &str,
    compiler: Option<Arc<dyn CompileService>>,
) -> Result<ServerHandle, RepoError> {
    let store = RepoStore::open(dir)?;
    let server = Server::http(addr).map_err(|e| RepoError::Transport(format!("bind {addr}: {e}")))?;
    let bound = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| RepoError::Transport("not an IP listener".into()))?;
    let server = Arc::new(server);
    let transfers = Arc::new(AtomicUsize::new(0));
    let state = Arc::new(State {
        store,
        compiler,
        transfers: transfers.clone(),
    });
    let workers = (0..WORKERS)
        .map(|_| {
            let server = server.clone();
            let state = state.clone();
            std::thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    handle(&state, req);
                }
            })
        })
        .collect();
    Ok(ServerHandle {
        addr: bound,
        server,
        workers,
        transfers,
    })
}

type Reply = Response<std::io::Cursor<Vec<u8>>>;

fn xml_reply(status: u16, el: &Element) -> Reply {
    Response::from_data(el.to_document().into_bytes())
        .with_status_code(status)
        .with_header(header("Content-Type", "application/xml"))
}

fn header(k: &str, v: &str) -> Header {
    Header::from_bytes(k.as_bytes(), v.as_bytes()).expect("ASCII header")
}

fn error_reply(status: u16, code: &str, message: &str, extra: &[(&str, String)]) -> Reply {
    let mut el = Element::new("error").attr("code", code).attr("message", message);
    for (k, v) in extra {
        el = el.attr(*k, v.as_str());
    }
    xml_reply(status, &el)
}

fn repo_error_reply(e: &RepoError) -> Reply {
    let (status, extra) = match e {
        RepoError::NotFound { name, version } => (404, vec![("name", name.clone()), ("version", version.to_string())]),
        RepoError::DuplicateVersion { name, version } => {
            (409, vec![("name", name.clone()), ("version", version.to_string())])
        }
        RepoError::Io { .. } | RepoError::DigestMismatch { .. } => (500, vec![]),
        _ => (422, vec![]),
    };
    error_reply(status, e.code(), &e.to_string(), &extra)
}

fn single_line(el: &Element) -> String {
    let doc = el.to_document();
    doc.lines().skip(1).collect::<Vec<_>>().join("").trim().to_string()
}

fn handle(state: &State, mut req: Request) {
    let url = req.url().to_string();
    let segments: Vec<&str> = url.trim_start_matches('/').split('/').collect();
    let method = req.method().clone();
    let reply = match (&method, segments.as_slice()) {
        (Method::Get, ["index"]) => match state.store.index() {
            Ok(index) => xml_reply(200, &index.to_xml()),
            Err(e) => repo_error_reply(&e),
        },
        (Method::Get | Method::Put, ["pkg", name, version]) => match version.parse::<Version>() {
            Err(e) => error_reply(400, "BadRequest", &e, &[]),
            Ok(version) if method == Method::Get => match state.store.get(name, version) {
                Ok((entry, bytes)) => {
                    state.transfers.fetch_add(1, Ordering::SeqCst);
                    Response::from_data(bytes)
                        .with_header(header("Content-Type", "application/octet-stream"))
                        .with_header(header("X-Comodi-Entry", &single_line(&entry_to_xml(&entry))))
                }
                Err(e) => repo_error_reply(&e),
            },
            Ok(version) => {
                let mut body = Vec::new();
                match req.as_reader().read_to_end(&mut body) {
                    Err(e) => error_reply(400, "BadRequest", &e.to_string(), &[]),
                    Ok(_) => put(state, name, version, &body),
                }
            }
        },
        (Method::Post, ["compile"]) => compile_request(state, &mut req),
        (_, ["index"] | ["pkg", _, _] | ["compile"]) => error_reply(405, "MethodNotAllowed", &format!("{method} {url}"), &[]),
        _ => error_reply(400, "BadRequest", &format!("malformed request path {url}"), &[]),
    };
    let _ = req.respond(reply);
}

fn put(state: &State, name: &str, version: Version, body: &[u8]) -> Reply {
    match unpack_verify(body, &FormatRegistry::default()) {
        Ok(p) if p.manifest.name != name || p.manifest.version != version => error_reply(
            400,
            "BadRequest",
            &format!("path names {name} {version} but the archive holds {} {}", p.manifest.name, p.manifest.version),
            &[],
        ),
        Ok(_) => match state.store.register(body) {
            Ok(entry) => xml_reply(201, &entry_to_xml(&entry)),
            Err(e) => repo_error_reply(&e),
        },
        Err(e) => repo_error_reply(&e),
    }
}

fn compile_request(state: &State, req: &mut Request) -> Reply {
    let Some(service) = &state.compiler else {
        return error_reply(501, "NotConfigured", "this server has no compile service", &[]);
    };
    let content_type = req
        .headers()
        .iter()
        .find(|h| h.field.equiv("Content-Type"))
        .map(|h| h.value.as_str().to_string())
        .unwrap_or_default();
    let mut body = Vec::new();
    if let Err(e) = req.as_reader().read_to_end(&mut body) {
        return error_reply(400, "BadRequest", &e.to_string(), &[]);
    }
    let request = match multipart::parse(&content_type, &body).and_then(|parts| compile::request_from_parts(&parts)) {
        Ok(r) => r,
        Err(e) => return error_reply(400, "BadRequest", &e, &[]),
    };
    match service.compile(&request) {
        Ok(result) => xml_reply(200, &result.to_xml()),
        Err(e) => error_reply(500, e.code(), &e.to_string(), &[]),
    }
}
