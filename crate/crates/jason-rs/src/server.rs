//! Router composition, request logging and agent loading.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use axum::extract::Request;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::Router;
use jason_rs_core::{parse_program, AgentProgram, ParseError};

use crate::error::{not_found, ApiError};
use crate::platform::Platform;
use crate::runtime::{Runtime, RuntimeError};
use crate::{gateway, platform};

/// Agent names that would be shadowed by platform routes.
pub const RESERVED_NAMES: [&str; 3] = ["login", "feature", "link"];

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let start = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        target: "jason_rs::http",
        method = %method,
        path = %path,
        status = response.status().as_u16(),
        duration_us = start.elapsed().as_micros() as u64,
        "request"
    );
    response
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(axum::http::StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
}

/// The platform routes and the agent gateway on one router.
pub fn app(platform: Platform) -> Router {
    let gateway = gateway::router(platform.runtime().clone());
    Router::new()
        .merge(platform::router(platform))
        .merge(gateway)
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(middleware::from_fn(log_request))
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: `{name}` is not a valid agent name", path.display())]
    BadName { path: PathBuf, name: String },
    #[error("{}: agent name `{name}` is reserved", path.display())]
    Reserved { path: PathBuf, name: String },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

pub fn validate_agent_name(name: &str) -> bool {
    jason_rs_core::term::is_atom_name(name) && !RESERVED_NAMES.contains(&name)
}

/// Parses one `.asl` file.
pub fn load_program(path: &Path) -> Result<AgentProgram, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    parse_program(&text).map_err(|source| LoadError::Parse { path: path.into(), source })
}

/// Every `.asl` file in `dir`, sorted by file name; the agent is named after
/// the file stem.
pub fn load_agent_dir(dir: &Path) -> Result<Vec<(String, AgentProgram)>, LoadError> {
    let io = |source| LoadError::Io { path: dir.into(), source };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "asl"));
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
            if RESERVED_NAMES.contains(&name.as_str()) {
                return Err(LoadError::Reserved { path, name });
            }
            if !jason_rs_core::term::is_atom_name(&name) {
                return Err(LoadError::BadName { path, name });
            }
            Ok((name, load_program(&path)?))
        })
        .collect()
}

pub fn install(runtime: &Runtime, agents: Vec<(String, AgentProgram)>) -> Result<(), LoadError> {
    for (name, program) in agents {
        for w in program.lint() {
            tracing::warn!("{name}: {w}");
        }
        runtime.create_agent(&name, program)?;
    }
    Ok(())
}

/// Serves `app` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!("listening on http://{addr}");
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
