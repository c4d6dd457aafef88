//! HTTP/1.1 transport. Every request goes through one fallback handler that
//! calls [`Workspace::handle_request`] on a blocking thread, since
//! mutations fsync the journal and detection is CPU bound.

use std::future::Future;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::Router;
use tokio::net::TcpListener;

use super::Workspace;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8787";

const API_ROOTS: &[&str] = &[
    "graph",
    "communities",
    "detect",
    "candidates",
    "enact",
    "changelog",
    "audit",
    "prominence",
    "strip",
];

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    /// Directory of built UI assets served for non-API GET requests.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            addr: DEFAULT_ADDR.parse().expect("valid default address"),
            static_dir: None,
        }
    }
}

#[derive(Clone)]
struct App {
    workspace: Arc<Workspace>,
    static_dir: Option<PathBuf>,
}

/// Bind `options.addr` and serve until the process ends.
pub async fn serve(workspace: Arc<Workspace>, options: ServeOptions) -> std::io::Result<()> {
    let listener = TcpListener::bind(options.addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    serve_on(listener, workspace, options.static_dir, std::future::pending()).await
}

/// Serve on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    workspace: Arc<Workspace>,
    static_dir: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = Router::new().fallback(dispatch).with_state(App { workspace, static_dir });
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

fn with_cors(mut response: axum::response::Response) -> axum::response::Response {
    let headers = response.headers_mut();
    headers.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    headers.insert(
        header::ACCESS_CONTROL_ALLOW_METHODS,
        HeaderValue::from_static("GET, POST, OPTIONS"),
    );
    headers.insert(
        header::ACCESS_CONTROL_ALLOW_HEADERS,
        HeaderValue::from_static("content-type"),
    );
    response
}

fn plain(status: StatusCode, content_type: &'static str, body: impl Into<Body>) -> axum::response::Response {
    let mut response = axum::response::Response::new(body.into());
    *response.status_mut() = status;
    response
        .headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    response
}

async fn dispatch(State(app): State<App>, method: Method, uri: Uri, body: Bytes) -> axum::response::Response {
    let path = uri.path().to_owned();
    let root = path.trim_start_matches('/').split('/').next().unwrap_or("");
    if method == Method::GET && !API_ROOTS.contains(&root) {
        if let Some(dir) = &app.static_dir {
            return with_cors(static_file(dir, &path).await);
        }
    }
    let target = uri.path_and_query().map_or(path.clone(), |pq| pq.as_str().to_owned());
    let workspace = app.workspace.clone();
    let method_text = method.as_str().to_owned();
    let result = tokio::task::spawn_blocking(move || workspace.handle_request(&method_text, &target, &body)).await;
    let response = match result {
        Ok(r) => {
            let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            log::debug!("{method} {path} -> {status}");
            if status == StatusCode::NO_CONTENT {
                plain(status, "text/plain", Body::empty())
            } else {
                plain(status, "application/json", r.body.to_string())
            }
        }
        Err(e) => {
            log::error!("request handler failed: {e}");
            plain(StatusCode::INTERNAL_SERVER_ERROR, "application/json", r#"{"error":"internal error"}"#)
        }
    };
    with_cors(response)
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("svg") => "image/svg+xml",
        Some("json") => "application/json",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        _ => "application/octet-stream",
    }
}

async fn static_file(dir: &Path, request_path: &str) -> axum::response::Response {
    let relative = Path::new(request_path.trim_start_matches('/'));
    if relative.components().any(|c| !matches!(c, Component::Normal(_))) {
        return plain(StatusCode::NOT_FOUND, "text/plain", "not found");
    }
    let mut file = dir.join(relative);
    if request_path.ends_with('/') || relative.as_os_str().is_empty() {
        file = file.join("index.html");
    }
    match tokio::fs::read(&file).await {
        Ok(bytes) => plain(StatusCode::OK, content_type(&file), bytes),
        Err(_) => plain(StatusCode::NOT_FOUND, "text/plain", "not found"),
    }
}
