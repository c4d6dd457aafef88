//! Start the HTTP API on an ephemeral port, walk through a review with plain
//! HTTP/1.1 requests and shut down.
//!
//!     cargo run -p darkgraph --example http_service

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;

use darkgraph::corpus::seed_graph;
use darkgraph::service::{serve_on, Workspace};

fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    let status = response.lines().next().unwrap_or_default().to_owned();
    let payload = response.split("\r\n\r\n").nth(1).unwrap_or_default();
    let short: String = payload.chars().take(160).collect();
    Ok(format!("{status}  {short}"))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let workspace = Arc::new(Workspace::in_memory(seed_graph()));
    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = runtime.spawn(serve_on(listener, workspace.clone(), None, async {
        let _ = stopped.await;
    }));
    println!("listening on http://{addr}");

    let id = "merge--comparison-obfuscation--price-comparison-prevention";
    for (method, path, body) in [
        ("GET", "/prominence", ""),
        ("POST", "/strip", ""),
        ("POST", "/detect", r#"{"resolution": 1.0, "seed": 0}"#),
        ("GET", "/candidates", ""),
        ("POST", &format!("/candidates/{id}/verdict"), r#"{"verdict": "approve", "rationale": ""}"#),
        ("POST", &format!("/candidates/{id}/verdict"), r#"{"verdict": "approve", "rationale": "same tactic"}"#),
        ("POST", &format!("/enact/{id}"), ""),
        ("POST", &format!("/enact/{id}"), ""),
        ("POST", "/audit", r#"{"detected": ["Nagging"]}"#),
        ("GET", "/changelog", ""),
    ] {
        println!("{method} {path}\n  {}", request(addr, method, path, body)?);
    }

    let _ = stop.send(());
    runtime.block_on(server)??;
    println!("graph is now v{}", workspace.snapshot().graph().version());
    Ok(())
}
