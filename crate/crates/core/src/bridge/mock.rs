//! In-process mock backend serving canned responses over HTTP or stdio.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bridge::client::Endpoint;
use crate::bridge::protocol::{BackendRequest, BackendResponse, PROTOCOL_VERSION, Task};
use crate::error::{Error, Result};

/// Canned response envelope per task. Envelopes are sent verbatim, so a
/// fixture may deliberately hold invalid payloads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockFixture {
    #[serde(default)]
    pub responses: BTreeMap<Task, Value>,
    #[serde(default)]
    pub delay_ms: u64,
}

impl MockFixture {
    pub fn with(mut self, task: Task, response: Value) -> Self {
        self.responses.insert(task, response);
        self
    }

    pub fn delayed(mut self, delay_ms: u64) -> Self {
        self.delay_ms = delay_ms;
        self
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("fixture {}: {e}", path.display())))
    }
}

/// Response line (without newline) for one raw request body.
pub fn respond(fixture: &MockFixture, body: &[u8]) -> String {
    if fixture.delay_ms > 0 {
        thread::sleep(Duration::from_millis(fixture.delay_ms));
    }
    let raw: Value = match serde_json::from_slice(body) {
        Ok(v) => v,
        Err(e) => return BackendResponse::error(format!("malformed JSON body: {e}")).to_line(),
    };
    if raw.get("protocol_version").and_then(Value::as_str) != Some(PROTOCOL_VERSION) {
        return BackendResponse::error(format!("protocol version mismatch: server speaks {PROTOCOL_VERSION:?}"))
            .to_line();
    }
    let request: BackendRequest = match serde_json::from_value(raw) {
        Ok(r) => r,
        Err(e) => return BackendResponse::error(format!("invalid request: {e}")).to_line(),
    };
    if let Err(e) = request.decode_image() {
        return BackendResponse::error(e.to_string()).to_line();
    }
    match fixture.responses.get(&request.task) {
        Some(v) => v.to_string(),
        None => BackendResponse::error("task not configured").to_line(),
    }
}

pub type RequestLog = Arc<Mutex<Vec<Vec<u8>>>>;

/// Serves newline-delimited requests until `input` reaches end of stream.
pub fn serve_stdio(
    fixture: &MockFixture,
    input: impl BufRead,
    mut output: impl Write,
    log: Option<&RequestLog>,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(log) = log {
            log.lock().unwrap_or_else(|p| p.into_inner()).push(line.as_bytes().to_vec());
        }
        writeln!(output, "{}", respond(fixture, line.as_bytes()))?;
        output.flush()?;
    }
    Ok(())
}

/// HTTP mock listening on a local port; stops when dropped.
pub struct MockServer {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    log: RequestLog,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Starts on an ephemeral localhost port.
    pub fn start(fixture: MockFixture) -> Result<Self> {
        Self::start_on("127.0.0.1:0", fixture)
    }

    pub fn start_on(addr: &str, fixture: MockFixture) -> Result<Self> {
        let server = tiny_http::Server::http(addr).map_err(|e| match e.downcast_ref::<io::Error>() {
            Some(io) if io.kind() == io::ErrorKind::AddrInUse => Error::AddressInUse(format!("{addr}: {io}")),
            _ => Error::BackendUnavailable(format!("cannot listen on {addr}: {e}")),
        })?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::BackendUnavailable("mock server has no IP address".into()))?;
        let server = Arc::new(server);
        let log: RequestLog = Arc::default();
        let fixture = Arc::new(fixture);
        let worker = {
            let server = Arc::clone(&server);
            let log = Arc::clone(&log);
            thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    let log = Arc::clone(&log);
                    let fixture = Arc::clone(&fixture);
                    thread::spawn(move || handle_http(req, &fixture, &log));
                }
            })
        };
        Ok(Self { addr, server, log, worker: Some(worker) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn endpoint(&self) -> Endpoint {
        Endpoint::Http(self.url())
    }

    /// Raw bodies of every request received so far, in arrival order.
    pub fn requests(&self) -> Vec<Vec<u8>> {
        self.log.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn stop(self) {}
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn handle_http(mut req: tiny_http::Request, fixture: &MockFixture, log: &RequestLog) {
    let mut body = Vec::new();
    let read = req.as_reader().read_to_end(&mut body);
    log.lock().unwrap_or_else(|p| p.into_inner()).push(body.clone());
    let (code, text) = if req.url() != "/v1/infer" {
        (404, BackendResponse::error(format!("no route {}", req.url())).to_line())
    } else if *req.method() != tiny_http::Method::Post {
        (405, BackendResponse::error("use POST").to_line())
    } else if let Err(e) = read {
        (400, BackendResponse::error(format!("unreadable body: {e}")).to_line())
    } else {
        (200, respond(fixture, &body))
    };
    let header = tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("static header");
    let _ = req.respond(tiny_http::Response::from_string(text).with_status_code(code).with_header(header));
}
