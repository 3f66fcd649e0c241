use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::str::FromStr;
use std::sync::Mutex;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use crate::bridge::protocol::{BackendRequest, BackendResponse, Task, Validated, validate_payload};
use crate::error::{Error, Result};
use crate::model::PageImage;

pub const ENDPOINT_ENV: &str = "DOCXCHAIN_BACKEND_ENDPOINT";
pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;

/// Where an external backend lives.
///
/// Parsed from `http://host:port[/path]` or `stdio:<command> [args...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Http(String),
    Process(Vec<String>),
}

impl Endpoint {
    pub fn from_env() -> Option<Endpoint> {
        std::env::var(ENDPOINT_ENV).ok()?.parse().ok()
    }

    fn infer_url(base: &str) -> String {
        let base = base.trim_end_matches('/');
        if base.ends_with("/v1/infer") { base.to_string() } else { format!("{base}/v1/infer") }
    }
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(Endpoint::Http(s.to_string()));
        }
        if let Some(cmd) = s.strip_prefix("stdio:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err(Error::InvalidInput("stdio endpoint needs a command".into()));
            }
            return Ok(Endpoint::Process(argv));
        }
        Err(Error::InvalidInput(format!("endpoint {s:?} must start with http://, https:// or stdio:")))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Http(url) => f.write_str(url),
            Endpoint::Process(argv) => write!(f, "stdio:{}", argv.join(" ")),
        }
    }
}

struct StdioChild {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl StdioChild {
    fn spawn(argv: &[String]) -> Result<Self> {
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::BackendUnavailable(format!("cannot spawn {:?}: {e}", argv[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Protocol client. Safe to share between threads: HTTP calls are
/// independent, stdio calls take turns on the single child process.
pub struct BackendClient {
    endpoint: Endpoint,
    timeout: Duration,
    stdio: Mutex<Option<StdioChild>>,
}

impl fmt::Debug for BackendClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendClient").field("endpoint", &self.endpoint).field("timeout", &self.timeout).finish()
    }
}

impl BackendClient {
    pub fn new(endpoint: Endpoint, timeout_ms: u64) -> Self {
        Self { endpoint, timeout: Duration::from_millis(timeout_ms.max(1)), stdio: Mutex::new(None) }
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Sends one request and parses the response envelope.
    pub fn call(&self, request: &BackendRequest) -> Result<BackendResponse> {
        match &self.endpoint {
            Endpoint::Http(url) => self.call_http(url, request),
            Endpoint::Process(argv) => self.call_stdio(argv, request),
        }
    }

    /// Builds the request for `task`, sends it and validates the payload
    /// against an image of the same size.
    pub fn infer(
        &self,
        task: Task,
        image: &PageImage,
        params: BTreeMap<String, String>,
    ) -> Result<(Validated, Vec<String>)> {
        let request = BackendRequest::new(task, image, params);
        let payload = self.call(&request)?.into_payload()?;
        validate_payload(task, payload, image.width(), image.height())
    }

    fn call_http(&self, url: &str, request: &BackendRequest) -> Result<BackendResponse> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(self.timeout)).http_status_as_error(false).build().into();
        let url = Endpoint::infer_url(url);
        let mut resp = agent.post(&url).header("Content-Type", "application/json").send(request.to_line()).map_err(
            |e| match e {
                ureq::Error::Timeout(_) => {
                    Error::BackendUnavailable(format!("timeout after {:?} on {url}", self.timeout))
                }
                other => Error::BackendUnavailable(format!("{url}: {other}")),
            },
        )?;
        let status = resp.status();
        let body = resp.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => Error::BackendUnavailable(format!("timeout after {:?} on {url}", self.timeout)),
            other => Error::BackendProtocolError(format!("unreadable response body: {other}")),
        })?;
        BackendResponse::parse(&body).map_err(|e| {
            if status.is_success() { e } else { Error::BackendProtocolError(format!("HTTP {status} from {url}: {e}")) }
        })
    }

    fn call_stdio(&self, argv: &[String], request: &BackendRequest) -> Result<BackendResponse> {
        let mut guard = self.stdio.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(StdioChild::spawn(argv)?);
        }
        let proc = guard.as_mut().expect("just spawned");
        let mut line = request.to_line();
        line.push('\n');
        if let Err(e) = proc.stdin.write_all(line.as_bytes()).and_then(|_| proc.stdin.flush()) {
            if let Some(child) = guard.take() {
                child.kill();
            }
            return Err(Error::BackendUnavailable(format!("backend process closed stdin: {e}")));
        }
        match proc.lines.recv_timeout(self.timeout) {
            Ok(reply) => BackendResponse::parse(&reply),
            Err(RecvTimeoutError::Timeout) => {
                // The child may still answer later, which would desync the
                // stream, so it is replaced.
                if let Some(child) = guard.take() {
                    child.kill();
                }
                Err(Error::BackendUnavailable(format!("timeout after {:?} waiting for backend process", self.timeout)))
            }
            Err(RecvTimeoutError::Disconnected) => {
                if let Some(child) = guard.take() {
                    child.kill();
                }
                Err(Error::BackendUnavailable("backend process exited".into()))
            }
        }
    }
}

impl Drop for BackendClient {
    fn drop(&mut self) {
        if let Some(c) = self.stdio.get_mut().ok().and_then(Option::take) {
            c.kill();
        }
    }
}

/// One-shot call with a fresh client.
pub fn call_backend(endpoint: &Endpoint, request: &BackendRequest, timeout_ms: u64) -> Result<BackendResponse> {
    BackendClient::new(endpoint.clone(), timeout_ms).call(request)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_parsing() {
        assert_eq!("http://127.0.0.1:9/".parse::<Endpoint>().unwrap(), Endpoint::Http("http://127.0.0.1:9/".into()));
        assert_eq!(
            "stdio:python3 serve.py --x".parse::<Endpoint>().unwrap(),
            Endpoint::Process(vec!["python3".into(), "serve.py".into(), "--x".into()])
        );
        assert!("stdio:".parse::<Endpoint>().is_err());
        assert!("ftp://x".parse::<Endpoint>().is_err());
        assert_eq!(Endpoint::infer_url("http://h:1/"), "http://h:1/v1/infer");
        assert_eq!(Endpoint::infer_url("http://h:1/v1/infer"), "http://h:1/v1/infer");
    }

    #[test]
    fn unreachable_http_is_unavailable() {
        // Bind then drop to get a port with nothing listening.
        let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let ep = Endpoint::Http(format!("http://127.0.0.1:{port}"));
        let req = BackendRequest::new(Task::TextDetection, &PageImage::blank(4, 4), BTreeMap::new());
        let err = call_backend(&ep, &req, 2000).unwrap_err();
        assert!(matches!(err, Error::BackendUnavailable(_)), "{err}");
    }

    #[test]
    fn missing_program_is_unavailable() {
        let ep = Endpoint::Process(vec!["/nonexistent/docxchain-backend".into()]);
        let req = BackendRequest::new(Task::TextDetection, &PageImage::blank(4, 4), BTreeMap::new());
        assert!(matches!(call_backend(&ep, &req, 500), Err(Error::BackendUnavailable(_))));
    }
}
