//! Wire protocol to external model backends, its client and a mock server.

pub mod client;
pub mod mock;
pub mod protocol;
pub mod vectors;

use std::sync::Arc;

pub use client::{BackendClient, DEFAULT_TIMEOUT_MS, ENDPOINT_ENV, Endpoint, call_backend};
pub use mock::{MockFixture, MockServer, serve_stdio};
pub use protocol::{BackendRequest, BackendResponse, PROTOCOL_VERSION, Status, Task, Validated};

/// Which implementation serves one task.
#[derive(Debug, Clone, Default)]
pub enum Backend {
    #[default]
    Classical,
    External(Arc<BackendClient>),
}

impl Backend {
    pub fn external(endpoint: Endpoint, timeout_ms: u64) -> Self {
        Backend::External(Arc::new(BackendClient::new(endpoint, timeout_ms)))
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Backend::Classical)
    }
}

/// Backend choice per task.
#[derive(Debug, Clone, Default)]
pub struct Backends {
    pub text_detection: Backend,
    pub text_recognition: Backend,
    pub layout_analysis: Backend,
    pub table_structure: Backend,
}

impl Backends {
    pub fn classical() -> Self {
        Self::default()
    }

    pub fn get(&self, task: Task) -> &Backend {
        match task {
            Task::TextDetection => &self.text_detection,
            Task::TextRecognition => &self.text_recognition,
            Task::LayoutAnalysis => &self.layout_analysis,
            Task::TableStructure => &self.table_structure,
        }
    }

    pub fn set(&mut self, task: Task, backend: Backend) {
        match task {
            Task::TextDetection => self.text_detection = backend,
            Task::TextRecognition => self.text_recognition = backend,
            Task::LayoutAnalysis => self.layout_analysis = backend,
            Task::TableStructure => self.table_structure = backend,
        }
    }
}
