//! Routes text recognition to an external backend, here the in-repo mock
//! server, while detection stays classical.

use docxchain::bridge::{Backend, Backends, MockFixture, MockServer, Task};
use docxchain::loader::load_document;
use docxchain::pipeline::general_text_reading;
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = MockFixture::default().with(
        Task::TextRecognition,
        json!({"status": "ok", "result": {"text": "(from the mock backend)", "confidence": 0.9}}),
    );
    let server = MockServer::start(fixture)?;
    println!("mock backend at {}", server.url());

    let backends = Backends { text_recognition: Backend::external(server.endpoint(), 5_000), ..Backends::classical() };
    let doc = load_document(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reading.png"), &Default::default())?;
    let report = general_text_reading(&doc, &backends)?;
    for t in report.instances() {
        let b = t.quad.bounds();
        println!("[{:.0} {:.0}] {}", b.x0, b.y0, t.text().unwrap_or(""));
    }
    println!("{} request(s) served", server.requests().len());
    Ok(())
}
