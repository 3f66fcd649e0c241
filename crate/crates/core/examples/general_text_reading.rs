//! Reads every line of a page in reading order.

use docxchain::bridge::Backends;
use docxchain::loader::load_document;
use docxchain::pipeline::general_text_reading;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reading.png").into());
    let report = general_text_reading(&load_document(&path, &Default::default())?, &Backends::classical())?;
    for t in report.instances() {
        println!("{}", t.text().unwrap_or(""));
    }
    Ok(())
}
