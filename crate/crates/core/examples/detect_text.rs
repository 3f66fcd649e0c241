//! Finds text lines on a page with the classical detector.

use docxchain::bridge::Backend;
use docxchain::detection::detect_text;
use docxchain::loader::load_document;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reading.png").into());
    let doc = load_document(&path, &Default::default())?;
    let instances = detect_text(&doc.pages()[0], &Backend::Classical)?;
    for t in &instances {
        let b = t.quad.bounds();
        println!("[{:>5.0} {:>5.0} {:>5.0} {:>5.0}] confidence {:.2}", b.x0, b.y0, b.x1, b.y1, t.det_confidence);
    }
    println!("{} line(s)", instances.len());
    Ok(())
}
