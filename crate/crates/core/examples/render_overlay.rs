//! Structurizes a page and writes the annotated image.
//!
//! `cargo run --example render_overlay -- tests/fixtures/doc.png overlay.png`

use docxchain::bridge::Backends;
use docxchain::loader::load_document;
use docxchain::pipeline::document_structurization;
use docxchain::render::render_overlay;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/doc.png").into());
    let output = args.next().unwrap_or_else(|| "overlay.png".into());
    let doc = load_document(&input, &Default::default())?;
    let report = document_structurization(&doc, &Backends::classical())?;
    let overlay = render_overlay(&doc.pages()[0], &report.pages[0].result);
    std::fs::write(&output, overlay.encode_png())?;
    println!("wrote {output}");
    Ok(())
}
