//! Segments a page into categorized regions.

use docxchain::bridge::Backend;
use docxchain::layout::{LayoutParams, analyze_layout};
use docxchain::loader::load_document;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/doc.png").into());
    let doc = load_document(&path, &Default::default())?;
    for r in analyze_layout(&doc.pages()[0], &LayoutParams::default(), &Backend::Classical)? {
        let b = r.bbox;
        println!(
            "#{:<2} {:<8} [{:.0} {:.0} {:.0} {:.0}] {:.2}",
            r.id,
            r.category.as_str(),
            b.x0,
            b.y0,
            b.x1,
            b.y1,
            r.confidence
        );
    }
    Ok(())
}
