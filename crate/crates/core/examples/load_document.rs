//! Loads an image or PDF and prints page sizes.
//!
//! `cargo run --example load_document -- tests/fixtures/doc3.pdf all 150`

use docxchain::loader::{LoadOptions, load_document};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/doc3.pdf").into());
    let mut opts = LoadOptions::default();
    if let Some(p) = args.next() {
        opts.page_selection = p.parse()?;
    }
    if let Some(d) = args.next() {
        opts.dpi = d.parse()?;
    }
    let doc = load_document(&path, &opts)?;
    println!("{} ({} page(s) selected)", doc.source_id, doc.pages().len());
    for (i, page) in doc.page_indices().iter().zip(doc.pages()) {
        println!("  page {i}: {}x{} px at {} dpi", page.width(), page.height(), page.dpi());
    }
    Ok(())
}
