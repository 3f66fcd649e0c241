//! Structurizes a page and prints an outline of its elements.

use docxchain::Element;
use docxchain::bridge::Backends;
use docxchain::loader::load_document;
use docxchain::pipeline::{PageResult, document_structurization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/doc.png").into());
    let report = document_structurization(&load_document(&path, &Default::default())?, &Backends::classical())?;
    for page in &report.pages {
        let PageResult::Structured(doc) = &page.result else { continue };
        for e in &doc.elements {
            let r = e.region();
            match e {
                Element::Table { table, .. } => {
                    println!("{:<7} {}x{} table", r.category.as_str(), table.n_rows(), table.n_cols())
                }
                Element::Text { instances, .. } => {
                    let first = instances.first().and_then(|t| t.text()).unwrap_or("");
                    println!("{:<7} {first} ({} line(s))", r.category.as_str(), instances.len());
                }
            }
        }
    }
    Ok(())
}
