//! Parses a table and prints its cells with their text.

use docxchain::bridge::Backends;
use docxchain::loader::load_document;
use docxchain::pipeline::{PageResult, table_parsing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/table.png").into());
    let report = table_parsing(&load_document(&path, &Default::default())?, &Backends::classical(), None)?;
    for page in &report.pages {
        if let PageResult::Table(t) = &page.result {
            for c in t.table.cells() {
                println!("rows {}..{} cols {}..{}  {}", c.row_start, c.row_end, c.col_start, c.col_end, c.text());
            }
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
