//! Recovers the grid of a ruled table and prints it as HTML.

use docxchain::loader::load_document;
use docxchain::table::{ExportFormat, build_grid, detect_separators, export_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/table.png").into());
    let doc = load_document(&path, &Default::default())?;
    let seps = detect_separators(&doc.pages()[0])?;
    println!("row separators {:?}", seps.row_seps);
    println!("column separators {:?}", seps.col_seps);
    let table = build_grid(&seps)?;
    println!("{}x{} grid, {} cell(s)", table.n_rows(), table.n_cols(), table.cells().len());
    print!("{}", export_table(&table, ExportFormat::Html)?);
    Ok(())
}
