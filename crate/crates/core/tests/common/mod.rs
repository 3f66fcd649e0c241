#![allow(dead_code)]

use std::path::{Path, PathBuf};

use docxchain::cli::run_cli_with;

pub fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

/// Golden cases: output name and CLI arguments. Inputs are given relative
/// to the crate root so the `source` field is the same on every machine.
pub const GOLDEN_CASES: [(&str, &[&str]); 6] = [
    ("read_blank.json", &["read", "tests/fixtures/blank.png"]),
    ("read_reading.json", &["read", "tests/fixtures/reading.png"]),
    ("table_table.json", &["table", "tests/fixtures/table.png"]),
    ("table_table.html", &["table", "tests/fixtures/table.png", "--format", "html"]),
    ("table_grid.json", &["table", "tests/fixtures/grid.png"]),
    ("structurize_doc.json", &["structurize", "tests/fixtures/doc.png"]),
];

pub fn golden_path(name: &str) -> PathBuf {
    manifest_dir().join("tests/golden").join(name)
}

/// Runs the CLI from the crate root and returns its standard output.
pub fn cli_stdout(args: &[&str]) -> Result<String, String> {
    std::env::set_current_dir(manifest_dir()).map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["docxchain"];
    argv.extend_from_slice(args);
    match run_cli_with(argv, None, &mut out, &mut err) {
        0 => String::from_utf8(out).map_err(|e| e.to_string()),
        code => Err(format!("exit {code}: {}", String::from_utf8_lossy(&err))),
    }
}
