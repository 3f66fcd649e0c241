//! Byte-exact output snapshots. Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod common;

use common::{GOLDEN_CASES, cli_stdout, golden_path};
use docxchain::bridge::vectors::vectors_json;
use docxchain::output::{parse_output, serialize_output};

#[test]
fn outputs_match_goldens() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, args) in GOLDEN_CASES {
        let got = cli_stdout(args).unwrap();
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(got == want, "{name} differs from {}", path.display());
    }
}

#[test]
fn json_goldens_round_trip() {
    for (name, _) in GOLDEN_CASES.iter().filter(|(n, _)| n.ends_with(".json")) {
        let text = std::fs::read_to_string(golden_path(name)).unwrap();
        assert_eq!(serialize_output(&parse_output(&text).unwrap()), text, "{name}");
    }
}

#[test]
fn repeated_runs_are_identical() {
    let (_, args) = GOLDEN_CASES[5];
    assert_eq!(cli_stdout(args).unwrap(), cli_stdout(args).unwrap());
}

#[test]
fn published_protocol_vectors_are_current() {
    let path = common::fixture("protocol_vectors.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, vectors_json()).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), vectors_json());
}
