//! Protocol conformance vectors shared by every backend implementation.
//!
//! Each vector is a canned response envelope for one task together with the
//! outcome a conforming client must produce when it receives it for a
//! request carrying a [`VECTOR_IMAGE_SIZE`] image. The suite is also
//! published as JSON (`tests/fixtures/protocol_vectors.json`) for backends
//! written in other languages.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Value, json};

use crate::bridge::client::BackendClient;
use crate::bridge::protocol::{Task, Validated};
use crate::error::Error;
use crate::model::PageImage;

pub const VECTOR_IMAGE_SIZE: (u32, u32) = (200, 100);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Valid,
    /// Valid, with exactly this many client warnings.
    ValidWithWarnings(usize),
    ProtocolError,
    Unavailable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Vector {
    pub name: &'static str,
    pub task: Task,
    pub response: Value,
    /// Server-side delay before answering.
    pub delay_ms: u64,
    pub expect: Expect,
}

fn ok(result: Value) -> Value {
    json!({"status": "ok", "result": result})
}

fn vector(name: &'static str, task: Task, response: Value, expect: Expect) -> Vector {
    Vector { name, task, response, delay_ms: 0, expect }
}

pub fn vectors() -> Vec<Vector> {
    use Expect::*;
    use Task::*;
    let quad = json!([[10, 10], [60, 10], [60, 30], [10, 30]]);
    let unit_cells = json!([
        {"row_start": 0, "row_end": 1, "col_start": 0, "col_end": 1, "quad": [[0, 0], [50, 0], [50, 40], [0, 40]]},
        {"row_start": 0, "row_end": 1, "col_start": 1, "col_end": 2, "quad": [[50, 0], [100, 0], [100, 40], [50, 40]], "text": "b"},
        {"row_start": 1, "row_end": 2, "col_start": 0, "col_end": 2, "quad": [[0, 40], [100, 40], [100, 80], [0, 80]]}
    ]);
    vec![
        vector("detection/valid", TextDetection, ok(json!({"instances": [{"quad": quad, "confidence": 0.9}]})), Valid),
        vector("detection/empty", TextDetection, ok(json!({"instances": []})), Valid),
        vector(
            "detection/counterclockwise-order",
            TextDetection,
            ok(json!({"instances": [{"quad": [[10, 10], [10, 30], [60, 30], [60, 10]], "confidence": 0.5}]})),
            Valid,
        ),
        vector(
            "detection/confidence-above-one",
            TextDetection,
            ok(json!({"instances": [{"quad": quad, "confidence": 1.5}]})),
            ProtocolError,
        ),
        vector(
            "detection/out-of-bounds",
            TextDetection,
            ok(json!({"instances": [{"quad": [[150, 10], [260, 10], [260, 30], [150, 30]], "confidence": 0.9}]})),
            ProtocolError,
        ),
        vector(
            "detection/degenerate-quad",
            TextDetection,
            ok(json!({"instances": [{"quad": [[10, 10], [20, 10], [30, 10], [40, 10]], "confidence": 0.9}]})),
            ProtocolError,
        ),
        vector("detection/missing-instances", TextDetection, ok(json!({})), ProtocolError),
        vector("recognition/valid", TextRecognition, ok(json!({"text": "Total: 42", "confidence": 0.8})), Valid),
        vector(
            "recognition/negative-confidence",
            TextRecognition,
            ok(json!({"text": "a", "confidence": -0.1})),
            ProtocolError,
        ),
        vector(
            "recognition/text-not-string",
            TextRecognition,
            ok(json!({"text": 7, "confidence": 0.5})),
            ProtocolError,
        ),
        vector(
            "layout/valid",
            LayoutAnalysis,
            ok(json!({"regions": [{"bbox": [0, 0, 100, 50], "category": "title", "confidence": 0.9}]})),
            Valid,
        ),
        vector(
            "layout/unknown-category",
            LayoutAnalysis,
            ok(json!({"regions": [{"bbox": [0, 0, 100, 50], "category": "sidebar", "confidence": 0.9}]})),
            ValidWithWarnings(1),
        ),
        vector(
            "layout/inverted-bbox",
            LayoutAnalysis,
            ok(json!({"regions": [{"bbox": [100, 50, 0, 0], "category": "text", "confidence": 0.9}]})),
            ProtocolError,
        ),
        vector("table/valid", TableStructure, ok(json!({"n_rows": 2, "n_cols": 2, "cells": unit_cells})), Valid),
        vector(
            "table/tiling-overlap",
            TableStructure,
            ok(json!({"n_rows": 1, "n_cols": 2, "cells": [
                {"row_start": 0, "row_end": 1, "col_start": 0, "col_end": 2, "quad": [[0, 0], [100, 0], [100, 40], [0, 40]]},
                {"row_start": 0, "row_end": 1, "col_start": 1, "col_end": 2, "quad": [[50, 0], [100, 0], [100, 40], [50, 40]]}
            ]})),
            ProtocolError,
        ),
        vector(
            "table/tiling-gap",
            TableStructure,
            ok(json!({"n_rows": 1, "n_cols": 2, "cells": [
                {"row_start": 0, "row_end": 1, "col_start": 0, "col_end": 1, "quad": [[0, 0], [50, 0], [50, 40], [0, 40]]}
            ]})),
            ProtocolError,
        ),
        vector(
            "envelope/backend-error",
            TextDetection,
            json!({"status": "error", "message": "model not loaded"}),
            ProtocolError,
        ),
        vector("envelope/ok-without-result", TextRecognition, json!({"status": "ok"}), ProtocolError),
        vector(
            "envelope/version-mismatch",
            TextRecognition,
            json!({"status": "ok", "protocol_version": "2", "result": {"text": "a", "confidence": 1.0}}),
            ProtocolError,
        ),
        vector("envelope/not-an-object", LayoutAnalysis, json!("garbage"), ProtocolError),
        Vector {
            name: "transport/timeout",
            task: TextRecognition,
            response: ok(json!({"text": "late", "confidence": 1.0})),
            delay_ms: 1500,
            expect: Unavailable,
        },
    ]
}

/// The suite as pretty-printed JSON with a trailing newline.
pub fn vectors_json() -> String {
    let mut s = serde_json::to_string_pretty(&vectors()).expect("vectors serialize");
    s.push('\n');
    s
}

/// Client timeout to use with the vectors; shorter than the timeout
/// vector's delay and far longer than any other round trip.
pub const VECTOR_TIMEOUT_MS: u64 = 500;

/// Sends one request for `v.task` through `client` and compares the
/// outcome with the vector's expectation.
pub fn check(client: &BackendClient, v: &Vector) -> Result<(), String> {
    let (w, h) = VECTOR_IMAGE_SIZE;
    let image = PageImage::blank(w, h);
    let outcome = client.infer(v.task, &image, BTreeMap::new());
    match (v.expect, &outcome) {
        (Expect::Valid, Ok((validated, warnings))) if warnings.is_empty() => task_matches(v.task, validated),
        (Expect::ValidWithWarnings(n), Ok((validated, warnings))) if warnings.len() == n => {
            task_matches(v.task, validated)
        }
        (Expect::ProtocolError, Err(Error::BackendProtocolError(_))) => Ok(()),
        (Expect::Unavailable, Err(Error::BackendUnavailable(_))) => Ok(()),
        (expect, got) => Err(format!("{}: expected {expect:?}, got {got:?}", v.name)),
    }
}

fn task_matches(task: Task, v: &Validated) -> Result<(), String> {
    let same = matches!(
        (task, v),
        (Task::TextDetection, Validated::Detection(_))
            | (Task::TextRecognition, Validated::Recognition(_))
            | (Task::LayoutAnalysis, Validated::Layout(_))
            | (Task::TableStructure, Validated::Table(_))
    );
    if same { Ok(()) } else { Err(format!("{task} answered with {v:?}")) }
}
