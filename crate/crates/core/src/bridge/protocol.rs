//! Wire format, version "1".
//!
//! One JSON object per message. Requests carry the page (or crop) as a
//! base64 PNG; responses carry a task-specific `result` payload or an error
//! `message`. Over stdio each message is one line; over HTTP it is the body
//! of `POST /v1/infer`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use base64::Engine;
use base64::engine::general_purpose::STANDARD as B64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Point, Quadrangle, Rect};
use crate::model::{LayoutCategory, LayoutRegion, PageImage, Table, TableCell, TextContent, TextInstance};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    TextDetection,
    TextRecognition,
    LayoutAnalysis,
    TableStructure,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::TextDetection, Task::TextRecognition, Task::LayoutAnalysis, Task::TableStructure];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::TextDetection => "text_detection",
            Task::TextRecognition => "text_recognition",
            Task::LayoutAnalysis => "layout_analysis",
            Task::TableStructure => "table_structure",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub protocol_version: String,
    pub task: Task,
    pub image_png_b64: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl BackendRequest {
    pub fn new(task: Task, image: &PageImage, params: BTreeMap<String, String>) -> Self {
        Self {
            protocol_version: PROTOCOL_VERSION.to_string(),
            task,
            image_png_b64: B64.encode(image.encode_png()),
            params,
        }
    }

    pub fn decode_image(&self) -> Result<PageImage> {
        let bytes = B64
            .decode(&self.image_png_b64)
            .map_err(|e| Error::BackendProtocolError(format!("image_png_b64 is not base64: {e}")))?;
        let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
            .map_err(|e| Error::BackendProtocolError(format!("image is not a valid PNG: {e}")))?;
        PageImage::from_rgb_image(img.to_rgb8(), 96)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<String>,
}

impl BackendResponse {
    pub fn ok(result: Value) -> Self {
        Self { status: Status::Ok, result: Some(result), message: None, protocol_version: None }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self { status: Status::Error, result: None, message: Some(message.into()), protocol_version: None }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }

    /// Parses a response envelope. A `protocol_version` other than "1" is
    /// rejected before anything else is looked at.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text.trim())
            .map_err(|e| Error::BackendProtocolError(format!("response is not JSON: {e}")))?;
        if let Some(v) = raw.get("protocol_version") {
            if v.as_str() != Some(PROTOCOL_VERSION) {
                return Err(Error::BackendProtocolError(format!(
                    "protocol version mismatch: expected {PROTOCOL_VERSION:?}, got {v}"
                )));
            }
        }
        let resp: BackendResponse = serde_json::from_value(raw)
            .map_err(|e| Error::BackendProtocolError(format!("malformed response envelope: {e}")))?;
        Ok(resp)
    }

    /// Checks the status/result/message pairing and returns the payload.
    pub fn into_payload(self) -> Result<Value> {
        match (self.status, self.result, self.message) {
            (Status::Ok, Some(result), None) => Ok(result),
            (Status::Ok, None, _) => Err(Error::BackendProtocolError("status ok but result missing".into())),
            (Status::Ok, Some(_), Some(_)) => {
                Err(Error::BackendProtocolError("status ok must not carry a message".into()))
            }
            (Status::Error, None, Some(msg)) => {
                Err(Error::BackendProtocolError(format!("backend reported error: {msg}")))
            }
            (Status::Error, _, _) => {
                Err(Error::BackendProtocolError("status error must carry a message and no result".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireInstance {
    pub quad: [[f64; 2]; 4],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionPayload {
    pub instances: Vec<WireInstance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionPayload {
    pub text: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRegion {
    pub bbox: [f64; 4],
    pub category: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPayload {
    pub regions: Vec<WireRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCell {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub quad: [[f64; 2]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePayload {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cells: Vec<WireCell>,
}

/// A payload that passed client-side validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Validated {
    Detection(Vec<TextInstance>),
    Recognition(TextContent),
    Layout(Vec<LayoutRegion>),
    Table(Table),
}

fn protocol<E: fmt::Display>(what: &str) -> impl FnOnce(E) -> Error + '_ {
    move |e| Error::BackendProtocolError(format!("{what}: {e}"))
}

fn decode<T: serde::de::DeserializeOwned>(task: Task, payload: Value) -> Result<T> {
    serde_json::from_value(payload).map_err(|e| Error::BackendProtocolError(format!("invalid {task} result: {e}")))
}

fn wire_quad(pts: [[f64; 2]; 4]) -> Result<Quadrangle> {
    Quadrangle::normalized(pts.map(|[x, y]| Point::new(x, y))).map_err(protocol("invalid quad"))
}

fn check_in_bounds(r: &Rect, width: u32, height: u32) -> Result<()> {
    let eps = 1e-6;
    if r.x0 < -eps || r.y0 < -eps || r.x1 > width as f64 + eps || r.y1 > height as f64 + eps {
        return Err(Error::BackendProtocolError(format!("geometry {r:?} outside {width}x{height} image")));
    }
    Ok(())
}

/// Validates a payload for `task` against an image of `width x height`.
///
/// Quads are rewritten into canonical vertex order, tables must tile their
/// grid, and region bboxes must lie inside the image. Unknown layout
/// categories become `other` and produce a warning.
pub fn validate_payload(task: Task, payload: Value, width: u32, height: u32) -> Result<(Validated, Vec<String>)> {
    let mut warnings = Vec::new();
    let validated = match task {
        Task::TextDetection => {
            let p: DetectionPayload = decode(task, payload)?;
            let mut out = Vec::with_capacity(p.instances.len());
            for inst in p.instances {
                let quad = wire_quad(inst.quad)?;
                check_in_bounds(&quad.bounds(), width, height)?;
                out.push(TextInstance::new(quad, inst.confidence).map_err(protocol("instance"))?);
            }
            Validated::Detection(out)
        }
        Task::TextRecognition => {
            let p: RecognitionPayload = decode(task, payload)?;
            Validated::Recognition(TextContent::new(p.text, p.confidence).map_err(protocol("recognition"))?)
        }
        Task::LayoutAnalysis => {
            let p: LayoutPayload = decode(task, payload)?;
            let mut out = Vec::with_capacity(p.regions.len());
            for (i, r) in p.regions.into_iter().enumerate() {
                let [x0, y0, x1, y1] = r.bbox;
                let bbox = Rect::new(x0, y0, x1, y1).map_err(protocol("region bbox"))?;
                check_in_bounds(&bbox, width, height)?;
                let category = r.category.parse().unwrap_or_else(|_| {
                    warnings.push(format!("layout category {:?} not in the closed set, mapped to other", r.category));
                    LayoutCategory::Other
                });
                out.push(LayoutRegion::new(i as u32, bbox, category, r.confidence).map_err(protocol("region"))?);
            }
            Validated::Layout(out)
        }
        Task::TableStructure => {
            let p: TablePayload = decode(task, payload)?;
            let mut cells = Vec::with_capacity(p.cells.len());
            for c in p.cells {
                let quad = wire_quad(c.quad)?;
                check_in_bounds(&quad.bounds(), width, height)?;
                cells.push(TableCell {
                    row_start: c.row_start,
                    row_end: c.row_end,
                    col_start: c.col_start,
                    col_end: c.col_end,
                    quad,
                    content: c.text.map(|t| TextContent { text: t, confidence: 1.0 }),
                });
            }
            let table = Table::new(p.n_rows, p.n_cols, cells).map_err(protocol("table payload violates tiling"))?;
            Validated::Table(table)
        }
    };
    Ok((validated, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn field_names_are_bit_exact() {
        let req = BackendRequest::new(Task::TextDetection, &PageImage::blank(2, 2), BTreeMap::new());
        let v: Value = serde_json::from_str(&req.to_line()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["image_png_b64", "params", "protocol_version", "task"]);
        assert_eq!(v["task"], "text_detection");
        assert_eq!(v["protocol_version"], "1");
        assert_eq!(req.decode_image().unwrap().width(), 2);
    }

    #[test]
    fn ok_without_result_is_protocol_error() {
        let r = BackendResponse::parse(r#"{"status":"ok"}"#).unwrap();
        assert!(matches!(r.into_payload(), Err(Error::BackendProtocolError(_))));
    }

    #[test]
    fn version_mismatch_rejected_before_payload() {
        // The result would also be malformed; the version check must win.
        let e = BackendResponse::parse(r#"{"protocol_version":"2","status":"ok","result":7}"#).unwrap_err();
        assert!(e.to_string().contains("version mismatch"), "{e}");
    }

    #[test]
    fn tiling_violation_rejected() {
        let payload = json!({
            "n_rows": 1, "n_cols": 2,
            "cells": [{"row_start":0,"row_end":1,"col_start":0,"col_end":1,
                        "quad": [[0,0],[5,0],[5,5],[0,5]]}]
        });
        let e = validate_payload(Task::TableStructure, payload, 10, 10).unwrap_err();
        assert!(matches!(e, Error::BackendProtocolError(_)));
    }

    #[test]
    fn unknown_category_maps_to_other() {
        let payload = json!({"regions": [{"bbox": [0,0,5,5], "category": "sidebar", "confidence": 0.5}]});
        let (v, w) = validate_payload(Task::LayoutAnalysis, payload, 10, 10).unwrap();
        let Validated::Layout(regions) = v else { panic!() };
        assert_eq!(regions[0].category, LayoutCategory::Other);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn out_of_bounds_region_rejected() {
        let payload = json!({"regions": [{"bbox": [0,0,50,5], "category": "text", "confidence": 0.5}]});
        assert!(validate_payload(Task::LayoutAnalysis, payload, 10, 10).is_err());
    }

    #[test]
    fn detection_quads_are_normalized() {
        let payload = json!({"instances": [{"quad": [[4,2],[0,2],[0,0],[4,0]], "confidence": 0.9}]});
        let (v, _) = validate_payload(Task::TextDetection, payload, 10, 10).unwrap();
        let Validated::Detection(inst) = v else { panic!() };
        assert_eq!(inst[0].quad, Quadrangle::from_rect(0.0, 0.0, 4.0, 2.0).unwrap());
    }

    fn arb_response() -> impl Strategy<Value = BackendResponse> {
        prop_oneof![
            ("[a-z ]{0,12}", 0.0..=1.0f64).prop_map(|(t, c)| BackendResponse::ok(json!({"text": t, "confidence": c}))),
            "[ -~]{1,20}".prop_map(BackendResponse::error),
        ]
    }

    proptest! {
        #[test]
        fn responses_round_trip(resp in arb_response()) {
            let parsed = BackendResponse::parse(&resp.to_line()).unwrap();
            prop_assert_eq!(parsed, resp);
        }
    }
}
