//! Canonical JSON serialization of pipeline reports.
//!
//! Keys appear in a fixed order, coordinates are rounded to three decimals,
//! and the text ends with a newline, so parsing and re-serializing any
//! output reproduces it byte for byte.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Quadrangle, Rect};
use crate::model::{Element, LayoutRegion, Table, TableCell, TextInstance};
use crate::pipeline::{PageResult, PipelineReport};

pub const OUTPUT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub version: String,
    pub pipeline: String,
    pub source: String,
    pub pages: Vec<OutputPage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPage {
    pub page_index: usize,
    pub elements: Vec<OutputElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputElement {
    Instance(InstanceJson),
    Region(RegionElementJson),
    Table(TableElementJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub quad: [[f64; 2]; 4],
    pub det_confidence: f64,
    pub text: Option<String>,
    pub rec_confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub id: u32,
    pub bbox: [f64; 4],
    pub category: String,
    pub confidence: f64,
}

/// An element of a structured page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionElementJson {
    pub region: RegionJson,
    pub instances: Vec<InstanceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableJson>,
}

/// The single element of a table parsing page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableElementJson {
    pub region: RegionJson,
    pub table: TableJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cells: Vec<CellJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub quad: [[f64; 2]; 4],
    pub text: Option<String>,
}

/// Rounds a coordinate to three decimals, folding negative zero.
pub fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0 + 0.0
}

fn quad_json(q: &Quadrangle) -> [[f64; 2]; 4] {
    q.vertices().map(|p| [round3(p.x), round3(p.y)])
}

fn bbox_json(r: &Rect) -> [f64; 4] {
    [round3(r.x0), round3(r.y0), round3(r.x1), round3(r.y1)]
}

pub fn instance_json(t: &TextInstance) -> InstanceJson {
    InstanceJson {
        quad: quad_json(&t.quad),
        det_confidence: t.det_confidence,
        text: t.content.as_ref().map(|c| c.text.clone()),
        rec_confidence: t.content.as_ref().map(|c| c.confidence),
    }
}

pub fn region_json(r: &LayoutRegion) -> RegionJson {
    RegionJson {
        id: r.id,
        bbox: bbox_json(&r.bbox),
        category: r.category.as_str().to_owned(),
        confidence: r.confidence,
    }
}

fn cell_json(c: &TableCell) -> CellJson {
    CellJson {
        row_start: c.row_start,
        row_end: c.row_end,
        col_start: c.col_start,
        col_end: c.col_end,
        quad: quad_json(&c.quad),
        text: c.content.as_ref().map(|t| t.text.clone()),
    }
}

pub fn table_to_json(t: &Table) -> TableJson {
    TableJson { n_rows: t.n_rows(), n_cols: t.n_cols(), cells: t.cells().iter().map(cell_json).collect() }
}

fn element_json(e: &Element) -> RegionElementJson {
    RegionElementJson {
        region: region_json(e.region()),
        instances: e.instances().iter().map(instance_json).collect(),
        table: match e {
            Element::Table { table, .. } => Some(table_to_json(table)),
            Element::Text { .. } => None,
        },
    }
}

pub fn report_to_output(report: &PipelineReport) -> OutputDocument {
    OutputDocument {
        version: OUTPUT_VERSION.to_owned(),
        pipeline: report.pipeline.as_str().to_owned(),
        source: report.source.clone(),
        pages: report
            .pages
            .iter()
            .map(|p| OutputPage {
                page_index: p.page_index,
                elements: match &p.result {
                    PageResult::Reading(v) => v.iter().map(|t| OutputElement::Instance(instance_json(t))).collect(),
                    PageResult::Table(t) => vec![OutputElement::Table(TableElementJson {
                        region: region_json(&t.region),
                        table: table_to_json(&t.table),
                    })],
                    PageResult::Structured(d) => {
                        d.elements.iter().map(|e| OutputElement::Region(element_json(e))).collect()
                    }
                },
            })
            .collect(),
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types always serialize");
    s.push('\n');
    s
}

/// Serializes a report to canonical JSON text.
pub fn serialize_result(report: &PipelineReport) -> String {
    to_pretty(&report_to_output(report))
}

pub fn serialize_output(doc: &OutputDocument) -> String {
    to_pretty(doc)
}

pub fn parse_output(text: &str) -> Result<OutputDocument> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("not a docxchain output document: {e}")))
}

/// Canonical JSON of a single table.
pub fn table_json(t: &Table) -> String {
    to_pretty(&table_to_json(t))
}
