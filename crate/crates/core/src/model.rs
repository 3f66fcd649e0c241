//! Domain types shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Quadrangle, Rect};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) { Ok(()) } else { Err(Error::InvalidInput(format!("{name} {v} outside [0, 1]"))) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextContent {
    pub text: String,
    pub confidence: f64,
}

impl TextContent {
    pub fn new(text: impl Into<String>, confidence: f64) -> Result<Self> {
        check_unit("confidence", confidence)?;
        Ok(Self { text: text.into(), confidence })
    }

    /// Placeholder content for an instance whose recognition failed.
    pub fn failed() -> Self {
        Self { text: String::new(), confidence: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextInstance {
    pub quad: Quadrangle,
    pub det_confidence: f64,
    pub content: Option<TextContent>,
}

impl TextInstance {
    pub fn new(quad: Quadrangle, det_confidence: f64) -> Result<Self> {
        check_unit("det_confidence", det_confidence)?;
        Ok(Self { quad, det_confidence, content: None })
    }

    pub fn with_content(mut self, content: TextContent) -> Self {
        self.content = Some(content);
        self
    }

    pub fn text(&self) -> Option<&str> {
        self.content.as_ref().map(|c| c.text.as_str())
    }

    pub fn translate(&self, dx: f64, dy: f64) -> TextInstance {
        TextInstance { quad: self.quad.translate(dx, dy), ..self.clone() }
    }
}

/// Closed set of region categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutCategory {
    Title,
    Text,
    List,
    Table,
    Figure,
    Caption,
    Header,
    Footer,
    Other,
}

impl LayoutCategory {
    pub const ALL: [LayoutCategory; 9] = [
        LayoutCategory::Title,
        LayoutCategory::Text,
        LayoutCategory::List,
        LayoutCategory::Table,
        LayoutCategory::Figure,
        LayoutCategory::Caption,
        LayoutCategory::Header,
        LayoutCategory::Footer,
        LayoutCategory::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayoutCategory::Title => "title",
            LayoutCategory::Text => "text",
            LayoutCategory::List => "list",
            LayoutCategory::Table => "table",
            LayoutCategory::Figure => "figure",
            LayoutCategory::Caption => "caption",
            LayoutCategory::Header => "header",
            LayoutCategory::Footer => "footer",
            LayoutCategory::Other => "other",
        }
    }
}

impl fmt::Display for LayoutCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayoutCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown layout category {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRegion {
    pub id: u32,
    pub bbox: Rect,
    pub category: LayoutCategory,
    pub confidence: f64,
}

impl LayoutRegion {
    pub fn new(id: u32, bbox: Rect, category: LayoutCategory, confidence: f64) -> Result<Self> {
        check_unit("region confidence", confidence)?;
        Ok(Self { id, bbox, category, confidence })
    }
}

/// One cell of a table; grid indices are half-open.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub quad: Quadrangle,
    pub content: Option<TextContent>,
}

impl TableCell {
    pub fn row_span(&self) -> usize {
        self.row_end - self.row_start
    }

    pub fn col_span(&self) -> usize {
        self.col_end - self.col_start
    }

    pub fn is_unit(&self) -> bool {
        self.row_span() == 1 && self.col_span() == 1
    }

    pub fn text(&self) -> &str {
        self.content.as_ref().map_or("", |c| c.text.as_str())
    }
}

/// A grid of cells that tiles `n_rows x n_cols` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    n_rows: usize,
    n_cols: usize,
    cells: Vec<TableCell>,
}

impl Table {
    /// Validates the tiling invariant: every grid unit is covered by exactly
    /// one cell. Cells are stored sorted by `(row_start, col_start)`.
    pub fn new(n_rows: usize, n_cols: usize, mut cells: Vec<TableCell>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidInput("table needs at least one row and column".into()));
        }
        let mut cover = vec![0u32; n_rows * n_cols];
        for cell in &cells {
            if cell.row_start >= cell.row_end
                || cell.col_start >= cell.col_end
                || cell.row_end > n_rows
                || cell.col_end > n_cols
            {
                return Err(Error::InvalidInput(format!(
                    "cell rows {}..{} cols {}..{} outside {n_rows}x{n_cols} grid",
                    cell.row_start, cell.row_end, cell.col_start, cell.col_end
                )));
            }
            for r in cell.row_start..cell.row_end {
                for c in cell.col_start..cell.col_end {
                    cover[r * n_cols + c] += 1;
                }
            }
        }
        if let Some(i) = cover.iter().position(|&n| n != 1) {
            return Err(Error::InvalidInput(format!(
                "grid unit ({}, {}) covered {} times",
                i / n_cols,
                i % n_cols,
                cover[i]
            )));
        }
        cells.sort_by_key(|c| (c.row_start, c.col_start));
        Ok(Self { n_rows, n_cols, cells })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn cells(&self) -> &[TableCell] {
        &self.cells
    }

    pub fn has_spans(&self) -> bool {
        self.cells.iter().any(|c| !c.is_unit())
    }

    /// Cell covering grid unit `(row, col)`.
    pub fn cell_at(&self, row: usize, col: usize) -> Option<&TableCell> {
        self.cells.iter().find(|c| (c.row_start..c.row_end).contains(&row) && (c.col_start..c.col_end).contains(&col))
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [TableCell] {
        &mut self.cells
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Table {
        let mut t = self.clone();
        for c in &mut t.cells {
            c.quad = c.quad.translate(dx, dy);
        }
        t
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Clone, PartialEq, Eq)]
pub struct PageImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    dpi: u32,
}

impl fmt::Debug for PageImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PageImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("dpi", &self.dpi)
            .finish_non_exhaustive()
    }
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];

impl PageImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, dpi: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("page image must be non-empty".into()));
        }
        if dpi == 0 {
            return Err(Error::InvalidInput("dpi must be positive".into()));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(Error::InvalidInput(format!("pixel buffer has {} bytes, expected {expected}", pixels.len())));
        }
        Ok(Self { width, height, pixels, dpi })
    }

    pub fn filled(width: u32, height: u32, color: Rgb, dpi: u32) -> Self {
        let pixels = color.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Self::new(width.max(1), height.max(1), pixels, dpi.max(1)).expect("valid dimensions")
    }

    pub fn blank(width: u32, height: u32) -> Self {
        Self::filled(width, height, WHITE, 96)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dpi(&self) -> u32 {
        self.dpi
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn rect(&self) -> Rect {
        Rect { x0: 0.0, y0: 0.0, x1: self.width as f64, y1: self.height as f64 }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, color: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    pub fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32, color: Rgb) {
        for y in y0.min(self.height)..y1.min(self.height) {
            for x in x0.min(self.width)..x1.min(self.width) {
                self.put(x, y, color);
            }
        }
    }

    /// Integer pixel window covering `rect` after clipping to the page.
    pub fn pixel_window(&self, rect: &Rect) -> Option<(u32, u32, u32, u32)> {
        let x0 = rect.x0.floor().max(0.0) as i64;
        let y0 = rect.y0.floor().max(0.0) as i64;
        let x1 = (rect.x1.ceil() as i64).min(self.width as i64);
        let y1 = (rect.y1.ceil() as i64).min(self.height as i64);
        (x0 < x1 && y0 < y1).then_some((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
    }

    /// Copy of the pixels inside `rect`, clipped to the page.
    pub fn crop(&self, rect: &Rect) -> Option<PageImage> {
        let (x0, y0, x1, y1) = self.pixel_window(rect)?;
        let w = (x1 - x0) as usize;
        let mut pixels = Vec::with_capacity(w * (y1 - y0) as usize * 3);
        for y in y0..y1 {
            let start = (y as usize * self.width as usize + x0 as usize) * 3;
            pixels.extend_from_slice(&self.pixels[start..start + w * 3]);
        }
        Some(PageImage { width: x1 - x0, height: y1 - y0, pixels, dpi: self.dpi })
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut enc = png::Encoder::new(&mut out, self.width, self.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let ppm = (self.dpi as f64 / 0.0254).round() as u32;
        enc.set_pixel_dims(Some(png::PixelDimensions { xppu: ppm, yppu: ppm, unit: png::Unit::Meter }));
        {
            let mut w = enc.write_header().expect("in-memory png header");
            w.write_image_data(&self.pixels).expect("in-memory png body");
        }
        out
    }

    pub fn from_rgb_image(img: image::RgbImage, dpi: u32) -> Result<Self> {
        let (w, h) = img.dimensions();
        Self::new(w, h, img.into_raw(), dpi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub source_id: String,
    pages: Vec<PageImage>,
    page_indices: Vec<usize>,
}

impl Document {
    pub fn new(source_id: impl Into<String>, pages: Vec<PageImage>) -> Result<Self> {
        if pages.is_empty() {
            return Err(Error::EmptyDocument("document has no pages".into()));
        }
        Ok(Self { source_id: source_id.into(), page_indices: (0..pages.len()).collect(), pages })
    }

    /// Records which page of the source file each loaded page came from.
    pub fn with_page_indices(mut self, indices: Vec<usize>) -> Result<Self> {
        if indices.len() != self.pages.len() {
            return Err(Error::InvalidInput(format!("{} page indices for {} pages", indices.len(), self.pages.len())));
        }
        self.page_indices = indices;
        Ok(self)
    }

    /// Source page index of each loaded page.
    pub fn page_indices(&self) -> &[usize] {
        &self.page_indices
    }

    pub fn pages(&self) -> &[PageImage] {
        &self.pages
    }

    pub fn into_pages(self) -> Vec<PageImage> {
        self.pages
    }
}

/// One element of a structured page, in reading order.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Text { region: LayoutRegion, instances: Vec<TextInstance> },
    Table { region: LayoutRegion, table: Table, instances: Vec<TextInstance> },
}

impl Element {
    pub fn region(&self) -> &LayoutRegion {
        match self {
            Element::Text { region, .. } | Element::Table { region, .. } => region,
        }
    }

    pub fn instances(&self) -> &[TextInstance] {
        match self {
            Element::Text { instances, .. } | Element::Table { instances, .. } => instances,
        }
    }
}

/// Ordered composition of regions, their text and parsed tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructuredDocument {
    pub elements: Vec<Element>,
}

impl StructuredDocument {
    pub fn instance_count(&self) -> usize {
        self.elements.iter().map(|e| e.instances().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(r0: usize, r1: usize, c0: usize, c1: usize) -> TableCell {
        TableCell {
            row_start: r0,
            row_end: r1,
            col_start: c0,
            col_end: c1,
            quad: Quadrangle::from_rect(c0 as f64, r0 as f64, c1 as f64, r1 as f64).unwrap(),
            content: None,
        }
    }

    #[test]
    fn table_tiling_is_enforced() {
        assert!(Table::new(2, 2, vec![cell(0, 1, 0, 2), cell(1, 2, 0, 1), cell(1, 2, 1, 2)]).is_ok());
        // Gap at (1,1).
        assert!(Table::new(2, 2, vec![cell(0, 1, 0, 2), cell(1, 2, 0, 1)]).is_err());
        // Overlap at (0,0).
        assert!(Table::new(1, 2, vec![cell(0, 1, 0, 2), cell(0, 1, 0, 1)]).is_err());
        assert!(Table::new(1, 1, vec![cell(0, 1, 0, 2)]).is_err());
    }

    #[test]
    fn cells_sorted_row_major() {
        let t = Table::new(1, 2, vec![cell(0, 1, 1, 2), cell(0, 1, 0, 1)]).unwrap();
        assert_eq!(t.cells()[0].col_start, 0);
        assert_eq!(t.cell_at(0, 1).unwrap().col_start, 1);
    }

    #[test]
    fn category_tokens_round_trip() {
        for c in LayoutCategory::ALL {
            assert_eq!(c.as_str().parse::<LayoutCategory>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        assert!("sidebar".parse::<LayoutCategory>().is_err());
    }

    #[test]
    fn confidences_are_bounded() {
        assert!(TextContent::new("x", 1.2).is_err());
        let q = Quadrangle::from_rect(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(TextInstance::new(q, -0.1).is_err());
    }

    #[test]
    fn page_buffer_length_checked() {
        assert!(PageImage::new(2, 2, vec![0; 11], 96).is_err());
        let mut p = PageImage::blank(4, 3);
        p.put(1, 2, BLACK);
        let c = p.crop(&Rect::new(1.0, 1.0, 3.0, 3.0).unwrap()).unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.get(0, 1), BLACK);
        assert!(Document::new("x", vec![]).is_err());
    }
}
