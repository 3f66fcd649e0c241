//! Deterministic synthetic pages with exact ground truth.
//!
//! Pages are drawn with the embedded font at integer scales and 1-px black
//! ruling lines, using integer arithmetic only, so a spec renders to the
//! same bytes everywhere.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::font::{self, GLYPH_HEIGHT};
use crate::geometry::Rect;
use crate::layout::LayoutParams;
use crate::model::{BLACK, LayoutCategory, PageImage};

pub const PAGE_WIDTH: u32 = 1700;
pub const PAGE_HEIGHT: u32 = 2200;
/// Vertical advance between text lines, per unit of scale.
pub const LINE_PITCH: u32 = 22;
/// Horizontal padding between a cell's left border and its text, per unit
/// of scale.
pub const CELL_PAD: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSpec {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub blocks: Vec<BlockSpec>,
    /// Probability of flipping a pixel to mid grey; 0 renders clean pages.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub x: u32,
    pub y: u32,
    #[serde(flatten)]
    pub content: BlockContent,
}

fn default_title_scale() -> u32 {
    2
}

fn default_scale() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockContent {
    Title {
        text: String,
        #[serde(default = "default_title_scale")]
        scale: u32,
    },
    Paragraph {
        lines: Vec<String>,
        #[serde(default = "default_scale")]
        scale: u32,
    },
    List {
        items: Vec<String>,
        #[serde(default = "default_scale")]
        scale: u32,
    },
    Table(TableSpec),
    Figure {
        width: u32,
        height: u32,
    },
}

impl BlockContent {
    pub fn category(&self) -> LayoutCategory {
        match self {
            BlockContent::Title { .. } => LayoutCategory::Title,
            BlockContent::Paragraph { .. } => LayoutCategory::Text,
            BlockContent::List { .. } => LayoutCategory::List,
            BlockContent::Table(_) => LayoutCategory::Table,
            BlockContent::Figure { .. } => LayoutCategory::Figure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub col_widths: Vec<u32>,
    pub row_heights: Vec<u32>,
    /// A rectangular partition of the grid, one entry per cell.
    pub cells: Vec<SpecCell>,
    #[serde(default = "default_scale")]
    pub scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecCell {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub text: String,
}

impl SpecCell {
    pub fn span(&self) -> (usize, usize, usize, usize) {
        (self.row_start, self.row_end, self.col_start, self.col_end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthLine {
    /// Tight ink box.
    pub bbox: Rect,
    pub text: String,
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRegion {
    pub bbox: Rect,
    pub category: LayoutCategory,
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub block: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Sorted by `(row_start, col_start)`.
    pub cells: Vec<SpecCell>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Every text line in emission order: blocks in spec order, lines top
    /// to bottom, table cells row-major.
    pub lines: Vec<TruthLine>,
    pub regions: Vec<TruthRegion>,
    pub tables: Vec<TruthTable>,
}

/// Smallest separation between blocks: one pixel more than the layout
/// analyser's default cut gap on this page size.
pub fn min_block_gap(width: u32, height: u32) -> u32 {
    (LayoutParams::default().min_gap_frac * width.max(height) as f64).ceil() as u32 + 1
}

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

/// Checks the partition tiles an `n_rows x n_cols` grid, returning the
/// first offending unit.
pub fn check_tiling(n_rows: usize, n_cols: usize, cells: &[(usize, usize, usize, usize)]) -> Result<()> {
    let mut cover = vec![0u32; n_rows * n_cols];
    for &(r0, r1, c0, c1) in cells {
        if r0 >= r1 || c0 >= c1 || r1 > n_rows || c1 > n_cols {
            return Err(invalid(format!("cell {r0}..{r1} x {c0}..{c1} outside {n_rows}x{n_cols}")));
        }
        for r in r0..r1 {
            for c in c0..c1 {
                cover[r * n_cols + c] += 1;
            }
        }
    }
    match cover.iter().position(|&n| n != 1) {
        Some(i) => Err(invalid(format!("unit ({}, {}) covered {} times", i / n_cols, i % n_cols, cover[i]))),
        None => Ok(()),
    }
}

/// Greedy random rectangular partition.
///
/// Units are scanned row-major; each uncovered unit starts a cell that
/// grows right, then down, one step at a time with probability
/// `span_prob`, as long as it stays on uncovered units.
pub fn random_partition(seed: u64, n_rows: usize, n_cols: usize, span_prob: f64) -> Vec<(usize, usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = span_prob.clamp(0.0, 1.0);
    let mut covered = vec![false; n_rows * n_cols];
    let mut cells = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if covered[r * n_cols + c] {
                continue;
            }
            let mut w = 1;
            while c + w < n_cols && !covered[r * n_cols + c + w] && rng.random_bool(p) {
                w += 1;
            }
            let mut h = 1;
            while r + h < n_rows && (c..c + w).all(|cc| !covered[(r + h) * n_cols + cc]) && rng.random_bool(p) {
                h += 1;
            }
            for rr in r..r + h {
                for cc in c..c + w {
                    covered[rr * n_cols + cc] = true;
                }
            }
            cells.push((r, r + h, c, c + w));
        }
    }
    cells
}

/// Pixel geometry of a table block.
struct TableLayout {
    xs: Vec<u32>,
    ys: Vec<u32>,
}

impl TableLayout {
    fn new(x: u32, y: u32, spec: &TableSpec) -> Self {
        let mut xs = vec![x];
        for w in &spec.col_widths {
            xs.push(xs[xs.len() - 1] + w);
        }
        let mut ys = vec![y];
        for h in &spec.row_heights {
            ys.push(ys[ys.len() - 1] + h);
        }
        Self { xs, ys }
    }

    fn owner(spec: &TableSpec) -> Vec<usize> {
        let n_cols = spec.col_widths.len();
        let mut owner = vec![0; spec.row_heights.len() * n_cols];
        for (k, cell) in spec.cells.iter().enumerate() {
            for r in cell.row_start..cell.row_end {
                for c in cell.col_start..cell.col_end {
                    owner[r * n_cols + c] = k;
                }
            }
        }
        owner
    }

    /// Horizontal segments `(y, x0, x1)` and vertical ones `(x, y0, y1)`,
    /// endpoints inclusive, for every separator piece the partition needs.
    fn segments(&self, spec: &TableSpec) -> (Vec<(u32, u32, u32)>, Vec<(u32, u32, u32)>) {
        let (n_rows, n_cols) = (spec.row_heights.len(), spec.col_widths.len());
        let owner = Self::owner(spec);
        let mut horizontal = Vec::new();
        for r in 0..=n_rows {
            for c in 0..n_cols {
                let inner = r > 0 && r < n_rows;
                if !inner || owner[(r - 1) * n_cols + c] != owner[r * n_cols + c] {
                    horizontal.push((self.ys[r], self.xs[c], self.xs[c + 1]));
                }
            }
        }
        let mut vertical = Vec::new();
        for c in 0..=n_cols {
            for r in 0..n_rows {
                let inner = c > 0 && c < n_cols;
                if !inner || owner[r * n_cols + c - 1] != owner[r * n_cols + c] {
                    vertical.push((self.xs[c], self.ys[r], self.ys[r + 1]));
                }
            }
        }
        (horizontal, vertical)
    }

    fn text_origin(&self, spec: &TableSpec, cell: &SpecCell) -> (u32, u32) {
        let s = spec.scale;
        let x = self.xs[cell.col_start] + CELL_PAD * s;
        let y = self.ys[cell.row_start] + (spec.row_heights[cell.row_start] - GLYPH_HEIGHT * s) / 2;
        (x, y)
    }

    fn outer(&self) -> (u32, u32, u32, u32) {
        (self.xs[0], self.ys[0], self.xs[self.xs.len() - 1] + 1, self.ys[self.ys.len() - 1] + 1)
    }
}

/// Fraction of each interior separator's length that the partition draws:
/// the smallest over all interior rows and columns, 1.0 when there are none.
pub fn min_interior_coverage(spec: &TableSpec) -> f64 {
    let layout = TableLayout::new(0, 0, spec);
    let (h, v) = layout.segments(spec);
    let (n_rows, n_cols) = (spec.row_heights.len(), spec.col_widths.len());
    let width = layout.xs[n_cols] as f64;
    let height = layout.ys[n_rows] as f64;
    let mut worst: f64 = 1.0;
    for r in 1..n_rows {
        let drawn: u32 = h.iter().filter(|s| s.0 == layout.ys[r]).map(|s| s.2 - s.1).sum();
        worst = worst.min(drawn as f64 / width);
    }
    for c in 1..n_cols {
        let drawn: u32 = v.iter().filter(|s| s.0 == layout.xs[c]).map(|s| s.2 - s.1).sum();
        worst = worst.min(drawn as f64 / height);
    }
    worst
}

fn text_box(x: u32, y: u32, text: &str, scale: u32) -> Option<Rect> {
    let (a, b, c, d) = font::ink_extent(text, scale)?;
    Some(Rect { x0: (x + a) as f64, y0: (y + b) as f64, x1: (x + c) as f64, y1: (y + d) as f64 })
}

/// Text lines of a block as `(x, y, text, scale)` draw calls.
fn block_lines(block: &BlockSpec) -> Vec<(u32, u32, String, u32)> {
    let stack = |lines: &[String], scale: u32| {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| (block.x, block.y + i as u32 * LINE_PITCH * scale, l.clone(), scale))
            .collect()
    };
    match &block.content {
        BlockContent::Title { text, scale } => vec![(block.x, block.y, text.clone(), *scale)],
        BlockContent::Paragraph { lines, scale } => stack(lines, *scale),
        BlockContent::List { items, scale } => stack(items, *scale),
        BlockContent::Table(t) => {
            let layout = TableLayout::new(block.x, block.y, t);
            let mut cells = t.cells.clone();
            cells.sort_by_key(|c| (c.row_start, c.col_start));
            cells
                .iter()
                .filter(|c| !c.text.is_empty())
                .map(|c| {
                    let (x, y) = layout.text_origin(t, c);
                    (x, y, c.text.clone(), t.scale)
                })
                .collect()
        }
        BlockContent::Figure { .. } => Vec::new(),
    }
}

fn validate_block(block: &BlockSpec, spec: &PageSpec) -> Result<Rect> {
    let scale_ok = |s: u32| (1..=4).contains(&s);
    match &block.content {
        BlockContent::Title { scale, .. }
        | BlockContent::Paragraph { scale, .. }
        | BlockContent::List { scale, .. }
            if !scale_ok(*scale) =>
        {
            return Err(invalid(format!("text scale {scale} outside 1..=4")));
        }
        BlockContent::Paragraph { lines: v, .. } | BlockContent::List { items: v, .. } if v.is_empty() => {
            return Err(invalid("text block without lines".into()));
        }
        BlockContent::Figure { width, height } if *width == 0 || *height == 0 => {
            return Err(invalid("empty figure".into()));
        }
        BlockContent::Table(t) => {
            if !scale_ok(t.scale) || t.col_widths.is_empty() || t.row_heights.is_empty() {
                return Err(invalid("table needs rows, columns and a scale in 1..=4".into()));
            }
            let spans: Vec<_> = t.cells.iter().map(SpecCell::span).collect();
            check_tiling(t.row_heights.len(), t.col_widths.len(), &spans)?;
            let layout = TableLayout::new(block.x, block.y, t);
            for c in &t.cells {
                let room = layout.xs[c.col_end] - layout.xs[c.col_start];
                let tall = t.row_heights[c.row_start];
                if font::text_width(&c.text, t.scale) + 2 * CELL_PAD * t.scale > room
                    || tall < GLYPH_HEIGHT * t.scale + 4
                {
                    return Err(invalid(format!("cell text {:?} does not fit its cell", c.text)));
                }
            }
        }
        _ => {}
    }
    let mut bbox: Option<Rect> = None;
    for (x, y, text, scale) in block_lines(block) {
        if !font::is_renderable(&text) {
            return Err(invalid(format!("text {text:?} has characters outside the font")));
        }
        let Some(b) = text_box(x, y, &text, scale) else {
            return Err(invalid(format!("text {text:?} has no ink")));
        };
        bbox = Some(bbox.map_or(b, |a| a.union(&b)));
    }
    let shape = match &block.content {
        BlockContent::Table(t) => {
            let (x0, y0, x1, y1) = TableLayout::new(block.x, block.y, t).outer();
            Some(Rect { x0: x0 as f64, y0: y0 as f64, x1: x1 as f64, y1: y1 as f64 })
        }
        BlockContent::Figure { width, height } => Some(Rect {
            x0: block.x as f64,
            y0: block.y as f64,
            x1: (block.x + width) as f64,
            y1: (block.y + height) as f64,
        }),
        _ => None,
    };
    let bbox = match (bbox, shape) {
        (Some(a), Some(b)) => a.union(&b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(invalid("block has no ink".into())),
    };
    if bbox.x1 > spec.width as f64 || bbox.y1 > spec.height as f64 {
        return Err(invalid(format!("block at ({}, {}) extends past the page", block.x, block.y)));
    }
    Ok(bbox)
}

fn fill_ellipse(page: &mut PageImage, x: u32, y: u32, w: u32, h: u32) {
    let (w2, h2) = ((w as i64).pow(2), (h as i64).pow(2));
    for py in 0..h {
        for px in 0..w {
            let dx = 2 * px as i64 + 1 - w as i64;
            let dy = 2 * py as i64 + 1 - h as i64;
            if dx * dx * h2 + dy * dy * w2 <= w2 * h2 {
                page.put(x + px, y + py, BLACK);
            }
        }
    }
}

/// Renders a spec and its ground truth.
///
/// Blocks must keep at least [`min_block_gap`] pixels apart on one axis,
/// otherwise `SpecOverlap`.
pub fn generate_page(spec: &PageSpec) -> Result<(PageImage, GroundTruth)> {
    if spec.width == 0 || spec.height == 0 {
        return Err(invalid("page must not be empty".into()));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(invalid(format!("noise {} outside [0, 1]", spec.noise)));
    }
    let boxes = spec.blocks.iter().map(|b| validate_block(b, spec)).collect::<Result<Vec<_>>>()?;
    let gap = min_block_gap(spec.width, spec.height) as f64;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (a, b) = (&boxes[i], &boxes[j]);
            let dx = (b.x0 - a.x1).max(a.x0 - b.x1);
            let dy = (b.y0 - a.y1).max(a.y0 - b.y1);
            if dx < gap && dy < gap {
                return Err(Error::SpecOverlap(format!("blocks {i} and {j} are closer than {gap} px")));
            }
        }
    }

    let mut page = PageImage::blank(spec.width, spec.height);
    let mut truth = GroundTruth::default();
    for (k, (block, bbox)) in spec.blocks.iter().zip(&boxes).enumerate() {
        match &block.content {
            BlockContent::Table(t) => {
                let layout = TableLayout::new(block.x, block.y, t);
                let (h, v) = layout.segments(t);
                for (y, x0, x1) in h {
                    page.fill_rect(x0, y, x1 + 1, y + 1, BLACK);
                }
                for (x, y0, y1) in v {
                    page.fill_rect(x, y0, x + 1, y1 + 1, BLACK);
                }
                let mut cells = t.cells.clone();
                cells.sort_by_key(|c| (c.row_start, c.col_start));
                truth.tables.push(TruthTable {
                    block: k,
                    n_rows: t.row_heights.len(),
                    n_cols: t.col_widths.len(),
                    cells,
                });
            }
            BlockContent::Figure { width, height } => fill_ellipse(&mut page, block.x, block.y, *width, *height),
            _ => {}
        }
        for (x, y, text, scale) in block_lines(block) {
            font::draw_text(&mut page, x, y, &text, scale, BLACK);
            let bbox = text_box(x, y, &text, scale).expect("validated text has ink");
            truth.lines.push(TruthLine { bbox, text, block: k });
        }
        truth.regions.push(TruthRegion { bbox: *bbox, category: block.content.category(), block: k });
    }
    if spec.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for y in 0..spec.height {
            for x in 0..spec.width {
                if rng.random_bool(spec.noise) {
                    page.put(x, y, [128, 128, 128]);
                }
            }
        }
    }
    Ok((page, truth))
}

const WORDS: &[&str] = &[
    "account", "across", "annual", "balance", "before", "budget", "change", "client", "common", "data", "design",
    "detail", "early", "energy", "figure", "final", "growth", "health", "income", "index", "large", "level", "market",
    "method", "model", "money", "notes", "office", "order", "output", "paper", "period", "plan", "price", "profit",
    "quality", "range", "rate", "record", "report", "result", "review", "sales", "sample", "scale", "season", "share",
    "simple", "small", "source", "stock", "study", "supply", "system", "table", "target", "total", "trade", "trend",
    "value", "volume", "water", "weekly", "yield", "zone", "item", "unit", "cost", "line", "page",
];

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut out: Vec<String> = (0..words).map(|_| WORDS.choose(rng).expect("non-empty").to_string()).collect();
    let first = &mut out[0];
    *first = first[..1].to_ascii_uppercase() + &first[1..];
    let mut s = out.join(" ");
    if rng.random_bool(0.5) {
        s.push('.');
    } else if rng.random_bool(0.3) {
        s.push(',');
    }
    s
}

/// A random partition whose interior separators are drawn over at least
/// 70% of their length, so ruling-line detection can see every one.
fn renderable_partition(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize) -> Vec<(usize, usize, usize, usize)> {
    loop {
        let cells = random_partition(rng.random(), n_rows, n_cols, 0.3);
        let probe = TableSpec {
            col_widths: vec![100; n_cols],
            row_heights: vec![36; n_rows],
            cells: cells
                .iter()
                .map(|&(row_start, row_end, col_start, col_end)| SpecCell {
                    row_start,
                    row_end,
                    col_start,
                    col_end,
                    text: String::new(),
                })
                .collect(),
            scale: 1,
        };
        if min_interior_coverage(&probe) >= 0.7 {
            return cells;
        }
    }
}

fn random_table(rng: &mut ChaCha8Rng) -> TableSpec {
    let (n_rows, n_cols) = (rng.random_range(2..=5), rng.random_range(2..=4));
    let mut cells: Vec<SpecCell> = renderable_partition(rng, n_rows, n_cols)
        .into_iter()
        .map(|(row_start, row_end, col_start, col_end)| {
            let n = rng.random_range(1..=2);
            let text: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).expect("non-empty")).collect();
            SpecCell { row_start, row_end, col_start, col_end, text: text.join(" ") }
        })
        .collect();
    if rng.random_bool(0.3) {
        for c in &mut cells {
            if c.col_start == 0 {
                c.text = format!("{}", rng.random_range(1..1000));
            }
        }
    }
    let need = |c: &SpecCell| font::text_width(&c.text, 1) + 2 * CELL_PAD;
    let mut col_widths = vec![80u32; n_cols];
    for c in cells.iter().filter(|c| c.col_end - c.col_start == 1) {
        col_widths[c.col_start] = col_widths[c.col_start].max(need(c));
    }
    for c in cells.iter().filter(|c| c.col_end - c.col_start > 1) {
        let have: u32 = col_widths[c.col_start..c.col_end].iter().sum();
        if have < need(c) {
            col_widths[c.col_end - 1] += need(c) - have;
        }
    }
    TableSpec { col_widths, row_heights: vec![GLYPH_HEIGHT + 20; n_rows], cells, scale: 1 }
}

/// Which block kinds a random page may contain after its title.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mix {
    pub lists: bool,
    pub tables: bool,
    pub figures: bool,
}

impl Mix {
    pub const ALL: Mix = Mix { lists: true, tables: true, figures: true };
    pub const TEXT_ONLY: Mix = Mix { lists: true, tables: false, figures: false };
}

/// A random single-column letter-size page: a title, then paragraphs,
/// lists, tables and figures top to bottom.
pub fn random_page_spec(seed: u64, mix: Mix) -> PageSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (width, height) = (PAGE_WIDTH, PAGE_HEIGHT);
    let margin = 150;
    let gap = min_block_gap(width, height) + 30;
    let bottom = height - 200;
    let mut y = 200;
    let mut blocks = Vec::new();

    let title_words: Vec<String> =
        (0..rng.random_range(2..=4)).map(|_| WORDS.choose(&mut rng).expect("non-empty").to_ascii_uppercase()).collect();
    blocks.push(BlockSpec { x: margin, y, content: BlockContent::Title { text: title_words.join(" "), scale: 2 } });
    y += GLYPH_HEIGHT * 2 + gap;

    let mut kinds = vec!["paragraph"];
    if mix.lists {
        kinds.push("list");
    }
    if mix.tables {
        kinds.push("table");
    }
    if mix.figures {
        kinds.push("figure");
    }
    loop {
        let content = match *kinds.choose(&mut rng).expect("non-empty") {
            "paragraph" => {
                let n = rng.random_range(2..=5);
                let lines = (0..n)
                    .map(|_| {
                        let words = rng.random_range(4..=10);
                        sentence(&mut rng, words)
                    })
                    .collect();
                BlockContent::Paragraph { lines, scale: 1 }
            }
            "list" => {
                let numbered = rng.random_bool(0.5);
                let n = rng.random_range(2..=4);
                let items = (1..=n)
                    .map(|i| {
                        let words = rng.random_range(2..=6);
                        let body = sentence(&mut rng, words);
                        if numbered { format!("{i}. {body}") } else { format!("- {body}") }
                    })
                    .collect();
                BlockContent::List { items, scale: 1 }
            }
            "table" => BlockContent::Table(random_table(&mut rng)),
            _ => BlockContent::Figure { width: rng.random_range(200..=500), height: rng.random_range(150..=300) },
        };
        let block = BlockSpec { x: margin, y, content };
        let extent = match &block.content {
            BlockContent::Paragraph { lines: v, .. } | BlockContent::List { items: v, .. } => {
                (v.len() as u32 - 1) * LINE_PITCH + GLYPH_HEIGHT
            }
            BlockContent::Table(t) => t.row_heights.iter().sum::<u32>() + 1,
            BlockContent::Figure { height, .. } => *height,
            BlockContent::Title { .. } => GLYPH_HEIGHT * 2,
        };
        if y + extent > bottom {
            break;
        }
        y += extent + gap;
        blocks.push(block);
    }
    PageSpec { seed, width, height, blocks, noise: 0.0 }
}

/// One PDF page of filled black rectangles `[x, y, w, h]` in points,
/// measured from the top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct PdfPage {
    pub width_pt: f64,
    pub height_pt: f64,
    pub rects: Vec<[f64; 4]>,
}

/// Vectorizes a page's ink into rectangles: each horizontal ink run,
/// stacked over the rows in which it repeats exactly. `pt_per_px` sets the
/// physical size.
pub fn page_to_pdf(page: &PageImage, pt_per_px: f64) -> PdfPage {
    let mask = crate::raster::binarize(page);
    let mut done: Vec<[u32; 4]> = Vec::new();
    let mut open: Vec<[u32; 4]> = Vec::new();
    for y in 0..mask.height() {
        let mut runs = Vec::new();
        let mut x = 0;
        while x < mask.width() {
            if mask.get(x, y) {
                let start = x;
                while x < mask.width() && mask.get(x, y) {
                    x += 1;
                }
                runs.push((start, x));
            } else {
                x += 1;
            }
        }
        let mut next = Vec::with_capacity(runs.len());
        for (a, b) in runs {
            match open.iter().position(|r| r[0] == a && r[2] == b) {
                Some(i) => {
                    let mut r = open.swap_remove(i);
                    r[3] = y + 1;
                    next.push(r);
                }
                None => next.push([a, y, b, y + 1]),
            }
        }
        done.append(&mut open);
        open = next;
    }
    done.append(&mut open);
    done.sort();
    PdfPage {
        width_pt: page.width() as f64 * pt_per_px,
        height_pt: page.height() as f64 * pt_per_px,
        rects: done
            .into_iter()
            .map(|[x0, y0, x1, y1]| {
                [
                    x0 as f64 * pt_per_px,
                    y0 as f64 * pt_per_px,
                    (x1 - x0) as f64 * pt_per_px,
                    (y1 - y0) as f64 * pt_per_px,
                ]
            })
            .collect(),
    }
}

/// Minimal uncompressed PDF with one content stream per page.
pub fn write_pdf(pages: &[PdfPage]) -> Vec<u8> {
    let mut out = b"%PDF-1.4\n".to_vec();
    let mut offsets = Vec::new();
    let n = pages.len();
    let mut object = |out: &mut Vec<u8>, body: String| {
        offsets.push(out.len());
        out.extend_from_slice(format!("{} 0 obj\n{body}\nendobj\n", offsets.len()).as_bytes());
    };
    object(&mut out, "<< /Type /Catalog /Pages 2 0 R >>".into());
    let kids: Vec<String> = (0..n).map(|i| format!("{} 0 R", 3 + 2 * i)).collect();
    object(&mut out, format!("<< /Type /Pages /Kids [{}] /Count {n} >>", kids.join(" ")));
    for (i, p) in pages.iter().enumerate() {
        object(
            &mut out,
            format!(
                "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {} {}] /Contents {} 0 R /Resources << >> >>",
                fmt_num(p.width_pt),
                fmt_num(p.height_pt),
                4 + 2 * i
            ),
        );
        let mut content = String::from("0 g\n");
        for r in &p.rects {
            let y = p.height_pt - r[1] - r[3];
            content.push_str(&format!("{} {} {} {} re\n", fmt_num(r[0]), fmt_num(y), fmt_num(r[2]), fmt_num(r[3])));
        }
        content.push_str("f\n");
        object(&mut out, format!("<< /Length {} >>\nstream\n{content}endstream", content.len()));
    }
    let xref = out.len();
    let mut table = format!("xref\n0 {}\n0000000000 65535 f \n", offsets.len() + 1);
    for o in &offsets {
        table.push_str(&format!("{o:010} 00000 n \n"));
    }
    out.extend_from_slice(table.as_bytes());
    out.extend_from_slice(
        format!("trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{xref}\n%%EOF\n", offsets.len() + 1).as_bytes(),
    );
    out
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paragraph(lines: &[&str]) -> BlockContent {
        BlockContent::Paragraph { lines: lines.iter().map(|s| s.to_string()).collect(), scale: 1 }
    }

    fn spec(blocks: Vec<BlockSpec>) -> PageSpec {
        PageSpec { seed: 1, width: 800, height: 600, blocks, noise: 0.0 }
    }

    #[test]
    fn paragraph_truth_and_bands() {
        let s = spec(vec![BlockSpec { x: 40, y: 40, content: paragraph(&["One line", "Two line", "Three"]) }]);
        let (page, truth) = generate_page(&s).unwrap();
        assert_eq!(truth.lines.len(), 3);
        let mask = crate::raster::binarize(&page);
        let inked: Vec<bool> = (0..page.height()).map(|y| (0..page.width()).any(|x| mask.get(x, y))).collect();
        let bands = inked.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(inked[0]);
        assert_eq!(bands, 3);
    }

    #[test]
    fn deterministic() {
        let s = random_page_spec(42, Mix::ALL);
        let a = generate_page(&s).unwrap();
        let b = generate_page(&random_page_spec(42, Mix::ALL)).unwrap();
        assert_eq!(a.0.pixels(), b.0.pixels());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn overlap_rejected() {
        let s = spec(vec![
            BlockSpec { x: 40, y: 40, content: paragraph(&["alpha"]) },
            BlockSpec { x: 40, y: 60, content: paragraph(&["beta"]) },
        ]);
        assert!(matches!(generate_page(&s), Err(Error::SpecOverlap(_))));
    }

    fn cell(r0: usize, r1: usize, c0: usize, c1: usize, text: &str) -> SpecCell {
        SpecCell { row_start: r0, row_end: r1, col_start: c0, col_end: c1, text: text.into() }
    }

    #[test]
    fn span_omits_exactly_one_segment() {
        let mut cells = vec![cell(0, 1, 0, 2, "wide")];
        for r in 1..3 {
            for c in 0..3 {
                cells.push(cell(r, r + 1, c, c + 1, "x"));
            }
        }
        cells.push(cell(0, 1, 2, 3, "y"));
        let t = TableSpec { col_widths: vec![100; 3], row_heights: vec![36; 3], cells, scale: 1 };
        let layout = TableLayout::new(0, 0, &t);
        let (h, v) = layout.segments(&t);
        // A full 3x3 grid has 4*3 horizontal and 4*3 vertical segments.
        assert_eq!(h.len() + v.len(), 24 - 1);
        assert!(!v.contains(&(100, 0, 36)));
        let s = spec(vec![BlockSpec { x: 20, y: 20, content: BlockContent::Table(t) }]);
        let (_, truth) = generate_page(&s).unwrap();
        assert_eq!(truth.tables[0].cells.len(), 8);
    }

    #[test]
    fn partitions() {
        let all_unit = random_partition(3, 4, 5, 0.0);
        assert_eq!(all_unit.len(), 20);
        assert!(all_unit.iter().all(|&(a, b, c, d)| b - a == 1 && d - c == 1));
        assert_eq!(random_partition(9, 1, 1, 1.0), vec![(0, 1, 0, 1)]);
        for seed in 0..200 {
            let p = random_partition(seed, 3, 3, 0.5);
            check_tiling(3, 3, &p).unwrap();
        }
    }

    #[test]
    fn random_pages_are_valid() {
        for seed in 0..20 {
            let s = random_page_spec(seed, Mix::ALL);
            assert!(s.blocks.len() >= 2);
            generate_page(&s).unwrap();
        }
    }

    #[test]
    fn unrenderable_text_rejected() {
        let s = spec(vec![BlockSpec { x: 40, y: 40, content: paragraph(&["caf\u{e9}"]) }]);
        assert!(matches!(generate_page(&s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spec_json_round_trip() {
        let s = random_page_spec(5, Mix::ALL);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<PageSpec>(&text).unwrap(), s);
    }

    #[test]
    fn pdf_writer_output_loads() {
        let (page, _) = generate_page(&spec(vec![BlockSpec { x: 40, y: 40, content: paragraph(&["Hello"]) }])).unwrap();
        let pdf = write_pdf(&[page_to_pdf(&page, 0.5), page_to_pdf(&page, 0.5)]);
        assert_eq!(crate::loader::pdf_page_count(&pdf).unwrap(), 2);
        let r = crate::loader::rasterize_pdf_page(&pdf, 1, 144).unwrap();
        assert_eq!((r.width(), r.height()), (800, 600));
    }
}
