//! Table structure recognition for tables with visible ruling lines.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Quadrangle;
use crate::model::{PageImage, Table, TableCell, TextContent, TextInstance};
use crate::raster::{self, InkMask, PixelBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatorParams {
    /// Fraction of the region a pixel line's long ink runs must cover.
    pub line_coverage: f64,
    /// Shortest ink run counted towards line coverage, as a fraction of the
    /// region extent; never below `min_run_px`.
    pub min_run_frac: f64,
    pub min_run_px: u32,
    /// Candidate lines at most this far apart form one separator.
    pub merge_px: u32,
    /// Fraction of a shared segment that must be inked for an edge.
    pub edge_coverage: f64,
    /// Half-width of the band searched for edge ink around a separator.
    pub edge_band: u32,
}

impl Default for SeparatorParams {
    fn default() -> Self {
        Self { line_coverage: 0.6, min_run_frac: 0.04, min_run_px: 4, merge_px: 3, edge_coverage: 0.8, edge_band: 2 }
    }
}

/// Presence of every interior edge of an `n_rows x n_cols` grid.
///
/// `vertical(r, c)` is the edge between units `(r, c)` and `(r, c + 1)`;
/// `horizontal(r, c)` the edge between `(r, c)` and `(r + 1, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeMap {
    n_rows: usize,
    n_cols: usize,
    vertical: Vec<bool>,
    horizontal: Vec<bool>,
}

impl EdgeMap {
    pub fn full(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            vertical: vec![true; n_rows * n_cols.saturating_sub(1)],
            horizontal: vec![true; n_rows.saturating_sub(1) * n_cols],
        }
    }

    /// Edge map with interior edges taken from the low bits of `bits`:
    /// vertical edges first, then horizontal ones, both row-major.
    pub fn from_bits(n_rows: usize, n_cols: usize, bits: u64) -> Self {
        let mut m = Self::full(n_rows, n_cols);
        let nv = m.vertical.len();
        for i in 0..m.edge_count() {
            let on = bits >> i & 1 == 1;
            if i < nv {
                m.vertical[i] = on;
            } else {
                m.horizontal[i - nv] = on;
            }
        }
        m
    }

    /// Edges implied by a partition given as `(row_start, row_end,
    /// col_start, col_end)` cells: an edge exists between units of
    /// different cells.
    pub fn from_partition(n_rows: usize, n_cols: usize, cells: &[(usize, usize, usize, usize)]) -> Self {
        let mut owner = vec![usize::MAX; n_rows * n_cols];
        for (i, &(r0, r1, c0, c1)) in cells.iter().enumerate() {
            for r in r0..r1 {
                for c in c0..c1 {
                    owner[r * n_cols + c] = i;
                }
            }
        }
        let mut m = Self::full(n_rows, n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                if c + 1 < n_cols {
                    m.set_vertical(r, c, owner[r * n_cols + c] != owner[r * n_cols + c + 1]);
                }
                if r + 1 < n_rows {
                    m.set_horizontal(r, c, owner[r * n_cols + c] != owner[(r + 1) * n_cols + c]);
                }
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn edge_count(&self) -> usize {
        self.vertical.len() + self.horizontal.len()
    }

    pub fn vertical(&self, r: usize, c: usize) -> bool {
        self.vertical[r * (self.n_cols - 1) + c]
    }

    pub fn horizontal(&self, r: usize, c: usize) -> bool {
        self.horizontal[r * self.n_cols + c]
    }

    pub fn set_vertical(&mut self, r: usize, c: usize, on: bool) {
        let i = r * (self.n_cols - 1) + c;
        self.vertical[i] = on;
    }

    pub fn set_horizontal(&mut self, r: usize, c: usize, on: bool) {
        let i = r * self.n_cols + c;
        self.horizontal[i] = on;
    }

    pub fn absent_count(&self) -> usize {
        self.vertical.iter().chain(&self.horizontal).filter(|&&e| !e).count()
    }
}

/// Ruling lines of a table and the local edge evidence between units.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorSet {
    pub row_seps: Vec<f64>,
    pub col_seps: Vec<f64>,
    pub local_edges: EdgeMap,
}

impl SeparatorSet {
    /// Separators at the given positions with every interior edge present.
    pub fn full_grid(row_seps: Vec<f64>, col_seps: Vec<f64>) -> Result<Self> {
        let edges = EdgeMap::full(row_seps.len().saturating_sub(1), col_seps.len().saturating_sub(1));
        Self::new(row_seps, col_seps, edges)
    }

    pub fn new(row_seps: Vec<f64>, col_seps: Vec<f64>, local_edges: EdgeMap) -> Result<Self> {
        if row_seps.len() < 2 || col_seps.len() < 2 {
            return Err(Error::NotATable(format!(
                "{} row and {} column separators, need at least 2 of each",
                row_seps.len(),
                col_seps.len()
            )));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&row_seps) || !increasing(&col_seps) {
            return Err(Error::InvalidInput("separators must be strictly increasing".into()));
        }
        if local_edges.n_rows() != row_seps.len() - 1 || local_edges.n_cols() != col_seps.len() - 1 {
            return Err(Error::InvalidInput("edge map does not match the separator grid".into()));
        }
        Ok(Self { row_seps, col_seps, local_edges })
    }

    pub fn n_rows(&self) -> usize {
        self.row_seps.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.col_seps.len() - 1
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            row_seps: self.row_seps.iter().map(|y| y + dy).collect(),
            col_seps: self.col_seps.iter().map(|x| x + dx).collect(),
            local_edges: self.local_edges.clone(),
        }
    }
}

/// Separator counts used as table evidence by layout categorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GridEvidence {
    pub horizontal: usize,
    pub vertical: usize,
}

impl GridEvidence {
    pub fn is_table(&self) -> bool {
        self.horizontal >= 2 && self.vertical >= 2
    }
}

pub fn detect_separators(region: &PageImage) -> Result<SeparatorSet> {
    detect_separators_with(region, &SeparatorParams::default())
}

/// Finds ruling lines in a table crop.
///
/// The search runs inside the crop's tight ink box, so blank margins around
/// the table do not dilute line coverage. Positions are in crop pixels,
/// measured at line centres.
pub fn detect_separators_with(region: &PageImage, params: &SeparatorParams) -> Result<SeparatorSet> {
    let mask = raster::binarize(region);
    let Some(ink) = mask.ink_bounds(&mask.full_box()) else {
        return Err(Error::NotATable("region has no ink".into()));
    };
    let (rows, cols) = separator_lines(&mask, &ink, params);
    if rows.len() < 2 || cols.len() < 2 {
        return Err(Error::NotATable(format!(
            "found {} horizontal and {} vertical ruling lines, need at least 2 of each",
            rows.len(),
            cols.len()
        )));
    }
    let mut edges = EdgeMap::full(rows.len() - 1, cols.len() - 1);
    for r in 0..rows.len() - 1 {
        for c in 1..cols.len() - 1 {
            let on = edge_evidence(&mask, cols[c], (rows[r], rows[r + 1]), Axis::Vertical, params);
            edges.set_vertical(r, c - 1, on);
        }
    }
    for r in 1..rows.len() - 1 {
        for c in 0..cols.len() - 1 {
            let on = edge_evidence(&mask, rows[r], (cols[c], cols[c + 1]), Axis::Horizontal, params);
            edges.set_horizontal(r - 1, c, on);
        }
    }
    SeparatorSet::new(rows, cols, edges)
}

/// Counts ruling lines inside `within` of a page mask.
pub fn grid_evidence(mask: &InkMask, within: &PixelBox) -> GridEvidence {
    let Some(ink) = mask.ink_bounds(within) else {
        return GridEvidence::default();
    };
    let (rows, cols) = separator_lines(mask, &ink, &SeparatorParams::default());
    GridEvidence { horizontal: rows.len(), vertical: cols.len() }
}

fn separator_lines(mask: &InkMask, ink: &PixelBox, params: &SeparatorParams) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (ink.width(), ink.height());
    let min_run = |extent: u32| params.min_run_px.max((params.min_run_frac * extent as f64).ceil() as u32);
    let (run_w, run_h) = (min_run(w), min_run(h));
    let row_candidates: Vec<u32> = (ink.y0..ink.y1)
        .filter(|&y| {
            let covered = long_runs((ink.x0..ink.x1).map(|x| mask.get(x, y)), run_w);
            covered as f64 >= params.line_coverage * w as f64
        })
        .collect();
    let col_candidates: Vec<u32> = (ink.x0..ink.x1)
        .filter(|&x| {
            let covered = long_runs((ink.y0..ink.y1).map(|y| mask.get(x, y)), run_h);
            covered as f64 >= params.line_coverage * h as f64
        })
        .collect();
    (group_centres(&row_candidates, params.merge_px), group_centres(&col_candidates, params.merge_px))
}

/// Total length of ink runs at least `min_run` long.
fn long_runs(line: impl Iterator<Item = bool>, min_run: u32) -> u32 {
    let (mut total, mut run) = (0, 0);
    for ink in line {
        if ink {
            run += 1;
        } else {
            if run >= min_run {
                total += run;
            }
            run = 0;
        }
    }
    if run >= min_run {
        total += run;
    }
    total
}

/// Groups sorted pixel indices whose successive distance is at most
/// `merge_px` and returns each group's centre in continuous coordinates.
fn group_centres(candidates: &[u32], merge_px: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut iter = candidates.iter().copied();
    let Some(first) = iter.next() else { return out };
    let (mut start, mut last) = (first, first);
    for p in iter {
        if p - last > merge_px {
            out.push((start + last + 1) as f64 / 2.0);
            start = p;
        }
        last = p;
    }
    out.push((start + last + 1) as f64 / 2.0);
    out
}

#[derive(Clone, Copy)]
enum Axis {
    Horizontal,
    Vertical,
}

/// Whether ink covers enough of the segment running along `sep` between
/// the two bounding separators `span`.
fn edge_evidence(mask: &InkMask, sep: f64, span: (f64, f64), axis: Axis, params: &SeparatorParams) -> bool {
    let centre = sep.floor() as i64;
    let band = params.edge_band as i64;
    let (from, to) = (span.0.ceil() as i64, span.1.floor() as i64);
    if to <= from {
        return true;
    }
    let hits = (from..to)
        .filter(|&t| {
            (centre - band..=centre + band).any(|s| match axis {
                Axis::Vertical => mask.get_or_blank(s, t),
                Axis::Horizontal => mask.get_or_blank(t, s),
            })
        })
        .count();
    hits as f64 >= params.edge_coverage * (to - from) as f64
}

/// Builds the cell structure from separators: units joined by an absent
/// edge form one cell, which must be a full rectangle with no present edge
/// inside it.
pub fn build_grid(seps: &SeparatorSet) -> Result<Table> {
    let (n_rows, n_cols) = (seps.n_rows(), seps.n_cols());
    let edges = &seps.local_edges;
    let mut parent: Vec<usize> = (0..n_rows * n_cols).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut join = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for r in 0..n_rows {
        for c in 0..n_cols {
            if c + 1 < n_cols && !edges.vertical(r, c) {
                join(r * n_cols + c, r * n_cols + c + 1);
            }
            if r + 1 < n_rows && !edges.horizontal(r, c) {
                join(r * n_cols + c, (r + 1) * n_cols + c);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for u in 0..n_rows * n_cols {
        let root = find(&mut parent, u);
        groups.entry(root).or_default().push((u / n_cols, u % n_cols));
    }
    let mut cells = Vec::with_capacity(groups.len());
    for units in groups.values() {
        let r0 = units.iter().map(|u| u.0).min().expect("non-empty group");
        let r1 = units.iter().map(|u| u.0).max().expect("non-empty group") + 1;
        let c0 = units.iter().map(|u| u.1).min().expect("non-empty group");
        let c1 = units.iter().map(|u| u.1).max().expect("non-empty group") + 1;
        let inner_edge = (r0..r1).any(|r| (c0..c1 - 1).any(|c| edges.vertical(r, c)))
            || (r0..r1 - 1).any(|r| (c0..c1).any(|c| edges.horizontal(r, c)));
        if units.len() != (r1 - r0) * (c1 - c0) || inner_edge {
            let list: Vec<String> = units.iter().map(|(r, c)| format!("({r},{c})")).collect();
            return Err(Error::NonRectangularSpan(format!(
                "merged units {} do not form a rectangular cell",
                list.join(" ")
            )));
        }
        let quad = Quadrangle::from_rect(seps.col_seps[c0], seps.row_seps[r0], seps.col_seps[c1], seps.row_seps[r1])?;
        cells.push(TableCell { row_start: r0, row_end: r1, col_start: c0, col_end: c1, quad, content: None });
    }
    Table::new(n_rows, n_cols, cells)
}

/// Assigns each instance to the cell it overlaps most and fills cell
/// contents. Ties prefer the smaller cell, then the earlier one. Instances
/// overlapping no cell are dropped with a warning.
pub fn assign_text_to_cells(table: &Table, instances: &[TextInstance]) -> (Table, Vec<String>) {
    let cells = table.cells();
    let mut members: Vec<Vec<TextInstance>> = vec![Vec::new(); cells.len()];
    let mut warnings = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let best = cells
            .iter()
            .enumerate()
            .map(|(k, cell)| (inst.quad.intersection_area(&cell.quad), cell.quad.area(), k))
            .filter(|&(overlap, _, _)| overlap > 0.0)
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        match best {
            Some((_, _, k)) => members[k].push(inst.clone()),
            None => warnings.push(format!("text instance {i} lies outside every table cell, dropped")),
        }
    }
    let mut out = table.clone();
    for (cell, group) in out.cells_mut().iter_mut().zip(members) {
        if group.is_empty() {
            continue;
        }
        let ordered = crate::pipeline::reading_order(&group);
        let texts: Vec<&str> = ordered.iter().filter_map(|t| t.text()).filter(|t| !t.is_empty()).collect();
        let confs: Vec<f64> = ordered.iter().filter_map(|t| t.content.as_ref()).map(|c| c.confidence).collect();
        let confidence = if confs.is_empty() { 0.0 } else { confs.iter().sum::<f64>() / confs.len() as f64 };
        cell.content = Some(TextContent { text: texts.join(" "), confidence: confidence.clamp(0.0, 1.0) });
    }
    (out, warnings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Json,
    Html,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "html" => Ok(ExportFormat::Html),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidInput(format!("unknown table format {other:?}"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Json => "json",
            ExportFormat::Html => "html",
            ExportFormat::Csv => "csv",
        })
    }
}

pub fn export_table(table: &Table, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Json => Ok(crate::output::table_json(table)),
        ExportFormat::Html => Ok(table_html(table)),
        ExportFormat::Csv => table_csv(table),
    }
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

fn table_html(table: &Table) -> String {
    let mut out = String::from("<table>\n");
    for r in 0..table.n_rows() {
        out.push_str("  <tr>");
        for cell in table.cells().iter().filter(|c| c.row_start == r) {
            out.push_str("<td");
            if cell.row_span() > 1 {
                out.push_str(&format!(" rowspan=\"{}\"", cell.row_span()));
            }
            if cell.col_span() > 1 {
                out.push_str(&format!(" colspan=\"{}\"", cell.col_span()));
            }
            out.push('>');
            out.push_str(&escape_html(cell.text()));
            out.push_str("</td>");
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
    out
}

fn table_csv(table: &Table) -> Result<String> {
    if table.has_spans() {
        return Err(Error::CsvSpanUnsupported);
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in 0..table.n_rows() {
        let row: Vec<&str> = table.cells().iter().filter(|c| c.row_start == r).map(|c| c.text()).collect();
        w.write_record(&row).map_err(|e| Error::InvalidInput(format!("csv export: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv export: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BLACK, PageImage};

    fn seps_2x2(edges: EdgeMap) -> SeparatorSet {
        SeparatorSet::new(vec![0.0, 10.0, 20.0], vec![0.0, 30.0, 60.0], edges).unwrap()
    }

    /// Draws a ruled grid, skipping vertical segment (r, c) pairs listed
    /// in `skip_v`.
    fn draw_grid(rows: &[u32], cols: &[u32], skip_v: &[(usize, usize)]) -> PageImage {
        let mut p = PageImage::blank(cols[cols.len() - 1] + 20, rows[rows.len() - 1] + 20);
        for &y in rows {
            p.fill_rect(cols[0], y, cols[cols.len() - 1] + 1, y + 1, BLACK);
        }
        for (j, &x) in cols.iter().enumerate() {
            for r in 0..rows.len() - 1 {
                if j > 0 && j < cols.len() - 1 && skip_v.contains(&(r, j - 1)) {
                    continue;
                }
                p.fill_rect(x, rows[r], x + 1, rows[r + 1] + 1, BLACK);
            }
        }
        p
    }

    #[test]
    fn full_ruled_3x3() {
        let p = draw_grid(&[10, 50, 90, 130], &[10, 90, 170, 250], &[]);
        let s = detect_separators(&p).unwrap();
        assert_eq!(s.row_seps, vec![10.5, 50.5, 90.5, 130.5]);
        assert_eq!(s.col_seps.len(), 4);
        assert_eq!(s.local_edges.absent_count(), 0);
        let t = build_grid(&s).unwrap();
        assert_eq!(t.cells().len(), 9);
        assert!(t.cells().iter().all(TableCell::is_unit));
    }

    #[test]
    fn missing_half_of_middle_line() {
        // The top row is short enough for the broken line to stay a
        // separator candidate.
        let p = draw_grid(&[10, 40, 110], &[10, 110, 210], &[(0, 0)]);
        let s = detect_separators(&p).unwrap();
        assert!(!s.local_edges.vertical(0, 0));
        assert!(s.local_edges.vertical(1, 0));
        let t = build_grid(&s).unwrap();
        assert_eq!(t.cells().len(), 3);
        assert_eq!(t.cells()[0].col_span(), 2);
    }

    #[test]
    fn blank_and_text_regions_are_not_tables() {
        assert!(matches!(detect_separators(&PageImage::blank(50, 50)), Err(Error::NotATable(_))));
        let mut p = PageImage::blank(200, 60);
        crate::font::draw_text(&mut p, 5, 5, "Just words, no rules", 1, BLACK);
        crate::font::draw_text(&mut p, 5, 27, "Another line of text", 1, BLACK);
        assert!(matches!(detect_separators(&p), Err(Error::NotATable(_))));
    }

    #[test]
    fn separators_translate_with_content() {
        let a = detect_separators(&draw_grid(&[10, 50, 90], &[10, 90, 170], &[])).unwrap();
        let b = detect_separators(&draw_grid(&[17, 57, 97], &[13, 93, 173], &[])).unwrap();
        assert_eq!(a.translate(3.0, 7.0), b);
    }

    #[test]
    fn grid_examples() {
        assert_eq!(build_grid(&seps_2x2(EdgeMap::full(2, 2))).unwrap().cells().len(), 4);
        let mut e = EdgeMap::full(2, 2);
        e.set_vertical(0, 0, false);
        let t = build_grid(&seps_2x2(e)).unwrap();
        assert_eq!(t.cells().len(), 3);
        assert_eq!((t.cells()[0].col_start, t.cells()[0].col_end), (0, 2));
        let mut l = EdgeMap::full(2, 2);
        l.set_vertical(0, 0, false);
        l.set_horizontal(0, 0, false);
        let err = build_grid(&seps_2x2(l)).unwrap_err();
        assert!(matches!(err, Error::NonRectangularSpan(_)));
        assert!(err.to_string().contains("(0,0)") && err.to_string().contains("(1,0)"));
    }

    #[test]
    fn cell_count_law() {
        // cells = units - (merged units - merged groups)
        let mut e = EdgeMap::full(3, 3);
        e.set_vertical(0, 0, false);
        e.set_horizontal(1, 2, false);
        let t = build_grid(&SeparatorSet::new(vec![0., 1., 2., 3.], vec![0., 1., 2., 3.], e).unwrap()).unwrap();
        assert_eq!(t.cells().len(), 9 - (4 - 2));
    }

    fn text_inst(x0: f64, y0: f64, x1: f64, y1: f64, text: &str) -> TextInstance {
        TextInstance::new(Quadrangle::from_rect(x0, y0, x1, y1).unwrap(), 1.0)
            .unwrap()
            .with_content(TextContent::new(text, 1.0).unwrap())
    }

    #[test]
    fn assignment_joins_and_drops() {
        let t = build_grid(&seps_2x2(EdgeMap::full(2, 2))).unwrap();
        let insts = vec![
            text_inst(45.0, 12.0, 55.0, 18.0, "right"),
            text_inst(32.0, 12.0, 42.0, 18.0, "left"),
            text_inst(100.0, 100.0, 110.0, 110.0, "outside"),
        ];
        let (filled, warnings) = assign_text_to_cells(&t, &insts);
        assert_eq!(filled.cell_at(1, 1).unwrap().text(), "left right");
        assert_eq!(filled.cell_at(0, 0).unwrap().content, None);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn exports() {
        let mut e = EdgeMap::full(2, 2);
        e.set_vertical(0, 0, false);
        let spanned = build_grid(&seps_2x2(e)).unwrap();
        let html = export_table(&spanned, ExportFormat::Html).unwrap();
        assert_eq!(html.matches("colspan=\"2\"").count(), 1);
        assert!(matches!(export_table(&spanned, ExportFormat::Csv), Err(Error::CsvSpanUnsupported)));

        let t = build_grid(&seps_2x2(EdgeMap::full(2, 2))).unwrap();
        let insts = vec![
            text_inst(5.0, 2.0, 20.0, 8.0, "a"),
            text_inst(35.0, 2.0, 50.0, 8.0, "b"),
            text_inst(5.0, 12.0, 20.0, 18.0, "c"),
            text_inst(35.0, 12.0, 50.0, 18.0, "d"),
        ];
        let (filled, _) = assign_text_to_cells(&t, &insts);
        assert_eq!(export_table(&filled, ExportFormat::Csv).unwrap(), "a,b\nc,d\n");
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let t = build_grid(&seps_2x2(EdgeMap::full(2, 2))).unwrap();
        let (filled, _) = assign_text_to_cells(&t, &[text_inst(5.0, 2.0, 20.0, 8.0, "x, \"y\"")]);
        assert_eq!(export_table(&filled, ExportFormat::Csv).unwrap(), "\"x, \"\"y\"\"\",\n,\n");
    }
}
