//! Layout analysis: segmenting a page into regions and categorizing them.

use std::collections::BTreeMap;

use crate::bridge::{Backend, Task, Validated};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::model::{LayoutCategory, LayoutRegion, PageImage, TextInstance};
use crate::raster::{self, InkMask, PixelBox};
use crate::table::{self, GridEvidence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// Smallest whitespace gap that splits a block, as a fraction of the
    /// page's larger dimension.
    pub min_gap_frac: f64,
    /// Leaves narrower or shorter than this are discarded.
    pub min_region_px: u32,
    pub header_band: f64,
    pub footer_band: f64,
    /// Line height multiple, relative to the page median, marking a title.
    pub title_scale: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self { min_gap_frac: 0.012, min_region_px: 24, header_band: 0.06, footer_band: 0.06, title_scale: 1.5 }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        let positive = self.min_gap_frac > 0.0
            && self.min_region_px > 0
            && self.header_band > 0.0
            && self.footer_band > 0.0
            && self.title_scale > 0.0;
        if !positive || self.header_band >= 0.5 || self.footer_band >= 0.5 {
            return Err(Error::InvalidInput(format!("invalid layout parameters {self:?}")));
        }
        Ok(())
    }
}

/// Recursive XY-cut over an ink mask.
///
/// Each block is shrunk to its ink, then split at the centre of its widest
/// interior blank run when that run is at least the minimum gap, preferring
/// the wider axis and rows on a tie. Leaves are tight ink boxes in emission
/// order (top/left half first).
pub fn xy_cut(mask: &InkMask, params: &LayoutParams) -> Vec<Rect> {
    let min_gap = params.min_gap_frac * mask.width().max(mask.height()) as f64;
    let mut out = Vec::new();
    cut(mask, mask.full_box(), min_gap, params.min_region_px, &mut out);
    out.into_iter().map(|b| b.to_rect()).collect()
}

fn cut(mask: &InkMask, block: PixelBox, min_gap: f64, min_side: u32, out: &mut Vec<PixelBox>) {
    let Some(ink) = mask.ink_bounds(&block) else { return };
    let mut rows = vec![0u32; ink.height() as usize];
    let mut cols = vec![0u32; ink.width() as usize];
    for y in ink.y0..ink.y1 {
        for x in ink.x0..ink.x1 {
            if mask.get(x, y) {
                rows[(y - ink.y0) as usize] += 1;
                cols[(x - ink.x0) as usize] += 1;
            }
        }
    }
    let (row_run, col_run) = (widest_zero_run(&rows), widest_zero_run(&cols));
    let row_len = row_run.map_or(0, |r| r.1 - r.0);
    let col_len = col_run.map_or(0, |r| r.1 - r.0);
    if row_len >= col_len && row_len as f64 >= min_gap {
        let (a, b) = row_run.expect("non-empty run");
        let split = ink.y0 + (a + b) as u32 / 2;
        cut(mask, PixelBox::new(ink.x0, ink.y0, ink.x1, split), min_gap, min_side, out);
        cut(mask, PixelBox::new(ink.x0, split, ink.x1, ink.y1), min_gap, min_side, out);
    } else if col_len > row_len && col_len as f64 >= min_gap {
        let (a, b) = col_run.expect("non-empty run");
        let split = ink.x0 + (a + b) as u32 / 2;
        cut(mask, PixelBox::new(ink.x0, ink.y0, split, ink.y1), min_gap, min_side, out);
        cut(mask, PixelBox::new(split, ink.y0, ink.x1, ink.y1), min_gap, min_side, out);
    } else if ink.width() >= min_side && ink.height() >= min_side {
        out.push(ink);
    }
}

/// Widest run of zeros as `[start, end)`; the earliest wins ties.
fn widest_zero_run(profile: &[u32]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &v) in profile.iter().chain(std::iter::once(&1)).enumerate() {
        match (v == 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Categorizes one region; the first matching rule wins.
///
/// `page_text` holds every instance on the page: the region's own lines are
/// those whose centre falls inside `rect`, and the page median line height
/// comes from all of them.
pub fn categorize_region(
    rect: &Rect,
    page: &PageImage,
    mask: &InkMask,
    page_text: &[TextInstance],
    grid: GridEvidence,
    params: &LayoutParams,
) -> (LayoutCategory, f64) {
    if grid.is_table() {
        return (LayoutCategory::Table, 0.9);
    }
    let lines: Vec<&TextInstance> = page_text.iter().filter(|t| rect.contains_point(t.quad.center())).collect();
    if text_coverage(rect, mask, &lines) < 0.3 {
        return (LayoutCategory::Figure, 0.7);
    }
    let h = page.height() as f64;
    if rect.y1 <= params.header_band * h {
        return (LayoutCategory::Header, 0.9);
    }
    if rect.y0 >= (1.0 - params.footer_band) * h {
        return (LayoutCategory::Footer, 0.9);
    }
    let page_median = median(page_text.iter().map(|t| t.quad.height()).collect());
    let own_median = median(lines.iter().map(|t| t.quad.height()).collect());
    if let (Some(pm), Some(om)) = (page_median, own_median) {
        if lines.len() <= 2 && om >= params.title_scale * pm {
            return (LayoutCategory::Title, 0.7);
        }
    }
    let bulleted = lines.iter().filter(|t| t.text().is_some_and(starts_with_bullet)).count();
    if bulleted >= 2 {
        return (LayoutCategory::List, 0.7);
    }
    (LayoutCategory::Text, 0.6)
}

/// Whether the first token of a line is a bullet or an enumeration
/// marker such as `3.` or `12)`.
pub fn starts_with_bullet(line: &str) -> bool {
    let Some(token) = line.split_whitespace().next() else { return false };
    if token == "\u{2022}" || token == "-" {
        return true;
    }
    let digits = token.trim_end_matches(['.', ')']);
    token.len() == digits.len() + 1 && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Fraction of the region's ink lying inside the bounds of its text lines.
fn text_coverage(rect: &Rect, mask: &InkMask, lines: &[&TextInstance]) -> f64 {
    let Some(b) = pixel_box(rect, mask) else { return 0.0 };
    let (w, h) = (b.width() as usize, b.height() as usize);
    let mut covered = vec![false; w * h];
    for t in lines {
        let q = t.quad.bounds();
        let x0 = (q.x0.floor().max(b.x0 as f64) as u32).min(b.x1);
        let x1 = (q.x1.ceil().max(b.x0 as f64) as u32).min(b.x1);
        let y0 = (q.y0.floor().max(b.y0 as f64) as u32).min(b.y1);
        let y1 = (q.y1.ceil().max(b.y0 as f64) as u32).min(b.y1);
        for y in y0..y1 {
            let row = (y - b.y0) as usize * w;
            covered[row + (x0 - b.x0) as usize..row + (x1 - b.x0) as usize].fill(true);
        }
    }
    let (mut ink, mut inside) = (0usize, 0usize);
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            if mask.get(x, y) {
                ink += 1;
                if covered[(y - b.y0) as usize * w + (x - b.x0) as usize] {
                    inside += 1;
                }
            }
        }
    }
    if ink == 0 { 0.0 } else { inside as f64 / ink as f64 }
}

fn pixel_box(rect: &Rect, mask: &InkMask) -> Option<PixelBox> {
    let x0 = rect.x0.floor().max(0.0) as u32;
    let y0 = rect.y0.floor().max(0.0) as u32;
    let x1 = (rect.x1.ceil().max(0.0) as u32).min(mask.width());
    let y1 = (rect.y1.ceil().max(0.0) as u32).min(mask.height());
    (x0 < x1 && y0 < y1).then(|| PixelBox::new(x0, y0, x1, y1))
}

/// Segments and categorizes a page. The classical backend detects and
/// reads text itself to feed the categorization rules.
pub fn analyze_layout(page: &PageImage, params: &LayoutParams, backend: &Backend) -> Result<Vec<LayoutRegion>> {
    let text = match backend {
        Backend::Classical => {
            let found = crate::detection::classical_detect(page);
            crate::recognition::read_instances(page, &found, &Backend::Classical)?.0
        }
        Backend::External(_) => Vec::new(),
    };
    Ok(analyze_layout_with_text(page, params, backend, &text)?.0)
}

/// Layout analysis with the page's recognized text supplied by the caller.
/// Region ids follow reading order.
pub fn analyze_layout_with_text(
    page: &PageImage,
    params: &LayoutParams,
    backend: &Backend,
    page_text: &[TextInstance],
) -> Result<(Vec<LayoutRegion>, Vec<String>)> {
    params.validate()?;
    let (regions, warnings) = match backend {
        Backend::Classical => (classical_layout(page, params, page_text), Vec::new()),
        Backend::External(client) => match client.infer(Task::LayoutAnalysis, page, BTreeMap::new())? {
            (Validated::Layout(r), w) => (r, w),
            _ => unreachable!("validated payload matches its task"),
        },
    };
    let quads: Vec<_> = regions.iter().map(|r| r.bbox.to_quad()).collect();
    let ordered = crate::pipeline::reading_order_quads(&quads)
        .into_iter()
        .enumerate()
        .map(|(id, i)| LayoutRegion { id: id as u32, ..regions[i].clone() })
        .collect();
    Ok((ordered, warnings))
}

fn classical_layout(page: &PageImage, params: &LayoutParams, page_text: &[TextInstance]) -> Vec<LayoutRegion> {
    let mask = raster::binarize(page);
    let rects = xy_cut(&mask, params);
    debug_assert!(disjoint(&rects), "xy-cut leaves overlap");
    rects
        .iter()
        .map(|rect| {
            let grid = pixel_box(rect, &mask).map(|b| ruling_evidence(&mask, &b, page_text)).unwrap_or_default();
            let (category, confidence) = categorize_region(rect, page, &mask, page_text, grid, params);
            LayoutRegion { id: 0, bbox: *rect, category, confidence }
        })
        .collect()
}

/// Separator counts inside `b` once text lines are blanked out, so glyph
/// stems cannot pose as ruling lines.
fn ruling_evidence(mask: &InkMask, b: &PixelBox, page_text: &[TextInstance]) -> GridEvidence {
    let mut sub = mask.sub_mask(b);
    let frame = b.to_rect();
    for t in page_text {
        let Some(r) = t.quad.bounds().intersection(&frame) else { continue };
        let (x0, x1) = (r.x0.floor() as u32 - b.x0, (r.x1.ceil() as u32).min(b.x1) - b.x0);
        let (y0, y1) = (r.y0.floor() as u32 - b.y0, (r.y1.ceil() as u32).min(b.y1) - b.y0);
        for y in y0..y1 {
            for x in x0..x1 {
                sub.set(x, y, false);
            }
        }
    }
    table::grid_evidence(&sub, &sub.full_box())
}

fn disjoint(rects: &[Rect]) -> bool {
    rects.iter().enumerate().all(|(i, a)| rects[i + 1..].iter().all(|b| a.intersection(b).is_none()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::font::draw_text;
    use crate::model::BLACK;

    fn mask_with_blocks(w: u32, h: u32, blocks: &[(u32, u32, u32, u32)]) -> InkMask {
        let mut m = InkMask::new(w, h);
        for &(x0, y0, x1, y1) in blocks {
            for y in y0..y1 {
                for x in x0..x1 {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    #[test]
    fn xy_cut_examples() {
        let p = LayoutParams::default();
        assert!(xy_cut(&InkMask::new(500, 500), &p).is_empty());
        let one = xy_cut(&mask_with_blocks(500, 500, &[(100, 120, 300, 200)]), &p);
        assert_eq!(one, vec![Rect::new(100.0, 120.0, 300.0, 200.0).unwrap()]);
        // min gap at 500 px is 6 px
        let two = xy_cut(&mask_with_blocks(500, 500, &[(100, 100, 300, 150), (100, 160, 300, 220)]), &p);
        assert_eq!(two.len(), 2);
        let glued = xy_cut(&mask_with_blocks(500, 500, &[(100, 100, 300, 150), (100, 154, 300, 220)]), &p);
        assert_eq!(glued.len(), 1);
    }

    #[test]
    fn xy_cut_prefers_rows_on_tie() {
        // Four blocks in a 2x2 arrangement with equal gaps.
        let m = mask_with_blocks(
            400,
            400,
            &[(0, 0, 100, 100), (150, 0, 250, 100), (0, 150, 100, 250), (150, 150, 250, 250)],
        );
        let r = xy_cut(&m, &LayoutParams::default());
        assert_eq!(r.len(), 4);
        assert_eq!((r[0].x0, r[0].y0), (0.0, 0.0));
        assert_eq!((r[1].x0, r[1].y0), (150.0, 0.0));
    }

    #[test]
    fn xy_cut_drops_small_leaves() {
        let m = mask_with_blocks(500, 500, &[(100, 100, 300, 200), (100, 300, 110, 310)]);
        assert_eq!(xy_cut(&m, &LayoutParams::default()).len(), 1);
    }

    #[test]
    fn bullets() {
        assert!(starts_with_bullet("- milk"));
        assert!(starts_with_bullet("12) eggs"));
        assert!(starts_with_bullet("3. flour"));
        assert!(starts_with_bullet("\u{2022} item"));
        assert!(!starts_with_bullet("3.5 kg"));
        assert!(!starts_with_bullet("Plain words"));
        assert!(!starts_with_bullet(""));
    }

    #[test]
    fn title_and_paragraphs() {
        // Letter size at 200 dpi: the minimum gap (26 px) exceeds a scale-2
        // word space.
        let mut page = PageImage::blank(1700, 2200);
        draw_text(&mut page, 60, 300, "QUARTERLY REVIEW", 2, BLACK);
        for (i, line) in ["The first paragraph has", "two lines of text."].iter().enumerate() {
            draw_text(&mut page, 60, 400 + 22 * i as u32, line, 1, BLACK);
        }
        for (i, line) in ["Another paragraph follows", "with more words here", "and a third line."].iter().enumerate() {
            draw_text(&mut page, 60, 520 + 22 * i as u32, line, 1, BLACK);
        }
        let regions = analyze_layout(&page, &LayoutParams::default(), &Backend::Classical).unwrap();
        let cats: Vec<_> = regions.iter().map(|r| r.category).collect();
        assert_eq!(cats, vec![LayoutCategory::Title, LayoutCategory::Text, LayoutCategory::Text]);
        assert_eq!(regions.iter().map(|r| r.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(regions[2].confidence, 0.6);
    }

    #[test]
    fn table_header_list_figure() {
        let mut page = PageImage::blank(1700, 2200);
        draw_text(&mut page, 60, 12, "HEADER LINE", 2, BLACK);
        for i in 0..4 {
            page.fill_rect(100, 200 + 40 * i, 401, 201 + 40 * i, BLACK);
            page.fill_rect(100 + 100 * i, 200, 101 + 100 * i, 321, BLACK);
        }
        draw_text(&mut page, 60, 420, "- apples", 1, BLACK);
        draw_text(&mut page, 60, 442, "- pears", 1, BLACK);
        for y in 600..760u32 {
            for x in 200..360u32 {
                let (dx, dy) = (x as i64 - 280, y as i64 - 680);
                if dx * dx + dy * dy <= 80 * 80 {
                    page.put(x, y, BLACK);
                }
            }
        }
        let regions = analyze_layout(&page, &LayoutParams::default(), &Backend::Classical).unwrap();
        let cats: Vec<_> = regions.iter().map(|r| r.category).collect();
        assert_eq!(
            cats,
            vec![LayoutCategory::Header, LayoutCategory::Table, LayoutCategory::List, LayoutCategory::Figure]
        );
        let grid = Rect::new(100.0, 200.0, 401.0, 321.0).unwrap();
        assert!(regions[1].bbox.to_quad().iou(&grid.to_quad()) >= 0.9);
    }

    #[test]
    fn blank_page_has_no_regions() {
        let page = PageImage::blank(300, 300);
        assert!(analyze_layout(&page, &LayoutParams::default(), &Backend::Classical).unwrap().is_empty());
    }

    #[test]
    fn params_validated() {
        let bad = LayoutParams { header_band: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(LayoutParams::default().validate().is_ok());
    }
}
