//! Text detection: locating line-level text instances on a page.

use std::collections::BTreeMap;

use crate::bridge::{Backend, Task, Validated};
use crate::error::{Error, Result};
use crate::geometry::Quadrangle;
use crate::model::{PageImage, TextInstance};
use crate::raster::{self, Component, PixelBox, median_u32};

/// Tunables of the classical detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Components shorter than this are too small to seed a line.
    pub min_height: u32,
    /// Components with fewer ink pixels are too small to seed a line.
    pub min_area: u32,
    /// Components taller than this fraction of the page are dropped.
    pub max_height_frac: f64,
    /// Required vertical overlap, as a fraction of the smaller height.
    pub overlap_frac: f64,
    /// Allowed horizontal gap, as a multiple of the reference height.
    pub gap_factor: f64,
    /// Components taller than this multiple of the median are not text.
    pub max_height_ratio: f64,
    /// Large components with ink density below this are ruling frames.
    pub frame_density: f64,
    pub padding: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            min_height: 4,
            min_area: 8,
            max_height_frac: 0.5,
            overlap_frac: 0.5,
            gap_factor: 1.5,
            max_height_ratio: 4.0,
            frame_density: 0.1,
            padding: 1.0,
        }
    }
}

/// Detects text with the selected backend. Output is sorted by the quad's
/// top edge, then its left edge.
pub fn detect_text(page: &PageImage, backend: &Backend) -> Result<Vec<TextInstance>> {
    let mut out = match backend {
        Backend::Classical => return Ok(classical_detect(page)),
        Backend::External(client) => match client.infer(Task::TextDetection, page, BTreeMap::new())? {
            (Validated::Detection(v), _) => v,
            _ => unreachable!("validated payload matches its task"),
        },
    };
    sort_instances(&mut out);
    Ok(out)
}

pub fn classical_detect(page: &PageImage) -> Vec<TextInstance> {
    classical_detect_with(page, &DetectorParams::default())
}

pub fn classical_detect_with(page: &PageImage, params: &DetectorParams) -> Vec<TextInstance> {
    let mask = raster::binarize(page);
    let lines = detect_line_boxes(&raster::connected_components(&mask), page.height(), params);
    let (w, h) = (page.width() as f64, page.height() as f64);
    let p = params.padding;
    let mut out: Vec<TextInstance> = lines
        .into_iter()
        .map(|b| {
            let quad = Quadrangle::from_rect(
                (b.x0 as f64 - p).max(0.0),
                (b.y0 as f64 - p).max(0.0),
                (b.x1 as f64 + p).min(w),
                (b.y1 as f64 + p).min(h),
            )
            .expect("non-empty pixel box");
            TextInstance::new(quad, 1.0).expect("unit confidence")
        })
        .collect();
    sort_instances(&mut out);
    out
}

pub(crate) fn sort_instances(v: &mut [TextInstance]) {
    v.sort_by(|a, b| a.quad.min_y().total_cmp(&b.quad.min_y()).then(a.quad.min_x().total_cmp(&b.quad.min_x())));
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups components into tight line boxes.
///
/// Seed components are merged pairwise by the overlap and gap rules.
/// Marks too small to seed a line (hyphens, dots, quotes) are then attached
/// to the vertically nearest line within reach.
pub(crate) fn detect_line_boxes(comps: &[Component], page_height: u32, params: &DetectorParams) -> Vec<PixelBox> {
    let max_h = params.max_height_frac * page_height as f64;
    // Marks carry whether they could stand as a line of their own.
    let (mut seed_comps, mut marks): (Vec<Component>, Vec<(PixelBox, bool)>) = (Vec::new(), Vec::new());
    for c in comps {
        if c.bbox.height() as f64 > max_h {
            continue;
        }
        if c.bbox.height() < params.min_height || c.pixels < params.min_area {
            marks.push((c.bbox, false));
        } else {
            seed_comps.push(*c);
        }
    }
    let mut heights: Vec<u32> = seed_comps.iter().map(|c| c.bbox.height()).collect();
    let Some(median) = median_u32(&mut heights) else {
        return Vec::new();
    };
    let frame_min = (2 * median).min(32);
    let mut seeds: Vec<PixelBox> = seed_comps
        .iter()
        .filter(|c| {
            let b = c.bbox;
            if b.height() as f64 > params.max_height_ratio * median as f64 {
                return false;
            }
            let density = c.pixels as f64 / b.area() as f64;
            !(density < params.frame_density && b.width() > frame_min && b.height() > frame_min)
        })
        .map(|c| c.bbox)
        .collect();
    let median = median as f64;
    let reach = |h: u32| params.gap_factor * median.max(h as f64);

    seeds.sort_by_key(|b| (b.y0, b.x0, b.y1, b.x1));
    let mut dsu = Dsu::new(seeds.len());
    for i in 0..seeds.len() {
        let a = seeds[i];
        for j in i + 1..seeds.len() {
            let b = seeds[j];
            if b.y0 >= a.y1 {
                break;
            }
            let small = a.height().min(b.height());
            if a.vertical_overlap(&b) as f64 >= params.overlap_frac * small as f64
                && a.horizontal_gap(&b) as f64 <= reach(small)
            {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, (PixelBox, usize, u32)> = BTreeMap::new();
    for (i, b) in seeds.iter().enumerate() {
        let root = dsu.find(i);
        groups
            .entry(root)
            .and_modify(|(bx, n, h)| {
                *bx = bx.union(*b);
                *n += 1;
                *h = (*h).max(b.height());
            })
            .or_insert((*b, 1, b.height()));
    }
    // Short single-component lines are treated like marks.
    let mut lines = Vec::new();
    for (bx, n, h) in groups.into_values() {
        if n == 1 && (h as f64) < 0.5 * median {
            marks.push((bx, true));
        } else {
            lines.push(bx);
        }
    }
    let anchors = lines.clone();
    let mut leftovers = Vec::new();
    for (m, standalone) in marks {
        let best = anchors
            .iter()
            .enumerate()
            .filter(|(_, l)| m.horizontal_gap(l) as f64 <= reach(l.height()))
            .map(|(i, l)| (vertical_distance(&m, l), i))
            .filter(|&(d, _)| d as f64 <= median)
            .min();
        match best {
            Some((_, i)) => lines[i] = lines[i].union(m),
            None if standalone => leftovers.push(m),
            None => {}
        }
    }
    lines.extend(leftovers);
    coalesce(lines, params.overlap_frac, &reach)
}

/// Repeatedly merges boxes that satisfy the line rule until none do. Marks
/// attached above can bridge a gap that was too wide between seeds alone.
fn coalesce(mut boxes: Vec<PixelBox>, overlap_frac: f64, reach: &dyn Fn(u32) -> f64) -> Vec<PixelBox> {
    loop {
        let mut merged = false;
        'outer: for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let (a, b) = (boxes[i], boxes[j]);
                let small = a.height().min(b.height());
                if a.vertical_overlap(&b) as f64 >= overlap_frac * small as f64
                    && a.horizontal_gap(&b) as f64 <= reach(small)
                {
                    boxes[i] = a.union(b);
                    boxes.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return boxes;
        }
    }
}

fn vertical_distance(a: &PixelBox, b: &PixelBox) -> u32 {
    b.y0.saturating_sub(a.y1).max(a.y0.saturating_sub(b.y1))
}

/// Convenience used by pipelines: classical detection restricted to a
/// window of the page, with quads in page coordinates.
pub(crate) fn detect_in_window(
    page: &PageImage,
    window: &crate::geometry::Rect,
    backend: &Backend,
) -> Result<Vec<TextInstance>> {
    let crop =
        page.crop(window).ok_or_else(|| Error::InvalidInput(format!("region {window:?} is outside the page")))?;
    let (dx, dy) = (window.x0.max(0.0).floor(), window.y0.max(0.0).floor());
    let mut out: Vec<TextInstance> = detect_text(&crop, backend)?.into_iter().map(|i| i.translate(dx, dy)).collect();
    sort_instances(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::font::{draw_text, ink_extent};
    use crate::model::BLACK;
    use proptest::prelude::*;

    fn truth_box(x: u32, y: u32, text: &str, scale: u32) -> Quadrangle {
        let (a, b, c, d) = ink_extent(text, scale).unwrap();
        Quadrangle::from_rect((x + a) as f64, (y + b) as f64, (x + c) as f64, (y + d) as f64).unwrap()
    }

    #[test]
    fn blank_page_has_no_text() {
        assert!(classical_detect(&PageImage::blank(50, 40)).is_empty());
    }

    #[test]
    fn single_word_yields_one_containing_quad() {
        let mut p = PageImage::blank(60, 40);
        draw_text(&mut p, 10, 10, "AB", 1, BLACK);
        let found = classical_detect(&p);
        assert_eq!(found.len(), 1);
        let truth = truth_box(10, 10, "AB", 1);
        assert!(found[0].quad.bounds().contains_rect(&truth.bounds()));
        assert_eq!(found[0].det_confidence, 1.0);
    }

    #[test]
    fn wide_gap_splits_words() {
        let mut p = PageImage::blank(200, 40);
        draw_text(&mut p, 10, 10, "Left", 1, BLACK);
        // 40 px of blank well above 1.5 x glyph height.
        draw_text(&mut p, 10 + 32 + 40, 10, "Right", 1, BLACK);
        let found = classical_detect(&p);
        assert_eq!(found.len(), 2);
        assert!(found[0].quad.min_x() < found[1].quad.min_x());
        assert!(found[0].quad.iou(&truth_box(10, 10, "Left", 1)) >= 0.8);
        assert!(found[1].quad.iou(&truth_box(82, 10, "Right", 1)) >= 0.8);
    }

    #[test]
    fn paragraph_lines_come_out_in_order() {
        let mut p = PageImage::blank(300, 120);
        for (i, line) in ["First line of text", "second - line", "third, final."].iter().enumerate() {
            draw_text(&mut p, 12, 10 + 22 * i as u32, line, 1, BLACK);
        }
        let found = classical_detect(&p);
        assert_eq!(found.len(), 3);
        for (i, inst) in found.iter().enumerate() {
            let line = ["First line of text", "second - line", "third, final."][i];
            let truth = truth_box(12, 10 + 22 * i as u32, line, 1);
            assert!(inst.quad.bounds().contains_rect(&truth.bounds()), "line {i}");
        }
    }

    #[test]
    fn salt_noise_is_ignored() {
        let mut p = PageImage::blank(100, 100);
        for k in 0..20 {
            p.put(5 + 4 * k, 7 + 3 * (k % 9), BLACK);
        }
        assert!(classical_detect(&p).is_empty());
    }

    #[test]
    fn quads_stay_on_page_at_borders() {
        let mut p = PageImage::blank(20, 40);
        draw_text(&mut p, 0, 0, "H", 1, BLACK);
        let found = classical_detect(&p);
        let b = found[0].quad.bounds();
        assert!(b.x0 >= 0.0 && b.y0 >= 0.0 && b.x1 <= 20.0 && b.y1 <= 40.0);
        assert_eq!((b.x0, b.y0), (0.0, 0.0));
        assert!(found[0].quad.area() >= 8.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn translation_moves_quads_exactly(dx in 0u32..30, dy in 0u32..30) {
            let draw = |ox: u32, oy: u32| {
                let mut p = PageImage::blank(260, 120);
                draw_text(&mut p, 10 + ox, 10 + oy, "Hello world", 1, BLACK);
                draw_text(&mut p, 10 + ox, 40 + oy, "Line 2: ok", 2, BLACK);
                p
            };
            let base = classical_detect(&draw(0, 0));
            let moved = classical_detect(&draw(dx, dy));
            prop_assert_eq!(base.len(), moved.len());
            for (a, b) in base.iter().zip(&moved) {
                prop_assert_eq!(a.quad.translate(dx as f64, dy as f64), b.quad);
            }
        }
    }
}
