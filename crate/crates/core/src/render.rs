//! Overlay rendering of pipeline results onto page images.

use crate::geometry::{Point, Quadrangle};
use crate::model::{Element, LayoutCategory, PageImage, Rgb};
use crate::pipeline::PageResult;

pub const TEXT_COLOR: Rgb = [255, 165, 0];
pub const CELL_COLOR: Rgb = [0, 200, 0];
pub const TEXT_WIDTH: u32 = 2;
pub const CELL_WIDTH: u32 = 2;
pub const REGION_WIDTH: u32 = 3;

/// Outline colour of each layout category.
///
/// | category | RGB |
/// |---|---|
/// | title | 220, 20, 60 |
/// | text | 30, 144, 255 |
/// | list | 148, 0, 211 |
/// | table | 0, 139, 139 |
/// | figure | 255, 0, 255 |
/// | caption | 139, 69, 19 |
/// | header | 128, 128, 0 |
/// | footer | 112, 128, 144 |
/// | other | 105, 105, 105 |
pub const CATEGORY_PALETTE: [(LayoutCategory, Rgb); 9] = [
    (LayoutCategory::Title, [220, 20, 60]),
    (LayoutCategory::Text, [30, 144, 255]),
    (LayoutCategory::List, [148, 0, 211]),
    (LayoutCategory::Table, [0, 139, 139]),
    (LayoutCategory::Figure, [255, 0, 255]),
    (LayoutCategory::Caption, [139, 69, 19]),
    (LayoutCategory::Header, [128, 128, 0]),
    (LayoutCategory::Footer, [112, 128, 144]),
    (LayoutCategory::Other, [105, 105, 105]),
];

pub fn category_color(c: LayoutCategory) -> Rgb {
    CATEGORY_PALETTE.iter().find(|(k, _)| *k == c).map(|(_, rgb)| *rgb).expect("palette covers every category")
}

/// Draws one page's results: region boxes first, then table cells, then
/// text quads on top. Pixels off the outlines are untouched.
pub fn render_overlay(page: &PageImage, result: &PageResult) -> PageImage {
    let mut out = page.clone();
    match result {
        PageResult::Reading(instances) => {
            for t in instances {
                draw_quad(&mut out, &t.quad, TEXT_COLOR, TEXT_WIDTH);
            }
        }
        PageResult::Table(parsed) => {
            for c in parsed.table.cells() {
                draw_quad(&mut out, &c.quad, CELL_COLOR, CELL_WIDTH);
            }
            for t in &parsed.instances {
                draw_quad(&mut out, &t.quad, TEXT_COLOR, TEXT_WIDTH);
            }
        }
        PageResult::Structured(doc) => {
            for e in &doc.elements {
                let r = e.region();
                draw_quad(&mut out, &r.bbox.to_quad(), category_color(r.category), REGION_WIDTH);
            }
            for e in &doc.elements {
                if let Element::Table { table, .. } = e {
                    for c in table.cells() {
                        draw_quad(&mut out, &c.quad, CELL_COLOR, CELL_WIDTH);
                    }
                }
            }
            for e in &doc.elements {
                for t in e.instances() {
                    draw_quad(&mut out, &t.quad, TEXT_COLOR, TEXT_WIDTH);
                }
            }
        }
    }
    out
}

/// Strokes a closed polygon through the rounded vertices with a square
/// brush covering `[p - w/2, p - w/2 + w)` on each axis around every
/// point `p` of the digital line.
pub fn draw_quad(page: &mut PageImage, quad: &Quadrangle, color: Rgb, width: u32) {
    let v = quad.vertices();
    for i in 0..4 {
        draw_line(page, v[i], v[(i + 1) % 4], color, width);
    }
}

fn draw_line(page: &mut PageImage, a: Point, b: Point, color: Rgb, width: u32) {
    let (mut x, mut y) = (a.x.round() as i64, a.y.round() as i64);
    let (x1, y1) = (b.x.round() as i64, b.y.round() as i64);
    let (dx, dy) = ((x1 - x).abs(), -(y1 - y).abs());
    let (sx, sy) = (if x < x1 { 1 } else { -1 }, if y < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        stamp(page, x, y, color, width);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn stamp(page: &mut PageImage, x: i64, y: i64, color: Rgb, width: u32) {
    let w = width as i64;
    let off = w / 2;
    for py in y - off..y - off + w {
        for px in x - off..x - off + w {
            if px >= 0 && py >= 0 && (px as u64) < page.width() as u64 && (py as u64) < page.height() as u64 {
                page.put(px as u32, py as u32, color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TextInstance, WHITE};

    fn count(page: &PageImage, c: Rgb) -> usize {
        (0..page.height())
            .flat_map(|y| (0..page.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| page.get(x, y) == c)
            .count()
    }

    #[test]
    fn empty_report_is_identity() {
        let p = PageImage::filled(40, 30, [9, 8, 7], 72);
        assert_eq!(render_overlay(&p, &PageResult::Reading(vec![])), p);
    }

    #[test]
    fn one_instance_outline_pixels() {
        let p = PageImage::blank(100, 80);
        let (x0, y0, x1, y1) = (20i64, 10i64, 60i64, 30i64);
        let q = Quadrangle::from_rect(x0 as f64, y0 as f64, x1 as f64, y1 as f64).unwrap();
        let out = render_overlay(&p, &PageResult::Reading(vec![TextInstance::new(q, 1.0).unwrap()]));
        // Band of one pixel on each side of every edge.
        let outer = (x1 - x0 + 2) * (y1 - y0 + 2);
        let inner = (x1 - x0 - 2) * (y1 - y0 - 2);
        assert_eq!(count(&out, TEXT_COLOR) as i64, outer - inner);
        assert_eq!(count(&out, WHITE) as i64, 100 * 80 - (outer - inner));
        for y in 0..80 {
            for x in 0..100 {
                let (xi, yi) = (x as i64, y as i64);
                let on = (x0 - 1..=x1).contains(&xi)
                    && (y0 - 1..=y1).contains(&yi)
                    && !((x0 + 1..x1 - 1).contains(&xi) && (y0 + 1..y1 - 1).contains(&yi));
                assert_eq!(out.get(x, y) == TEXT_COLOR, on, "pixel {x},{y}");
            }
        }
    }

    #[test]
    fn palette_distinct_from_text_and_cells() {
        let mut colors: Vec<Rgb> = CATEGORY_PALETTE.iter().map(|(_, c)| *c).collect();
        colors.push(TEXT_COLOR);
        colors.push(CELL_COLOR);
        let n = colors.len();
        colors.sort();
        colors.dedup();
        assert_eq!(colors.len(), n);
        for c in LayoutCategory::ALL {
            category_color(c);
        }
    }
}
