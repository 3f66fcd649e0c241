//! Embedded fixed-advance 8x16 bitmap font covering printable ASCII.
//!
//! The glyph table is shared by the template-matching recognizer and the
//! synthetic page generator, which is what makes render/recognize round
//! trips exact.

use std::sync::OnceLock;

use crate::model::{PageImage, Rgb};

pub const GLYPH_WIDTH: u32 = 8;
pub const GLYPH_HEIGHT: u32 = 16;
pub const GLYPH_BITS: u32 = GLYPH_WIDTH * GLYPH_HEIGHT;

const FONT_DATA: &str = include_str!("../data/font8x16.txt");

/// Bitmap of one codepoint; bit `row * 8 + col` is set for ink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlyphTemplate {
    pub codepoint: char,
    pub bitmap: u128,
}

impl GlyphTemplate {
    #[inline]
    pub fn ink(&self, row: u32, col: u32) -> bool {
        self.bitmap >> (row * GLYPH_WIDTH + col) & 1 == 1
    }

    /// Hamming distance to another 8x16 bitmap.
    #[inline]
    pub fn distance(&self, bitmap: u128) -> u32 {
        (self.bitmap ^ bitmap).count_ones()
    }
}

fn parse_font(data: &str) -> Vec<GlyphTemplate> {
    let mut glyphs = Vec::new();
    let mut lines = data.lines().filter(|l| !l.starts_with("# ") && !l.trim().is_empty());
    while let Some(header) = lines.next() {
        let hex =
            header.strip_prefix("char ").unwrap_or_else(|| panic!("font data: expected glyph header, got {header:?}"));
        let cp = u32::from_str_radix(hex.trim(), 16).expect("font data: bad codepoint");
        let mut bitmap = 0u128;
        for row in 0..GLYPH_HEIGHT {
            let line = lines.next().expect("font data: truncated glyph");
            assert_eq!(line.len(), GLYPH_WIDTH as usize, "font data: bad row width");
            for (col, ch) in line.chars().enumerate() {
                if ch == '#' {
                    bitmap |= 1u128 << (row * GLYPH_WIDTH + col as u32);
                }
            }
        }
        glyphs.push(GlyphTemplate { codepoint: char::from_u32(cp).expect("font data: invalid codepoint"), bitmap });
    }
    glyphs
}

/// All 95 templates, space first.
pub fn glyphs() -> &'static [GlyphTemplate] {
    static GLYPHS: OnceLock<Vec<GlyphTemplate>> = OnceLock::new();
    GLYPHS.get_or_init(|| parse_font(FONT_DATA))
}

pub fn glyph(ch: char) -> Option<&'static GlyphTemplate> {
    let cp = ch as u32;
    (0x20..0x7f).contains(&cp).then(|| &glyphs()[(cp - 0x20) as usize])
}

pub fn is_renderable(text: &str) -> bool {
    text.chars().all(|c| glyph(c).is_some())
}

/// Advance width of `text` in pixels at integer `scale`.
pub fn text_width(text: &str, scale: u32) -> u32 {
    text.chars().count() as u32 * GLYPH_WIDTH * scale
}

/// Draws `text` with its first glyph cell at `(x, y)`. Characters outside
/// the font are skipped (but still advance). Pixels past the page edge are
/// dropped.
pub fn draw_text(page: &mut PageImage, x: u32, y: u32, text: &str, scale: u32, color: Rgb) {
    let scale = scale.max(1);
    for (i, ch) in text.chars().enumerate() {
        let Some(g) = glyph(ch) else { continue };
        let gx = x + i as u32 * GLYPH_WIDTH * scale;
        for row in 0..GLYPH_HEIGHT {
            for col in 0..GLYPH_WIDTH {
                if g.ink(row, col) {
                    let px = gx + col * scale;
                    let py = y + row * scale;
                    page.fill_rect(px, py, px + scale, py + scale, color);
                }
            }
        }
    }
}

/// Tight ink box of `text` drawn at the origin, relative to the first cell:
/// `(x0, y0, x1, y1)`, or `None` when the text has no ink.
pub fn ink_extent(text: &str, scale: u32) -> Option<(u32, u32, u32, u32)> {
    let mut ext: Option<(u32, u32, u32, u32)> = None;
    for (i, ch) in text.chars().enumerate() {
        let Some(g) = glyph(ch) else { continue };
        for row in 0..GLYPH_HEIGHT {
            for col in 0..GLYPH_WIDTH {
                if g.ink(row, col) {
                    let x = (i as u32 * GLYPH_WIDTH + col) * scale;
                    let y = row * scale;
                    ext = Some(match ext {
                        None => (x, y, x + scale, y + scale),
                        Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x + scale), d.max(y + scale)),
                    });
                }
            }
        }
    }
    ext
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_printable_ascii_in_order() {
        let g = glyphs();
        assert_eq!(g.len(), 95);
        for (i, t) in g.iter().enumerate() {
            assert_eq!(t.codepoint as u32, 0x20 + i as u32);
        }
        assert_eq!(glyph(' ').unwrap().bitmap, 0);
        assert!(glyph('\u{e9}').is_none());
    }

    #[test]
    fn templates_are_pairwise_distinct() {
        let g = glyphs();
        for a in 0..g.len() {
            for b in a + 1..g.len() {
                assert_ne!(g[a].bitmap, g[b].bitmap, "{:?} vs {:?}", g[a].codepoint, g[b].codepoint);
            }
        }
    }

    #[test]
    fn draw_and_extent_agree() {
        let mut p = PageImage::blank(64, 40);
        draw_text(&mut p, 4, 3, "Hi", 2, crate::model::BLACK);
        let (x0, y0, x1, y1) = ink_extent("Hi", 2).unwrap();
        let mask = crate::raster::binarize(&p);
        let b = mask.ink_bounds(&mask.full_box()).unwrap();
        assert_eq!((b.x0, b.y0, b.x1, b.y1), (4 + x0, 3 + y0, 4 + x1, 3 + y1));
        assert_eq!(ink_extent("   ", 1), None);
    }
}
