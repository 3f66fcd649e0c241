//! Grayscale conversion, Otsu binarization and connected components.

use crate::geometry::Rect;
use crate::model::PageImage;

/// Integer luma with weights 0.299, 0.587, 0.114.
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

pub fn grayscale(page: &PageImage) -> Vec<u8> {
    page.pixels().chunks_exact(3).map(|p| luma([p[0], p[1], p[2]])).collect()
}

/// Global Otsu threshold; pixels `<= t` form the dark class.
///
/// Returns `None` for a single-level image, which has no foreground.
pub fn otsu_threshold(gray: &[u8]) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &g in gray {
        hist[g as usize] += 1;
    }
    if hist.iter().filter(|&&n| n > 0).count() < 2 {
        return None;
    }
    let total = gray.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &n)| i as f64 * n as f64).sum();
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    let (mut best, mut best_t) = (-1.0f64, 0u8);
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_t = t as u8;
        }
    }
    Some(best_t)
}

/// Binary ink map, `true` = ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InkMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl InkMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_or_blank(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn count_in(&self, b: &PixelBox) -> usize {
        let mut n = 0;
        for y in b.y0..b.y1 {
            let row = y as usize * self.width as usize;
            n += self.bits[row + b.x0 as usize..row + b.x1 as usize].iter().filter(|&&v| v).count();
        }
        n
    }

    /// Tight bounding box of ink inside `within`.
    pub fn ink_bounds(&self, within: &PixelBox) -> Option<PixelBox> {
        let mut out: Option<PixelBox> = None;
        for y in within.y0..within.y1 {
            for x in within.x0..within.x1 {
                if self.get(x, y) {
                    out = Some(match out {
                        None => PixelBox::new(x, y, x + 1, y + 1),
                        Some(b) => b.include(x, y),
                    });
                }
            }
        }
        out
    }

    pub fn full_box(&self) -> PixelBox {
        PixelBox::new(0, 0, self.width, self.height)
    }

    pub fn sub_mask(&self, b: &PixelBox) -> InkMask {
        let mut m = InkMask::new(b.width(), b.height());
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                if self.get(x, y) {
                    m.set(x - b.x0, y - b.y0, true);
                }
            }
        }
        m
    }
}

/// Binarizes with a global Otsu threshold, dark pixels are ink.
pub fn binarize(page: &PageImage) -> InkMask {
    let gray = grayscale(page);
    let mut mask = InkMask::new(page.width(), page.height());
    if let Some(t) = otsu_threshold(&gray) {
        for (bit, &g) in mask.bits.iter_mut().zip(&gray) {
            *bit = g <= t;
        }
    }
    mask
}

/// Half-open integer pixel box `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelBox {
    pub const fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn include(self, x: u32, y: u32) -> Self {
        Self { x0: self.x0.min(x), y0: self.y0.min(y), x1: self.x1.max(x + 1), y1: self.y1.max(y + 1) }
    }

    pub fn union(self, o: PixelBox) -> Self {
        Self { x0: self.x0.min(o.x0), y0: self.y0.min(o.y0), x1: self.x1.max(o.x1), y1: self.y1.max(o.y1) }
    }

    /// Rows shared by both boxes.
    pub fn vertical_overlap(&self, o: &PixelBox) -> u32 {
        self.y1.min(o.y1).saturating_sub(self.y0.max(o.y0))
    }

    /// Empty columns between the boxes, zero when they overlap horizontally.
    pub fn horizontal_gap(&self, o: &PixelBox) -> u32 {
        o.x0.saturating_sub(self.x1).max(self.x0.saturating_sub(o.x1))
    }

    pub fn to_rect(&self) -> Rect {
        Rect { x0: self.x0 as f64, y0: self.y0 as f64, x1: self.x1 as f64, y1: self.y1 as f64 }
    }

    pub fn translate(&self, dx: u32, dy: u32) -> Self {
        Self::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub bbox: PixelBox,
    pub pixels: u32,
}

/// 8-connected components in raster-scan discovery order.
pub fn connected_components(mask: &InkMask) -> Vec<Component> {
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut seen = vec![false; mask.bits.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if !mask.bits[idx] || seen[idx] {
                continue;
            }
            seen[idx] = true;
            stack.push((x, y));
            let mut bbox = PixelBox::new(x as u32, y as u32, x as u32 + 1, y as u32 + 1);
            let mut pixels = 0u32;
            while let Some((cx, cy)) = stack.pop() {
                pixels += 1;
                bbox = bbox.include(cx as u32, cy as u32);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let n = (ny * w + nx) as usize;
                        if mask.bits[n] && !seen[n] {
                            seen[n] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(Component { bbox, pixels });
        }
    }
    out
}

/// Median of a non-empty list (upper median for even lengths).
pub(crate) fn median_u32(values: &mut [u32]) -> Option<u32> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[values.len() / 2])
}
