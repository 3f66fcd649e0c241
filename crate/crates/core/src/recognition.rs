//! Text recognition: reading the content of detected instances.

use std::collections::BTreeMap;

use crate::bridge::{Backend, Task, Validated};
use crate::error::{Error, Result};
use crate::font::{self, GLYPH_BITS, GLYPH_HEIGHT, GLYPH_WIDTH};
use crate::model::{PageImage, TextContent, TextInstance};
use crate::raster::{self, InkMask};

/// Recognizes one instance by cropping its bounding rectangle from `page`.
/// Quads reaching past the page edge are clipped first.
pub fn recognize_text(page: &PageImage, instance: &TextInstance, backend: &Backend) -> Result<TextContent> {
    let bounds = instance.quad.bounds();
    let clipped = bounds.intersection(&page.rect()).ok_or(Error::EmptyCrop)?;
    if clipped.area() < 1.0 {
        return Err(Error::EmptyCrop);
    }
    let crop = page.crop(&clipped).ok_or(Error::EmptyCrop)?;
    match backend {
        Backend::Classical => Ok(classical_recognize(&crop)),
        Backend::External(client) => match client.infer(Task::TextRecognition, &crop, BTreeMap::new())? {
            (Validated::Recognition(c), _) => Ok(c),
            _ => unreachable!("validated payload matches its task"),
        },
    }
}

/// Recognizes every instance, keeping order and length.
///
/// An unreachable backend aborts the whole call. Any other per-instance
/// failure leaves that instance with empty content at confidence 0 and adds
/// a warning.
pub fn read_instances(
    page: &PageImage,
    instances: &[TextInstance],
    backend: &Backend,
) -> Result<(Vec<TextInstance>, Vec<String>)> {
    let mut out = Vec::with_capacity(instances.len());
    let mut warnings = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let content = match recognize_text(page, inst, backend) {
            Ok(c) => c,
            Err(e @ Error::BackendUnavailable(_)) => return Err(e),
            Err(e) => {
                warnings.push(format!("recognition of instance {i} failed: {e}"));
                TextContent::failed()
            }
        };
        out.push(inst.clone().with_content(content));
    }
    Ok((out, warnings))
}

/// Geometry of one decoding hypothesis: glyph cell size `scale`, top edge
/// of the glyph cells and left edge of the first cell, in crop pixels.
#[derive(Debug, Clone, Copy)]
struct Alignment {
    scale: f64,
    top: f64,
    left: f64,
}

struct Decoding {
    slots: Vec<(char, u32)>,
    cost: u32,
}

/// Template-matching recognizer for the embedded font.
///
/// The crop is binarized and its ink extent measured. Glyph cells are laid
/// over the ink at the height-derived scale first, then at every integer
/// scale consistent with the ink height, at every vertical cell offset and
/// horizontal phase. Each 8-pixel-wide slot is sampled to an 8x16 bitmap by
/// nearest neighbour and matched against all templates. Integer-scale
/// hypotheses only count when their samples account for all the ink. The
/// hypothesis with the lowest total Hamming distance wins, and the first
/// exact one stops the search.
pub fn classical_recognize(crop: &PageImage) -> TextContent {
    let mask = raster::binarize(crop);
    let Some(ink) = mask.ink_bounds(&mask.full_box()) else {
        return TextContent { text: String::new(), confidence: 1.0 };
    };
    let h = ink.height();
    let total_ink = mask.count() as u64;
    let mut best: Option<Decoding> = None;
    let consider = |a: Alignment, ink_check: Option<u64>, best: &mut Option<Decoding>| -> bool {
        let bound = best.as_ref().map_or(u32::MAX, |b| b.cost);
        if let Some(d) = decode(&mask, ink.x1, a, bound, ink_check) {
            let exact = d.cost == 0;
            *best = Some(d);
            return exact;
        }
        false
    };
    let base = Alignment { scale: h as f64 / GLYPH_HEIGHT as f64, top: ink.y0 as f64, left: ink.x0 as f64 };
    if !consider(base, None, &mut best) {
        'search: for s in 1..=h {
            if GLYPH_HEIGHT * s < h || h % s != 0 {
                continue;
            }
            for t in 0..=(GLYPH_HEIGHT - h / s) {
                for b in 0..GLYPH_WIDTH {
                    let a = Alignment {
                        scale: s as f64,
                        top: ink.y0 as f64 - (t * s) as f64,
                        left: ink.x0 as f64 - (b * s) as f64,
                    };
                    if consider(a, Some(total_ink), &mut best) {
                        break 'search;
                    }
                }
            }
        }
    }
    let d = best.expect("the height-derived alignment always decodes");
    let n = d.slots.len() as f64;
    let confidence = d.slots.iter().map(|&(_, dist)| 1.0 - dist as f64 / GLYPH_BITS as f64).sum::<f64>() / n;
    let mut text = String::with_capacity(d.slots.len());
    for &(ch, _) in &d.slots {
        if ch == ' ' && (text.is_empty() || text.ends_with(' ')) {
            continue;
        }
        text.push(ch);
    }
    let text = text.trim_end().to_string();
    TextContent { text, confidence: confidence.clamp(0.0, 1.0) }
}

/// Decodes every slot under `a`. Returns `None` once the running cost
/// reaches `bound` (an unbounded call always completes), or when
/// `total_ink` is given and the samples, each standing for a `scale x scale`
/// block, do not account for exactly that many ink pixels.
fn decode(mask: &InkMask, ink_x1: u32, a: Alignment, bound: u32, total_ink: Option<u64>) -> Option<Decoding> {
    let block = (a.scale * a.scale).round() as u64;
    let mut sampled = 0u64;
    let advance = GLYPH_WIDTH as f64 * a.scale;
    let n_slots = ((ink_x1 as f64 - a.left) / advance).ceil().max(1.0) as usize;
    let rows: [i64; GLYPH_HEIGHT as usize] =
        std::array::from_fn(|r| (a.top + (r as f64 + 0.5) * a.scale).floor() as i64);
    let mut slots = Vec::with_capacity(n_slots);
    let mut cost = 0u32;
    for k in 0..n_slots {
        let mut bitmap = 0u128;
        for c in 0..GLYPH_WIDTH {
            let x = (a.left + ((k as u32 * GLYPH_WIDTH + c) as f64 + 0.5) * a.scale).floor() as i64;
            for (r, &y) in rows.iter().enumerate() {
                if mask.get_or_blank(x, y) {
                    bitmap |= 1u128 << (r as u32 * GLYPH_WIDTH + c);
                }
            }
        }
        let (ch, dist) = if bitmap == 0 {
            (' ', 0)
        } else {
            font::glyphs()[1..]
                .iter()
                .map(|g| (g.codepoint, g.distance(bitmap)))
                .min_by_key(|&(_, d)| d)
                .expect("font has glyphs")
        };
        cost += dist;
        sampled += bitmap.count_ones() as u64 * block;
        if total_ink.is_some_and(|t| sampled > t) {
            return None;
        }
        if bound != u32::MAX && cost >= bound {
            return None;
        }
        slots.push((ch, dist));
    }
    if total_ink.is_some_and(|t| sampled != t) {
        return None;
    }
    Some(Decoding { slots, cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::font::draw_text;
    use crate::model::BLACK;
    use proptest::prelude::*;

    fn render(text: &str, scale: u32, pad: u32) -> PageImage {
        let w = font::text_width(text, scale) + 2 * pad;
        let mut p = PageImage::blank(w.max(1), GLYPH_HEIGHT * scale + 2 * pad);
        draw_text(&mut p, pad, pad, text, scale, BLACK);
        p
    }

    /// Crop to the ink box padded by one pixel, as the detector does.
    fn tight(p: &PageImage) -> PageImage {
        let m = raster::binarize(p);
        let b = m.ink_bounds(&m.full_box()).unwrap();
        let r = crate::geometry::Rect::new(b.x0 as f64 - 1.0, b.y0 as f64 - 1.0, b.x1 as f64 + 1.0, b.y1 as f64 + 1.0)
            .unwrap();
        p.crop(&r).unwrap()
    }

    #[test]
    fn reads_native_scale_text() {
        let c = classical_recognize(&tight(&render("Total: 42", 1, 3)));
        assert_eq!(c.text, "Total: 42");
        assert_eq!(c.confidence, 1.0);
    }

    #[test]
    fn blank_crop_is_empty_text() {
        let c = classical_recognize(&PageImage::blank(20, 20));
        assert_eq!(c, TextContent { text: String::new(), confidence: 1.0 });
    }

    #[test]
    fn normalizes_scale() {
        assert_eq!(classical_recognize(&tight(&render("HELLO", 2, 4))).text, "HELLO");
        assert_eq!(classical_recognize(&tight(&render("x=3; y", 3, 2))).text, "x=3; y");
    }

    #[test]
    fn single_glyph_and_inner_space() {
        let a = classical_recognize(&tight(&render("A", 1, 2)));
        assert_eq!((a.text.as_str(), a.confidence), ("A", 1.0));
        assert_eq!(classical_recognize(&tight(&render("A B", 1, 2))).text, "A B");
        assert_eq!(classical_recognize(&tight(&render("A   B", 1, 2))).text, "A B");
    }

    #[test]
    fn noise_has_lower_confidence() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut p = PageImage::blank(8, 16);
        for y in 0..16 {
            for x in 0..8 {
                if rng.random_bool(0.5) {
                    p.put(x, y, BLACK);
                }
            }
        }
        let c = classical_recognize(&p);
        assert!(c.confidence < 1.0 && c.confidence >= 0.0);
    }

    #[test]
    fn read_instances_preserves_order_and_flags_failures() {
        let p = render("Hi", 1, 12);
        let good = crate::detection::classical_detect(&p);
        let off_page =
            TextInstance::new(crate::geometry::Quadrangle::from_rect(500.0, 500.0, 510.0, 510.0).unwrap(), 1.0)
                .unwrap();
        let input = vec![good[0].clone(), off_page];
        let (out, warnings) = read_instances(&p, &input, &Backend::Classical).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text(), Some("Hi"));
        assert_eq!(out[1].content, Some(TextContent::failed()));
        assert_eq!(warnings.len(), 1);
        assert!(read_instances(&p, &[], &Backend::Classical).unwrap().0.is_empty());
    }

    #[test]
    fn partially_outside_quad_is_clipped() {
        let p = render("Edge", 1, 1);
        let q = crate::geometry::Quadrangle::from_rect(-5.0, -5.0, p.width() as f64 + 5.0, 30.0).unwrap();
        let inst = TextInstance::new(q, 1.0).unwrap();
        assert_eq!(recognize_text(&p, &inst, &Backend::Classical).unwrap().text, "Edge");
    }

    fn ascii_text() -> impl Strategy<Value = String> {
        "[ -~]{1,24}"
            .prop_filter("needs a letter or digit", |s| s.chars().any(|c| c.is_ascii_alphanumeric()))
            .prop_map(|s| {
                let mut out = String::new();
                for w in s.split_whitespace() {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                    out.push_str(w);
                }
                out
            })
            .prop_filter("non-empty", |s| !s.is_empty())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn render_recognize_round_trip(text in ascii_text(), scale in 1u32..=3) {
            let c = classical_recognize(&tight(&render(&text, scale, 3)));
            prop_assert_eq!(&c.text, &text);
            prop_assert_eq!(c.confidence, 1.0);
        }

        #[test]
        fn confidence_in_unit_interval(bits in proptest::collection::vec(any::<bool>(), 128)) {
            let mut p = PageImage::blank(8, 16);
            for (i, &b) in bits.iter().enumerate() {
                if b {
                    p.put(i as u32 % 8, i as u32 / 8, BLACK);
                }
            }
            let c = classical_recognize(&p);
            prop_assert!((0.0..=1.0).contains(&c.confidence));
        }
    }
}
