//! Loading images and PDFs into [`Document`]s.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use hayro::hayro_interpret::InterpreterSettings;
use hayro::hayro_interpret::util::TransformExt;
use hayro::hayro_syntax::Pdf;
use hayro::kurbo::Affine;
use hayro::vello_cpu::color::palette::css::WHITE as CSS_WHITE;
use hayro::vello_cpu::{self, Pixmap, RenderContext};
use hayro::{RenderCache, RenderSettings};

use crate::error::{Error, Result};
use crate::model::{Document, PageImage};

pub const DEFAULT_DPI: u32 = 200;
pub const IMAGE_DEFAULT_DPI: u32 = 96;
pub const MIN_DPI: u32 = 36;
pub const MAX_DPI: u32 = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PageSelection {
    #[default]
    First,
    All,
    Single(usize),
}

impl FromStr for PageSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(PageSelection::First),
            "all" => Ok(PageSelection::All),
            n => n
                .parse()
                .map(PageSelection::Single)
                .map_err(|_| Error::InvalidInput(format!("page selection {n:?} is not first, all or an index"))),
        }
    }
}

impl fmt::Display for PageSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PageSelection::First => f.write_str("first"),
            PageSelection::All => f.write_str("all"),
            PageSelection::Single(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub dpi: u32,
    pub page_selection: PageSelection,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { dpi: DEFAULT_DPI, page_selection: PageSelection::First }
    }
}

impl LoadOptions {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_DPI..=MAX_DPI).contains(&self.dpi) {
            return Err(Error::InvalidInput(format!("dpi {} outside [{MIN_DPI}, {MAX_DPI}]", self.dpi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Jpeg,
    Pdf,
}

fn format_of(path: &Path) -> Result<Format> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "jpg" | "jpeg" => Ok(Format::Jpeg),
        "pdf" => Ok(Format::Pdf),
        _ => {
            Err(Error::UnsupportedFormat(format!("{}: only .jpg, .jpeg, .png and .pdf are supported", path.display())))
        }
    }
}

/// Loads a file, dispatching on its extension.
pub fn load_document(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Document> {
    let path = path.as_ref();
    opts.validate()?;
    let format = format_of(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    let page = match format {
        Format::Png => decode_png(&bytes)?,
        Format::Jpeg => decode_image(&bytes, image::ImageFormat::Jpeg, IMAGE_DEFAULT_DPI)?,
        Format::Pdf => return load_pdf(source, bytes, opts),
    };
    if let PageSelection::Single(index) = opts.page_selection {
        if index > 0 {
            return Err(Error::PageOutOfRange { index, count: 1 });
        }
    }
    Document::new(source, vec![page])
}

fn decode_image(bytes: &[u8], format: image::ImageFormat, dpi: u32) -> Result<PageImage> {
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::CorruptFile(format!("cannot decode image: {e}")))?;
    PageImage::from_rgb_image(img.to_rgb8(), dpi)
}

/// Decodes a PNG, taking the dpi from its pHYs chunk when given in meters.
pub fn decode_png(bytes: &[u8]) -> Result<PageImage> {
    decode_image(bytes, image::ImageFormat::Png, png_dpi(bytes).unwrap_or(IMAGE_DEFAULT_DPI))
}

fn png_dpi(bytes: &[u8]) -> Option<u32> {
    let reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().ok()?;
    let dims = reader.info().pixel_dims?;
    if dims.unit != png::Unit::Meter || dims.xppu == 0 {
        return None;
    }
    let dpi = (dims.xppu as f64 * 0.0254).round() as u32;
    (dpi > 0).then_some(dpi)
}

fn open_pdf(bytes: Vec<u8>) -> Result<Pdf> {
    Pdf::new(bytes).map_err(|e| Error::CorruptFile(format!("cannot parse PDF: {e:?}")))
}

fn load_pdf(source: String, bytes: Vec<u8>, opts: &LoadOptions) -> Result<Document> {
    let pdf = open_pdf(bytes)?;
    let count = pdf.pages().len();
    if count == 0 {
        return Err(Error::EmptyDocument(format!("{source} has no pages")));
    }
    let indices: Vec<usize> = match opts.page_selection {
        PageSelection::First => vec![0],
        PageSelection::All => (0..count).collect(),
        PageSelection::Single(i) if i < count => vec![i],
        PageSelection::Single(index) => return Err(Error::PageOutOfRange { index, count }),
    };
    let cache = RenderCache::new();
    let pages = indices.iter().map(|&i| render_page(&pdf, &cache, i, opts.dpi)).collect::<Result<Vec<_>>>()?;
    Document::new(source, pages)?.with_page_indices(indices)
}

/// Number of pages in a PDF.
pub fn pdf_page_count(bytes: &[u8]) -> Result<usize> {
    Ok(open_pdf(bytes.to_vec())?.pages().len())
}

/// Rasterizes one page at `dpi` on a white background.
///
/// The output is `round(points / 72 * dpi)` pixels on each side.
pub fn rasterize_pdf_page(bytes: &[u8], page_index: usize, dpi: u32) -> Result<PageImage> {
    LoadOptions { dpi, ..Default::default() }.validate()?;
    let pdf = open_pdf(bytes.to_vec())?;
    let count = pdf.pages().len();
    if page_index >= count {
        return Err(Error::PageOutOfRange { index: page_index, count });
    }
    render_page(&pdf, &RenderCache::new(), page_index, dpi)
}

fn render_page<'a>(pdf: &'a Pdf, cache: &RenderCache<'a>, index: usize, dpi: u32) -> Result<PageImage> {
    let page = &pdf.pages()[index];
    let (w_pt, h_pt) = page.render_dimensions();
    let scale = dpi as f64 / 72.0;
    let width = (w_pt as f64 * scale).round();
    let height = (h_pt as f64 * scale).round();
    if !(1.0..=u16::MAX as f64).contains(&width) || !(1.0..=u16::MAX as f64).contains(&height) {
        return Err(Error::CorruptFile(format!("page {index} renders to {width}x{height} px at {dpi} dpi")));
    }
    let (width, height) = (width as u16, height as u16);
    let mut ctx = RenderContext::new(width, height);
    let transform = Affine::scale(scale) * page.initial_transform(true).to_kurbo();
    hayro::render_into(page, cache, &InterpreterSettings::default(), &RenderSettings::default(), &mut ctx, transform);
    ctx.flush();
    let mut pixmap = Pixmap::new(width, height);
    ctx.render_with(
        &mut pixmap,
        &mut vello_cpu::Resources::default(),
        vello_cpu::RasterizerSettings { target_init: vello_cpu::TargetInit::Clear(CSS_WHITE), ..Default::default() },
    );
    // Premultiplied RGBA composited onto white.
    let rgba = pixmap.data_as_u8_slice();
    let mut rgb = Vec::with_capacity(width as usize * height as usize * 3);
    for px in rgba.chunks_exact(4) {
        let inv = 255 - px[3];
        rgb.extend(px[..3].iter().map(|&c| c.saturating_add(inv)));
    }
    PageImage::new(width as u32, height as u32, rgb, dpi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsupported_extension() {
        let err = load_document("scan.tiff", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn png_round_trip_keeps_size_and_dpi() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.png");
        let img = PageImage::filled(100, 50, [10, 20, 30], 150);
        std::fs::write(&path, img.encode_png()).unwrap();
        let doc = load_document(&path, &LoadOptions::default()).unwrap();
        assert_eq!(doc.pages().len(), 1);
        assert_eq!(doc.pages()[0], img);
    }

    #[test]
    fn corrupt_png_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        std::fs::write(&path, b"not a png").unwrap();
        assert!(matches!(load_document(&path, &LoadOptions::default()), Err(Error::CorruptFile(_))));
    }

    #[test]
    fn dpi_bounds_checked() {
        let opts = LoadOptions { dpi: 20, ..Default::default() };
        assert!(matches!(opts.validate(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn page_selection_parsing() {
        assert_eq!("first".parse::<PageSelection>().unwrap(), PageSelection::First);
        assert_eq!("all".parse::<PageSelection>().unwrap(), PageSelection::All);
        assert_eq!("2".parse::<PageSelection>().unwrap(), PageSelection::Single(2));
        assert!("-1".parse::<PageSelection>().is_err());
    }
}
