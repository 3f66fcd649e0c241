//! Renders a line of text, then reads it back from the pixels.

use docxchain::bridge::Backend;
use docxchain::recognition::recognize_text;
use docxchain::synth::{BlockContent, BlockSpec, PageSpec, generate_page};
use docxchain::{TextInstance, geometry::Rect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = std::env::args().nth(1).unwrap_or_else(|| "Invoice 2024-117: 3 items, total $84.20".into());
    let spec = PageSpec {
        seed: 0,
        width: 900,
        height: 120,
        blocks: vec![BlockSpec {
            x: 20,
            y: 40,
            content: BlockContent::Paragraph { lines: vec![line.clone()], scale: 1 },
        }],
        noise: 0.0,
    };
    let (page, truth) = generate_page(&spec)?;
    let b: Rect = truth.lines[0].bbox;
    let instance = TextInstance::new(b.to_quad(), 1.0)?;
    let content = recognize_text(&page, &instance, &Backend::Classical)?;
    println!("rendered:   {line}");
    println!("recognized: {} (confidence {:.2})", content.text, content.confidence);
    Ok(())
}
