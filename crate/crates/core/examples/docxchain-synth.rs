//! Renders synthetic pages with exact ground truth.
//!
//! ```text
//! cargo run --example docxchain-synth -- page.json --png page.png --truth page.truth.json
//! cargo run --example docxchain-synth -- --random 7 --random 8 --pdf two-pages.pdf
//! cargo run --example docxchain-synth -- --random 7 --dump-spec
//! ```

use std::path::{Path, PathBuf};

use clap::Parser;
use docxchain::cli::render_path;
use docxchain::synth::{
    GroundTruth, Mix, PAGE_WIDTH, PageSpec, generate_page, page_to_pdf, random_page_spec, write_pdf,
};

#[derive(Parser)]
struct Args {
    /// Page spec JSON files.
    specs: Vec<PathBuf>,
    /// Add a random page generated from this seed.
    #[arg(long = "random")]
    seeds: Vec<u64>,
    /// Restrict random pages to text blocks.
    #[arg(long)]
    text_only: bool,
    /// PNG of the first page; later pages get a -p<i> suffix.
    #[arg(long)]
    png: Option<PathBuf>,
    /// Ground truth of every page as a JSON array.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// All pages as one letter-size PDF.
    #[arg(long)]
    pdf: Option<PathBuf>,
    /// Print the page specs as JSON.
    #[arg(long)]
    dump_spec: bool,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let mix = if args.text_only { Mix::TEXT_ONLY } else { Mix::ALL };
    let mut specs: Vec<PageSpec> = Vec::new();
    for p in &args.specs {
        specs.push(serde_json::from_str(&std::fs::read_to_string(p)?)?);
    }
    specs.extend(args.seeds.iter().map(|&s| random_page_spec(s, mix)));
    if specs.is_empty() {
        return Err("give at least one spec file or --random seed".into());
    }
    if args.dump_spec {
        println!("{}", serde_json::to_string_pretty(&specs)?);
    }

    let mut pages = Vec::new();
    let mut truths: Vec<GroundTruth> = Vec::new();
    for spec in &specs {
        let (page, truth) = generate_page(spec)?;
        pages.push(page);
        truths.push(truth);
    }
    if let Some(base) = &args.png {
        for (i, page) in pages.iter().enumerate() {
            write(&render_path(base, i), &page.encode_png())?;
        }
    }
    if let Some(path) = &args.truth {
        write(path, serde_json::to_string_pretty(&truths)?.as_bytes())?;
    }
    if let Some(path) = &args.pdf {
        // 612 pt across a 1700 px page: letter size at 200 dpi.
        let pt_per_px = 612.0 / PAGE_WIDTH as f64;
        let pdf_pages: Vec<_> = pages.iter().map(|p| page_to_pdf(p, pt_per_px)).collect();
        write(path, &write_pdf(&pdf_pages))?;
    }
    eprintln!("{} page(s), {} text line(s)", pages.len(), truths.iter().map(|t| t.lines.len()).sum::<usize>());
    Ok(())
}
