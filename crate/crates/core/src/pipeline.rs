//! Reading order and the three composed pipelines.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bridge::{Backend, Backends, Task, Validated};
use crate::detection::{self, detect_text};
use crate::error::{Error, Result};
use crate::geometry::{Quadrangle, Rect};
use crate::layout::{LayoutParams, analyze_layout_with_text};
use crate::model::{
    Document, Element, LayoutCategory, LayoutRegion, PageImage, StructuredDocument, Table, TextInstance,
};
use crate::recognition::read_instances;
use crate::table::{assign_text_to_cells, build_grid, detect_separators};

/// Orders quads for reading and returns the permutation as indices.
///
/// Quads whose vertical extents overlap by at least half the smaller height
/// share a line (transitively). Lines run top to bottom by mean top edge,
/// quads within a line left to right.
pub fn reading_order_quads(quads: &[Quadrangle]) -> Vec<usize> {
    order_indices(quads, |_, _| Ordering::Equal)
}

/// Instances in reading order. The result depends only on the instances,
/// never on their input order.
pub fn reading_order(instances: &[TextInstance]) -> Vec<TextInstance> {
    let quads: Vec<Quadrangle> = instances.iter().map(|t| t.quad).collect();
    order_indices(&quads, |a, b| content_cmp(&instances[a], &instances[b]))
        .into_iter()
        .map(|i| instances[i].clone())
        .collect()
}

fn content_cmp(a: &TextInstance, b: &TextInstance) -> Ordering {
    let conf = |t: &TextInstance| t.content.as_ref().map(|c| c.confidence);
    a.text().cmp(&b.text()).then(a.det_confidence.total_cmp(&b.det_confidence)).then(match (conf(a), conf(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (x, y) => x.is_some().cmp(&y.is_some()),
    })
}

fn geometry_cmp(a: &Quadrangle, b: &Quadrangle) -> Ordering {
    a.min_y().total_cmp(&b.min_y()).then(a.min_x().total_cmp(&b.min_x())).then_with(|| {
        a.vertices()
            .iter()
            .zip(b.vertices())
            .map(|(p, q)| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn order_indices(quads: &[Quadrangle], extra: impl Fn(usize, usize) -> Ordering) -> Vec<usize> {
    let n = quads.len();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.sort_by(|&a, &b| geometry_cmp(&quads[a], &quads[b]).then_with(|| extra(a, b)).then(a.cmp(&b)));
    let bounds: Vec<Rect> = quads.iter().map(Quadrangle::bounds).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (k, &i) in rank.iter().enumerate() {
        for &j in &rank[k + 1..] {
            if bounds[j].y0 >= bounds[i].y1 {
                break;
            }
            let overlap = bounds[i].y1.min(bounds[j].y1) - bounds[i].y0.max(bounds[j].y0);
            let smaller = bounds[i].height().min(bounds[j].height());
            if overlap >= 0.5 * smaller {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    // Lines keyed by root; members arrive in rank order.
    let mut lines: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for &i in &rank {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = lines.len();
            lines.push((root, Vec::new()));
        }
        lines[slot[root]].1.push(i);
    }
    let position: Vec<usize> = {
        let mut p = vec![0; n];
        for (k, &i) in rank.iter().enumerate() {
            p[i] = k;
        }
        p
    };
    let mut keyed: Vec<(f64, usize, Vec<usize>)> = lines
        .into_iter()
        .map(|(_, mut members)| {
            let mean_top = members.iter().map(|&i| bounds[i].y0).sum::<f64>() / members.len() as f64;
            let first = position[members[0]];
            members.sort_by(|&a, &b| bounds[a].x0.total_cmp(&bounds[b].x0).then(position[a].cmp(&position[b])));
            (mean_top, first, members)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().flat_map(|(_, _, m)| m).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PipelineKind {
    GeneralTextReading,
    TableParsing,
    DocumentStructurization,
}

impl PipelineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineKind::GeneralTextReading => "general_text_reading",
            PipelineKind::TableParsing => "table_parsing",
            PipelineKind::DocumentStructurization => "document_structurization",
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general_text_reading" => Ok(PipelineKind::GeneralTextReading),
            "table_parsing" => Ok(PipelineKind::TableParsing),
            "document_structurization" => Ok(PipelineKind::DocumentStructurization),
            other => Err(Error::InvalidInput(format!("unknown pipeline {other:?}"))),
        }
    }
}

/// A parsed table with the region it was searched in and the text read
/// inside that region, in reading order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub region: LayoutRegion,
    pub table: Table,
    pub instances: Vec<TextInstance>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PageResult {
    Reading(Vec<TextInstance>),
    Table(ParsedTable),
    Structured(StructuredDocument),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageReport {
    /// Index of the page in the source file.
    pub page_index: usize,
    pub result: PageResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: &'static str,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub pipeline: PipelineKind,
    pub source: String,
    pub pages: Vec<PageReport>,
    pub warnings: Vec<String>,
    /// Summed per stage over all pages, in first-use order.
    pub timings: Vec<StageTiming>,
}

impl PipelineReport {
    /// Every text instance of the report, pages concatenated in order.
    pub fn instances(&self) -> Vec<&TextInstance> {
        self.pages
            .iter()
            .flat_map(|p| -> Box<dyn Iterator<Item = &TextInstance>> {
                match &p.result {
                    PageResult::Reading(v) => Box::new(v.iter()),
                    PageResult::Table(t) => Box::new(t.instances.iter()),
                    PageResult::Structured(d) => Box::new(d.elements.iter().flat_map(|e| e.instances())),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub backends: Backends,
    pub layout: LayoutParams,
    /// Pages processed concurrently.
    pub jobs: usize,
    /// Table search region for table parsing; the whole page when absent.
    pub table_region: Option<Rect>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { backends: Backends::classical(), layout: LayoutParams::default(), jobs: 1, table_region: None }
    }
}

impl PipelineConfig {
    pub fn with_backends(backends: &Backends) -> Self {
        Self { backends: backends.clone(), ..Default::default() }
    }
}

#[derive(Default)]
struct Timer {
    stages: Vec<StageTiming>,
}

impl Timer {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.add(stage, start.elapsed().as_secs_f64() * 1000.0);
        out
    }

    fn add(&mut self, stage: &'static str, ms: f64) {
        match self.stages.iter_mut().find(|s| s.stage == stage) {
            Some(s) => s.ms += ms,
            None => self.stages.push(StageTiming { stage, ms }),
        }
    }
}

struct PageOutcome {
    result: PageResult,
    warnings: Vec<String>,
    timer: Timer,
}

pub fn general_text_reading(doc: &Document, backends: &Backends) -> Result<PipelineReport> {
    run_pipeline(PipelineKind::GeneralTextReading, doc, &PipelineConfig::with_backends(backends))
}

pub fn table_parsing(doc: &Document, backends: &Backends, region: Option<Rect>) -> Result<PipelineReport> {
    let cfg = PipelineConfig { table_region: region, ..PipelineConfig::with_backends(backends) };
    run_pipeline(PipelineKind::TableParsing, doc, &cfg)
}

pub fn document_structurization(doc: &Document, backends: &Backends) -> Result<PipelineReport> {
    run_pipeline(PipelineKind::DocumentStructurization, doc, &PipelineConfig::with_backends(backends))
}

/// Runs a pipeline over every page of `doc`, up to `cfg.jobs` pages at a
/// time. The first failing page, in page order, fails the whole run.
pub fn run_pipeline(kind: PipelineKind, doc: &Document, cfg: &PipelineConfig) -> Result<PipelineReport> {
    cfg.layout.validate()?;
    let pages = doc.pages();
    let jobs = cfg.jobs.clamp(1, pages.len());
    let run_page = |page: &PageImage| match kind {
        PipelineKind::GeneralTextReading => read_page(page, cfg),
        PipelineKind::TableParsing => table_page(page, cfg),
        PipelineKind::DocumentStructurization => structure_page(page, cfg),
    };
    let outcomes: Vec<Result<PageOutcome>> = if jobs == 1 {
        pages.iter().map(run_page).collect()
    } else {
        let mut slots: Vec<Option<Result<PageOutcome>>> = (0..pages.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    let run_page = &run_page;
                    s.spawn(move || {
                        (w..pages.len()).step_by(jobs).map(|i| (i, run_page(&pages[i]))).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("pipeline worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every page processed")).collect()
    };

    let mut report = PipelineReport {
        pipeline: kind,
        source: doc.source_id.clone(),
        pages: Vec::with_capacity(pages.len()),
        warnings: Vec::new(),
        timings: Vec::new(),
    };
    let mut timer = Timer::default();
    for (outcome, &page_index) in outcomes.into_iter().zip(doc.page_indices()) {
        let outcome = outcome?;
        report.warnings.extend(outcome.warnings.into_iter().map(|w| format!("page {page_index}: {w}")));
        for s in outcome.timer.stages {
            timer.add(s.stage, s.ms);
        }
        report.pages.push(PageReport { page_index, result: outcome.result });
    }
    report.timings = timer.stages;
    Ok(report)
}

fn read_page(page: &PageImage, cfg: &PipelineConfig) -> Result<PageOutcome> {
    let mut timer = Timer::default();
    let found = timer.time("detect", || detect_text(page, &cfg.backends.text_detection))?;
    let (read, warnings) = timer.time("recognize", || read_instances(page, &found, &cfg.backends.text_recognition))?;
    let ordered = timer.time("order", || reading_order(&read));
    Ok(PageOutcome { result: PageResult::Reading(ordered), warnings, timer })
}

/// Table structure of `window` on `page`, in page coordinates.
fn table_structure(page: &PageImage, window: &Rect, backend: &Backend) -> Result<Table> {
    let crop =
        page.crop(window).ok_or_else(|| Error::InvalidInput(format!("table region {window:?} is outside the page")))?;
    let (dx, dy) = (window.x0.max(0.0).floor(), window.y0.max(0.0).floor());
    let table = match backend {
        Backend::Classical => build_grid(&detect_separators(&crop)?)?,
        Backend::External(client) => match client.infer(Task::TableStructure, &crop, Default::default())? {
            (Validated::Table(t), _) => t,
            _ => unreachable!("validated payload matches its task"),
        },
    };
    Ok(table.translate(dx, dy))
}

fn table_page(page: &PageImage, cfg: &PipelineConfig) -> Result<PageOutcome> {
    let window = match cfg.table_region {
        Some(r) if page.rect().contains_rect(&r) => r,
        Some(r) => return Err(Error::InvalidInput(format!("table region {r:?} exceeds the page"))),
        None => page.rect(),
    };
    let mut timer = Timer::default();
    let table = timer.time("table", || table_structure(page, &window, &cfg.backends.table_structure))?;
    let found = timer.time("detect", || detection::detect_in_window(page, &window, &cfg.backends.text_detection))?;
    let (read, mut warnings) =
        timer.time("recognize", || read_instances(page, &found, &cfg.backends.text_recognition))?;
    let (table, dropped) = timer.time("assign", || assign_text_to_cells(&table, &read));
    warnings.extend(dropped);
    let region = LayoutRegion::new(0, window, LayoutCategory::Table, 1.0)?;
    let instances = reading_order(&read);
    Ok(PageOutcome { result: PageResult::Table(ParsedTable { region, table, instances }), warnings, timer })
}

fn structure_page(page: &PageImage, cfg: &PipelineConfig) -> Result<PageOutcome> {
    let mut timer = Timer::default();
    let found = timer.time("detect", || detect_text(page, &cfg.backends.text_detection))?;
    let (read, mut warnings) =
        timer.time("recognize", || read_instances(page, &found, &cfg.backends.text_recognition))?;
    let (regions, layout_warnings) =
        timer.time("layout", || analyze_layout_with_text(page, &cfg.layout, &cfg.backends.layout_analysis, &read))?;
    warnings.extend(layout_warnings);

    let start = Instant::now();
    let region_quads: Vec<Quadrangle> = regions.iter().map(|r| r.bbox.to_quad()).collect();
    let mut members: Vec<Vec<TextInstance>> = vec![Vec::new(); regions.len()];
    let mut orphans = Vec::new();
    for inst in read {
        let best = region_quads
            .iter()
            .enumerate()
            .map(|(k, q)| (inst.quad.intersection_area(q), q.area(), k))
            .filter(|&(overlap, _, _)| overlap > 0.0)
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        match best {
            Some((_, _, k)) => members[k].push(inst),
            None => orphans.push(inst),
        }
    }
    timer.add("assign", start.elapsed().as_secs_f64() * 1000.0);

    let mut elements = Vec::with_capacity(regions.len() + 1);
    for (region, group) in regions.into_iter().zip(members) {
        let instances = reading_order(&group);
        if region.category != LayoutCategory::Table {
            elements.push(Element::Text { region, instances });
            continue;
        }
        match timer.time("table", || table_structure(page, &region.bbox, &cfg.backends.table_structure)) {
            Ok(table) => {
                let (table, dropped) = assign_text_to_cells(&table, &instances);
                warnings.extend(dropped.into_iter().map(|w| format!("region {}: {w}", region.id)));
                elements.push(Element::Table { region, table, instances });
            }
            Err(Error::NotATable(why)) => {
                warnings.push(format!("region {} is not a table ({why}), kept as text", region.id));
                let region = LayoutRegion { category: LayoutCategory::Text, ..region };
                elements.push(Element::Text { region, instances });
            }
            Err(e) => return Err(e),
        }
    }
    if !orphans.is_empty() {
        let bbox = orphans.iter().map(|t| t.quad.bounds()).reduce(|a, b| a.union(&b)).expect("non-empty orphans");
        let region = LayoutRegion::new(elements.len() as u32, bbox, LayoutCategory::Other, 0.0)?;
        elements.push(Element::Text { region, instances: reading_order(&orphans) });
    }
    Ok(PageOutcome { result: PageResult::Structured(StructuredDocument { elements }), warnings, timer })
}
