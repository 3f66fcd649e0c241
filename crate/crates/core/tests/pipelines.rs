mod common;

use docxchain::bridge::{Backend, Backends, MockFixture, MockServer, Task};
use docxchain::detection::detect_text;
use docxchain::pipeline::{PageResult, document_structurization, general_text_reading, reading_order, table_parsing};
use docxchain::recognition::read_instances;
use docxchain::synth::{BlockContent, BlockSpec, PageSpec, SpecCell, TableSpec, generate_page};
use docxchain::{Document, Element, LayoutCategory, Rect};
use proptest::prelude::*;
use serde_json::json;

fn cell(r: (usize, usize), c: (usize, usize), text: &str) -> SpecCell {
    SpecCell { row_start: r.0, row_end: r.1, col_start: c.0, col_end: c.1, text: text.into() }
}

/// 4x3 product sheet with a header spanning all columns.
fn product_table() -> TableSpec {
    TableSpec {
        col_widths: vec![200, 160, 160],
        row_heights: vec![36; 4],
        cells: vec![
            cell((0, 1), (0, 3), "Model X200 specifications"),
            cell((1, 2), (0, 1), "Weight"),
            cell((1, 2), (1, 2), "1.2 kg"),
            cell((1, 2), (2, 3), "1.4 kg"),
            cell((2, 3), (0, 1), "Battery"),
            cell((2, 3), (1, 2), "10 h"),
            cell((2, 3), (2, 3), "12 h"),
            cell((3, 4), (0, 1), "Price"),
            cell((3, 4), (1, 2), "$499"),
            cell((3, 4), (2, 3), "$649"),
        ],
        scale: 1,
    }
}

fn spec(width: u32, height: u32, blocks: Vec<BlockSpec>) -> PageSpec {
    PageSpec { seed: 0, width, height, blocks, noise: 0.0 }
}

fn block(x: u32, y: u32, content: BlockContent) -> BlockSpec {
    BlockSpec { x, y, content }
}

fn paragraph(lines: &[&str]) -> BlockContent {
    BlockContent::Paragraph { lines: lines.iter().map(|s| s.to_string()).collect(), scale: 1 }
}

fn doc_of(spec: &PageSpec) -> (Document, docxchain::synth::GroundTruth) {
    let (page, truth) = generate_page(spec).unwrap();
    (Document::new("synth", vec![page]).unwrap(), truth)
}

fn structured(doc: &Document, backends: &Backends) -> (Vec<Element>, Vec<String>) {
    let r = document_structurization(doc, backends).unwrap();
    match &r.pages[0].result {
        PageResult::Structured(d) => (d.elements.clone(), r.warnings.clone()),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn product_table_matches_truth() {
    let (doc, truth) = doc_of(&spec(800, 400, vec![block(50, 50, BlockContent::Table(product_table()))]));
    let r = table_parsing(&doc, &Backends::classical(), None).unwrap();
    let PageResult::Table(parsed) = &r.pages[0].result else { panic!() };
    let t = &truth.tables[0];
    assert_eq!((parsed.table.n_rows(), parsed.table.n_cols()), (t.n_rows, t.n_cols));
    let got: Vec<_> = parsed
        .table
        .cells()
        .iter()
        .map(|c| (c.row_start, c.row_end, c.col_start, c.col_end, c.text().to_string()))
        .collect();
    let want: Vec<_> =
        t.cells.iter().map(|c| (c.row_start, c.row_end, c.col_start, c.col_end, c.text.clone())).collect();
    assert_eq!(got, want);
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
}

#[test]
fn region_equals_manual_crop() {
    let blocks = vec![
        block(150, 200, paragraph(&["Quarterly figures follow below.", "All values are rounded."])),
        block(150, 320, BlockContent::Table(product_table())),
        block(150, 560, paragraph(&["Prices exclude tax."])),
    ];
    let (doc, truth) = doc_of(&spec(1000, 800, blocks));
    let table_box = truth.regions[1].bbox;
    let window = Rect::new(table_box.x0 - 10.0, table_box.y0 - 10.0, table_box.x1 + 10.0, table_box.y1 + 10.0).unwrap();

    let in_place = table_parsing(&doc, &Backends::classical(), Some(window)).unwrap();
    let crop = Document::new("crop", vec![doc.pages()[0].crop(&window).unwrap()]).unwrap();
    let cropped = table_parsing(&crop, &Backends::classical(), None).unwrap();

    let (PageResult::Table(a), PageResult::Table(b)) = (&in_place.pages[0].result, &cropped.pages[0].result) else {
        panic!()
    };
    assert_eq!(a.table, b.table.translate(window.x0, window.y0));
    assert_eq!(a.instances.len(), b.instances.len());
    for (x, y) in a.instances.iter().zip(&b.instances) {
        assert_eq!(x.text(), y.text());
        assert_eq!(x.quad, y.quad.translate(window.x0, window.y0));
    }
}

#[test]
fn title_paragraphs_table_in_order() {
    let blocks = vec![
        block(150, 200, BlockContent::Title { text: "ANNUAL REVIEW".into(), scale: 2 }),
        block(150, 300, paragraph(&["Revenue grew in all regions.", "Costs stayed flat."])),
        block(150, 420, paragraph(&["The board approved the budget.", "Hiring resumes in spring."])),
        block(150, 540, BlockContent::Table(product_table())),
    ];
    let (doc, truth) = doc_of(&spec(1700, 2200, blocks));
    let (elements, warnings) = structured(&doc, &Backends::classical());
    assert!(warnings.is_empty(), "{warnings:?}");
    let cats: Vec<_> = elements.iter().map(|e| e.region().category).collect();
    assert_eq!(cats, [LayoutCategory::Title, LayoutCategory::Text, LayoutCategory::Text, LayoutCategory::Table]);
    let Element::Table { table, .. } = &elements[3] else { panic!("last element is a parsed table") };
    let texts: Vec<_> = table.cells().iter().map(|c| c.text().to_string()).collect();
    let want: Vec<_> = truth.tables[0].cells.iter().map(|c| c.text.clone()).collect();
    assert_eq!(texts, want);
}

#[test]
fn blank_page_has_no_elements() {
    let (doc, _) = doc_of(&spec(600, 400, vec![]));
    assert!(structured(&doc, &Backends::classical()).0.is_empty());
}

fn layout_backend(regions: serde_json::Value) -> (MockServer, Backends) {
    let server = MockServer::start(
        MockFixture::default().with(Task::LayoutAnalysis, json!({"status": "ok", "result": {"regions": regions}})),
    )
    .unwrap();
    let backends = Backends { layout_analysis: Backend::external(server.endpoint(), 5_000), ..Backends::classical() };
    (server, backends)
}

#[test]
fn uncovered_instance_goes_to_trailing_other() {
    let blocks = vec![
        block(60, 60, paragraph(&["First covered line.", "Second covered line."])),
        block(60, 200, paragraph(&["Stray line."])),
    ];
    let (doc, _) = doc_of(&spec(600, 300, blocks));
    let (_server, backends) =
        layout_backend(json!([{"bbox": [40, 40, 500, 120], "category": "text", "confidence": 0.8}]));
    let (elements, _) = structured(&doc, &backends);
    assert_eq!(elements.len(), 2);
    assert_eq!(elements[0].instances().len(), 2);
    let last = &elements[1];
    assert_eq!(last.region().category, LayoutCategory::Other);
    assert_eq!(last.instances().len(), 1);
    assert_eq!(last.instances()[0].text(), Some("Stray line."));
}

#[test]
fn table_region_without_rulings_degrades_to_text() {
    let (doc, _) = doc_of(&spec(600, 300, vec![block(60, 60, paragraph(&["Not a table at all.", "Just words."]))]));
    let (_server, backends) =
        layout_backend(json!([{"bbox": [40, 40, 500, 120], "category": "table", "confidence": 0.8}]));
    let (elements, warnings) = structured(&doc, &backends);
    assert_eq!(elements.len(), 1);
    assert!(matches!(elements[0], Element::Text { .. }));
    assert_eq!(elements[0].region().category, LayoutCategory::Text);
    assert_eq!(elements[0].instances().len(), 2);
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("not a table"), "{warnings:?}");
}

#[test]
fn reading_matches_detect_then_read_on_fixture() {
    let doc = docxchain::loader::load_document(common::fixture("doc.png"), &Default::default()).unwrap();
    let page = &doc.pages()[0];
    let b = Backends::classical();
    let (read, _) = read_instances(page, &detect_text(page, &b.text_detection).unwrap(), &b.text_recognition).unwrap();
    let r = general_text_reading(&doc, &b).unwrap();
    assert_eq!(r.pages[0].result, PageResult::Reading(reading_order(&read)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn structurization_conserves_instances(seed in 0u64..10_000) {
        let spec = docxchain::synth::random_page_spec(seed, docxchain::synth::Mix::ALL);
        let (doc, _) = doc_of(&spec);
        let detected = detect_text(&doc.pages()[0], &Backend::Classical).unwrap().len();
        let (elements, _) = structured(&doc, &Backends::classical());
        let total: usize = elements.iter().map(|e| e.instances().len()).sum();
        prop_assert_eq!(total, detected);
        let ids: Vec<u32> = elements.iter().map(|e| e.region().id).collect();
        prop_assert_eq!(ids, (0..elements.len() as u32).collect::<Vec<_>>());
    }
}
