//! Whole-document round trips over the bundled samples: parse, re-emit,
//! re-parse to an equal document, and elaborate both.

use std::fs;
use std::path::Path;

use mtypes_cli::doc::Checked;
use mtypes_cli::emit;
use mtypes_cli::parse::parse;

fn sample(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name);
    fs::read_to_string(path).unwrap()
}

fn round_trip(text: &str) {
    let doc = parse(text).expect("sample parses");
    assert!(!doc.decls.is_empty());
    let emitted: String = doc.decls.iter().map(|d| emit::decl(d) + "\n").collect();
    let again = parse(&emitted).expect("emitted text parses");
    assert_eq!(doc, again, "emission copies the document");
    Checked::from_document(&doc).expect("sample elaborates");
    Checked::from_document(&again).expect("emitted text elaborates");
}

#[test]
fn streams_round_trips() {
    round_trip(&sample("streams.mt"));
}

#[test]
fn glueing_round_trips() {
    round_trip(&sample("glueing.mt"));
}

#[test]
fn comments_do_not_survive_emission_but_meaning_does() {
    let text = sample("streams.mt");
    assert!(text.contains("//"), "the sample carries comments");
    let doc = parse(&text).unwrap();
    let emitted: String = doc.decls.iter().map(|d| emit::decl(d) + "\n").collect();
    assert!(!emitted.contains("//"));
    assert_eq!(parse(&emitted).unwrap(), doc);
}
