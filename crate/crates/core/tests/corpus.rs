mod support;

use sqlmigrate::ast::SqlSegment;
use sqlmigrate::baseline::{gap_list, Converter};
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::parser::parse;
use sqlmigrate::printer::print;
use sqlmigrate::verify::verify;

fn codes_of(text: &str) -> Vec<String> {
    let seg = SqlSegment::parse("c", text, DialectProfile::src())
        .unwrap_or_else(|e| panic!("{e}\n{text}"));
    Converter::shared()
        .convert(&seg, &[])
        .outcome
        .errors
        .into_iter()
        .map(|e| e.code)
        .collect()
}

#[test]
fn one_case_per_gap_class_with_at_most_two_demos() {
    let corpus = support::corpus();
    let codes: Vec<&str> = corpus.cases.iter().map(|c| c.code.as_str()).collect();
    let registry: Vec<&str> = gap_list().into_iter().map(|(c, _)| c).collect();
    assert_eq!(codes, registry);
    for case in &corpus.cases {
        assert!((1..=2).contains(&case.demos.len()), "{}", case.code);
        assert_eq!(case.holdouts.len(), 3, "{}", case.code);
    }
}

#[test]
fn demos_and_holdouts_fail_with_exactly_their_code() {
    for case in &support::corpus().cases {
        let sources = case
            .demos
            .iter()
            .map(|d| &d.source)
            .chain(case.holdouts.iter().map(|h| &h.source));
        for text in sources {
            let codes = codes_of(text);
            assert!(
                !codes.is_empty() && codes.iter().all(|c| c == &case.code),
                "{}: {codes:?}\n{text}",
                case.code
            );
        }
    }
}

#[test]
fn expert_targets_are_canonical_and_verified() {
    let tgt = DialectProfile::tgt();
    for case in &support::corpus().cases {
        let pairs = case
            .demos
            .iter()
            .map(|d| (&d.source, &d.target))
            .chain(case.holdouts.iter().map(|h| (&h.source, &h.expected)));
        for (source, target) in pairs {
            let target = target.trim_end();
            let ast = parse(target, tgt).unwrap_or_else(|e| panic!("{}: {e}", case.code));
            assert_eq!(print(&ast, tgt).unwrap(), target, "{}", case.code);
            let seg = SqlSegment::parse("c", source, DialectProfile::src()).unwrap();
            let report = verify(&seg, target, Some(&case.code));
            assert!(
                report.accepted,
                "{}: {target}\n{:?}",
                case.code,
                report.divergences.first()
            );
        }
    }
}

#[test]
fn convertible_fixtures_convert_and_reparse() {
    for f in &support::corpus().convertible {
        for seg in support::checks::segments(&f.name, &f.text) {
            let out = Converter::shared().convert(&seg, &[]).outcome;
            let text = out
                .converted_text()
                .unwrap_or_else(|| panic!("{}: {:?}", seg.segment_id, out.errors));
            assert!(parse(text, DialectProfile::tgt()).is_ok(), "{text}");
            assert!(verify(&seg, text, None).accepted, "{}", seg.segment_id);
        }
    }
}

#[test]
fn the_first_null_concat_demo_is_the_canonical_case() {
    let corpus = support::corpus();
    let demo = &corpus.cases[0].demos[0];
    assert_eq!(demo.error_code, "E001");
    assert_eq!(
        demo.source.trim_end(),
        "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2"
    );
    assert_eq!(
        demo.target.trim_end(),
        "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2"
    );
}
