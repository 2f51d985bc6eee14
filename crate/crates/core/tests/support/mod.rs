#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod lgg_oracle;

use std::path::PathBuf;

use sqlmigrate::corpus::Corpus;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus() -> Corpus {
    Corpus::load(&corpus_dir()).expect("shipped corpus loads")
}

/// Every SRC text in the corpus: demo sources, holdouts and convertible fixtures.
pub fn src_texts(corpus: &Corpus) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for case in &corpus.cases {
        for d in &case.demos {
            out.push((d.demo_id.clone(), d.source.clone()));
        }
        for h in &case.holdouts {
            out.push((
                format!("{}/holdout-{}", case.code, h.name),
                h.source.clone(),
            ));
        }
    }
    for f in &corpus.convertible {
        out.push((format!("convertible/{}", f.name), f.text.clone()));
    }
    out
}

/// Every TGT text in the corpus: demo targets and expected holdout outputs.
pub fn tgt_texts(corpus: &Corpus) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for case in &corpus.cases {
        for d in &case.demos {
            out.push((d.demo_id.clone(), d.target.clone()));
        }
        for h in &case.holdouts {
            out.push((
                format!("{}/expected-{}", case.code, h.name),
                h.expected.clone(),
            ));
        }
    }
    out
}
