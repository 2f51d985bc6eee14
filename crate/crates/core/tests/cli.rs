use std::path::Path;
use std::process::{Command, Output};

const SOURCE: &str = "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2\n";
const TARGET: &str =
    "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2";

fn migrate(state: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_migrate"))
        .arg("--state-dir")
        .arg(state)
        .args(args)
        .output()
        .expect("migrate runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn session_id(stdout: &[u8]) -> String {
    let text = String::from_utf8_lossy(stdout);
    text.lines()
        .find_map(|l| l.strip_prefix("session "))
        .map(|rest| rest.split_whitespace().next().unwrap().to_string())
        .expect("session id printed")
}

#[test]
fn run_teach_run() {
    let work = tempfile::tempdir().unwrap();
    let (input, out, state) = (
        work.path().join("in"),
        work.path().join("out"),
        work.path().join("state"),
    );
    std::fs::create_dir_all(&input).unwrap();
    std::fs::write(input.join("null-concat.sql"), SOURCE).unwrap();
    let target = work.path().join("fix.sql");
    std::fs::write(&target, TARGET).unwrap();
    let rules = work.path().join("rules.json");
    let report = work.path().join("report.json");

    let first = migrate(
        &state,
        &[
            "run",
            "--in",
            s(&input),
            "--out",
            s(&out),
            "--rules",
            s(&rules),
            "--report",
            s(&report),
        ],
    );
    assert_eq!(first.status.code(), Some(1));
    let written = std::fs::read_to_string(out.join("null-concat.sql")).unwrap();
    assert!(written.starts_with("-- [E001] String concatenation"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["residuals_by_code"]["E001"], 1);

    let id = session_id(&first.stdout);
    let bad = work.path().join("bad.sql");
    std::fs::write(&bad, "SELECT var1 + \"x\"").unwrap();
    let rejected = migrate(
        &state,
        &[
            "teach",
            "--session",
            &id,
            "--error",
            "E001",
            "--target",
            s(&bad),
        ],
    );
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("target does not parse"));

    let taught = migrate(
        &state,
        &[
            "teach",
            "--session",
            &id,
            "--error",
            "E001",
            "--target",
            s(&target),
            "--accept",
            "--rules",
            s(&rules),
        ],
    );
    assert!(
        taught.status.success(),
        "{}",
        String::from_utf8_lossy(&taught.stderr)
    );
    let preview: serde_json::Value = {
        let text = String::from_utf8_lossy(&taught.stdout);
        let end = text.rfind("\n}").unwrap() + 2;
        serde_json::from_str(&text[..end]).unwrap()
    };
    assert_eq!(preview["sites"].as_array().unwrap().len(), 1);
    assert_eq!(preview["sites"][0]["verification"]["accepted"], true);

    let out2 = work.path().join("out2");
    let second = migrate(
        &state,
        &[
            "run",
            "--in",
            s(&input),
            "--out",
            s(&out2),
            "--rules",
            s(&rules),
        ],
    );
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(out2.join("null-concat.sql")).unwrap(),
        TARGET
    );
}

#[test]
fn empty_input_is_an_error() {
    let work = tempfile::tempdir().unwrap();
    let out = migrate(
        &work.path().join("state"),
        &[
            "run",
            "--in",
            s(work.path()),
            "--out",
            s(&work.path().join("o")),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no .sql files"));
}

#[test]
fn eval_reports_the_corpus_table() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let work = tempfile::tempdir().unwrap();
    let out = migrate(work.path(), &["eval", "--corpus", s(&corpus)]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("resolved 9/11"), "{text}");
    assert!(text.contains("regressions 0"));
}
