//! A whole migration in memory: run a directory, teach one fix, accept it, and
//! write the converted tree.

use sqlmigrate::baseline::Converter;
use sqlmigrate::engine::RuleLibrary;
use sqlmigrate::session::{run_migration, write_output, MigrationReport};
use sqlmigrate::verify::VerifyConfig;

fn main() -> sqlmigrate::Result<()> {
    let work = std::env::temp_dir().join(format!("sqlmigrate-teach-{}", std::process::id()));
    let input = work.join("in");
    std::fs::create_dir_all(input.join("reports")).map_err(|e| sqlmigrate::Error::io(&input, e))?;
    let files = [
        ("users.sql", "DECLARE nick VARCHAR(20) = NULL\nSELECT nick + \" (guest)\" AS label\nSELECT LEN(name) FROM users\n"),
        ("reports/daily.sql", "DECLARE title VARCHAR(40) = NULL\nSELECT title + \":\" AS heading FROM reports\n"),
    ];
    for (name, text) in files {
        let path = input.join(name);
        std::fs::write(&path, text).map_err(|e| sqlmigrate::Error::io(&path, e))?;
    }

    let conv = Converter::shared();
    let mut state = run_migration(conv, &input, RuleLibrary::new(), VerifyConfig::default())?;
    println!(
        "{}",
        serde_json::to_string(&MigrationReport::from_state(&state).residuals_by_code)?
    );

    let fix = "DECLARE nick VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(nick, \"\"), \" (guest)\") AS label";
    let preview = state.submit_demonstration(conv, "E001", fix, None)?;
    println!("{} at version {}", preview.summary, preview.version);
    for site in &preview.sites {
        let accepted = site.verification.as_ref().is_some_and(|v| v.accepted);
        println!(
            "  {} -> {:?} accepted={accepted}",
            site.segment_id, site.converted
        );
    }

    state.accept_rule(conv, &preview)?;
    let report = MigrationReport::from_state(&state);
    println!(
        "baseline {} learned {} failed {}",
        report.baseline_converted, report.learned_converted, report.failed
    );
    for path in write_output(&state, &work.join("out"))? {
        println!("wrote {}", path.display());
    }
    std::fs::remove_dir_all(&work).ok();
    Ok(())
}
