use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::state::{segment_file, ConvertedBy, IoFailure, SessionState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentVerification {
    pub segment_id: String,
    pub grammatical: bool,
    pub equivalent_non_null: bool,
    pub divergences: usize,
    pub intentional_repair: Option<String>,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub checked: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub segments: Vec<SegmentVerification>,
}

/// Totals for one session. `baseline_converted + learned_converted + failed`
/// equals `total_segments`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationReport {
    pub session_id: String,
    pub total_segments: usize,
    pub baseline_converted: usize,
    pub learned_converted: usize,
    pub failed: usize,
    pub residual_count: usize,
    pub residuals_by_code: BTreeMap<String, usize>,
    pub io_failures: Vec<IoFailure>,
    pub learned_rules: Vec<String>,
    pub verification: VerificationSummary,
}

impl MigrationReport {
    pub fn from_state(state: &SessionState) -> MigrationReport {
        let mut report = MigrationReport {
            session_id: state.session_id.clone(),
            total_segments: state.segments.len(),
            baseline_converted: 0,
            learned_converted: 0,
            failed: 0,
            residual_count: state.residual_count(),
            residuals_by_code: state
                .residuals
                .iter()
                .map(|(c, v)| (c.clone(), v.len()))
                .collect(),
            io_failures: state.io_failures.clone(),
            learned_rules: state.library.learned().map(|r| r.rule_id.clone()).collect(),
            verification: VerificationSummary::default(),
        };
        for segment in &state.segments {
            let result = &state.outcomes[&segment.segment_id];
            match (&result.converted_by, result.outcome.is_converted()) {
                (ConvertedBy::Baseline, true) => report.baseline_converted += 1,
                (ConvertedBy::Learned { .. }, true) => report.learned_converted += 1,
                _ => report.failed += 1,
            }
            if !result.outcome.is_converted() {
                continue;
            }
            if let Some(v) = &result.verification {
                let summary = &mut report.verification;
                summary.checked += 1;
                if v.accepted {
                    summary.accepted += 1;
                } else {
                    summary.rejected += 1;
                }
                summary.segments.push(SegmentVerification {
                    segment_id: segment.segment_id.clone(),
                    grammatical: v.grammatical,
                    equivalent_non_null: v.equivalent_non_null,
                    divergences: v.divergences.len(),
                    intentional_repair: v.intentional_repair.clone(),
                    accepted: v.accepted,
                });
            }
        }
        report
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Text of each input file after conversion. Unconverted segments keep their
/// source, preceded by one comment line per error.
pub fn output_files(state: &SessionState) -> BTreeMap<String, String> {
    let mut files: BTreeMap<String, Vec<String>> = state
        .files
        .iter()
        .map(|f| (f.clone(), Vec::new()))
        .collect();
    for segment in &state.segments {
        let result = &state.outcomes[&segment.segment_id];
        let text = match result.outcome.converted_text() {
            Some(t) => t.to_string(),
            None => {
                let mut lines: Vec<String> = result
                    .outcome
                    .errors
                    .iter()
                    .map(|e| format!("-- [{}] {}", e.code, e.message.replace('\n', " ")))
                    .collect();
                lines.push(segment.text.clone());
                lines.join("\n")
            }
        };
        files
            .entry(segment_file(&segment.segment_id).to_string())
            .or_default()
            .push(text);
    }
    files
        .into_iter()
        .map(|(f, parts)| (f, parts.join("\n")))
        .collect()
}

/// Writes the converted tree under `out`, mirroring the input layout.
pub fn write_output(state: &SessionState, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (rel, text) in output_files(state) {
        let path = out.join(&rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Sessions saved as `<dir>/sessions/<session_id>.json`.
#[derive(Debug, Clone)]
pub struct SessionStore {
    pub dir: PathBuf,
}

impl SessionStore {
    pub const DEFAULT_DIR: &'static str = ".migrate";

    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SessionStore { dir: dir.into() }
    }

    pub fn path(&self, session_id: &str) -> PathBuf {
        self.dir.join("sessions").join(format!("{session_id}.json"))
    }

    pub fn save(&self, state: &SessionState) -> Result<PathBuf> {
        let path = self.path(&state.session_id);
        let parent = path.parent().expect("session path has a parent");
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        std::fs::write(&path, state.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(&self, session_id: &str) -> Result<SessionState> {
        let path = self.path(session_id);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        SessionState::from_json(&text)
    }
}
