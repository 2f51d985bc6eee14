use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pattern::{TransformRule, LEARNED_PRIORITY};
use crate::error::{Error, Result};

/// Ordered rule set, stored on disk as `{"rules": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleLibrary {
    pub rules: Vec<TransformRule>,
}

impl RuleLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Missing file reads as an empty library.
    pub fn load_or_empty(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lib: RuleLibrary = serde_json::from_str(text)?;
        for r in &lib.rules {
            r.check().map_err(Error::Invalid)?;
        }
        Ok(lib)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn get(&self, rule_id: &str) -> Option<&TransformRule> {
        self.rules.iter().find(|r| r.rule_id == rule_id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Next free learned priority.
    pub fn next_learned_priority(&self) -> i64 {
        self.rules
            .iter()
            .filter(|r| r.is_learned())
            .map(|r| r.priority + 1)
            .max()
            .unwrap_or(LEARNED_PRIORITY)
    }

    /// Adds `rule`, replacing any rule with the same id.
    pub fn insert(&mut self, rule: TransformRule) {
        self.rules.retain(|r| r.rule_id != rule.rule_id);
        self.rules.push(rule);
        self.rules.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    pub fn remove(&mut self, rule_id: &str) -> Option<TransformRule> {
        let i = self.rules.iter().position(|r| r.rule_id == rule_id)?;
        Some(self.rules.remove(i))
    }

    pub fn learned(&self) -> impl Iterator<Item = &TransformRule> {
        self.rules.iter().filter(|r| r.is_learned())
    }
}
