//! Declarative dialect profiles.
//!
//! A profile lists the variant points in which two SQL dialects differ: how
//! declarations carry initializers, how strings are concatenated, which
//! functions exist under which names, and so on. The parser, printer, baseline
//! rules and evaluator all read these profiles instead of hard-coding dialect
//! behavior.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SRC_JSON: &str = include_str!("../../../profiles/src.json");
const TGT_JSON: &str = include_str!("../../../profiles/tgt.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclareInitializer {
    /// `DECLARE x T = e`
    EqualsSign,
    /// `DECLARE x T DEFAULT e`
    DefaultKeyword,
}

impl DeclareInitializer {
    /// Token stored on `DeclareStmt` nodes that carry an initializer.
    pub fn token(self) -> &'static str {
        match self {
            DeclareInitializer::EqualsSign => "=",
            DeclareInitializer::DefaultKeyword => "DEFAULT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StringConcat {
    PlusOperator,
    ConcatFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StringQuote {
    Double,
    Single,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentifierQuote {
    Brackets,
    Backticks,
    DoubleQuotes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowLimit {
    /// `SELECT TOP n ...`
    TopPrefix,
    /// `SELECT ... LIMIT n`
    LimitSuffix,
}

impl RowLimit {
    /// Token stored on `LimitClause` nodes.
    pub fn token(self) -> &'static str {
        match self {
            RowLimit::TopPrefix => "TOP",
            RowLimit::LimitSuffix => "LIMIT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullConcat {
    PropagateNull,
    TreatAsEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    Exact(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exact(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "{k}+"),
        }
    }
}

/// Static type classes used by guards, detectors and value generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TypeClass {
    String,
    Number,
    Date,
    Bool,
}

impl TypeClass {
    /// Classifies a type name such as `VARCHAR(20)` or `DECIMAL(10,2) NOT NULL`.
    pub fn of_type_name(type_name: &str) -> Option<TypeClass> {
        let base: String = type_name
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect::<String>()
            .to_ascii_uppercase();
        match base.as_str() {
            "VARCHAR" | "NVARCHAR" | "CHAR" | "NCHAR" | "TEXT" | "NTEXT" => Some(TypeClass::String),
            "INT" | "INTEGER" | "BIGINT" | "SMALLINT" | "TINYINT" | "DECIMAL" | "NUMERIC"
            | "FLOAT" | "REAL" | "MONEY" | "BIT" => Some(TypeClass::Number),
            "DATE" | "DATETIME" | "DATETIME2" | "TIMESTAMP" => Some(TypeClass::Date),
            "BOOLEAN" | "BOOL" => Some(TypeClass::Bool),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeClass::String => "STRING",
            TypeClass::Number => "NUMBER",
            TypeClass::Date => "DATE",
            TypeClass::Bool => "BOOL",
        }
    }

    pub fn from_name(name: &str) -> Option<TypeClass> {
        match name.to_ascii_uppercase().as_str() {
            "STRING" => Some(TypeClass::String),
            "NUMBER" => Some(TypeClass::Number),
            "DATE" => Some(TypeClass::Date),
            "BOOL" => Some(TypeClass::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for TypeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub arity: Arity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<TypeClass>,
    /// The first argument is a type name (`CONVERT(VARCHAR(10), x)`).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub type_arg: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedFunction {
    pub name: String,
    pub arity: Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialectProfile {
    pub name: String,
    pub declare_initializer: DeclareInitializer,
    pub string_concat: StringConcat,
    pub null_coalesce_fn: NamedFunction,
    pub string_quote: StringQuote,
    pub identifier_quote: IdentifierQuote,
    pub row_limit: RowLimit,
    /// Canonical function name to this dialect's spelling.
    pub function_catalog: BTreeMap<String, FunctionSpec>,
    pub null_concat_semantics: NullConcat,
}

impl DialectProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let profile: DialectProfile = serde_json::from_str(text)?;
        profile.check()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The T-SQL-flavored source dialect.
    pub fn src() -> &'static DialectProfile {
        static SRC: OnceLock<DialectProfile> = OnceLock::new();
        SRC.get_or_init(|| DialectProfile::from_json(SRC_JSON).expect("embedded SRC profile"))
    }

    /// The MySQL-flavored target dialect.
    pub fn tgt() -> &'static DialectProfile {
        static TGT: OnceLock<DialectProfile> = OnceLock::new();
        TGT.get_or_init(|| DialectProfile::from_json(TGT_JSON).expect("embedded TGT profile"))
    }

    fn check(&self) -> Result<()> {
        let coalesce = &self.null_coalesce_fn;
        let listed = self
            .function_catalog
            .values()
            .any(|f| f.name.eq_ignore_ascii_case(&coalesce.name) && f.arity == coalesce.arity);
        if !listed {
            return Err(Error::Profile(format!(
                "{}: null_coalesce_fn {}/{} missing from function_catalog",
                self.name, coalesce.name, coalesce.arity
            )));
        }
        Ok(())
    }

    /// Looks a function up by its dialect spelling.
    pub fn function_by_name(&self, name: &str) -> Option<(&str, &FunctionSpec)> {
        self.function_catalog
            .iter()
            .find(|(_, f)| f.name.eq_ignore_ascii_case(name))
            .map(|(canonical, f)| (canonical.as_str(), f))
    }

    pub fn function(&self, canonical: &str) -> Option<&FunctionSpec> {
        self.function_catalog.get(canonical)
    }

    pub fn accepts_single_quoted_strings(&self) -> bool {
        matches!(self.string_quote, StringQuote::Single | StringQuote::Both)
    }

    pub fn preferred_string_quote(&self) -> char {
        match self.string_quote {
            StringQuote::Single => '\'',
            StringQuote::Double | StringQuote::Both => '"',
        }
    }
}


/// The source and target profiles of one migration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialectPair {
    pub src: DialectProfile,
    pub tgt: DialectProfile,
}

impl DialectPair {
    pub fn new(src: DialectProfile, tgt: DialectProfile) -> Self {
        DialectPair { src, tgt }
    }

    pub fn builtin() -> Self {
        DialectPair::new(DialectProfile::src().clone(), DialectProfile::tgt().clone())
    }

    /// Shared instance of [`DialectPair::builtin`].
    pub fn builtin_ref() -> &'static DialectPair {
        static PAIR: OnceLock<DialectPair> = OnceLock::new();
        PAIR.get_or_init(DialectPair::builtin)
    }

    /// Resolves a function spelling from either dialect; source spellings win.
    /// Trees in the middle of conversion mix both.
    pub fn canonical(&self, name: &str) -> Option<(&str, &FunctionSpec)> {
        self.src
            .function_by_name(name)
            .or_else(|| self.tgt.function_by_name(name))
    }
}
