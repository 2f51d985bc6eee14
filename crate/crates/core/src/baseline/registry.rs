use serde::Serialize;

/// How guards are attached to rules learned for a gap class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardRecipe {
    None,
    /// `is_nullable` on every hole bound to a nullable value in all demos.
    NullableHoles,
    /// `is_nullable` on nullable identifier holes, negated on NOT NULL ones.
    MixedNullability,
    /// `has_type DATE` on every hole bound to a date value in all demos.
    DateHoles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapClass {
    pub code: &'static str,
    pub name: &'static str,
    pub description: &'static str,
    /// `{expr}` is replaced by the offending source text.
    pub message: &'static str,
    pub recipe: GuardRecipe,
    /// Fixes for this class may change results when inputs are NULL.
    pub intentional_repair: bool,
}

impl GapClass {
    pub fn message_for(&self, expr: &str) -> String {
        self.message.replace("{expr}", expr)
    }
}

/// Pseudo-code for segments that fail to parse or print.
pub const PARSE_FAILURE: &str = "E000";

pub const REGISTRY: [GapClass; 11] = [
    GapClass {
        code: "E001",
        name: "null-string-concatenation",
        description: "`+` concatenation of a nullable value with a string",
        message:
            "String concatenation between NULL and NOT NULL values makes the whole string AS NULL",
        recipe: GuardRecipe::NullableHoles,
        intentional_repair: true,
    },
    GapClass {
        code: "E002",
        name: "nullable-concat-chain",
        description: "chain of three or more `+` concatenations with a nullable operand",
        message: "Concatenation chain `{expr}` mixes NULL and NOT NULL operands",
        recipe: GuardRecipe::MixedNullability,
        intentional_repair: true,
    },
    GapClass {
        code: "E003",
        name: "variadic-coalesce",
        description: "COALESCE with more than two arguments",
        message: "COALESCE with more than two arguments has no target equivalent: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E004",
        name: "iif-expression",
        description: "IIF(condition, then, else)",
        message: "IIF has no target equivalent: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E005",
        name: "convert-call",
        description: "CONVERT(type, expression)",
        message: "CONVERT cannot be translated: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E006",
        name: "date-arithmetic",
        description: "date `+` number",
        message: "Date arithmetic cannot be translated: `{expr}`",
        recipe: GuardRecipe::DateHoles,
        intentional_repair: false,
    },
    GapClass {
        code: "E007",
        name: "nested-getdate",
        description: "GETDATE() inside a comparison, CASE or function argument",
        message: "GETDATE inside a complex expression cannot be translated: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E008",
        name: "top-expression",
        description: "TOP with a non-constant row count",
        message: "TOP with a non-constant row count cannot be translated: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E009",
        name: "qualified-name",
        description: "schema-qualified column reference",
        message: "Qualified name cannot be translated: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E010",
        name: "numeric-string-concatenation",
        description: "`+` between a string and a number",
        message: "Implicit number to string conversion in concatenation: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
    GapClass {
        code: "E011",
        name: "boolean-literal-comparison",
        description: "comparison with TRUE or FALSE",
        message: "Comparison with a boolean literal cannot be translated: `{expr}`",
        recipe: GuardRecipe::None,
        intentional_repair: false,
    },
];

pub fn gap_class(code: &str) -> Option<&'static GapClass> {
    REGISTRY.iter().find(|g| g.code == code)
}

/// Registered gap classes in order, as (code, name).
pub fn gap_list() -> Vec<(&'static str, &'static str)> {
    REGISTRY.iter().map(|g| (g.code, g.name)).collect()
}

pub fn is_intentional_repair(code: &str) -> bool {
    gap_class(code).is_some_and(|g| g.intentional_repair)
}
