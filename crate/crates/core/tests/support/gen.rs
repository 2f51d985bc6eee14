//! Random SRC scripts for fuzzing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: &[&str] = &["VARCHAR(20)", "INT", "DECIMAL(10,2)", "DATE"];
const COLUMNS: &[&str] = &["a", "b", "c", "name"];
const WORDS: &[&str] = &["x", "hello", "", "a b", "-"];

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<String>,
}

impl Gen {
    fn literal(&mut self) -> String {
        match self.rng.gen_range(0..5) {
            0 => self.rng.gen_range(0..100).to_string(),
            1 => format!(
                "{}.{}",
                self.rng.gen_range(0..10),
                self.rng.gen_range(0..100)
            ),
            2 => format!("\"{}\"", WORDS.choose(&mut self.rng).unwrap()),
            3 => format!("'{}'", WORDS.choose(&mut self.rng).unwrap()),
            _ => "NULL".to_string(),
        }
    }

    fn leaf(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 if !self.vars.is_empty() => self.vars.choose(&mut self.rng).unwrap().clone(),
            2 => COLUMNS.choose(&mut self.rng).unwrap().to_string(),
            3 => ["TRUE", "FALSE"].choose(&mut self.rng).unwrap().to_string(),
            _ => self.literal(),
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..14) {
            0..=3 => {
                let op = ["+", "+", "-", "*", "/", "||"]
                    .choose(&mut self.rng)
                    .unwrap();
                format!("{} {op} {}", self.expr(d), self.expr(d))
            }
            4 => {
                let op = ["=", "<>", "<", ">=", "!="].choose(&mut self.rng).unwrap();
                format!("({} {op} {})", self.expr(d), self.expr(d))
            }
            5 => format!("({})", self.expr(d)),
            6 => {
                let f = ["UPPER", "LOWER", "LEN", "ABS"]
                    .choose(&mut self.rng)
                    .unwrap();
                format!("{f}({})", self.expr(d))
            }
            7 => format!("ISNULL({}, {})", self.expr(d), self.expr(d)),
            8 => {
                let n = self.rng.gen_range(2..=4);
                let args: Vec<String> = (0..n).map(|_| self.expr(d)).collect();
                format!("COALESCE({})", args.join(", "))
            }
            9 => format!("IIF({}, {}, {})", self.expr(d), self.expr(d), self.expr(d)),
            10 => {
                let arms = self.rng.gen_range(1..=2);
                let mut s = "CASE".to_string();
                for _ in 0..arms {
                    s += &format!(" WHEN {} THEN {}", self.expr(d), self.expr(d));
                }
                if self.rng.gen_bool(0.5) {
                    s += &format!(" ELSE {}", self.expr(d));
                }
                s + " END"
            }
            11 => format!(
                "CAST({} AS {})",
                self.expr(d),
                TYPES.choose(&mut self.rng).unwrap()
            ),
            12 => match self.rng.gen_range(0..4) {
                0 => "GETDATE()".to_string(),
                1 => format!("ROUND({}, {})", self.expr(d), self.rng.gen_range(0..3)),
                2 => format!("CONVERT(VARCHAR(10), {})", self.expr(d)),
                _ => format!("t.{}", COLUMNS.choose(&mut self.rng).unwrap()),
            },
            _ => self.leaf(),
        }
    }

    fn declare(&mut self) -> String {
        let name = format!("v{}", self.vars.len() + 1);
        let ty = *TYPES.choose(&mut self.rng).unwrap();
        let not_null = self.rng.gen_bool(0.3);
        let init = match (not_null, ty) {
            (false, _) if self.rng.gen_bool(0.5) => "NULL".to_string(),
            (_, "VARCHAR(20)") => format!("\"{}\"", WORDS.choose(&mut self.rng).unwrap()),
            (_, "DATE") => self.rng.gen_range(0..400).to_string(),
            _ => self.rng.gen_range(0..50).to_string(),
        };
        self.vars.push(name.clone());
        let nn = if not_null { " NOT NULL" } else { "" };
        if self.rng.gen_bool(0.2) && !not_null {
            return format!("DECLARE {name} {ty}");
        }
        format!("DECLARE {name} {ty}{nn} = {init}")
    }

    fn select(&mut self, depth: u32) -> String {
        let mut s = "SELECT".to_string();
        match self.rng.gen_range(0..6) {
            0 => s += &format!(" TOP {}", self.rng.gen_range(1..20)),
            1 => s += &format!(" TOP ({})", self.expr(1)),
            _ => {}
        }
        let n = self.rng.gen_range(1..=3);
        let items: Vec<String> = (0..n)
            .map(|i| {
                let e = self.expr(depth);
                if self.rng.gen_bool(0.4) {
                    format!("{e} AS col{i}")
                } else {
                    e
                }
            })
            .collect();
        s += &format!(" {}", items.join(", "));
        if self.rng.gen_bool(0.6) {
            s += " FROM t";
        }
        s
    }
}

/// A script of a few declarations and selects, reproducible from `seed`.
pub fn script(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        vars: Vec::new(),
    };
    let mut stmts = Vec::new();
    for _ in 0..g.rng.gen_range(1..=3) {
        for _ in 0..g.rng.gen_range(0..=2) {
            stmts.push(g.declare());
        }
        let depth = g.rng.gen_range(1..=4);
        stmts.push(g.select(depth));
    }
    stmts.join("\n")
}
