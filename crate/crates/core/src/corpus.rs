//! The bundled example programs.

use crate::dsl::{parse, Program};

/// A named program source shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub file: &'static str,
    pub source: &'static str,
}

impl Entry {
    pub fn program(&self) -> Program {
        parse(self.source).unwrap_or_else(|e| panic!("bundled program {} does not parse: {e}", self.file))
    }
}

macro_rules! entries {
    ($($file:literal),* $(,)?) => {
        &[$(Entry { file: $file, source: include_str!(concat!("../../../corpus/", $file)) }),*]
    };
}

pub const ENTRIES: &[Entry] = entries![
    "benefits.dm",
    "loyalty.dm",
    "credit.dm",
    "syntactic.dm",
    "or.dm",
    "identity.dm",
    "const.dm",
    "mod2.dm",
    "mod4.dm",
    "pos.dm",
    "window.dm",
    "grade.dm",
];

/// The bundled program stored in `file`.
pub fn get(file: &str) -> Option<Program> {
    ENTRIES.iter().find(|e| e.file == file).map(Entry::program)
}

/// Every bundled program, in a fixed order.
pub fn all() -> Vec<Program> {
    ENTRIES.iter().map(Entry::program).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::evaluate;
    use crate::value::{Valuation, Value};

    #[test]
    fn all_parse_with_distinct_names() {
        let ps = all();
        let mut names: Vec<&str> = ps.iter().map(|p| p.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), ENTRIES.len());
    }

    #[test]
    fn known_outputs() {
        let v = |p: &str, pairs: &[(&str, i64)]| {
            let vals = pairs.iter().fold(Valuation::new(), |acc, (n, x)| acc.with(*n, *x));
            evaluate(&get(p).unwrap(), &vals).unwrap()
        };
        assert_eq!(v("benefits.dm", &[("salary", 8000)]), Value::Bool(true));
        assert_eq!(v("credit.dm", &[("incidents", 0), ("tax", 3)]), Value::Int(2));
        assert_eq!(v("credit.dm", &[("incidents", 2), ("tax", 1)]), Value::Int(0));
        assert_eq!(v("loyalty.dm", &[("flights", 15)]), Value::Int(5));
        assert_eq!(v("loyalty.dm", &[("flights", 22)]), Value::Int(22 * 3));
        assert_eq!(v("loyalty.dm", &[("flights", 27)]), Value::Int(150));
        assert_eq!(v("loyalty.dm", &[("flights", 35)]), Value::Int(500));
    }
}
