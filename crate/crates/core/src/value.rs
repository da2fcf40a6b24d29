//! Scalar values, bounded domains and valuations shared by every layer.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Scalar types of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
        }
    }
}

/// A concrete scalar value.
///
/// Booleans are ordered `false < true`. Internally every value also has an
/// integer *ordinal* (`false = 0`, `true = 1`) which the solver and the
/// enumeration code use as a uniform encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn ty(self) -> Type {
        match self {
            Value::Bool(_) => Type::Bool,
            Value::Int(_) => Type::Int,
        }
    }

    pub fn ordinal(self) -> i64 {
        match self {
            Value::Bool(b) => b as i64,
            Value::Int(n) => n,
        }
    }

    pub fn from_ordinal(ty: Type, ordinal: i64) -> Value {
        match ty {
            Type::Bool => Value::Bool(ordinal != 0),
            Type::Int => Value::Int(ordinal),
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    /// Values of the same type compare naturally; across types booleans sort
    /// first. Cross-type comparisons never arise for well-typed programs.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Bool(_), Value::Int(_)) => Ordering::Less,
            (Value::Int(_), Value::Bool(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// A finite input domain: an inclusive integer range or the booleans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Int { lo: i64, hi: i64 },
    Bool,
}

impl Domain {
    pub fn int(lo: i64, hi: i64) -> Domain {
        debug_assert!(lo <= hi, "empty domain [{lo}..{hi}]");
        Domain::Int { lo, hi }
    }

    pub fn ty(self) -> Type {
        match self {
            Domain::Int { .. } => Type::Int,
            Domain::Bool => Type::Bool,
        }
    }

    /// Inclusive ordinal bounds.
    pub fn bounds(self) -> (i64, i64) {
        match self {
            Domain::Int { lo, hi } => (lo, hi),
            Domain::Bool => (0, 1),
        }
    }

    pub fn cardinality(self) -> u64 {
        let (lo, hi) = self.bounds();
        (hi as i128 - lo as i128 + 1) as u64
    }

    pub fn contains(self, value: Value) -> bool {
        match (self, value) {
            (Domain::Int { lo, hi }, Value::Int(n)) => lo <= n && n <= hi,
            (Domain::Bool, Value::Bool(_)) => true,
            _ => false,
        }
    }

    /// All values in domain order.
    pub fn values(self) -> impl Iterator<Item = Value> {
        let (lo, hi) = self.bounds();
        let ty = self.ty();
        (lo..=hi).map(move |o| Value::from_ordinal(ty, o))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            Domain::Bool => f.write_str("bool"),
        }
    }
}

/// An assignment of concrete values to named variables.
///
/// Entries keep their insertion order, which for valuations over program
/// inputs is the input declaration order. Comparison is lexicographic over
/// the values in that order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Valuation {
    entries: Vec<(String, Value)>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `name`, replacing an existing binding in place.
    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<Value>) -> Self {
        self.insert(name, value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    /// Same bindings, sorted by variable name. Used where valuations from
    /// different sources must compare as plain maps.
    pub fn normalized(&self) -> Valuation {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Valuation { entries }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.values().cmp(other.values())
    }
}

impl FromIterator<(String, Value)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        let mut v = Valuation::new();
        for (n, x) in iter {
            v.insert(n, x);
        }
        v
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}={v}")?;
        }
        Ok(())
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (n, v) in &self.entries {
            map.serialize_entry(n, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl<'de> serde::de::Visitor<'de> for Visitor {
            type Value = Valuation;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping variable names to integers or booleans")
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> Result<Valuation, A::Error> {
                let mut v = Valuation::new();
                while let Some((k, x)) = map.next_entry::<String, Value>()? {
                    v.insert(k, x);
                }
                Ok(v)
            }
        }
        deserializer.deserialize_map(Visitor)
    }
}
