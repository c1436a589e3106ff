//! Hereditarily finite values with a canonical total order.
//!
//! Sets are stored as strictly increasing slices, so structural equality,
//! hashing and ordering all coincide with set-theoretic equality. The derived
//! `Ord` gives the canonical order: `Atom < Int < Bool < Pair < Set` across
//! kinds and lexicographic within a kind (sets compare as sorted sequences, so
//! a prefix sorts first).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;

/// An identifier-valued carrier element (`R1`, `free`, ...).
pub type Atom = Arc<str>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(Atom),
    Int(i64),
    Bool(bool),
    Pair(Arc<(Value, Value)>),
    Set(Arc<[Value]>),
}

/// Total order used for state identity, printing and enumeration order.
pub fn canonical_compare(a: &Value, b: &Value) -> Ordering {
    a.cmp(b)
}

impl Value {
    pub fn atom(name: &str) -> Value {
        Value::Atom(Arc::from(name))
    }

    pub fn pair(left: Value, right: Value) -> Value {
        Value::Pair(Arc::new((left, right)))
    }

    pub fn empty_set() -> Value {
        Value::Set(Arc::from(Vec::new()))
    }

    /// Builds a set from arbitrary elements, sorting and removing duplicates.
    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Value {
        let mut v: Vec<Value> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Value::Set(Arc::from(v))
    }

    /// Wraps an already strictly increasing vector.
    pub(crate) fn set_from_sorted(v: Vec<Value>) -> Value {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Value::Set(Arc::from(v))
    }

    pub fn as_set(&self) -> Option<&[Value]> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Atom(_) => "atom",
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Pair(_) => "pair",
            Value::Set(_) => "set",
        }
    }

    pub(crate) fn expect_set(&self) -> Result<&[Value], EvalError> {
        self.as_set().ok_or_else(|| EvalError::Type {
            expected: "set",
            found: self.render(),
        })
    }

    pub(crate) fn expect_bool(&self) -> Result<bool, EvalError> {
        self.as_bool().ok_or_else(|| EvalError::Type {
            expected: "predicate",
            found: self.render(),
        })
    }

    pub(crate) fn expect_pair(&self) -> Result<(&Value, &Value), EvalError> {
        self.as_pair().ok_or_else(|| EvalError::Type {
            expected: "pair",
            found: self.render(),
        })
    }

    pub(crate) fn expect_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(n) => Ok(*n),
            _ => Err(EvalError::Type {
                expected: "integer",
                found: self.render(),
            }),
        }
    }

    /// Membership test on a set value (binary search).
    pub fn contains(&self, x: &Value) -> bool {
        self.as_set().is_some_and(|s| s.binary_search(x).is_ok())
    }

    /// Surface syntax; sets print in canonical order and maplets associate
    /// to the left, so the output parses back to the same value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out, false);
        out
    }

    fn write_to(&self, out: &mut String, nested_right: bool) {
        match self {
            Value::Atom(a) => out.push_str(a),
            Value::Int(n) => out.push_str(&n.to_string()),
            Value::Bool(true) => out.push_str("TRUE"),
            Value::Bool(false) => out.push_str("FALSE"),
            Value::Pair(p) => {
                if nested_right {
                    out.push('(');
                }
                p.0.write_to(out, false);
                out.push_str(" |-> ");
                p.1.write_to(out, true);
                if nested_right {
                    out.push(')');
                }
            }
            Value::Set(items) => {
                out.push('{');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write_to(out, false);
                }
                out.push('}');
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

// Sorted-slice set algebra. All inputs are strictly increasing.

pub(crate) fn union(a: &[Value], b: &[Value]) -> Vec<Value> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub(crate) fn intersection(a: &[Value], b: &[Value]) -> Vec<Value> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn difference(a: &[Value], b: &[Value]) -> Vec<Value> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j < b.len() && b[j] == *x {
            continue;
        }
        out.push(x.clone());
    }
    out
}

pub(crate) fn disjoint(a: &[Value], b: &[Value]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return false,
        }
    }
    true
}

pub(crate) fn is_subset(a: &[Value], b: &[Value]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

/// Range of pairs in a relation whose left component equals `x`.
/// Relations are sorted by left component first, so the matches are contiguous.
pub(crate) fn pairs_with_left<'a>(rel: &'a [Value], x: &Value) -> &'a [Value] {
    let start = rel.partition_point(|p| match p {
        Value::Pair(p) => p.0 < *x,
        other => other < x,
    });
    let end = start
        + rel[start..]
            .iter()
            .take_while(|p| matches!(p, Value::Pair(p) if p.0 == *x))
            .count();
    &rel[start..end]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Value {
        Value::atom(n)
    }

    #[test]
    fn order_across_kinds() {
        let vals = [
            a("Z"),
            Value::Int(-3),
            Value::Bool(false),
            Value::pair(a("A"), a("A")),
            Value::empty_set(),
        ];
        for w in vals.windows(2) {
            assert_eq!(canonical_compare(&w[0], &w[1]), Ordering::Less);
        }
    }

    #[test]
    fn order_within_kinds() {
        assert!(a("A") < a("B"));
        assert!(Value::empty_set() < Value::set([a("A")]));
        assert!(Value::pair(a("A"), a("B")) < Value::pair(a("A"), a("C")));
    }

    #[test]
    fn render_examples() {
        assert_eq!(
            Value::set([Value::pair(a("L"), a("A"))]).render(),
            "{L |-> A}"
        );
        assert_eq!(a("free").render(), "free");
        assert_eq!(Value::empty_set().render(), "{}");
        let right_nested = Value::pair(a("a"), Value::pair(a("b"), a("c")));
        assert_eq!(right_nested.render(), "a |-> (b |-> c)");
        let left_nested = Value::pair(Value::pair(a("a"), a("b")), a("c"));
        assert_eq!(left_nested.render(), "a |-> b |-> c");
    }

    #[test]
    fn set_construction_dedups() {
        let s = Value::set([a("B"), a("A"), a("B")]);
        assert_eq!(s.as_set().unwrap().len(), 2);
        assert!(s.contains(&a("A")));
        assert!(!s.contains(&a("C")));
    }

    #[test]
    fn left_lookup() {
        let rel = Value::set([
            Value::pair(a("A"), a("x")),
            Value::pair(a("B"), a("y")),
            Value::pair(a("B"), a("z")),
            Value::pair(a("C"), a("w")),
        ]);
        let s = rel.as_set().unwrap();
        assert_eq!(pairs_with_left(s, &a("B")).len(), 2);
        assert_eq!(pairs_with_left(s, &a("D")).len(), 0);
        assert_eq!(pairs_with_left(s, &a("A")).len(), 1);
    }

    #[test]
    fn slice_algebra() {
        let x = [a("A"), a("B"), a("C")];
        let y = [a("B"), a("D")];
        assert_eq!(union(&x, &y), vec![a("A"), a("B"), a("C"), a("D")]);
        assert_eq!(intersection(&x, &y), vec![a("B")]);
        assert_eq!(difference(&x, &y), vec![a("A"), a("C")]);
        assert!(is_subset(&[a("B")], &x));
        assert!(!is_subset(&y, &x));
    }
}
