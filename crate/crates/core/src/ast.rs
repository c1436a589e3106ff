//! Abstract syntax shared by every other module.
//!
//! Expressions and predicates share one tree: predicates are boolean-valued
//! expressions. All nodes are immutable after parsing.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::Pos;
use crate::value::Value;

pub type Name = Arc<str>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Inverse,
    Dom,
    Ran,
    Pow,
    Card,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    // predicates
    Equiv,
    Implies,
    Or,
    And,
    Eq,
    NotEq,
    In,
    NotIn,
    Subset,
    NotSubset,
    StrictSubset,
    NotStrictSubset,
    Lt,
    Le,
    Gt,
    Ge,
    // relation and function spaces
    Relation,
    TotalFn,
    PartialFn,
    PartialInj,
    // pairs
    Maplet,
    // set algebra
    Union,
    Inter,
    Diff,
    Product,
    DomRes,
    RanRes,
    DomSub,
    RanSub,
    Override,
}

/// Associativity class of a binary operator, used by parser and printer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Left,
    Right,
    None,
}

impl BinOp {
    /// Binding power; larger binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Equiv => 1,
            Implies => 2,
            Or => 3,
            And => 4,
            // 5 is prefix `not`
            Eq | NotEq | In | NotIn | Subset | NotSubset | StrictSubset | NotStrictSubset | Lt
            | Le | Gt | Ge => 6,
            Relation | TotalFn | PartialFn | PartialInj => 7,
            Maplet => 8,
            Union | Inter | Diff | Product | DomRes | RanRes | DomSub | RanSub | Override => 9,
        }
    }

    pub(crate) fn assoc(self) -> Assoc {
        use BinOp::*;
        match self {
            Implies | Relation | TotalFn | PartialFn | PartialInj => Assoc::Right,
            Equiv | Eq | NotEq | In | NotIn | Subset | NotSubset | StrictSubset
            | NotStrictSubset | Lt | Le | Gt | Ge => Assoc::None,
            _ => Assoc::Left,
        }
    }

    pub fn ascii(self) -> &'static str {
        use BinOp::*;
        match self {
            Equiv => "<=>",
            Implies => "=>",
            Or => "or",
            And => "&",
            Eq => "=",
            NotEq => "/=",
            In => ":",
            NotIn => "/:",
            Subset => "<:",
            NotSubset => "/<:",
            StrictSubset => "<<:",
            NotStrictSubset => "/<<:",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Relation => "<->",
            TotalFn => "-->",
            PartialFn => "+->",
            PartialInj => ">+>",
            Maplet => "|->",
            Union => "\\/",
            Inter => "/\\",
            Diff => "\\",
            Product => "**",
            DomRes => "<|",
            RanRes => "|>",
            DomSub => "<<|",
            RanSub => "|>>",
            Override => "<+",
        }
    }

    pub fn unicode(self) -> &'static str {
        use BinOp::*;
        match self {
            Equiv => "⇔",
            Implies => "⇒",
            Or => "∨",
            And => "∧",
            Eq => "=",
            NotEq => "≠",
            In => "∈",
            NotIn => "∉",
            Subset => "⊆",
            NotSubset => "⊈",
            StrictSubset => "⊂",
            NotStrictSubset => "⊄",
            Lt => "<",
            Le => "≤",
            Gt => ">",
            Ge => "≥",
            Relation => "↔",
            TotalFn => "→",
            PartialFn => "⇸",
            PartialInj => "⤔",
            Maplet => "↦",
            Union => "∪",
            Inter => "∩",
            Diff => "∖",
            Product => "×",
            DomRes => "◁",
            RanRes => "▷",
            DomSub => "⩤",
            RanSub => "⩥",
            Override => "\u{E103}",
        }
    }

    pub fn is_function_space(self) -> bool {
        matches!(
            self,
            BinOp::Relation | BinOp::TotalFn | BinOp::PartialFn | BinOp::PartialInj
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Ident(Name),
    Int(i64),
    Bool(bool),
    SetEnum(Vec<Expr>),
    /// `{pattern | pred}`; the pattern's identifiers are the bound variables.
    Comprehension {
        vars: Vec<Name>,
        pattern: Box<Expr>,
        pred: Box<Expr>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Relational image `r[S]`.
    Image(Box<Expr>, Box<Expr>),
    /// Function application `f(x)`.
    Apply(Box<Expr>, Box<Expr>),
    Quant {
        q: Quantifier,
        vars: Vec<Name>,
        body: Box<Expr>,
    },
    /// `partition(S, p1, ..., pn)`; the first element is `S`.
    Partition(Vec<Expr>),
    /// A precomputed value. Never produced by the parser; see
    /// [`crate::eval::fold_constants`].
    Lit(Value),
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(Arc::from(name))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Free identifiers, in sorted order.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_vars().iter().any(|n| &**n == name)
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Ident(n) => {
                if !bound.contains(n) {
                    out.insert(n.clone());
                }
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Lit(_) => {}
            Expr::SetEnum(items) | Expr::Partition(items) => {
                for e in items {
                    e.collect_free(bound, out);
                }
            }
            Expr::Comprehension {
                vars,
                pattern,
                pred,
            } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                pattern.collect_free(bound, out);
                pred.collect_free(bound, out);
                bound.truncate(n);
            }
            Expr::Quant { vars, body, .. } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
            Expr::Unary(_, e) => e.collect_free(bound, out),
            Expr::Binary(_, l, r) | Expr::Image(l, r) | Expr::Apply(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
        }
    }

    /// Top-level conjuncts (`a & b & c` -> `[a, b, c]`).
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Binary(BinOp::And, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// A labelled predicate (`@inv1 ...`). The position is ignored by equality.
#[derive(Debug, Clone, Eq)]
pub struct Labelled {
    pub label: String,
    pub pred: Expr,
    pub pos: Pos,
}

impl PartialEq for Labelled {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.pred == other.pred
    }
}

impl Labelled {
    pub fn new(label: impl Into<String>, pred: Expr) -> Self {
        Labelled {
            label: label.into(),
            pred,
            pos: Pos::default(),
        }
    }
}

/// Deterministic assignment `var := value` or `var(arg) := value`
/// (functional override).
#[derive(Debug, Clone, Eq)]
pub struct Action {
    pub label: String,
    pub var: Name,
    pub arg: Option<Expr>,
    pub value: Expr,
    pub pos: Pos,
}

impl PartialEq for Action {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.var == other.var
            && self.arg == other.arg
            && self.value == other.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Plain,
    Extends(String),
    Refines(String),
}

impl EventKind {
    pub fn parent(&self) -> Option<&str> {
        match self {
            EventKind::Plain => None,
            EventKind::Extends(p) | EventKind::Refines(p) => Some(p),
        }
    }
}

pub const INITIALISATION: &str = "INITIALISATION";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub name: String,
    pub kind: EventKind,
    pub params: Vec<Name>,
    pub guards: Vec<Labelled>,
    pub actions: Vec<Action>,
}

impl Event {
    pub fn is_initialisation(&self) -> bool {
        self.name == INITIALISATION
    }

    /// True for `extends` events that add nothing of their own.
    pub fn is_pure_extension(&self) -> bool {
        matches!(self.kind, EventKind::Extends(_))
            && self.params.is_empty()
            && self.guards.is_empty()
            && self.actions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub refines: Option<String>,
    pub sees: Vec<String>,
    pub variables: Vec<Name>,
    pub invariants: Vec<Labelled>,
    pub events: Vec<Event>,
}

impl Machine {
    pub fn event(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn initialisation(&self) -> Option<&Event> {
        self.event(INITIALISATION)
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| &**v == name)
    }

    /// Events other than INITIALISATION, in declaration order.
    pub fn transitions(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.is_initialisation())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub name: String,
    pub extends: Option<String>,
    pub sets: Vec<Name>,
    pub constants: Vec<Name>,
    pub axioms: Vec<Labelled>,
}

impl Context {
    /// Whether this context enumerates some carrier set with a `partition`.
    pub(crate) fn has_partition(&self) -> bool {
        self.axioms
            .iter()
            .any(|a| matches!(a.pred, Expr::Partition(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_respect_binders() {
        // !x.(x : S => x = y)
        let body = Expr::bin(
            BinOp::Implies,
            Expr::bin(BinOp::In, Expr::ident("x"), Expr::ident("S")),
            Expr::bin(BinOp::Eq, Expr::ident("x"), Expr::ident("y")),
        );
        let q = Expr::Quant {
            q: Quantifier::ForAll,
            vars: vec![Arc::from("x")],
            body: Box::new(body),
        };
        let fv: Vec<String> = q.free_vars().iter().map(|n| n.to_string()).collect();
        assert_eq!(fv, vec!["S", "y"]);
    }

    #[test]
    fn conjunct_split() {
        let e = Expr::bin(
            BinOp::And,
            Expr::bin(BinOp::And, Expr::ident("a"), Expr::ident("b")),
            Expr::ident("c"),
        );
        assert_eq!(e.conjuncts().len(), 3);
    }
}
