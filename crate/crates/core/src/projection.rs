//! Signature-merge projection of a state space onto an expression.
//!
//! States with the same value of the expression are merged into one node.
//! An edge `C1 -E-> C2` exists when some `E` transition crosses from class
//! `C1` to class `C2`; it is *solid* when every state of `C1` has such a
//! transition and *dashed* otherwise. Transitions inside a class are not
//! drawn but counted on the node.

use std::fmt::Write as _;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::ast::Expr;
use crate::error::{Error, Result};
use crate::eval::{fold_constants, Env, Frame};
use crate::explorer::StateSpace;
use crate::printer::{print_expr, Notation};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub value: Value,
    /// Number of states in the class.
    pub states: usize,
    /// Transitions that stay inside the class.
    pub internal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjEdge {
    pub from: usize,
    pub event: String,
    pub to: usize,
    pub style: EdgeStyle,
    /// Number of states of `from` with an `event` transition into `to`.
    pub sources: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Projection {
    /// Text of the projected expression.
    pub expr: String,
    /// Nodes in canonical order of their values.
    pub nodes: Vec<Node>,
    /// Edges ordered by source node, event name, target node.
    pub edges: Vec<ProjEdge>,
    pub initial: Option<usize>,
}

/// Projects `ss` onto `e`, evaluated under `env` at every state.
pub fn project(ss: &StateSpace, e: &Expr, env: &Env) -> Result<Projection> {
    let vars = ss.variables();
    let folded = fold_constants(e, env, vars);
    let free = folded.free_vars();
    let reads: Vec<usize> = (0..vars.len())
        .filter(|&i| free.contains(&vars[i]))
        .collect();

    // value of every state, memoised on the variables the expression reads
    let mut memo: FxHashMap<Vec<u32>, usize> = FxHashMap::default();
    let mut values: Vec<Value> = Vec::new();
    let mut raw_class = Vec::with_capacity(ss.len());
    for s in 0..ss.len() as u32 {
        let ids = ss.value_ids(s);
        let key: Vec<u32> = reads.iter().map(|&v| ids[v]).collect();
        let c = match memo.get(&key) {
            Some(&c) => c,
            None => {
                let vals = ss.valuation(s);
                let v = Frame::with_state(env, vars, &vals)
                    .eval(&folded)
                    .map_err(|err| {
                        Error::check(
                            err.code(),
                            format!("projection expression at state {s}: {err}"),
                        )
                    })?;
                let c = match values.iter().position(|x| *x == v) {
                    Some(c) => c,
                    None => {
                        values.push(v);
                        values.len() - 1
                    }
                };
                memo.insert(key, c);
                c
            }
        };
        raw_class.push(c);
    }

    // renumber classes in canonical value order
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].cmp(&values[b]));
    let mut rank = vec![0; values.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let class: Vec<usize> = raw_class.iter().map(|&c| rank[c]).collect();
    let mut nodes: Vec<Node> = order
        .iter()
        .map(|&c| Node {
            value: values[c].clone(),
            states: 0,
            internal: 0,
        })
        .collect();
    for &c in &class {
        nodes[c].states += 1;
    }

    // (from, event, to) -> (last source seen, distinct sources)
    let mut crossings: FxHashMap<(usize, u16, usize), (u32, usize)> = FxHashMap::default();
    for (s, edge) in ss.transitions() {
        let (c1, c2) = (class[s as usize], class[edge.to as usize]);
        if c1 == c2 {
            nodes[c1].internal += 1;
            continue;
        }
        let entry = crossings
            .entry((c1, edge.event, c2))
            .or_insert((u32::MAX, 0));
        if entry.0 != s {
            *entry = (s, entry.1 + 1);
        }
    }
    let mut edges: Vec<ProjEdge> = crossings
        .into_iter()
        .map(|((from, ev, to), (_, sources))| ProjEdge {
            from,
            event: ss.events()[ev as usize].clone(),
            to,
            style: if sources == nodes[from].states {
                EdgeStyle::Solid
            } else {
                EdgeStyle::Dashed
            },
            sources,
        })
        .collect();
    edges.sort_by(|a, b| (a.from, &a.event, a.to).cmp(&(b.from, &b.event, b.to)));

    Ok(Projection {
        expr: print_expr(e, Notation::Ascii),
        initial: class.first().copied(),
        nodes,
        edges,
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders `p` as a DOT digraph. Output is deterministic.
pub fn emit_dot(p: &Projection) -> String {
    let mut out = String::from("digraph projection {\n");
    if !p.expr.is_empty() {
        let _ = writeln!(out, "  label={};", quote(&p.expr));
    }
    for (i, n) in p.nodes.iter().enumerate() {
        let extra = if p.initial == Some(i) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  n{i} [label={}{extra}];", quote(&n.value.render()));
    }
    for e in &p.edges {
        let style = match e.style {
            EdgeStyle::Solid => "",
            EdgeStyle::Dashed => ", style=dashed",
        };
        let _ = writeln!(
            out,
            "  n{} -> n{} [label={}{style}];",
            e.from,
            e.to,
            quote(&e.event)
        );
    }
    out.push_str("}\n");
    out
}

/// Expected shape of a projection, as stored in expectation files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub nodes: Vec<String>,
    pub edges: Vec<ExpectedEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedEdge {
    pub from: String,
    pub event: String,
    pub to: String,
    /// Omitted: either style is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<EdgeStyle>,
}

impl Expectation {
    pub fn load(path: impl AsRef<Path>) -> Result<Expectation> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// The exact shape of `p`, styles included.
    pub fn of(p: &Projection) -> Expectation {
        Expectation {
            nodes: p.nodes.iter().map(|n| n.value.render()).collect(),
            edges: p
                .edges
                .iter()
                .map(|e| ExpectedEdge {
                    from: p.nodes[e.from].value.render(),
                    event: e.event.clone(),
                    to: p.nodes[e.to].value.render(),
                    style: Some(e.style),
                })
                .collect(),
        }
    }

    /// Structural comparison; returns the differences found.
    pub fn compare(&self, p: &Projection) -> Vec<String> {
        let actual = Expectation::of(p);
        let mut diffs = Vec::new();
        let mut want_nodes = self.nodes.clone();
        want_nodes.sort();
        let mut got_nodes = actual.nodes.clone();
        got_nodes.sort();
        if want_nodes != got_nodes {
            diffs.push(format!("nodes: expected {want_nodes:?}, got {got_nodes:?}"));
        }
        let key = |e: &ExpectedEdge| (e.from.clone(), e.event.clone(), e.to.clone());
        for w in &self.edges {
            match actual.edges.iter().find(|g| key(g) == key(w)) {
                None => diffs.push(format!("missing edge {} -{}-> {}", w.from, w.event, w.to)),
                Some(g) => {
                    if let (Some(want), Some(got)) = (w.style, g.style) {
                        if want != got {
                            diffs.push(format!(
                                "edge {} -{}-> {} is {got:?}, expected {want:?}",
                                w.from, w.event, w.to
                            ));
                        }
                    }
                }
            }
        }
        for g in &actual.edges {
            if !self.edges.iter().any(|w| key(w) == key(g)) {
                diffs.push(format!(
                    "unexpected edge {} -{}-> {}",
                    g.from, g.event, g.to
                ));
            }
        }
        diffs
    }
}
