use std::sync::Arc;

use super::lexer::{Tok, Token};
use crate::ast::{Assoc, BinOp, Expr, Name, Quantifier, UnOp};
use crate::error::{Diagnostic, Pos};

/// Words that may never be used as identifiers.
pub(crate) const KEYWORDS: &[&str] = &[
    "machine",
    "context",
    "refines",
    "sees",
    "extends",
    "variables",
    "invariants",
    "events",
    "event",
    "any",
    "where",
    "when",
    "then",
    "end",
    "sets",
    "constants",
    "axioms",
    "or",
    "not",
    "dom",
    "ran",
    "POW",
    "card",
    "partition",
    "TRUE",
    "FALSE",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub(crate) struct TokenStream {
    toks: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl TokenStream {
    pub fn new(toks: Vec<Token>) -> Self {
        TokenStream { toks, at: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    pub fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{op}`")))
        }
    }

    pub fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    /// A non-keyword identifier.
    pub fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Identifier if the next token is a non-keyword identifier.
    pub fn maybe_ident(&mut self) -> Option<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let pos = self.pos();
                self.bump();
                Some((s, pos))
            }
            _ => None,
        }
    }

    pub fn unexpected(&self, what: &str) -> Diagnostic {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Label(l) => format!("`@{l}`"),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Diagnostic::error(
            "E_SYNTAX",
            self.pos(),
            format!("expected {what}, found {found}"),
        )
    }

    // ---- expressions -------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        self.expr_bp(0)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        use BinOp::*;
        let op = match self.peek() {
            Tok::Ident(w) if w == "or" => return Some(Or),
            Tok::Op(o) => *o,
            _ => return None,
        };
        Some(match op {
            "<=>" => Equiv,
            "=>" => Implies,
            "&" => And,
            "=" => Eq,
            "/=" => NotEq,
            ":" => In,
            "/:" => NotIn,
            "<:" => Subset,
            "/<:" => NotSubset,
            "<<:" => StrictSubset,
            "/<<:" => NotStrictSubset,
            "<" => Lt,
            "<=" => Le,
            ">" => Gt,
            ">=" => Ge,
            "<->" => Relation,
            "-->" => TotalFn,
            "+->" => PartialFn,
            ">+>" => PartialInj,
            "|->" => Maplet,
            "\\/" => Union,
            "/\\" => Inter,
            "\\" => Diff,
            "**" => Product,
            "<|" => DomRes,
            "|>" => RanRes,
            "<<|" => DomSub,
            "|>>" => RanSub,
            "<+" => Override,
            _ => return None,
        })
    }

    fn expr_bp(&mut self, min_bp: u8) -> PResult<Expr> {
        let mut lhs = if self.is_word("not") {
            self.bump();
            let operand = self.expr_bp(6)?;
            Expr::Unary(UnOp::Not, Box::new(operand))
        } else {
            self.postfix()?
        };
        let mut last_nonassoc: Option<u8> = None;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_bp {
                break;
            }
            if last_nonassoc == Some(prec) {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    self.pos(),
                    format!(
                        "operator `{}` is not associative; add parentheses",
                        op.ascii()
                    ),
                ));
            }
            self.bump();
            let rhs_min = match op.assoc() {
                Assoc::Left | Assoc::None => prec + 1,
                Assoc::Right => prec,
            };
            let rhs = self.expr_bp(rhs_min)?;
            lhs = Expr::bin(op, lhs, rhs);
            last_nonassoc = (op.assoc() == Assoc::None).then_some(prec);
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat_op("~") {
                e = Expr::Unary(UnOp::Inverse, Box::new(e));
            } else if self.eat_op("[") {
                let s = self.expr()?;
                self.expect_op("]")?;
                e = Expr::Image(Box::new(e), Box::new(s));
            } else if self.is_op("(") {
                self.bump();
                let arg = self.expr()?;
                self.expect_op(")")?;
                e = Expr::Apply(Box::new(e), Box::new(arg));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Op("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            Tok::Op("{") => self.braces(),
            Tok::Op("!") | Tok::Op("#") => {
                let q = if self.eat_op("!") {
                    Quantifier::ForAll
                } else {
                    self.bump();
                    Quantifier::Exists
                };
                let vars = self.ident_list()?;
                self.expect_op(".")?;
                self.expect_op("(")?;
                let body = self.expr()?;
                self.expect_op(")")?;
                Ok(Expr::Quant {
                    q,
                    vars,
                    body: Box::new(body),
                })
            }
            Tok::Ident(w) => match w.as_str() {
                "TRUE" => {
                    self.bump();
                    Ok(Expr::Bool(true))
                }
                "FALSE" => {
                    self.bump();
                    Ok(Expr::Bool(false))
                }
                "dom" | "ran" | "POW" | "card" => {
                    self.bump();
                    let op = match w.as_str() {
                        "dom" => UnOp::Dom,
                        "ran" => UnOp::Ran,
                        "POW" => UnOp::Pow,
                        _ => UnOp::Card,
                    };
                    self.expect_op("(")?;
                    let e = self.expr()?;
                    self.expect_op(")")?;
                    Ok(Expr::Unary(op, Box::new(e)))
                }
                "partition" => {
                    self.bump();
                    self.expect_op("(")?;
                    let mut items = vec![self.expr()?];
                    while self.eat_op(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_op(")")?;
                    Ok(Expr::Partition(items))
                }
                _ if is_keyword(&w) => Err(self.unexpected("expression")),
                _ => {
                    self.bump();
                    Ok(Expr::Ident(Arc::from(w.as_str())))
                }
            },
            _ => Err(self.unexpected("expression")),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<Name>> {
        let mut vars = vec![Arc::from(self.expect_ident()?.as_str())];
        while self.eat_op(",") {
            vars.push(Arc::from(self.expect_ident()?.as_str()));
        }
        Ok(vars)
    }

    fn braces(&mut self) -> PResult<Expr> {
        let open = self.pos();
        self.expect_op("{")?;
        if self.eat_op("}") {
            return Ok(Expr::SetEnum(Vec::new()));
        }
        let first = self.expr()?;
        if self.eat_op("|") {
            let mut vars = Vec::new();
            if !pattern_vars(&first, &mut vars) {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    open,
                    "comprehension pattern must be identifiers joined by `|->`",
                ));
            }
            let pred = self.expr()?;
            self.expect_op("}")?;
            return Ok(Expr::Comprehension {
                vars,
                pattern: Box::new(first),
                pred: Box::new(pred),
            });
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            items.push(self.expr()?);
        }
        self.expect_op("}")?;
        Ok(Expr::SetEnum(items))
    }
}

fn pattern_vars(e: &Expr, out: &mut Vec<Name>) -> bool {
    match e {
        Expr::Ident(n) => {
            if out.contains(n) {
                return false;
            }
            out.push(n.clone());
            true
        }
        Expr::Binary(BinOp::Maplet, l, r) => pattern_vars(l, out) && pattern_vars(r, out),
        _ => false,
    }
}
