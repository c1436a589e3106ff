//! Line-oriented `.vo` files.
//!
//! ```text
//! // task declarations
//! MC/train_routes/MC
//! SPRJ8/train_routes/SPRJ: rs(R8) expect "expected/abstract_r8.json"
//! // VO declarations
//! VO3 [REQ3]: MC(FIN);(SPRJ1 & SPRJ8)
//! VO3.1 [REQ3] derived VO3 via abs-link: MC.1(FIN);(SPRJ1.1 & SPRJ8.1)
//! ```

use std::collections::HashSet;

use crate::error::{Diagnostic, Diagnostics, Pos};
use crate::vo::model::{Derivation, Formula, McOption, TaskDecl, TaskType, VoDecl, VoFile};

type PResult<T> = Result<T, Diagnostic>;

fn is_id_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn is_id(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(is_id_start) && cs.all(is_id_char)
}

pub fn parse_vo_file(text: &str) -> Result<VoFile, Diagnostics> {
    let mut file = VoFile::default();
    let mut errors = Vec::new();
    let mut refs: Vec<(String, Pos)> = Vec::new();
    let mut option_refs: Vec<(String, Pos)> = Vec::new();
    let mut task_pos = Vec::new();
    let mut vo_pos = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u32 + 1;
        let indent = raw.len() - raw.trim_start().len();
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let pos = Pos {
            line: line_no,
            col: indent as u32 + 1,
        };
        let head = line.split(':').next().unwrap_or("");
        let result = if head.contains('/') {
            task_line(line, pos).map(|t| {
                task_pos.push(pos);
                file.tasks.push(t);
            })
        } else {
            vo_line(line, pos).map(|(v, r)| {
                for (id, with_opts, p) in r {
                    if with_opts {
                        option_refs.push((id.clone(), p));
                    }
                    refs.push((id, p));
                }
                vo_pos.push(pos);
                file.vos.push(v);
            })
        };
        if let Err(d) = result {
            errors.push(d);
        }
    }

    let mut seen = HashSet::new();
    for (t, p) in file.tasks.iter().zip(&task_pos) {
        if !seen.insert(t.id.as_str()) {
            errors.push(Diagnostic::error(
                "E_DUP_TASK",
                *p,
                format!("task `{}` declared twice", t.id),
            ));
        }
    }
    let mut seen = HashSet::new();
    for (v, p) in file.vos.iter().zip(&vo_pos) {
        if !seen.insert(v.name.as_str()) {
            errors.push(Diagnostic::error(
                "E_DUP_VO",
                *p,
                format!("VO `{}` declared twice", v.name),
            ));
        }
    }
    for (id, p) in &refs {
        if file.task(id).is_none() {
            errors.push(Diagnostic::error(
                "E_UNDECLARED_TASK",
                *p,
                format!("reference to undeclared task `{id}`"),
            ));
        }
    }
    for (id, p) in &option_refs {
        if let Some(t) = file.task(id) {
            if t.ty != TaskType::MC {
                errors.push(Diagnostic::error(
                    "E_BAD_OPTION",
                    *p,
                    format!("options are only allowed on MC tasks, `{id}` is {}", t.ty),
                ));
            }
        }
    }
    if errors.is_empty() {
        Ok(file)
    } else {
        errors.sort_by_key(|d| (d.pos.line, d.pos.col));
        Err(Diagnostics(errors))
    }
}

fn task_line(line: &str, pos: Pos) -> PResult<TaskDecl> {
    let (head, param) = match line.find(':') {
        Some(i) => (&line[..i], Some(line[i + 1..].trim())),
        None => (line, None),
    };
    let parts: Vec<&str> = head.trim().split('/').map(str::trim).collect();
    if parts.len() != 3 || !is_id(parts[0]) || !is_id(parts[1]) {
        return Err(Diagnostic::error(
            "E_SYNTAX",
            pos,
            "task declarations have the form `ID/MACHINE/TYPE[: param]`",
        ));
    }
    let ty = TaskType::parse(parts[2]).ok_or_else(|| {
        Diagnostic::error(
            "E_UNKNOWN_TASK_TYPE",
            pos,
            format!("unknown task type `{}` (expected TR, MC or SPRJ)", parts[2]),
        )
    })?;
    let mut param = param.filter(|p| !p.is_empty()).map(str::to_string);
    let mut expect = None;
    if let Some(p) = &param {
        if let Some((expr, path)) = split_expect(p) {
            if ty != TaskType::SPRJ {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    pos,
                    "`expect` is only allowed on SPRJ tasks",
                ));
            }
            expect = Some(path);
            param = (!expr.is_empty()).then_some(expr);
        }
    }
    match (ty, &param) {
        (TaskType::MC, Some(_)) => Err(Diagnostic::error(
            "E_BAD_PARAM",
            pos,
            "MC tasks take options at the reference site, not a parameter",
        )),
        (TaskType::TR | TaskType::SPRJ, None) => Err(Diagnostic::error(
            "E_MISSING_PARAM",
            pos,
            format!("{ty} task `{}` needs a parameter", parts[0]),
        )),
        _ => Ok(TaskDecl {
            id: parts[0].to_string(),
            machine: parts[1].to_string(),
            ty,
            param,
            expect,
        }),
    }
}

/// Splits `expr expect "path"` into its two parts.
fn split_expect(p: &str) -> Option<(String, String)> {
    let p = p.trim_end();
    if !p.ends_with('"') {
        return None;
    }
    let body = &p[..p.len() - 1];
    let q = body.rfind('"')?;
    let before = body[..q].trim_end();
    let expr = before.strip_suffix("expect")?;
    if !(expr.is_empty() || expr.ends_with(char::is_whitespace)) {
        return None;
    }
    Some((expr.trim().to_string(), body[q + 1..].to_string()))
}

type Refs = Vec<(String, bool, Pos)>;

fn vo_line(line: &str, pos: Pos) -> PResult<(VoDecl, Refs)> {
    let colon = line.find(':').ok_or_else(|| {
        Diagnostic::error(
            "E_SYNTAX",
            pos,
            "VO declarations have the form `NAME: formula`",
        )
    })?;
    let head = &line[..colon];
    let body = &line[colon + 1..];
    let words: Vec<&str> = head.split_whitespace().collect();
    let name = words.first().copied().unwrap_or("");
    if !is_id(name) {
        return Err(Diagnostic::error("E_SYNTAX", pos, "expected a VO name"));
    }
    let mut vo = VoDecl {
        name: name.to_string(),
        requirement: None,
        formula: Formula::task(""),
        derived_from: None,
        superseded_by: None,
    };
    let mut i = 1;
    if let Some(w) = words.get(i) {
        if let Some(req) = w.strip_prefix('[').and_then(|w| w.strip_suffix(']')) {
            vo.requirement = Some(req.to_string());
            i += 1;
        }
    }
    while i < words.len() {
        match (
            words[i],
            words.get(i + 1),
            words.get(i + 2),
            words.get(i + 3),
        ) {
            ("derived", Some(parent), Some(&"via"), Some(link)) => {
                vo.derived_from = Some(Derivation {
                    parent: parent.to_string(),
                    link: link.to_string(),
                });
                i += 4;
            }
            ("superseded", Some(&"by"), Some(by), _) => {
                vo.superseded_by = Some(by.to_string());
                i += 3;
            }
            (w, ..) => {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    pos,
                    format!("unexpected `{w}` in VO header"),
                ))
            }
        }
    }
    let offset = pos.col + colon as u32 + 1;
    let mut p = FormulaParser {
        chars: body.chars().collect(),
        at: 0,
        line: pos.line,
        col0: offset,
        refs: Vec::new(),
    };
    vo.formula = p.formula()?;
    p.skip_ws();
    if p.at < p.chars.len() {
        return Err(p.err("E_SYNTAX", "unexpected input after formula"));
    }
    Ok((vo, p.refs))
}

struct FormulaParser {
    chars: Vec<char>,
    at: usize,
    line: u32,
    col0: u32,
    refs: Refs,
}

impl FormulaParser {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col0 + self.at as u32,
        }
    }

    fn err(&self, code: &'static str, msg: &str) -> Diagnostic {
        Diagnostic::error(code, self.pos(), msg)
    }

    fn skip_ws(&mut self) {
        while self.at < self.chars.len() && self.chars[self.at].is_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.at).copied()
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(';') {
            self.at += 1;
            let rhs = self.conj()?;
            lhs = Formula::Seq(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut lhs = self.atom()?;
        while self.peek() == Some('&') {
            self.at += 1;
            let rhs = self.atom()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> PResult<Formula> {
        match self.peek() {
            None | Some('&') | Some(';') | Some(')') => {
                Err(self.err("E_DANGLING_OPERATOR", "operator is missing an operand"))
            }
            Some('(') => {
                self.at += 1;
                let f = self.formula()?;
                if self.peek() != Some(')') {
                    return Err(self.err("E_SYNTAX", "expected `)`"));
                }
                self.at += 1;
                Ok(f)
            }
            Some(c) if is_id_start(c) => {
                let start_pos = self.pos();
                let start = self.at;
                while self.at < self.chars.len() && is_id_char(self.chars[self.at]) {
                    self.at += 1;
                }
                let id: String = self.chars[start..self.at].iter().collect();
                let mut options = Vec::new();
                let with_opts = self.peek() == Some('(');
                if with_opts {
                    self.at += 1;
                    loop {
                        let opt_pos = self.pos();
                        self.skip_ws();
                        let s = self.at;
                        while self.at < self.chars.len() && self.chars[self.at].is_alphanumeric() {
                            self.at += 1;
                        }
                        let word: String = self.chars[s..self.at].iter().collect();
                        let opt = McOption::parse(&word).ok_or_else(|| {
                            Diagnostic::error(
                                "E_UNKNOWN_OPTION",
                                opt_pos,
                                format!("unknown option `{word}` (expected FIN, INV or DLF)"),
                            )
                        })?;
                        if !options.contains(&opt) {
                            options.push(opt);
                        }
                        match self.peek() {
                            Some(',') => self.at += 1,
                            Some(')') => {
                                self.at += 1;
                                break;
                            }
                            _ => return Err(self.err("E_SYNTAX", "expected `,` or `)`")),
                        }
                    }
                }
                self.refs.push((id.clone(), with_opts, start_pos));
                Ok(Formula::Task { id, options })
            }
            Some(c) => Err(self.err("E_SYNTAX", &format!("unexpected `{c}` in formula"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DECLS: &str = "MC/train_routes/MC\nSPRJ1/train_routes/SPRJ: rs(R1)\nSPRJ2/train_routes/SPRJ: rs(R2)\nA/m/MC\nB/m/MC\nC/m/MC\n";

    fn formula(src: &str) -> Formula {
        let f = parse_vo_file(&format!("{DECLS}V: {src}")).unwrap();
        f.vos[0].formula.clone()
    }

    #[test]
    fn sequence_of_conjunction() {
        let f = formula("MC(FIN);(SPRJ1 & SPRJ2)");
        assert_eq!(
            f,
            Formula::Seq(
                Box::new(Formula::Task {
                    id: "MC".into(),
                    options: vec![McOption::Fin]
                }),
                Box::new(Formula::And(
                    Box::new(Formula::task("SPRJ1")),
                    Box::new(Formula::task("SPRJ2"))
                ))
            )
        );
    }

    #[test]
    fn conjunction_binds_tighter() {
        let f = formula("A ; B & C");
        assert_eq!(
            f,
            Formula::Seq(
                Box::new(Formula::task("A")),
                Box::new(Formula::And(
                    Box::new(Formula::task("B")),
                    Box::new(Formula::task("C"))
                ))
            )
        );
        assert_eq!(formula("A & B & C").to_string(), "A & B & C");
        assert_eq!(formula("A & (B & C)").to_string(), "A & (B & C)");
    }

    #[test]
    fn single_reference() {
        assert_eq!(formula("SPRJ1"), Formula::task("SPRJ1"));
    }

    #[test]
    fn errors() {
        let e = parse_vo_file("X/m/LTL: G p").unwrap_err();
        assert_eq!(e.first_code(), "E_UNKNOWN_TASK_TYPE");
        let e = parse_vo_file("A/m/MC\nV: A & Z").unwrap_err();
        assert_eq!(e.first_code(), "E_UNDECLARED_TASK");
        let e = parse_vo_file("A/m/MC\nV: A &").unwrap_err();
        assert_eq!(e.first_code(), "E_DANGLING_OPERATOR");
        let e = parse_vo_file("A/m/MC\nV: ; A").unwrap_err();
        assert_eq!(e.first_code(), "E_DANGLING_OPERATOR");
    }

    #[test]
    fn expectation_suffix_and_headers() {
        let src = "S/m/SPRJ: rs(R8) expect \"expected/r8.json\"\nV [REQ3] derived P via link-1 superseded by W: S\n";
        let f = parse_vo_file(src).unwrap();
        assert_eq!(f.tasks[0].param.as_deref(), Some("rs(R8)"));
        assert_eq!(f.tasks[0].expect.as_deref(), Some("expected/r8.json"));
        let v = &f.vos[0];
        assert_eq!(v.requirement.as_deref(), Some("REQ3"));
        assert_eq!(v.derived_from.as_ref().unwrap().link, "link-1");
        assert_eq!(v.superseded_by.as_deref(), Some("W"));
        assert_eq!(parse_vo_file(&f.render()).unwrap(), f);
    }
}
