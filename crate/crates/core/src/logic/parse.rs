//! Raw specification formats.
//!
//! Formulas use `!`, `&&`, `||`, right-associative `->` (loosest), parentheses
//! and the constants `true` / `false`. The text format has one `[section]`
//! per component:
//!
//! ```text
//! [vars]
//! A B C D
//! [init]
//! !A !B
//! [constraints]
//! B -> C
//! [user]
//! 1: !A ~> A, B
//! [rules]
//! 2: C ~> D
//! ```
//!
//! `#` starts a comment. The JSON form carries the same information:
//! `{"vars": [..], "init": [..], "constraints": [..], "user": [{"index", "if", "then"}], "rules": [..]}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LoadError, ParseError};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::logic::formula::Formula;
use crate::logic::spec::{Specification, Transition, TransitionKind};
use crate::logic::state::State;
use crate::logic::var::{Var, VarTable};

pub fn parse_formula(table: &VarTable, src: &str) -> Result<Formula, ParseError> {
    parse_formula_at(table, src, 1, 1)
}

fn parse_formula_at(table: &VarTable, src: &str, line: usize, col: usize) -> Result<Formula, ParseError> {
    let toks = tokenize(src, line, col)?;
    let mut cur = Cursor::new(&toks, line, col + src.chars().count());
    if cur.at_end() {
        return Err(cur.error("empty formula"));
    }
    let f = implication(table, &mut cur)?;
    cur.finish()?;
    Ok(f)
}

fn implication(t: &VarTable, cur: &mut Cursor) -> Result<Formula, ParseError> {
    let lhs = disjunction(t, cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = implication(t, cur)?;
        return Ok(Formula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn disjunction(t: &VarTable, cur: &mut Cursor) -> Result<Formula, ParseError> {
    let mut parts = vec![conjunction(t, cur)?];
    while cur.eat(&Tok::OrOr) {
        parts.push(conjunction(t, cur)?);
    }
    Ok(Formula::or(parts))
}

fn conjunction(t: &VarTable, cur: &mut Cursor) -> Result<Formula, ParseError> {
    let mut parts = vec![unary(t, cur)?];
    while cur.eat(&Tok::AndAnd) {
        parts.push(unary(t, cur)?);
    }
    Ok(Formula::and(parts))
}

fn unary(t: &VarTable, cur: &mut Cursor) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::Bang) {
        return Ok(Formula::not(unary(t, cur)?));
    }
    if cur.eat(&Tok::LParen) {
        let f = implication(t, cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    let col = cur.col();
    let name = cur.ident()?;
    match name.as_str() {
        "true" => Ok(Formula::True),
        "false" => Ok(Formula::False),
        _ => match t.get(&name) {
            Some(Var::START) => Err(cur_error(cur, col, "`start` is reserved")),
            Some(v) => Ok(Formula::Atom(v)),
            None => Err(cur_error(cur, col, format!("unknown variable `{name}`"))),
        },
    }
}

fn cur_error(cur: &Cursor, col: usize, msg: impl Into<String>) -> ParseError {
    let mut e = cur.error(msg);
    e.column = col;
    e
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Vars,
    Init,
    Constraints,
    User,
    Rules,
}

/// A section line: line number, column and content.
type Entry<'a> = (usize, usize, &'a str);

/// Parses the sectioned text format.
pub fn parse_spec_text(src: &str) -> Result<Specification, ParseError> {
    let mut sections: Vec<(Section, Vec<Entry>)> = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line_no = k + 1;
        let content = raw.split('#').next().unwrap();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let sec = match name.trim() {
                "vars" => Section::Vars,
                "init" => Section::Init,
                "constraints" => Section::Constraints,
                "user" => Section::User,
                "rules" => Section::Rules,
                other => {
                    return Err(ParseError::new(line_no, indent + 1, format!("unknown section `{other}`")))
                }
            };
            if sections.iter().any(|(s, _)| *s == sec) {
                return Err(ParseError::new(line_no, indent + 1, format!("section `{}` repeated", name.trim())));
            }
            sections.push((sec, Vec::new()));
            continue;
        }
        match sections.last_mut() {
            Some((_, lines)) => lines.push((line_no, indent + 1, trimmed)),
            None => return Err(ParseError::new(line_no, indent + 1, "content before the first section header")),
        }
    }
    let lines_of = |sec: Section| {
        sections
            .iter()
            .find(|(s, _)| *s == sec)
            .map(|(_, l)| l.clone())
            .unwrap_or_default()
    };

    let mut names = Vec::new();
    let mut first_pos = None;
    for (line, col, text) in lines_of(Section::Vars) {
        first_pos.get_or_insert((line, col));
        names.extend(text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()));
    }
    let (vl, vc) = first_pos.unwrap_or((1, 1));
    let table = VarTable::new(names.iter().copied()).map_err(|e| ParseError::new(vl, vc, e.to_string()))?;

    let mut init_text = String::new();
    let mut init_pos = (1, 1);
    for (k, (line, col, text)) in lines_of(Section::Init).into_iter().enumerate() {
        if k == 0 {
            init_pos = (line, col);
        }
        init_text.push(' ');
        init_text.push_str(text);
    }
    let initial =
        State::parse(&table, &init_text).map_err(|e| ParseError::new(init_pos.0, init_pos.1, e.to_string()))?;

    let mut constraints = Vec::new();
    for (line, col, text) in lines_of(Section::Constraints) {
        constraints.push(parse_formula_at(&table, text, line, col)?);
    }

    let mut transitions = Vec::new();
    for (sec, kind) in [(Section::User, TransitionKind::User), (Section::Rules, TransitionKind::Rule)] {
        for (line, col, text) in lines_of(sec) {
            transitions.push(parse_transition_line(&table, kind, text, line, col)?);
        }
    }
    Specification::new(table, initial, constraints, transitions).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

fn parse_transition_line(
    table: &VarTable,
    kind: TransitionKind,
    text: &str,
    line: usize,
    col: usize,
) -> Result<Transition, ParseError> {
    let colon = text
        .find(':')
        .ok_or_else(|| ParseError::new(line, col, "expected `INDEX: CONDITION ~> EFFECT`"))?;
    let index: u32 = text[..colon]
        .trim()
        .parse()
        .map_err(|_| ParseError::new(line, col, format!("invalid transition index `{}`", text[..colon].trim())))?;
    let rest = &text[colon + 1..];
    let arrow = rest
        .rfind("~>")
        .ok_or_else(|| ParseError::new(line, col + colon + 1, "missing `~>`"))?;
    let cond_col = col + colon + 1;
    let condition = parse_formula_at(table, &rest[..arrow], line, cond_col)?;
    let effect = State::parse(table, &rest[arrow + 2..])
        .map_err(|e| ParseError::new(line, cond_col + arrow + 2, e.to_string()))?;
    Ok(Transition {
        index,
        kind,
        condition,
        effect,
    })
}

fn lits_text(table: &VarTable, s: &State, sep: &str) -> String {
    s.lits()
        .iter()
        .map(|l| table.display_lit(*l).to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Prints a specification in the text format. Re-parsing the output gives
/// back an equal specification.
pub fn print_spec_text(spec: &Specification) -> String {
    let t = spec.vars();
    let mut out = String::new();
    out.push_str("[vars]\n");
    let names: Vec<&str> = t.user_vars().map(|v| t.name(v)).collect();
    if !names.is_empty() {
        let _ = writeln!(out, "{}", names.join(" "));
    }
    out.push_str("\n[init]\n");
    if !spec.initial().is_empty() {
        let _ = writeln!(out, "{}", lits_text(t, spec.initial(), " "));
    }
    out.push_str("\n[constraints]\n");
    for c in spec.constraints() {
        let _ = writeln!(out, "{}", c.display(t));
    }
    for (header, kind) in [("user", TransitionKind::User), ("rules", TransitionKind::Rule)] {
        let _ = write!(out, "\n[{header}]\n");
        for tr in spec.transitions().iter().filter(|tr| tr.kind == kind) {
            let effect = lits_text(t, &tr.effect, ", ");
            let _ = writeln!(out, "{}: {} ~> {}", tr.index, tr.condition.display(t), effect);
        }
    }
    out
}

/// JSON document form of a raw specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub vars: Vec<String>,
    #[serde(default)]
    pub init: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub user: Vec<TransitionDocument>,
    #[serde(default)]
    pub rules: Vec<TransitionDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDocument {
    pub index: u32,
    #[serde(rename = "if")]
    pub condition: String,
    #[serde(rename = "then", default)]
    pub effect: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl SpecDocument {
    pub fn from_spec(spec: &Specification) -> SpecDocument {
        let t = spec.vars();
        let lits = |s: &State| s.lits().iter().map(|l| t.display_lit(*l).to_string()).collect();
        let trs = |kind| {
            spec.transitions()
                .iter()
                .filter(|tr| tr.kind == kind)
                .map(|tr| TransitionDocument {
                    index: tr.index,
                    condition: tr.condition.display(t).to_string(),
                    effect: lits(&tr.effect),
                    comment: None,
                })
                .collect()
        };
        SpecDocument {
            comment: None,
            vars: t.user_vars().map(|v| t.name(v).to_string()).collect(),
            init: lits(spec.initial()),
            constraints: spec.constraints().iter().map(|c| c.display(t).to_string()).collect(),
            user: trs(TransitionKind::User),
            rules: trs(TransitionKind::Rule),
        }
    }

    pub fn to_spec(&self) -> Result<Specification, LoadError> {
        let field = |path: String, e: ParseError| LoadError::Parse(ParseError::new(e.line, e.column, format!("{path}: {}", e.message)));
        let table = VarTable::new(self.vars.iter().cloned())?;
        let initial = State::parse(&table, &self.init.join(" "))?;
        let mut constraints = Vec::new();
        for (k, c) in self.constraints.iter().enumerate() {
            constraints.push(parse_formula(&table, c).map_err(|e| field(format!("constraints[{k}]"), e))?);
        }
        let mut transitions = Vec::new();
        for (name, kind, list) in [("user", TransitionKind::User, &self.user), ("rules", TransitionKind::Rule, &self.rules)] {
            for (k, tr) in list.iter().enumerate() {
                let condition =
                    parse_formula(&table, &tr.condition).map_err(|e| field(format!("{name}[{k}].if"), e))?;
                let effect = State::parse(&table, &tr.effect.join(" "))?;
                transitions.push(Transition {
                    index: tr.index,
                    kind,
                    condition,
                    effect,
                });
            }
        }
        Ok(Specification::new(table, initial, constraints, transitions)?)
    }
}

pub fn parse_spec_json(src: &str) -> Result<Specification, LoadError> {
    let doc: SpecDocument = serde_json::from_str(src)?;
    doc.to_spec()
}

pub fn print_spec_json(spec: &Specification) -> String {
    let mut s = serde_json::to_string_pretty(&SpecDocument::from_spec(spec)).expect("spec document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE4: &str = "\
# the running four-variable example
[vars]
A B C D
[init]
!A !B
[constraints]
B -> C
[user]
1: !A ~> A, B
[rules]
2: C ~> D
";

    #[test]
    fn parses_sections() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        assert_eq!(spec.vars().len(), 5);
        assert_eq!(spec.initial().len(), 2);
        assert_eq!(spec.constraints().len(), 1);
        assert_eq!(spec.users().count(), 1);
        assert_eq!(spec.rules().next().unwrap().index, 2);
    }

    #[test]
    fn text_round_trip() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let printed = print_spec_text(&spec);
        let again = parse_spec_text(&printed).unwrap();
        assert_eq!(spec, again);
        assert_eq!(printed, print_spec_text(&again));
    }

    #[test]
    fn json_round_trip() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        assert_eq!(parse_spec_json(&print_spec_json(&spec)).unwrap(), spec);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let err = parse_spec_text("[vars]\nA\n[rules]\n1: A && Q ~> A\n").unwrap_err();
        assert_eq!((err.line, err.column), (4, 9));
        assert!(err.message.contains("unknown variable `Q`"));

        let err = parse_spec_text("[vars]\nA\n[user]\n1: A ~> A\n[rules]\n1: A ~> !A\n").unwrap_err();
        assert!(err.message.contains("index 1"));

        let err = parse_spec_text("[vars]\nA\n[rules]\n1: A ~> A !A\n").unwrap_err();
        assert!(err.message.contains("both"));
    }

    #[test]
    fn start_is_reserved() {
        assert!(parse_spec_text("[vars]\nstart\n").is_err());
        let err = parse_spec_text("[vars]\nA\n[constraints]\nstart\n").unwrap_err();
        assert!(err.message.contains("reserved"));
    }

    #[test]
    fn implication_is_right_associative() {
        let t = VarTable::new(["A", "B", "C"]).unwrap();
        let f = parse_formula(&t, "A -> B -> C").unwrap();
        let g = parse_formula(&t, "A -> (B -> C)").unwrap();
        assert_eq!(f, g);
        assert_ne!(f, parse_formula(&t, "(A -> B) -> C").unwrap());
    }
}
