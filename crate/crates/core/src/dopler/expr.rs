//! Model expressions: parsing, type checking and printing.
//!
//! ```text
//! expr    := or
//! or      := and ("||" and)*
//! and     := unary ("&&" unary)*
//! unary   := "!" unary | primary
//! primary := "(" expr ")" | ident | ident "==" ident
//!          | "isTaken(" ident ")" | "containsOnly(" ident "," ident ")"
//!          | "true" | "false"
//! ```
//!
//! A bang written directly before a bare boolean decision means "taken and
//! false"; any other negation is propositional.

use crate::error::ParseError;
use crate::lexer::{tokenize, Cursor, Tok};

/// What an identifier may refer to.
pub trait Names {
    fn decision(&self, name: &str) -> Option<(usize, Option<&[String]>)>;
    fn asset(&self, name: &str) -> Option<usize>;
}

/// A typed expression; decisions, options and assets by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    True,
    False,
    /// Boolean decision taken with value true.
    Yes(usize),
    /// Boolean decision taken with value false.
    No(usize),
    /// Enumeration decision has option selected.
    Selected(usize, usize),
    IsTaken(usize),
    ContainsOnly(usize, usize),
    Asset(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

pub fn parse_expr(names: &impl Names, src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src, 1, 1)?;
    let mut c = Cursor::new(&toks, 1, src.chars().count() + 1);
    let e = or(names, &mut c)?;
    c.finish()?;
    Ok(e)
}

fn or(names: &impl Names, c: &mut Cursor) -> Result<Expr, ParseError> {
    let mut parts = vec![and(names, c)?];
    while c.eat(&Tok::OrOr) {
        parts.push(and(names, c)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Or(parts) })
}

fn and(names: &impl Names, c: &mut Cursor) -> Result<Expr, ParseError> {
    let mut parts = vec![unary(names, c)?];
    while c.eat(&Tok::AndAnd) {
        parts.push(unary(names, c)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::And(parts) })
}

fn unary(names: &impl Names, c: &mut Cursor) -> Result<Expr, ParseError> {
    if !c.eat(&Tok::Bang) {
        return primary(names, c);
    }
    if let Some(Tok::Ident(id)) = c.peek() {
        let bare = !matches!(c.peek2(), Some(Tok::EqEq) | Some(Tok::LParen));
        if bare {
            if let Some((d, None)) = names.decision(id) {
                c.advance();
                return Ok(Expr::No(d));
            }
        }
    }
    Ok(Expr::Not(Box::new(unary(names, c)?)))
}

fn primary(names: &impl Names, c: &mut Cursor) -> Result<Expr, ParseError> {
    let col = c.col();
    if c.eat(&Tok::LParen) {
        let e = or(names, c)?;
        c.expect(&Tok::RParen)?;
        return Ok(e);
    }
    let id = c.ident()?;
    match id.as_str() {
        "true" => return Ok(Expr::True),
        "false" => return Ok(Expr::False),
        _ => {}
    }
    if c.peek() == Some(&Tok::LParen) && (id == "isTaken" || id == "containsOnly") {
        c.advance();
        let dcol = c.col();
        let d = c.ident()?;
        let (di, opts) = names
            .decision(&d)
            .ok_or_else(|| ParseError::new(1, dcol, format!("unknown decision `{d}`")))?;
        let e = if id == "isTaken" {
            Expr::IsTaken(di)
        } else {
            let Some(opts) = opts else {
                return Err(ParseError::new(
                    1,
                    dcol,
                    format!("containsOnly requires an enumeration decision, `{d}` is boolean"),
                ));
            };
            c.expect(&Tok::Comma)?;
            let ocol = c.col();
            let o = c.ident()?;
            let oi = option_index(opts, &o).ok_or_else(|| {
                ParseError::new(1, ocol, format!("`{o}` is not an option of `{d}`"))
            })?;
            Expr::ContainsOnly(di, oi)
        };
        c.expect(&Tok::RParen)?;
        return Ok(e);
    }
    if c.eat(&Tok::EqEq) {
        let (di, opts) = names
            .decision(&id)
            .ok_or_else(|| ParseError::new(1, col, format!("unknown decision `{id}`")))?;
        let vcol = c.col();
        let v = c.ident()?;
        return match opts {
            None => match v.as_str() {
                "true" => Ok(Expr::Yes(di)),
                "false" => Ok(Expr::No(di)),
                _ => Err(ParseError::new(1, vcol, format!("`{id}` is boolean; compare with true or false"))),
            },
            Some(opts) => option_index(opts, &v)
                .map(|oi| Expr::Selected(di, oi))
                .ok_or_else(|| ParseError::new(1, vcol, format!("`{v}` is not an option of `{id}`"))),
        };
    }
    if let Some((di, opts)) = names.decision(&id) {
        return match opts {
            None => Ok(Expr::Yes(di)),
            Some(_) => Err(ParseError::new(
                1,
                col,
                format!("enumeration `{id}` cannot be used as a condition; use `{id} == option` or isTaken({id})"),
            )),
        };
    }
    if let Some(a) = names.asset(&id) {
        return Ok(Expr::Asset(a));
    }
    Err(ParseError::new(1, col, format!("unknown decision or asset `{id}`")))
}

fn option_index(opts: &[String], o: &str) -> Option<usize> {
    opts.iter().position(|x| x == o)
}

/// An action: `d = true|false` or `setValue(d, o)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    SetBool(usize, bool),
    SetValue(usize, usize),
}

pub fn parse_action(names: &impl Names, src: &str) -> Result<Action, ParseError> {
    let toks = tokenize(src, 1, 1)?;
    let mut c = Cursor::new(&toks, 1, src.chars().count() + 1);
    let col = c.col();
    let id = c.ident()?;
    let action = if id == "setValue" && c.peek() == Some(&Tok::LParen) {
        c.advance();
        let dcol = c.col();
        let d = c.ident()?;
        let (di, opts) = names
            .decision(&d)
            .ok_or_else(|| ParseError::new(1, dcol, format!("unknown decision `{d}`")))?;
        let Some(opts) = opts else {
            return Err(ParseError::new(1, dcol, format!("setValue requires an enumeration decision, `{d}` is boolean")));
        };
        c.expect(&Tok::Comma)?;
        let ocol = c.col();
        let o = c.ident()?;
        let oi = option_index(opts, &o).ok_or_else(|| ParseError::new(1, ocol, format!("`{o}` is not an option of `{d}`")))?;
        c.expect(&Tok::RParen)?;
        Action::SetValue(di, oi)
    } else {
        let (di, opts) = names
            .decision(&id)
            .ok_or_else(|| ParseError::new(1, col, format!("unknown decision `{id}`")))?;
        if opts.is_some() {
            return Err(ParseError::new(1, col, format!("assign enumeration `{id}` with setValue({id}, option)")));
        }
        c.expect(&Tok::Eq)?;
        let vcol = c.col();
        match c.ident()?.as_str() {
            "true" => Action::SetBool(di, true),
            "false" => Action::SetBool(di, false),
            v => return Err(ParseError::new(1, vcol, format!("expected true or false, found `{v}`"))),
        }
    };
    c.finish()?;
    Ok(action)
}
