//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula := quant | or ;  quant := ("E"|"A") IDENT "." formula ;
//! or := and ("|" and)* ;  and := lit ("&" lit)* ;
//! lit := "!" lit | "(" formula ")" | quant | atom ;
//! atom := term "==" term | IDENT "(" [term ("," term)*] ")" ;
//! term := IDENT | IDENT "(" term ("," term)* ")" ;
//! ```
//!
//! A quantifier in literal position still scopes to the end of the enclosing
//! parenthesis or input. `#` starts a comment that runs to the end of the line.

use super::{Formula, TypedFormula};
use crate::algebra::{Signature, Term, VarContext};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    EqEq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push((Tok::LParen, pos));
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push((Tok::RParen, pos));
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push((Tok::Comma, pos));
                advance(1, &mut i, &mut col);
            }
            '.' => {
                out.push((Tok::Dot, pos));
                advance(1, &mut i, &mut col);
            }
            '!' => {
                out.push((Tok::Bang, pos));
                advance(1, &mut i, &mut col);
            }
            '&' => {
                out.push((Tok::Amp, pos));
                advance(1, &mut i, &mut col);
            }
            '|' => {
                out.push((Tok::Pipe, pos));
                advance(1, &mut i, &mut col);
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::EqEq, pos));
                advance(2, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    ctx: &'a VarContext,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let p = self.pos();
        Error::Parse {
            line: p.line,
            column: p.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn at_quantifier(&self) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == "E" || q == "A")
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Dot
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.or()
        }
    }

    fn quant(&mut self) -> Result<Formula> {
        let universal = matches!(self.bump(), Tok::Ident(q) if q == "A");
        let var_pos = self.pos();
        let Tok::Ident(var) = self.bump() else {
            unreachable!("checked by at_quantifier")
        };
        if !self.ctx.contains(&var) {
            return Err(Error::Parse {
                line: var_pos.line,
                column: var_pos.column,
                message: format!("quantified variable `{var}` is not in the context"),
            });
        }
        self.expect(Tok::Dot)?;
        let body = self.formula()?;
        Ok(if universal {
            Formula::forall(&var, body)
        } else {
            Formula::exists(&var, body)
        })
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.lit()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.lit()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn lit(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.lit()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(_) if self.at_quantifier() => self.quant(),
            Tok::Ident(_) => self.atom(),
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let start = self.pos();
        let Tok::Ident(name) = self.peek().clone() else {
            unreachable!("caller checked for an identifier")
        };
        if self.sig.rel(&name).is_some() && *self.peek_at(1) == Tok::LParen {
            self.bump();
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                args.push(self.term()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen)?;
            if *self.peek() == Tok::EqEq {
                return Err(Error::Parse {
                    line: start.line,
                    column: start.column,
                    message: format!("relation `{name}` used as a term"),
                });
            }
            return Ok(Formula::Rel(name, args));
        }
        if self.sig.rel(&name).is_none() && self.sig.op(&name).is_none() && *self.peek_at(1) == Tok::LParen {
            return Err(Error::Parse {
                line: start.line,
                column: start.column,
                message: format!("unknown relation or operation `{name}`"),
            });
        }
        let lhs = self.term()?;
        self.expect(Tok::EqEq)?;
        let rhs = self.term()?;
        Ok(Formula::Equal(lhs, rhs))
    }

    fn term(&mut self) -> Result<Term> {
        let start = self.pos();
        let name = match self.bump() {
            Tok::Ident(n) => n,
            other => {
                return Err(Error::Parse {
                    line: start.line,
                    column: start.column,
                    message: format!("expected a term, found {}", other.describe()),
                })
            }
        };
        let at = |message: String| Error::Parse {
            line: start.line,
            column: start.column,
            message,
        };
        if self.sig.rel(&name).is_some() && self.sig.op(&name).is_none() && !self.ctx.contains(&name) {
            return Err(at(format!("relation `{name}` used as a term")));
        }
        if *self.peek() == Tok::LParen {
            if self.sig.op(&name).is_none() {
                return Err(at(format!("unknown operation `{name}`")));
            }
            self.bump();
            let mut args = vec![self.term()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
            return Ok(Term::App(name, args));
        }
        if self.ctx.contains(&name) {
            Ok(Term::Var(name))
        } else if matches!(self.sig.op(&name), Some((_, d)) if d.args.is_empty()) {
            Ok(Term::App(name, Vec::new()))
        } else {
            Err(at(format!("unknown variable or constant `{name}`")))
        }
    }
}

/// Parses `text` as a formula over `context`, then type-checks it.
pub fn parse_formula(text: &str, context: &VarContext, sig: &Signature) -> Result<TypedFormula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        ctx: context,
        sig,
    };
    let body = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    TypedFormula::new(context.clone(), body, sig)
}

/// Parses `text` as a single term over `context` and returns it with its sort.
pub fn parse_term(text: &str, context: &VarContext, sig: &Signature) -> Result<(Term, String)> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        ctx: context,
        sig,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    let sort = t.sort_in(context, sig)?;
    Ok((t, sort))
}
