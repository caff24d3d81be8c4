//! Text grammar for symbols:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | number | '(' expr ')' | atom
//! atom   := id | nlap | grad | div | leray
//!         | xi(i) | xiinv(i) | delta(i,j) | ilap(alpha) | ilap
//! ```
//!
//! Axis and matrix indices are 1-based. Bare `ilap` takes its α from the
//! caller-supplied default.

use super::SymbolExpr;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos] as char;
        let start = pos;
        match c {
            ' ' | '\t' | '\n' => {
                pos += 1;
                continue;
            }
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            ',' => out.push((start, Tok::Comma)),
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            c if c.is_ascii_digit() || c == '.' => {
                while pos < bytes.len() {
                    let ch = bytes[pos] as char;
                    let exp_sign = (ch == '+' || ch == '-')
                        && pos > start
                        && matches!(bytes[pos - 1] as char, 'e' | 'E');
                    if ch.is_ascii_digit() || ch == '.' || ch == 'e' || ch == 'E' || exp_sign {
                        pos += 1;
                    } else {
                        break;
                    }
                }
                let lit = &text[start..pos];
                let v = lit.parse::<f64>().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("bad number '{lit}'"),
                })?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while pos < bytes.len() && (bytes[pos] as char).is_ascii_alphanumeric() {
                    pos += 1;
                }
                out.push((start, Tok::Ident(text[start..pos].to_ascii_lowercase())));
                continue;
            }
            other => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
        pos += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    dim: usize,
    default_alpha: Option<f64>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = lhs + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            lhs = lhs * self.factor()?;
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<SymbolExpr> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                self.at += 1;
                Ok(self.factor()?.scaled(-1.0))
            }
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(SymbolExpr::scalar(v))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                self.atom(&name)
            }
            Some(_) => self.err("expected a symbol"),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.at += 1;
                Ok(if negative { -v } else { v })
            }
            _ => self.err("expected a number"),
        }
    }

    fn index(&mut self, limit: usize, what: &str) -> Result<usize> {
        let pos = self.pos();
        let v = self.number()?;
        if v.fract() != 0.0 || v < 1.0 || v > limit as f64 {
            return Err(Error::Parse {
                pos,
                msg: format!("{what} must be an integer in 1..={limit}"),
            });
        }
        Ok(v as usize - 1)
    }

    fn atom(&mut self, name: &str) -> Result<SymbolExpr> {
        let dim = self.dim;
        match name {
            "id" => Ok(SymbolExpr::Identity),
            "nlap" => Ok(SymbolExpr::NegLaplacian),
            "grad" => Ok(SymbolExpr::Gradient),
            "div" => Ok(SymbolExpr::Divergence),
            "leray" => Ok(SymbolExpr::LerayP),
            "xi" | "xiinv" => {
                self.expect(Tok::LParen, "'('")?;
                let axis = self.index(dim, "axis")?;
                self.expect(Tok::RParen, "')'")?;
                Ok(if name == "xi" {
                    SymbolExpr::Xi(axis)
                } else {
                    SymbolExpr::XiInv(axis)
                })
            }
            "delta" => {
                self.expect(Tok::LParen, "'('")?;
                let i = self.index(dim, "row")?;
                self.expect(Tok::Comma, "','")?;
                let j = self.index(dim, "column")?;
                self.expect(Tok::RParen, "')'")?;
                Ok(SymbolExpr::delta(i, j, dim))
            }
            "ilap" => {
                if self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    let pos = self.pos();
                    let alpha = self.number()?;
                    if alpha < 0.0 {
                        return Err(Error::Parse {
                            pos,
                            msg: "alpha must be >= 0".into(),
                        });
                    }
                    self.expect(Tok::RParen, "')'")?;
                    Ok(SymbolExpr::ImplicitLaplacian(alpha))
                } else if let Some(alpha) = self.default_alpha {
                    Ok(SymbolExpr::ImplicitLaplacian(alpha))
                } else {
                    self.err("ilap needs an alpha argument")
                }
            }
            other => {
                self.at -= 1;
                self.err(format!("unknown symbol '{other}'"))
            }
        }
    }
}

/// Parses a symbol for a `dim`-dimensional grid.
pub fn parse_symbol(text: &str, dim: usize) -> Result<SymbolExpr> {
    parse_symbol_with(text, dim, None)
}

/// As [`parse_symbol`], with a default α for a bare `ilap`.
pub fn parse_symbol_with(text: &str, dim: usize, default_alpha: Option<f64>) -> Result<SymbolExpr> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        dim,
        default_alpha,
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    e.shape(dim)?;
    Ok(e)
}
