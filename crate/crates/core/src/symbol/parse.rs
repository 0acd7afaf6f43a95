//! Recursive-descent parser for the phase-space expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' uint)?
//! base   := 'x' | 'xi' | 'i' | number | '(' expr ')'
//!         | ('sin'|'cos'|'exp') '(' expr ')' | '-' base
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x^2` reads as `(-x)^2`.

use num_complex::Complex;

use super::{Expr, SymbolError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), SymbolError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[self.pos] as char;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == '.' {
            let mut seen_dot = false;
            while self.pos < bytes.len() {
                let d = bytes[self.pos] as char;
                if d.is_ascii_digit() {
                    self.pos += 1;
                } else if d == '.' && !seen_dot {
                    seen_dot = true;
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let text = &self.src[start..self.pos];
            if text == "." {
                return Err(SymbolError::Syntax { pos: start, msg: "lone '.'".into() });
            }
            let v: f64 = text
                .parse()
                .map_err(|_| SymbolError::Syntax { pos: start, msg: format!("bad number '{text}'") })?;
            if !v.is_finite() {
                return Err(SymbolError::Syntax { pos: start, msg: format!("number '{text}' overflows") });
            }
            return Ok((Tok::Num(v, !seen_dot), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while self.pos < bytes.len() {
                let d = bytes[self.pos] as char;
                if d.is_ascii_alphanumeric() || d == '_' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(SymbolError::Syntax { pos: start, msg: format!("unexpected character '{c}'") })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), SymbolError> {
        let (t, p) = self.lex.next()?;
        self.tok = t;
        self.pos = p;
        Ok(())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SymbolError> {
        if self.tok == want {
            self.bump()
        } else {
            Err(SymbolError::Syntax { pos: self.pos, msg: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr, SymbolError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymbolError> {
        let mut lhs = self.factor()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, SymbolError> {
        let base = self.base()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        match self.tok {
            Tok::Num(v, true) if v <= u32::MAX as f64 => {
                self.bump()?;
                Ok(Expr::Pow(Box::new(base), v as u32))
            }
            _ => Err(SymbolError::Syntax { pos: self.pos, msg: "exponent must be an unsigned integer".into() }),
        }
    }

    fn base(&mut self) -> Result<Expr, SymbolError> {
        let pos = self.pos;
        match self.tok.clone() {
            Tok::Num(v, _) => {
                self.bump()?;
                Ok(Expr::real(v))
            }
            Tok::Minus => {
                self.bump()?;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump()?;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "xi" => Ok(Expr::Xi),
                    "i" => Ok(Expr::Const(Complex::new(0.0, 1.0))),
                    "sin" | "cos" | "exp" => {
                        self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                        let arg = Box::new(self.expr()?);
                        self.expect(Tok::RParen, "')'")?;
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            _ => Expr::Exp(arg),
                        })
                    }
                    _ => Err(SymbolError::UnknownIdentifier { name, pos }),
                }
            }
            Tok::End => Err(SymbolError::Syntax { pos, msg: "unexpected end of input".into() }),
            other => Err(SymbolError::Syntax { pos, msg: format!("unexpected token {other:?}") }),
        }
    }
}

/// Parse an expression in `x`, `xi`.
pub fn parse_expr(src: &str) -> Result<Expr, SymbolError> {
    let mut p = Parser { lex: Lexer { src, pos: 0 }, tok: Tok::End, pos: 0 };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(SymbolError::Syntax { pos: p.pos, msg: "trailing input".into() });
    }
    Ok(e)
}
