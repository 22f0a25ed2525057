use super::lexer::{lex, Spanned, Tok};
use super::{BinOp, Expr, Func, ParseError, ParseErrorKind};

pub(super) fn parse(src: &str, var: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
        var,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(ParseError {
            kind: ParseErrorKind::TrailingInput,
            offset: p.toks[p.pos].offset,
        });
    }
    Ok(e)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    end: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |s| s.offset)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(ParseError {
                kind: ParseErrorKind::Expected(what),
                offset: self.offset(),
            }),
            None => Err(ParseError {
                kind: ParseErrorKind::UnexpectedEnd,
                offset: self.end,
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            let caret_at = self.offset();
            self.pos += 1;
            let exponent = self.unary()?;
            if exponent.contains_var() {
                return Err(ParseError {
                    kind: ParseErrorKind::NonConstantExponent,
                    offset: caret_at,
                });
            }
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump().map(|s| &s.tok) {
            Some(Tok::Num(v)) => Ok(Expr::Num(*v)),
            Some(Tok::Ident(name)) => {
                if name == self.var {
                    return Ok(Expr::Var);
                }
                if let Some(f) = Func::from_name(name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                // Short names read as a stray variable; everything else is
                // simply unknown.
                let kind = if name.len() <= 2 {
                    ParseErrorKind::WrongVariable {
                        found: name.clone(),
                        expected: self.var.to_string(),
                    }
                } else {
                    ParseErrorKind::UnknownIdentifier(name.clone())
                };
                Err(ParseError { kind, offset })
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(_) => Err(ParseError {
                kind: ParseErrorKind::Expected("a number, variable, function, or `(`"),
                offset,
            }),
            None => Err(ParseError {
                kind: ParseErrorKind::UnexpectedEnd,
                offset: self.end,
            }),
        }
    }
}
