//! A small expression language for coefficient profiles.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          -- right associative
//! atom   := number | variable | func '(' expr ')' | '(' expr ')'
//! func   := sin cos tan exp log sqrt sinh cosh
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`.  Exponents
//! must be constant subexpressions; an exponent mentioning the free
//! variable is rejected at parse time.  Exactly one free variable symbol
//! is allowed per expression and is fixed by the caller.
//!
//! Printing is precedence-aware and structural: `parse(print(e)) == e`
//! for every representable tree, with numeric literals rendered through
//! the shortest round-trip `f64` formatting.

mod lexer;
mod parser;
pub mod profile;

pub use profile::{FunctionProfile, HolomorphicProfile};

use thiserror::Error;

use crate::jet::{Jet, JetScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("malformed number literal")]
    MalformedNumber,
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unexpected variable `{found}` (the free variable is `{expected}`)")]
    WrongVariable { found: String, expected: String },
    #[error("exponent must be a constant expression")]
    NonConstantExponent,
    #[error("unexpected trailing input")]
    TrailingInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    /// A pole, a log/sqrt outside its branch, or overflow: some node of
    /// the expression produced a non-finite value or derivative.
    #[error("non-finite value during expression evaluation")]
    NonFinite,
}

impl Expr {
    /// Parse `src` with `var` as the only admissible free variable.
    pub fn parse(src: &str, var: &str) -> Result<Expr, ParseError> {
        parser::parse(src, var)
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(e) => e.contains_var(),
            Expr::Binary(_, l, r) => l.contains_var() || r.contains_var(),
            Expr::Call(_, a) => a.contains_var(),
        }
    }

    /// Evaluate on a jet; every node must come out finite.
    pub fn eval_jet<T: JetScalar>(&self, x: Jet<T>) -> Result<Jet<T>, EvalError> {
        let r = match self {
            Expr::Num(v) => Jet::constant(T::from_f64(*v)),
            Expr::Var => x,
            Expr::Neg(e) => -e.eval_jet(x)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_jet(x)?;
                let b = r.eval_jet(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow_jet(a, r),
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval_jet(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                }
            }
        };
        if r.is_finite() {
            Ok(r)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate the constant value of a variable-free subexpression.
    fn const_value(&self) -> f64 {
        debug_assert!(!self.contains_var());
        match self.eval_jet(Jet::constant(0.0_f64)) {
            Ok(j) => j.v,
            Err(_) => f64::NAN,
        }
    }

    /// Render with the given variable name; inverse of [`Expr::parse`].
    pub fn print(&self, var: &str) -> String {
        let mut s = String::new();
        self.write(var, &mut s);
        s
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }

    fn write(&self, var: &str, out: &mut String) {
        match self {
            Expr::Num(v) => out.push_str(&format!("{v}")),
            Expr::Var => out.push_str(var),
            Expr::Neg(e) => {
                out.push('-');
                self.write_child(e, e.prec() >= 3, var, out);
            }
            Expr::Binary(op, l, r) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // right associative; the exponent slot admits unary
                    self.write_child(l, l.prec() > p, var, out);
                    out.push_str(sym);
                    self.write_child(r, r.prec() >= 3, var, out);
                } else {
                    self.write_child(l, l.prec() >= p, var, out);
                    out.push_str(sym);
                    self.write_child(r, r.prec() > p, var, out);
                }
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(var, out);
                out.push(')');
            }
        }
    }

    fn write_child(&self, child: &Expr, plain: bool, var: &str, out: &mut String) {
        if plain {
            child.write(var, out);
        } else {
            out.push('(');
            child.write(var, out);
            out.push(')');
        }
    }
}

/// `a ^ e` where `e` is guaranteed variable-free by the parser.  Integer
/// exponents use the direct power rule (valid for negative bases); other
/// exponents go through the principal branch.
fn pow_jet<T: JetScalar>(a: Jet<T>, e: &Expr) -> Jet<T> {
    let c = e.const_value();
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        a.powi(c as i32)
    } else {
        a.powf(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        Expr::parse(src, "x").unwrap()
    }

    fn eval(src: &str, x: f64) -> Jet<f64> {
        p(src).eval_jet(Jet::variable(x)).unwrap()
    }

    #[test]
    fn parse_example_profile() {
        let e = p("2+sin(x)");
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Num(2.0)),
                Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var)))
            )
        );
    }

    #[test]
    fn cube_derivatives() {
        let j = eval("x^3", 2.0);
        assert_eq!(j.v, 8.0);
        assert_eq!(j.d1, 12.0);
        assert_eq!(j.d2, 12.0);
    }

    #[test]
    fn pole_is_an_error_not_nan() {
        let e = p("1/(x-1)");
        assert_eq!(e.eval_jet(Jet::variable(1.0)), Err(EvalError::NonFinite));
        assert!(e.eval_jet(Jet::variable(2.0)).is_ok());
    }

    #[test]
    fn unary_minus_binds_looser_than_pow() {
        let j = eval("-x^2", 3.0);
        assert_eq!(j.v, -9.0);
        assert_eq!(j.d1, -6.0);
    }

    #[test]
    fn pow_right_associative() {
        let j = eval("2^3^2", 0.0);
        assert_eq!(j.v, 512.0);
    }

    #[test]
    fn variable_exponent_rejected() {
        let err = Expr::parse("2^x", "x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);
        assert_eq!(err.offset, 1);
        let err = Expr::parse("x^(1+x)", "x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);
    }

    #[test]
    fn constant_exponent_subexpression_allowed() {
        let j = eval("x^(1+1)", 3.0);
        assert_eq!(j.v, 9.0);
        assert_eq!(j.d1, 6.0);
    }

    #[test]
    fn negative_base_integer_exponent() {
        let j = eval("(x-2)^2", 0.5);
        assert_eq!(j.v, 2.25);
        assert_eq!(j.d1, -3.0);
    }

    #[test]
    fn syntax_error_offset() {
        let err = Expr::parse("2+*3", "x").unwrap_err();
        assert_eq!(err.offset, 2);
        let err = Expr::parse("sin(x", "x").unwrap_err();
        assert_eq!(err.offset, 5);
        let err = Expr::parse("", "x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn unknown_and_wrong_identifiers() {
        let err = Expr::parse("2+foo(x)", "x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(err.offset, 2);
        let err = Expr::parse("x+y", "x").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::WrongVariable {
                found: "y".into(),
                expected: "x".into()
            }
        );
    }

    #[test]
    fn print_round_trips_structurally() {
        for src in [
            "2+sin(x)",
            "-x^2",
            "2^3^2",
            "1/(x-1)",
            "x*(x+1)*(x+2)",
            "sqrt(exp(x))-cosh(x)/sinh(x)",
            "x^-2",
            "-(x+1)",
            "0.1+x*1e-7",
        ] {
            let e = p(src);
            let printed = e.print("x");
            assert_eq!(p(&printed), e, "round trip through `{printed}`");
        }
    }

    #[test]
    fn structural_printing_keeps_tree_shape() {
        // a+(b+c) must not print as a+b+c
        let e = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Var),
            Box::new(Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Num(2.0)),
            )),
        );
        assert_eq!(e.print("x"), "x+(1+2)");
        assert_eq!(p("x+(1+2)"), e);
    }

    #[test]
    fn whitespace_ignored() {
        assert_eq!(p(" 2 + sin( x ) "), p("2+sin(x)"));
    }
}
