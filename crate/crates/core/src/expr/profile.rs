//! Named coefficient functions with declared domains.
//!
//! A [`FunctionProfile`] is a real function of one variable on a closed
//! interval; a [`HolomorphicProfile`] is a complex function of z = x + iy
//! on a closed rectangle, evaluated with complex jets so that the
//! Cauchy-Riemann structure is exact by construction.  Construction
//! validates that the expression and its derivatives are finite on a
//! sample of the declared domain; evaluation outside the domain is an
//! error, with the boundary included.
//!
//! Expression literals are real.  A holomorphic profile therefore carries
//! a constant complex prefactor, so that shapes like i*(2+cos(z)) stay
//! representable without widening the expression grammar.

use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;

/// Number of evenly spaced samples used to validate a profile.
const VALIDATION_SAMPLES: usize = 129;

#[derive(Debug, Clone)]
pub struct FunctionProfile {
    expr: Arc<Expr>,
    var: String,
    domain: Interval,
}

impl FunctionProfile {
    pub fn parse(src: &str, var: &str, domain: Interval) -> Result<Self> {
        let expr = Expr::parse(src, var)?;
        let p = FunctionProfile {
            expr: Arc::new(expr),
            var: var.to_string(),
            domain,
        };
        for x in domain.samples(VALIDATION_SAMPLES) {
            p.jet(x).map_err(|e| Error::DegenerateConstruction {
                what: format!("profile `{src}`: {e}"),
                x,
                y: f64::NAN,
            })?;
        }
        Ok(p)
    }

    pub fn constant(value: f64, domain: Interval) -> Self {
        FunctionProfile {
            expr: Arc::new(Expr::Num(value)),
            var: "x".to_string(),
            domain,
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn to_expression_string(&self) -> String {
        self.expr.print(&self.var)
    }

    /// Value and derivatives through order 3 at `x`.
    pub fn jet(&self, x: f64) -> Result<Jet<f64>> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                y: f64::NAN,
                x_lo: self.domain.lo,
                x_hi: self.domain.hi,
                y_lo: f64::NAN,
                y_hi: f64::NAN,
            });
        }
        Ok(self.expr.eval_jet(Jet::variable(x))?)
    }

    /// Derivatives `[f, f', ...]` up to `order` (at most 3).
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let j = self.jet(x)?;
        let all = [j.v, j.d1, j.d2, j.d3];
        Ok(all[..=order.min(3)].to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct HolomorphicProfile {
    expr: Arc<Expr>,
    var: String,
    domain: Rect,
    factor: Complex64,
}

impl HolomorphicProfile {
    /// Parse with prefactor 1.
    pub fn parse(src: &str, var: &str, domain: Rect) -> Result<Self> {
        Self::parse_scaled(src, var, domain, Complex64::new(1.0, 0.0))
    }

    /// Parse an expression with real literals; the profile value is
    /// `factor * expr(z)`.
    pub fn parse_scaled(src: &str, var: &str, domain: Rect, factor: Complex64) -> Result<Self> {
        let expr = Expr::parse(src, var)?;
        let p = HolomorphicProfile {
            expr: Arc::new(expr),
            var: var.to_string(),
            domain,
            factor,
        };
        for (x, y) in domain.grid(17) {
            p.jet(x, y).map_err(|e| Error::DegenerateConstruction {
                what: format!("holomorphic profile `{src}`: {e}"),
                x,
                y,
            })?;
        }
        Ok(p)
    }

    pub fn constant(value: Complex64, domain: Rect) -> Self {
        HolomorphicProfile {
            expr: Arc::new(Expr::Num(1.0)),
            var: "z".to_string(),
            domain,
            factor: value,
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn factor(&self) -> Complex64 {
        self.factor
    }

    pub fn to_expression_string(&self) -> String {
        self.expr.print(&self.var)
    }

    /// Complex value and z-derivatives through order 3 at z = x + iy.
    pub fn jet(&self, x: f64, y: f64) -> Result<Jet<Complex64>> {
        if !self.domain.contains(x, y) {
            return Err(Error::OutOfDomain {
                x,
                y,
                x_lo: self.domain.x.lo,
                x_hi: self.domain.x.hi,
                y_lo: self.domain.y.lo,
                y_hi: self.domain.y.hi,
            });
        }
        let j = self.expr.eval_jet(Jet::variable(Complex64::new(x, y)))?;
        Ok(Jet {
            v: self.factor * j.v,
            d1: self.factor * j.d1,
            d2: self.factor * j.d2,
            d3: self.factor * j.d3,
        })
    }
}
