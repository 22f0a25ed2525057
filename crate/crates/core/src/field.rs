//! Plane fields evaluated with second-order jets.
//!
//! A [`ScalarField`] wraps a closure producing a [`Jet2`] so that metric
//! components, quadratic-form coefficients, and potentials expose exact
//! first and second partials everywhere.  [`MetricField`] additionally
//! enforces nondegeneracy with a determinant guard on every evaluation.

use std::fmt;
use std::sync::Arc;

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::expr::FunctionProfile;
use crate::jet2::Jet2;

type FieldFn = dyn Fn(f64, f64) -> Result<Jet2> + Send + Sync;

#[derive(Clone)]
pub struct ScalarField {
    f: Arc<FieldFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

impl ScalarField {
    pub fn new(f: impl Fn(f64, f64) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_, _| Ok(Jet2::constant(c)))
    }

    /// Lift a single-variable profile as a field depending on x only.
    pub fn of_x(p: &FunctionProfile) -> Self {
        let p = p.clone();
        ScalarField::new(move |x, _| Ok(Jet2::from_x_jet(p.jet(x)?)))
    }

    /// Lift a single-variable profile as a field depending on y only.
    pub fn of_y(p: &FunctionProfile) -> Self {
        let p = p.clone();
        ScalarField::new(move |_, y| Ok(Jet2::from_y_jet(p.jet(y)?)))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        let j = (self.f)(x, y)?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::Eval(crate::expr::EvalError::NonFinite))
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.clone();
        ScalarField::new(move |x, y| Ok(inner.eval(x, y)?.scale(c)))
    }

    /// Pointwise combination of two fields.
    pub fn zip(
        &self,
        other: &ScalarField,
        op: impl Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        let a = self.clone();
        let b = other.clone();
        ScalarField::new(move |x, y| Ok(op(a.eval(x, y)?, b.eval(x, y)?)))
    }
}

/// Symmetric 2x2 matrix of jets (components xx, xy = yx, yy).
#[derive(Debug, Clone, Copy)]
pub struct SymJet2 {
    pub xx: Jet2,
    pub xy: Jet2,
    pub yy: Jet2,
}

impl SymJet2 {
    pub fn det(&self) -> Jet2 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Inverse of the matrix, carrying derivatives through.
    pub fn inverse(&self) -> SymJet2 {
        let det = self.det();
        SymJet2 {
            xx: self.yy / det,
            xy: -(self.xy / det),
            yy: self.xx / det,
        }
    }

    /// Quadratic form value sum_ij M^{ij} p_i p_j for a covector (px, py).
    pub fn quad(&self, px: f64, py: f64) -> Jet2 {
        self.xx.scale(px * px) + self.xy.scale(2.0 * px * py) + self.yy.scale(py * py)
    }

    pub fn values(&self) -> [f64; 3] {
        [self.xx.v, self.xy.v, self.yy.v]
    }

    pub fn frobenius(&self) -> f64 {
        (self.xx.v * self.xx.v + 2.0 * self.xy.v * self.xy.v + self.yy.v * self.yy.v).sqrt()
    }
}

/// Sign of det g for a nondegenerate 2-D metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// det g < 0: signature (+,-).
    Indefinite,
    /// det g > 0: definite (both signs collapse to one label in 2-D
    /// because only the connection is consumed downstream).
    Definite,
}

/// A 2x2 symmetric metric field on a rectangle.
///
/// Natural systems require indefinite signature (+,-); geodesically
/// equivalent partners constructed from an integral may come out definite,
/// so the signature is recorded rather than constrained.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
    domain: Rect,
    signature: Signature,
}

/// Relative determinant floor: |det g| must exceed this times the squared
/// Frobenius norm of g at every evaluation.
const DET_GUARD: f64 = 1e-12;

impl MetricField {
    /// Build and validate on the 64x64-plus-random sample set: components
    /// finite, determinant sign constant and away from zero.
    pub fn new(xx: ScalarField, xy: ScalarField, yy: ScalarField, domain: Rect) -> Result<Self> {
        let m = MetricField {
            xx,
            xy,
            yy,
            domain,
            signature: Signature::Indefinite,
        };
        let (cx, cy) = domain.center();
        let det0 = m.eval_unchecked(cx, cy)?.det().v;
        let signature = if det0 < 0.0 {
            Signature::Indefinite
        } else {
            Signature::Definite
        };
        for (x, y) in domain.validation_samples() {
            let g = m.eval_unchecked(x, y)?;
            let det = g.det().v;
            let scale = g.frobenius().powi(2).max(f64::MIN_POSITIVE);
            if det.abs() <= DET_GUARD * scale || (det < 0.0) != (det0 < 0.0) {
                return Err(Error::DegenerateConstruction {
                    what: "metric (determinant vanishes or changes sign)".to_string(),
                    x,
                    y,
                });
            }
        }
        Ok(MetricField { signature, ..m })
    }

    fn eval_unchecked(&self, x: f64, y: f64) -> Result<SymJet2> {
        Ok(SymJet2 {
            xx: self.xx.eval(x, y)?,
            xy: self.xy.eval(x, y)?,
            yy: self.yy.eval(x, y)?,
        })
    }

    /// Components with derivatives; errors outside the rectangle or where
    /// the determinant guard trips.
    pub fn eval(&self, x: f64, y: f64) -> Result<SymJet2> {
        if !self.domain.contains(x, y) {
            return Err(self.out_of_domain(x, y));
        }
        let g = self.eval_unchecked(x, y)?;
        let det = g.det().v;
        let scale = g.frobenius().powi(2).max(f64::MIN_POSITIVE);
        if det.abs() <= DET_GUARD * scale {
            return Err(Error::DegenerateMetric { x, y, det });
        }
        Ok(g)
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    fn out_of_domain(&self, x: f64, y: f64) -> Error {
        Error::OutOfDomain {
            x,
            y,
            x_lo: self.domain.x.lo,
            x_hi: self.domain.x.hi,
            y_lo: self.domain.y.lo,
            y_hi: self.domain.y.hi,
        }
    }
}

/// Contravariant symmetric coefficient field F^{ij} of a function
/// quadratic in momenta; symmetry F^{xy} = F^{yx} holds by construction.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl QuadraticForm {
    pub fn new(xx: ScalarField, xy: ScalarField, yy: ScalarField) -> Self {
        QuadraticForm { xx, xy, yy }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<SymJet2> {
        Ok(SymJet2 {
            xx: self.xx.eval(x, y)?,
            xy: self.xy.eval(x, y)?,
            yy: self.yy.eval(x, y)?,
        })
    }
}
