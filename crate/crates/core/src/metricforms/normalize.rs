//! Coordinate normalization for one-variable quadratic coefficients.
//!
//! A term a(x) p_x^2 with a of constant sign can be brought to
//! sign(a) p^2 by the reparametrization x_new(t) = integral from the
//! anchor to t of |a(s)|^{-1/2} ds: momenta pick up the factor
//! dx_new/dx, so a transforms by |a|^{-1}.  The map is strictly
//! increasing, hence invertible on the profile's interval.

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::expr::FunctionProfile;
use crate::quad;
use crate::roots;

const QUAD_TOL: f64 = 1e-12;

/// A strictly increasing reparametrization of a profile's interval.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    a: FunctionProfile,
    anchor: f64,
    sign: f64,
}

impl CoordinateMap {
    /// Original interval of the coordinate being replaced.
    pub fn source(&self) -> Interval {
        self.a.domain()
    }

    /// Image interval of [`CoordinateMap::forward`].
    pub fn image(&self) -> Result<Interval> {
        let d = self.source();
        Interval::new(self.forward(d.lo)?, self.forward(d.hi)?)
    }

    /// Sign of the coefficient (the normalized value it maps to).
    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// x_new(t): quadrature of |a|^{-1/2} from the anchor.
    pub fn forward(&self, t: f64) -> Result<f64> {
        let a = &self.a;
        let r = quad::integrate(
            |s| Ok(a.jet(s)?.v.abs().sqrt().recip()),
            self.anchor,
            t,
            QUAD_TOL,
        )?;
        Ok(r.value)
    }

    /// t(x_new), by bisecting the monotone forward map.
    pub fn inverse(&self, x_new: f64) -> Result<f64> {
        let d = self.source();
        roots::bisect(|t| Ok(self.forward(t)? - x_new), d.lo, d.hi, 1e-13)
    }

    /// |a(m) (dx_new/dt)^2 - sign(a)| with the derivative taken by a
    /// central difference of the forward map rather than from a(t), so the
    /// check does not reuse the quantity it is checking.  Near an endpoint
    /// the stencil shifts inward and m is its midpoint, which keeps the
    /// difference second-order everywhere.
    pub fn pullback_residual(&self, t: f64) -> Result<f64> {
        let d = self.source();
        let delta = 1e-5 * d.length().max(1.0);
        let (lo, hi) = if t - delta < d.lo {
            (d.lo, d.lo + 2.0 * delta)
        } else if t + delta > d.hi {
            (d.hi - 2.0 * delta, d.hi)
        } else {
            (t - delta, t + delta)
        };
        let m = 0.5 * (lo + hi);
        let slope = (self.forward(hi)? - self.forward(lo)?) / (hi - lo);
        Ok((self.a.jet(m)?.v * slope * slope - self.sign).abs())
    }
}

/// Build the normalizing map for a coefficient profile.  The profile must
/// be bounded away from zero on its interval (checked on a dense sample)
/// and the anchor must lie inside the interval.
pub fn normalize_coordinate(a: &FunctionProfile, anchor: f64) -> Result<CoordinateMap> {
    let d = a.domain();
    if !d.contains(anchor) {
        return Err(Error::InvalidInput {
            reason: format!("anchor {anchor} outside [{}, {}]", d.lo, d.hi),
        });
    }
    let mut scale = 0.0_f64;
    let mut least = f64::INFINITY;
    let mut argmin = d.lo;
    let mut sign = 0.0;
    for t in d.samples(257) {
        let v = a.jet(t)?.v;
        scale = scale.max(v.abs());
        if v.abs() < least {
            least = v.abs();
            argmin = t;
            sign = v.signum();
        }
    }
    if least <= 1e-10 * scale.max(1.0) {
        return Err(Error::VanishingCoefficient {
            what: format!("coefficient {}", a.to_expression_string()),
            at: argmin,
        });
    }
    Ok(CoordinateMap {
        a: a.clone(),
        anchor,
        sign,
    })
}
