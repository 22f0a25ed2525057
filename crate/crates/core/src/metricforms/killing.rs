//! Killing-tensor residuals for null-coordinate data.
//!
//! In coordinates where the metric is f(u,v) du dv, a quadratic form
//! F = a p_u^2 + b p_u p_v + c p_v^2 commutes with the geodesic
//! Hamiltonian exactly when four scalar residuals vanish.  Expanding
//! {2 p_u p_v / f, F} and collecting cubic momentum monomials gives
//! f*a_v, f*a_u + f*b_v + 2a f_u + b f_v, f*b_u + f*c_v + b f_u + 2c f_v
//! and f*c_u; with f nonzero the common f factor is dropped from the
//! first and last, so the residuals reported here are
//!
//!   r1 = a_v
//!   r2 = f a_u + f b_v + 2a f_u + b f_v
//!   r3 = f b_u + f c_v + b f_u + 2c f_v
//!   r4 = c_u
//!
//! Every residual is linear in the 1-jet of f, so the sign convention
//! f > 0 (enforced by [`null_form`]) costs nothing.

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet2::Jet2;
use crate::metricforms::{CaseData, NaturalSystem};

/// Conformal factor and integral coefficients in null coordinates, with
/// f > 0.  The domain is the bounding rectangle of the valid region; for
/// data produced from a Liouville system the fields reject points of the
/// rectangle outside the rotated image of the original domain, so sample
/// points should come from [`null_sample_points`].
#[derive(Clone)]
pub struct NullKillingData {
    f: ScalarField,
    a: ScalarField,
    b: ScalarField,
    c: ScalarField,
    domain: Rect,
}

impl NullKillingData {
    pub fn new(f: ScalarField, a: ScalarField, b: ScalarField, c: ScalarField, domain: Rect) -> Self {
        NullKillingData { f, a, b, c, domain }
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn a(&self) -> &ScalarField {
        &self.a
    }

    pub fn b(&self) -> &ScalarField {
        &self.b
    }

    pub fn c(&self) -> &ScalarField {
        &self.c
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// The four residuals at a point (first coordinate u, second v).
    pub fn residuals(&self, u: f64, v: f64) -> Result<[f64; 4]> {
        let f = self.f.eval(u, v)?;
        let a = self.a.eval(u, v)?;
        let b = self.b.eval(u, v)?;
        let c = self.c.eval(u, v)?;
        if f.v <= 0.0 {
            return Err(Error::DegenerateMetric {
                x: u,
                y: v,
                det: -0.25 * f.v * f.v,
            });
        }
        Ok([
            a.dy,
            f.v * a.dx + f.v * b.dy + 2.0 * a.v * f.dx + b.v * f.dy,
            f.v * b.dx + f.v * c.dy + b.v * f.dx + 2.0 * c.v * f.dy,
            c.dx,
        ])
    }
}

/// Rewrite a constructed system in null coordinates.
///
/// Liouville data is rotated through u = x + y, v = x - y (so the flat
/// part dx^2 - dy^2 becomes du dv); the other two forms are already null
/// and keep their coordinates.  The overall sign of f is normalized to be
/// positive at the domain center.  Systems assembled from explicit fields
/// carry no case data and are rejected.
pub fn null_form(system: &NaturalSystem) -> Result<NullKillingData> {
    match system.case() {
        CaseData::Liouville { x, y, .. } => {
            let rect = system.domain();
            let (cx, cy) = rect.center();
            let sigma = (x.jet(cx)?.v - y.jet(cy)?.v).signum();
            let domain = Rect::new(
                crate::domain::Interval::new(rect.x.lo + rect.y.lo, rect.x.hi + rect.y.hi)?,
                crate::domain::Interval::new(rect.x.lo - rect.y.hi, rect.x.hi - rect.y.lo)?,
            );
            // X and Y as functions of (u, v) through x = (u+v)/2,
            // y = (u-v)/2; the profiles' own interval checks exclude
            // points of the bounding rectangle outside the rotated image.
            let xj = {
                let x = x.clone();
                move |u: f64, v: f64| -> Result<Jet2> {
                    Ok(Jet2::from_linear_composition(
                        x.jet(0.5 * (u + v))?,
                        0.5,
                        0.5,
                    ))
                }
            };
            let yj = {
                let y = y.clone();
                move |u: f64, v: f64| -> Result<Jet2> {
                    Ok(Jet2::from_linear_composition(
                        y.jet(0.5 * (u - v))?,
                        0.5,
                        -0.5,
                    ))
                }
            };
            let f = {
                let (xj, yj) = (xj.clone(), yj.clone());
                ScalarField::new(move |u, v| Ok((xj(u, v)? - yj(u, v)?).scale(sigma)))
            };
            let b = ScalarField::new(move |u, v| {
                let xv = xj(u, v)?;
                let yv = yj(u, v)?;
                Ok((xv + yv).scale(-2.0) / (xv - yv))
            });
            Ok(NullKillingData::new(
                f,
                ScalarField::constant(1.0),
                b,
                ScalarField::constant(1.0),
                domain,
            ))
        }
        CaseData::ComplexLiouville { h, .. } => {
            let rect = system.domain();
            let (cx, cy) = rect.center();
            let sigma = h.jet(cx, cy)?.v.im.signum();
            let f = {
                let h = h.clone();
                ScalarField::new(move |u, v| Ok(Jet2::im_part(h.jet(u, v)?).scale(sigma)))
            };
            let b = {
                let h = h.clone();
                ScalarField::new(move |u, v| {
                    let hj = h.jet(u, v)?;
                    Ok(Jet2::re_part(hj).scale(2.0) / Jet2::im_part(hj))
                })
            };
            Ok(NullKillingData::new(
                f,
                ScalarField::constant(1.0),
                b,
                ScalarField::constant(-1.0),
                rect,
            ))
        }
        CaseData::JordanBlock { y, .. } => {
            let rect = system.domain();
            let f = {
                let y = y.clone();
                ScalarField::new(move |u, v| Ok(crate::metricforms::jordan_weight(u, y.jet(v)?)))
            };
            let b = {
                let y = y.clone();
                ScalarField::new(move |u, v| {
                    let yj = y.jet(v)?;
                    let w = crate::metricforms::jordan_weight(u, yj);
                    Ok(Jet2::from_y_jet(yj).scale(-2.0) / w)
                })
            };
            Ok(NullKillingData::new(
                f,
                ScalarField::constant(1.0),
                b,
                ScalarField::constant(0.0),
                rect,
            ))
        }
        CaseData::Custom => Err(Error::InvalidInput {
            reason: "null-coordinate form requires a constructed normal form".to_string(),
        }),
    }
}

/// An n x n set of null-coordinate points guaranteed valid for the data
/// returned by [`null_form`] on the same system: a slightly shrunk grid
/// of the original domain, mapped through the case's coordinate change.
pub fn null_sample_points(system: &NaturalSystem, n: usize) -> Result<Vec<(f64, f64)>> {
    let grid = system.domain().interior_grid(n, 1e-6);
    match system.case() {
        CaseData::Liouville { .. } => Ok(grid.iter().map(|&(x, y)| (x + y, x - y)).collect()),
        CaseData::ComplexLiouville { .. } | CaseData::JordanBlock { .. } => Ok(grid),
        CaseData::Custom => Err(Error::InvalidInput {
            reason: "null-coordinate form requires a constructed normal form".to_string(),
        }),
    }
}

/// Maximum absolute residual of the four Killing equations over a point
/// set.
pub fn verify_killing_pde(data: &NullKillingData, points: &[(f64, f64)]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &(u, v) in points {
        let r = data.residuals(u, v)?;
        for ri in r {
            worst = worst.max(ri.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use crate::expr::{FunctionProfile, HolomorphicProfile};
    use crate::metricforms::{make_complex_liouville, make_jordan_block, make_liouville};
    use num_complex::Complex64;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn profile(src: &str, var: &str, lo: f64, hi: f64) -> FunctionProfile {
        FunctionProfile::parse(src, var, iv(lo, hi)).unwrap()
    }

    #[test]
    fn liouville_residuals_vanish() {
        let sys = make_liouville(
            &profile("2+sin(x)", "x", -1.5, 1.5),
            &profile("exp(y)-3", "y", -1.5, 1.2),
            &profile("x", "x", -1.5, 1.5),
            &profile("y", "y", -1.5, 1.2),
        )
        .unwrap();
        let data = null_form(&sys).unwrap();
        let pts = null_sample_points(&sys, 11).unwrap();
        let worst = verify_killing_pde(&data, &pts).unwrap();
        assert!(worst < 1e-12, "residual {worst}");
    }

    #[test]
    fn liouville_f_positive_even_when_x_below_y() {
        // X = -5 < Y = sin(y): the raw difference is negative, the
        // normalized factor is not.
        let sys = make_liouville(
            &profile("-5", "x", -1.0, 1.0),
            &profile("sin(y)", "y", -1.0, 1.0),
            &profile("0", "x", -1.0, 1.0),
            &profile("0", "y", -1.0, 1.0),
        )
        .unwrap();
        let data = null_form(&sys).unwrap();
        let pts = null_sample_points(&sys, 9).unwrap();
        for &(u, v) in &pts {
            assert!(data.f().eval(u, v).unwrap().v > 0.0);
        }
        assert!(verify_killing_pde(&data, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn complex_liouville_residuals_vanish() {
        let rect = Rect::new(iv(-1.2, 1.2), iv(-0.8, 0.8));
        let h =
            HolomorphicProfile::parse_scaled("2+cos(z)", "z", rect, Complex64::new(0.0, 1.0))
                .unwrap();
        let h1 = HolomorphicProfile::parse("z", "z", rect).unwrap();
        let sys = make_complex_liouville(&h, &h1).unwrap();
        let data = null_form(&sys).unwrap();
        let pts = null_sample_points(&sys, 11).unwrap();
        let worst = verify_killing_pde(&data, &pts).unwrap();
        assert!(worst < 1e-12, "residual {worst}");
    }

    #[test]
    fn jordan_residuals_vanish() {
        let sys = make_jordan_block(
            &profile("sin(y)", "y", -1.5, 1.5),
            &profile("y", "y", -1.5, 1.5),
            &profile("1", "y", -1.5, 1.5),
            iv(-0.9, 0.9),
        )
        .unwrap();
        let data = null_form(&sys).unwrap();
        let pts = null_sample_points(&sys, 11).unwrap();
        let worst = verify_killing_pde(&data, &pts).unwrap();
        assert!(worst < 1e-12, "residual {worst}");
    }

    #[test]
    fn sabotaged_coefficient_is_caught() {
        // Flat factor f = 1 with a = v: r1 = a_v = 1 exactly.
        let rect = Rect::new(iv(-1.0, 1.0), iv(-1.0, 1.0));
        let data = NullKillingData::new(
            ScalarField::constant(1.0),
            ScalarField::new(|_, v| Ok(Jet2::var_y(v))),
            ScalarField::constant(0.0),
            ScalarField::constant(0.0),
            rect,
        );
        let r = data.residuals(0.3, 0.4).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
        let worst = verify_killing_pde(&data, &rect.grid(5)).unwrap();
        assert!((worst - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_factor_rejected() {
        let rect = Rect::new(iv(-1.0, 1.0), iv(-1.0, 1.0));
        let data = NullKillingData::new(
            ScalarField::constant(-2.0),
            ScalarField::constant(1.0),
            ScalarField::constant(0.0),
            ScalarField::constant(1.0),
            rect,
        );
        assert!(matches!(
            data.residuals(0.0, 0.0),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn custom_systems_have_no_null_form() {
        use crate::field::{MetricField, QuadraticForm};
        let rect = Rect::new(iv(-1.0, 1.0), iv(-1.0, 1.0));
        let metric = MetricField::new(
            ScalarField::constant(0.0),
            ScalarField::constant(0.5),
            ScalarField::constant(0.0),
            rect,
        )
        .unwrap();
        let sys = NaturalSystem::custom(
            metric,
            QuadraticForm::new(
                ScalarField::constant(1.0),
                ScalarField::constant(0.0),
                ScalarField::constant(0.0),
            ),
            ScalarField::constant(0.0),
            ScalarField::constant(0.0),
        );
        assert!(matches!(null_form(&sys), Err(Error::InvalidInput { .. })));
        assert!(matches!(
            null_sample_points(&sys, 5),
            Err(Error::InvalidInput { .. })
        ));
    }
}
