//! Geodesically equivalent partner metrics and the projective criterion.
//!
//! Two metrics share their unparametrized geodesics exactly when the
//! difference of their Levi-Civita connections has the special form
//! D^i_jk = Y_j d^i_k + Y_k d^i_j for a one-form Y.  This module builds
//! the partner metric of each normal form in closed form, the general
//! covariant construction gbar = (det g / det h)^2 h from an integral,
//! and the residual machinery that decides equivalence pointwise.
//!
//! Orientation: differences here are (connection of the first metric)
//! minus (connection of the second), so for a constructed pair
//! (g, partner) the fitted one-form matches the closed expressions
//! returned by [`closed_one_form`].

use std::sync::Arc;

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::expr::FunctionProfile;
use crate::field::{MetricField, QuadraticForm, ScalarField, SymJet2};
use crate::jet2::Jet2;
use crate::metricforms::{jordan_weight, CaseData, NaturalSystem};
use crate::ode::{self, OdeOptions, StopReason};

/// Christoffel symbols; index order is `[i][j][k]` for G^i_jk.
pub type Christoffel = [[[f64; 2]; 2]; 2];

/// Levi-Civita connection of a metric, evaluated from metric jets.
#[derive(Debug, Clone)]
pub struct Connection {
    g: MetricField,
}

impl Connection {
    pub fn new(g: &MetricField) -> Self {
        Connection { g: g.clone() }
    }

    /// G^i_jk = (1/2) g^{il} (d_j g_lk + d_k g_lj - d_l g_jk); the jk
    /// symmetry is exact because each pair is computed once.
    pub fn christoffel(&self, x: f64, y: f64) -> Result<Christoffel> {
        let gj = self.g.eval(x, y)?;
        Ok(christoffel_from_jets(&gj))
    }

    /// Max component of the covariant derivative of g, which vanishes
    /// identically for the Levi-Civita connection; nonzero values can
    /// only come from floating-point noise.
    pub fn compatibility_residual(&self, x: f64, y: f64) -> Result<f64> {
        let gj = self.g.eval(x, y)?;
        let gamma = christoffel_from_jets(&gj);
        let m = cov_matrix(&gj);
        let mut worst = 0.0_f64;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut r = deriv(&m[i][j], k);
                    for l in 0..2 {
                        r -= gamma[l][k][i] * m[l][j].v + gamma[l][k][j] * m[i][l].v;
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    }
}

fn cov_matrix(g: &SymJet2) -> [[Jet2; 2]; 2] {
    [[g.xx, g.xy], [g.xy, g.yy]]
}

fn deriv(j: &Jet2, k: usize) -> f64 {
    if k == 0 {
        j.dx
    } else {
        j.dy
    }
}

fn christoffel_from_jets(g: &SymJet2) -> Christoffel {
    let m = cov_matrix(g);
    let inv = g.inverse();
    let iv = [[inv.xx.v, inv.xy.v], [inv.xy.v, inv.yy.v]];
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in j..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += iv[i][l]
                        * (deriv(&m[l][k], j) + deriv(&m[l][j], k) - deriv(&m[j][k], l));
                }
                let v = 0.5 * s;
                out[i][j][k] = v;
                out[i][k][j] = v;
            }
        }
    }
    out
}

/// Christoffel symbols of `g` at a point.
pub fn christoffel(g: &MetricField, x: f64, y: f64) -> Result<Christoffel> {
    Ok(christoffel_from_jets(&g.eval(x, y)?))
}

/// A one-form given by an evaluator (x, y) -> (Y_x, Y_y).
#[derive(Clone)]
pub struct OneForm {
    f: Arc<dyn Fn(f64, f64) -> Result<[f64; 2]> + Send + Sync>,
}

impl OneForm {
    pub fn new(f: impl Fn(f64, f64) -> Result<[f64; 2]> + Send + Sync + 'static) -> Self {
        OneForm { f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        (self.f)(x, y)
    }
}

impl std::fmt::Debug for OneForm {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.write_str("OneForm(..)")
    }
}

fn degenerate(value: f64, scale: f64) -> bool {
    value.abs() <= 1e-12 * scale.max(1.0)
}

/// A continuous function is bounded away from zero on the rectangle when
/// no sample is near zero and no sample changes sign (a flip between
/// samples pins a root strictly inside).
fn check_nonvanishing(
    domain: crate::domain::Rect,
    what: &str,
    f: impl Fn(f64, f64) -> Result<f64>,
) -> Result<()> {
    let (cx, cy) = domain.center();
    let positive = f(cx, cy)? > 0.0;
    for (x, y) in domain.validation_samples() {
        let v = f(x, y)?;
        if degenerate(v, 1.0) || (v > 0.0) != positive {
            return Err(Error::DegenerateConstruction {
                what: what.to_string(),
                x,
                y,
            });
        }
    }
    Ok(())
}

/// The closed-form partner metric of a constructed system:
///
/// | case             | partner                                          |
/// |------------------|--------------------------------------------------|
/// | Liouville        | (1/Y - 1/X)(dx^2/X - dy^2/Y)                     |
/// | complex-Liouville| (-Im^2 dx^2 + 2 Re Im dxdy + Im^2 dy^2)/|h|^4    |
/// | Jordan block     | -2(w/Y^3) dxdy + (w^2/Y^4) dy^2, w = 1 + x Y'    |
///
/// Each case needs its denominators bounded away from zero on the whole
/// domain (X, Y for Liouville; h for complex-Liouville; Y for Jordan).
pub fn partner_metric(system: &NaturalSystem) -> Result<MetricField> {
    let domain = system.domain();
    match system.case() {
        CaseData::Liouville { x, y, .. } => {
            check_nonvanishing(domain, "Liouville partner metric (X vanishes)", |px, _| {
                Ok(x.jet(px)?.v)
            })?;
            check_nonvanishing(domain, "Liouville partner metric (Y vanishes)", |_, py| {
                Ok(y.jet(py)?.v)
            })?;
            let gxx = {
                let (x, y) = (x.clone(), y.clone());
                ScalarField::new(move |px, py| {
                    let xj = Jet2::from_x_jet(x.jet(px)?);
                    let yj = Jet2::from_y_jet(y.jet(py)?);
                    Ok((xj - yj) / (xj * xj * yj))
                })
            };
            let gyy = {
                let (x, y) = (x.clone(), y.clone());
                ScalarField::new(move |px, py| {
                    let xj = Jet2::from_x_jet(x.jet(px)?);
                    let yj = Jet2::from_y_jet(y.jet(py)?);
                    Ok((yj - xj) / (xj * yj * yj))
                })
            };
            MetricField::new(gxx, ScalarField::constant(0.0), gyy, domain)
        }
        CaseData::ComplexLiouville { h, .. } => {
            check_nonvanishing(
                domain,
                "complex-Liouville partner metric (h vanishes)",
                |px, py| Ok(h.jet(px, py)?.v.norm()),
            )?;
            let parts = |h: &crate::expr::HolomorphicProfile, px: f64, py: f64| -> Result<(Jet2, Jet2, Jet2)> {
                let hj = h.jet(px, py)?;
                let p = Jet2::re_part(hj);
                let q = Jet2::im_part(hj);
                let n2 = p * p + q * q;
                Ok((p, q, n2 * n2))
            };
            let gxx = {
                let h = h.clone();
                ScalarField::new(move |px, py| {
                    let (_, q, n4) = parts(&h, px, py)?;
                    Ok(-(q * q) / n4)
                })
            };
            let gxy = {
                let h = h.clone();
                ScalarField::new(move |px, py| {
                    let (p, q, n4) = parts(&h, px, py)?;
                    Ok(p * q / n4)
                })
            };
            let gyy = {
                let h = h.clone();
                ScalarField::new(move |px, py| {
                    let (_, q, n4) = parts(&h, px, py)?;
                    Ok(q * q / n4)
                })
            };
            MetricField::new(gxx, gxy, gyy, domain)
        }
        CaseData::JordanBlock { y, .. } => {
            check_nonvanishing(domain, "Jordan partner metric (Y vanishes)", |_, py| {
                Ok(y.jet(py)?.v)
            })?;
            let gxy = {
                let y = y.clone();
                ScalarField::new(move |px, py| {
                    let yj = y.jet(py)?;
                    let w = jordan_weight(px, yj);
                    let yv = Jet2::from_y_jet(yj);
                    Ok(-w / (yv * yv * yv))
                })
            };
            let gyy = {
                let y = y.clone();
                ScalarField::new(move |px, py| {
                    let yj = y.jet(py)?;
                    let w = jordan_weight(px, yj);
                    let yv = Jet2::from_y_jet(yj);
                    Ok(w * w / (yv * yv * yv * yv))
                })
            };
            MetricField::new(ScalarField::constant(0.0), gxy, gyy, domain)
        }
        CaseData::Custom => Err(Error::InvalidInput {
            reason: "partner metric requires a constructed normal form".to_string(),
        }),
    }
}

/// Lower both indices of F with g, h_ij = g_ia g_jb F^{ab}, and rescale:
/// gbar = (det g / det h)^2 h.  When F commutes with the geodesic flow of
/// g the result is geodesically equivalent to g; h must stay
/// nondegenerate.
pub fn metric_from_integral(g: &MetricField, f: &QuadraticForm) -> Result<MetricField> {
    let domain = g.domain();
    let h_at = {
        let (g, f) = (g.clone(), f.clone());
        move |x: f64, y: f64| -> Result<SymJet2> {
            let gj = g.eval(x, y)?;
            let fj = f.eval(x, y)?;
            // h = G F G with G, F as symmetric 2x2 jet matrices.
            let gf_xx = gj.xx * fj.xx + gj.xy * fj.xy;
            let gf_xy = gj.xx * fj.xy + gj.xy * fj.yy;
            let gf_yx = gj.xy * fj.xx + gj.yy * fj.xy;
            let gf_yy = gj.xy * fj.xy + gj.yy * fj.yy;
            Ok(SymJet2 {
                xx: gf_xx * gj.xx + gf_xy * gj.xy,
                xy: gf_xx * gj.xy + gf_xy * gj.yy,
                yy: gf_yx * gj.xy + gf_yy * gj.yy,
            })
        }
    };
    for (x, y) in domain.validation_samples() {
        let h = h_at(x, y)?;
        if degenerate(h.det().v, h.frobenius() * h.frobenius()) {
            return Err(Error::DegenerateConstruction {
                what: "covariant form of the integral is degenerate".to_string(),
                x,
                y,
            });
        }
    }
    let component = |pick: fn(&SymJet2) -> Jet2| -> ScalarField {
        let h_at = h_at.clone();
        let g = g.clone();
        ScalarField::new(move |x, y| {
            let h = h_at(x, y)?;
            let ratio = g.eval(x, y)?.det() / h.det();
            Ok(ratio * ratio * pick(&h))
        })
    };
    MetricField::new(
        component(|h| h.xx),
        component(|h| h.xy),
        component(|h| h.yy),
        domain,
    )
}

/// The alternative Jordan-form coordinates: metric (Ytilde(y) + x) dxdy
/// with integral p_x^2 - 2y/(Ytilde + x) p_x p_y, returned together with
/// its closed-form partner -2(f/y^3) dxdy + (f^2/y^4) dy^2 where
/// f = Ytilde + x.  Requires f != 0 and y != 0 over the domain.  The
/// system carries no case data (momentum recovery does not apply to this
/// coordinate presentation).
pub fn make_jordan_alternate_pair(
    ytilde: &FunctionProfile,
    x_range: Interval,
) -> Result<(NaturalSystem, MetricField)> {
    let domain = crate::domain::Rect::new(x_range, ytilde.domain());
    check_nonvanishing(domain, "alternate Jordan pair (Ytilde + x vanishes)", |px, py| {
        Ok(ytilde.jet(py)?.v + px)
    })?;
    check_nonvanishing(domain, "alternate Jordan pair (y vanishes)", |_, py| Ok(py))?;
    let f_at = {
        let yt = ytilde.clone();
        move |px: f64, py: f64| -> Result<Jet2> {
            Ok(Jet2::from_y_jet(yt.jet(py)?) + Jet2::var_x(px))
        }
    };
    let metric = MetricField::new(
        ScalarField::constant(0.0),
        {
            let f_at = f_at.clone();
            ScalarField::new(move |px, py| Ok(f_at(px, py)?.scale(0.5)))
        },
        ScalarField::constant(0.0),
        domain,
    )?;
    let integral = QuadraticForm::new(
        ScalarField::constant(1.0),
        {
            let f_at = f_at.clone();
            ScalarField::new(move |px, py| Ok(-Jet2::var_y(py) / f_at(px, py)?))
        },
        ScalarField::constant(0.0),
    );
    let partner = MetricField::new(
        ScalarField::constant(0.0),
        {
            let f_at = f_at.clone();
            ScalarField::new(move |px, py| {
                let yv = Jet2::var_y(py);
                Ok(-f_at(px, py)? / (yv * yv * yv))
            })
        },
        {
            let f_at = f_at.clone();
            ScalarField::new(move |px, py| {
                let fv = f_at(px, py)?;
                let yv = Jet2::var_y(py);
                Ok(fv * fv / (yv * yv * yv * yv))
            })
        },
        domain,
    )?;
    let system = NaturalSystem::custom(
        metric,
        integral,
        ScalarField::constant(0.0),
        ScalarField::constant(0.0),
    );
    Ok((system, partner))
}

/// Connection difference G(g) - G(gbar) at a point.
fn connection_difference(
    g: &MetricField,
    gbar: &MetricField,
    x: f64,
    y: f64,
) -> Result<Christoffel> {
    let a = christoffel(g, x, y)?;
    let b = christoffel(gbar, x, y)?;
    let mut d = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                d[i][j][k] = a[i][j][k] - b[i][j][k];
            }
        }
    }
    Ok(d)
}

/// Least-squares solution of D^i_jk = Y_j d^i_k + Y_k d^i_j (six
/// equations counting each symmetric pair once, two unknowns).
fn fit_upsilon(d: &Christoffel) -> [f64; 2] {
    [
        (2.0 * d[0][0][0] + d[1][0][1]) / 5.0,
        (2.0 * d[1][1][1] + d[0][0][1]) / 5.0,
    ]
}

fn fit_residual(d: &Christoffel, u: [f64; 2]) -> f64 {
    let rs = [
        d[0][0][0] - 2.0 * u[0],
        d[0][0][1] - u[1],
        d[0][1][1],
        d[1][0][0],
        d[1][0][1] - u[0],
        d[1][1][1] - 2.0 * u[1],
    ];
    rs.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
}

/// The pointwise least-squares one-form for a metric pair.
pub fn fitted_one_form(g: &MetricField, gbar: &MetricField) -> OneForm {
    let (g, gbar) = (g.clone(), gbar.clone());
    OneForm::new(move |x, y| Ok(fit_upsilon(&connection_difference(&g, &gbar, x, y)?)))
}

/// Max projective residual over a sample set, together with the fitted
/// one-form; a pair is geodesically equivalent exactly when the residual
/// is (numerically) zero.
pub fn projective_residual(
    g: &MetricField,
    gbar: &MetricField,
    points: &[(f64, f64)],
) -> Result<(f64, OneForm)> {
    let mut worst = 0.0_f64;
    for &(x, y) in points {
        let d = connection_difference(g, gbar, x, y)?;
        let u = fit_upsilon(&d);
        worst = worst.max(fit_residual(&d, u));
    }
    Ok((worst, fitted_one_form(g, gbar)))
}

/// The closed-form one-form of each constructed pair (g, partner):
/// Liouville (X'/2X) dx + (Y'/2Y) dy; complex-Liouville
/// Re(h'/h) dx - Im(h'/h) dy; Jordan (Y'/Y) dy.
pub fn closed_one_form(system: &NaturalSystem) -> Result<OneForm> {
    match system.case() {
        CaseData::Liouville { x, y, .. } => {
            let (x, y) = (x.clone(), y.clone());
            Ok(OneForm::new(move |px, py| {
                let xj = x.jet(px)?;
                let yj = y.jet(py)?;
                Ok([0.5 * xj.d1 / xj.v, 0.5 * yj.d1 / yj.v])
            }))
        }
        CaseData::ComplexLiouville { h, .. } => {
            let h = h.clone();
            Ok(OneForm::new(move |px, py| {
                let hj = h.jet(px, py)?;
                let w = hj.d1 / hj.v;
                Ok([w.re, -w.im])
            }))
        }
        CaseData::JordanBlock { y, .. } => {
            let y = y.clone();
            Ok(OneForm::new(move |_, py| {
                let yj = y.jet(py)?;
                Ok([0.0, yj.d1 / yj.v])
            }))
        }
        CaseData::Custom => Err(Error::InvalidInput {
            reason: "closed projective one-form requires a constructed normal form".to_string(),
        }),
    }
}

/// Integrate the g-geodesic from `seed` = [x, y, vx, vy] for time `t`,
/// then measure how far the curve is from solving the gbar-geodesic
/// equation up to reparametrization: with r^i the gbar-acceleration
/// along the curve, returns max |r wedge v| / |v|^2.  Leaving the domain
/// is an error here (the check needs the whole time span).
pub fn unparametrized_geodesic_check(
    g: &MetricField,
    gbar: &MetricField,
    seed: [f64; 4],
    t: f64,
) -> Result<f64> {
    let sol = ode::dopri5(
        |_, s: &[f64; 4]| geodesic_rhs(g, s),
        0.0,
        t,
        seed,
        &OdeOptions::default(),
    )?;
    match sol.reason {
        StopReason::Completed => {}
        StopReason::RhsRejected => {
            return Err(sol.failure.unwrap_or(Error::InvalidInput {
                reason: "geodesic left the domain".to_string(),
            }))
        }
        StopReason::StepUnderflow => {
            return Err(Error::StepSizeUnderflow { t: sol.t_end });
        }
    }
    let mut worst = 0.0_f64;
    for (_, s) in &sol.samples {
        let [x, y, vx, vy] = *s;
        let gam = christoffel(g, x, y)?;
        let gam_bar = christoffel(gbar, x, y)?;
        let v = [vx, vy];
        let mut r = [0.0; 2];
        for i in 0..2 {
            // g-geodesic: accel^i = -G^i_jk v^j v^k; r adds the gbar terms.
            for j in 0..2 {
                for k in 0..2 {
                    r[i] += (gam_bar[i][j][k] - gam[i][j][k]) * v[j] * v[k];
                }
            }
        }
        let wedge = r[0] * v[1] - r[1] * v[0];
        let v2 = v[0] * v[0] + v[1] * v[1];
        if v2 > 0.0 {
            worst = worst.max(wedge.abs() / v2);
        }
    }
    Ok(worst)
}

fn geodesic_rhs(g: &MetricField, s: &[f64; 4]) -> Result<[f64; 4]> {
    let [x, y, vx, vy] = *s;
    let gam = christoffel(g, x, y)?;
    let v = [vx, vy];
    let mut a = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                a[i] -= gam[i][j][k] * v[j] * v[k];
            }
        }
    }
    Ok([vx, vy, a[0], a[1]])
}
