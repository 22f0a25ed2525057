//! The three normal forms of (metric, quadratic integral) pairs.
//!
//! Every natural system built here satisfies, by construction, the
//! compatibility that makes F = F^{ij}p_ip_j + V Poisson-commute with
//! H = (1/2)g^{ij}p_ip_j + U.  The constructors take one-variable (or
//! holomorphic) coefficient profiles and assemble the metric, integral
//! coefficients, and potentials as jet-valued plane fields:
//!
//! | case             | metric                     | integral (kinetic part)                          |
//! |------------------|----------------------------|--------------------------------------------------|
//! | Liouville        | (X - Y)(dx^2 - dy^2)       | (X p_y^2 - Y p_x^2)/(X - Y)                      |
//! | complex-Liouville| Im(h) dxdy                 | p_x^2 - p_y^2 + 2(Re h/Im h) p_x p_y             |
//! | Jordan block     | (1 + x Y'(y)) dxdy         | p_x^2 - 2 Y/(1 + x Y') p_x p_y                   |
//!
//! Null metrics f dxdy are stored with g_xy = g_yx = f/2, so det g =
//! -f^2/4 and the inverse cross component is 2/f.

mod classify;
mod killing;
mod normalize;

pub use classify::{classify, g_tensor, g_tensor_jets, CaseLabel};
pub use killing::{null_form, null_sample_points, verify_killing_pde, NullKillingData};
pub use normalize::{normalize_coordinate, CoordinateMap};

use crate::domain::{Interval, Rect};
use crate::error::{Error, Result};
use crate::expr::{FunctionProfile, HolomorphicProfile};
use crate::field::{MetricField, QuadraticForm, ScalarField};
use crate::jet::Jet;
use crate::jet2::Jet2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Liouville,
    ComplexLiouville,
    JordanBlock,
    Custom,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Liouville => "liouville",
            CaseTag::ComplexLiouville => "complex-liouville",
            CaseTag::JordanBlock => "jordan-block",
            CaseTag::Custom => "custom",
        }
    }
}

/// Constructor data retained for case-specific algorithms (momentum
/// recovery, characteristics, operator tables).
#[derive(Debug, Clone)]
pub enum CaseData {
    Liouville {
        x: FunctionProfile,
        y: FunctionProfile,
        xhat: FunctionProfile,
        yhat: FunctionProfile,
    },
    ComplexLiouville {
        h: HolomorphicProfile,
        h1: HolomorphicProfile,
    },
    JordanBlock {
        y: FunctionProfile,
        y1: FunctionProfile,
        y2: FunctionProfile,
    },
    Custom,
}

#[derive(Debug, Clone)]
pub struct NaturalSystem {
    metric: MetricField,
    integral: QuadraticForm,
    potential_u: ScalarField,
    potential_v: ScalarField,
    case: CaseData,
}

impl NaturalSystem {
    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn integral(&self) -> &QuadraticForm {
        &self.integral
    }

    pub fn potential_u(&self) -> &ScalarField {
        &self.potential_u
    }

    pub fn potential_v(&self) -> &ScalarField {
        &self.potential_v
    }

    pub fn case(&self) -> &CaseData {
        &self.case
    }

    pub fn case_tag(&self) -> CaseTag {
        match self.case {
            CaseData::Liouville { .. } => CaseTag::Liouville,
            CaseData::ComplexLiouville { .. } => CaseTag::ComplexLiouville,
            CaseData::JordanBlock { .. } => CaseTag::JordanBlock,
            CaseData::Custom => CaseTag::Custom,
        }
    }

    pub fn domain(&self) -> Rect {
        self.metric.domain()
    }

    /// Assemble a system from explicit fields (no case-specific algorithms
    /// will be available).  The metric must already validate on `domain`.
    pub fn custom(
        metric: MetricField,
        integral: QuadraticForm,
        potential_u: ScalarField,
        potential_v: ScalarField,
    ) -> Self {
        NaturalSystem {
            metric,
            integral,
            potential_u,
            potential_v,
            case: CaseData::Custom,
        }
    }
}

/// Relative margin used by constructor nondegeneracy checks.
fn degenerate(value: f64, scale: f64) -> bool {
    value.abs() <= 1e-12 * scale.max(1.0)
}

/// g = (X - Y)(dx^2 - dy^2) with integral (X p_y^2 - Y p_x^2)/(X - Y),
/// U = (Xhat - Yhat)/(2(X - Y)), V = (Yhat X - Xhat Y)/(X - Y).
///
/// The domain rectangle is the product of the x-profiles' and the
/// y-profiles' intervals; X != Y must hold on all of it.
pub fn make_liouville(
    x: &FunctionProfile,
    y: &FunctionProfile,
    xhat: &FunctionProfile,
    yhat: &FunctionProfile,
) -> Result<NaturalSystem> {
    let domain = Rect::new(
        x.domain().intersect(&xhat.domain())?,
        y.domain().intersect(&yhat.domain())?,
    );
    for (px, py) in domain.validation_samples() {
        let xv = x.jet(px)?.v;
        let yv = y.jet(py)?.v;
        if degenerate(xv - yv, xv.abs().max(yv.abs())) {
            return Err(Error::DegenerateConstruction {
                what: "Liouville metric (X(x) = Y(y))".to_string(),
                x: px,
                y: py,
            });
        }
    }

    let diff = {
        let (x, y) = (x.clone(), y.clone());
        ScalarField::new(move |px, py| {
            Ok(Jet2::from_x_jet(x.jet(px)?) - Jet2::from_y_jet(y.jet(py)?))
        })
    };
    let metric = MetricField::new(
        diff.clone(),
        ScalarField::constant(0.0),
        diff.scaled(-1.0),
        domain,
    )?;

    let fxx = {
        let (x, y) = (x.clone(), y.clone());
        ScalarField::new(move |px, py| {
            let xj = Jet2::from_x_jet(x.jet(px)?);
            let yj = Jet2::from_y_jet(y.jet(py)?);
            Ok(-yj / (xj - yj))
        })
    };
    let fyy = {
        let (x, y) = (x.clone(), y.clone());
        ScalarField::new(move |px, py| {
            let xj = Jet2::from_x_jet(x.jet(px)?);
            let yj = Jet2::from_y_jet(y.jet(py)?);
            Ok(xj / (xj - yj))
        })
    };
    let integral = QuadraticForm::new(fxx, ScalarField::constant(0.0), fyy);

    let potential_u = {
        let (x, y, xh, yh) = (x.clone(), y.clone(), xhat.clone(), yhat.clone());
        ScalarField::new(move |px, py| {
            let xj = Jet2::from_x_jet(x.jet(px)?);
            let yj = Jet2::from_y_jet(y.jet(py)?);
            let xhj = Jet2::from_x_jet(xh.jet(px)?);
            let yhj = Jet2::from_y_jet(yh.jet(py)?);
            Ok((xhj - yhj).scale(0.5) / (xj - yj))
        })
    };
    let potential_v = {
        let (x, y, xh, yh) = (x.clone(), y.clone(), xhat.clone(), yhat.clone());
        ScalarField::new(move |px, py| {
            let xj = Jet2::from_x_jet(x.jet(px)?);
            let yj = Jet2::from_y_jet(y.jet(py)?);
            let xhj = Jet2::from_x_jet(xh.jet(px)?);
            let yhj = Jet2::from_y_jet(yh.jet(py)?);
            Ok((yhj * xj - xhj * yj) / (xj - yj))
        })
    };

    Ok(NaturalSystem {
        metric,
        integral,
        potential_u,
        potential_v,
        case: CaseData::Liouville {
            x: x.clone(),
            y: y.clone(),
            xhat: xhat.clone(),
            yhat: yhat.clone(),
        },
    })
}

/// g = Im(h) dxdy with integral p_x^2 - p_y^2 + 2(Re h/Im h) p_x p_y,
/// U = Im(h1)/Im(h), V = Re(h) Im(h1)/Im(h) - Re(h1).
pub fn make_complex_liouville(
    h: &HolomorphicProfile,
    h1: &HolomorphicProfile,
) -> Result<NaturalSystem> {
    let domain = h.domain().intersect(&h1.domain())?;
    for (px, py) in domain.validation_samples() {
        let hv = h.jet(px, py)?.v;
        if degenerate(hv.im, hv.norm()) {
            return Err(Error::DegenerateConstruction {
                what: "complex-Liouville metric (Im h = 0)".to_string(),
                x: px,
                y: py,
            });
        }
    }

    let im_h = {
        let h = h.clone();
        ScalarField::new(move |px, py| Ok(Jet2::im_part(h.jet(px, py)?)))
    };
    let metric = MetricField::new(
        ScalarField::constant(0.0),
        im_h.scaled(0.5),
        ScalarField::constant(0.0),
        domain,
    )?;

    let fxy = {
        let h = h.clone();
        ScalarField::new(move |px, py| {
            let hj = h.jet(px, py)?;
            Ok(Jet2::re_part(hj) / Jet2::im_part(hj))
        })
    };
    let integral = QuadraticForm::new(
        ScalarField::constant(1.0),
        fxy,
        ScalarField::constant(-1.0),
    );

    let potential_u = {
        let (h, h1) = (h.clone(), h1.clone());
        ScalarField::new(move |px, py| {
            Ok(Jet2::im_part(h1.jet(px, py)?) / Jet2::im_part(h.jet(px, py)?))
        })
    };
    let potential_v = {
        let (h, h1) = (h.clone(), h1.clone());
        ScalarField::new(move |px, py| {
            let hj = h.jet(px, py)?;
            let h1j = h1.jet(px, py)?;
            Ok(Jet2::re_part(hj) * Jet2::im_part(h1j) / Jet2::im_part(hj) - Jet2::re_part(h1j))
        })
    };

    Ok(NaturalSystem {
        metric,
        integral,
        potential_u,
        potential_v,
        case: CaseData::ComplexLiouville {
            h: h.clone(),
            h1: h1.clone(),
        },
    })
}

/// Jet2 of the function (x, y) -> 1 + x Y'(y), built from the order-3 jet
/// of Y so the Hessian slots are exact.
pub(crate) fn jordan_weight(x: f64, yjet: Jet<f64>) -> Jet2 {
    let yprime = Jet2 {
        v: yjet.d1,
        dx: 0.0,
        dy: yjet.d2,
        dxx: 0.0,
        dxy: 0.0,
        dyy: yjet.d3,
    };
    Jet2::constant(1.0) + Jet2::var_x(x) * yprime
}

/// g = (1 + x Y'(y)) dxdy with integral p_x^2 - 2Y/(1 + x Y') p_x p_y,
/// U = (x Y1' + Y2)/(1 + x Y'), V = -Y U + Y1.
///
/// The y-profiles carry the y-extent; the x-interval must be supplied and
/// satisfy 1 + x Y'(y) > 0 throughout.
pub fn make_jordan_block(
    y: &FunctionProfile,
    y1: &FunctionProfile,
    y2: &FunctionProfile,
    x_range: Interval,
) -> Result<NaturalSystem> {
    let y_range = y
        .domain()
        .intersect(&y1.domain())?
        .intersect(&y2.domain())?;
    let domain = Rect::new(x_range, y_range);
    for (px, py) in domain.validation_samples() {
        let w = 1.0 + px * y.jet(py)?.d1;
        if w <= 0.0 {
            return Err(Error::DegenerateConstruction {
                what: "Jordan-block metric (1 + x Y'(y) <= 0)".to_string(),
                x: px,
                y: py,
            });
        }
    }

    let w_field = {
        let y = y.clone();
        ScalarField::new(move |px, py| Ok(jordan_weight(px, y.jet(py)?)))
    };
    let metric = MetricField::new(
        ScalarField::constant(0.0),
        w_field.scaled(0.5),
        ScalarField::constant(0.0),
        domain,
    )?;

    let fxy = {
        let y = y.clone();
        ScalarField::new(move |px, py| {
            let yj = y.jet(py)?;
            Ok(-Jet2::from_y_jet(yj) / jordan_weight(px, yj))
        })
    };
    let integral = QuadraticForm::new(
        ScalarField::constant(1.0),
        fxy,
        ScalarField::constant(0.0),
    );

    let potential_u = {
        let (y, y1, y2) = (y.clone(), y1.clone(), y2.clone());
        ScalarField::new(move |px, py| {
            let y1p = {
                let j = y1.jet(py)?;
                Jet2 {
                    v: j.d1,
                    dx: 0.0,
                    dy: j.d2,
                    dxx: 0.0,
                    dxy: 0.0,
                    dyy: j.d3,
                }
            };
            let num = Jet2::var_x(px) * y1p + Jet2::from_y_jet(y2.jet(py)?);
            Ok(num / jordan_weight(px, y.jet(py)?))
        })
    };
    let potential_v = {
        let u = potential_u.clone();
        let (y, y1) = (y.clone(), y1.clone());
        ScalarField::new(move |px, py| {
            let yj = Jet2::from_y_jet(y.jet(py)?);
            let y1j = Jet2::from_y_jet(y1.jet(py)?);
            Ok(-(yj * u.eval(px, py)?) + y1j)
        })
    };

    Ok(NaturalSystem {
        metric,
        integral,
        potential_u,
        potential_v,
        case: CaseData::JordanBlock {
            y: y.clone(),
            y1: y1.clone(),
            y2: y2.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamflow;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn profile(src: &str, var: &str, lo: f64, hi: f64) -> FunctionProfile {
        FunctionProfile::parse(src, var, iv(lo, hi)).unwrap()
    }

    #[test]
    fn liouville_flat_null_momentum() {
        // X=2, Y=0, hats zero: g = 2(dx^2-dy^2), F = p_y^2.
        let sys = make_liouville(
            &profile("2", "x", -1.0, 1.0),
            &profile("0", "y", -1.0, 1.0),
            &profile("0", "x", -1.0, 1.0),
            &profile("0", "y", -1.0, 1.0),
        )
        .unwrap();
        let h = hamflow::hamiltonian(&sys, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        let f = hamflow::integral_value(&sys, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!((h - 0.0).abs() < 1e-15);
        assert!((f - 1.0).abs() < 1e-15);
        let g = sys.metric().eval(0.3, 0.4).unwrap();
        assert_eq!(g.xx.v, 2.0);
        assert_eq!(g.yy.v, -2.0);
    }

    #[test]
    fn liouville_quadratic_x_profile() {
        // X=x^2, Y=-1 at (1,0,1,1): H = 0, F = 1.
        let sys = make_liouville(
            &profile("x^2", "x", 0.5, 2.0),
            &profile("-1", "y", -1.0, 1.0),
            &profile("0", "x", 0.5, 2.0),
            &profile("0", "y", -1.0, 1.0),
        )
        .unwrap();
        let q = [1.0, 0.0, 1.0, 1.0];
        assert!((hamflow::hamiltonian(&sys, &q).unwrap()).abs() < 1e-15);
        assert!((hamflow::integral_value(&sys, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn liouville_degenerate_rejected() {
        // X in [0,1] and Y in [0,1] overlap: X = Y somewhere.
        let r = make_liouville(
            &profile("x", "x", 0.0, 1.0),
            &profile("y", "y", 0.0, 1.0),
            &profile("0", "x", 0.0, 1.0),
            &profile("0", "y", 0.0, 1.0),
        );
        assert!(matches!(r, Err(Error::DegenerateConstruction { .. })));
    }

    #[test]
    fn complex_liouville_constant_h() {
        // h = i, h1 = 0: g = dxdy, F = p_x^2 - p_y^2.
        let rect = Rect::new(iv(-1.0, 1.0), iv(-1.0, 1.0));
        let h = HolomorphicProfile::constant(num_complex::Complex64::new(0.0, 1.0), rect);
        let h1 = HolomorphicProfile::constant(num_complex::Complex64::new(0.0, 0.0), rect);
        let sys = make_complex_liouville(&h, &h1).unwrap();
        let q = [0.0, 0.0, 1.0, 0.0];
        assert!((hamflow::hamiltonian(&sys, &q).unwrap()).abs() < 1e-15);
        assert!((hamflow::integral_value(&sys, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_liouville_h_equals_z() {
        // h = z on y in [1,2]: Im h = y > 0; at (0,1,1,1): H = 2.
        let rect = Rect::new(iv(-1.0, 1.0), iv(1.0, 2.0));
        let h = HolomorphicProfile::parse("z", "z", rect).unwrap();
        let h1 = HolomorphicProfile::constant(num_complex::Complex64::new(0.0, 0.0), rect);
        let sys = make_complex_liouville(&h, &h1).unwrap();
        let q = [0.0, 1.0, 1.0, 1.0];
        assert!((hamflow::hamiltonian(&sys, &q).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_liouville_real_h_rejected() {
        // h = z on a rectangle crossing the real axis: Im h vanishes.
        let rect = Rect::new(iv(-1.0, 1.0), iv(-1.0, 1.0));
        let h = HolomorphicProfile::parse("z", "z", rect).unwrap();
        let h1 = HolomorphicProfile::constant(num_complex::Complex64::new(0.0, 0.0), rect);
        assert!(matches!(
            make_complex_liouville(&h, &h1),
            Err(Error::DegenerateConstruction { .. })
        ));
    }

    #[test]
    fn jordan_block_hamiltonian_with_potential() {
        // Y=sin(y), Y1=y, Y2=1 at (0,0,1,1): H = 2 + U = 3.
        let sys = make_jordan_block(
            &profile("sin(y)", "y", -1.5, 1.5),
            &profile("y", "y", -1.5, 1.5),
            &profile("1", "y", -1.5, 1.5),
            iv(-0.9, 0.9),
        )
        .unwrap();
        let q = [0.0, 0.0, 1.0, 1.0];
        assert!((hamflow::hamiltonian(&sys, &q).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn jordan_block_weight_must_stay_positive() {
        // Y = 2y gives Y' = 2; x range reaching -0.6 makes 1+2x < 0.
        let r = make_jordan_block(
            &profile("2*y", "y", -1.0, 1.0),
            &profile("0", "y", -1.0, 1.0),
            &profile("0", "y", -1.0, 1.0),
            iv(-0.8, 0.8),
        );
        assert!(matches!(r, Err(Error::DegenerateConstruction { .. })));
    }
}
