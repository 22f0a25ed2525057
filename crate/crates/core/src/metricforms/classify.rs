//! Pointwise classification of a (metric, integral) pair.
//!
//! The (1,1)-tensor G^i_j = sum_a g_{ja} F^{ia} determines which normal
//! form holds near a point: distinct real eigenvalues (Liouville), a
//! complex-conjugate pair (complex-Liouville), or a double eigenvalue
//! with a one-dimensional eigenspace (Jordan block).  When F is
//! proportional to the inverse metric the pair carries no information
//! and is reported separately; that test must precede the discriminant
//! trichotomy because proportional pairs also have zero discriminant.

use crate::error::Result;
use crate::jet2::Jet2;
use crate::metricforms::NaturalSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseLabel {
    /// Distinct real eigenvalues.
    RealDiagonal { lambda: f64, mu: f64 },
    /// Eigenvalues re +- i*im with im > 0.
    ComplexConjugate { re: f64, im: f64 },
    /// Double eigenvalue, single eigenvector.
    JordanBlock { lambda: f64 },
    /// F^{ij} = factor * g^{ij}: the integral is a multiple of the
    /// Hamiltonian's kinetic part.
    TrivialProportional { factor: f64 },
}

impl CaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::RealDiagonal { .. } => "real-diagonal",
            CaseLabel::ComplexConjugate { .. } => "complex-conjugate",
            CaseLabel::JordanBlock { .. } => "jordan-block",
            CaseLabel::TrivialProportional { .. } => "trivial-proportional",
        }
    }
}

/// G^i_j with full jets; row index is the upper (contravariant) index.
pub fn g_tensor_jets(system: &NaturalSystem, x: f64, y: f64) -> Result<[[Jet2; 2]; 2]> {
    let g = system.metric().eval(x, y)?;
    let f = system.integral().eval(x, y)?;
    Ok([
        [g.xx * f.xx + g.xy * f.xy, g.xy * f.xx + g.yy * f.xy],
        [g.xx * f.xy + g.xy * f.yy, g.xy * f.xy + g.yy * f.yy],
    ])
}

/// Values of G^i_j = sum_a g_{ja} F^{ia}.
pub fn g_tensor(system: &NaturalSystem, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    let j = g_tensor_jets(system, x, y)?;
    Ok([[j[0][0].v, j[0][1].v], [j[1][0].v, j[1][1].v]])
}

/// Classify the pair at a point.  `tol` is relative; the discriminant is
/// compared against `tol` times the squared Frobenius norm of G (matching
/// units), and the proportionality residual against `tol` times the
/// component scale.  1e-9 is a reasonable default.
pub fn classify(system: &NaturalSystem, x: f64, y: f64, tol: f64) -> Result<CaseLabel> {
    let g = system.metric().eval(x, y)?;
    let f = system.integral().eval(x, y)?;
    let ginv = g.inverse();

    let gt = g_tensor(system, x, y)?;
    let tr = gt[0][0] + gt[1][1];
    let det = gt[0][0] * gt[1][1] - gt[0][1] * gt[1][0];

    // Proportionality first: F ~ c g^{-1} forces a zero discriminant, so
    // it would otherwise masquerade as a Jordan block.
    let c = 0.5 * tr;
    let resid = (f.xx.v - c * ginv.xx.v)
        .abs()
        .max((f.xy.v - c * ginv.xy.v).abs())
        .max((f.yy.v - c * ginv.yy.v).abs());
    let prop_scale = f
        .frobenius()
        .max(c.abs() * ginv.frobenius())
        .max(f64::MIN_POSITIVE);
    if resid <= tol * prop_scale {
        return Ok(CaseLabel::TrivialProportional { factor: c });
    }

    let disc = tr * tr - 4.0 * det;
    let scale = (gt[0][0] * gt[0][0]
        + gt[0][1] * gt[0][1]
        + gt[1][0] * gt[1][0]
        + gt[1][1] * gt[1][1])
        .max(f64::MIN_POSITIVE);
    if disc > tol * scale {
        let s = disc.sqrt();
        Ok(CaseLabel::RealDiagonal {
            lambda: 0.5 * (tr + s),
            mu: 0.5 * (tr - s),
        })
    } else if disc < -tol * scale {
        Ok(CaseLabel::ComplexConjugate {
            re: 0.5 * tr,
            im: 0.5 * (-disc).sqrt(),
        })
    } else {
        Ok(CaseLabel::JordanBlock { lambda: 0.5 * tr })
    }
}
