//! Hamiltonian flow of a natural system.
//!
//! Phase points are `[x, y, px, py]`.  The Hamiltonian is
//! H = (1/2) g^{ij} p_i p_j + U and the companion observable is
//! F = F^{ij} p_i p_j + V (cross term counted twice).  Spatial
//! derivatives come from the fields' jets, so brackets and Hamilton's
//! equations need no finite differencing.

use crate::error::{Error, Result};
use crate::field::SymJet2;
use crate::metricforms::NaturalSystem;
use crate::ode::{self, OdeOptions, StopReason};

fn quad_value(m: &SymJet2, px: f64, py: f64) -> f64 {
    m.xx.v * px * px + 2.0 * m.xy.v * px * py + m.yy.v * py * py
}

/// d/dx and d/dy of the momentum quadratic built on `m`.
fn quad_gradient(m: &SymJet2, px: f64, py: f64) -> (f64, f64) {
    (
        m.xx.dx * px * px + 2.0 * m.xy.dx * px * py + m.yy.dx * py * py,
        m.xx.dy * px * px + 2.0 * m.xy.dy * px * py + m.yy.dy * py * py,
    )
}

pub fn hamiltonian(system: &NaturalSystem, state: &[f64; 4]) -> Result<f64> {
    let [x, y, px, py] = *state;
    let ginv = system.metric().eval(x, y)?.inverse();
    let u = system.potential_u().eval(x, y)?.v;
    Ok(0.5 * quad_value(&ginv, px, py) + u)
}

pub fn integral_value(system: &NaturalSystem, state: &[f64; 4]) -> Result<f64> {
    let [x, y, px, py] = *state;
    let f = system.integral().eval(x, y)?;
    let v = system.potential_v().eval(x, y)?.v;
    Ok(quad_value(&f, px, py) + v)
}

/// Hamilton's equations: (dx/dt, dy/dt, dpx/dt, dpy/dt).
pub fn hamiltonian_rhs(system: &NaturalSystem, state: &[f64; 4]) -> Result<[f64; 4]> {
    let [x, y, px, py] = *state;
    let ginv = system.metric().eval(x, y)?.inverse();
    let u = system.potential_u().eval(x, y)?;
    let (hx, hy) = quad_gradient(&ginv, px, py);
    Ok([
        ginv.xx.v * px + ginv.xy.v * py,
        ginv.xy.v * px + ginv.yy.v * py,
        -(0.5 * hx + u.dx),
        -(0.5 * hy + u.dy),
    ])
}

/// {H, F} split into the purely kinetic bracket {H_g, F_g} and the part
/// linear in momenta contributed by the potentials.  Their sum is the
/// full bracket; the linear part equals -g^{ja} p_a r_j with r the
/// residual of [`potential_condition_residual`].
pub fn bracket_split(system: &NaturalSystem, state: &[f64; 4]) -> Result<(f64, f64)> {
    let [x, y, px, py] = *state;
    let ginv = system.metric().eval(x, y)?.inverse();
    let f = system.integral().eval(x, y)?;
    let u = system.potential_u().eval(x, y)?;
    let v = system.potential_v().eval(x, y)?;

    let (hgx, hgy) = quad_gradient(&ginv, px, py);
    let (fgx, fgy) = quad_gradient(&f, px, py);
    let dh_dpx = ginv.xx.v * px + ginv.xy.v * py;
    let dh_dpy = ginv.xy.v * px + ginv.yy.v * py;
    let df_dpx = 2.0 * (f.xx.v * px + f.xy.v * py);
    let df_dpy = 2.0 * (f.xy.v * px + f.yy.v * py);
    let kinetic = dh_dpx * fgx + dh_dpy * fgy - 0.5 * hgx * df_dpx - 0.5 * hgy * df_dpy;

    let linear = dh_dpx * v.dx + dh_dpy * v.dy - df_dpx * u.dx - df_dpy * u.dy;
    Ok((kinetic, linear))
}

pub fn poisson_bracket(system: &NaturalSystem, state: &[f64; 4]) -> Result<f64> {
    let (kinetic, linear) = bracket_split(system, state)?;
    Ok(kinetic + linear)
}

/// Residual of the compatibility condition dV = 2 G dU that makes the
/// potentials preserve commutation: r_j = 2 G^i_j dU/dx^i - dV/dx^j.
pub fn potential_condition_residual(system: &NaturalSystem, x: f64, y: f64) -> Result<[f64; 2]> {
    let gt = crate::metricforms::g_tensor(system, x, y)?;
    let u = system.potential_u().eval(x, y)?;
    let v = system.potential_v().eval(x, y)?;
    Ok([
        2.0 * (gt[0][0] * u.dx + gt[1][0] * u.dy) - v.dx,
        2.0 * (gt[0][1] * u.dx + gt[1][1] * u.dy) - v.dy,
    ])
}

/// Max-norm of the potential compatibility residual over a point set.
pub fn check_potential_condition(system: &NaturalSystem, points: &[(f64, f64)]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &(x, y) in points {
        let r = potential_condition_residual(system, x, y)?;
        worst = worst.max(r[0].abs()).max(r[1].abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    /// Reached the requested final time.
    Completed,
    /// A step left the declared domain (or hit a metric guard); the
    /// trajectory is truncated at the last accepted state.
    DomainExit,
    /// The controller could not make progress.
    StepSizeUnderflow,
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: [f64; 4],
    pub h: f64,
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub status: FlowStatus,
    pub t_end: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

impl Trajectory {
    /// Largest |H - H(0)| and |F - F(0)| over the samples, each divided
    /// by max(1, |initial value|).
    pub fn relative_drift(&self) -> (f64, f64) {
        let h0 = self.samples[0].h;
        let f0 = self.samples[0].f;
        let mut dh = 0.0_f64;
        let mut df = 0.0_f64;
        for s in &self.samples {
            dh = dh.max((s.h - h0).abs());
            df = df.max((s.f - f0).abs());
        }
        (dh / h0.abs().max(1.0), df / f0.abs().max(1.0))
    }
}

/// Integrate the flow from t = 0 to `t_end`, recording H and F at every
/// sample.  Leaving the domain truncates rather than fails.
pub fn integrate(
    system: &NaturalSystem,
    state0: [f64; 4],
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let sol = ode::dopri5(
        |_, y: &[f64; 4]| hamiltonian_rhs(system, y),
        0.0,
        t_end,
        state0,
        opts,
    )?;
    let status = match sol.reason {
        StopReason::Completed => FlowStatus::Completed,
        StopReason::RhsRejected => match sol.failure {
            Some(Error::OutOfDomain { .. }) | Some(Error::DegenerateMetric { .. }) => {
                FlowStatus::DomainExit
            }
            Some(e) => return Err(e),
            None => FlowStatus::DomainExit,
        },
        StopReason::StepUnderflow => FlowStatus::StepSizeUnderflow,
    };
    let mut samples = Vec::with_capacity(sol.samples.len());
    for (t, state) in sol.samples {
        samples.push(TrajectorySample {
            t,
            state,
            h: hamiltonian(system, &state)?,
            f: integral_value(system, &state)?,
        });
    }
    Ok(Trajectory {
        samples,
        status,
        t_end: sol.t_end,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
        rhs_evaluations: sol.rhs_evaluations,
    })
}
