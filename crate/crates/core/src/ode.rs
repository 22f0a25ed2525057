//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! The solver is dimension-generic over fixed-size states and produces
//! dense output at a caller-chosen cadence through the standard quartic
//! interpolant of the DOPRI5 pair.  Right-hand sides are fallible: an
//! evaluation error (domain exit, degenerate metric, dead radicand) makes
//! the solver retreat and shrink the step; if no admissible step remains,
//! or the boundary keeps rejecting regrown steps, integration stops at
//! the last accepted state with a reason instead of fabricating values.

use crate::error::{Error, Result};

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights equal the last A row (FSAL); the embedded 4th-order
// weights are used for the error estimate.
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const BHAT: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

// Dense-output weights for the quartic interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reached the end of the requested time span.
    Completed,
    /// The right-hand side became unevaluable and the step could not be
    /// shrunk around it; the failing error is preserved alongside.
    RhsRejected,
    /// Error control forced the step below the representable limit.
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    /// Dense samples (t, state), including t0 and the final time reached.
    pub samples: Vec<(f64, [f64; N])>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub reason: StopReason,
    /// Last time integrated to.
    pub t_end: f64,
    /// The error that stopped integration, for `RhsRejected`.
    pub failure: Option<Error>,
}

pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Dense-output cadence; `None` records only accepted step endpoints.
    pub sample_dt: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            sample_dt: None,
            max_steps: 1_000_000,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coeff: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, c) in ks.iter().zip(coeff) {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrate dy/dt = f(t, y) from t0 to t1 (t1 > t0).
pub fn dopri5<F, const N: usize>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput {
            reason: format!("time span [{t0}, {t1}] must be finite and increasing"),
        });
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut evals = 1;

    let mut samples = vec![(t0, y0)];
    let mut next_sample = opts.sample_dt.map(|dt| t0 + dt);

    // Initial step: conservative fraction of the span, limited by the
    // initial slope scale.
    let mut h = {
        let slope: f64 = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let span = t1 - t0;
        (0.01 * span).min(if slope > 0.0 { 0.1 / slope } else { span })
    };

    let mut accepted = 0;
    let mut rejected = 0;
    let mut failure = None;
    let mut reason = StopReason::Completed;

    // A failure boundary approached tangentially can pin the solver just
    // outside it: sub-ulp steps succeed, the controller regrows the step,
    // the boundary rejects it again, and time advances in slivers.  A
    // cumulative failure budget turns that thrash into a stop.
    const MAX_STAGE_FAILURES: usize = 4096;
    let mut stage_failures = 0;

    'outer: while t < t1 {
        if accepted + rejected > opts.max_steps {
            return Err(Error::InvalidInput {
                reason: format!("step budget {} exhausted at t = {t}", opts.max_steps),
            });
        }
        h = h.min(t1 - t);
        let h_floor = 1e-14 * t.abs().max(1.0);
        if h < h_floor {
            reason = StopReason::StepUnderflow;
            break;
        }

        // Stages; an RHS failure shrinks the step instead of aborting.
        let mut ks: Vec<[f64; N]> = Vec::with_capacity(7);
        ks.push(k1);
        let mut stage_failed = None;
        for s in 1..7 {
            let ys = axpy(&y, h, &ks, &A[s][..s]);
            match f(t + C[s] * h, &ys) {
                Ok(k) => {
                    evals += 1;
                    ks.push(k);
                }
                Err(e) => {
                    stage_failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_failed {
            stage_failures += 1;
            if h <= 4.0 * h_floor || stage_failures > MAX_STAGE_FAILURES {
                failure = Some(e);
                reason = StopReason::RhsRejected;
                break 'outer;
            }
            h *= 0.5;
            rejected += 1;
            continue;
        }

        let y5 = axpy(&y, h, &ks, &B);
        let y4 = axpy(&y, h, &ks, &BHAT);

        // Weighted RMS error norm.
        let mut err = 0.0;
        for i in 0..N {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / sc;
            err += e * e;
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 {
            // FSAL: stage 7 is the derivative at the new point.
            let k_new = ks[6];
            let y_old = y;
            let t_old = t;
            t += h;
            accepted += 1;

            // Dense output across [t_old, t].
            if let Some(dt) = opts.sample_dt {
                let ydiff: [f64; N] = std::array::from_fn(|i| y5[i] - y_old[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * ks[0][i] - ydiff[i]);
                let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * ks[6][i] - bspl[i]);
                let r5: [f64; N] = std::array::from_fn(|i| {
                    h * (0..7).map(|s| D[s] * ks[s][i]).sum::<f64>()
                });
                while let Some(ts) = next_sample {
                    if ts > t || ts > t1 {
                        break;
                    }
                    let theta = (ts - t_old) / h;
                    let omt = 1.0 - theta;
                    let ys: [f64; N] = std::array::from_fn(|i| {
                        y_old[i]
                            + theta
                                * (ydiff[i] + omt * (bspl[i] + theta * (r4[i] + omt * r5[i])))
                    });
                    samples.push((ts, ys));
                    next_sample = Some(ts + dt);
                }
            } else {
                samples.push((t, y5));
            }

            y = y5;
            k1 = k_new;

            // PI-free step-size controller.
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0).min(0.9);
        }
    }

    if samples.last().map(|s| s.0) != Some(t) {
        samples.push((t, y));
    }

    Ok(OdeSolution {
        samples,
        accepted_steps: accepted,
        rejected_steps: rejected,
        rhs_evaluations: evals,
        reason,
        t_end: t,
        failure,
    })
}
