//! The six subcommands.  Each returns the JSON document to publish plus
//! an optional CSV body; the caller owns the file layout and the stdout
//! echo.  Everything that varies from run to run is derived from the
//! scene file and the seed, never from ambient state.

use pseudoliouville::hamflow::{self, FlowStatus};
use pseudoliouville::metricforms::{self, CaseLabel};
use pseudoliouville::quadint::{self, Characteristic, ReducedStatus};
use pseudoliouville::{geoequiv, quantumop, Error, NaturalSystem};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::CliError;
use crate::jsonfmt::{float, num, num_array};
use crate::scene::SceneConfig;

pub struct CommandOutput {
    pub json: Value,
    pub csv: Option<String>,
}

fn doc(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

/// Case label and eigen-data at the domain centre.
pub fn classify(scene: &SceneConfig, system: &NaturalSystem) -> Result<CommandOutput, CliError> {
    let (cx, cy) = system.domain().center();
    let tol = scene.run.classify_tol();
    let label = metricforms::classify(system, cx, cy, tol)?;
    let mut pairs = vec![("case", Value::String(label.name().to_string()))];
    match label {
        CaseLabel::RealDiagonal { lambda, mu } => {
            pairs.push(("eigenvalues", num_array("eigenvalues", &[lambda, mu])?));
        }
        CaseLabel::ComplexConjugate { re, im } => {
            pairs.push(("eigenvalue_re", num("eigenvalue_re", re)?));
            pairs.push(("eigenvalue_im", num("eigenvalue_im", im)?));
        }
        CaseLabel::JordanBlock { lambda } => {
            pairs.push(("eigenvalue", num("eigenvalue", lambda)?));
        }
        CaseLabel::TrivialProportional { factor } => {
            pairs.push(("factor", num("factor", factor)?));
        }
    }
    pairs.push(("point", num_array("point", &[cx, cy])?));
    pairs.push(("tolerance", num("tolerance", tol)?));
    Ok(CommandOutput {
        json: doc(pairs),
        csv: None,
    })
}

/// Max |{H, F}| over seeded phase points: positions uniform over the
/// domain, momenta uniform in a box.
pub fn bracket_check(
    scene: &SceneConfig,
    system: &NaturalSystem,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let rect = system.domain();
    let n = scene.run.points();
    let scale = scene.run.momentum_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs = 0.0_f64;
    let mut max_norm = 0.0_f64;
    for _ in 0..n {
        let state = [
            rng.gen_range(rect.x.lo..=rect.x.hi),
            rng.gen_range(rect.y.lo..=rect.y.hi),
            rng.gen_range(-scale..=scale),
            rng.gen_range(-scale..=scale),
        ];
        let b = hamflow::poisson_bracket(system, &state)?.abs();
        let h = hamflow::hamiltonian(system, &state)?;
        let f = hamflow::integral_value(system, &state)?;
        max_abs = max_abs.max(b);
        max_norm = max_norm.max(b / (1.0 + h.abs() + f.abs()));
    }
    Ok(CommandOutput {
        json: doc(vec![
            ("max_abs_bracket", num("max_abs_bracket", max_abs)?),
            ("max_normalized_bracket", num("max_normalized_bracket", max_norm)?),
            ("points", Value::from(n as u64)),
            ("seed", Value::from(seed)),
        ]),
        csv: None,
    })
}

fn flow_status(status: FlowStatus) -> &'static str {
    match status {
        FlowStatus::Completed => "completed",
        FlowStatus::DomainExit => "domain-exit",
        FlowStatus::StepSizeUnderflow => "step-underflow",
    }
}

/// Trajectory of the natural Hamiltonian flow at a fixed sample cadence.
pub fn geodesic(scene: &SceneConfig, system: &NaturalSystem) -> Result<CommandOutput, CliError> {
    let init = scene.initial()?;
    let opts = scene.run.ode_options(init.t_end);
    let traj = hamflow::integrate(system, init.state, init.t_end, &opts)?;
    let (dh, df) = traj.relative_drift();

    let mut csv = String::from("t,x,y,px,py,h,f\n");
    for s in &traj.samples {
        let [x, y, px, py] = s.state;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            float(s.t),
            float(x),
            float(y),
            float(px),
            float(py),
            float(s.h),
            float(s.f)
        ));
    }

    Ok(CommandOutput {
        json: doc(vec![
            ("accepted_steps", Value::from(traj.accepted_steps as u64)),
            ("rejected_steps", Value::from(traj.rejected_steps as u64)),
            ("relative_drift_f", num("relative_drift_f", df)?),
            ("relative_drift_h", num("relative_drift_h", dh)?),
            ("rhs_evaluations", Value::from(traj.rhs_evaluations as u64)),
            ("samples", Value::from(traj.samples.len() as u64)),
            ("status", Value::String(flow_status(traj.status).to_string())),
            ("t_end", num("t_end", traj.t_end)?),
        ]),
        csv: Some(csv),
    })
}

/// Projective comparison of the metric with its constructed partner: the
/// residual of the equivalence equations over a grid, and the gap
/// between the fitted one-form and the case's closed form.
pub fn equiv_check(scene: &SceneConfig, system: &NaturalSystem) -> Result<CommandOutput, CliError> {
    let n = scene.run.grid();
    let points = system.domain().grid(n);
    let gbar = geoequiv::partner_metric(system)?;
    let (residual, fitted) = geoequiv::projective_residual(system.metric(), &gbar, &points)?;
    let closed = geoequiv::closed_one_form(system)?;
    let mut gap = 0.0_f64;
    for &(x, y) in &points {
        let a = fitted.eval(x, y)?;
        let b = closed.eval(x, y)?;
        gap = gap.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
    }
    Ok(CommandOutput {
        json: doc(vec![
            ("grid", Value::from(n as u64)),
            ("one_form_max_gap", num("one_form_max_gap", gap)?),
            ("points", Value::from(points.len() as u64)),
            ("projective_residual", num("projective_residual", residual)?),
        ]),
        csv: None,
    })
}

fn reduced_status(status: ReducedStatus) -> &'static str {
    match status {
        ReducedStatus::Completed => "completed",
        ReducedStatus::TurningPoint => "turning-point",
        ReducedStatus::DomainExit => "domain-exit",
    }
}

/// Base-space trajectory on the level set through the initial phase
/// point, with the characteristic K checked at every sample; K is
/// constant along the reduced flow, so its drift measures the quality of
/// the quadrature reduction.
pub fn quadrature(scene: &SceneConfig, system: &NaturalSystem) -> Result<CommandOutput, CliError> {
    let init = scene.initial()?;
    let reduced = quadint::reduced_data_from_phase(system, &init.state)?;
    let opts = scene.run.ode_options(init.t_end);
    let traj = quadint::integrate_reduced(system, &reduced, init.t_end, &opts)?;
    let (base_t, base) = *traj.samples.first().ok_or_else(|| {
        CliError::from(Error::InvalidInput {
            reason: "reduced trajectory has no samples".to_string(),
        })
    })?;
    debug_assert_eq!(base_t, 0.0);
    let k = Characteristic::new(system, reduced.h0, reduced.f0, reduced.branch, (base[0], base[1]))?;

    let mut drift = 0.0_f64;
    let mut csv = String::from("t,x,y,k_gap\n");
    for &(t, [x, y]) in &traj.samples {
        let gap = k.eval(x, y)?;
        drift = drift.max(gap.abs());
        csv.push_str(&format!(
            "{},{},{},{}\n",
            float(t),
            float(x),
            float(y),
            float(gap)
        ));
    }

    Ok(CommandOutput {
        json: doc(vec![
            ("f0", num("f0", reduced.f0)?),
            ("h0", num("h0", reduced.h0)?),
            ("max_k_drift", num("max_k_drift", drift)?),
            ("samples", Value::from(traj.samples.len() as u64)),
            ("status", Value::String(reduced_status(traj.status).to_string())),
            ("t_end", num("t_end", traj.t_end)?),
        ]),
        csv: Some(csv),
    })
}

/// Commutator of the quantised pair over a grid ladder, with the
/// standard localized test functions.
pub fn quantum_check(scene: &SceneConfig, system: &NaturalSystem) -> Result<CommandOutput, CliError> {
    let rect = system.domain();
    let spacings = scene.run.spacings();
    let tests = quantumop::standard_test_functions(&rect);
    let report = quantumop::commutator_convergence(system, &rect, &spacings, &tests)?;
    let labels: Vec<Value> = tests
        .iter()
        .map(|t| Value::String(t.label().to_string()))
        .collect();
    Ok(CommandOutput {
        json: doc(vec![
            ("fitted_order", num("fitted_order", report.fitted_order)?),
            ("residuals", num_array("residuals", &report.residuals)?),
            ("spacings", num_array("spacings", &report.spacings)?),
            ("test_functions", Value::Array(labels)),
        ]),
        csv: None,
    })
}
