//! Scene files: one JSON document naming a constructed case, giving its
//! profiles as DSL strings, and carrying the run parameters the
//! subcommands share.
//!
//! A Liouville scene looks like
//!
//! `{"case": "liouville", "profiles": {"x": "2+sin(x)", "y": "exp(y)-3",
//! "xhat": "x", "yhat": "y"}, "domain": {"x": [-1.5, 1.5],
//! "y": [-1.0, 1.0]}, "initial": {"state": [0.2, -0.3, 0.9, 0.4],
//! "t_end": 10.0}, "seed": 7}`
//!
//! The x-profiles are expressions in x over domain.x, the y-profiles
//! expressions in y over domain.y; a complex-Liouville scene gives "h"
//! and "h1" in z over the whole rectangle, each either a plain string or
//! `{"expr": ..., "factor": [re, im]}` for a constant complex multiple.
//! A jordan-block scene gives "y", "y1", "y2"; domain.x is the strip
//! where 1 + x Y'(y) must stay positive.  All validation failures name
//! the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use pseudoliouville::metricforms::{make_complex_liouville, make_jordan_block, make_liouville};
use pseudoliouville::ode::OdeOptions;
use pseudoliouville::{FunctionProfile, HolomorphicProfile, Interval, NaturalSystem, Rect};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub case: String,
    pub profiles: BTreeMap<String, ProfileSpec>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Expr(String),
    Scaled(ScaledProfile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledProfile {
    pub expr: String,
    pub factor: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub state: [f64; 4],
    pub t_end: f64,
}

/// Optional knobs with working defaults; accessors apply them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub points: Option<usize>,
    pub momentum_scale: Option<f64>,
    pub ode_rel_tol: Option<f64>,
    pub ode_abs_tol: Option<f64>,
    pub samples: Option<usize>,
    pub classify_tol: Option<f64>,
    pub grid: Option<usize>,
    pub spacings: Option<Vec<f64>>,
}

impl SceneConfig {
    pub fn load(path: &Path) -> Result<SceneConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let scene: SceneConfig = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::new("config", format!("{}: {}", e.path(), e.inner())))?;
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(init) = &self.initial {
            if init.state.iter().any(|v| !v.is_finite()) {
                return Err(CliError::config("initial.state", "entries must be finite"));
            }
            if !(init.t_end.is_finite() && init.t_end > 0.0) {
                return Err(CliError::config("initial.t_end", "must be a positive time"));
            }
        }
        let positive = |path: &str, v: Option<f64>| -> Result<(), CliError> {
            match v {
                Some(v) if !(v.is_finite() && v > 0.0) => {
                    Err(CliError::config(path, "must be positive and finite"))
                }
                _ => Ok(()),
            }
        };
        positive("run.momentum_scale", self.run.momentum_scale)?;
        positive("run.ode_rel_tol", self.run.ode_rel_tol)?;
        positive("run.ode_abs_tol", self.run.ode_abs_tol)?;
        positive("run.classify_tol", self.run.classify_tol)?;
        if self.run.points == Some(0) {
            return Err(CliError::config("run.points", "needs at least one point"));
        }
        if matches!(self.run.samples, Some(n) if n < 2) {
            return Err(CliError::config("run.samples", "needs at least two samples"));
        }
        if matches!(self.run.grid, Some(n) if n < 2) {
            return Err(CliError::config("run.grid", "needs at least two nodes per axis"));
        }
        if let Some(s) = &self.run.spacings {
            if s.len() < 2 {
                return Err(CliError::config(
                    "run.spacings",
                    "a convergence ladder needs at least two spacings",
                ));
            }
            if s.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                return Err(CliError::config("run.spacings", "must be positive and finite"));
            }
        }
        Ok(())
    }

    pub fn rect(&self) -> Result<Rect, CliError> {
        let x = Interval::new(self.domain.x[0], self.domain.x[1])
            .map_err(|e| CliError::at_path("domain.x", e))?;
        let y = Interval::new(self.domain.y[0], self.domain.y[1])
            .map_err(|e| CliError::at_path("domain.y", e))?;
        Ok(Rect::new(x, y))
    }

    pub fn build_system(&self) -> Result<NaturalSystem, CliError> {
        let rect = self.rect()?;
        match self.case.as_str() {
            "liouville" => {
                self.check_profile_keys(&["x", "y", "xhat", "yhat"])?;
                let x = self.function_profile("x", "x", rect.x)?;
                let y = self.function_profile("y", "y", rect.y)?;
                let xhat = self.function_profile("xhat", "x", rect.x)?;
                let yhat = self.function_profile("yhat", "y", rect.y)?;
                make_liouville(&x, &y, &xhat, &yhat).map_err(CliError::from)
            }
            "complex-liouville" => {
                self.check_profile_keys(&["h", "h1"])?;
                let h = self.holomorphic_profile("h", rect)?;
                let h1 = self.holomorphic_profile("h1", rect)?;
                make_complex_liouville(&h, &h1).map_err(CliError::from)
            }
            "jordan-block" => {
                self.check_profile_keys(&["y", "y1", "y2"])?;
                let y = self.function_profile("y", "y", rect.y)?;
                let y1 = self.function_profile("y1", "y", rect.y)?;
                let y2 = self.function_profile("y2", "y", rect.y)?;
                make_jordan_block(&y, &y1, &y2, rect.x).map_err(CliError::from)
            }
            other => Err(CliError::config(
                "case",
                format!(
                    "unknown case \"{other}\" (expected \"liouville\", \
                     \"complex-liouville\", or \"jordan-block\")"
                ),
            )),
        }
    }

    fn check_profile_keys(&self, expected: &[&str]) -> Result<(), CliError> {
        for key in expected {
            if !self.profiles.contains_key(*key) {
                return Err(CliError::config(
                    &format!("profiles.{key}"),
                    format!("missing (required for case \"{}\")", self.case),
                ));
            }
        }
        for key in self.profiles.keys() {
            if !expected.contains(&key.as_str()) {
                return Err(CliError::config(
                    &format!("profiles.{key}"),
                    format!("not a profile of case \"{}\"", self.case),
                ));
            }
        }
        Ok(())
    }

    fn function_profile(
        &self,
        key: &str,
        var: &str,
        domain: Interval,
    ) -> Result<FunctionProfile, CliError> {
        let path = format!("profiles.{key}");
        match &self.profiles[key] {
            ProfileSpec::Expr(src) => FunctionProfile::parse(src, var, domain)
                .map_err(|e| CliError::at_path(&path, e)),
            ProfileSpec::Scaled(_) => Err(CliError::config(
                &path,
                "a complex factor applies only to holomorphic profiles",
            )),
        }
    }

    fn holomorphic_profile(&self, key: &str, rect: Rect) -> Result<HolomorphicProfile, CliError> {
        let path = format!("profiles.{key}");
        match &self.profiles[key] {
            ProfileSpec::Expr(src) => HolomorphicProfile::parse(src, "z", rect)
                .map_err(|e| CliError::at_path(&path, e)),
            ProfileSpec::Scaled(s) => {
                let factor = Complex64::new(s.factor[0], s.factor[1]);
                HolomorphicProfile::parse_scaled(&s.expr, "z", rect, factor)
                    .map_err(|e| CliError::at_path(&path, e))
            }
        }
    }

    pub fn initial(&self) -> Result<&InitialSpec, CliError> {
        self.initial.as_ref().ok_or_else(|| {
            CliError::config(
                "initial",
                "this command needs initial conditions {\"state\": [x, y, px, py], \"t_end\": T}",
            )
        })
    }
}

impl RunSpec {
    pub fn points(&self) -> usize {
        self.points.unwrap_or(1000)
    }

    pub fn momentum_scale(&self) -> f64 {
        self.momentum_scale.unwrap_or(2.0)
    }

    pub fn classify_tol(&self) -> f64 {
        self.classify_tol.unwrap_or(1e-9)
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or(16)
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.spacings
            .clone()
            .unwrap_or_else(|| vec![0.1, 0.05, 0.025])
    }

    /// Integrator settings with dense output at a fixed cadence, so the
    /// sample times (hence the CSV rows) do not depend on step-size
    /// control history.
    pub fn ode_options(&self, t_end: f64) -> OdeOptions {
        let samples = self.samples.unwrap_or(400);
        OdeOptions {
            rel_tol: self.ode_rel_tol.unwrap_or(1e-10),
            abs_tol: self.ode_abs_tol.unwrap_or(1e-10),
            sample_dt: Some(t_end / samples as f64),
            ..OdeOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SceneConfig, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let scene: SceneConfig = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::new("config", format!("{}: {}", e.path(), e.inner())))?;
        scene.validate()?;
        Ok(scene)
    }

    const LIOUVILLE: &str = r#"{
        "case": "liouville",
        "profiles": {"x": "2+sin(x)", "y": "exp(y)-3", "xhat": "x", "yhat": "y"},
        "domain": {"x": [-1.5, 1.5], "y": [-1.0, 1.0]},
        "initial": {"state": [0.2, -0.3, 0.9, 0.4], "t_end": 10.0},
        "seed": 7
    }"#;

    #[test]
    fn liouville_scene_builds() {
        let scene = parse(LIOUVILLE).unwrap();
        let system = scene.build_system().unwrap();
        assert_eq!(system.case_tag().name(), "liouville");
        assert_eq!(scene.seed, Some(7));
        assert_eq!(scene.initial().unwrap().state, [0.2, -0.3, 0.9, 0.4]);
    }

    #[test]
    fn scaled_holomorphic_profile_builds() {
        let scene = parse(
            r#"{
                "case": "complex-liouville",
                "profiles": {
                    "h": {"expr": "2+cos(z)", "factor": [0.0, 1.0]},
                    "h1": "z"
                },
                "domain": {"x": [-1.0, 1.0], "y": [-1.0, 1.0]}
            }"#,
        )
        .unwrap();
        let system = scene.build_system().unwrap();
        assert_eq!(system.case_tag().name(), "complex-liouville");
    }

    #[test]
    fn missing_profile_is_named() {
        let scene = parse(
            r#"{
                "case": "jordan-block",
                "profiles": {"y": "sin(y)", "y1": "y"},
                "domain": {"x": [-0.9, 0.9], "y": [-0.8, 0.8]}
            }"#,
        )
        .unwrap();
        let e = scene.build_system().unwrap_err();
        assert_eq!(e.kind(), "config");
        assert!(e.message().contains("profiles.y2"), "{e}");
    }

    #[test]
    fn stray_profile_is_named() {
        let scene = parse(
            r#"{
                "case": "liouville",
                "profiles": {"x": "1+x", "y": "y", "xhat": "0", "yhat": "0", "h": "z"},
                "domain": {"x": [2.0, 3.0], "y": [-1.0, 1.0]}
            }"#,
        )
        .unwrap();
        let e = scene.build_system().unwrap_err();
        assert!(e.message().contains("profiles.h"), "{e}");
    }

    #[test]
    fn profile_parse_errors_carry_path_and_offset() {
        let scene = parse(
            r#"{
                "case": "liouville",
                "profiles": {"x": "2+sin(", "y": "exp(y)-3", "xhat": "x", "yhat": "y"},
                "domain": {"x": [-1.5, 1.5], "y": [-1.0, 1.0]}
            }"#,
        )
        .unwrap();
        let e = scene.build_system().unwrap_err();
        assert_eq!(e.kind(), "parse");
        assert!(e.message().contains("profiles.x"), "{e}");
        assert!(e.message().contains("byte"), "{e}");
    }

    #[test]
    fn unknown_member_is_rejected_with_its_path() {
        let e = parse(r#"{"case": "liouville", "profiles": {}, "domain": {"x": [0, 1], "y": [0, 1]}, "extra": 1}"#)
            .unwrap_err();
        assert_eq!(e.kind(), "config");
        assert!(e.message().contains("extra"), "{e}");
    }

    #[test]
    fn degenerate_domain_is_rejected() {
        let scene = parse(
            r#"{
                "case": "liouville",
                "profiles": {"x": "x", "y": "y", "xhat": "0", "yhat": "0"},
                "domain": {"x": [1.0, 1.0], "y": [-1.0, 1.0]}
            }"#,
        )
        .unwrap();
        let e = scene.build_system().unwrap_err();
        assert!(e.message().contains("domain.x"), "{e}");
    }

    #[test]
    fn run_values_are_checked() {
        let bad = r#"{
            "case": "liouville",
            "profiles": {"x": "x", "y": "y", "xhat": "0", "yhat": "0"},
            "domain": {"x": [2.0, 3.0], "y": [-1.0, 1.0]},
            "run": {"spacings": [0.1]}
        }"#;
        let e = parse(bad).unwrap_err();
        assert!(e.message().contains("run.spacings"), "{e}");
    }

    #[test]
    fn defaults_apply_when_run_is_absent() {
        let scene = parse(LIOUVILLE).unwrap();
        assert_eq!(scene.run.points(), 1000);
        assert_eq!(scene.run.spacings(), vec![0.1, 0.05, 0.025]);
        let opts = scene.run.ode_options(10.0);
        assert_eq!(opts.rel_tol, 1e-10);
        assert_eq!(opts.sample_dt, Some(0.025));
    }
}
