//! Construction, classification, and numerical verification of 2-D
//! pseudo-Riemannian metrics of signature (+,-) whose geodesic flows admit
//! an integral quadratic in momenta.
//!
//! The library is organised around three normal forms for such pairs
//! (metric, quadratic integral), distinguished by the spectrum of the
//! (1,1)-tensor G built from the pair:
//!
//! * **Liouville**: g = (X(x) - Y(y))(dx^2 - dy^2), real distinct
//!   eigenvalues;
//! * **complex-Liouville**: g = Im(h) dxdy with h holomorphic, complex
//!   conjugate eigenvalues;
//! * **Jordan block**: g = (1 + x Y'(y)) dxdy, a double eigenvalue with a
//!   one-dimensional eigenspace.
//!
//! Around these, the crate provides:
//!
//! * [`expr`]: a small expression language with forward-mode jets
//!   ([`jet`], [`jet2`]) used for every derivative in the crate;
//! * [`metricforms`]: the three constructors with compatible potentials,
//!   the pointwise classifier, the null-coordinate Killing PDE residual,
//!   and arc-length-style coordinate normalisation;
//! * [`hamflow`]: Hamiltonian flow, Poisson brackets, and conservation
//!   diagnostics with an adaptive embedded Runge-Kutta integrator
//!   ([`ode`]);
//! * [`geoequiv`]: geodesically equivalent partner metrics, projective
//!   equivalence fitting, and unparametrized geodesic comparison;
//! * [`quadint`]: momentum recovery from the two integral values, reduced
//!   first-order dynamics, turning points, and the characteristic
//!   quadrature K ([`quad`] supplies adaptive Gauss-Kronrod panels);
//! * [`quantumop`]: self-adjoint second-order finite-difference operators
//!   whose commutator shrinks at second order exactly when the potentials
//!   satisfy the compatibility condition.
//!
//! All randomised sampling takes explicit seeds and every floating-point
//! artefact (CSV/JSON writers live in the CLI crate) is deterministic.

pub mod domain;
pub mod error;
pub mod expr;
pub mod field;
pub mod geoequiv;
pub mod hamflow;
pub mod jet;
pub mod jet2;
pub mod metricforms;
pub mod ode;
pub mod quad;
pub mod quadint;
pub mod quantumop;
pub mod roots;

pub use domain::{Interval, Rect};
pub use error::{Error, Result};
pub use expr::{FunctionProfile, HolomorphicProfile};
pub use field::{MetricField, QuadraticForm, ScalarField};
pub use metricforms::{CaseLabel, CaseTag, NaturalSystem};
