//! Commuting second-order difference operators on a grid.
//!
//! For a metric g with weight w = sqrt|det g| the Beltrami-Laplace operator
//! is L_g u = -(1/w) sum_ij d_i (g^{ij} w d_j u), the quantization of a
//! quadratic integral F = sum F^{ij} p_i p_j is the divergence form
//! Q_F u = +(1/w) sum_ij d_i (F^{ij} w d_j u), and the operators
//! H = L_g - 2U and Q = Q_F + V built from a natural system commute.
//! Both are discretized here in flux form on a uniform
//! grid: diagonal terms take the coefficient g^{ij} w at cell midpoints,
//! mixed terms pair central differences with node coefficients.  The
//! discretization is exactly self-adjoint in the w-weighted inner product
//! for fields supported away from the boundary, and its leading stencil
//! coefficients reproduce the symbols -2H and F.
//!
//! The commutator of the two assembled operators shrinks at second order
//! under mesh refinement for the complex-Liouville and Jordan-block forms,
//! whose mixed flux terms carry genuinely two-variable coefficients.  The
//! Liouville form is stronger: every flux coefficient is a function of one
//! variable, the discrete operators inherit the continuum one-variable
//! operator algebra, and they commute exactly, leaving a residual at
//! rounding level on any grid.  Tampering with a potential stalls the
//! decay in every case, which is how the compatibility of U and V shows up
//! discretely.

use std::fmt;
use std::sync::Arc;

use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::metricforms::NaturalSystem;

/// Nodes closer than this many rings to the boundary are excluded from
/// commutator sup norms: one application of an operator is valid one node
/// in, the composition two nodes in, and a further safety ring keeps the
/// measured stencils fully interior.
const COMMUTATOR_MARGIN: usize = 4;

/// Uniform rectangular grid: node (i, j) sits at origin + (i hx, j hy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    origin: (f64, f64),
    hx: f64,
    hy: f64,
}

impl Grid {
    /// At least 8 nodes per side and positive finite spacings.
    pub fn new(origin: (f64, f64), spacing: (f64, f64), shape: (usize, usize)) -> Result<Grid> {
        let (nx, ny) = shape;
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 8 nodes per side, got {} x {}", nx, ny),
            });
        }
        let (hx, hy) = spacing;
        if !(hx > 0.0 && hx.is_finite() && hy > 0.0 && hy.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: format!("spacings must be positive and finite, got ({}, {})", hx, hy),
            });
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: "origin must be finite".to_string(),
            });
        }
        Ok(Grid { nx, ny, origin, hx, hy })
    }

    /// Grid spanning `rect` exactly with spacing as close to `h` as the
    /// side lengths allow (the step count is rounded, then the spacing is
    /// refitted so the last node lands on the far edge).
    pub fn cover(rect: &Rect, h: f64) -> Result<Grid> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: format!("target spacing must be positive and finite, got {}", h),
            });
        }
        let steps_x = (rect.x.length() / h).round().max(1.0) as usize;
        let steps_y = (rect.y.length() / h).round().max(1.0) as usize;
        Grid::new(
            (rect.x.lo, rect.y.lo),
            (rect.x.length() / steps_x as f64, rect.y.length() / steps_y as f64),
            (steps_x + 1, steps_y + 1),
        )
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + i as f64 * self.hx,
            self.origin.1 + j as f64 * self.hy,
        )
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn len(&self) -> usize {
        self.nx * self.ny
    }
}

/// Real values on the nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput {
                reason: format!(
                    "value count {} does not match {} x {} grid",
                    values.len(),
                    grid.nx,
                    grid.ny
                ),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput {
                reason: format!("non-finite value at node ({}, {})", k % grid.nx, k / grid.nx),
            });
        }
        Ok(GridField { grid, values })
    }

    pub fn sample(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        GridField::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> GridField {
        GridField {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Zeroes the outer `rings` node rings; used to build boundary-supported
    /// test fields for the self-adjointness checks.
    pub fn zeroed_margin(mut self, rings: usize) -> GridField {
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let edge = i.min(j).min(self.grid.nx - 1 - i).min(self.grid.ny - 1 - j);
                if edge < rings {
                    self.values[self.grid.idx(i, j)] = 0.0;
                }
            }
        }
        self
    }

    /// Sup norm over nodes at least `margin` rings away from the boundary.
    pub fn sup_interior(&self, margin: usize) -> Result<f64> {
        if 2 * margin >= self.grid.nx || 2 * margin >= self.grid.ny {
            return Err(Error::InvalidGrid {
                reason: format!(
                    "margin {} leaves no interior nodes on a {} x {} grid",
                    margin, self.grid.nx, self.grid.ny
                ),
            });
        }
        let mut sup = 0.0_f64;
        for j in margin..self.grid.ny - margin {
            for i in margin..self.grid.nx - margin {
                sup = sup.max(self.values[self.grid.idx(i, j)].abs());
            }
        }
        Ok(sup)
    }

    pub fn linear_combination(a: f64, u: &GridField, b: f64, v: &GridField) -> Result<GridField> {
        if u.grid != v.grid {
            return Err(Error::InvalidInput {
                reason: "grids of the combined fields do not match".to_string(),
            });
        }
        let values = u
            .values
            .iter()
            .zip(&v.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        GridField::new(u.grid, values)
    }
}

/// Which coefficient form an operator is assembled from.
enum Part {
    /// Inverse metric with flux sign -1 and zeroth-order term -2U.
    Metric,
    /// Integral coefficients with flux sign +1 and zeroth-order term +V.
    Integral,
}

/// Second-order central-difference operator in flux form.
///
/// The action is defined one node in from the boundary (the stencil uses
/// the eight neighbours); the outermost ring of the output is zero.
/// Diagonal coefficients live on cell midpoints, the mixed coefficient and
/// the weight w = sqrt|det g| on nodes.
pub struct DiscreteOperator {
    grid: Grid,
    sign: f64,
    /// c^{xx} w at x-midpoints, (nx - 1) x ny.
    mx: Vec<f64>,
    /// c^{yy} w at y-midpoints, nx x (ny - 1).
    my: Vec<f64>,
    /// c^{xy} w at nodes.
    mxy: Vec<f64>,
    /// w at nodes.
    weight: Vec<f64>,
    /// Zeroth-order coefficient at nodes, sign already folded in.
    zeroth: Vec<f64>,
}

impl fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("grid", &self.grid)
            .field("sign", &self.sign)
            .finish()
    }
}

/// H = L_g - 2U: flux-form Beltrami-Laplace operator of the system's
/// metric minus twice the potential, pointwise.
pub fn hamiltonian_operator(system: &NaturalSystem, grid: &Grid) -> Result<DiscreteOperator> {
    assemble(system, grid, Part::Metric)
}

/// Q = Q_F + V: flux-form quantization of the quadratic integral plus the
/// companion potential, pointwise.
pub fn integral_operator(system: &NaturalSystem, grid: &Grid) -> Result<DiscreteOperator> {
    assemble(system, grid, Part::Integral)
}

/// Coefficient matrix (xx, xy, yy) times the weight at one point.
fn weighted_coefficients(system: &NaturalSystem, part: &Part, x: f64, y: f64) -> Result<[f64; 3]> {
    let g = system.metric().eval(x, y)?;
    let w = g.det().v.abs().sqrt();
    let c = match part {
        Part::Metric => g.inverse().values(),
        Part::Integral => system.integral().eval(x, y)?.values(),
    };
    Ok([c[0] * w, c[1] * w, c[2] * w])
}

fn assemble(system: &NaturalSystem, grid: &Grid, part: Part) -> Result<DiscreteOperator> {
    let (sign, zeroth_scale, potential): (f64, f64, &ScalarField) = match part {
        Part::Metric => (-1.0, -2.0, system.potential_u()),
        Part::Integral => (1.0, 1.0, system.potential_v()),
    };
    let mut mxy = Vec::with_capacity(grid.len());
    let mut weight = Vec::with_capacity(grid.len());
    let mut zeroth = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.node(i, j);
            let g = system.metric().eval(x, y)?;
            let w = g.det().v.abs().sqrt();
            let c = weighted_coefficients(system, &part, x, y)?;
            mxy.push(c[1]);
            weight.push(w);
            zeroth.push(zeroth_scale * potential.eval(x, y)?.v);
        }
    }
    let mut mx = Vec::with_capacity((grid.nx - 1) * grid.ny);
    for j in 0..grid.ny {
        for i in 0..grid.nx - 1 {
            let (x, y) = grid.node(i, j);
            mx.push(weighted_coefficients(system, &part, x + 0.5 * grid.hx, y)?[0]);
        }
    }
    let mut my = Vec::with_capacity(grid.nx * (grid.ny - 1));
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx {
            let (x, y) = grid.node(i, j);
            my.push(weighted_coefficients(system, &part, x, y + 0.5 * grid.hy)?[2]);
        }
    }
    Ok(DiscreteOperator {
        grid: *grid,
        sign,
        mx,
        my,
        mxy,
        weight,
        zeroth,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Index of the x-midpoint between nodes (i, j) and (i + 1, j).
    fn mx_idx(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx - 1) + i
    }

    /// Index of the y-midpoint between nodes (i, j) and (i, j + 1).
    fn my_idx(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }

    pub fn apply(&self, u: &GridField) -> Result<GridField> {
        if u.grid != self.grid {
            return Err(Error::InvalidInput {
                reason: "operator grid does not match field grid".to_string(),
            });
        }
        let g = &self.grid;
        let v = &u.values;
        let mut out = vec![0.0; g.len()];
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let c = g.idx(i, j);
                let flux_x = self.mx[self.mx_idx(i, j)] * (v[g.idx(i + 1, j)] - v[c])
                    - self.mx[self.mx_idx(i - 1, j)] * (v[c] - v[g.idx(i - 1, j)]);
                let flux_y = self.my[self.my_idx(i, j)] * (v[g.idx(i, j + 1)] - v[c])
                    - self.my[self.my_idx(i, j - 1)] * (v[c] - v[g.idx(i, j - 1)]);
                let dy_east = v[g.idx(i + 1, j + 1)] - v[g.idx(i + 1, j - 1)];
                let dy_west = v[g.idx(i - 1, j + 1)] - v[g.idx(i - 1, j - 1)];
                let dx_north = v[g.idx(i + 1, j + 1)] - v[g.idx(i - 1, j + 1)];
                let dx_south = v[g.idx(i + 1, j - 1)] - v[g.idx(i - 1, j - 1)];
                let cross = self.mxy[g.idx(i + 1, j)] * dy_east
                    - self.mxy[g.idx(i - 1, j)] * dy_west
                    + self.mxy[g.idx(i, j + 1)] * dx_north
                    - self.mxy[g.idx(i, j - 1)] * dx_south;
                let flux = flux_x / (g.hx * g.hx)
                    + flux_y / (g.hy * g.hy)
                    + cross / (4.0 * g.hx * g.hy);
                out[c] = self.sign * flux / self.weight[c] + self.zeroth[c] * v[c];
            }
        }
        GridField::new(self.grid, out)
    }

    /// Leading stencil coefficients (s_xx, s_xy, s_yy) at an interior node:
    /// the operator acts like s_xx d^2_x + 2 s_xy d^2_xy + s_yy d^2_y plus
    /// lower order.  Equals the result of applying the stencil to the
    /// quadratics centred at the node, so it is exact introspection of the
    /// assembled coefficients, not a fresh evaluation of the fields.
    pub fn principal_symbol(&self, i: usize, j: usize) -> Result<[f64; 3]> {
        let g = &self.grid;
        if i == 0 || j == 0 || i >= g.nx - 1 || j >= g.ny - 1 {
            return Err(Error::InvalidInput {
                reason: format!("node ({}, {}) is not interior", i, j),
            });
        }
        let w = self.weight[g.idx(i, j)];
        let sxx = self.sign * (self.mx[self.mx_idx(i - 1, j)] + self.mx[self.mx_idx(i, j)])
            / (2.0 * w);
        let syy = self.sign * (self.my[self.my_idx(i, j - 1)] + self.my[self.my_idx(i, j)])
            / (2.0 * w);
        let sxy = self.sign
            * (self.mxy[g.idx(i + 1, j)]
                + self.mxy[g.idx(i - 1, j)]
                + self.mxy[g.idx(i, j + 1)]
                + self.mxy[g.idx(i, j - 1)])
            / (4.0 * w);
        Ok([sxx, sxy, syy])
    }

    /// Inner product sum w u v hx hy with the metric weight at nodes.
    pub fn weighted_inner(&self, u: &GridField, v: &GridField) -> Result<f64> {
        if u.grid != self.grid || v.grid != self.grid {
            return Err(Error::InvalidInput {
                reason: "operator grid does not match field grid".to_string(),
            });
        }
        let mut acc = 0.0;
        for k in 0..self.grid.len() {
            acc += self.weight[k] * u.values[k] * v.values[k];
        }
        Ok(acc * self.grid.hx * self.grid.hy)
    }

    /// |<Au, v> - <u, Av>| in the weighted inner product.  Zero up to
    /// rounding whenever u and v vanish near the boundary, because the flux
    /// form sums by parts exactly and the zeroth-order term is diagonal.
    pub fn symmetry_defect(&self, u: &GridField, v: &GridField) -> Result<f64> {
        let au = self.apply(u)?;
        let av = self.apply(v)?;
        Ok((self.weighted_inner(&au, v)? - self.weighted_inner(u, &av)?).abs())
    }
}

/// Smooth scalar test function with a label for reports.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.label)
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> TestFunction {
        TestFunction {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn sample(&self, grid: Grid) -> Result<GridField> {
        GridField::sample(grid, |x, y| (self.f)(x, y))
    }
}

/// Low-order polynomials times a Gaussian bump centred in `rect`.  The
/// width is a quarter of the shorter side, so the bump and its derivatives
/// decay well inside the margins that the commutator checks exclude.
pub fn standard_test_functions(rect: &Rect) -> Vec<TestFunction> {
    let cx = 0.5 * (rect.x.lo + rect.x.hi);
    let cy = 0.5 * (rect.y.lo + rect.y.hi);
    let sigma = 0.25 * rect.x.length().min(rect.y.length());
    let inv = 1.0 / (2.0 * sigma * sigma);
    let bump = move |x: f64, y: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) * inv).exp();
    vec![
        TestFunction::new("gaussian", bump),
        TestFunction::new("x gaussian", move |x, y| (x - cx) * bump(x, y)),
        TestFunction::new("y gaussian", move |x, y| (y - cy) * bump(x, y)),
        TestFunction::new("xy gaussian", move |x, y| (x - cx) * (y - cy) * bump(x, y)),
        TestFunction::new("saddle gaussian", move |x, y| {
            ((x - cx).powi(2) - (y - cy).powi(2)) * bump(x, y)
        }),
    ]
}

fn commutator_residual_with_margin(
    system: &NaturalSystem,
    grid: &Grid,
    tests: &[TestFunction],
    margin: usize,
) -> Result<f64> {
    if tests.is_empty() {
        return Err(Error::InvalidInput {
            reason: "commutator residual needs at least one test function".to_string(),
        });
    }
    let h = hamiltonian_operator(system, grid)?;
    let q = integral_operator(system, grid)?;
    let mut worst = 0.0_f64;
    for t in tests {
        let u = t.sample(*grid)?;
        let hq = h.apply(&q.apply(&u)?)?;
        let qh = q.apply(&h.apply(&u)?)?;
        let diff = GridField::linear_combination(1.0, &hq, -1.0, &qh)?;
        worst = worst.max(diff.sup_interior(margin)?);
    }
    Ok(worst)
}

/// Max over the test functions of ||(HQ - QH)u||_inf on nodes at least four
/// rings from the boundary, where both compositions are fully interior.
pub fn commutator_residual(
    system: &NaturalSystem,
    grid: &Grid,
    tests: &[TestFunction],
) -> Result<f64> {
    commutator_residual_with_margin(system, grid, tests, COMMUTATOR_MARGIN)
}

/// Commutator residuals on a mesh-refinement ladder and the slope fitted
/// to log residual against log spacing by least squares.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted_order: f64,
}

/// Runs the commutator residual over grids covering `rect` at the given
/// spacings.  The probed subrectangle is held fixed across the ladder (four
/// node rings on the coarsest grid), so the sup norms are comparable and
/// the fitted slope measures the truncation order alone.  The fit is only
/// meaningful when truncation dominates: a pair that commutes exactly (the
/// Liouville form, see the module notes) leaves rounding noise whose slope
/// carries no information.
pub fn commutator_convergence(
    system: &NaturalSystem,
    rect: &Rect,
    spacings: &[f64],
    tests: &[TestFunction],
) -> Result<ConvergenceReport> {
    if spacings.len() < 2 {
        return Err(Error::InvalidInput {
            reason: "convergence fit needs at least two spacings".to_string(),
        });
    }
    let coarsest = spacings.iter().cloned().fold(f64::NAN, f64::max);
    if !(coarsest > 0.0 && coarsest.is_finite()) {
        return Err(Error::InvalidInput {
            reason: "spacings must be positive and finite".to_string(),
        });
    }
    let mut residuals = Vec::with_capacity(spacings.len());
    for &h in spacings {
        let grid = Grid::cover(rect, h)?;
        let margin = ((COMMUTATOR_MARGIN as f64 * coarsest / grid.hx().max(grid.hy())).round()
            as usize)
            .max(COMMUTATOR_MARGIN);
        residuals.push(commutator_residual_with_margin(system, &grid, tests, margin)?);
    }
    let fitted_order = log_log_slope(spacings, &residuals)?;
    Ok(ConvergenceReport {
        spacings: spacings.to_vec(),
        residuals,
        fitted_order,
    })
}

/// Least-squares slope of ln r against ln h; exact zeros are clamped to the
/// smallest positive double so a rounding-level ladder fits a flat line
/// instead of producing NaN.
fn log_log_slope(spacings: &[f64], residuals: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if var <= 0.0 {
        return Err(Error::InvalidInput {
            reason: "spacings must not all coincide".to_string(),
        });
    }
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(cov / var)
}
