//! Shooting solver for the reduced first-order problem.
//!
//! The wave profile is equivalent to a positive solution of
//!
//! ```text
//! y'(u) = p' [ (c + h(u)) (y+)^(1/p) - f(u) ],   y(0) = y(1) = 0,
//! ```
//!
//! with `f = D^(p'-1) g`. For fixed `c` the terminal-value problem from
//! `y(1) = 0` has a unique solution; a wave exists exactly when the shooting
//! residual
//!
//! ```text
//! F(c) = y_c(theta)^(1/p') - c*theta - H(theta)
//! ```
//!
//! vanishes, and `F` is strictly decreasing in `c`, so the unique speed `c*`
//! is found by bisection over an analytic bracket.
//!
//! Integration runs in the variable `z = y^(1/p')`, whose equation
//! `z' = (c + h) - f / z^(p'-1)` has mildly singular stiffness `~1/(1-u)`
//! at the terminal end instead of the much harsher degeneracy of the
//! `y`-form; results are reported in `y` throughout. The non-Lipschitz
//! startup at `u = 1` is resolved on a thin layer by fixed-point iteration
//! of the integral form, seeded with `y = p' int_u^1 f`.

use crate::criteria::{self, Verdict};
use crate::error::{Error, Result};
use crate::model::Problem;

/// Tolerances of the shooting solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative width of the final speed bracket.
    pub tol_c: f64,
    /// Local error tolerance of the adaptive stepper.
    pub tol_ode: f64,
    /// Acceptable shooting residual at the returned speed.
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol_c: 1e-10, tol_ode: 1e-11, residual_tol: 1e-9 }
    }
}

/// Width of the fixed-point startup layer at `u = 1`, relative to `1-theta`.
const LAYER_WIDTH_FACTOR: f64 = 1e-4;
/// Deepest resolved distance from `u = 1` inside the layer.
const LAYER_FLOOR: f64 = 1e-13;
const LAYER_MAX_ITER: usize = 50;
const LAYER_FP_TOL: f64 = 1e-12;

/// One backward integration of the reduced problem at fixed speed `c`.
#[derive(Debug, Clone)]
pub struct ShootingOutcome {
    c: f64,
    theta: f64,
    p_conj: f64,
    eps: f64,
    table: ZTable,
    layer: StartupLayer,
    z_theta: f64,
    residual_f: f64,
    interior_positive: bool,
    samples: Vec<(f64, f64)>,
}

impl ShootingOutcome {
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `y_c(theta)`.
    pub fn y_theta(&self) -> f64 {
        self.z_theta.powf(self.p_conj)
    }

    /// `y_c(theta)^(1/p')`.
    pub fn z_theta(&self) -> f64 {
        self.z_theta
    }

    /// Shooting residual `F(c) = y_c(theta)^(1/p') - c*theta - H(theta)`.
    pub fn residual(&self) -> f64 {
        self.residual_f
    }

    /// Whether `y_c > 0` held at every interior sample of `(0,1)`; together
    /// with `F >= 0` this is the sup-characterization membership test.
    pub fn positive_on_unit(&self) -> bool {
        self.interior_positive && self.residual_f >= 0.0
    }

    /// Whether `y_c > 0` held on the integrated range `(theta, 1)`.
    pub fn interior_positive(&self) -> bool {
        self.interior_positive
    }

    /// Monotone `(u, y)` sample table covering `[0, 1]`.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Evaluate `y_c` anywhere on `[0, 1]`.
    ///
    /// Below the ignition threshold the separable closed form is exact; on
    /// `(theta, 1-eps]` cubic Hermite interpolation of the integrated
    /// solution is used; inside the startup layer a log-log interpolant
    /// respects the power behavior.
    pub fn eval_y(&self, problem: &Problem, u: f64) -> f64 {
        self.eval_z(problem, u).powf(self.p_conj)
    }

    /// Evaluate `z = y^(1/p')` anywhere on `[0, 1]`.
    pub fn eval_z(&self, problem: &Problem, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        if u <= self.theta {
            let flux = problem.convective_flux(u.max(0.0)).unwrap_or(f64::NAN);
            let flux_theta = problem.convective_flux(self.theta).unwrap_or(f64::NAN);
            let z = self.z_theta + self.c * (u - self.theta) + flux - flux_theta;
            return z.max(0.0);
        }
        if u <= 1.0 - self.eps {
            return self.table.eval(u).max(0.0);
        }
        self.layer.eval_y(1.0 - u).max(0.0).powf(1.0 / self.p_conj)
    }
}

/// Closed-form continuation of `y_c` below the ignition threshold:
/// `y^(1/p')(u) = y_theta^(1/p') + c (u - theta) + H(u) - H(theta)`,
/// clamped at zero.
#[derive(Debug, Clone, Copy)]
pub struct SeparableBranch {
    pub c: f64,
    pub z_theta: f64,
    theta: f64,
}

impl SeparableBranch {
    pub fn z(&self, problem: &Problem, u: f64) -> Result<f64> {
        if !(0.0..=self.theta).contains(&u) {
            return Err(Error::Domain(format!(
                "separable branch lives on [0, theta], got u = {u}"
            )));
        }
        let z = self.z_theta + self.c * (u - self.theta) + problem.convective_flux(u)?
            - problem.convective_flux(self.theta)?;
        Ok(z.max(0.0))
    }

    pub fn y(&self, problem: &Problem, u: f64) -> Result<f64> {
        Ok(self.z(problem, u)?.powf(problem.p_conj()))
    }
}

/// Build the separable continuation from a computed `y(theta)`.
pub fn separable_branch(problem: &Problem, c: f64, y_theta: f64) -> Result<SeparableBranch> {
    if !(y_theta >= 0.0) {
        return Err(Error::Domain(format!("y_theta must be nonnegative, got {y_theta}")));
    }
    Ok(SeparableBranch {
        c,
        z_theta: y_theta.powf(1.0 / problem.p_conj()),
        theta: problem.theta(),
    })
}

// ---------------------------------------------------------------------------
// Startup layer
// ---------------------------------------------------------------------------

/// Fixed-point table on the thin layer `[1-eps, 1]`, indexed by distance
/// `d = 1-u` in descending order (`dist[0] = eps`).
#[derive(Debug, Clone)]
struct StartupLayer {
    dist: Vec<f64>,
    y: Vec<f64>,
}

impl StartupLayer {
    /// Interpolate `y` at distance `d` from `u = 1`; log-log between nodes so
    /// pure powers are represented exactly.
    fn eval_y(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        let n = self.dist.len();
        if d >= self.dist[0] {
            return self.y[0];
        }
        let d_min = self.dist[n - 1];
        if d < d_min {
            // Power extension below the deepest node.
            if self.y[n - 1] <= 0.0 {
                return 0.0;
            }
            let m = if n >= 2 && self.y[n - 2] > 0.0 {
                (self.y[n - 2] / self.y[n - 1]).ln() / (self.dist[n - 2] / d_min).ln()
            } else {
                1.0
            };
            return self.y[n - 1] * (d / d_min).powf(m.max(0.0));
        }
        // dist is descending; locate the bracketing pair.
        let mut j = 0;
        while j + 1 < n && self.dist[j + 1] > d {
            j += 1;
        }
        let (d0, d1) = (self.dist[j], self.dist[j + 1]);
        let (y0, y1) = (self.y[j], self.y[j + 1]);
        if y0 > 0.0 && y1 > 0.0 {
            let t = (d / d1).ln() / (d0 / d1).ln();
            (y1.ln() + t * (y0.ln() - y1.ln())).exp()
        } else {
            y1 + (y0 - y1) * (d - d1) / (d0 - d1)
        }
    }
}

/// Integral of a positive near-power function tabulated at descending
/// distances, over `[d_inner, d_outer]`; exact for pure powers, trapezoid
/// fallback when a node vanishes.
fn power_panel(d_outer: f64, w_outer: f64, d_inner: f64, w_inner: f64) -> f64 {
    if w_outer > 0.0 && w_inner > 0.0 {
        let m = (w_outer / w_inner).ln() / (d_outer / d_inner).ln();
        if m > -0.9 {
            return (w_outer * d_outer - w_inner * d_inner) / (m + 1.0);
        }
    }
    0.5 * (w_outer + w_inner) * (d_outer - d_inner)
}

fn build_layer(problem: &Problem, c: f64, eps: f64) -> Result<StartupLayer> {
    let p = problem.p();
    let pc = problem.p_conj();

    let mut dist = Vec::new();
    let mut d = eps;
    let floor = LAYER_FLOOR * (1.0 - problem.theta()).min(1.0);
    while d > floor {
        dist.push(d);
        d *= 0.5;
    }
    dist.push(d);
    let n = dist.len();

    // Forcing primitive p' * int_u^1 f at every node; this is also the
    // fixed-point seed.
    let mut forcing = Vec::with_capacity(n);
    for &dj in &dist {
        forcing.push(pc * criteria::reduced_reaction_integral_from(problem, 1.0 - dj)?);
    }

    let mut y: Vec<f64> = forcing.clone();
    let scale = 1.0 + forcing[0];

    for _ in 0..LAYER_MAX_ITER {
        // w(d) = (c + h(1-d)) y(d)^(1/p); cumulative integral from d = 0 up.
        let w: Vec<f64> = dist
            .iter()
            .zip(&y)
            .map(|(&dj, &yj)| (c + problem.convective_velocity(1.0 - dj)) * yj.max(0.0).powf(1.0 / p))
            .collect();

        let mut cumulative = vec![0.0; n];
        // Innermost stub [0, d_min] via the local power extension.
        cumulative[n - 1] = if n >= 2 {
            power_panel(dist[n - 1], w[n - 1], 0.0, 0.0).min(w[n - 1] * dist[n - 1])
        } else {
            0.5 * w[n - 1] * dist[n - 1]
        };
        if n >= 2 && w[n - 1] > 0.0 && w[n - 2] > 0.0 {
            let m = (w[n - 2] / w[n - 1]).ln() / (dist[n - 2] / dist[n - 1]).ln();
            if m > -0.9 {
                cumulative[n - 1] = w[n - 1] * dist[n - 1] / (m + 1.0);
            }
        }
        for j in (0..n - 1).rev() {
            cumulative[j] = cumulative[j + 1] + power_panel(dist[j], w[j], dist[j + 1], w[j + 1]);
        }

        let mut delta = 0.0f64;
        for j in 0..n {
            let next = (forcing[j] - pc * cumulative[j]).max(0.0);
            delta = delta.max((next - y[j]).abs());
            y[j] = next;
        }
        if delta <= LAYER_FP_TOL * scale {
            break;
        }
    }

    Ok(StartupLayer { dist, y })
}

// ---------------------------------------------------------------------------
// Adaptive integration on (theta, 1-eps]
// ---------------------------------------------------------------------------

/// Accepted steps of the backward integration, stored ascending in `u` with
/// the exact derivative at each node for Hermite evaluation.
#[derive(Debug, Clone)]
struct ZTable {
    u: Vec<f64>,
    z: Vec<f64>,
    dz: Vec<f64>,
}

impl ZTable {
    fn eval(&self, x: f64) -> f64 {
        let n = self.u.len();
        if n == 0 {
            return 0.0;
        }
        if x <= self.u[0] {
            return self.z[0];
        }
        if x >= self.u[n - 1] {
            return self.z[n - 1];
        }
        let i = match self.u.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.z[i],
            Err(i) => i - 1,
        };
        let h = self.u[i + 1] - self.u[i];
        let t = (x - self.u[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let hermite = (2.0 * t3 - 3.0 * t2 + 1.0) * self.z[i]
            + (t3 - 2.0 * t2 + t) * h * self.dz[i]
            + (-2.0 * t3 + 3.0 * t2) * self.z[i + 1]
            + (t3 - t2) * h * self.dz[i + 1];
        if hermite > 0.0 && hermite.is_finite() {
            return hermite;
        }
        // The cubic undershoots between nodes spanning decades of a
        // near-power decay; fall back to the positivity-preserving
        // log-linear interpolant.
        let (z0, z1) = (self.z[i], self.z[i + 1]);
        if z0 > 0.0 && z1 > 0.0 {
            (z0.ln() + t * (z1.ln() - z0.ln())).exp()
        } else {
            (z0 + t * (z1 - z0)).max(0.0)
        }
    }
}

// Dormand-Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

enum March {
    /// Reached `u_end`.
    Completed,
    /// Step size collapsed at the recorded head node; the remaining stretch
    /// is stiff (solution captured by the attracting slow manifold where
    /// `f/z^(p'-1)` balances `c + h`) and needs an implicit continuation.
    Stalled,
}

/// Integrate `z' = rhs(u, z)` from `u0` down to `u_end < u0`, recording
/// every accepted node in descending order. Steps that would drive `z`
/// nonpositive are rejected: the exact solution stays positive while the
/// forcing is active, so such a step is always an overshoot of the
/// attracting manifold.
fn dopri5_down<F: Fn(f64, f64) -> f64>(
    rhs: &F,
    table: &mut ZTable,
    u0: f64,
    u_end: f64,
    z0: f64,
    rtol: f64,
    atol: f64,
) -> March {
    let span = u0 - u_end;
    let min_step = 1e-14 * span.max(1e-6);
    let mut u = u0;
    let mut z = z0;
    let mut k1 = rhs(u, z);
    let mut h = -(span * 1e-6).max(min_step);

    if table.u.last() != Some(&u) {
        table.u.push(u);
        table.z.push(z);
        table.dz.push(if k1.is_finite() { k1 } else { 0.0 });
    }

    let mut steps = 0usize;
    let mut window_anchor = u;
    while u > u_end {
        steps += 1;
        if steps > 400_000 {
            return March::Stalled;
        }
        // Stability-limited crawling never underflows the step size; detect
        // it by progress rate instead and hand over to the implicit branch.
        if steps.is_multiple_of(10_000) {
            if window_anchor - u < 0.02 * (window_anchor - u_end) {
                return March::Stalled;
            }
            window_anchor = u;
        }
        if u + h < u_end {
            h = u_end - u;
        }

        let k2 = rhs(u + A21 * h, z + h * (A21 * k1));
        let k3 = rhs(u + 0.3 * h, z + h * (A31 * k1 + A32 * k2));
        let k4 = rhs(u + 0.8 * h, z + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = rhs(
            u + 8.0 / 9.0 * h,
            z + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = rhs(u + h, z + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let z5 = z + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = rhs(u + h, z5);
        let z4 = z + h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        let sc = atol + rtol * z.abs().max(z5.abs());
        let err = ((z5 - z4) / sc).abs();

        if err.is_finite() && err <= 1.0 && z5 > 0.0 && k7.is_finite() {
            u += h;
            z = z5;
            k1 = k7;
            table.u.push(u);
            table.z.push(z);
            table.dz.push(k1);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else if err.is_finite() && err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        } else {
            h *= 0.3;
        }
        if h.abs() < min_step && u > u_end + min_step {
            return March::Stalled;
        }
    }
    March::Completed
}

/// Implicit continuation: backward Euler with a damped Newton solve per
/// step, on a mesh geometrically refined toward `u_end`.
///
/// Used only while the explicit stepper is stalled. The stalled regime is
/// the attracting slow manifold, where the flow itself damps transients, so
/// the L-stable scalar step reproduces it faithfully at any step size, and
/// the contraction erases the first-order local errors committed here once
/// the explicit stepper takes over again. Control returns to the caller
/// (`Some(u, z)`) as soon as the stiffness `(p'-1) f / z^p'` has relaxed
/// enough for explicit steps to finish the remaining interval; `None` means
/// `u_end` was reached.
fn backward_euler_down(
    problem: &Problem,
    c: f64,
    table: &mut ZTable,
    u0: f64,
    u_end: f64,
    z0: f64,
) -> Result<Option<(f64, f64)>> {
    const MIN_STEPS: usize = 50;
    let pc = problem.p_conj();
    let mut u = u0;
    let mut z = z0;
    let mut gap = u0 - u_end;
    let mut taken = 0usize;

    while gap > 1e-12 {
        let next_gap = if gap > 2e-12 { gap * 0.985 } else { 0.0 };
        let u_next = u_end + next_gap;
        let h = u_next - u;
        let fval = problem.reduced_reaction(u_next).unwrap_or(f64::NAN);
        let drift = c + problem.convective_velocity(u_next);

        // phi(w) = w - z - h*drift + h*f*w^(1-p') is monotone increasing on
        // w > 0 for h < 0; damped Newton stays in the positive half-line.
        // Seed at the larger of the previous value and the slow-manifold
        // level (f/(c+h))^(p-1), the scale the captured solution tracks.
        let manifold = if drift > 0.0 && fval > 0.0 {
            (fval / drift).powf(1.0 / (pc - 1.0))
        } else {
            0.0
        };
        let mut w = z.max(manifold).max(1e-300);
        let mut converged = false;
        for _ in 0..80 {
            let w_pow = w.powf(1.0 - pc);
            let phi = w - z - h * drift + h * fval * w_pow;
            let dphi = 1.0 + h * fval * (1.0 - pc) * w.powf(-pc);
            if !phi.is_finite() || !dphi.is_finite() || dphi <= 0.0 {
                return Err(Error::StepFailure { u });
            }
            let mut w_new = w - phi / dphi;
            if w_new <= 0.0 {
                w_new = 0.5 * w;
            }
            if (w_new - w).abs() <= 1e-14 * (1.0 + w.abs()) {
                w = w_new;
                converged = true;
                break;
            }
            w = w_new;
        }
        if !converged && (z - w).abs() > 1e-10 * (1.0 + z.abs()) {
            return Err(Error::StepFailure { u });
        }

        u = u_next;
        z = w;
        gap = next_gap;
        taken += 1;
        let dz = drift - fval * z.powf(1.0 - pc);
        table.u.push(u);
        table.z.push(z);
        table.dz.push(if dz.is_finite() { dz } else { 0.0 });

        if taken >= MIN_STEPS && z > 1e-200 && gap > 1e-12 {
            let stiffness = (pc - 1.0) * fval * z.powf(-pc);
            if stiffness.is_finite() && stiffness * gap < 3_000.0 {
                return Ok(Some((u, z)));
            }
        }
    }
    if u > u_end {
        let fval = problem.reduced_reaction(u_end).unwrap_or(0.0);
        let drift = c + problem.convective_velocity(u_end);
        let dz = if z > 0.0 { drift - fval * z.powf(1.0 - pc) } else { 0.0 };
        table.u.push(u_end);
        table.z.push(z);
        table.dz.push(if dz.is_finite() { dz } else { 0.0 });
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Integrate the reduced problem backward from `u = 1` at speed `c` and
/// evaluate the shooting residual.
///
/// Requires `c + min h >= 0`: this is the one-sided Lipschitz regime in
/// which the terminal-value problem has a unique global solution.
pub fn integrate_reduced(problem: &Problem, c: f64, tol_ode: f64) -> Result<ShootingOutcome> {
    let h_min = problem.convective_velocity_min();
    if c + h_min < -1e-12 * (1.0 + h_min.abs()) {
        return Err(Error::PreconditionViolation(format!(
            "integrate_reduced requires c + min h >= 0, got c = {c}, min h = {h_min}"
        )));
    }

    let theta = problem.theta();
    let pc = problem.p_conj();
    let eps = LAYER_WIDTH_FACTOR * (1.0 - theta);

    let layer = build_layer(problem, c, eps)?;
    let y_start = layer.y[0];
    let forcing_scale = criteria::reduced_reaction_integral_from(problem, 1.0 - eps)?;

    let table = if forcing_scale == 0.0 {
        // Degenerate zero-reaction instance: y stays identically zero.
        ZTable {
            u: vec![theta, 1.0 - eps],
            z: vec![0.0, 0.0],
            dz: vec![0.0, 0.0],
        }
    } else {
        // The fixed-point value can cancel to zero when the solution hugs
        // the slow manifold f/z^(p'-1) = c + h; seed there instead (the
        // contraction of the downward flow forgets the seed either way).
        let mut z_start = y_start.max(0.0).powf(1.0 / pc);
        if !(z_start > 0.0) {
            let fval = problem.reduced_reaction(1.0 - eps).unwrap_or(0.0);
            let drift = c + problem.convective_velocity(1.0 - eps);
            z_start = if drift > 0.0 && fval > 0.0 {
                (fval / drift).powf(1.0 / (pc - 1.0))
            } else {
                (pc * forcing_scale).powf(1.0 / pc)
            };
        }

        let rhs = move |u: f64, z: f64| -> f64 {
            let fval = problem.reduced_reaction(u).unwrap_or(f64::NAN);
            (c + problem.convective_velocity(u)) - fval / z.powf(pc - 1.0)
        };
        let mut table = ZTable { u: Vec::new(), z: Vec::new(), dz: Vec::new() };
        let mut u_cur = 1.0 - eps;
        let mut z_cur = z_start;
        let mut cycles = 0usize;
        loop {
            match dopri5_down(&rhs, &mut table, u_cur, theta, z_cur, tol_ode, tol_ode * 1e-3) {
                March::Completed => break,
                March::Stalled => {
                    let u_stall = *table.u.last().unwrap();
                    let z_stall = table.z.last().unwrap().max(0.0);
                    match backward_euler_down(problem, c, &mut table, u_stall, theta, z_stall)? {
                        Some((u_released, z_released)) => {
                            u_cur = u_released;
                            z_cur = z_released;
                        }
                        None => break,
                    }
                }
            }
            cycles += 1;
            if cycles > 200 {
                return Err(Error::StepFailure { u: u_cur });
            }
        }
        table.u.reverse();
        table.z.reverse();
        table.dz.reverse();
        table
    };

    let z_theta = table.z[0].max(0.0);
    let flux_theta = problem.convective_flux(theta)?;
    let residual_f = z_theta - c * theta - flux_theta;
    let interior_positive = table.z.iter().skip(1).all(|&z| z > 0.0) && layer.y[0] >= 0.0;

    let mut outcome = ShootingOutcome {
        c,
        theta,
        p_conj: pc,
        eps,
        table,
        layer,
        z_theta,
        residual_f,
        interior_positive,
        samples: Vec::new(),
    };
    outcome.samples = assemble_samples(problem, &outcome);
    Ok(outcome)
}

fn assemble_samples(problem: &Problem, outcome: &ShootingOutcome) -> Vec<(f64, f64)> {
    let mut samples = Vec::new();
    let m = 64usize;
    for i in 0..m {
        let u = outcome.theta * i as f64 / m as f64;
        samples.push((u, outcome.eval_y(problem, u)));
    }
    for (i, &u) in outcome.table.u.iter().enumerate() {
        samples.push((u, outcome.table.z[i].max(0.0).powf(outcome.p_conj)));
    }
    // Layer distances descend, so forward iteration ascends in u.
    for (j, &d) in outcome.layer.dist.iter().enumerate() {
        if j > 0 {
            samples.push((1.0 - d, outcome.layer.y[j]));
        }
    }
    samples.push((1.0, 0.0));
    samples
}

/// Status of a wave-speed search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Root found and the existence criterion certifies it.
    Found,
    /// The residual is nonpositive at the bottom of the admissible range:
    /// no wave for any `c > -h_m`.
    NoSolution,
    /// Root found numerically, but outside the certified existence regime.
    InconclusiveRegime,
}

/// Result of the monotone bisection for the wave speed.
#[derive(Debug, Clone)]
pub struct WaveSpeedResult {
    pub status: SolveStatus,
    pub c_star: Option<f64>,
    /// Initial bracket `(c_lo, c_hi)` the bisection started from.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Shooting residual at the returned speed (at `c_lo` for `NoSolution`).
    pub residual: f64,
    /// Full reduced solution at `c*`.
    pub outcome: Option<ShootingOutcome>,
    /// Shift-equivariant analytic upper bound used as the bracket top.
    pub shifted_bound: f64,
    /// Estimate `(1/theta)[(p' I)^(1/p') - H(theta)] - h_m`.
    pub paper_bound: f64,
}

impl WaveSpeedResult {
    /// Speed and reduced solution when a wave was found (certified or not).
    pub fn wave(&self) -> Result<(f64, &ShootingOutcome)> {
        match (self.c_star, &self.outcome) {
            (Some(c), Some(outcome)) if self.status != SolveStatus::NoSolution => {
                Ok((c, outcome))
            }
            _ => Err(Error::PreconditionViolation(
                "no wave available: solver reported NoSolution".into(),
            )),
        }
    }
}

/// Find the unique wave speed by bisecting the shooting residual over
/// `(-h_m, B]`, where `B` is the shift-equivariant speed bound.
pub fn find_wave_speed(problem: &Problem, opts: &SolveOptions) -> Result<WaveSpeedResult> {
    let h_min = problem.convective_velocity_min();
    let paper_bound = criteria::speed_upper_bound(problem)?;
    let shifted_bound = paper_bound + h_min;

    let c_lo = -h_min + 1e-14 * (1.0 + h_min.abs());
    let c_hi = shifted_bound;

    let outcome_lo = integrate_reduced(problem, c_lo, opts.tol_ode)?;
    let residual_lo = outcome_lo.residual();
    if residual_lo <= 0.0 {
        return Ok(WaveSpeedResult {
            status: SolveStatus::NoSolution,
            c_star: None,
            bracket: (c_lo, c_hi),
            iterations: 0,
            residual: residual_lo,
            outcome: None,
            shifted_bound,
            paper_bound,
        });
    }
    if c_hi <= c_lo {
        return Err(Error::BracketFailure(format!(
            "residual positive at c_lo = {c_lo} but speed bound {c_hi} leaves no bracket"
        )));
    }
    let residual_hi = integrate_reduced(problem, c_hi, opts.tol_ode)?.residual();
    if residual_hi >= 0.0 {
        // y_c(theta) < p' I forbids this analytically; reaching it means the
        // integration tolerance is inconsistent with tol_c.
        return Err(Error::BracketFailure(format!(
            "residual {residual_hi} >= 0 at the analytic upper bound c = {c_hi}"
        )));
    }

    let mut lo = c_lo;
    let mut hi = c_hi;
    let mut iterations = 0usize;
    let mut last_residual = f64::INFINITY;
    while (hi - lo > opts.tol_c * (1.0 + 0.5 * (lo.abs() + hi.abs()))
        || last_residual.abs() > opts.residual_tol)
        && iterations < 300
    {
        let mid = 0.5 * (lo + hi);
        let res = integrate_reduced(problem, mid, opts.tol_ode)?.residual();
        iterations += 1;
        last_residual = res;
        if res > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let c_star = 0.5 * (lo + hi);
    let outcome = integrate_reduced(problem, c_star, opts.tol_ode)?;
    let residual = outcome.residual();

    let status = match criteria::evaluate(problem)?.verdict {
        Verdict::Exists => SolveStatus::Found,
        Verdict::Inconclusive => SolveStatus::InconclusiveRegime,
        // Unreachable when the residual was positive at c_lo; keep the
        // numerical answer but mark it uncertified.
        Verdict::NoSolution => SolveStatus::InconclusiveRegime,
    };

    Ok(WaveSpeedResult {
        status,
        c_star: Some(c_star),
        bracket: (c_lo, c_hi),
        iterations,
        residual,
        outcome: Some(outcome),
        shifted_bound,
        paper_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::reduced_reaction_integral;
    use crate::model::{ConvectionSpec, DiffusionSpec, Exponents, ReactionSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn instance(p: f64, d: (f64, f64, f64), g0: f64, theta: f64, h: Vec<f64>) -> Problem {
        Problem::new(
            Exponents::new(p).unwrap(),
            DiffusionSpec::power_law(d.0, d.1, d.2),
            ReactionSpec::power_law(g0, 1.0, 1.0, theta),
            ConvectionSpec::polynomial(h),
        )
        .unwrap()
    }

    fn reference() -> Problem {
        Problem::reference()
    }

    #[test]
    fn zero_reaction_forces_zero_solution() {
        let pr = instance(2.0, (1.0, 0.0, 0.0), 0.0, 0.5, vec![]);
        let out = integrate_reduced(&pr, 0.7, 1e-11).unwrap();
        assert_eq!(out.y_theta(), 0.0);
        assert_abs_diff_eq!(out.residual(), -0.35, epsilon = 1e-14);
        assert!(out.samples().iter().all(|&(_, y)| y == 0.0));
    }

    #[test]
    fn reference_residual_at_zero_speed() {
        // c = 0, h = 0 kills the nonlinear term: y(theta) = p' int f = 1/12.
        let out = integrate_reduced(&reference(), 0.0, 1e-11).unwrap();
        assert_abs_diff_eq!(out.y_theta(), 1.0 / 12.0, epsilon = 2e-11);
        assert_abs_diff_eq!(out.residual(), (1.0f64 / 12.0).sqrt(), epsilon = 1e-9);
        assert!(out.interior_positive());
        assert!(out.positive_on_unit());
    }

    #[test]
    fn residual_negative_beyond_speed_bound() {
        let out = integrate_reduced(&reference(), 0.6, 1e-11).unwrap();
        assert!(out.residual() < 0.0);
    }

    #[test]
    fn y_theta_below_reaction_integral_bound() {
        let pr = reference();
        let bound = pr.p_conj() * reduced_reaction_integral(&pr).unwrap();
        for c in [0.1, 0.2, 0.45, 0.6] {
            let out = integrate_reduced(&pr, c, 1e-11).unwrap();
            assert!(out.y_theta() < bound, "c = {c}");
        }
        // c + h = 0 is the equality case: the integral bound is attained.
        let out = integrate_reduced(&pr, 0.0, 1e-11).unwrap();
        assert!(out.y_theta() <= bound + 1e-12);
    }

    #[test]
    fn precondition_rejects_speeds_below_minus_h_min() {
        let pr = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![0.4]);
        assert!(matches!(
            integrate_reduced(&pr, -0.5, 1e-11),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn separable_branch_examples() {
        let pr = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![1.0]);
        // z(0) = 0 exactly when z_theta = c*theta + H(theta).
        let c = 0.3;
        let z_theta = c * 0.5 + pr.convective_flux(0.5).unwrap();
        let branch = separable_branch(&pr, c, z_theta.powf(pr.p_conj())).unwrap();
        assert_abs_diff_eq!(branch.z(&pr, 0.0).unwrap(), 0.0, epsilon = 1e-15);

        let pr = reference();
        let branch = separable_branch(&pr, 1.0, 0.25).unwrap();
        assert_abs_diff_eq!(branch.y(&pr, 0.25).unwrap(), 0.0625, epsilon = 1e-15);

        let branch = separable_branch(&pr, 0.0, 0.25).unwrap();
        for u in [0.0, 0.1, 0.3, 0.5] {
            assert_abs_diff_eq!(branch.y(&pr, u).unwrap(), 0.25, epsilon = 1e-15);
        }
        assert!(separable_branch(&pr, 0.0, -1.0).is_err());
    }

    #[test]
    fn reference_wave_speed_found_inside_bound() {
        let wave = find_wave_speed(&reference(), &SolveOptions::default()).unwrap();
        assert_eq!(wave.status, SolveStatus::Found);
        let (c, outcome) = wave.wave().unwrap();
        assert!(c > 0.0 && c < 0.577_35, "c* = {c}");
        assert!(wave.residual.abs() <= 1e-9);
        // Root identity: y(theta)^(1/p') = c*theta when H = 0.
        assert_abs_diff_eq!(outcome.z_theta(), c * 0.5, epsilon = 1e-8);
        assert!(c < wave.shifted_bound && c < wave.paper_bound);
    }

    #[test]
    fn sample_table_is_monotone_over_the_unit_interval() {
        let out = integrate_reduced(&reference(), 0.2, 1e-11).unwrap();
        let samples = out.samples();
        assert_eq!(samples.first().unwrap().0, 0.0);
        assert_eq!(*samples.last().unwrap(), (1.0, 0.0));
        for pair in samples.windows(2) {
            assert!(pair[1].0 > pair[0].0, "u grid not increasing at {}", pair[1].0);
        }
    }

    #[test]
    fn strict_nonexistence_instance_reports_no_solution() {
        let pr = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![10.0, -10.0]);
        let wave = find_wave_speed(&pr, &SolveOptions::default()).unwrap();
        assert_eq!(wave.status, SolveStatus::NoSolution);
        assert!(wave.residual <= 0.0);
        assert!(wave.c_star.is_none());
    }

    #[test]
    fn quadrupled_reaction_doubles_the_speed() {
        let opts = SolveOptions::default();
        let base = find_wave_speed(&reference(), &opts).unwrap().c_star.unwrap();
        let scaled = instance(2.0, (1.0, 0.0, 0.0), 8.0, 0.5, vec![]);
        let fast = find_wave_speed(&scaled, &opts).unwrap().c_star.unwrap();
        assert!((fast - 2.0 * base).abs() <= 1e-6 * fast.abs(), "{fast} vs 2*{base}");
    }

    #[test]
    fn constant_velocity_shifts_the_speed_exactly() {
        let opts = SolveOptions::default();
        let base = find_wave_speed(&reference(), &opts).unwrap().c_star.unwrap();
        for kappa in [0.1, -0.25] {
            let pr = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![kappa]);
            let shifted = find_wave_speed(&pr, &opts).unwrap().c_star.unwrap();
            assert_abs_diff_eq!(shifted, base - kappa, epsilon = 1e-8);
        }
    }

    #[test]
    fn shifting_h_by_its_minimum_preserves_the_residual() {
        // h(u) = 0.1 u - 0.02 has h_m = -0.02; the shifted instance
        // h(u) = 0.1 u evaluated at c + h_m must reproduce F(c).
        let pr = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![-0.02, 0.1]);
        let shifted = instance(2.0, (1.0, 0.0, 0.0), 2.0, 0.5, vec![0.0, 0.1]);
        let h_min = pr.convective_velocity_min();
        assert_abs_diff_eq!(h_min, -0.02, epsilon = 1e-12);
        for c in [0.3, 0.5] {
            let f_orig = integrate_reduced(&pr, c, 1e-11).unwrap().residual();
            let f_shift = integrate_reduced(&shifted, c + h_min, 1e-11).unwrap().residual();
            assert_abs_diff_eq!(f_orig, f_shift, epsilon = 1e-10);
        }
        let opts = SolveOptions::default();
        let c1 = find_wave_speed(&pr, &opts).unwrap().c_star.unwrap();
        let c2 = find_wave_speed(&shifted, &opts).unwrap().c_star.unwrap();
        assert_abs_diff_eq!(c1, c2 - h_min, epsilon = 1e-9);
    }

    #[test]
    fn refinement_of_ode_tolerance_is_stable() {
        let coarse = find_wave_speed(
            &reference(),
            &SolveOptions { tol_ode: 1e-11, ..SolveOptions::default() },
        )
        .unwrap()
        .c_star
        .unwrap();
        let fine = find_wave_speed(
            &reference(),
            &SolveOptions { tol_ode: 5e-12, ..SolveOptions::default() },
        )
        .unwrap()
        .c_star
        .unwrap();
        assert!((coarse - fine).abs() < 1e-9, "{coarse} vs {fine}");
    }

    #[test]
    fn non_lipschitz_reaction_integrates() {
        let pr = Problem::new(
            Exponents::new(3.0).unwrap(),
            DiffusionSpec::power_law(1.0, 0.5, 0.0),
            ReactionSpec::power_law(1.0, 0.5, 0.8, 0.4),
            ConvectionSpec::none(),
        )
        .unwrap();
        let wave = find_wave_speed(&pr, &SolveOptions::default()).unwrap();
        assert_eq!(wave.status, SolveStatus::Found);
        assert!(wave.residual.abs() <= 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn comparison_monotonicity(
            p in 1.4f64..3.5,
            g0 in 0.5f64..4.0,
            theta in 0.25f64..0.7,
            kappa in -0.3f64..0.5,
        ) {
            let pr = Problem::new(
                Exponents::new(p).unwrap(),
                DiffusionSpec::constant(1.0),
                ReactionSpec::power_law(g0, 1.0, 1.0, theta),
                ConvectionSpec::constant(kappa),
            ).unwrap();
            let h_min = pr.convective_velocity_min();
            let speeds: Vec<f64> = (0..4).map(|i| -h_min + 0.05 + 0.2 * i as f64).collect();
            let outs: Vec<_> = speeds
                .iter()
                .map(|&c| integrate_reduced(&pr, c, 1e-10).unwrap())
                .collect();
            let grid: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
            for w in outs.windows(2) {
                // F strictly decreasing in c.
                prop_assert!(w[0].residual() > w[1].residual());
                for &u in &grid {
                    let y_slow = w[0].eval_y(&pr, u);
                    let y_fast = w[1].eval_y(&pr, u);
                    prop_assert!(
                        y_slow >= y_fast - 1e-9 * (1.0 + y_slow.abs()),
                        "y not monotone in c at u = {u}: {y_slow} < {y_fast}"
                    );
                }
            }
        }
    }
}
