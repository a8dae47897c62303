//! Problem definition: diffusion, reaction and convection coefficient
//! families, conjugate exponents, and the special constants used by the
//! existence criteria.
//!
//! The built-in families are
//!
//! ```text
//! D(u) = d0 * u^alpha * (1-u)^beta          diffusion, positive on (0,1)
//! g(u) = g0 * (u-theta)^sigma * (1-u)^gamma on (theta,1), zero elsewhere
//! h(u) = sum_j coeffs[j] * u^j              convective velocity
//! ```
//!
//! Endpoint exponents are carried explicitly because the edge classification
//! is exponent-driven; user hooks may replace the point evaluation but the
//! declared exponents stay authoritative for asymptotics and for the
//! singularity-removing substitutions in the quadrature routines.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// User-supplied scalar coefficient function.
#[derive(Clone)]
pub struct Hook(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for Hook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Hook(..)")
    }
}

impl Hook {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Hook(Arc::new(f))
    }
}

/// Wave exponent `p > 1` together with its conjugate `p' = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    p: f64,
    p_conj: f64,
}

impl Exponents {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("p must be a finite real > 1, got {p}")));
        }
        Ok(Exponents { p, p_conj: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p' = p/(p-1)`, so `1/p + 1/p' = 1`.
    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }
}

/// Diffusion coefficient `D(u) = d0 * u^alpha * (1-u)^beta`, optionally
/// overridden by a hook for point evaluation.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    pub d0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub hook: Option<Hook>,
}

impl DiffusionSpec {
    pub fn power_law(d0: f64, alpha: f64, beta: f64) -> Self {
        DiffusionSpec { d0, alpha, beta, hook: None }
    }

    pub fn constant(d0: f64) -> Self {
        Self::power_law(d0, 0.0, 0.0)
    }
}

/// Combustion reaction `g(u) = g0 * (u-theta)^sigma * (1-u)^gamma` on
/// `(theta, 1)`, zero on `[0, theta]` and at `u = 1`.
///
/// `sigma` may lie in `(0,1)`: the reaction need not be Lipschitz at the
/// ignition threshold.
#[derive(Debug, Clone)]
pub struct ReactionSpec {
    pub g0: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub theta: f64,
    pub hook: Option<Hook>,
}

impl ReactionSpec {
    pub fn power_law(g0: f64, sigma: f64, gamma: f64, theta: f64) -> Self {
        ReactionSpec { g0, sigma, gamma, theta, hook: None }
    }
}

/// Convective velocity `h(u)` as a polynomial in `u`; `H(u) = int_0^u h`.
#[derive(Debug, Clone)]
pub struct ConvectionSpec {
    pub coeffs: Vec<f64>,
    pub hook: Option<Hook>,
}

impl ConvectionSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        ConvectionSpec { coeffs, hook: None }
    }

    pub fn none() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn constant(kappa: f64) -> Self {
        Self::polynomial(vec![kappa])
    }
}

/// Full problem instance. Immutable after construction; cheap to clone and
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct Problem {
    exponents: Exponents,
    diffusion: DiffusionSpec,
    reaction: ReactionSpec,
    convection: ConvectionSpec,
}

impl Problem {
    pub fn new(
        exponents: Exponents,
        diffusion: DiffusionSpec,
        reaction: ReactionSpec,
        convection: ConvectionSpec,
    ) -> Result<Self> {
        if !(diffusion.d0 > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "diffusion.d0 must be > 0, got {}",
                diffusion.d0
            )));
        }
        if !(reaction.g0 >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "reaction.g0 must be >= 0, got {}",
                reaction.g0
            )));
        }
        if !(reaction.sigma > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "reaction.sigma must be > 0, got {}",
                reaction.sigma
            )));
        }
        if !(reaction.gamma > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "reaction.gamma must be > 0, got {}",
                reaction.gamma
            )));
        }
        if !(reaction.theta > 0.0 && reaction.theta < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "theta must lie in (0,1), got {}",
                reaction.theta
            )));
        }
        let problem = Problem { exponents, diffusion, reaction, convection };
        // Integrability certificate for int_0^1 D^(p'-1) g: the integrand
        // behaves like (1-u)^((p'-1)*beta + gamma) near u = 1.
        if !(problem.edge_exponent_at_one() > -1.0) {
            return Err(Error::DivergentIntegral(format!(
                "(p'-1)*beta + gamma = {} must exceed -1 for int D^(p'-1) g to converge",
                problem.edge_exponent_at_one()
            )));
        }
        Ok(problem)
    }

    /// Reference combustion instance: `p = 2`, `D = 1`, `h = 0`,
    /// `theta = 0.5`, `g(u) = 2 (u - 0.5)(1 - u)`.
    pub fn reference() -> Self {
        Problem::new(
            Exponents::new(2.0).unwrap(),
            DiffusionSpec::constant(1.0),
            ReactionSpec::power_law(2.0, 1.0, 1.0, 0.5),
            ConvectionSpec::none(),
        )
        .unwrap()
    }

    pub fn exponents(&self) -> Exponents {
        self.exponents
    }

    pub fn p(&self) -> f64 {
        self.exponents.p
    }

    pub fn p_conj(&self) -> f64 {
        self.exponents.p_conj
    }

    pub fn theta(&self) -> f64 {
        self.reaction.theta
    }

    pub fn diffusion_spec(&self) -> &DiffusionSpec {
        &self.diffusion
    }

    pub fn reaction_spec(&self) -> &ReactionSpec {
        &self.reaction
    }

    pub fn convection_spec(&self) -> &ConvectionSpec {
        &self.convection
    }

    /// Growth exponent of `D^(p'-1) g` at `u = 1`: `(p'-1)*beta + gamma`.
    pub fn edge_exponent_at_one(&self) -> f64 {
        (self.p_conj() - 1.0) * self.diffusion.beta + self.reaction.gamma
    }

    /// Diffusion coefficient `D(u)`, positive on `(0,1)`.
    pub fn diffusion(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("diffusion requires u in (0,1), got {u}")));
        }
        let value = match &self.diffusion.hook {
            Some(hook) => (hook.0)(u),
            None => {
                self.diffusion.d0
                    * u.powf(self.diffusion.alpha)
                    * (1.0 - u).powf(self.diffusion.beta)
            }
        };
        if !(value > 0.0) {
            return Err(Error::Domain(format!("diffusion must be positive, D({u}) = {value}")));
        }
        Ok(value)
    }

    /// Reaction term `g(u)`: zero on `[0, theta]`, positive on `(theta, 1)`,
    /// zero at `u = 1`.
    pub fn reaction(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("reaction requires u in [0,1], got {u}")));
        }
        let theta = self.reaction.theta;
        // Continuity pins g(theta) = 0 even when sigma < 1 gives the power
        // an infinite one-sided slope there.
        if u <= theta || u >= 1.0 {
            return Ok(0.0);
        }
        let value = match &self.reaction.hook {
            Some(hook) => (hook.0)(u),
            None => {
                self.reaction.g0
                    * (u - theta).powf(self.reaction.sigma)
                    * (1.0 - u).powf(self.reaction.gamma)
            }
        };
        if value < 0.0 {
            return Err(Error::Domain(format!("reaction must be nonnegative, g({u}) = {value}")));
        }
        Ok(value)
    }

    /// Convective velocity `h(u)`.
    pub fn convective_velocity(&self, u: f64) -> f64 {
        match &self.convection.hook {
            Some(hook) => (hook.0)(u),
            None => {
                // Horner evaluation of the polynomial.
                self.convection.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
            }
        }
    }

    /// Convective flux `H(u) = int_0^u h(s) ds`, with `H(0) = 0` exactly.
    ///
    /// Polynomial velocities integrate term-wise in closed form; hooks fall
    /// back to adaptive quadrature at 1e-12.
    pub fn convective_flux(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("convective flux requires u in [0,1], got {u}")));
        }
        match &self.convection.hook {
            Some(hook) => {
                let f = |s: f64| (hook.0)(s);
                Ok(quad::adaptive(&f, 0.0, u, 1e-12, 1e-14, 4000)?.value)
            }
            None => Ok(self
                .convection
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * u.powi(j as i32 + 1) / (j as f64 + 1.0))
                .sum()),
        }
    }

    /// Minimum of the convective velocity over `[0,1]`.
    ///
    /// Polynomials are minimized by isolating the roots of `h'` (sign scan on
    /// a 1e-3 grid, bisection refined to 1e-12) and comparing critical points
    /// with the endpoints; hooks use dense grid refinement to 1e-10.
    pub fn convective_velocity_min(&self) -> f64 {
        match &self.convection.hook {
            Some(_) => self.velocity_min_by_grid(),
            None => self.velocity_min_polynomial(),
        }
    }

    fn velocity_min_polynomial(&self) -> f64 {
        let coeffs = &self.convection.coeffs;
        let mut best = self.convective_velocity(0.0).min(self.convective_velocity(1.0));
        if coeffs.len() < 3 {
            // Constant or affine velocity: extrema sit at the endpoints.
            return best;
        }
        let deriv: Vec<f64> =
            coeffs.iter().enumerate().skip(1).map(|(j, &c)| j as f64 * c).collect();
        let dh = |u: f64| deriv.iter().rev().fold(0.0, |acc, &c| acc * u + c);

        let n = 1000usize;
        let mut prev_u = 0.0f64;
        let mut prev_d = dh(prev_u);
        for i in 1..=n {
            let u = i as f64 / n as f64;
            let d = dh(u);
            if prev_d == 0.0 {
                best = best.min(self.convective_velocity(prev_u));
            } else if prev_d * d < 0.0 {
                // Bisect the sign change of h' down to 1e-12.
                let (mut lo, mut hi) = (prev_u, u);
                let mut dlo = prev_d;
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    let dm = dh(mid);
                    if dlo * dm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        dlo = dm;
                    }
                }
                best = best.min(self.convective_velocity(0.5 * (lo + hi)));
            }
            prev_u = u;
            prev_d = d;
        }
        best
    }

    fn velocity_min_by_grid(&self) -> f64 {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut best_u = 0.0f64;
        let mut best = f64::INFINITY;
        while hi - lo > 1e-10 {
            let n = 2000usize;
            let step = (hi - lo) / n as f64;
            for i in 0..=n {
                let u = lo + i as f64 * step;
                let v = self.convective_velocity(u);
                if v < best {
                    best = v;
                    best_u = u;
                }
            }
            lo = (best_u - 2.0 * step).max(0.0);
            hi = (best_u + 2.0 * step).min(1.0);
        }
        best
    }

    /// Reduced reaction `f(u) = D(u)^(p'-1) * g(u)`, the forcing term of the
    /// first-order equation.
    pub fn reduced_reaction(&self, u: f64) -> Result<f64> {
        if self.reaction(u)? == 0.0 {
            return Ok(0.0);
        }
        let d_pow = self.diffusion(u)?.powf(self.p_conj() - 1.0);
        let value = d_pow * self.reaction(u)?;
        if !value.is_finite() {
            return Err(Error::Overflow(format!(
                "D(u)^(p'-1) g(u) not representable at u = {u}"
            )));
        }
        Ok(value)
    }

    /// `f` at `u = 1 - d`, with the endpoint distance supplied exactly.
    ///
    /// Forming `1 - u` from `u` loses all relative accuracy once `d`
    /// approaches machine epsilon, which poisons the endpoint powers; the
    /// built-in family is therefore evaluated directly in `d`. Hooks fall
    /// back to point evaluation.
    pub(crate) fn reduced_reaction_dist_one(&self, d: f64) -> f64 {
        let theta = self.reaction.theta;
        if d <= 0.0 || d >= 1.0 - theta {
            if d >= 1.0 - theta {
                return self.reduced_reaction(1.0 - d).unwrap_or(f64::NAN);
            }
            return 0.0;
        }
        if self.diffusion.hook.is_some() || self.reaction.hook.is_some() {
            return self.reduced_reaction(1.0 - d).unwrap_or(f64::NAN);
        }
        let pm = self.p_conj() - 1.0;
        let diffusion = self.diffusion.d0
            * (1.0 - d).powf(self.diffusion.alpha)
            * d.powf(self.diffusion.beta);
        let reaction = self.reaction.g0
            * (1.0 - theta - d).powf(self.reaction.sigma)
            * d.powf(self.reaction.gamma);
        diffusion.powf(pm) * reaction
    }

    /// `f` at `u = theta + x`, with the ignition offset supplied exactly.
    pub(crate) fn reduced_reaction_dist_theta(&self, x: f64) -> f64 {
        let theta = self.reaction.theta;
        if x <= 0.0 || x >= 1.0 - theta {
            if x > 0.0 {
                return self.reduced_reaction(theta + x).unwrap_or(f64::NAN);
            }
            return 0.0;
        }
        if self.diffusion.hook.is_some() || self.reaction.hook.is_some() {
            return self.reduced_reaction(theta + x).unwrap_or(f64::NAN);
        }
        let pm = self.p_conj() - 1.0;
        let diffusion = self.diffusion.d0
            * (theta + x).powf(self.diffusion.alpha)
            * (1.0 - theta - x).powf(self.diffusion.beta);
        let reaction =
            self.reaction.g0 * x.powf(self.reaction.sigma) * (1.0 - theta - x).powf(self.reaction.gamma);
        diffusion.powf(pm) * reaction
    }
}

/// Odd signed power `|v|^q * sign(v)`, strictly increasing in `v` for
/// `q > 0`. Composing with the reciprocal exponent recovers the input.
pub fn signed_power(v: f64, q: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(q) * v.signum()
    }
}

/// Optimal constant of the truncated-binomial inequality
/// `a^r + r a^(r-1) b + b^r <= C (a+b)^r` for `1 < r < 2`:
/// the maximum over `t >= 0` of `(1 + r t + t^r) / (1+t)^r`.
pub(crate) fn power_sum_constant(r: f64) -> f64 {
    let t1 = (r - 1.0).powf(1.0 / (r - 2.0));
    (1.0 + r * t1 + t1.powf(r)) / (1.0 + t1).powf(r)
}

/// Sharp constant of the existence condition.
///
/// Piecewise in `p`: `1/(2^(p'-1) - 1)` for `1 < p < 2`, `1` at `p = 2`,
/// and `p'/(p'-1 + C(p'))` for `p > 2` where `C` is the truncated-binomial
/// constant. Continuous on `(1, inf)` with limits 0 at `1+` and `1/2` at
/// `+inf`.
pub fn existence_constant(p: f64) -> Result<f64> {
    let exps = Exponents::new(p)?;
    let pc = exps.p_conj();
    if p < 2.0 {
        Ok(1.0 / (2f64.powf(pc - 1.0) - 1.0))
    } else if p == 2.0 {
        Ok(1.0)
    } else {
        Ok(pc / (pc - 1.0 + power_sum_constant(pc)))
    }
}
