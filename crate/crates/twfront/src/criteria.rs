//! Sufficient conditions for existence, nonexistence and positive wave
//! speed, evaluated into a three-valued verdict.
//!
//! Writing `I = int_0^1 D^(p'-1) g du` and `k` for the sharp existence
//! constant, the tests are
//!
//! ```text
//! nonexistence:   H(theta) >= theta*h_m + (p' I)^(1/p')
//! existence:      H(1)     <= h_m + (k I)^(1/p')
//! positive speed: H(1)     <= (k I)^(1/p')          (needs h > 0 on [0,1])
//! ```
//!
//! The conditions are sufficient, not necessary; instances passing neither
//! test are reported `Inconclusive` and the shooting solver may still be run
//! there, with results labeled numerical and uncertified.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{existence_constant, Problem};
use crate::quad;

/// Three-valued outcome of the criteria evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Exists,
    NoSolution,
    Inconclusive,
}

/// All quantities entering the wave existence and nonexistence conditions.
#[derive(Debug, Clone, Serialize)]
pub struct CriteriaReport {
    /// `I = int_0^1 D^(p'-1) g du`.
    #[serde(rename = "integral_I")]
    pub integral: f64,
    #[serde(rename = "H_theta")]
    pub h_flux_theta: f64,
    #[serde(rename = "H_one")]
    pub h_flux_one: f64,
    #[serde(rename = "h_m")]
    pub h_min: f64,
    pub k_p: f64,
    pub nonexistence_weak: bool,
    pub nonexistence_strict: bool,
    pub existence: bool,
    pub positive_speed: bool,
    pub c_upper: f64,
    pub verdict: Verdict,
}

const QUAD_REL: f64 = 1e-12;
const QUAD_ABS: f64 = 1e-16;
const QUAD_PANELS: usize = 20_000;

/// `int_u^1 D^(p'-1)(s) g(s) ds` for `u` in `[theta, 1]`.
///
/// Both endpoint power behaviors are removed by substitution before the
/// adaptive rule runs: near `theta` the integrand grows like
/// `(s-theta)^sigma`, near 1 like `(1-s)^((p'-1)beta + gamma)`, and the
/// substitutions `s = theta + t^(1/(1+sigma))`, `s = 1 - t^(1/(1+gbar))`
/// flatten both to bounded smooth integrands.
pub(crate) fn reduced_reaction_integral_from(problem: &Problem, u: f64) -> Result<f64> {
    let theta = problem.theta();
    if !(theta..=1.0).contains(&u) {
        return Err(Error::Domain(format!(
            "partial reaction integral requires u in [theta, 1], got {u}"
        )));
    }
    let gbar = problem.edge_exponent_at_one();
    if !(gbar > -1.0) {
        return Err(Error::DivergentIntegral(format!(
            "(p'-1)*beta + gamma = {gbar} <= -1"
        )));
    }
    if problem.reaction_spec().g0 == 0.0 && problem.reaction_spec().hook.is_none() {
        return Ok(0.0);
    }
    let mid = 0.5 * (theta + 1.0);

    let mut total = 0.0;

    if u < mid {
        // Left piece over [u, mid], substituted at the ignition end; the
        // offset from theta is carried exactly through the substitution.
        let sigma = problem.reaction_spec().sigma;
        let s_exp = 1.0 / (1.0 + sigma);
        let t_lo = (u - theta).powf(1.0 + sigma);
        let t_hi = (mid - theta).powf(1.0 + sigma);
        let integrand = |t: f64| {
            let fval = problem.reduced_reaction_dist_theta(t.powf(s_exp));
            s_exp * fval * t.powf(s_exp - 1.0)
        };
        total += quad::adaptive(&integrand, t_lo, t_hi, QUAD_REL, QUAD_ABS, QUAD_PANELS)?.value;
    }

    // Right piece over [max(u, mid), 1], substituted at the u = 1 end; the
    // distance from 1 is carried exactly through the substitution.
    let lo = u.max(mid);
    let s_exp = 1.0 / (1.0 + gbar);
    let t_hi = (1.0 - lo).powf(1.0 + gbar);
    let integrand = |t: f64| {
        let fval = problem.reduced_reaction_dist_one(t.powf(s_exp));
        s_exp * fval * t.powf(s_exp - 1.0)
    };
    total += quad::adaptive(&integrand, 0.0, t_hi, QUAD_REL, QUAD_ABS, QUAD_PANELS)?.value;

    if !total.is_finite() {
        return Err(Error::QuadratureFailure(
            "reaction integral evaluated to a non-finite value".into(),
        ));
    }
    Ok(total)
}

/// `I = int_0^1 D^(p'-1) g du`, equal to the integral over `(theta, 1)`
/// since the reaction vanishes below the ignition threshold.
pub fn reduced_reaction_integral(problem: &Problem) -> Result<f64> {
    reduced_reaction_integral_from(problem, problem.theta())
}

/// Nonexistence test: `(weak, strict)` for the threshold
/// `H(theta) >= theta*h_m + (p' I)^(1/p')`.
///
/// Weak rules out waves for every `c > -h_m`; strict extends this to
/// `c >= -h_m`, and when additionally `h_m = h(0)` no wave exists for any
/// real `c`.
pub fn nonexistence_condition(problem: &Problem) -> Result<(bool, bool)> {
    let integral = reduced_reaction_integral(problem)?;
    let theta = problem.theta();
    let h_min = problem.convective_velocity_min();
    let lhs = problem.convective_flux(theta)?;
    let rhs = theta * h_min + (problem.p_conj() * integral).powf(1.0 / problem.p_conj());
    Ok((lhs >= rhs, lhs > rhs))
}

/// Existence test `H(1) <= h_m + (k(p) I)^(1/p')`.
pub fn existence_condition(problem: &Problem) -> Result<bool> {
    let integral = reduced_reaction_integral(problem)?;
    let h_min = problem.convective_velocity_min();
    let lhs = problem.convective_flux(1.0)?;
    let k = existence_constant(problem.p())?;
    Ok(lhs <= h_min + (k * integral).powf(1.0 / problem.p_conj()))
}

/// Positive-speed test `H(1) <= (k(p) I)^(1/p')`, applicable only when the
/// convective velocity is strictly positive on `[0,1]`.
///
/// When `h_m <= 0` the flag is not applicable (the positive speed already
/// follows from `c* > -h_m >= 0`) and this returns a precondition error.
pub fn positive_speed_condition(problem: &Problem) -> Result<bool> {
    let h_min = problem.convective_velocity_min();
    if h_min <= 0.0 {
        return Err(Error::PreconditionViolation(format!(
            "positive-speed condition requires h > 0 on [0,1]; min h = {h_min}"
        )));
    }
    let integral = reduced_reaction_integral(problem)?;
    let lhs = problem.convective_flux(1.0)?;
    let k = existence_constant(problem.p())?;
    Ok(lhs <= (k * integral).powf(1.0 / problem.p_conj()))
}

/// Upper bound for the wave speed,
/// `(1/theta) [ (p' I)^(1/p') - H(theta) ] - h_m`.
pub fn speed_upper_bound(problem: &Problem) -> Result<f64> {
    let integral = reduced_reaction_integral(problem)?;
    let theta = problem.theta();
    let pc = problem.p_conj();
    Ok((1.0 / theta) * ((pc * integral).powf(1.0 / pc) - problem.convective_flux(theta)?)
        - problem.convective_velocity_min())
}

/// Shift-equivariant speed bound `(1/theta) [ (p' I)^(1/p') - H(theta) ]`.
///
/// Replacing `h` by `h + kappa` maps this bound by `-kappa`, exactly like
/// the wave speed itself, so it is the bracket end used by the bisection.
/// It dominates [`speed_upper_bound`] whenever `h_m <= 0`.
pub fn shifted_speed_bound(problem: &Problem) -> Result<f64> {
    Ok(speed_upper_bound(problem)? + problem.convective_velocity_min())
}

/// Evaluate every criterion and combine them into a verdict.
pub fn evaluate(problem: &Problem) -> Result<CriteriaReport> {
    let integral = reduced_reaction_integral(problem)?;
    let theta = problem.theta();
    let pc = problem.p_conj();
    let h_min = problem.convective_velocity_min();
    let h_flux_theta = problem.convective_flux(theta)?;
    let h_flux_one = problem.convective_flux(1.0)?;
    let k_p = existence_constant(problem.p())?;

    let nonex_rhs = theta * h_min + (pc * integral).powf(1.0 / pc);
    let nonexistence_weak = h_flux_theta >= nonex_rhs;
    let nonexistence_strict = h_flux_theta > nonex_rhs;
    let existence = h_flux_one <= h_min + (k_p * integral).powf(1.0 / pc);
    let positive_speed = if h_min > 0.0 {
        h_flux_one <= (k_p * integral).powf(1.0 / pc)
    } else {
        // h_m <= 0 makes every admissible speed c* > -h_m >= 0 positive.
        existence
    };

    let c_upper = (1.0 / theta) * ((pc * integral).powf(1.0 / pc) - h_flux_theta) - h_min;

    let verdict = if nonexistence_weak {
        Verdict::NoSolution
    } else if existence {
        Verdict::Exists
    } else {
        Verdict::Inconclusive
    };

    Ok(CriteriaReport {
        integral,
        h_flux_theta,
        h_flux_one,
        h_min,
        k_p,
        nonexistence_weak,
        nonexistence_strict,
        existence,
        positive_speed,
        c_upper,
        verdict,
    })
}
