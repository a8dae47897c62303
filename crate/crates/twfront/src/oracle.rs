//! Brute-force and closed-form validators for the supporting inequalities
//! and the sharp existence constant.
//!
//! These are ground-truth generators for the test suite (exposed through the
//! `verify` CLI for reproducibility, not as a user feature): the
//! truncated-binomial inequality behind the existence constant, its sharp
//! ratio constant recovered by golden-section search, the zero-speed
//! clearance inequality, and the consistency of the piecewise `k(p)`
//! formula with the variational characterization.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{existence_constant, Problem};
use crate::shooting::integrate_reduced;

/// Outcome of a randomized inequality campaign.
#[derive(Debug, Clone, Copy)]
pub struct InequalityReport {
    pub samples_tested: usize,
    pub violations: usize,
    /// Smallest normalized margin `(bound - lhs)/scale` seen; negative
    /// values beyond the rounding slack count as violations.
    pub worst_margin: f64,
}

/// Closed-form sharp constant `max_t (1 + r t + t^r)/(1+t)^r` for
/// `1 < r < 2`; equals 1 for `r >= 2`.
fn sharp_constant(r: f64) -> f64 {
    if r >= 2.0 {
        1.0
    } else {
        let t1 = (r - 1.0).powf(1.0 / (r - 2.0));
        (1.0 + r * t1 + t1.powf(r)) / (1.0 + t1).powf(r)
    }
}

/// Normalized margin of `a^r + r a^(r-1) b + b^r <= k(r) (a+b)^r`.
pub fn power_sum_margin(a: f64, b: f64, r: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && r > 1.0) {
        return Err(Error::Domain(format!(
            "power-sum inequality needs a, b > 0 and r > 1, got a={a} b={b} r={r}"
        )));
    }
    let lhs = a.powf(r) + r * a.powf(r - 1.0) * b + b.powf(r);
    let rhs = sharp_constant(r) * (a + b).powf(r);
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok((rhs - lhs) / scale)
}

/// Truncated-binomial inequality check: `(a+b)^r` dominates for `r >= 2`,
/// and `k(r) (a+b)^r` with the sharp ratio constant for `1 < r < 2`.
pub fn power_sum_inequality(a: f64, b: f64, r: f64) -> Result<bool> {
    Ok(power_sum_margin(a, b, r)? >= -1e-12)
}

/// Sharp ratio constant by golden-section search.
///
/// Maximizes `f(t) = (1 + r t + t^r)/(1+t)^r` over `t >= 0`; the only
/// stationary point is `t1 = (r-1)^(1/(r-2))`, so the bracket is centered
/// there multiplicatively and widened until it straddles the maximum.
pub fn power_sum_ratio_max(r: f64) -> Result<f64> {
    if !(r > 1.0 && r < 2.0) {
        return Err(Error::Domain(format!("ratio constant is defined for 1 < r < 2, got {r}")));
    }
    let f = |t: f64| (1.0 + r * t + t.powf(r)) / (1.0 + t).powf(r);
    let t1 = (r - 1.0).powf(1.0 / (r - 2.0));

    let mut lo = t1 / 8.0;
    let mut hi = t1 * 8.0;
    let mut guard = 0;
    while (f(lo) >= f(t1) || f(hi) >= f(t1)) && guard < 60 {
        lo *= 0.5;
        hi *= 2.0;
        guard += 1;
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-9 * t1.max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    Ok(f(0.5 * (lo + hi)))
}

/// Randomized campaign over log-uniform `a, b` in `[1e-4, 1e4]` and
/// `r` in `(1, 8]`.
pub fn power_sum_campaign(samples: usize, seed: u64) -> InequalityReport {
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    let span = (1e4f64 / 1e-4).ln();
    for _ in 0..samples {
        let a = 1e-4 * (rng.random::<f64>() * span).exp();
        let b = 1e-4 * (rng.random::<f64>() * span).exp();
        let r = 1.0 + 1e-9 + (7.0 - 1e-9) * rng.random::<f64>();
        let margin = power_sum_margin(a, b, r).expect("sampled inputs are in-domain");
        worst_margin = worst_margin.min(margin);
        if margin < -1e-12 {
            violations += 1;
        }
    }
    InequalityReport { samples_tested: samples, violations, worst_margin }
}

/// Zero-speed clearance: for `h >= 0` with `H(1)^(p') <= k(p) I`, the
/// zero-speed solution satisfies `y_0(theta)^(1/p') > H(theta)`.
///
/// Runs the shooting integration at `c = 0` and reports whether the
/// conclusion held.
pub fn zero_speed_clearance(problem: &Problem) -> Result<bool> {
    Ok(zero_speed_clearance_margin(problem)? > 0.0)
}

/// Randomized zero-speed clearance campaign over constant-velocity
/// instances drawn inside the hypothesis range; draws violating the
/// standing hypotheses are redrawn, not counted.
pub fn zero_speed_clearance_campaign(instances: usize, seed: u64) -> Result<InequalityReport> {
    use crate::model::{ConvectionSpec, DiffusionSpec, Exponents, ReactionSpec};
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut drawn = 0usize;
    while checked < instances {
        drawn += 1;
        if drawn > 100 * instances.max(1) {
            return Err(Error::PreconditionViolation(
                "could not draw enough in-hypothesis instances".into(),
            ));
        }
        let problem = Problem::new(
            Exponents::new(1.3 + 2.5 * rng.random::<f64>())?,
            DiffusionSpec::constant(0.5 + rng.random::<f64>()),
            ReactionSpec::power_law(
                0.5 + 4.0 * rng.random::<f64>(),
                1.0,
                1.0,
                0.2 + 0.6 * rng.random::<f64>(),
            ),
            ConvectionSpec::constant(0.2 * rng.random::<f64>()),
        )?;
        match zero_speed_clearance_margin(&problem) {
            Ok(margin) => {
                checked += 1;
                worst_margin = worst_margin.min(margin);
                if margin <= 0.0 {
                    violations += 1;
                }
            }
            Err(Error::PreconditionViolation(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(InequalityReport { samples_tested: checked, violations, worst_margin })
}

fn zero_speed_clearance_margin(problem: &Problem) -> Result<f64> {
    let h_min = problem.convective_velocity_min();
    if h_min < 0.0 {
        return Err(Error::PreconditionViolation(format!(
            "zero-speed clearance requires h >= 0 on [0,1], min h = {h_min}"
        )));
    }
    let k = existence_constant(problem.p())?;
    let integral = crate::criteria::reduced_reaction_integral(problem)?;
    let flux_one = problem.convective_flux(1.0)?;
    if flux_one.powf(problem.p_conj()) > k * integral {
        return Err(Error::PreconditionViolation(format!(
            "hypothesis H(1)^p' <= k I fails: {} > {}",
            flux_one.powf(problem.p_conj()),
            k * integral
        )));
    }
    let outcome = integrate_reduced(problem, 0.0, 1e-11)?;
    Ok(outcome.z_theta() - problem.convective_flux(problem.theta())?)
}

/// Consistency of the piecewise existence constant with its derivations:
/// for `p > 2` against the golden-section ratio constant at `r = p'`, for
/// `1 < p < 2` against the independent `1/(2^(p'-1) - 1)` derivation
/// constant. Returns the absolute discrepancy.
pub fn existence_constant_consistency(p: f64) -> Result<f64> {
    if p == 2.0 {
        return Err(Error::Domain("consistency check is for p != 2".into()));
    }
    let k = existence_constant(p)?;
    let pc = p / (p - 1.0);
    let expected = if p > 2.0 {
        pc / (pc - 1.0 + power_sum_ratio_max(pc)?)
    } else {
        1.0 / (2f64.powf(pc - 1.0) - 1.0)
    };
    Ok((k - expected).abs())
}
