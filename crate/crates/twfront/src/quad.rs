//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-15 point Gauss-Kronrod rule with greedy interval subdivision. The
//! callers in this crate transform away endpoint power singularities before
//! integrating, so the integrands seen here are smooth and the rule converges
//! rapidly.

use crate::error::{Error, Result};

// QUADPACK constants are conventionally quoted beyond f64 precision.
#[allow(clippy::excessive_precision)]
mod constants {
// Abscissae and weights of the 15-point Kronrod rule with the embedded
// 7-point Gauss rule (QUADPACK dqk15 constants).
pub(super) const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

pub(super) const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

pub(super) const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];
}
use constants::{WG, WGK, XGK};

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Single Gauss-Kronrod panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv = [0.0f64; 14];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[7 + j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[7 + j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrate `f` over `[a, b]` to the requested tolerance.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimated error satisfies `max(abs_tol, rel_tol * |integral|)`, or fails
/// with [`Error::QuadratureFailure`] once `max_panels` is exceeded.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }

    let (v0, e0) = gk15(f, a, b);
    if !v0.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mut panels = vec![Panel { a, b, value: v0, err: e0 }];
    let mut evaluations = 15usize;

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(Quadrature { value: total, abs_error: err, evaluations });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureFailure(format!(
                "tolerance {target:.3e} unreachable with {max_panels} panels (err {err:.3e})"
            )));
        }

        // Split the worst panel.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            return Err(Error::QuadratureFailure(
                "panel width underflow during subdivision".into(),
            ));
        }
        let (v1, e1) = gk15(f, pa, mid);
        let (v2, e2) = gk15(f, mid, pb);
        if !v1.is_finite() || !v2.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "integrand not finite inside [{pa}, {pb}]"
            )));
        }
        evaluations += 30;
        panels.push(Panel { a: pa, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: pb, value: v2, err: e2 });
    }
}
