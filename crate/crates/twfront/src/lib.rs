//! Traveling waves for p-Laplacian reaction-diffusion-convection equations
//! with combustion-type reaction.
//!
//! The equation under study is
//!
//! ```text
//! v_t = [ D(v) |v_x|^(p-2) v_x ]_x + (H(v))_x + g(v)
//! ```
//!
//! with `p > 1`, diffusion `D > 0` on `(0,1)` (possibly degenerate or
//! singular at the equilibria), convective flux `H`, and an ignition
//! reaction `g` vanishing on `[0, theta]`. The crate decides existence or
//! nonexistence of traveling-wave solutions connecting 1 to 0, computes the
//! unique wave speed `c*` and profile, classifies the finiteness and slope
//! of the wave edges from the coefficient exponents, and cross-validates
//! the speed against a direct finite-volume simulation of the PDE.
//!
//! Module map:
//!
//! - [`model`]: problem definition, coefficient families, special constants
//! - [`criteria`]: existence / nonexistence conditions and verdict
//! - [`shooting`]: reduced first-order solver and speed bisection
//! - [`profile`]: wave profile reconstruction and validation
//! - [`asymptotics`]: closed-form classification of edge behavior
//! - [`frontsim`]: finite-volume PDE simulation for independent front speed
//! - [`oracle`]: brute-force validators for the supporting inequalities
//! - [`config`]: TOML problem descriptions

// `!(x > y)` is used deliberately where NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod criteria;
pub mod error;
pub mod frontsim;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod shooting;

pub use error::{Error, Result};
pub use model::Problem;
