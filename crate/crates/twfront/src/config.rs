//! Problem configuration files.
//!
//! Problems are described in TOML:
//!
//! ```toml
//! p = 2.0
//! theta = 0.5
//!
//! [diffusion]
//! d0 = 1.0
//! alpha = 0.0
//! beta = 0.0
//!
//! [reaction]
//! g0 = 2.0
//! sigma = 1.0
//! gamma = 1.0
//!
//! [convection]
//! coeffs = [0.0]
//! ```
//!
//! `[convection]` may be omitted for `h = 0`. Parsing and validation errors
//! name the offending key.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{ConvectionSpec, DiffusionSpec, Exponents, Problem, ReactionSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub theta: f64,
    pub diffusion: DiffusionConfig,
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub convection: ConvectionConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    pub d0: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub g0: f64,
    pub sigma: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvectionConfig {
    #[serde(default)]
    pub coeffs: Vec<f64>,
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_problem(&self) -> Result<Problem> {
        let exponents = Exponents::new(self.p)
            .map_err(|e| Error::Config(format!("key `p`: {e}")))?;
        Problem::new(
            exponents,
            DiffusionSpec::power_law(self.diffusion.d0, self.diffusion.alpha, self.diffusion.beta),
            ReactionSpec::power_law(
                self.reaction.g0,
                self.reaction.sigma,
                self.reaction.gamma,
                self.theta,
            ),
            ConvectionSpec::polynomial(self.coeffs_or_zero()),
        )
    }

    fn coeffs_or_zero(&self) -> Vec<f64> {
        self.convection.coeffs.clone()
    }
}

/// Parse a TOML problem description into a validated [`Problem`].
pub fn problem_from_toml(text: &str) -> Result<Problem> {
    ProblemConfig::from_toml(text)?.to_problem()
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
p = 2.0
theta = 0.5

[diffusion]
d0 = 1.0
alpha = 0.0
beta = 0.0

[reaction]
g0 = 2.0
sigma = 1.0
gamma = 1.0

[convection]
coeffs = [0.0]
"#;

    #[test]
    fn parses_reference_instance() {
        let pr = problem_from_toml(REFERENCE).unwrap();
        assert_eq!(pr.p(), 2.0);
        assert_eq!(pr.theta(), 0.5);
        assert_eq!(pr.reaction(0.75).unwrap(), 0.125);
    }

    #[test]
    fn convection_section_is_optional() {
        let text = REFERENCE.replace("[convection]\ncoeffs = [0.0]", "");
        let pr = problem_from_toml(&text).unwrap();
        assert_eq!(pr.convective_velocity(0.3), 0.0);
    }

    #[test]
    fn missing_key_is_named() {
        let text = REFERENCE.replace("theta = 0.5", "");
        let err = problem_from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("theta"), "error was: {err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{REFERENCE}\nbogus_key = 1.0\n");
        let err = problem_from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "error was: {err}");
    }

    #[test]
    fn invalid_value_is_named() {
        let text = REFERENCE.replace("p = 2.0", "p = 0.5");
        let err = problem_from_toml(&text).unwrap_err();
        assert!(err.to_string().contains('p'), "error was: {err}");
    }
}
