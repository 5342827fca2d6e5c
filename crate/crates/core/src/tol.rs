//! Numerical tolerances.
//!
//! The underlying algebra is exact; tolerances exist only to separate
//! floating-point noise from genuine violations. Structural checks
//! (hermiticity, dichotomy, state validity) default to 1e-9, certification
//! passes to 1e-7, and eigenvalue classification against +/-1 to 1e-6.
//! Every value can be overridden, either programmatically, through a JSON
//! profile, or per-name from the CLI.

use std::collections::BTreeMap;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entry of |M - M^dagger| accepted when certifying a Hermitian operator.
    pub hermiticity: f64,
    /// Max entry of |B^2 - 1| and |tr B| accepted for a dichotomic observable.
    pub dichotomy: f64,
    /// Trace deviation and negative-eigenvalue allowance for density matrices.
    pub state: f64,
    /// Pass threshold for the parity-obliviousness residual.
    pub parity: f64,
    /// Max pairwise anticommutator residual accepted before extraction.
    pub anticommutation: f64,
    /// Pass threshold for extraction and state-map residuals.
    pub certification: f64,
    /// Half-width of the bands around +1 and -1 used to classify eigenvalues.
    pub eigen_classify: f64,
    /// Slack allowed in `success_probability >= quantum_bound - margin`.
    pub score_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            dichotomy: 1e-9,
            state: 1e-9,
            parity: 1e-7,
            anticommutation: 1e-7,
            certification: 1e-7,
            eigen_classify: 1e-6,
            score_margin: 1e-7,
        }
    }
}

impl Tolerances {
    /// Set one tolerance by name. Names match the struct fields.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), Error> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance `{name}` must be a positive finite number, got {value}"
            )));
        }
        let slot = match name {
            "hermiticity" => &mut self.hermiticity,
            "dichotomy" => &mut self.dichotomy,
            "state" => &mut self.state,
            "parity" => &mut self.parity,
            "anticommutation" => &mut self.anticommutation,
            "certification" => &mut self.certification,
            "eigen_classify" | "eigen-classify" => &mut self.eigen_classify,
            "score_margin" | "score-margin" => &mut self.score_margin,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance name `{other}`"
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Apply a JSON profile of the form `{"name": value, ...}`.
    pub fn apply_profile_json(&mut self, text: &str) -> Result<(), Error> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text)?;
        for (name, value) in map {
            self.set(&name, value)?;
        }
        Ok(())
    }
}
