use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which ROAD solver to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Consensus constraints `X₁ₖ = X₃ₖ`, `X₂ₖ = X₃ₖ`, `Y = ΣX₃ₖ` enforced by multipliers.
    ExactNoiseFree,
    /// As above with the data constraint relaxed to a Frobenius ball of radius ε.
    ExactNoisy,
    /// Slack blocks Z with quadratic penalties β and one penalty ρ per constraint.
    Inexact,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::ExactNoiseFree => "exact_noisefree",
            Variant::ExactNoisy => "exact_noisy",
            Variant::Inexact => "inexact",
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Variant::Inexact)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_noisefree" | "exact" => Ok(Variant::ExactNoiseFree),
            "exact_noisy" | "noisy" => Ok(Variant::ExactNoisy),
            "inexact" => Ok(Variant::Inexact),
            other => Err(Error::Config(format!("unknown ADMM variant {other:?}"))),
        }
    }
}

/// Solver parameters. `rho` is used by the exact variants, `rhos`/`betas` by
/// the inexact one.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmConfig {
    pub variant: Variant,
    pub k_atoms: usize,
    pub rho: f64,
    pub rhos: [f64; 3],
    pub betas: [f64; 3],
    pub epsilon_noise: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Standard deviation of the starting-point perturbation, relative to
    /// the RMS entry of `Y`.
    pub init_scale: f64,
    /// Proceed (with a warning) when `ρᵢ ≤ βᵢ + 2`.
    pub allow_penalty_violation: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            variant: Variant::ExactNoiseFree,
            k_atoms: 1,
            rho: 10.0,
            rhos: [210.0, 310.0, 260.0],
            betas: [200.0, 300.0, 250.0],
            epsilon_noise: 0.0,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iter: 300,
            seed: 0,
            init_scale: 0.5,
            allow_penalty_violation: false,
        }
    }
}

impl AdmmConfig {
    pub fn exact(k_atoms: usize, rho: f64) -> Result<Self> {
        let cfg = AdmmConfig {
            k_atoms,
            rho,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn exact_noisy(k_atoms: usize, rho: f64, epsilon: f64) -> Result<Self> {
        let cfg = AdmmConfig {
            variant: Variant::ExactNoisy,
            k_atoms,
            rho,
            epsilon_noise: epsilon,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects penalties that break `ρᵢ > βᵢ + 2`.
    pub fn inexact(k_atoms: usize, rhos: [f64; 3], betas: [f64; 3]) -> Result<Self> {
        let cfg = AdmmConfig {
            variant: Variant::Inexact,
            k_atoms,
            rhos,
            betas,
            max_iter: 2000,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the configuration; returns warnings for tolerated bound violations.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.k_atoms == 0 {
            return Err(Error::Config("k_atoms must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("init_scale must be non-negative".into()));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        match self.variant {
            Variant::ExactNoiseFree | Variant::ExactNoisy => {
                if !(self.rho > 0.0 && self.rho.is_finite()) {
                    return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
                }
                if !(self.epsilon_noise >= 0.0 && self.epsilon_noise.is_finite()) {
                    return Err(Error::Config("epsilon_noise must be non-negative".into()));
                }
            }
            Variant::Inexact => {
                for i in 0..3 {
                    let (rho, beta) = (self.rhos[i], self.betas[i]);
                    if !(rho > 0.0 && beta > 0.0 && rho.is_finite() && beta.is_finite()) {
                        return Err(Error::Config(format!(
                            "rho{0} and beta{0} must be positive",
                            i + 1
                        )));
                    }
                    if rho <= beta + 2.0 {
                        let err = Error::PenaltyBound {
                            index: i + 1,
                            rho,
                            bound: beta + 2.0,
                        };
                        if self.allow_penalty_violation {
                            warnings.push(err.to_string());
                        } else {
                            return Err(err);
                        }
                    }
                }
            }
        }
        Ok(warnings)
    }
}
