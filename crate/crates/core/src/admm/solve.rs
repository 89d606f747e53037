use crate::admm::config::{AdmmConfig, Variant};
use crate::admm::objective::eval_lagrangian;
use crate::admm::state::{init_state, RoadState};
use crate::admm::step::advance;
use crate::error::Result;
use crate::linalg::Mat;

/// Per-iteration trace of a solver run. Residual entries are the normalized
/// squared residuals compared against the tolerances.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub primal_residual_history: Vec<f64>,
    pub dual_residual_history: Vec<f64>,
    /// Empty for the exact variants.
    pub lagrangian_history: Vec<f64>,
}

impl SolveReport {
    /// `iter,primal,dual,lagrangian` lines, one per iteration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,primal,dual,lagrangian\n");
        for i in 0..self.iterations {
            let lag = self
                .lagrangian_history
                .get(i)
                .map(|v| format!("{v:?}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:?},{:?},{}\n",
                i + 1,
                self.primal_residual_history[i],
                self.dual_residual_history[i],
                lag
            ));
        }
        out
    }
}

/// Runs the configured variant from [`init_state`] until both normalized
/// squared residuals drop below their tolerances or `max_iter` is reached.
pub fn run(y: &Mat, cfg: &AdmmConfig) -> Result<(RoadState, SolveReport)> {
    cfg.validate()?;
    let state = init_state(y, cfg)?;
    run_from(state, y, cfg)
}

/// As [`run`], starting from a caller-supplied state.
pub fn run_from(mut state: RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<(RoadState, SolveReport)> {
    cfg.validate()?;
    let mut report = SolveReport::default();
    for _ in 0..cfg.max_iter {
        let stats = advance(&mut state, y, cfg)?;
        let (p_den, d_den) = stats.denominators(cfg.variant);
        let primal = stats.primal_sq / p_den;
        let dual = stats.dual_sq / d_den;
        report.primal_residual_history.push(primal);
        report.dual_residual_history.push(dual);
        if cfg.variant == Variant::Inexact {
            report.lagrangian_history.push(eval_lagrangian(&state, y, cfg)?);
        }
        report.iterations += 1;
        if primal <= cfg.tol_primal && dual <= cfg.tol_dual {
            report.converged = true;
            break;
        }
    }
    Ok((state, report))
}
