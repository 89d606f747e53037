//! ROAD solvers: dictionary learning as a sum of `K` rank-one blocks, solved
//! by non-convex ADMM.
//!
//! Three variants share one state layout ([`RoadState`]):
//!
//! * exact, noise-free: `X₁ₖ = X₃ₖ`, `X₂ₖ = X₃ₖ`, `Y = ΣX₃ₖ`;
//! * exact, noisy: the data constraint becomes `‖ΣX₃ₖ − Y‖_F ≤ ε`;
//! * inexact: each constraint carries a slack block penalized by `β/2‖·‖²`,
//!   with its own penalty `ρ`.
//!
//! `X₁` carries the `ℓ₂,₁` column-sparsity term, `X₂` the rank-one
//! constraint, `X₃` couples the blocks to the data.

mod config;
mod extract;
mod objective;
mod solve;
mod state;
mod step;

pub use config::{AdmmConfig, Variant};
pub use extract::{extract_model, DEAD_ATOM_RTOL};
pub use objective::{eval_lagrangian, residuals, RANK_TOL};
pub use solve::{run, run_from, SolveReport};
pub use state::{init_state, RoadState};
pub use step::{project_to_ball, solve_x3, step_exact, step_exact_noisy, step_inexact};

use crate::error::Result;
use crate::linalg::Mat;
use crate::model::LearnedModel;

/// [`run`] followed by [`extract_model`].
pub fn learn(y: &Mat, cfg: &AdmmConfig) -> Result<LearnedModel> {
    let (state, report) = run(y, cfg)?;
    extract_model(&state, y, report, cfg.seed)
}
