use crate::admm::config::{AdmmConfig, Variant};
use crate::admm::state::RoadState;
use crate::error::{Error, Result};
use crate::linalg::{is_rank_at_most_one, l21_norm, Mat};

/// Relative tolerance for the rank-one indicator in the Lagrangian.
pub const RANK_TOL: f64 = 1e-9;

/// Augmented Lagrangian of the inexact formulation. Returns `+∞` when some
/// `X₂ₖ` is not rank-one.
pub fn eval_lagrangian(state: &RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<f64> {
    if cfg.variant != Variant::Inexact {
        return Err(Error::Config(format!(
            "the augmented Lagrangian is defined for the inexact variant, not {}",
            cfg.variant
        )));
    }
    state.check_data(y)?;
    if state.x2.iter().any(|x| !is_rank_at_most_one(x, RANK_TOL)) {
        return Ok(f64::INFINITY);
    }
    let [rho1, rho2, rho3] = cfg.rhos;
    let [beta1, beta2, beta3] = cfg.betas;
    let mut value = 0.0;
    for k in 0..state.k_atoms() {
        value += l21_norm(&state.x1[k]);
        value += 0.5 * beta1 * state.z1[k].frob_norm_sq();
        value += 0.5 * beta2 * state.z2[k].frob_norm_sq();
        let c1 = &(&(&state.x1[k] - &state.x3[k]) - &state.z1[k]) + &state.lam1[k];
        value += 0.5 * rho1 * (c1.frob_norm_sq() - state.lam1[k].frob_norm_sq());
        let c2 = &(&(&state.x2[k] - &state.x3[k]) - &state.z2[k]) + &state.lam2[k];
        value += 0.5 * rho2 * (c2.frob_norm_sq() - state.lam2[k].frob_norm_sq());
    }
    value += 0.5 * beta3 * state.z3.frob_norm_sq();
    let c3 = &(&(y - &state.x3_sum()) - &state.z3) + &state.lam3;
    value += 0.5 * rho3 * (c3.frob_norm_sq() - state.lam3.frob_norm_sq());
    Ok(value)
}

/// Squared Frobenius norm of the stacked constraint violations of `state`.
pub(crate) fn primal_sq(state: &RoadState, y: &Mat) -> f64 {
    let mut acc = 0.0;
    for k in 0..state.k_atoms() {
        acc += (&(&state.x1[k] - &state.x3[k]) - &state.z1[k]).frob_norm_sq();
        acc += (&(&state.x2[k] - &state.x3[k]) - &state.z2[k]).frob_norm_sq();
    }
    let target = state.data_target(y);
    acc += (&(target - &state.x3_sum()) - &state.z3).frob_norm_sq();
    acc
}

/// Squared dual residual: slack changes for the inexact variant, `X₃` changes
/// for the exact ones.
pub(crate) fn dual_sq(prev: &RoadState, cur: &RoadState) -> f64 {
    if cur.variant.is_exact() {
        stacked_diff_sq(&prev.x3, &cur.x3)
    } else {
        stacked_diff_sq(&prev.z1, &cur.z1)
            + stacked_diff_sq(&prev.z2, &cur.z2)
            + (&cur.z3 - &prev.z3).frob_norm_sq()
    }
}

fn stacked_diff_sq(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (q - p).frob_norm_sq()).sum()
}

#[cfg(test)]
pub(crate) fn stacked_sq(blocks: &[Mat]) -> f64 {
    blocks.iter().map(Mat::frob_norm_sq).sum()
}

/// Primal and dual residual norms between consecutive iterates.
pub fn residuals(prev: &RoadState, cur: &RoadState, y: &Mat) -> Result<(f64, f64)> {
    cur.check_data(y)?;
    prev.check_data(y)?;
    if prev.k_atoms() != cur.k_atoms() || prev.variant != cur.variant {
        return Err(Error::dim("residuals need two iterates of the same run"));
    }
    Ok((primal_sq(cur, y).sqrt(), dual_sq(prev, cur).sqrt()))
}

/// Stopping-rule denominators `(primal, dual)`, floored at `1e-12`.
#[cfg(test)]
pub(crate) fn denominators(cur: &RoadState) -> (f64, f64) {
    let x3 = stacked_sq(&cur.x3).max(1e-12);
    let dual = if cur.variant.is_exact() {
        x3
    } else {
        (stacked_sq(&cur.z1) + stacked_sq(&cur.z2) + cur.z3.frob_norm_sq()).max(1e-12)
    };
    (x3, dual)
}
