use std::collections::BTreeSet;

use crate::admm::solve::SolveReport;
use crate::admm::state::RoadState;
use crate::error::{Error, Result};
use crate::linalg::{leading_singular_triple, Mat};
use crate::model::{History, LearnedModel};
use crate::rng;

/// Atoms whose leading singular value is below this fraction of the largest
/// one are treated as dead.
pub const DEAD_ATOM_RTOL: f64 = 1e-8;

/// Reads `(D, X)` off the rank-one blocks `X₂ₖ = σuvᵀ`: `D:,k = u` with its
/// largest-magnitude entry positive, `Xk,: = σvᵀ`. Dead atoms get a seeded
/// random unit column and a zero coefficient row.
pub fn extract_model(
    state: &RoadState,
    y: &Mat,
    report: SolveReport,
    seed: u64,
) -> Result<LearnedModel> {
    state.check_data(y)?;
    let (m, n) = state.shape();
    let k_atoms = state.k_atoms();
    let triples = state
        .x2
        .iter()
        .enumerate()
        .map(|(k, x)| leading_singular_triple(x).map_err(|e| e.at_atom(k)))
        .collect::<Result<Vec<_>>>()?;
    let sigma_max = triples
        .iter()
        .flatten()
        .map(|t| t.0)
        .fold(0.0_f64, f64::max);

    let mut dictionary = Mat::zeros(m, k_atoms);
    let mut coefficients = Mat::zeros(k_atoms, n);
    let mut dead_atoms = BTreeSet::new();
    for (k, triple) in triples.into_iter().enumerate() {
        match triple {
            Some((sigma, mut u, mut v)) if sigma > 0.0 && sigma >= DEAD_ATOM_RTOL * sigma_max => {
                let pivot = u
                    .iter()
                    .copied()
                    .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
                if pivot < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                dictionary.col_mut(k).copy_from_slice(&u);
                for (j, vj) in v.iter().enumerate() {
                    coefficients.set(k, j, sigma * vj);
                }
            }
            _ => {
                dead_atoms.insert(k);
                let mut r = rng::seeded(rng::derive_seed(
                    seed,
                    &[b"dead-atom", &(k as u64).to_le_bytes()],
                ));
                dictionary
                    .col_mut(k)
                    .copy_from_slice(&rng::unit_vector(&mut r, m));
            }
        }
    }
    if dictionary.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure { atom: None });
    }
    Ok(LearnedModel {
        dictionary,
        coefficients,
        dead_atoms,
        history: History::Admm(report),
    })
}
