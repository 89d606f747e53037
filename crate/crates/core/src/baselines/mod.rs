//! Two-stage dictionary learners: sparse coding (OMP or lasso) alternated
//! with a dictionary update (MOD or K-SVD).

mod alternating;
mod lasso;
mod omp;
mod update;

pub use alternating::{init_dictionary, run_alternating, run_alternating_from, AltConfig, Coder, Updater};
pub use lasso::{lasso_code, lasso_code_columns, lasso_trace, lipschitz_constant};
pub use omp::{omp, omp_code, OmpColumn, SparseCode, OMP_RESIDUAL_TOL, OMP_RIDGE};
pub use update::{ksvd_update, mod_update, MOD_RIDGE};
