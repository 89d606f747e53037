//! Dictionary learning by rank-one atomic decomposition.
//!
//! The crate casts dictionary learning as a search over `K` rank-one blocks
//! `Zₖ = D:,k Xk,:` whose sum reproduces the training data, and solves it with
//! non-convex ADMM ([`admm`]). Classical two-stage learners ([`baselines`]),
//! a synthetic recovery benchmark ([`bench`]) and a patch-based
//! super-resolution pipeline ([`superres`]) are built on the same matrix
//! layer ([`linalg`]).

pub mod admm;
pub mod baselines;
pub mod bench;
pub mod error;
pub mod kvconfig;
pub mod learner;
pub mod linalg;
pub mod matio;
pub mod model;
pub mod rng;
pub mod superres;

pub use error::{Error, Result};
pub use linalg::Mat;
pub use model::{History, LearnedModel};
