use crate::admm::config::{AdmmConfig, Variant};
use crate::error::{Error, Result};
use crate::linalg::{frob_norm, rank_one_project, Mat};
use crate::rng;

/// Full ADMM iterate. Every block is `M × N`, the shape of the training data.
///
/// `x1`/`x2`/`x3` are the per-atom copies of the rank-one blocks, `z*` the
/// slack blocks (identically zero for the exact variants), `w` the
/// noise-ball variable (exact-noisy only) and `lam*` the scaled multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadState {
    pub variant: Variant,
    pub x1: Vec<Mat>,
    pub x2: Vec<Mat>,
    pub x3: Vec<Mat>,
    pub z1: Vec<Mat>,
    pub z2: Vec<Mat>,
    pub z3: Mat,
    pub w: Option<Mat>,
    pub lam1: Vec<Mat>,
    pub lam2: Vec<Mat>,
    pub lam3: Mat,
    pub iter: usize,
}

impl RoadState {
    pub fn k_atoms(&self) -> usize {
        self.x3.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.z3.shape()
    }

    /// `Σₖ X₃ₖ`
    pub fn x3_sum(&self) -> Mat {
        sum_blocks(&self.x3, self.shape())
    }

    /// The data target of the last constraint: `W` when present, else `Y`.
    pub(crate) fn data_target<'a>(&'a self, y: &'a Mat) -> &'a Mat {
        self.w.as_ref().unwrap_or(y)
    }

    pub(crate) fn check_data(&self, y: &Mat) -> Result<()> {
        if y.shape() != self.shape() {
            return Err(Error::dim(format!(
                "state blocks are {:?} but data is {:?}",
                self.shape(),
                y.shape()
            )));
        }
        Ok(())
    }
}

pub(crate) fn sum_blocks(blocks: &[Mat], shape: (usize, usize)) -> Mat {
    let mut acc = Mat::zeros(shape.0, shape.1);
    for b in blocks {
        acc += b;
    }
    acc
}

/// Seeded starting point: each `X₃ₖ` is the rank-one projection of `Y/K`
/// plus Gaussian noise with standard deviation `0.1·‖Y‖_F/√(MN)`;
/// `X₁ₖ = X₂ₖ = X₃ₖ`, slacks and multipliers start at zero and `W = Y`.
pub fn init_state(y: &Mat, cfg: &AdmmConfig) -> Result<RoadState> {
    let (m, n) = y.shape();
    if m == 0 || n == 0 {
        return Err(Error::dim("training data must be non-empty"));
    }
    if cfg.k_atoms == 0 {
        return Err(Error::Config("k_atoms must be positive".into()));
    }
    let k = cfg.k_atoms;
    let sd = cfg.init_scale * frob_norm(y) / ((m * n) as f64).sqrt();
    let share = y.scaled(1.0 / k as f64);
    let mut r = rng::seeded(cfg.seed);
    let mut x3 = Vec::with_capacity(k);
    for atom in 0..k {
        let mut start = share.clone();
        for v in start.as_mut_slice() {
            *v += sd * rng::standard_normal(&mut r);
        }
        x3.push(rank_one_project(&start).map_err(|e| e.at_atom(atom))?);
    }
    let zeros = vec![Mat::zeros(m, n); k];
    Ok(RoadState {
        variant: cfg.variant,
        x1: x3.clone(),
        x2: x3.clone(),
        x3,
        z1: zeros.clone(),
        z2: zeros.clone(),
        z3: Mat::zeros(m, n),
        w: (cfg.variant == Variant::ExactNoisy).then(|| y.clone()),
        lam1: zeros.clone(),
        lam2: zeros,
        lam3: Mat::zeros(m, n),
        iter: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd_thin;

    fn data(seed: u64) -> Mat {
        let mut r = rng::seeded(seed);
        Mat::from_fn(5, 7, |_, _| rng::standard_normal(&mut r))
    }

    #[test]
    fn init_is_deterministic() {
        let y = data(1);
        let cfg = AdmmConfig::exact(3, 10.0).unwrap();
        assert_eq!(init_state(&y, &cfg).unwrap(), init_state(&y, &cfg).unwrap());
        let other = AdmmConfig { seed: 9, ..cfg.clone() };
        assert_ne!(init_state(&y, &cfg).unwrap(), init_state(&y, &other).unwrap());
    }

    #[test]
    fn single_atom_start_has_equal_copies_and_zero_multipliers() {
        let y = data(2);
        let s = init_state(&y, &AdmmConfig::exact(1, 10.0).unwrap()).unwrap();
        assert_eq!(s.x1, s.x3);
        assert_eq!(s.x2, s.x3);
        assert!(s.lam1[0].is_zero() && s.lam2[0].is_zero() && s.lam3.is_zero());
        assert!(s.z1[0].is_zero() && s.z3.is_zero());
        assert!(s.w.is_none());
        assert_eq!(s.iter, 0);
    }

    #[test]
    fn starting_blocks_are_rank_one() {
        let y = data(3);
        let s = init_state(&y, &AdmmConfig::exact(4, 10.0).unwrap()).unwrap();
        for x in &s.x2 {
            let sv = svd_thin(x).unwrap().s;
            assert!(sv[1] / sv[0] < 1e-10, "{sv:?}");
        }
    }

    #[test]
    fn noisy_variant_starts_with_w_equal_to_y() {
        let y = data(4);
        let s = init_state(&y, &AdmmConfig::exact_noisy(2, 10.0, 0.5).unwrap()).unwrap();
        assert_eq!(s.w.as_ref(), Some(&y));
    }

    #[test]
    fn rejects_empty_data_and_zero_atoms() {
        let cfg = AdmmConfig::exact(2, 10.0).unwrap();
        assert!(init_state(&Mat::zeros(0, 3), &cfg).is_err());
        let bad = AdmmConfig { k_atoms: 0, ..cfg };
        assert!(init_state(&data(5), &bad).is_err());
    }
}
