//! One sweep of each ROAD solver, in the fixed block order
//! X₁ → X₂ → X₃ → (Z | W) → Λ.

use rayon::prelude::*;

use crate::admm::config::{AdmmConfig, Variant};
use crate::admm::state::{sum_blocks, RoadState};
use crate::error::{Error, Result};
use crate::linalg::{frob_norm, group_soft_threshold_in_place, rank_one_project_in_place, Mat};

/// Joint minimiser of
/// `ρ₁Σₖ‖b1ₖ − X₃ₖ‖² + ρ₂Σₖ‖b2ₖ − X₃ₖ‖² + ρ₃‖b3 − ΣₖX₃ₖ‖²`.
///
/// The normal equations `(ρ₁+ρ₂)X₃ₖ + ρ₃ΣⱼX₃ⱼ = Rₖ` with
/// `Rₖ = ρ₁b1ₖ + ρ₂b2ₖ + ρ₃b3` couple the blocks only through their sum
/// `S`, which solves `(ρ₁+ρ₂+Kρ₃)S = ΣₖRₖ`; then `X₃ₖ = (Rₖ − ρ₃S)/(ρ₁+ρ₂)`.
pub fn solve_x3(
    b1: &[Mat],
    b2: &[Mat],
    b3: &Mat,
    rho1: f64,
    rho2: f64,
    rho3: f64,
) -> Result<Vec<Mat>> {
    let k = b1.len();
    if k == 0 || b2.len() != k {
        return Err(Error::dim("b1 and b2 must hold the same non-zero number of blocks"));
    }
    if b1.iter().chain(b2).any(|b| !b.same_shape(b3)) {
        return Err(Error::dim("all X3 right-hand-side blocks must share a shape"));
    }
    let c = rho1 + rho2;
    let d = rho3;
    let mut r: Vec<Mat> = b1
        .iter()
        .zip(b2)
        .map(|(p, q)| {
            let mut rk = p.scaled(rho1);
            rk.add_scaled(rho2, q);
            rk.add_scaled(rho3, b3);
            rk
        })
        .collect();
    let s = sum_blocks(&r, b3.shape()).scaled(1.0 / (c + d * k as f64));
    for rk in &mut r {
        rk.add_scaled(-d, &s);
        *rk = rk.scaled(1.0 / c);
    }
    Ok(r)
}

/// Euclidean projection of `w_hat` onto `{W : ‖W − Y‖_F ≤ ε}`.
pub fn project_to_ball(w_hat: &Mat, y: &Mat, epsilon: f64) -> Mat {
    let diff = w_hat - y;
    let dist = frob_norm(&diff);
    if dist <= epsilon {
        w_hat.clone()
    } else {
        let mut w = y.clone();
        w.add_scaled(epsilon / dist, &diff);
        w
    }
}

fn expect_variant(state: &RoadState, cfg: &AdmmConfig, want: Variant) -> Result<()> {
    if cfg.variant != want || state.variant != want {
        return Err(Error::Config(format!(
            "{} step called with config {} and state {}",
            want, cfg.variant, state.variant
        )));
    }
    Ok(())
}

/// One inexact-ADMM sweep with per-constraint penalties.
pub fn step_inexact(state: &RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<RoadState> {
    let mut next = state.clone();
    advance(&mut next, y, cfg)?;
    Ok(next)
}

/// One exact-ADMM sweep for noise-free data.
pub fn step_exact(state: &RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<RoadState> {
    let mut next = state.clone();
    advance(&mut next, y, cfg)?;
    Ok(next)
}

/// One exact-ADMM sweep with the data constraint relaxed to an ε-ball.
pub fn step_exact_noisy(state: &RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<RoadState> {
    let mut next = state.clone();
    advance(&mut next, y, cfg)?;
    Ok(next)
}

/// Squared residuals and stopping denominators gathered during a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct SweepStats {
    pub primal_sq: f64,
    pub dual_sq: f64,
    pub x3_sq: f64,
    pub z_sq: f64,
}

impl SweepStats {
    /// `(primal, dual)` denominators, floored at `1e-12`.
    pub fn denominators(&self, variant: Variant) -> (f64, f64) {
        let x3 = self.x3_sq.max(1e-12);
        let dual = if variant.is_exact() { x3 } else { self.z_sq.max(1e-12) };
        (x3, dual)
    }
}

/// In-place sweep dispatching on `cfg.variant`.
pub(crate) fn advance(state: &mut RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<SweepStats> {
    state.check_data(y)?;
    if state.k_atoms() != cfg.k_atoms {
        return Err(Error::Config(format!(
            "state has {} atoms, config asks for {}",
            state.k_atoms(),
            cfg.k_atoms
        )));
    }
    match cfg.variant {
        Variant::Inexact => {
            expect_variant(state, cfg, Variant::Inexact)?;
            advance_inexact(state, y, cfg)
        }
        Variant::ExactNoiseFree => {
            expect_variant(state, cfg, Variant::ExactNoiseFree)?;
            advance_exact(state, y, cfg)
        }
        Variant::ExactNoisy => {
            expect_variant(state, cfg, Variant::ExactNoisy)?;
            if state.w.is_none() {
                return Err(Error::Config("exact_noisy state lacks W".into()));
            }
            advance_exact(state, y, cfg)
        }
    }
}

/// `out = a + sb·b` elementwise.
fn combine2(out: &mut Mat, a: &Mat, sb: f64, b: &Mat) {
    out.as_mut_slice()
        .iter_mut()
        .zip(a.as_slice().iter().zip(b.as_slice()))
        .for_each(|(o, (a, b))| *o = a + sb * b);
}

/// `out = a + sb·b + sc·c` elementwise.
fn combine(out: &mut Mat, a: &Mat, b: (f64, &Mat), c: (f64, &Mat)) {
    out.as_mut_slice()
        .iter_mut()
        .zip(a.as_slice())
        .zip(b.1.as_slice())
        .zip(c.1.as_slice())
        .for_each(|(((o, a), b1), c1)| *o = a + b.0 * b1 + c.0 * c1);
}

/// X₃ from per-block right-hand sides `Rₖ` (already weighted) stored in
/// `r`: `X₃ₖ = (Rₖ − ρ₃S)/c` with `S = ΣR/(c + ρ₃K)`. Returns
/// `(‖ΔX₃‖², ‖X₃‖²)` against the previous `x3`.
fn finish_x3(x3: &mut [Mat], r: &[Mat], c: f64, d: f64, shape: (usize, usize)) -> (f64, f64) {
    let k = x3.len() as f64;
    let s = sum_blocks(r, shape).scaled(d / (c + d * k));
    let inv_c = 1.0 / c;
    let per_block: Vec<(f64, f64)> = x3
        .par_iter_mut()
        .zip(r.par_iter())
        .map(|(x, rk)| {
            let (mut dd, mut xx) = (0.0, 0.0);
            for ((x, rv), sv) in x.as_mut_slice().iter_mut().zip(rk.as_slice()).zip(s.as_slice()) {
                let new = (rv - sv) * inv_c;
                dd += (new - *x) * (new - *x);
                xx += new * new;
                *x = new;
            }
            (dd, xx)
        })
        .collect();
    per_block
        .iter()
        .fold((0.0, 0.0), |(a, b), (d, x)| (a + d, b + x))
}

fn advance_inexact(s: &mut RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<SweepStats> {
    let [rho1, rho2, rho3] = cfg.rhos;
    let [beta1, beta2, beta3] = cfg.betas;
    let shape = s.shape();
    let RoadState {
        x1,
        x2,
        x3,
        z1,
        z2,
        z3,
        lam1,
        lam2,
        lam3,
        ..
    } = s;

    x1.par_iter_mut()
        .zip(x3.par_iter().zip(z1.par_iter()).zip(lam1.par_iter()))
        .for_each(|(out, ((x, z), l))| {
            combine(out, x, (1.0, z), (-1.0, l));
            group_soft_threshold_in_place(out, 1.0 / rho1);
        });
    x2.par_iter_mut()
        .zip(x3.par_iter().zip(z2.par_iter()).zip(lam2.par_iter()))
        .enumerate()
        .try_for_each(|(i, (out, ((x, z), l)))| {
            combine(out, x, (1.0, z), (-1.0, l));
            rank_one_project_in_place(out).map_err(|e| e.at_atom(i))
        })?;

    // Rₖ = ρ₁(X₁ − Z₁ + Λ₁) + ρ₂(X₂ − Z₂ + Λ₂) + ρ₃(Y − Z₃ + Λ₃)
    let mut b3 = Mat::zeros(shape.0, shape.1);
    combine(&mut b3, y, (-1.0, z3), (1.0, lam3));
    let r: Vec<Mat> = (0..x1.len())
        .into_par_iter()
        .map(|i| {
            let mut rk = Mat::zeros(shape.0, shape.1);
            let parts = [
                (rho1, &x1[i]),
                (-rho1, &z1[i]),
                (rho1, &lam1[i]),
                (rho2, &x2[i]),
                (-rho2, &z2[i]),
                (rho2, &lam2[i]),
                (rho3, &b3),
            ];
            for (w, m) in parts {
                rk.add_scaled(w, m);
            }
            rk
        })
        .collect();
    let (_, x3_sq) = finish_x3(x3, &r, rho1 + rho2, rho3, shape);
    drop(r);

    let shrink1 = rho1 / (beta1 + rho1);
    let shrink2 = rho2 / (beta2 + rho2);
    let shrink3 = rho3 / (beta3 + rho3);
    // Zᵢ ← shrink·(Xᵢ − X₃ + Λᵢ); Λᵢ ← Λᵢ + Xᵢ − X₃ − Zᵢ
    let slack = |xi: &Mat, x3: &Mat, z: &mut Mat, lam: &mut Mat, shrink: f64| {
        let (mut p, mut d, mut zz) = (0.0, 0.0, 0.0);
        for (((xv, x3v), zv), lv) in xi
            .as_slice()
            .iter()
            .zip(x3.as_slice())
            .zip(z.as_mut_slice())
            .zip(lam.as_mut_slice())
        {
            let diff = xv - x3v;
            let new_z = shrink * (diff + *lv);
            let res = diff - new_z;
            d += (new_z - *zv) * (new_z - *zv);
            zz += new_z * new_z;
            p += res * res;
            *zv = new_z;
            *lv += res;
        }
        (p, d, zz)
    };
    let per_block: Vec<(f64, f64, f64)> = x1
        .par_iter()
        .zip(x2.par_iter())
        .zip(x3.par_iter())
        .zip(z1.par_iter_mut().zip(z2.par_iter_mut()))
        .zip(lam1.par_iter_mut().zip(lam2.par_iter_mut()))
        .map(|((((a, b), c), (za, zb)), (la, lb))| {
            let s1 = slack(a, c, za, la, shrink1);
            let s2 = slack(b, c, zb, lb, shrink2);
            (s1.0 + s2.0, s1.1 + s2.1, s1.2 + s2.2)
        })
        .collect();
    let mut stats = SweepStats {
        x3_sq,
        ..Default::default()
    };
    for (p, d, zz) in per_block {
        stats.primal_sq += p;
        stats.dual_sq += d;
        stats.z_sq += zz;
    }

    // Z₃ ← shrink₃·(Y − ΣX₃ + Λ₃); Λ₃ ← Λ₃ + (Y − ΣX₃) − Z₃
    let total = sum_blocks(x3, shape);
    for (((yv, tv), zv), lv) in y
        .as_slice()
        .iter()
        .zip(total.as_slice())
        .zip(z3.as_mut_slice())
        .zip(lam3.as_mut_slice())
    {
        let gap = yv - tv;
        let new_z = shrink3 * (gap + *lv);
        let res = gap - new_z;
        stats.dual_sq += (new_z - *zv) * (new_z - *zv);
        stats.z_sq += new_z * new_z;
        stats.primal_sq += res * res;
        *zv = new_z;
        *lv += res;
    }
    s.iter += 1;
    Ok(stats)
}

fn advance_exact(s: &mut RoadState, y: &Mat, cfg: &AdmmConfig) -> Result<SweepStats> {
    let t = 1.0 / cfg.rho;
    let shape = s.shape();
    let RoadState {
        x1,
        x2,
        x3,
        w,
        lam1,
        lam2,
        lam3,
        ..
    } = s;

    x1.par_iter_mut()
        .zip(x3.par_iter().zip(lam1.par_iter()))
        .for_each(|(out, (x, l))| {
            combine2(out, x, 1.0, l);
            group_soft_threshold_in_place(out, t);
        });
    x2.par_iter_mut()
        .zip(x3.par_iter().zip(lam2.par_iter()))
        .enumerate()
        .try_for_each(|(i, (out, (x, l)))| {
            combine2(out, x, 1.0, l);
            rank_one_project_in_place(out).map_err(|e| e.at_atom(i))
        })?;

    // Rₖ = (X₁ − Λ₁) + (X₂ − Λ₂) + (target − Λ₃), unit weights
    let target = w.as_ref().unwrap_or(y);
    let mut b3 = Mat::zeros(shape.0, shape.1);
    combine2(&mut b3, target, -1.0, lam3);
    let r: Vec<Mat> = (0..x1.len())
        .into_par_iter()
        .map(|i| {
            let mut rk = Mat::zeros(shape.0, shape.1);
            rk.as_mut_slice()
                .iter_mut()
                .zip(x1[i].as_slice().iter().zip(lam1[i].as_slice()))
                .zip(x2[i].as_slice().iter().zip(lam2[i].as_slice()))
                .zip(b3.as_slice())
                .for_each(|(((o, (a, la)), (b, lb)), c)| *o = a - la + b - lb + c);
            rk
        })
        .collect();
    let (dual_sq, x3_sq) = finish_x3(x3, &r, 2.0, 1.0, shape);
    drop(r);
    let total = sum_blocks(x3, shape);

    if let Some(w) = w.as_mut() {
        let w_hat = &total + lam3;
        *w = project_to_ball(&w_hat, y, cfg.epsilon_noise);
    }

    // Λᵢ ← Λᵢ + X₃ − Xᵢ
    let per_block: Vec<f64> = x1
        .par_iter()
        .zip(x2.par_iter())
        .zip(x3.par_iter())
        .zip(lam1.par_iter_mut().zip(lam2.par_iter_mut()))
        .map(|(((a, b), c), (la, lb))| {
            let mut p = 0.0;
            for ((((av, bv), cv), lav), lbv) in a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .zip(c.as_slice())
                .zip(la.as_mut_slice())
                .zip(lb.as_mut_slice())
            {
                let (r1, r2) = (cv - av, cv - bv);
                *lav += r1;
                *lbv += r2;
                p += r1 * r1 + r2 * r2;
            }
            p
        })
        .collect();
    let mut primal_sq: f64 = per_block.iter().sum();
    let target = w.as_ref().unwrap_or(y);
    for ((tv, gv), lv) in total
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .zip(lam3.as_mut_slice())
    {
        let res = tv - gv;
        *lv += res;
        primal_sq += res * res;
    }
    s.iter += 1;
    Ok(SweepStats {
        primal_sq,
        dual_sq,
        x3_sq,
        z_sq: 0.0,
    })
}
