//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng as _;
use road_core::admm::{
    eval_lagrangian, init_state, project_to_ball, run, solve_x3, step_inexact, AdmmConfig,
};
use road_core::bench::{gen_ground_truth, run_experiment, AlgorithmRun, ExperimentSpec, RunOptions, SparsityModel};
use road_core::learner::{Algorithm, LearnerParams};
use road_core::linalg::{frob_norm, group_soft_threshold, l21_norm, nuclear_norm, rank_one_project};
use road_core::rng::{seeded, standard_normal, Rng};
use road_core::superres::{apply_sr, psnr, read_pgm, resize_to, train_sr, SrCoder, SrConfig};
use road_core::Mat;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn randn(r: &mut Rng, m: usize, n: usize) -> Mat {
    Mat::from_fn(m, n, |_, _| standard_normal(r))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Minimizer of a convex scalar function on `[lo, hi]`, by bisection on
/// the sign of its derivative `df`.
fn argmin_convex(df: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if df(lo) >= 0.0 {
        return lo;
    }
    if df(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if df(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn grid_spec(n_grid: Vec<usize>, snr_db: Option<f64>, algorithms: &[(Algorithm, usize)]) -> ExperimentSpec {
    ExperimentSpec {
        name: "acceptance".into(),
        m: 16,
        k: 32,
        n_grid,
        sparsity: SparsityModel::Fixed(3),
        snr_db,
        trials: 10,
        seed: 0,
        algorithms: algorithms.iter().map(|&(a, it)| AlgorithmRun::new(a, it)).collect(),
        params: LearnerParams::default(),
    }
}

/// Median recovery error per (algorithm, N); failed trials count as error 1.
fn grid_medians(spec: &ExperimentSpec) -> BTreeMap<(Algorithm, usize), f64> {
    let result = run_experiment(spec, RunOptions::default()).expect("experiment runs");
    let mut by_cell: BTreeMap<(Algorithm, usize), Vec<f64>> = BTreeMap::new();
    for t in &result.trials {
        by_cell
            .entry((t.algorithm, t.n))
            .or_default()
            .push(*t.error.as_ref().unwrap_or(&1.0));
    }
    by_cell.into_iter().map(|(k, v)| (k, median(v))).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let spec = grid_spec(vec![100, 300], None, &[(Algorithm::RoadExact, 300)]);
    let med = grid_medians(&spec);
    let (e100, e300) = (med[&(Algorithm::RoadExact, 100)], med[&(Algorithm::RoadExact, 300)]);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        e300 < 1e-2 && e100 > 0.05 && secs < 300.0,
        format!("eADMM median error N=300 {e300:.3e} (< 1e-2), N=100 {e100:.3e} (> 0.05), limit 300 s"),
    )
}

fn criterion_2() -> Outcome {
    let spec = grid_spec(
        vec![300],
        None,
        &[
            (Algorithm::RoadExact, 300),
            (Algorithm::RoadInexact, 2000),
            (Algorithm::RoadInexactFixed, 2000),
        ],
    );
    let med = grid_medians(&spec);
    let e = med[&(Algorithm::RoadExact, 300)];
    let i = med[&(Algorithm::RoadInexact, 300)];
    let f = med[&(Algorithm::RoadInexactFixed, 300)];
    outcome(
        e < 1e-2 && i > 5e-3 && f > 5e-3,
        format!("N=300 medians: eADMM {e:.3e} (< 1e-2), iADMM {i:.3e}, fixed-rho iADMM {f:.3e} (both > 5e-3)"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut r = seeded(3);
    let mut worst = f64::NEG_INFINITY;
    let mut steps = 0;
    for inst in 0..20 {
        let m = r.random_range(2..=8);
        let n = r.random_range(2..=8);
        let k = r.random_range(1..=4);
        let y = randn(&mut r, m, n);
        let betas = [0.0; 3].map(|_| r.random_range(0.5..5.0));
        let rhos = betas.map(|b| b + 2.0 + r.random_range(0.1..5.0));
        let mut cfg = AdmmConfig::inexact(k, rhos, betas).unwrap();
        cfg.max_iter = 300;
        cfg.tol_primal = f64::MIN_POSITIVE;
        cfg.tol_dual = f64::MIN_POSITIVE;
        cfg.seed = inst;
        let mut prev = eval_lagrangian(&init_state(&y, &cfg).unwrap(), &y, &cfg).unwrap();
        let (_, report) = run(&y, &cfg).unwrap();
        for l in report.lagrangian_history {
            worst = worst.max(l - prev);
            prev = l;
            steps += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 60.0,
        format!("20 instances, {steps} steps, largest increase {worst:.2e} (<= 1e-9), limit 60 s"),
    )
}

fn criterion_4() -> Outcome {
    let mut converged = 0;
    let mut runs = 0;
    let mut worst = 0.0_f64;
    let mut bad = 0;
    let mut check = |y: &Mat, cfg: &AdmmConfig| {
        let (_, rep) = run(y, cfg).unwrap();
        runs += 1;
        if !rep.converged {
            return;
        }
        converged += 1;
        let i = rep.iterations - 1;
        let (p, d) = (rep.primal_residual_history[i], rep.dual_residual_history[i]);
        worst = worst.max(p).max(d);
        if p > 1e-6 || d > 1e-6 || p > cfg.tol_primal || d > cfg.tol_dual {
            bad += 1;
        }
    };
    for seed in 0..10u64 {
        let gt = gen_ground_truth(6, 3, 30, SparsityModel::Fixed(1), seed).unwrap();
        let mut exact = AdmmConfig::exact(3, 10.0).unwrap();
        exact.max_iter = 3000;
        exact.seed = seed;
        check(&gt.y_observed, &exact);
        let mut inexact = AdmmConfig::inexact(3, [4.0; 3], [1.0; 3]).unwrap();
        inexact.max_iter = 3000;
        inexact.seed = seed;
        check(&gt.y_observed, &inexact);
    }
    outcome(
        converged > 0 && bad == 0,
        format!("{converged}/{runs} runs converged; worst final normalized residual {worst:.2e} (<= 1e-6)"),
    )
}

fn criterion_5() -> Outcome {
    let mut r = seeded(5);
    let mut trivial_gap = 0.0_f64;
    let mut best_beat = f64::NEG_INFINITY;
    for _ in 0..100 {
        let m = r.random_range(1..=8);
        let n = r.random_range(1..=8);
        let k = r.random_range(1..=4);
        let mu = r.random_range(0.1..2.0);
        let f = |z: &Mat| l21_norm(z) + mu * nuclear_norm(z).unwrap();
        let y = randn(&mut r, m, n);
        let fy = f(&y);
        let mut a: Vec<f64> = (0..k).map(|_| r.random::<f64>()).collect();
        let s: f64 = a.iter().sum();
        a.iter_mut().for_each(|v| *v /= s);
        let trivial: f64 = a.iter().map(|ak| f(&y.scaled(*ak))).sum();
        trivial_gap = trivial_gap.max((trivial - fy).abs());
        for _ in 0..100 {
            let mut rest = y.clone();
            let mut total = 0.0;
            for _ in 1..k {
                let z = randn(&mut r, m, n);
                rest.add_scaled(-1.0, &z);
                total += f(&z);
            }
            total += f(&rest);
            best_beat = best_beat.max(fy - total);
        }
    }
    outcome(
        trivial_gap <= 1e-9 && best_beat <= 1e-9,
        format!("100 instances: trivial split gap {trivial_gap:.1e}, best random improvement {best_beat:.2e} (both <= 1e-9)"),
    )
}

/// Dense normal-equation solve with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn x3_oracle(b1: &[Mat], b2: &[Mat], b3: &Mat, rho: [f64; 3]) -> Vec<Mat> {
    let (m, n) = b3.shape();
    let e = m * n;
    let k = b1.len();
    // Least-squares rows: √ρ₁(Xₖ − b1ₖ), √ρ₂(Xₖ − b2ₖ), √ρ₃(ΣXₖ − b3).
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for kk in 0..k {
        for i in 0..e {
            for (w, b) in [(rho[0], &b1[kk]), (rho[1], &b2[kk])] {
                let mut row = vec![0.0; k * e];
                row[kk * e + i] = w.sqrt();
                rows.push((row, w.sqrt() * b.as_slice()[i]));
            }
        }
    }
    for i in 0..e {
        let mut row = vec![0.0; k * e];
        for kk in 0..k {
            row[kk * e + i] = rho[2].sqrt();
        }
        rows.push((row, rho[2].sqrt() * b3.as_slice()[i]));
    }
    let dim = k * e;
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for (row, rhs) in &rows {
        for i in 0..dim {
            atb[i] += row[i] * rhs;
            for j in 0..dim {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let x = gauss_solve(ata, atb);
    (0..k)
        .map(|kk| Mat::from_col_major(m, n, x[kk * e..(kk + 1) * e].to_vec()).unwrap())
        .collect()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut r = seeded(6);
    let mut errs = [0.0_f64; 5];
    for _ in 0..50 {
        let m = r.random_range(1..=5);
        let n = r.random_range(1..=5);

        // Group soft threshold: the minimizer lies on the ray through each column.
        let a = randn(&mut r, m, n);
        let t = r.random_range(0.0..2.5);
        let got = group_soft_threshold(&a, t);
        for j in 0..n {
            let na: f64 = a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            let c = argmin_convex(|c| t * na - (1.0 - c) * na * na, 0.0, 1.0);
            for i in 0..m {
                errs[0] = errs[0].max((got.get(i, j) - c * a.get(i, j)).abs());
            }
        }

        // Rank-one projection against alternating least squares.
        let a = randn(&mut r, m.max(2), n.max(2));
        let got = rank_one_project(&a).unwrap();
        let mut u: Vec<f64> = (0..a.rows()).map(|_| standard_normal(&mut r)).collect();
        let mut v = vec![0.0; a.cols()];
        for _ in 0..5000 {
            let uu: f64 = u.iter().map(|x| x * x).sum();
            for j in 0..a.cols() {
                v[j] = (0..a.rows()).map(|i| a.get(i, j) * u[i]).sum::<f64>() / uu;
            }
            let vv: f64 = v.iter().map(|x| x * x).sum();
            for i in 0..a.rows() {
                u[i] = (0..a.cols()).map(|j| a.get(i, j) * v[j]).sum::<f64>() / vv;
            }
        }
        let als = Mat::from_fn(a.rows(), a.cols(), |i, j| u[i] * v[j]);
        errs[1] = errs[1].max((&got - &als).max_abs() / frob_norm(&a));

        // X₃ solve against the dense least-squares system.
        let k = r.random_range(1..=3);
        let (mm, nn) = (m.min(3), n.min(3));
        let b1: Vec<Mat> = (0..k).map(|_| randn(&mut r, mm, nn)).collect();
        let b2: Vec<Mat> = (0..k).map(|_| randn(&mut r, mm, nn)).collect();
        let b3 = randn(&mut r, mm, nn);
        let rho = [0.0; 3].map(|_| r.random_range(0.5..3.0));
        let got = solve_x3(&b1, &b2, &b3, rho[0], rho[1], rho[2]).unwrap();
        for (g, o) in got.iter().zip(x3_oracle(&b1, &b2, &b3, rho)) {
            errs[2] = errs[2].max((g - &o).max_abs());
        }

        // Slack shrinkages: each Z entry minimizes β/2·z² + ρ/2·(a − z)².
        let y = randn(&mut r, m, n);
        let betas = [0.0; 3].map(|_| r.random_range(0.5..5.0));
        let rhos = betas.map(|b| b + 2.0 + r.random_range(0.1..5.0));
        let kk = r.random_range(1..=3);
        let cfg = AdmmConfig::inexact(kk, rhos, betas).unwrap();
        let mut prev = init_state(&y, &cfg).unwrap();
        for _ in 0..3 {
            prev = step_inexact(&prev, &y, &cfg).unwrap();
        }
        let next = step_inexact(&prev, &y, &cfg).unwrap();
        let shrink_err = |a: &Mat, z: &Mat, beta: f64, rho: f64| -> f64 {
            a.as_slice()
                .iter()
                .zip(z.as_slice())
                .map(|(&av, &zv)| {
                    let lim = av.abs() + 1.0;
                    let o = argmin_convex(|z| beta * z - rho * (av - z), -lim, lim);
                    (o - zv).abs()
                })
                .fold(0.0, f64::max)
        };
        for i in 0..kk {
            let a1 = &(&next.x1[i] - &next.x3[i]) + &prev.lam1[i];
            let a2 = &(&next.x2[i] - &next.x3[i]) + &prev.lam2[i];
            errs[3] = errs[3].max(shrink_err(&a1, &next.z1[i], betas[0], rhos[0]));
            errs[3] = errs[3].max(shrink_err(&a2, &next.z2[i], betas[1], rhos[1]));
        }
        let a3 = &(&y - &next.x3_sum()) + &prev.lam3;
        errs[3] = errs[3].max(shrink_err(&a3, &next.z3, betas[2], rhos[2]));

        // Ball projection against bisection on the KKT multiplier.
        let w_hat = randn(&mut r, m, n);
        let dist = frob_norm(&(&w_hat - &y));
        let eps = dist * r.random_range(0.2..1.5);
        let got = project_to_ball(&w_hat, &y, eps);
        let oracle = if dist <= eps {
            w_hat.clone()
        } else {
            let at = |mu: f64| (&w_hat + &y.scaled(mu)).scaled(1.0 / (1.0 + mu));
            let (mut lo, mut hi) = (0.0, 1.0);
            while frob_norm(&(&at(hi) - &y)) > eps {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if frob_norm(&(&at(mid) - &y)) > eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(hi)
        };
        errs[4] = errs[4].max((&got - &oracle).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let tol = [1e-6, 1e-8, 1e-10, 1e-8, 1e-10];
    let pass = errs.iter().zip(tol).all(|(e, t)| *e <= t) && secs < 120.0;
    outcome(
        pass,
        format!(
            "50 instances each, max deviations: group soft threshold {:.1e} (1e-6), rank-one {:.1e} (1e-8), X3 solve {:.1e} (1e-10), shrinkage {:.1e} (1e-8), ball {:.1e} (1e-10), limit 120 s",
            errs[0], errs[1], errs[2], errs[3], errs[4]
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = grid_spec(
        vec![400],
        None,
        &[(Algorithm::RoadExact, 300), (Algorithm::KsvdOmp, 300), (Algorithm::ModOmp, 300)],
    );
    let med = grid_medians(&spec);
    let road = med[&(Algorithm::RoadExact, 400)];
    let ksvd = med[&(Algorithm::KsvdOmp, 400)];
    let mod_ = med[&(Algorithm::ModOmp, 400)];
    outcome(
        road < 1e-2 && ksvd > 1e-3 && mod_ > 1e-3,
        format!("N=400 medians: eADMM {road:.3e} (< 1e-2), K-SVD+OMP {ksvd:.3e}, MOD+OMP {mod_:.3e} (both > 1e-3)"),
    )
}

fn criterion_8() -> Outcome {
    let spec = grid_spec(
        vec![100, 400],
        Some(20.0),
        &[(Algorithm::RoadExactNoisy, 300), (Algorithm::KsvdOmp, 300)],
    );
    let med = grid_medians(&spec);
    let r100 = med[&(Algorithm::RoadExactNoisy, 100)];
    let r400 = med[&(Algorithm::RoadExactNoisy, 400)];
    let k400 = med[&(Algorithm::KsvdOmp, 400)];
    outcome(
        r400 < r100 && r400 < k400,
        format!("SNR 20 dB medians: noisy eADMM N=100 {r100:.3e} > N=400 {r400:.3e} < K-SVD+OMP N=400 {k400:.3e}"),
    )
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sr")
}

fn criterion_9() -> Outcome {
    let load = |seed: u64, side: &str| read_pgm(fixtures().join(format!("scene{seed}_{side}.pgm"))).unwrap();
    let lows: Vec<_> = (1..=4).map(|s| load(s, "low")).collect();
    let highs: Vec<_> = (1..=4).map(|s| load(s, "high")).collect();
    let mut cfg = SrConfig::zeyde(64);
    cfg.pca_dim = Some(34);
    cfg.params.max_iter = Some(100);
    let model = train_sr(&lows, &highs, &cfg).unwrap().model;
    let mut gains = Vec::new();
    for seed in [100, 101, 102] {
        let (low, high) = (load(seed, "low"), load(seed, "high"));
        let sr = apply_sr(&model, &low, SrCoder::default()).unwrap();
        let bic = resize_to(&low, high.width(), high.height()).unwrap().clamped();
        gains.push((seed, psnr(&high, &sr).unwrap(), psnr(&high, &bic).unwrap()));
    }
    let pass = gains.iter().all(|(_, s, b)| s > b);
    let detail = gains
        .iter()
        .map(|(seed, s, b)| format!("scene{seed} {s:.2} vs bicubic {b:.2} dB"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("Zeyde/ROAD held-out PSNR: {detail}"))
}

fn road(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_road"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
    }
    out
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let p = |s: &str| t.join(s).to_str().unwrap().to_string();
    let fx = |seed: u64, side: &str| {
        fixtures().join(format!("scene{seed}_{side}.pgm")).to_str().unwrap().to_string()
    };
    if !road(&["synth", "--m", "8", "--k", "12", "--n", "60", "--s", "2", "--snr-db", "25", "--seed", "4", "--out", &p("input")]) {
        return outcome(false, "synth failed".into());
    }
    let y = p("input/y_observed.roadmat");
    let lows = format!("{},{}", fx(1, "low"), fx(2, "low"));
    let highs = format!("{},{}", fx(1, "high"), fx(2, "high"));
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("synth", "synth --m 8 --k 12 --n 60 --s 2 --snr-db 25 --seed 4".split(' ').map(String::from).collect()),
        ("train road-exact", vec!["train".into(), "--y".into(), y.clone(), "--k".into(), "12".into(), "--max-iter".into(), "50".into(), "--seed".into(), "2".into()]),
        ("train ksvd-lasso", vec!["train".into(), "--y".into(), y.clone(), "--k".into(), "12".into(), "--algorithm".into(), "ksvd-lasso".into(), "--max-iter".into(), "5".into(), "--format".into(), "csv".into()]),
        ("bench", "bench --preset smoke --seed 9".split(' ').map(String::from).collect()),
        ("sr-train", vec!["sr-train".into(), "--low".into(), lows, "--high".into(), highs, "--k".into(), "24".into(), "--pca-dim".into(), "16".into(), "--max-iter".into(), "20".into(), "--seed".into(), "1".into()]),
        ("sr-apply", vec!["sr-apply".into(), "--model".into(), p("sr-train-a"), "--input".into(), fx(100, "low")]),
        ("eval", vec!["eval".into(), fx(100, "high"), p("sr-apply-a/sr.pgm")]),
    ];
    let mut failed = Vec::new();
    for (name, args) in &commands {
        let tag = name.split(' ').collect::<Vec<_>>().join("-");
        let mut dirs = Vec::new();
        for rep in ["a", "b"] {
            let dir = p(&format!("{tag}-{rep}"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            full.extend(["--out", &dir]);
            if !road(&full) {
                failed.push(format!("{name} exited non-zero"));
            }
            dirs.push(dir);
        }
        let (a, b) = (dir_bytes(Path::new(&dirs[0])), dir_bytes(Path::new(&dirs[1])));
        if a.is_empty() || a != b {
            failed.push(format!("{name} outputs differ"));
        }
    }
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} commands rerun twice, all output files byte-identical", commands.len())
        } else {
            failed.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("noise-free recovery", criterion_1),
        ("solver-variant ordering", criterion_2),
        ("inexact Lagrangian descent", criterion_3),
        ("residual convergence", criterion_4),
        ("trivial split optimality", criterion_5),
        ("closed-form oracles", criterion_6),
        ("baseline error floor", criterion_7),
        ("noisy robustness trend", criterion_8),
        ("super-resolution gain", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {} [{:.1} s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        failures += usize::from(!o.pass);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
