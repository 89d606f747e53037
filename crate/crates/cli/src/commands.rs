use anyhow::{bail, Context, Result};
use road_core::bench::{gen_ground_truth, preset, recovery_error, run_experiment, ExperimentSpec, RunOptions, SparsityModel};
use road_core::kvconfig::KvConfig;
use road_core::learner::{learn, LearnerParams};
use road_core::matio::read_matrix;
use road_core::rng::derive_seed;
use road_core::superres::{
    apply_sr, psnr, read_pgm, resize_to, train_sr, SrCoder, SrConfig, SrModel,
};
use road_core::History;

use crate::output;
use crate::{BenchArgs, CoderArg, EvalArgs, ModeArg, SrApplyArgs, SrTrainArgs, SynthArgs, TrainArgs};

fn f(x: f64) -> String {
    format!("{x:?}")
}

fn fl(v: &[f64]) -> String {
    v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ")
}

fn params_kv(kv: &mut KvConfig, p: &LearnerParams) {
    kv.set("rho", f(p.rho));
    kv.set("rhos", fl(&p.rhos));
    kv.set("betas", fl(&p.betas));
    kv.set("rho_fixed", f(p.rho_fixed));
    kv.set("epsilon", p.epsilon.map(f).unwrap_or_else(|| "none".into()));
    kv.set("tol_primal", f(p.tol_primal));
    kv.set("tol_dual", f(p.tol_dual));
    kv.set("init_scale", f(p.init_scale));
    kv.set("force", p.allow_penalty_violation.to_string());
    kv.set("omp_s", p.omp_s.to_string());
    kv.set("lasso_lambda", f(p.lasso_lambda));
    kv.set("lasso_max_inner", p.lasso_max_inner.to_string());
    kv.set("lasso_tol", f(p.lasso_tol));
    kv.set("seed", p.seed.to_string());
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let sparsity = match (&a.s, &a.theta) {
        (Some(s), None) => SparsityModel::Fixed(*s),
        (None, Some(t)) => format!("bernoulli:{t}").parse()?,
        _ => bail!("give exactly one of --s or --theta"),
    };
    let seed = a.common.seed();
    let mut gt = gen_ground_truth(a.m, a.k, a.n, sparsity, seed)?;
    if let Some(snr) = a.snr_db {
        gt = gt.with_noise(snr, derive_seed(seed, &[b"noise"]))?;
    }
    output::out_dir(&a.out)?;
    for (stem, m) in [("d0", &gt.d0), ("x0", &gt.x0), ("y_clean", &gt.y_clean), ("y_observed", &gt.y_observed)] {
        output::matrix(&a.out, stem, a.format, m)?;
    }
    let mut kv = KvConfig::default();
    kv.set("command", "synth");
    kv.set("m", a.m.to_string());
    kv.set("k", a.k.to_string());
    kv.set("n", a.n.to_string());
    kv.set("sparsity", sparsity.to_string());
    kv.set("snr_db", a.snr_db.map(f).unwrap_or_else(|| "none".into()));
    kv.set("epsilon", f(gt.noise_norm));
    kv.set("seed", seed.to_string());
    kv.set("format", a.format.ext());
    output::manifest(&a.out, &kv)?;
    println!(
        "wrote {}×{} data ({sparsity}, epsilon = {}) to {}",
        a.m,
        a.n,
        f(gt.noise_norm),
        a.out.display()
    );
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let y = read_matrix(&a.y).with_context(|| format!("reading {}", a.y.display()))?;
    let params = a.learner.params(a.common.seed())?;
    let alg = a.algorithm;
    if alg.is_road() {
        for w in params.admm_config(alg, a.k)?.validate()? {
            eprintln!("warning: {w}");
        }
    }
    let model = learn(alg, &y, a.k, &params)?;

    output::out_dir(&a.out)?;
    output::matrix(&a.out, "dictionary", a.format, &model.dictionary)?;
    output::matrix(&a.out, "coefficients", a.format, &model.coefficients)?;
    output::text(&a.out.join("report.csv"), &model.history.to_csv())?;

    let mut kv = KvConfig::default();
    kv.set("command", "train");
    kv.set("y", a.y.display().to_string());
    kv.set("algorithm", alg.name());
    kv.set("k", a.k.to_string());
    kv.set("max_iter", params.max_iter.unwrap_or(alg.default_max_iter()).to_string());
    params_kv(&mut kv, &params);
    kv.set("format", a.format.ext());
    kv.set("dead_atoms", model.dead_atoms.len().to_string());
    match &model.history {
        History::Admm(r) => {
            let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
            let (p, d) = (last(&r.primal_residual_history), last(&r.dual_residual_history));
            println!(
                "{alg}: {} iterations, converged = {}, primal residual = {p:e}, dual residual = {d:e}",
                r.iterations, r.converged
            );
            kv.set("iterations", r.iterations.to_string());
            kv.set("converged", r.converged.to_string());
            kv.set("final_primal_residual", f(p));
            kv.set("final_dual_residual", f(d));
        }
        History::Alternating(obj) => {
            let last = obj.last().copied().unwrap_or(f64::NAN);
            println!("{alg}: {} rounds, final objective = {last:e}", obj.len());
            kv.set("iterations", obj.len().to_string());
            kv.set("final_objective", f(last));
        }
    }
    if let Some(path) = &a.d0 {
        let d0 = read_matrix(path).with_context(|| format!("reading {}", path.display()))?;
        let err = recovery_error(&model.dictionary, &d0)?;
        println!("recovery error = {err:e}");
        kv.set("d0", path.display().to_string());
        kv.set("recovery_error", f(err));
    }
    output::manifest(&a.out, &kv)
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let mut spec = match (&a.preset, &a.spec) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => {
            let kv = KvConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentSpec::from_kv(&kv)?
        }
        _ => bail!("give exactly one of --preset or --spec"),
    };
    if let Some(seed) = a.common.seed {
        spec.seed = seed;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    spec.validate()?;
    let result = run_experiment(&spec, RunOptions { record_timing: a.timing })?;

    output::out_dir(&a.out)?;
    output::text(&a.out.join("trials.csv"), &result.trials_csv())?;
    output::text(&a.out.join("means.csv"), &result.means_csv())?;
    let mut kv = spec.to_kv();
    kv.set("command", "bench");
    kv.set("timing", a.timing.to_string());
    output::manifest(&a.out, &kv)?;

    println!("{:<20} {:>6} {:>14} {:>6}", "algorithm", "N", "mean error", "failed");
    for m in &result.means {
        let err = m.mean_error.map(|e| format!("{e:.4e}")).unwrap_or_else(|| "-".into());
        println!("{:<20} {:>6} {:>14} {:>6}", m.algorithm.name(), m.n, err, m.failed);
    }
    for t in result.failures() {
        if let Err(e) = &t.error {
            eprintln!("warning: {} N={} trial {} failed: {e}", t.algorithm, t.n, t.trial);
        }
    }
    Ok(())
}

pub fn sr_train(a: &SrTrainArgs) -> Result<()> {
    if a.low.len() != a.high.len() {
        bail!("{} low images but {} high images", a.low.len(), a.high.len());
    }
    let read = |p: &std::path::PathBuf| read_pgm(p).with_context(|| format!("reading {}", p.display()));
    let lows = a.low.iter().map(read).collect::<Result<Vec<_>>>()?;
    let highs = a.high.iter().map(read).collect::<Result<Vec<_>>>()?;

    let mut cfg = match a.mode {
        ModeArg::Yang => SrConfig::yang(a.k),
        ModeArg::Zeyde => SrConfig::zeyde(a.k),
    };
    cfg.scale = a.scale;
    cfg.patch_size = a.patch_size.unwrap_or(cfg.patch_size);
    cfg.overlap = a.overlap.unwrap_or(cfg.overlap);
    if a.raw {
        cfg.use_features = false;
    }
    cfg.pca_dim = a.pca_dim;
    cfg.pca_variance = a.pca_variance.unwrap_or(cfg.pca_variance);
    cfg.learner = a.learner.algorithm();
    cfg.params = a.learner_args.params(a.common.seed())?;
    cfg.validate()?;

    let outcome = train_sr(&lows, &highs, &cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    output::out_dir(&a.out)?;
    outcome.model.save(&a.out)?;
    if SrModel::load(&a.out)? != outcome.model {
        bail!("model in {} did not round-trip", a.out.display());
    }
    output::text(&a.out.join("report.csv"), &outcome.learned.history.to_csv())?;

    let mut kv = KvConfig::default();
    kv.set("command", "sr-train");
    kv.set("mode", cfg.mode.to_string());
    kv.set("learner", cfg.learner.name());
    kv.set("k", cfg.k.to_string());
    kv.set("scale", cfg.scale.to_string());
    kv.set("patch_size", cfg.patch_size.to_string());
    kv.set("overlap", cfg.overlap.to_string());
    kv.set("use_features", cfg.use_features.to_string());
    kv.set("pca_dim", cfg.pca_dim.map(|d| d.to_string()).unwrap_or_else(|| "auto".into()));
    kv.set("pca_variance", f(cfg.pca_variance));
    kv.set("max_iter", cfg.params.max_iter.unwrap_or(cfg.learner.default_max_iter()).to_string());
    params_kv(&mut kv, &cfg.params);
    let list = |v: &[std::path::PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ");
    kv.set("low", list(&a.low));
    kv.set("high", list(&a.high));
    output::manifest(&a.out, &kv)?;
    println!(
        "trained {} model: {} atoms, {}-dimensional low features, {} training pairs",
        cfg.mode,
        outcome.model.k_atoms(),
        outcome.model.d_low.rows(),
        lows.len()
    );
    Ok(())
}

pub fn sr_apply(a: &SrApplyArgs) -> Result<()> {
    let model = SrModel::load(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let low = read_pgm(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let coder = match a.coder {
        CoderArg::Lasso => SrCoder::Lasso {
            lambda_rel: a.lambda_rel,
            max_inner: a.max_inner,
            tol: 1e-6,
        },
        CoderArg::Omp => SrCoder::Omp { s: a.omp_s },
    };
    let sr = apply_sr(&model, &low, coder)?;
    let bicubic = resize_to(&low, low.width() * model.scale, low.height() * model.scale)?.clamped();

    output::out_dir(&a.out)?;
    output::image(&a.out.join("sr.pgm"), &sr)?;
    output::image(&a.out.join("bicubic.pgm"), &bicubic)?;
    let mut kv = KvConfig::default();
    kv.set("command", "sr-apply");
    kv.set("model", a.model.display().to_string());
    kv.set("input", a.input.display().to_string());
    match coder {
        SrCoder::Lasso { lambda_rel, max_inner, tol } => {
            kv.set("coder", "lasso");
            kv.set("lambda_rel", f(lambda_rel));
            kv.set("max_inner", max_inner.to_string());
            kv.set("tol", f(tol));
        }
        SrCoder::Omp { s } => {
            kv.set("coder", "omp");
            kv.set("omp_s", s.to_string());
        }
    }
    kv.set("seed", a.common.seed().to_string());
    output::manifest(&a.out, &kv)?;
    println!("wrote {}×{} image to {}", sr.width(), sr.height(), a.out.join("sr.pgm").display());
    Ok(())
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let r = read_pgm(&a.reference).with_context(|| format!("reading {}", a.reference.display()))?;
    let i = read_pgm(&a.image).with_context(|| format!("reading {}", a.image.display()))?;
    let v = psnr(&r, &i)?;
    println!("psnr_db = {}", fmt_psnr(v));
    if let Some(dir) = &a.out {
        output::out_dir(dir)?;
        output::text(&dir.join("psnr.txt"), &format!("{}\n", fmt_psnr(v)))?;
        let mut kv = KvConfig::default();
        kv.set("command", "eval");
        kv.set("reference", a.reference.display().to_string());
        kv.set("image", a.image.display().to_string());
        kv.set("psnr_db", fmt_psnr(v));
        output::manifest(dir, &kv)?;
    }
    Ok(())
}
