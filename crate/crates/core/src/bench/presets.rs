use crate::bench::data::SparsityModel;
use crate::bench::experiment::{AlgorithmRun, ExperimentSpec};
use crate::error::{Error, Result};
use crate::learner::{Algorithm, LearnerParams};

pub const PRESET_NAMES: [&str; 11] = [
    "fig1a",
    "fig1a-mini",
    "fig1b",
    "fig1c",
    "fig1d",
    "fig2-snr30",
    "fig2-snr20",
    "fig3-theta3",
    "fig3-theta6",
    "admm-compare",
    "smoke",
];

fn grid(lo: usize, hi: usize, step: usize) -> Vec<usize> {
    (lo..=hi).step_by(step).collect()
}

fn runs(list: &[(Algorithm, usize)]) -> Vec<AlgorithmRun> {
    list.iter().map(|&(a, it)| AlgorithmRun::new(a, it)).collect()
}

fn standard(exact: Algorithm) -> Vec<AlgorithmRun> {
    runs(&[(exact, 300), (Algorithm::KsvdOmp, 300), (Algorithm::ModOmp, 300)])
}

/// Named experiment configurations for the synthetic recovery study.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let base = |m, k, n_grid, s| ExperimentSpec {
        name: name.to_string(),
        m,
        k,
        n_grid,
        sparsity: SparsityModel::Fixed(s),
        snr_db: None,
        trials: 10,
        seed: 0,
        algorithms: standard(Algorithm::RoadExact),
        params: LearnerParams {
            omp_s: s,
            ..Default::default()
        },
    };
    let spec = match name {
        "fig1a" => base(16, 32, grid(100, 400, 50), 3),
        "fig1a-mini" => base(16, 32, vec![100, 200, 300, 400], 3),
        "fig1b" => base(24, 48, grid(200, 800, 100), 3),
        "fig1c" => base(24, 48, grid(300, 1200, 150), 6),
        "fig1d" => base(32, 64, grid(300, 1200, 150), 6),
        "fig2-snr30" | "fig2-snr20" => ExperimentSpec {
            snr_db: Some(if name.ends_with("30") { 30.0 } else { 20.0 }),
            algorithms: standard(Algorithm::RoadExactNoisy),
            ..base(16, 32, grid(100, 400, 50), 3)
        },
        "fig3-theta3" | "fig3-theta6" => {
            let s = if name.ends_with('3') { 3 } else { 6 };
            ExperimentSpec {
                sparsity: SparsityModel::Bernoulli(s as f64 / 48.0),
                ..base(24, 48, grid(200, 1200, 200), s)
            }
        }
        "admm-compare" => ExperimentSpec {
            algorithms: runs(&[
                (Algorithm::RoadExact, 300),
                (Algorithm::RoadInexact, 2000),
                (Algorithm::RoadInexactFixed, 2000),
            ]),
            ..base(16, 32, vec![300], 3)
        },
        "smoke" => ExperimentSpec {
            trials: 2,
            algorithms: runs(&[
                (Algorithm::RoadExact, 50),
                (Algorithm::KsvdOmp, 20),
                (Algorithm::ModOmp, 20),
            ]),
            ..base(8, 12, vec![60, 120], 2)
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}
