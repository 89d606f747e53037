use road_core::bench::{preset, run_experiment, ExperimentSpec, RunOptions, PRESET_NAMES};
use road_core::kvconfig::KvConfig;
use road_core::learner::Algorithm;

#[test]
fn every_preset_validates_and_round_trips_through_kv() {
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        spec.validate().unwrap();
        let text = spec.to_kv().to_text();
        let back = ExperimentSpec::from_kv(&KvConfig::parse(&text).unwrap()).unwrap();
        assert_eq!(back.to_kv(), spec.to_kv(), "{name}");
    }
    assert!(preset("fig4").is_err());
}

#[test]
fn smoke_grid_is_complete_ordered_and_reproducible() {
    let spec = preset("smoke").unwrap();
    let a = run_experiment(&spec, RunOptions::default()).unwrap();
    let b = run_experiment(&spec, RunOptions::default()).unwrap();
    assert_eq!(a.trials_csv(), b.trials_csv());
    assert_eq!(a.means_csv(), b.means_csv());
    let cells = spec.algorithms.len() * spec.n_grid.len();
    assert_eq!(a.trials.len(), cells * spec.trials);
    assert_eq!(a.means.len(), cells);
    assert_eq!(a.failures().count(), 0);
    let pos = |alg| spec.algorithms.iter().position(|r| r.algorithm == alg).unwrap();
    let keys: Vec<_> = a.trials.iter().map(|t| (pos(t.algorithm), t.n, t.trial)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let m = a.mean_for(Algorithm::RoadExact, spec.n_grid[0]).unwrap();
    assert_eq!(m.completed, spec.trials);
}

#[test]
fn timing_only_touches_the_seconds_column() {
    let mut spec = preset("smoke").unwrap();
    spec.n_grid.truncate(1);
    spec.trials = 1;
    let plain = run_experiment(&spec, RunOptions::default()).unwrap();
    let timed = run_experiment(&spec, RunOptions { record_timing: true }).unwrap();
    assert_eq!(plain.means_csv(), timed.means_csv());
    assert!(timed.trials.iter().all(|t| t.seconds.is_some()));
    assert!(plain.trials.iter().all(|t| t.seconds.is_none()));
}
