use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xcsf_gnmc::env::{Action, GridWorld, State};
use xcsf_gnmc::harness::csvio::{self, read_csv};
use xcsf_gnmc::harness::{
    default_groups, run_stg_groups, run_training_experiment, EnvVariant, ExperimentConfig,
};
use xcsf_gnmc::Error;

fn small(trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        env: EnvVariant::Deterministic,
        budget: Some(1000),
        trials,
        cadence: 250,
        seed: 3,
        ..Default::default()
    }
}

#[test]
fn single_trial_aggregate_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_training_experiment(&small(1), dir.path()).unwrap();
    assert_eq!(run.traces[0].len(), 4);
    let trace = read_csv(&dir.path().join("trace.csv"), &csvio::TRACE).unwrap();
    let agg = read_csv(&dir.path().join("aggregate.csv"), &csvio::AGGREGATE).unwrap();
    assert_eq!(trace.len(), agg.len());
    for (t, a) in trace.iter().zip(&agg) {
        assert_eq!(t[1], a[0]);
        assert_eq!(t[2], a[2]);
        assert_eq!(a[3], "0");
        assert_eq!(a[5], "0");
    }
    assert!(dir.path().join("pop-0.jsonl").exists());
    let echo = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(echo, small(1));
}

#[test]
fn trace_ends_at_budget_when_cadence_does_not_divide_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        cadence: 300,
        ..small(1)
    };
    let run = run_training_experiment(&cfg, dir.path()).unwrap();
    let steps: Vec<u64> = run.traces[0].iter().map(|p| p.step).collect();
    assert_eq!(steps, vec![300, 600, 900, 1000]);
}

#[test]
fn worker_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = run_training_experiment(&small(3), a.path()).unwrap();
    let three = run_training_experiment(&ExperimentConfig { workers: 3, ..small(3) }, b.path()).unwrap();
    assert_eq!(one.traces, three.traces);
    for f in ["trace.csv", "aggregate.csv", "pop-0.jsonl", "pop-2.jsonl"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    let err = run_training_experiment(&small(1), &file.join("sub")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
}

#[test]
fn invalid_hyperparameters_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(1);
    cfg.hyperparams.beta = 0.0;
    let err = run_training_experiment(&cfg, dir.path()).unwrap_err();
    assert!(err.to_string().contains("beta"), "{err}");
}

#[test]
fn empty_instance_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let w = GridWorld::deterministic();
    let rows = run_stg_groups(&[], &w, &default_groups(), 0, 10.0, 1, Some(dir.path())).unwrap();
    assert!(rows.is_empty());
    let text = std::fs::read_to_string(dir.path().join("stg.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(read_csv(&dir.path().join("stg.csv"), &csvio::STG).unwrap().is_empty());
}

#[test]
fn default_groups_are_none_fit_and_inv_fit_at_099() {
    let g = default_groups();
    assert_eq!(g.iter().map(|g| g.name.as_str()).collect::<Vec<_>>(), ["A", "B", "C"]);
    assert!(g[0].compaction.is_none());
    let b = g[1].compaction.unwrap();
    let c = g[2].compaction.unwrap();
    assert_eq!((b.mass.name(), b.rho()), ("fit", 0.99));
    assert_eq!((c.mass.name(), c.rho()), ("inv_fit", 0.99));
}

#[test]
fn sampled_step_frequencies_match_distribution() {
    let w = GridWorld::slippery();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (s, a) in [(State::new(0, 0), Action::Left), (State::new(3, 3), Action::Up), (State::new(6, 7), Action::Right)] {
        let n = 200_000;
        let mut counts: BTreeMap<State, u32> = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(w.step(s, a, &mut rng).unwrap().next_state).or_default() += 1;
        }
        for (t, p) in w.successor_distribution(s, a).unwrap() {
            let f = counts.get(&t).copied().unwrap_or(0) as f64 / n as f64;
            assert!((f - p).abs() < 0.01, "{s} {a:?} -> {t}: {f} vs {p}");
        }
    }
}
