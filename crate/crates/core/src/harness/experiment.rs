//! Multi-trial training, compaction sweeps, steps-to-goal groups and per-state reports.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csvio::{self, fmt_opt, mean_std, write_csv};
use super::seeds::{derive_seed, ROLLOUT_STREAM, TRAIN_STREAM};
use crate::compaction::{gnmc, CompactionConfig, MassFunction};
use crate::env::{Action, GridWorld};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport, LEARNED_TIE_TOL};
use crate::oracle::{greedy_advocacy, AdvocacyPolicy, GroundTruth};
use crate::rollout::{stg_test, StgConfig, StgReport};
use crate::xcsf::{train, InputSpace, Population, TraceMonitor, TracePoint};

/// A named population, e.g. one trained trial.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub population: Population,
}

impl Instance {
    pub fn load(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(Instance {
            name,
            population: Population::load(path)?,
        })
    }
}

pub fn load_instances(paths: &[PathBuf]) -> Result<Vec<Instance>> {
    paths.iter().map(|p| Instance::load(p)).collect()
}

pub fn population_file(trial: usize) -> String {
    format!("pop-{trial}.jsonl")
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub traces: Vec<Vec<TracePoint>>,
    pub instances: Vec<Instance>,
}

/// Trains `cfg.trials` independent instances and writes `config.toml`,
/// `trace.csv`, `aggregate.csv` and one `pop-<trial>.jsonl` per trial to `out`.
pub fn run_training_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<TrainingRun> {
    cfg.validate()?;
    ensure_dir(out)?;
    let world = cfg.env.world();
    let truth = GroundTruth::solve(&world)?;
    let budget = cfg.budget();
    let hp = &cfg.hyperparams;

    let outcomes = pool(cfg.workers).install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_seed(cfg.seed, TRAIN_STREAM, trial as u64);
                let monitor = TraceMonitor {
                    truth: &truth,
                    cadence: cfg.cadence,
                };
                train(&world, hp, budget, seed, Some(monitor))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let config_path = out.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(|e| Error::io(&config_path, e))?;

    let mut trace_rows = Vec::new();
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut instances = Vec::with_capacity(outcomes.len());
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        for p in &outcome.trace {
            trace_rows.push(vec![
                trial.to_string(),
                p.step.to_string(),
                p.mae.to_string(),
                p.policy_accuracy.to_string(),
                p.macro_count.to_string(),
                p.micro_count.to_string(),
                p.gaps.to_string(),
            ]);
        }
        outcome.population.save(&out.join(population_file(trial)))?;
        traces.push(outcome.trace);
        instances.push(Instance {
            name: format!("pop-{trial}"),
            population: outcome.population,
        });
    }
    write_csv(&out.join("trace.csv"), &csvio::TRACE, &trace_rows)?;
    write_csv(&out.join("aggregate.csv"), &csvio::AGGREGATE, &aggregate_rows(&traces))?;
    Ok(TrainingRun { traces, instances })
}

/// Mean and standard deviation per trace step across trials.
pub fn aggregate_rows(traces: &[Vec<TracePoint>]) -> Vec<Vec<String>> {
    let steps: Vec<u64> = traces.first().map(|t| t.iter().map(|p| p.step).collect()).unwrap_or_default();
    let mut rows = Vec::with_capacity(steps.len());
    for (k, step) in steps.iter().enumerate() {
        let points: Vec<&TracePoint> = traces.iter().filter_map(|t| t.get(k)).collect();
        let col = |f: &dyn Fn(&TracePoint) -> f64| mean_std(&points.iter().map(|p| f(p)).collect::<Vec<_>>());
        let (mae_m, mae_s) = col(&|p| p.mae);
        let (acc_m, acc_s) = col(&|p| p.policy_accuracy);
        let (mac_m, mac_s) = col(&|p| p.macro_count as f64);
        let (mic_m, mic_s) = col(&|p| p.micro_count as f64);
        rows.push(vec![
            step.to_string(),
            points.len().to_string(),
            mae_m.to_string(),
            mae_s.to_string(),
            acc_m.to_string(),
            acc_s.to_string(),
            mac_m.to_string(),
            mac_s.to_string(),
            mic_m.to_string(),
            mic_s.to_string(),
        ]);
    }
    rows
}

fn eval_instance(world: &GridWorld, truth: &GroundTruth, pop: &Population, x0: f64) -> Result<EvalReport> {
    let space = InputSpace::of_world(world);
    metrics::evaluate(world, truth, &pop.predictor(&space, x0), pop.macro_count(), pop.micro_count())
}

/// Strict evaluation of each instance; writes `eval.csv` when `out` is given.
pub fn evaluate_instances(
    world: &GridWorld,
    instances: &[Instance],
    x0: f64,
    stage: &str,
    out: Option<&Path>,
) -> Result<Vec<EvalReport>> {
    let truth = GroundTruth::solve(world)?;
    let reports = instances
        .iter()
        .map(|inst| eval_instance(world, &truth, &inst.population, x0).map_err(|e| e.with_context(&inst.name)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(out) = out {
        ensure_dir(out)?;
        let rows: Vec<Vec<String>> = instances
            .iter()
            .zip(&reports)
            .map(|(inst, r)| {
                vec![
                    inst.name.clone(),
                    stage.to_string(),
                    r.mae.to_string(),
                    r.policy_accuracy.to_string(),
                    r.macro_count.to_string(),
                    r.micro_count.to_string(),
                ]
            })
            .collect();
        write_csv(&out.join("eval.csv"), &csvio::EVAL, &rows)?;
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mass: MassFunction,
    pub rho: f64,
    pub instance: String,
    pub report: EvalReport,
}

/// Compacts every instance at every `(mass, rho)` and evaluates the result.
/// Writes `sweep.csv` (per instance) and `sweep_mean.csv` (per mass and rho).
pub fn run_compaction_sweep(
    instances: &[Instance],
    world: &GridWorld,
    masses: &[MassFunction],
    rhos: &[f64],
    x0: f64,
    workers: usize,
    out: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    let truth = GroundTruth::solve(world)?;
    let mut cells = Vec::new();
    for &mass in masses {
        for &rho in rhos {
            cells.push(CompactionConfig::new(mass, rho)?);
        }
    }
    let rows: Vec<SweepRow> = pool(workers).install(|| {
        cells
            .par_iter()
            .flat_map_iter(|cfg| instances.iter().map(move |inst| (cfg, inst)))
            .map(|(cfg, inst)| {
                let compacted = gnmc(&inst.population, world, cfg).map_err(|e| e.with_context(&inst.name))?;
                let report = eval_instance(world, &truth, &compacted, x0).map_err(|e| e.with_context(&inst.name))?;
                Ok(SweepRow {
                    mass: cfg.mass,
                    rho: cfg.rho(),
                    instance: inst.name.clone(),
                    report,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    if let Some(out) = out {
        ensure_dir(out)?;
        let per_instance: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.mass.to_string(),
                    r.rho.to_string(),
                    r.instance.clone(),
                    r.report.mae.to_string(),
                    r.report.policy_accuracy.to_string(),
                    r.report.macro_count.to_string(),
                    r.report.micro_count.to_string(),
                ]
            })
            .collect();
        write_csv(&out.join("sweep.csv"), &csvio::SWEEP, &per_instance)?;
        let mut means = Vec::new();
        for (cell, chunk) in cells.iter().zip(rows.chunks(instances.len().max(1))) {
            if instances.is_empty() {
                break;
            }
            let col = |f: &dyn Fn(&EvalReport) -> f64| mean_std(&chunk.iter().map(|r| f(&r.report)).collect::<Vec<_>>());
            let (a, b) = col(&|r| r.mae);
            let (c, d) = col(&|r| r.policy_accuracy);
            let (e, f) = col(&|r| r.macro_count as f64);
            let (g, h) = col(&|r| r.micro_count as f64);
            means.push(vec![
                cell.mass.to_string(),
                cell.rho().to_string(),
                chunk.len().to_string(),
                a.to_string(),
                b.to_string(),
                c.to_string(),
                d.to_string(),
                e.to_string(),
                f.to_string(),
                g.to_string(),
                h.to_string(),
            ]);
        }
        write_csv(&out.join("sweep_mean.csv"), &csvio::SWEEP_MEAN, &means)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StgGroup {
    pub name: String,
    pub compaction: Option<CompactionConfig>,
}

/// No compaction, `fit` at ρ = 0.99 and `inv_fit` at ρ = 0.99.
pub fn default_groups() -> Vec<StgGroup> {
    vec![
        StgGroup {
            name: "A".into(),
            compaction: None,
        },
        StgGroup {
            name: "B".into(),
            compaction: Some(CompactionConfig::new(MassFunction::Fit, 0.99).expect("valid rho")),
        },
        StgGroup {
            name: "C".into(),
            compaction: Some(CompactionConfig::new(MassFunction::InvFit, 0.99).expect("valid rho")),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StgRow {
    pub instance: String,
    pub group: String,
    pub report: StgReport,
    pub policy_accuracy: f64,
}

/// Steps-to-goal testing of every instance under every group. Instance `i`
/// uses rollout base seed `derive_seed(master_seed, ROLLOUT_STREAM, i)` in all groups.
pub fn run_stg_groups(
    instances: &[Instance],
    world: &GridWorld,
    groups: &[StgGroup],
    master_seed: u64,
    x0: f64,
    workers: usize,
    out: Option<&Path>,
) -> Result<Vec<StgRow>> {
    let truth = GroundTruth::solve(world)?;
    let space = InputSpace::of_world(world);
    let jobs: Vec<(usize, &Instance, &StgGroup)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, inst)| groups.iter().map(move |g| (i, inst, g)))
        .collect();
    let rows = pool(workers).install(|| {
        jobs.par_iter()
            .map(|&(i, inst, group)| {
                let compacted;
                let pop = match &group.compaction {
                    Some(cfg) => {
                        compacted = gnmc(&inst.population, world, cfg).map_err(|e| e.with_context(&inst.name))?;
                        &compacted
                    }
                    None => &inst.population,
                };
                let predictor = pop.predictor(&space, x0);
                let cfg = StgConfig {
                    base_seed: derive_seed(master_seed, ROLLOUT_STREAM, i as u64),
                    ..Default::default()
                };
                let report = stg_test(&predictor, world, &cfg).map_err(|e| e.with_context(&inst.name))?;
                let pi_hat = greedy_advocacy(world, &predictor, LEARNED_TIE_TOL);
                Ok(StgRow {
                    instance: inst.name.clone(),
                    group: group.name.clone(),
                    report,
                    policy_accuracy: metrics::policy_accuracy(&truth.pi_star, &pi_hat),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    if let Some(out) = out {
        ensure_dir(out)?;
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r: &StgRow| {
                vec![
                    r.instance.clone(),
                    r.group.clone(),
                    fmt_opt(r.report.mean_stg),
                    fmt_opt(r.report.max_stg),
                    r.report.num_rollouts.to_string(),
                    r.report.successes.to_string(),
                    r.report.complete.to_string(),
                    r.policy_accuracy.to_string(),
                ]
            })
            .collect();
        write_csv(&out.join("stg.csv"), &csvio::STG, &csv_rows)?;
    }
    Ok(rows)
}

/// Per-state optimal-action frequency and advocated-action tallies across
/// instances. Writes `frequency.csv` and `action_dist.csv`.
pub fn write_state_report(world: &GridWorld, instances: &[Instance], x0: f64, out: &Path) -> Result<()> {
    if instances.is_empty() {
        return Err(Error::Precondition("state report needs at least one instance".into()));
    }
    let truth = GroundTruth::solve(world)?;
    let space = InputSpace::of_world(world);
    let policies: Vec<AdvocacyPolicy> = instances
        .iter()
        .map(|inst| greedy_advocacy(world, &inst.population.predictor(&space, x0), LEARNED_TIE_TOL))
        .collect();
    let correct: Vec<_> = policies
        .iter()
        .map(|pi| metrics::per_state_correctness(&truth.pi_star, pi))
        .collect();
    let freq = metrics::optimal_action_frequency(&correct);
    let dist = metrics::action_distribution(&policies);
    ensure_dir(out)?;
    let n = instances.len();
    let freq_rows: Vec<Vec<String>> = freq
        .iter()
        .map(|(s, f)| vec![s.x.to_string(), s.y.to_string(), f.to_string(), n.to_string()])
        .collect();
    write_csv(&out.join("frequency.csv"), &csvio::FREQUENCY, &freq_rows)?;
    let dist_rows: Vec<Vec<String>> = world
        .nonterminal_states()
        .iter()
        .map(|s| {
            let counts = dist.counts.get(s).copied().unwrap_or_default();
            let optimal: String = truth
                .pi_star
                .get(*s)
                .expect("non-terminal")
                .actions()
                .map(Action::short_name)
                .collect();
            let n_correct = correct.iter().filter(|c| c[s]).count();
            vec![
                s.x.to_string(),
                s.y.to_string(),
                counts[0].to_string(),
                counts[1].to_string(),
                counts[2].to_string(),
                counts[3].to_string(),
                optimal,
                n_correct.to_string(),
                n.to_string(),
                freq[s].to_string(),
            ]
        })
        .collect();
    write_csv(&out.join("action_dist.csv"), &csvio::ACTION_DIST, &dist_rows)?;
    Ok(())
}
