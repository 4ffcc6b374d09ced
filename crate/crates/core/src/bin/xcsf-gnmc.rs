use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xcsf_gnmc::compaction::{gnmc_detailed, rho_grid, CompactionConfig, MassFunction};
use xcsf_gnmc::harness::{self, EnvVariant, ExperimentConfig, Instance};
use xcsf_gnmc::oracle::GroundTruth;
use xcsf_gnmc::xcsf::Hyperparams;
use xcsf_gnmc::{Error, Result};

#[derive(Parser)]
#[command(version, about = "XCSF on FrozenLake8x8 with Greedy Niche Mass Compaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the environment exactly and write Q* and the optimal advocacy policy
    Solve {
        #[arg(long, default_value = "det")]
        env: EnvVariant,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train independent XCSF instances
    Train(TrainArgs),
    /// Compact a single population file
    Compact {
        #[arg(long, default_value = "det")]
        env: EnvVariant,
        #[arg(long, default_value = "fit")]
        mass: MassFunction,
        #[arg(long, default_value_t = 0.99)]
        rho: f64,
        /// Input population (.jsonl)
        input: PathBuf,
        /// Output population (.jsonl)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Hyperparams::default().x0)]
        x0: f64,
    },
    /// Evaluate populations against the oracle (eval.csv)
    Evaluate(PopArgs),
    /// Steps-to-goal groups A (none), B (fit, 0.99), C (inv_fit, 0.99) (stg.csv)
    Rollout {
        #[command(flatten)]
        pops: PopArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compaction sweep over mass functions and a rho grid (sweep.csv, sweep_mean.csv)
    Sweep {
        #[command(flatten)]
        pops: PopArgs,
        /// Mass functions; all three when omitted
        #[arg(long, value_delimiter = ',')]
        mass: Vec<MassFunction>,
        /// Comma-separated rho values; 0, 0.01, ..., 0.99 when omitted
        #[arg(long, value_delimiter = ',')]
        rho_grid: Vec<f64>,
    },
    /// Per-state optimal-action frequency and action tallies (frequency.csv, action_dist.csv)
    Report(PopArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Flat TOML config; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<EnvVariant>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cadence: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PopArgs {
    #[arg(long, default_value = "det")]
    env: EnvVariant,
    /// Population files, or directories holding pop-<trial>.jsonl files
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = Hyperparams::default().x0)]
    x0: f64,
}

impl PopArgs {
    fn instances(&self) -> Result<Vec<Instance>> {
        let mut files = Vec::new();
        for input in &self.inputs {
            if input.is_dir() {
                files.extend(population_files(input)?);
            } else {
                files.push(input.clone());
            }
        }
        harness::load_instances(&files)
    }
}

/// `pop-<n>.jsonl` files in `dir`, ordered by `n`.
fn population_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(n) = name.strip_prefix("pop-").and_then(|r| r.strip_suffix(".jsonl")) {
            if let Ok(n) = n.parse::<u64>() {
                found.push((n, path));
            }
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { env, out } => {
            let world = env.world();
            let truth = GroundTruth::solve(&world)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let q_path = out.join("q_star.csv");
            let file = std::fs::File::create(&q_path).map_err(|e| Error::io(&q_path, e))?;
            truth.q_star.write_csv(std::io::BufWriter::new(file))?;
            let pi_path = out.join("pi_star.txt");
            let mut text = String::new();
            for (s, adv) in truth.pi_star.iter() {
                text.push_str(&format!("{s} {adv}\n"));
            }
            std::fs::write(&pi_path, text).map_err(|e| Error::io(&pi_path, e))?;
            let start = truth.q_star.max_value(xcsf_gnmc::rollout::ROLLOUT_START).unwrap_or(0.0);
            println!("V*(0, 0) = {start:.6}");
        }
        Command::Train(args) => {
            let mut cfg = match &args.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(env) = args.env {
                cfg.env = env;
            }
            if let Some(t) = args.trials {
                cfg.trials = t;
            }
            if args.budget.is_some() {
                cfg.budget = args.budget;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(c) = args.cadence {
                cfg.cadence = c;
            }
            if let Some(w) = args.workers {
                cfg.workers = w;
            }
            let run = harness::run_training_experiment(&cfg, &args.out)?;
            for (i, trace) in run.traces.iter().enumerate() {
                if let Some(p) = trace.last() {
                    println!(
                        "trial {i}: step {} mae {:.4} accuracy {:.4} macro {} micro {}",
                        p.step, p.mae, p.policy_accuracy, p.macro_count, p.micro_count
                    );
                }
            }
        }
        Command::Compact {
            env,
            mass,
            rho,
            input,
            out,
            x0,
        } => {
            let world = env.world();
            let inst = Instance::load(&input)?;
            let cfg = CompactionConfig::new(mass, rho)?;
            let result = gnmc_detailed(&inst.population, &world, &cfg).map_err(|e| e.with_context(&inst.name))?;
            result.population.save(&out)?;
            let before = harness::evaluate_instances(&world, std::slice::from_ref(&inst), x0, "before", None)?;
            let after_inst = Instance {
                name: inst.name.clone(),
                population: result.population,
            };
            let after = harness::evaluate_instances(&world, std::slice::from_ref(&after_inst), x0, "after", None)?;
            for (label, r) in [("before", &before[0]), ("after", &after[0])] {
                println!(
                    "{label}: mae {:.5} accuracy {:.4} macro {} micro {}",
                    r.mae, r.policy_accuracy, r.macro_count, r.micro_count
                );
            }
        }
        Command::Evaluate(pops) => {
            let instances = pops.instances()?;
            let reports = harness::evaluate_instances(&pops.env.world(), &instances, pops.x0, "final", Some(&pops.out))?;
            for (inst, r) in instances.iter().zip(&reports) {
                println!("{}: mae {:.5} accuracy {:.4} macro {}", inst.name, r.mae, r.policy_accuracy, r.macro_count);
            }
        }
        Command::Rollout { pops, seed } => {
            let instances = pops.instances()?;
            let rows = harness::run_stg_groups(
                &instances,
                &pops.env.world(),
                &harness::default_groups(),
                seed,
                pops.x0,
                pops.workers,
                Some(&pops.out),
            )?;
            for r in rows {
                println!(
                    "{} {}: mean_stg {} successes {}/{}",
                    r.instance,
                    r.group,
                    r.report.mean_stg.map_or("-".into(), |m| format!("{m:.2}")),
                    r.report.successes,
                    r.report.num_rollouts
                );
            }
        }
        Command::Sweep { pops, mass, rho_grid: rhos } => {
            let instances = pops.instances()?;
            let masses = if mass.is_empty() { MassFunction::ALL.to_vec() } else { mass };
            let rhos = if rhos.is_empty() { rho_grid() } else { rhos };
            let rows = harness::run_compaction_sweep(
                &instances,
                &pops.env.world(),
                &masses,
                &rhos,
                pops.x0,
                pops.workers,
                Some(&pops.out),
            )?;
            println!("{} sweep rows written to {}", rows.len(), pops.out.display());
        }
        Command::Report(pops) => {
            let instances = pops.instances()?;
            harness::write_state_report(&pops.env.world(), &instances, pops.x0, &pops.out)?;
            println!("report for {} instances written to {}", instances.len(), pops.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
