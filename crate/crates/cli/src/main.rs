use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use sbbo::acquisition::{incumbent, UtilityKind, UtilitySpec};
use sbbo::benchmarks::{BqpInstance, Objective};
use sbbo::harness::experiment::write_experiment;
use sbbo::harness::trace::write_rows;
use sbbo::harness::{run_experiment, summarize_dir, ExperimentConfig};
use sbbo::sampler::stationary_check;
use sbbo::surrogate::{GpOptions, TanimotoGp};
use sbbo::{Dataset, Execution, Prng, Proposal, Sense, SpaceSpec};

#[derive(Parser)]
#[command(name = "sbbo", version, about = "Bayesian optimization experiments with simulated acquisition maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-evaluation mean and standard error of best-so-far values.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate a BQP instance and print its optimum.
    OracleBqp {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value_t = 10.0)]
        lc2: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Compare fixed-H chain visit frequencies with the exact target on a
    /// small binary space, using a GP fitted to random BQP data.
    StationaryCheck {
        #[arg(long, default_value_t = 3)]
        bits: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 1_000_000)]
        psi_draws: usize,
        #[arg(long, default_value_t = 6)]
        n_data: usize,
        /// Standard deviation of Gaussian noise added to the training responses.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = sbbo::acquisition::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Parallel)]
        execution: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sequential,
    Parallel,
}

impl From<Mode> for Execution {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sequential => Execution::Sequential,
            Mode::Parallel => Execution::Parallel,
        }
    }
}

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let mut config =
        ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(out) = out {
        config.output = out;
    }
    if config.output.as_os_str().is_empty() {
        bail!("no output directory: set `output` in the config or pass --out");
    }
    let result = run_experiment(&config)?;
    write_experiment(&config.output, &result)?;
    let meta = &result.metadata;
    println!(
        "{} on {:?}: {} reps completed, {} failed -> {}",
        config.method.name(),
        config.benchmark,
        meta.completed_reps.len(),
        meta.failed_reps.len(),
        config.output.display()
    );
    for f in &meta.failed_reps {
        eprintln!("rep {} failed: {}", f.rep, f.error);
    }
    Ok(())
}

struct CheckSetup {
    bits: usize,
    n_data: usize,
    noise_sd: f64,
    epsilon: f64,
    seed: u64,
}

fn stationary(setup: &CheckSetup, h: usize, steps: usize, psi_draws: usize, execution: Execution) -> Result<()> {
    let space = SpaceSpec::binary(setup.bits)?;
    let bqp = BqpInstance::new(setup.bits, 10.0, 0.0, setup.seed)?;
    let mut rng = Prng::seed_from_u64(setup.seed);
    let noise = Normal::new(0.0, setup.noise_sd)?;
    let mut data = Dataset::new();
    for _ in 0..setup.n_data {
        let x = space.sample_uniform(&mut rng);
        let y = bqp.evaluate(&x)? + noise.sample(&mut rng);
        data.push(x, y);
    }
    let gp = TanimotoGp::fit(&data, &space, &GpOptions::default())?;
    let f_star = incumbent(&data, Sense::Maximize)?;
    let utility = UtilitySpec::new(UtilityKind::ExpectedImprovement, f_star, setup.epsilon, Sense::Maximize)?;
    let seed = setup.seed;
    let report = stationary_check(&gp, &utility, &space, &Proposal::UniformFlip, h, steps, psi_draws, seed, execution)?;
    println!("index,point,mean,var,psi,target,empirical");
    for (i, x) in space.enumerate()?.iter().enumerate() {
        let (mean, var) = gp.posterior(x)?;
        println!(
            "{i},{x},{mean},{var},{},{},{}",
            report.psi[i], report.target[i], report.empirical[i]
        );
    }
    println!("incumbent {}, phi {}, noise {}", utility.f_star, gp.phi(), gp.noise_var());
    println!("tv = {:.5} (H = {h}, {steps} steps)", report.tv);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => run(config, out),
        Command::Summarize { input, out } => {
            let rows = summarize_dir(&input)?;
            write_rows(&out, &rows)?;
            if let Some(last) = rows.last() {
                println!(
                    "{} t={} mean={} se={} reps={} failed={}",
                    last.group, last.t, last.mean, last.se, last.n_reps, last.n_failed
                );
            }
            Ok(())
        }
        Command::OracleBqp { seed, d, lc2, lambda } => {
            let inst = BqpInstance::new(d, lc2, lambda, seed)?;
            let (x, value) = inst.global_optimum()?;
            println!("optimum {value}");
            println!("x {x}");
            Ok(())
        }
        Command::StationaryCheck { bits, h, steps, psi_draws, n_data, noise_sd, epsilon, seed, execution } => {
            let setup = CheckSetup { bits, n_data, noise_sd, epsilon, seed };
            stationary(&setup, h, steps, psi_draws, execution.into())
        }
    }
}
