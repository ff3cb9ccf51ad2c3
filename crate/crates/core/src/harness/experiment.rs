use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::config::{BenchmarkId, ExperimentConfig, Method};
use super::trace::{write_rows, TimingRow, TraceRow};
use crate::acquisition::{incumbent, UtilitySpec};
use crate::baselines::{Annealer, LocalSearch};
use crate::benchmarks::{BqpInstance, ContaminationInstance, CountingObjective, Objective, RnaInstance};
use crate::data::{Dataset, Sense};
use crate::error::{Error, Result};
use crate::sampler::{run_sbbo, Diagnostics};
use crate::space::{Point, SpaceSpec};
use crate::surrogate::blr::{gibbs_fit, FeatureMap, HorseshoeState};
use crate::surrogate::TanimotoGp;
use crate::Prng;

/// Largest BQP dimension for which the optimum is enumerated into metadata.
const OPTIMUM_MAX_DIM: usize = 20;

/// Benchmark instance built from a config.
#[derive(Debug)]
pub enum Benchmark {
    Bqp(BqpInstance),
    Contamination(ContaminationInstance),
    Rna(RnaInstance),
}

impl Benchmark {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        Ok(match config.benchmark {
            BenchmarkId::Bqp => {
                let b = &config.bqp;
                Benchmark::Bqp(BqpInstance::new(b.d, b.lc2, b.lambda, b.seed)?)
            }
            BenchmarkId::Contamination => {
                Benchmark::Contamination(ContaminationInstance::new(config.contamination.clone())?)
            }
            BenchmarkId::Rna => Benchmark::Rna(RnaInstance::new(config.rna.p, config.rna.backend.clone())?),
        })
    }

    /// Enumerated optimum, when the instance is small enough to know it.
    pub fn known_optimum(&self) -> Result<Option<(Point, f64)>> {
        match self {
            Benchmark::Bqp(inst) if inst.d <= OPTIMUM_MAX_DIM => inst.global_optimum().map(Some),
            _ => Ok(None),
        }
    }
}

impl Objective for Benchmark {
    fn space(&self) -> &SpaceSpec {
        match self {
            Benchmark::Bqp(b) => b.space(),
            Benchmark::Contamination(b) => b.space(),
            Benchmark::Rna(b) => b.space(),
        }
    }

    fn sense(&self) -> Sense {
        match self {
            Benchmark::Bqp(b) => b.sense(),
            Benchmark::Contamination(b) => b.sense(),
            Benchmark::Rna(b) => b.sense(),
        }
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        match self {
            Benchmark::Bqp(b) => b.evaluate(x),
            Benchmark::Contamination(b) => b.evaluate(x),
            Benchmark::Rna(b) => b.evaluate(x),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RepResult {
    pub rows: Vec<TraceRow>,
    pub timing: Vec<TimingRow>,
}

struct Recorder {
    rep: usize,
    sense: Sense,
    data: Dataset,
    best: Option<f64>,
    out: RepResult,
}

impl Recorder {
    fn push(&mut self, x: Point, y: f64, diag: Option<&Diagnostics>, started: Instant) {
        let best = match self.best {
            Some(b) => self.sense.best(b, y),
            None => y,
        };
        self.best = Some(best);
        let t = self.data.len() + 1;
        self.out.rows.push(TraceRow {
            rep: self.rep,
            t,
            x: x.clone(),
            y,
            best_so_far: best,
            h_final: diag.map(|d| d.final_h),
            acceptance_rate: diag.map(|d| d.acceptance_rate),
        });
        self.out.timing.push(TimingRow { rep: self.rep, t, wall_ms: started.elapsed().as_secs_f64() * 1e3 });
        self.data.push(x, y);
    }
}

/// One repetition: `n_init` uniform points, then `budget` steps of the
/// configured method. Fails if the objective was not called exactly
/// `n_init + budget` times.
pub fn run_repetition<O: Objective>(config: &ExperimentConfig, objective: &O, rep: usize) -> Result<RepResult> {
    let mut rng = Prng::seed_from_u64(config.base_seed.wrapping_add(rep as u64));
    let counted = CountingObjective::new(objective);
    let space = counted.space().clone();
    let sense = counted.sense();
    let budget = config.budget();
    let mut rec = Recorder { rep, sense, data: Dataset::new(), best: None, out: RepResult::default() };

    for _ in 0..config.n_init {
        let started = Instant::now();
        let x = space.sample_uniform(&mut rng);
        let y = counted.evaluate(&x)?;
        rec.push(x, y, None, started);
    }

    match config.method {
        Method::SbboGp | Method::SbboBlr => {
            let gp_options = config.gp.options();
            let map = (config.method == Method::SbboBlr).then(|| FeatureMap::new(&space));
            let mut warm: Option<HorseshoeState> = None;
            for _ in 0..budget {
                let started = Instant::now();
                let f_star = incumbent(&rec.data, sense)?;
                let utility = UtilitySpec::new(config.utility.kind, f_star, config.utility.epsilon, sense)?;
                let outcome = match &map {
                    None => {
                        let gp = TanimotoGp::fit(&rec.data, &space, &gp_options)?;
                        run_sbbo(&gp, &space, &utility, &config.sbbo, &mut rng)?
                    }
                    Some(map) => {
                        let init = if config.blr.warm_start { warm.as_ref() } else { None };
                        let post = gibbs_fit(&rec.data, map, &config.blr.gibbs, init, &mut rng)?;
                        warm = Some(post.last_state().clone());
                        run_sbbo(&post, &space, &utility, &config.sbbo, &mut rng)?
                    }
                };
                let y = counted.evaluate(&outcome.x_next)?;
                rec.push(outcome.x_next, y, Some(&outcome.diagnostics), started);
            }
        }
        Method::Sa => {
            let (i, y0) = rec.data.best(sense)?;
            let mut sa = Annealer::new(config.sa, rec.data.xs()[i].clone(), y0)?;
            for _ in 0..budget {
                let started = Instant::now();
                let step = sa.step(&counted, &mut rng)?;
                rec.push(step.evaluated, step.y, None, started);
            }
        }
        Method::Rs => {
            let (i, y0) = rec.data.best(sense)?;
            let mut rs = LocalSearch::new(config.rs, rec.data.xs()[i].clone(), y0)?;
            for _ in 0..budget {
                let started = Instant::now();
                let step = rs.step(&counted, &mut rng)?;
                rec.push(step.evaluated, step.y, None, started);
            }
        }
    }

    let expected = config.n_init + budget;
    if counted.calls() != expected || rec.out.rows.len() != expected {
        return Err(Error::BudgetViolation { expected, got: counted.calls() });
    }
    Ok(rec.out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRep {
    pub rep: usize,
    pub error: String,
}

/// Instance constants that are not already part of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InstanceInfo {
    pub sense: Option<Sense>,
    pub known_optimum: Option<f64>,
    pub known_optimizer: Option<String>,
    pub bqp_q: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub seeds: Vec<u64>,
    pub completed_reps: Vec<usize>,
    pub failed_reps: Vec<FailedRep>,
    pub instance: InstanceInfo,
    pub config: ExperimentConfig,
}

impl Metadata {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<TraceRow>,
    pub timing: Vec<TimingRow>,
    pub metadata: Metadata,
}

pub fn instance_info(bench: &Benchmark) -> Result<InstanceInfo> {
    let optimum = bench.known_optimum()?;
    Ok(InstanceInfo {
        sense: Some(bench.sense()),
        known_optimum: optimum.as_ref().map(|o| o.1),
        known_optimizer: optimum.map(|o| o.0.to_string()),
        bqp_q: match bench {
            Benchmark::Bqp(b) => Some(b.q.chunks(b.d).map(<[f64]>::to_vec).collect()),
            _ => None,
        },
    })
}

/// Runs every repetition (concurrently when configured) and collects the
/// results in repetition order. Failed repetitions are listed in the metadata
/// and contribute no rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let bench = Benchmark::build(config)?;
    let outcomes = config
        .execution
        .map((0..config.n_reps).collect(), |rep| (rep, run_repetition(config, &bench, rep)));
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    let mut completed_reps = Vec::new();
    let mut failed_reps = Vec::new();
    for (rep, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                rows.extend(r.rows);
                timing.extend(r.timing);
                completed_reps.push(rep);
            }
            Err(e) => failed_reps.push(FailedRep { rep, error: e.to_string() }),
        }
    }
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds: (0..config.n_reps).map(|r| config.base_seed.wrapping_add(r as u64)).collect(),
        completed_reps,
        failed_reps,
        instance: instance_info(&bench)?,
        config: config.resolved(),
    };
    Ok(ExperimentResult { rows, timing, metadata })
}

/// Writes `trace.csv`, `timing.csv` and `metadata.toml` into `dir`.
pub fn write_experiment(dir: &Path, result: &ExperimentResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rows(&dir.join("trace.csv"), &result.rows)?;
    write_rows(&dir.join("timing.csv"), &result.timing)?;
    std::fs::write(dir.join("metadata.toml"), toml::to_string(&result.metadata)?)?;
    Ok(())
}
