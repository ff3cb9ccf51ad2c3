//! Acquisition maximization by simulation.
//!
//! The chain state is `(x, v)` where `v` is the mean log-utility of `H`
//! predictive draws at `x`. Proposing fresh draws from the predictive itself
//! makes the predictive density cancel from the Metropolis-Hastings ratio,
//! leaving `exp(H (v_new - v)) * q-ratio`. At a fixed `H` the x-marginal of
//! the chain is proportional to `Psi(x)^H`, where `Psi` is the expected
//! utility; letting `H` grow concentrates it on the acquisition maximizer.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::acquisition::UtilitySpec;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::space::{Domain, Point, Proposal, SpaceSpec};
use crate::surrogate::PredictiveSampler;
use crate::Prng;

/// Number of predictive draws `H(t)` at MCMC iteration `t` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoolingSchedule {
    /// `start + step * t`.
    Linear { start: usize, step: usize },
    /// `1 + floor(scale * ln(1 + t))`.
    Logarithmic { scale: f64 },
}

impl Default for CoolingSchedule {
    fn default() -> Self {
        CoolingSchedule::Linear { start: 1, step: 250 }
    }
}

impl CoolingSchedule {
    pub fn constant(h: usize) -> Self {
        CoolingSchedule::Linear { start: h, step: 0 }
    }

    pub fn at(&self, t: usize) -> usize {
        match *self {
            CoolingSchedule::Linear { start, step } => start.max(1).saturating_add(step.saturating_mul(t)),
            CoolingSchedule::Logarithmic { scale } => {
                1 + (scale.max(0.0) * (1.0 + t as f64).ln()).floor() as usize
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CoolingSchedule::Linear { start, .. } if start == 0 => {
                Err(Error::Config("linear schedule must start at H >= 1".into()))
            }
            CoolingSchedule::Logarithmic { scale } if !(scale >= 0.0) => {
                Err(Error::Config(format!("logarithmic schedule scale {scale} must be >= 0")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    MetropolisHastings,
    GibbsWithin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbboConfig {
    pub n_mcmc_iters: usize,
    pub burn_in: usize,
    pub schedule: CoolingSchedule,
    pub variant: Variant,
    pub proposal: Proposal,
    /// Relative step of continuous coordinate moves in the Gibbs sweep.
    pub continuous_step: f64,
}

impl Default for SbboConfig {
    fn default() -> Self {
        Self {
            n_mcmc_iters: 500,
            burn_in: 250,
            schedule: CoolingSchedule::default(),
            variant: Variant::default(),
            proposal: Proposal::default(),
            continuous_step: 0.1,
        }
    }
}

impl SbboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_mcmc_iters {
            return Err(Error::Config(format!(
                "burn-in {} must be smaller than the number of MCMC iterations {}",
                self.burn_in, self.n_mcmc_iters
            )));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Point,
    pub v: f64,
}

impl ChainState {
    pub fn new<S: PredictiveSampler, R: Rng + ?Sized>(
        x: Point,
        h: usize,
        sampler: &S,
        utility: &UtilitySpec,
        rng: &mut R,
    ) -> Result<Self> {
        let v = sampler.mean_log_utility(&x, h.max(1), utility, rng)?;
        Ok(Self { x, v })
    }
}

#[inline]
fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp()
}

/// One Metropolis-Hastings transition at fixed `h`. On rejection the state,
/// including its cached `v`, is returned unchanged.
pub fn mh_step<S: PredictiveSampler, R: Rng + ?Sized>(
    state: &ChainState,
    h: usize,
    sampler: &S,
    utility: &UtilitySpec,
    space: &SpaceSpec,
    proposal: &Proposal,
    rng: &mut R,
) -> Result<(ChainState, bool)> {
    let h = h.max(1);
    let candidate = proposal.propose(space, &state.x, rng);
    let v_new = sampler.mean_log_utility(&candidate, h, utility, rng)?;
    let log_ratio =
        h as f64 * (v_new - state.v) + proposal.log_ratio(&state.x, &candidate);
    if accept(log_ratio, rng) {
        Ok((ChainState { x: candidate, v: v_new }, true))
    } else {
        Ok((state.clone(), false))
    }
}

/// One Metropolis-within-Gibbs sweep over the coordinates in order. Returns
/// the new state and the number of accepted coordinate moves.
pub fn gibbs_within_step<S: PredictiveSampler, R: Rng + ?Sized>(
    state: &ChainState,
    h: usize,
    sampler: &S,
    utility: &UtilitySpec,
    space: &SpaceSpec,
    continuous_step: f64,
    rng: &mut R,
) -> Result<(ChainState, usize)> {
    let h = h.max(1);
    let mut current = state.clone();
    let mut accepted = 0;
    for s in 0..space.len() {
        let candidate = space.propose_coordinate(&current.x, s, continuous_step, rng)?;
        let v_new = sampler.mean_log_utility(&candidate, h, utility, rng)?;
        if accept(h as f64 * (v_new - current.v), rng) {
            current = ChainState { x: candidate, v: v_new };
            accepted += 1;
        }
    }
    Ok((current, accepted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub acceptance_rate: f64,
    pub final_h: usize,
    /// `H` used by each transition.
    pub h_trajectory: Vec<usize>,
    /// Per categorical dimension, visit counts of each category among the
    /// retained states (empty for continuous dimensions).
    pub mode_counts: Vec<Vec<usize>>,
    pub retained: usize,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub initial: ChainState,
    /// State after each transition.
    pub states: Vec<ChainState>,
    pub h_trajectory: Vec<usize>,
    pub proposals: usize,
    pub accepted: usize,
}

/// Runs the inhomogeneous chain from a uniformly drawn start for
/// `n_mcmc_iters` transitions; transition `t` uses `H = schedule.at(t)`.
pub fn run_chain<S: PredictiveSampler, R: Rng + ?Sized>(
    sampler: &S,
    space: &SpaceSpec,
    utility: &UtilitySpec,
    config: &SbboConfig,
    rng: &mut R,
) -> Result<ChainRun> {
    config.validate()?;
    let x0 = space.sample_uniform(rng);
    let initial = ChainState::new(x0, config.schedule.at(0), sampler, utility, rng)?;
    let mut state = initial.clone();
    let mut states = Vec::with_capacity(config.n_mcmc_iters);
    let mut h_trajectory = Vec::with_capacity(config.n_mcmc_iters);
    let (mut proposals, mut accepted) = (0, 0);
    for t in 0..config.n_mcmc_iters {
        let h = config.schedule.at(t);
        h_trajectory.push(h);
        match config.variant {
            Variant::MetropolisHastings => {
                let (next, ok) =
                    mh_step(&state, h, sampler, utility, space, &config.proposal, rng)?;
                state = next;
                proposals += 1;
                accepted += ok as usize;
            }
            Variant::GibbsWithin => {
                let (next, ok) = gibbs_within_step(
                    &state,
                    h,
                    sampler,
                    utility,
                    space,
                    config.continuous_step,
                    rng,
                )?;
                state = next;
                proposals += space.len();
                accepted += ok;
            }
        }
        states.push(state.clone());
    }
    Ok(ChainRun { initial, states, h_trajectory, proposals, accepted })
}

/// Per-dimension mode of the given points (lowest category on ties); median
/// for continuous dimensions.
pub fn coordinate_mode(space: &SpaceSpec, points: &[&Point]) -> (Point, Vec<Vec<usize>>) {
    let mut values = Vec::with_capacity(space.len());
    let mut counts_out = Vec::with_capacity(space.len());
    for (s, dim) in space.dims().iter().enumerate() {
        match *dim {
            Domain::Categorical { k } => {
                let mut counts = vec![0usize; k];
                for p in points {
                    counts[p.category(s)] += 1;
                }
                let best = counts
                    .iter()
                    .enumerate()
                    .fold((0, 0), |acc, (c, &n)| if n > acc.1 { (c, n) } else { acc })
                    .0;
                values.push(best as f64);
                counts_out.push(counts);
            }
            Domain::Continuous { .. } => {
                let mut v: Vec<f64> = points.iter().map(|p| p.values()[s]).collect();
                v.sort_by(|a, b| a.total_cmp(b));
                let mid = v.len() / 2;
                let median =
                    if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) };
                values.push(median);
                counts_out.push(Vec::new());
            }
        }
    }
    (Point(values), counts_out)
}

#[derive(Debug, Clone)]
pub struct SbboOutcome {
    pub x_next: Point,
    pub diagnostics: Diagnostics,
}

/// Picks the next evaluation point: runs the chain, drops the first
/// `burn_in` states and returns the coordinate-wise mode of the rest.
pub fn run_sbbo<S: PredictiveSampler, R: Rng + ?Sized>(
    sampler: &S,
    space: &SpaceSpec,
    utility: &UtilitySpec,
    config: &SbboConfig,
    rng: &mut R,
) -> Result<SbboOutcome> {
    let run = run_chain(sampler, space, utility, config, rng)?;
    let retained: Vec<&Point> = run.states[config.burn_in..].iter().map(|s| &s.x).collect();
    let (x_next, mode_counts) = coordinate_mode(space, &retained);
    let diagnostics = Diagnostics {
        acceptance_rate: run.accepted as f64 / run.proposals.max(1) as f64,
        final_h: run.h_trajectory.last().copied().unwrap_or(1),
        h_trajectory: run.h_trajectory,
        mode_counts,
        retained: retained.len(),
    };
    Ok(SbboOutcome { x_next, diagnostics })
}

/// Largest space accepted by [`stationary_check`].
pub const STATIONARY_MAX_POINTS: u128 = 1 << 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryReport {
    pub h: usize,
    pub n_steps: usize,
    /// Monte Carlo estimate of the expected utility of every point.
    pub psi: Vec<f64>,
    /// Normalized `Psi^H`.
    pub target: Vec<f64>,
    pub empirical: Vec<f64>,
    pub tv: f64,
}

/// Runs Metropolis-Hastings at a fixed `h` and measures the total-variation
/// distance between visit frequencies and normalized `Psi(x)^h`, with `Psi`
/// estimated from `psi_draws` predictive draws per point.
#[allow(clippy::too_many_arguments)]
pub fn stationary_check<S: PredictiveSampler>(
    sampler: &S,
    utility: &UtilitySpec,
    space: &SpaceSpec,
    proposal: &Proposal,
    h: usize,
    n_steps: usize,
    psi_draws: usize,
    seed: u64,
    execution: Execution,
) -> Result<StationaryReport> {
    let size = space
        .size()
        .ok_or_else(|| Error::InvalidSpace("stationary check needs a categorical space".into()))?;
    if size > STATIONARY_MAX_POINTS {
        return Err(Error::SpaceTooLarge(size));
    }
    if h == 0 || n_steps == 0 || psi_draws == 0 {
        return Err(Error::Config("h, n_steps and psi_draws must be positive".into()));
    }
    let points = space.enumerate()?;
    let jobs: Vec<(usize, Point)> = points.into_iter().enumerate().collect();
    let psi = execution
        .map(jobs, |(i, x)| -> Result<f64> {
            let mut rng = Prng::seed_from_u64(seed ^ 0x5eed_0000_0000 ^ (i as u64 + 1));
            let mut total = 0.0;
            let mut remaining = psi_draws;
            while remaining > 0 {
                let batch = remaining.min(1 << 16);
                for f in sampler.sample_f(&x, batch, &mut rng)? {
                    total += utility.utility(f)?;
                }
                remaining -= batch;
            }
            Ok(total / psi_draws as f64)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let log_w: Vec<f64> = psi.iter().map(|p| h as f64 * p.ln()).collect();
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    let target: Vec<f64> = w.iter().map(|x| x / z).collect();

    let mut rng = Prng::seed_from_u64(seed);
    let mut state = ChainState::new(space.sample_uniform(&mut rng), h, sampler, utility, &mut rng)?;
    let mut visits = vec![0usize; target.len()];
    for _ in 0..n_steps {
        state = mh_step(&state, h, sampler, utility, space, proposal, &mut rng)?.0;
        visits[space.index_of(&state.x)?] += 1;
    }
    let empirical: Vec<f64> = visits.iter().map(|&c| c as f64 / n_steps as f64).collect();
    let tv = 0.5 * empirical.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(StationaryReport { h, n_steps, psi, target, empirical, tv })
}
