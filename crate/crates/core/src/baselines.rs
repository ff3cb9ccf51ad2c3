//! Simulated annealing and random local search. Each step spends exactly one
//! objective evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Objective;
use crate::error::{Error, Result};
use crate::space::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub t0: f64,
    pub gamma: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self { t0: 1.0, gamma: 0.99 }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "annealing needs t0 > 0 and gamma in (0, 1), got {} and {}",
                self.t0, self.gamma
            )));
        }
        Ok(())
    }

    /// `t0 * gamma^t`, floored at the smallest positive normal float.
    pub fn temperature(&self, t: usize) -> f64 {
        (self.t0 * self.gamma.powf(t as f64)).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RsConfig {
    pub q_restart: f64,
}

impl Default for RsConfig {
    fn default() -> Self {
        Self { q_restart: 0.1 }
    }
}

impl RsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q_restart) {
            return Err(Error::Config(format!("q_restart {} must be in [0, 1]", self.q_restart)));
        }
        Ok(())
    }
}

/// Outcome of one baseline step: the point that was evaluated and whether it
/// became the new state.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub evaluated: Point,
    pub y: f64,
    pub accepted: bool,
}

/// Proposes a uniform flip of `x`, evaluates it, and accepts improvements
/// always and a degradation `delta` with probability `exp(-delta / temp)`.
pub fn sa_step<O: Objective + ?Sized, R: Rng + ?Sized>(
    x: &Point,
    y_x: f64,
    temp: f64,
    objective: &O,
    rng: &mut R,
) -> Result<Step> {
    if !(temp > 0.0) {
        return Err(Error::Config(format!("temperature {temp} must be positive")));
    }
    let candidate = objective.space().propose_uniform_flip(x, rng);
    let y = objective.evaluate(&candidate)?;
    let sense = objective.sense();
    let delta = sense.orient(y_x) - sense.orient(y);
    let accepted = delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp();
    Ok(Step { evaluated: candidate, y, accepted })
}

/// With probability `q_restart` evaluates a uniform random point, otherwise a
/// neighbor of the incumbent differing in exactly one coordinate. `accepted`
/// marks a strict improvement of the incumbent.
pub fn random_local_search_step<O: Objective + ?Sized, R: Rng + ?Sized>(
    x_best: &Point,
    y_best: f64,
    q_restart: f64,
    objective: &O,
    rng: &mut R,
) -> Result<Step> {
    let space = objective.space();
    let candidate = if rng.random::<f64>() < q_restart {
        space.sample_uniform(rng)
    } else {
        space.propose_neighbor(x_best, rng)
    };
    let y = objective.evaluate(&candidate)?;
    let accepted = objective.sense().better(y, y_best);
    Ok(Step { evaluated: candidate, y, accepted })
}

/// Annealing chain state.
#[derive(Debug, Clone)]
pub struct Annealer {
    pub config: SaConfig,
    pub x: Point,
    pub y: f64,
    pub t: usize,
}

impl Annealer {
    pub fn new(config: SaConfig, x: Point, y: f64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, x, y, t: 0 })
    }

    pub fn step<O: Objective + ?Sized, R: Rng + ?Sized>(&mut self, objective: &O, rng: &mut R) -> Result<Step> {
        let step = sa_step(&self.x, self.y, self.config.temperature(self.t), objective, rng)?;
        self.t += 1;
        if step.accepted {
            self.x = step.evaluated.clone();
            self.y = step.y;
        }
        Ok(step)
    }
}

/// Random local search incumbent.
#[derive(Debug, Clone)]
pub struct LocalSearch {
    pub config: RsConfig,
    pub x_best: Point,
    pub y_best: f64,
}

impl LocalSearch {
    pub fn new(config: RsConfig, x_best: Point, y_best: f64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, x_best, y_best })
    }

    pub fn step<O: Objective + ?Sized, R: Rng + ?Sized>(&mut self, objective: &O, rng: &mut R) -> Result<Step> {
        let step = random_local_search_step(&self.x_best, self.y_best, self.config.q_restart, objective, rng)?;
        if step.accepted {
            self.x_best = step.evaluated.clone();
            self.y_best = step.y;
        }
        Ok(step)
    }
}
