use rand::SeedableRng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::Objective;
use crate::data::Sense;
use crate::error::{Error, Result};
use crate::space::{Point, SpaceSpec};
use crate::Prng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContaminationConfig {
    pub stages: usize,
    /// Prevention cost per stage; a single value is broadcast.
    pub cost: f64,
    /// Contamination limit per stage.
    pub limit: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub n_scenarios: usize,
    pub reg_lambda: f64,
    /// Beta parameters of the initial fraction, contamination rates and
    /// restoration rates.
    pub initial_beta: (f64, f64),
    pub contamination_beta: (f64, f64),
    pub restoration_beta: (f64, f64),
    pub seed: u64,
}

impl Default for ContaminationConfig {
    fn default() -> Self {
        Self {
            stages: 25,
            cost: 1.0,
            limit: 0.1,
            epsilon: 0.05,
            rho: 1.0,
            n_scenarios: 100,
            reg_lambda: 1e-4,
            initial_beta: (1.0, 30.0),
            contamination_beta: (1.0, 17.0 / 3.0),
            restoration_beta: (1.0, 3.0 / 7.0),
            seed: 0,
        }
    }
}

/// Minimize prevention cost plus a Lagrangian penalty on the fraction of
/// scenarios whose contamination exceeds the limit, over `{0,1}^stages`.
#[derive(Debug, Clone)]
pub struct ContaminationInstance {
    config: ContaminationConfig,
    costs: Vec<f64>,
    /// Per scenario: initial fraction.
    initial: Vec<f64>,
    /// Per scenario, row-major by stage.
    contamination: Vec<f64>,
    restoration: Vec<f64>,
    space: SpaceSpec,
}

fn beta(params: (f64, f64)) -> Result<Beta<f64>> {
    Beta::new(params.0, params.1).map_err(|e| Error::Config(format!("beta{params:?}: {e}")))
}

impl ContaminationInstance {
    pub fn new(config: ContaminationConfig) -> Result<Self> {
        let (d, t) = (config.stages, config.n_scenarios);
        let mut rng = Prng::seed_from_u64(config.seed);
        let (z, l, g) = (
            beta(config.initial_beta)?,
            beta(config.contamination_beta)?,
            beta(config.restoration_beta)?,
        );
        let mut initial = Vec::with_capacity(t);
        let mut contamination = Vec::with_capacity(t * d);
        let mut restoration = Vec::with_capacity(t * d);
        for _ in 0..t {
            initial.push(z.sample(&mut rng));
            for _ in 0..d {
                contamination.push(l.sample(&mut rng));
                restoration.push(g.sample(&mut rng));
            }
        }
        Self::from_bundle(config, initial, contamination, restoration)
    }

    /// Instance with an explicit scenario bundle (`initial` has one entry per
    /// scenario; the rate vectors are scenario-major, `n_scenarios * stages`).
    pub fn from_bundle(
        config: ContaminationConfig,
        initial: Vec<f64>,
        contamination: Vec<f64>,
        restoration: Vec<f64>,
    ) -> Result<Self> {
        let (d, t) = (config.stages, config.n_scenarios);
        if d == 0 || t == 0 {
            return Err(Error::Config("need at least one stage and one scenario".into()));
        }
        if initial.len() != t || contamination.len() != t * d || restoration.len() != t * d {
            return Err(Error::Config("scenario bundle has the wrong shape".into()));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !(initial.iter().all(in_unit) && contamination.iter().all(in_unit) && restoration.iter().all(in_unit)) {
            return Err(Error::Config("all rates must lie in [0, 1]".into()));
        }
        Ok(Self {
            costs: vec![config.cost; d],
            space: SpaceSpec::binary(d)?,
            config,
            initial,
            contamination,
            restoration,
        })
    }

    pub fn config(&self) -> &ContaminationConfig {
        &self.config
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn scenario(&self, k: usize) -> (f64, &[f64], &[f64]) {
        let d = self.config.stages;
        (
            self.initial[k],
            &self.contamination[k * d..(k + 1) * d],
            &self.restoration[k * d..(k + 1) * d],
        )
    }
}

impl Objective for ContaminationInstance {
    fn space(&self) -> &SpaceSpec {
        &self.space
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        self.space.validate(x)?;
        let c = &self.config;
        let d = c.stages;
        let x: Vec<f64> = x.values().to_vec();
        let mut exceed = vec![0usize; d];
        for k in 0..c.n_scenarios {
            let (mut z, lam, gam) = self.scenario(k);
            for i in 0..d {
                z = lam[i] * (1.0 - x[i]) * (1.0 - z) + (1.0 - gam[i] * x[i]) * z;
                debug_assert!((0.0..=1.0).contains(&z), "contamination fraction {z} left [0, 1]");
                if z > c.limit {
                    exceed[i] += 1;
                }
            }
        }
        let mut total = 0.0;
        for i in 0..d {
            let frac = exceed[i] as f64 / c.n_scenarios as f64;
            total += self.costs[i] * x[i] + c.rho * (frac - (1.0 - c.epsilon));
        }
        Ok(total + c.reg_lambda * x.iter().sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_restoration_collapses_recursion() {
        let config = ContaminationConfig { n_scenarios: 10, ..Default::default() };
        let base = ContaminationInstance::new(config.clone()).unwrap();
        let inst = ContaminationInstance::from_bundle(
            config.clone(),
            base.initial.clone(),
            base.contamination.clone(),
            vec![1.0; 10 * 25],
        )
        .unwrap();
        let y = inst.evaluate(&Point(vec![1.0; 25])).unwrap();
        let expected = 25.0 + 25.0 * config.rho * -(1.0 - config.epsilon) + 25.0 * config.reg_lambda;
        assert!((y - expected).abs() < 1e-12, "{y} vs {expected}");
    }

    #[test]
    fn penalty_off_is_cost_plus_regularizer() {
        let inst = ContaminationInstance::new(ContaminationConfig { rho: 0.0, ..Default::default() }).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for ones in 0..=25 {
            let x = Point((0..25).map(|i| (i < ones) as u8 as f64).collect());
            let y = inst.evaluate(&x).unwrap();
            assert!((y - ones as f64 * (1.0 + 1e-4)).abs() < 1e-12);
            assert!(y > prev);
            prev = y;
        }
    }

    /// Independent evaluation: stage-by-stage over all scenarios at once.
    fn straight_line(inst: &ContaminationInstance, x: &[f64]) -> f64 {
        let c = inst.config();
        let mut z: Vec<f64> = (0..c.n_scenarios).map(|k| inst.scenario(k).0).collect();
        let mut total = 0.0;
        for i in 0..c.stages {
            let mut count = 0.0;
            for (k, zk) in z.iter_mut().enumerate() {
                let (_, lam, gam) = inst.scenario(k);
                let contaminated = lam[i] * (1.0 - x[i]) * (1.0 - *zk);
                let kept = (1.0 - gam[i] * x[i]) * *zk;
                *zk = contaminated + kept;
                if *zk > c.limit {
                    count += 1.0;
                }
            }
            total += inst.costs()[i] * x[i] + c.rho / c.n_scenarios as f64 * count - c.rho * (1.0 - c.epsilon);
            total += c.reg_lambda * x[i];
        }
        total
    }

    #[test]
    fn matches_straight_line_oracle() {
        let inst = ContaminationInstance::new(ContaminationConfig::default()).unwrap();
        for x in [vec![0.0; 25], vec![1.0; 25], (0..25).map(|i| (i % 3 == 0) as u8 as f64).collect()] {
            let a = inst.evaluate(&Point(x.clone())).unwrap();
            let b = straight_line(&inst, &x);
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = ContaminationInstance::new(ContaminationConfig { seed: 3, ..Default::default() }).unwrap();
        let b = ContaminationInstance::new(ContaminationConfig { seed: 3, ..Default::default() }).unwrap();
        let x = Point((0..25).map(|i| (i % 2) as f64).collect());
        assert_eq!(a.evaluate(&x).unwrap(), b.evaluate(&x).unwrap());
        assert!(a.scenario(0).1.iter().all(|r| *r > 0.0 && *r < 1.0));
    }

    #[test]
    fn rejects_malformed_bundles() {
        let config = ContaminationConfig { stages: 2, n_scenarios: 1, ..Default::default() };
        assert!(ContaminationInstance::from_bundle(config.clone(), vec![0.1], vec![0.1], vec![0.1, 0.1]).is_err());
        assert!(ContaminationInstance::from_bundle(config, vec![1.5], vec![0.1, 0.1], vec![0.1, 0.1]).is_err());
    }
}
