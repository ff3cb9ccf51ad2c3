//! How the acquisition value of the chain's state evolves as `H` grows, for
//! a GP fitted to a fixed contamination dataset.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{incumbent, UtilitySpec};
use crate::benchmarks::{ContaminationInstance, Objective};
use crate::data::Dataset;
use crate::error::Result;
use crate::par::Execution;
use crate::sampler::{run_chain, CoolingSchedule, SbboConfig};
use crate::surrogate::{GpOptions, TanimotoGp};
use crate::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub n_data: usize,
    pub n_reps: usize,
    pub h_start: usize,
    pub h_step: usize,
    pub h_end: usize,
    pub seed: u64,
}

impl Default for ConvergenceStudy {
    fn default() -> Self {
        Self { n_data: 100, n_reps: 40, h_start: 50, h_step: 10, h_end: 2500, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub hs: Vec<usize>,
    /// Expected utility of the chain state after the transition at each `H`,
    /// one vector per repetition.
    pub per_rep: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub spearman: f64,
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Fits a GP to `n_data` uniform contamination points, then runs `n_reps`
/// chains whose `H` rises from `h_start` to `h_end`, scoring each visited
/// state by its closed-form expected improvement.
pub fn convergence_study(
    study: &ConvergenceStudy,
    instance: &ContaminationInstance,
    gp_options: &GpOptions,
    execution: Execution,
) -> Result<ConvergenceResult> {
    let space = instance.space().clone();
    let sense = instance.sense();
    let mut rng = Prng::seed_from_u64(study.seed);
    let mut data = Dataset::new();
    for _ in 0..study.n_data {
        let x = space.sample_uniform(&mut rng);
        let y = instance.evaluate(&x)?;
        data.push(x, y);
    }
    let gp = TanimotoGp::fit(&data, &space, gp_options)?;
    let utility = UtilitySpec::expected_improvement(incumbent(&data, sense)?, sense);
    let n_steps = (study.h_end.saturating_sub(study.h_start)) / study.h_step.max(1) + 1;
    let config = SbboConfig {
        n_mcmc_iters: n_steps,
        burn_in: 0,
        schedule: CoolingSchedule::Linear { start: study.h_start, step: study.h_step },
        ..SbboConfig::default()
    };
    let hs: Vec<usize> = (0..n_steps).map(|t| config.schedule.at(t)).collect();
    let per_rep = execution
        .map((0..study.n_reps).collect(), |rep| -> Result<Vec<f64>> {
            let mut rng = Prng::seed_from_u64(study.seed.wrapping_add(1 + rep as u64));
            let run = run_chain(&gp, &space, &utility, &config, &mut rng)?;
            run.states
                .iter()
                .map(|s| gp.posterior(&s.x).map(|(m, v)| utility.gaussian_expectation(m, v)))
                .collect()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mean: Vec<f64> = (0..n_steps)
        .map(|i| per_rep.iter().map(|r| r[i]).sum::<f64>() / per_rep.len() as f64)
        .collect();
    let hs_f: Vec<f64> = hs.iter().map(|&h| h as f64).collect();
    let spearman = spearman(&hs_f, &mean);
    Ok(ConvergenceResult { hs, per_rep, mean, spearman })
}
