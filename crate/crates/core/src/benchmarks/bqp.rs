use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::Objective;
use crate::data::Sense;
use crate::error::{Error, Result};
use crate::space::{Point, SpaceSpec};
use crate::Prng;

/// Largest dimension accepted by [`BqpInstance::global_optimum`].
pub const MAX_ENUMERATION_DIM: usize = 24;

/// Maximize `x'Qx - lambda * |x|_1` over `{0,1}^d`, with
/// `Q = G .* K`, `G` iid standard normal and `K_ij = exp(-(i-j)^2 / lc2)`.
#[derive(Debug, Clone, Serialize)]
pub struct BqpInstance {
    pub d: usize,
    pub lambda: f64,
    pub lc2: f64,
    pub seed: Option<u64>,
    /// Row-major `d x d`.
    pub q: Vec<f64>,
    #[serde(skip)]
    space: SpaceSpec,
}

impl BqpInstance {
    pub fn new(d: usize, lc2: f64, lambda: f64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("BQP dimension must be positive".into()));
        }
        if !(lc2 > 0.0) || !(lambda >= 0.0) {
            return Err(Error::Config(format!("need lc2 > 0 and lambda >= 0, got {lc2}, {lambda}")));
        }
        let mut rng = Prng::seed_from_u64(seed);
        let mut q = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let g: f64 = StandardNormal.sample(&mut rng);
                let diff = i as f64 - j as f64;
                q.push(g * (-(diff * diff) / lc2).exp());
            }
        }
        Ok(Self { d, lambda, lc2, seed: Some(seed), q, space: SpaceSpec::binary(d)? })
    }

    pub fn from_matrix(q: Vec<Vec<f64>>, lambda: f64) -> Result<Self> {
        let d = q.len();
        if d == 0 || q.iter().any(|row| row.len() != d) {
            return Err(Error::Config("Q must be a non-empty square matrix".into()));
        }
        Ok(Self {
            d,
            lambda,
            lc2: f64::NAN,
            seed: None,
            q: q.into_iter().flatten().collect(),
            space: SpaceSpec::binary(d)?,
        })
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.d + j]
    }

    fn value_of_bits(&self, x: &[bool]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.d {
            if !x[i] {
                continue;
            }
            total -= self.lambda;
            for j in 0..self.d {
                if x[j] {
                    total += self.q(i, j);
                }
            }
        }
        total
    }

    /// Exact maximizer by enumerating all `2^d` points in Gray-code order.
    pub fn global_optimum(&self) -> Result<(Point, f64)> {
        if self.d > MAX_ENUMERATION_DIM {
            return Err(Error::SpaceTooLarge(1u128 << self.d));
        }
        let d = self.d;
        let mut x = vec![false; d];
        let mut value = 0.0;
        let (mut best_code, mut best) = (0u64, 0.0);
        let mut code = 0u64;
        for step in 1..(1u64 << d) {
            let j = step.trailing_zeros() as usize;
            // Change in x'Qx - lambda|x| from toggling bit j.
            let mut cross = self.q(j, j);
            for i in 0..d {
                if i != j && x[i] {
                    cross += self.q(i, j) + self.q(j, i);
                }
            }
            if x[j] {
                value -= cross - self.lambda;
            } else {
                value += cross - self.lambda;
            }
            x[j] = !x[j];
            code ^= 1 << j;
            if value > best {
                best = value;
                best_code = code;
            }
        }
        let bits: Vec<bool> = (0..d).map(|i| best_code >> i & 1 == 1).collect();
        // Recompute directly so the reported value carries no drift.
        let best = self.value_of_bits(&bits);
        Ok((Point(bits.iter().map(|&b| b as u8 as f64).collect()), best))
    }
}

impl Objective for BqpInstance {
    fn space(&self) -> &SpaceSpec {
        &self.space
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        self.space.validate(x)?;
        let bits: Vec<bool> = x.values().iter().map(|&v| v == 1.0).collect();
        Ok(self.value_of_bits(&bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(d: usize, sign: f64) -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| if i == j { sign } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn identity_examples() {
        let inst = BqpInstance::from_matrix(identity(10, 1.0), 0.0).unwrap();
        assert_eq!(inst.evaluate(&Point(vec![1.0; 10])).unwrap(), 10.0);
        assert_eq!(inst.evaluate(&Point(vec![0.0; 10])).unwrap(), 0.0);
        let (x, v) = inst.global_optimum().unwrap();
        assert_eq!(x, Point(vec![1.0; 10]));
        assert_eq!(v, 10.0);
        let neg = BqpInstance::from_matrix(identity(10, -1.0), 0.0).unwrap();
        let (x, v) = neg.global_optimum().unwrap();
        assert_eq!(x, Point(vec![0.0; 10]));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn dominant_penalty_selects_empty_set() {
        for seed in 0..5 {
            let base = BqpInstance::new(8, 10.0, 0.0, seed).unwrap();
            let max_abs = base.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut inst = base.clone();
            inst.lambda = 8.0 * max_abs;
            let (x, v) = inst.global_optimum().unwrap();
            assert_eq!(x, Point(vec![0.0; 8]));
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn gray_code_enumeration_matches_naive() {
        for seed in 0..5 {
            let inst = BqpInstance::new(9, 10.0, 0.3, seed).unwrap();
            let (x, v) = inst.global_optimum().unwrap();
            let mut best = f64::NEG_INFINITY;
            for p in inst.space().enumerate().unwrap() {
                let y = inst.evaluate(&p).unwrap();
                assert!(y <= v + 1e-12);
                best = best.max(y);
            }
            assert!((best - v).abs() < 1e-12);
            assert_eq!(inst.evaluate(&x).unwrap(), v);
        }
    }

    #[test]
    fn instance_is_reproducible_and_tapered() {
        let a = BqpInstance::new(10, 10.0, 0.0, 42).unwrap();
        let b = BqpInstance::new(10, 10.0, 0.0, 42).unwrap();
        assert_eq!(a.q, b.q);
        assert_ne!(a.q, BqpInstance::new(10, 10.0, 0.0, 43).unwrap().q);
        // |i-j| = 9 gives K = exp(-8.1) ~ 3e-4.
        assert!(a.q(0, 9).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_inputs() {
        let inst = BqpInstance::new(4, 10.0, 0.0, 0).unwrap();
        assert!(inst.evaluate(&Point(vec![0.0; 3])).is_err());
        assert!(inst.evaluate(&Point(vec![0.0, 2.0, 0.0, 0.0])).is_err());
        let mut big = inst.clone();
        big.d = 25;
        assert!(matches!(big.global_optimum(), Err(Error::SpaceTooLarge(_))));
    }
}
