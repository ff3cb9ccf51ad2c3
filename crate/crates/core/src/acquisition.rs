//! Pointwise utilities whose posterior expectation is the acquisition
//! function, shifted by `epsilon` so that they are strictly positive.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::data::{Dataset, Sense};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    ExpectedImprovement,
    ProbabilityOfImprovement,
}

/// Utility definition. `f_star` is stored on the objective's own scale; under
/// [`Sense::Minimize`] both the draw and the incumbent are negated before the
/// maximization formulas are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub f_star: f64,
    pub epsilon: f64,
    pub sense: Sense,
}

impl UtilitySpec {
    pub fn new(kind: UtilityKind, f_star: f64, epsilon: f64, sense: Sense) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !f_star.is_finite() {
            return Err(Error::NonFinite("incumbent".into()));
        }
        Ok(Self { kind, f_star, epsilon, sense })
    }

    pub fn expected_improvement(f_star: f64, sense: Sense) -> Self {
        Self { kind: UtilityKind::ExpectedImprovement, f_star, epsilon: DEFAULT_EPSILON, sense }
    }

    /// Incumbent on the maximization scale.
    #[inline]
    pub fn oriented_star(&self) -> f64 {
        self.sense.orient(self.f_star)
    }

    /// Utility of a draw that is already on the maximization scale.
    #[inline]
    pub fn oriented_utility(&self, f: f64) -> f64 {
        let star = self.oriented_star();
        match self.kind {
            UtilityKind::ExpectedImprovement => (f - star).max(0.0) + self.epsilon,
            UtilityKind::ProbabilityOfImprovement => {
                if f > star {
                    1.0 + self.epsilon
                } else {
                    self.epsilon
                }
            }
        }
    }

    pub fn utility(&self, f_draw: f64) -> Result<f64> {
        if !f_draw.is_finite() {
            return Err(Error::NonFinite(format!("predictive draw {f_draw}")));
        }
        Ok(self.oriented_utility(self.sense.orient(f_draw)))
    }

    /// `(1/H) sum_h log u(f_h)`.
    pub fn mean_log_utility(&self, f_draws: &[f64]) -> Result<f64> {
        if f_draws.is_empty() {
            return Err(Error::Config("mean log-utility needs at least one draw".into()));
        }
        let mut total = 0.0;
        for &f in f_draws {
            total += self.utility(f)?.ln();
        }
        Ok(total / f_draws.len() as f64)
    }

    /// Closed-form `E[u(f)]` for `f ~ Normal(mean, var)`.
    pub fn gaussian_expectation(&self, mean: f64, var: f64) -> f64 {
        let m = self.sense.orient(mean);
        let star = self.oriented_star();
        let sd = var.max(0.0).sqrt();
        if sd == 0.0 {
            return self.oriented_utility(m);
        }
        let z = (m - star) / sd;
        let std = Normal::standard();
        match self.kind {
            UtilityKind::ExpectedImprovement => {
                (m - star) * std.cdf(z) + sd * std.pdf(z) + self.epsilon
            }
            UtilityKind::ProbabilityOfImprovement => std.cdf(z) + self.epsilon,
        }
    }
}

/// Best observed response, used as the incumbent `f*`.
pub fn incumbent(data: &Dataset, sense: Sense) -> Result<f64> {
    data.best(sense).map(|(_, y)| y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;
    use crate::Prng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal as NormalDist};

    fn ei(f_star: f64) -> UtilitySpec {
        UtilitySpec::new(UtilityKind::ExpectedImprovement, f_star, 1e-8, Sense::Maximize).unwrap()
    }

    #[test]
    fn utility_examples() {
        assert_eq!(ei(3.0).utility(5.0).unwrap(), 2.0 + 1e-8);
        assert_eq!(ei(3.0).utility(1.0).unwrap(), 1e-8);
        let pi = UtilitySpec::new(UtilityKind::ProbabilityOfImprovement, 0.0, 1e-8, Sense::Maximize)
            .unwrap();
        assert_eq!(pi.utility(0.0).unwrap(), 1e-8);
        assert_eq!(pi.utility(0.1).unwrap(), 1.0 + 1e-8);
        assert!(ei(0.0).utility(f64::NAN).is_err());
        assert!(UtilitySpec::new(UtilityKind::ExpectedImprovement, 0.0, 0.0, Sense::Maximize)
            .is_err());
    }

    #[test]
    fn mean_log_utility_examples() {
        let spec = ei(3.0);
        assert_eq!(spec.mean_log_utility(&[0.0, 1.0, 2.9]).unwrap(), 1e-8f64.ln());
        // Utilities 1 and e once epsilon is negligible.
        let e = std::f64::consts::E;
        let v = spec.mean_log_utility(&[4.0, 3.0 + e]).unwrap();
        assert!((v - 0.5).abs() < 1e-7);
        assert_eq!(
            spec.mean_log_utility(&[7.0]).unwrap(),
            spec.utility(7.0).unwrap().ln()
        );
    }

    #[test]
    fn incumbent_examples() {
        let data = Dataset::from_pairs(
            [1.0, 4.0, 2.0].into_iter().map(|y| (Point::from_categories(&[0]), y)),
        );
        assert_eq!(incumbent(&data, Sense::Maximize).unwrap(), 4.0);
        assert_eq!(incumbent(&data, Sense::Minimize).unwrap(), 1.0);
        let one = Dataset::from_pairs([(Point::from_categories(&[0]), -2.5)]);
        assert_eq!(incumbent(&one, Sense::Maximize).unwrap(), -2.5);
        assert!(matches!(incumbent(&Dataset::new(), Sense::Maximize), Err(Error::EmptyDataset)));
    }

    #[test]
    fn utility_bounded_below_and_monotone() {
        let spec = ei(0.3);
        let mut prev = 0.0;
        for i in -100..100 {
            let u = spec.utility(i as f64 * 0.05).unwrap();
            assert!(u >= spec.epsilon);
            assert!(u >= prev);
            prev = u;
        }
    }

    #[test]
    fn sense_symmetry() {
        let ys = [1.5, -0.25, 3.0, 0.75];
        let min_star = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let neg_star = ys.iter().map(|y| -y).fold(f64::NEG_INFINITY, f64::max);
        for kind in [UtilityKind::ExpectedImprovement, UtilityKind::ProbabilityOfImprovement] {
            let min = UtilitySpec::new(kind, min_star, 1e-8, Sense::Minimize).unwrap();
            let max = UtilitySpec::new(kind, neg_star, 1e-8, Sense::Maximize).unwrap();
            for f in [-2.0, -0.25, 0.0, 0.5, 4.0] {
                assert_eq!(min.utility(f).unwrap(), max.utility(-f).unwrap());
            }
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form_ei() {
        let mut rng = Prng::seed_from_u64(9);
        for (mu, s, star) in [(0.0, 1.0, 0.5), (2.0, 0.5, 1.0), (-1.0, 2.0, 0.0)] {
            let spec = ei(star);
            let dist = NormalDist::new(mu, s).unwrap();
            let n = 1_000_000;
            let mc = (0..n).map(|_| spec.utility(dist.sample(&mut rng)).unwrap()).sum::<f64>()
                / n as f64;
            // Independent closed form for the Gaussian EI.
            let z: f64 = (mu - star) / s;
            let cdf = 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
            let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let exact = (mu - star) * cdf + s * pdf + 1e-8;
            assert!(((mc - exact) / exact).abs() < 0.01, "mc {mc} exact {exact}");
            assert!((spec.gaussian_expectation(mu, s * s) - exact).abs() < 1e-12);
        }
    }
}
