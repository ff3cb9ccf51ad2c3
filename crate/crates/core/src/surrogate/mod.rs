//! Bayesian surrogates exposing sampling-only access to the posterior
//! predictive of the latent objective.

pub mod blr;
pub mod gp;

use rand::Rng;

use crate::acquisition::UtilitySpec;
use crate::error::Result;
use crate::space::Point;

pub use blr::{BlrPosterior, FeatureMap, GibbsConfig, HorseshoeState};
pub use gp::{GpOptions, TanimotoGp};

/// Draws of the latent `f(x) | x, D`.
pub trait PredictiveSampler: Sync {
    fn sample_f<R: Rng + ?Sized>(&self, x: &Point, count: usize, rng: &mut R)
        -> Result<Vec<f64>>;

    /// Mean log-utility of `h` fresh predictive draws at `x`. Implementations
    /// may override this with any procedure that has the same distribution as
    /// drawing `h` values through [`PredictiveSampler::sample_f`].
    fn mean_log_utility<R: Rng + ?Sized>(
        &self,
        x: &Point,
        h: usize,
        utility: &UtilitySpec,
        rng: &mut R,
    ) -> Result<f64> {
        let draws = self.sample_f(x, h, rng)?;
        utility.mean_log_utility(&draws)
    }
}

impl<T: PredictiveSampler + ?Sized> PredictiveSampler for &T {
    fn sample_f<R: Rng + ?Sized>(&self, x: &Point, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        (**self).sample_f(x, count, rng)
    }

    fn mean_log_utility<R: Rng + ?Sized>(
        &self,
        x: &Point,
        h: usize,
        utility: &UtilitySpec,
        rng: &mut R,
    ) -> Result<f64> {
        (**self).mean_log_utility(x, h, utility, rng)
    }
}

/// Either fitted surrogate, for code that picks one at run time.
#[derive(Debug, Clone)]
pub enum Surrogate {
    Gp(TanimotoGp),
    Blr(BlrPosterior),
}

impl PredictiveSampler for Surrogate {
    fn sample_f<R: Rng + ?Sized>(&self, x: &Point, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Surrogate::Gp(gp) => gp.sample_f(x, count, rng),
            Surrogate::Blr(blr) => blr.sample_f(x, count, rng),
        }
    }

    fn mean_log_utility<R: Rng + ?Sized>(
        &self,
        x: &Point,
        h: usize,
        utility: &UtilitySpec,
        rng: &mut R,
    ) -> Result<f64> {
        match self {
            Surrogate::Gp(gp) => gp.mean_log_utility(x, h, utility, rng),
            Surrogate::Blr(blr) => blr.mean_log_utility(x, h, utility, rng),
        }
    }
}
