//! Gaussian process with a Tanimoto kernel on one-hot encoded points.
//!
//! Hyperparameters `(phi, noise_var)` are chosen by maximizing the log
//! marginal likelihood over a fixed log-spaced grid. Because the Gram matrix
//! scales linearly in `phi`, one symmetric eigendecomposition of the unit-
//! amplitude Gram matrix gives the likelihood of every grid point in O(n).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::acquisition::{UtilityKind, UtilitySpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_jitter;
use crate::space::{Point, SpaceSpec};
use crate::surrogate::PredictiveSampler;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `phi * <x, x2> / (|x|^2 + |x2|^2 - <x, x2>)` on binary vectors, with
/// `k(0, 0) = phi`.
pub fn tanimoto_kernel(x: &[u8], x2: &[u8], phi: f64) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: x2.len() });
    }
    let (mut inter, mut na, mut nb) = (0u32, 0u32, 0u32);
    for (&a, &b) in x.iter().zip(x2) {
        let (a, b) = ((a != 0) as u32, (b != 0) as u32);
        inter += a & b;
        na += a;
        nb += b;
    }
    Ok(tanimoto_from_counts(inter, na, nb, phi))
}

#[inline]
fn tanimoto_from_counts(inter: u32, na: u32, nb: u32, phi: f64) -> f64 {
    let denom = na + nb - inter;
    if denom == 0 {
        phi
    } else {
        phi * inter as f64 / denom as f64
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            10f64.powf(a + (b - a) * t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOptions {
    pub phi_grid: Vec<f64>,
    pub noise_grid: Vec<f64>,
    /// Use the sample mean of `y` as a constant prior mean instead of zero.
    pub center_y: bool,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            phi_grid: log_grid(1e-2, 1e2, 25),
            noise_grid: log_grid(1e-6, 1e1, 25),
            center_y: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TanimotoGp {
    space: SpaceSpec,
    train: Vec<Point>,
    train_y: Vec<f64>,
    phi: f64,
    noise_var: f64,
    mean_offset: f64,
    jitter: f64,
    chol: Cholesky<f64, Dyn>,
    weights: DVector<f64>,
    /// `(phi, noise_var, log marginal likelihood)` for every grid point.
    grid: Vec<(f64, f64, f64)>,
}

/// One-hot Tanimoto similarity of two categorical points with unit amplitude.
/// Every one-hot vector has exactly `p` bits set, so only the number of
/// matching coordinates matters.
#[inline]
fn unit_kernel(a: &Point, b: &Point) -> f64 {
    let p = a.len() as u32;
    let matches = a.values().iter().zip(b.values()).filter(|(x, y)| x == y).count() as u32;
    tanimoto_from_counts(matches, p, p, 1.0)
}

fn unit_gram(xs: &[Point]) -> DMatrix<f64> {
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = unit_kernel(&xs[i], &xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn check_inputs(data: &Dataset, space: &SpaceSpec) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    space.one_hot_width()?;
    for (x, y) in data.iter() {
        space.validate(x)?;
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("response {y}")));
        }
    }
    Ok(())
}

/// Log marginal likelihood of `data` under fixed hyperparameters, computed
/// with a direct Cholesky factorization.
pub fn log_marginal_likelihood(
    data: &Dataset,
    space: &SpaceSpec,
    phi: f64,
    noise_var: f64,
    mean_offset: f64,
) -> Result<f64> {
    check_inputs(data, space)?;
    let n = data.len();
    let k = unit_gram(data.xs()) * phi + DMatrix::identity(n, n) * noise_var;
    let (chol, _) = cholesky_with_jitter(k)?;
    let r = DVector::from_iterator(n, data.ys().iter().map(|y| y - mean_offset));
    let alpha = chol.solve(&r);
    let log_det: f64 = chol.l_dirty().diagonal().iter().take(n).map(|d| 2.0 * d.ln()).sum();
    Ok(-0.5 * r.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * LN_2PI)
}

impl TanimotoGp {
    pub fn fit(data: &Dataset, space: &SpaceSpec, options: &GpOptions) -> Result<Self> {
        check_inputs(data, space)?;
        if options.phi_grid.is_empty() || options.noise_grid.is_empty() {
            return Err(Error::Config("empty hyperparameter grid".into()));
        }
        let n = data.len();
        let ys = data.ys();
        let mean_offset =
            if options.center_y { ys.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let k1 = unit_gram(data.xs());
        let eig = SymmetricEigen::new(k1.clone());
        let r = DVector::from_iterator(n, ys.iter().map(|y| y - mean_offset));
        let proj = eig.eigenvectors.transpose() * &r;
        let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();

        let mut grid = Vec::with_capacity(options.phi_grid.len() * options.noise_grid.len());
        let mut best = (f64::NEG_INFINITY, options.phi_grid[0], options.noise_grid[0]);
        for &phi in &options.phi_grid {
            for &noise in &options.noise_grid {
                let mut quad = 0.0;
                let mut log_det = 0.0;
                for (l, z) in lambdas.iter().zip(proj.iter()) {
                    let d = phi * l + noise;
                    quad += z * z / d;
                    log_det += d.ln();
                }
                let lml = -0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;
                grid.push((phi, noise, lml));
                if lml > best.0 {
                    best = (lml, phi, noise);
                }
            }
        }
        let (_, phi, noise_var) = best;
        Self::with_hyperparameters_inner(data, space, phi, noise_var, mean_offset, k1, grid)
    }

    /// Conditions on `data` with fixed hyperparameters (no grid search).
    pub fn with_hyperparameters(
        data: &Dataset,
        space: &SpaceSpec,
        phi: f64,
        noise_var: f64,
        mean_offset: f64,
    ) -> Result<Self> {
        check_inputs(data, space)?;
        let k1 = unit_gram(data.xs());
        Self::with_hyperparameters_inner(data, space, phi, noise_var, mean_offset, k1, Vec::new())
    }

    fn with_hyperparameters_inner(
        data: &Dataset,
        space: &SpaceSpec,
        phi: f64,
        noise_var: f64,
        mean_offset: f64,
        k1: DMatrix<f64>,
        grid: Vec<(f64, f64, f64)>,
    ) -> Result<Self> {
        if !(phi > 0.0) || !(noise_var >= 0.0) {
            return Err(Error::Config(format!("invalid GP hyperparameters ({phi}, {noise_var})")));
        }
        let n = data.len();
        let k = k1 * phi + DMatrix::identity(n, n) * noise_var;
        let (chol, jitter) = cholesky_with_jitter(k)?;
        let r = DVector::from_iterator(n, data.ys().iter().map(|y| y - mean_offset));
        let weights = chol.solve(&r);
        Ok(Self {
            space: space.clone(),
            train: data.xs().to_vec(),
            train_y: data.ys().to_vec(),
            phi,
            noise_var,
            mean_offset,
            jitter,
            chol,
            weights,
            grid,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn likelihood_grid(&self) -> &[(f64, f64, f64)] {
        &self.grid
    }

    /// `k(x, x')` between two points of the space.
    pub fn kernel(&self, a: &Point, b: &Point) -> f64 {
        self.phi * unit_kernel(a, b)
    }

    /// Posterior mean and variance of the latent `f(x)`.
    pub fn posterior(&self, x: &Point) -> Result<(f64, f64)> {
        self.space.validate(x)?;
        let kx = DVector::from_iterator(
            self.train.len(),
            self.train.iter().map(|t| self.phi * unit_kernel(x, t)),
        );
        let mean = self.mean_offset + kx.dot(&self.weights);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kx)
            .expect("Cholesky factor has a nonzero diagonal");
        let prior = self.phi;
        let var = (prior - v.norm_squared()).clamp(0.0, prior);
        Ok((mean, var))
    }

    /// Log density of the latent predictive at `f`.
    pub fn log_predictive_density(&self, x: &Point, f: f64) -> Result<f64> {
        let (mean, var) = self.posterior(x)?;
        Ok(-0.5 * (LN_2PI + var.ln()) - 0.5 * (f - mean).powi(2) / var)
    }
}

impl PredictiveSampler for TanimotoGp {
    fn sample_f<R: Rng + ?Sized>(&self, x: &Point, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let (mean, var) = self.posterior(x)?;
        if var == 0.0 {
            return Ok(vec![mean; count]);
        }
        let dist = Normal::new(mean, var.sqrt()).map_err(|e| Error::NonFinite(e.to_string()))?;
        Ok((0..count).map(|_| dist.sample(rng)).collect())
    }

    /// Draws below the incumbent all have utility `epsilon`, so when few draws
    /// can improve, only their number (binomial) and their values (normal
    /// truncated to the improving side) are simulated.
    fn mean_log_utility<R: Rng + ?Sized>(
        &self,
        x: &Point,
        h: usize,
        utility: &UtilitySpec,
        rng: &mut R,
    ) -> Result<f64> {
        if h == 0 {
            return Err(Error::Config("mean log-utility needs at least one draw".into()));
        }
        let (mean, var) = self.posterior(x)?;
        let m = utility.sense.orient(mean);
        let sd = var.sqrt();
        if sd == 0.0 {
            return Ok(utility.oriented_utility(m).ln());
        }
        let star = utility.oriented_star();
        let a = (star - m) / sd;
        let std = StdNormal::standard();
        let p_above = std.cdf(-a);
        if h < 64 || p_above > 0.2 {
            let mut total = 0.0;
            for _ in 0..h {
                let z: f64 = StandardNormal.sample(rng);
                total += utility.oriented_utility(m + sd * z).ln();
            }
            return Ok(total / h as f64);
        }
        let above = if p_above > 0.0 {
            Binomial::new(h as u64, p_above)
                .map_err(|e| Error::NonFinite(e.to_string()))?
                .sample(rng) as usize
        } else {
            0
        };
        let mut total = (h - above) as f64 * utility.epsilon.ln();
        match utility.kind {
            UtilityKind::ProbabilityOfImprovement => {
                total += above as f64 * (1.0 + utility.epsilon).ln();
            }
            UtilityKind::ExpectedImprovement => {
                for _ in 0..above {
                    // U in (0, 1] keeps the quantile finite.
                    let u = 1.0 - rng.random::<f64>();
                    let z = -std.inverse_cdf(u * p_above);
                    total += utility.oriented_utility(m + sd * z).ln();
                }
            }
        }
        Ok(total / h as f64)
    }
}
