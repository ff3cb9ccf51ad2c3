//! Sparse Bayesian linear regression on all pairwise interactions with a
//! horseshoe prior, sampled by Gibbs.
//!
//! Model, with `theta = alpha / sigma`:
//!
//! ```text
//! y | alpha, sigma2     ~ N(Phi alpha, sigma2 I)
//! alpha_k | ...         ~ N(0, lambda_k^2 tau^2 sigma2)
//! lambda_k, tau         ~ half-Cauchy(0, 1)
//! p(sigma2)             ∝ 1 / sigma2
//! ```
//!
//! Each half-Cauchy is written as `lambda^2 | nu ~ IG(1/2, 1/nu)`,
//! `nu ~ IG(1/2, 1)`, which makes every full conditional inverse-gamma.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, StandardNormal};

use crate::acquisition::UtilitySpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_relative_jitter;
use crate::space::{Domain, Point, SpaceSpec};
use crate::surrogate::PredictiveSampler;

const SCALE_MIN: f64 = 1e-16;
const SCALE_MAX: f64 = 1e16;
const NO_PAIR: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    /// `x_s` of a binary dimension.
    Binary { dim: usize },
    /// `1{x_s = c}` of a dimension with more than two categories.
    Indicator { dim: usize, category: usize },
    /// Raw value of a continuous dimension.
    Value { dim: usize },
}

impl Column {
    fn dim(&self) -> usize {
        match *self {
            Column::Binary { dim } | Column::Indicator { dim, .. } | Column::Value { dim } => dim,
        }
    }
}

/// Intercept, base columns, then every product of two base columns from
/// different dimensions, ordered `(i, j)` with `i < j`.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    space: SpaceSpec,
    columns: Vec<Column>,
    /// `pair_index[i * n_cols + j]` for `i < j`.
    pair_index: Vec<usize>,
    len: usize,
}

impl FeatureMap {
    pub fn new(space: &SpaceSpec) -> Self {
        let mut columns = Vec::new();
        for (dim, d) in space.dims().iter().enumerate() {
            match *d {
                Domain::Categorical { k: 2 } => columns.push(Column::Binary { dim }),
                Domain::Categorical { k } => {
                    columns.extend((0..k).map(|category| Column::Indicator { dim, category }))
                }
                Domain::Continuous { .. } => columns.push(Column::Value { dim }),
            }
        }
        let n_cols = columns.len();
        let mut pair_index = vec![NO_PAIR; n_cols * n_cols];
        let mut next = 1 + n_cols;
        for i in 0..n_cols {
            for j in i + 1..n_cols {
                if columns[i].dim() != columns[j].dim() {
                    pair_index[i * n_cols + j] = next;
                    next += 1;
                }
            }
        }
        Self { space: space.clone(), columns, pair_index, len: next }
    }

    /// Number of features `m`, intercept included.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    /// Nonzero features of `x` as `(index, value)`, indices increasing.
    pub fn sparse_features(&self, x: &Point) -> Result<Vec<(usize, f64)>> {
        self.space.validate(x)?;
        let base: Vec<(usize, f64)> = self
            .columns
            .iter()
            .enumerate()
            .filter_map(|(c, col)| {
                let v = match *col {
                    Column::Binary { dim } | Column::Value { dim } => x.values()[dim],
                    Column::Indicator { dim, category } => (x.category(dim) == category) as u8 as f64,
                };
                (v != 0.0).then_some((c, v))
            })
            .collect();
        let n_cols = self.columns.len();
        let mut out = Vec::with_capacity(1 + base.len() + base.len() * base.len() / 2);
        out.push((0, 1.0));
        out.extend(base.iter().map(|&(c, v)| (1 + c, v)));
        for (a, &(ci, vi)) in base.iter().enumerate() {
            for &(cj, vj) in &base[a + 1..] {
                let idx = self.pair_index[ci * n_cols + cj];
                if idx != NO_PAIR {
                    out.push((idx, vi * vj));
                }
            }
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        Ok(out)
    }

    pub fn features(&self, x: &Point) -> Result<Vec<f64>> {
        let mut dense = vec![0.0; self.len];
        for (i, v) in self.sparse_features(x)? {
            dense[i] = v;
        }
        Ok(dense)
    }
}

/// One state of the Gibbs chain. Scales are stored squared.
#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeState {
    pub alpha: Vec<f64>,
    pub local_scale_sq: Vec<f64>,
    pub global_scale_sq: f64,
    pub sigma2: f64,
    pub nu: Vec<f64>,
    pub xi: f64,
}

impl HorseshoeState {
    fn initial(m: usize, y: &[f64]) -> Self {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            alpha: vec![0.0; m],
            local_scale_sq: vec![1.0; m],
            global_scale_sq: 1.0,
            sigma2: if var > 0.0 { var } else { 1.0 },
            nu: vec![1.0; m],
            xi: 1.0,
        }
    }

    pub fn local_scales(&self) -> Vec<f64> {
        self.local_scale_sq.iter().map(|v| v.sqrt()).collect()
    }

    pub fn global_scale(&self) -> f64 {
        self.global_scale_sq.sqrt()
    }

    fn check(&self, iteration: usize) -> Result<()> {
        let finite = self.alpha.iter().all(|a| a.is_finite())
            && self.sigma2.is_finite()
            && self.global_scale_sq.is_finite()
            && self.xi.is_finite();
        let positive = self.sigma2 > 0.0
            && self.global_scale_sq > 0.0
            && self.xi > 0.0
            && self.local_scale_sq.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.nu.iter().all(|v| *v > 0.0 && v.is_finite());
        if finite && positive {
            Ok(())
        } else {
            Err(Error::NonFinite(format!(
                "horseshoe Gibbs iteration {iteration}: sigma2={}, tau2={}, xi={}, \
                 max|alpha|={}, local range=[{}, {}]",
                self.sigma2,
                self.global_scale_sq,
                self.xi,
                self.alpha.iter().fold(0.0f64, |m, a| m.max(a.abs())),
                self.local_scale_sq.iter().cloned().fold(f64::INFINITY, f64::min),
                self.local_scale_sq.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GibbsConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self { n_iter: 1000, burn_in: 500, thin: 5 }
    }
}

impl GibbsConfig {
    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    fn validate(&self) -> Result<()> {
        if self.n_iter <= self.burn_in || self.thin == 0 || self.retained() == 0 {
            return Err(Error::Config(format!(
                "Gibbs chain needs n_iter > burn_in, thin >= 1 and at least one retained \
                 draw (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Inverse-gamma draw `b / Gamma(a, 1)`.
fn inv_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let g: f64 = if shape == 1.0 {
        Exp1.sample(rng)
    } else {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
    };
    rate / g
}

/// Design matrix in sparse row form plus per-feature column lists.
struct Design {
    n: usize,
    m: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl Design {
    fn new(map: &FeatureMap, data: &Dataset) -> Result<Self> {
        let m = map.len();
        let rows = data.xs().iter().map(|x| map.sparse_features(x)).collect::<Result<Vec<_>>>()?;
        let mut cols = vec![Vec::new(); m];
        for (i, row) in rows.iter().enumerate() {
            for &(k, v) in row {
                cols[k].push((i, v));
            }
        }
        Ok(Self { n: rows.len(), m, rows, cols })
    }

    fn mul(&self, coef: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(k, v)| coef[k] * v).sum()).collect()
    }

    fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.m, self.m);
        for row in &self.rows {
            for &(a, va) in row {
                for &(b, vb) in row {
                    g[(a, b)] += va * vb;
                }
            }
        }
        g
    }

    fn t_mul(&self, w: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.m,
            self.cols.iter().map(|col| col.iter().map(|&(i, v)| w[i] * v).sum::<f64>()),
        )
    }
}

/// Draws `alpha | rest`. Uses the `m x m` precision when `m <= n` and the
/// `n x n` data-space identity otherwise; both are exact.
struct AlphaSampler {
    gram: Option<DMatrix<f64>>,
    xty: DVector<f64>,
}

impl AlphaSampler {
    fn new(design: &Design, y: &[f64]) -> Self {
        let gram = (design.m <= design.n).then(|| design.gram());
        Self { gram, xty: design.t_mul(y) }
    }

    fn sample<R: Rng + ?Sized>(
        &self,
        design: &Design,
        y: &[f64],
        prior_var: &[f64],
        sigma: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let m = design.m;
        match &self.gram {
            Some(gram) => {
                let mut a = gram.clone();
                for k in 0..m {
                    a[(k, k)] += 1.0 / prior_var[k];
                }
                let (chol, _) = cholesky_with_relative_jitter(a)?;
                let mean = chol.solve(&self.xty);
                let z = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
                let noise = chol
                    .l_dirty()
                    .tr_solve_lower_triangular(&z)
                    .expect("nonzero Cholesky diagonal");
                Ok((0..m).map(|k| mean[k] + sigma * noise[k]).collect())
            }
            None => {
                let n = design.n;
                let u: Vec<f64> = prior_var
                    .iter()
                    .map(|d| d.sqrt() * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let phi_u = design.mul(&u);
                let rhs = DVector::from_iterator(
                    n,
                    (0..n).map(|i| y[i] / sigma - phi_u[i] - rng.sample::<f64, _>(StandardNormal)),
                );
                let mut g = DMatrix::<f64>::zeros(n, n);
                {
                    let data = g.as_mut_slice();
                    for (k, col) in design.cols.iter().enumerate() {
                        let d = prior_var[k];
                        for (a, &(ia, va)) in col.iter().enumerate() {
                            let dva = d * va;
                            for &(ib, vb) in &col[..=a] {
                                // rows are increasing, so ia >= ib: lower triangle.
                                data[ib * n + ia] += dva * vb;
                            }
                        }
                    }
                }
                for i in 0..n {
                    g[(i, i)] += 1.0;
                    for j in 0..i {
                        g[(j, i)] = g[(i, j)];
                    }
                }
                let (chol, _) = cholesky_with_relative_jitter(g)?;
                let w = chol.solve(&rhs);
                let tw = design.t_mul(w.as_slice());
                Ok((0..m).map(|k| sigma * (u[k] + prior_var[k] * tw[k])).collect())
            }
        }
    }
}

/// Retained Gibbs draws and the feature map needed to evaluate them.
#[derive(Debug, Clone)]
pub struct BlrPosterior {
    map: FeatureMap,
    draws: Vec<HorseshoeState>,
    last: HorseshoeState,
}

impl BlrPosterior {
    pub fn from_draws(map: FeatureMap, draws: Vec<HorseshoeState>) -> Result<Self> {
        let last = draws.last().cloned().ok_or(Error::NotFitted)?;
        Ok(Self { map, draws, last })
    }

    pub fn draws(&self) -> &[HorseshoeState] {
        &self.draws
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    /// Final state of the chain, usable to warm-start the next fit.
    pub fn last_state(&self) -> &HorseshoeState {
        &self.last
    }

    /// `f_alpha(x)` for every retained draw.
    pub fn f_values(&self, x: &Point) -> Result<Vec<f64>> {
        let phi = self.map.sparse_features(x)?;
        Ok(self
            .draws
            .iter()
            .map(|s| phi.iter().map(|&(k, v)| s.alpha[k] * v).sum())
            .collect())
    }

    /// Posterior mean and standard deviation of each coefficient.
    pub fn coefficient_summary(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.map.len();
        let d = self.draws.len() as f64;
        let mut mean = vec![0.0; m];
        for s in &self.draws {
            for (acc, a) in mean.iter_mut().zip(&s.alpha) {
                *acc += a / d;
            }
        }
        let mut sd = vec![0.0; m];
        for s in &self.draws {
            for k in 0..m {
                sd[k] += (s.alpha[k] - mean[k]).powi(2);
            }
        }
        let denom = (d - 1.0).max(1.0);
        sd.iter_mut().for_each(|v| *v = (*v / denom).sqrt());
        (mean, sd)
    }
}

/// Runs the horseshoe Gibbs sampler and keeps `config.retained()` thinned
/// draws after burn-in. `init` warm-starts the chain.
pub fn gibbs_fit<R: Rng + ?Sized>(
    data: &Dataset,
    map: &FeatureMap,
    config: &GibbsConfig,
    init: Option<&HorseshoeState>,
    rng: &mut R,
) -> Result<BlrPosterior> {
    run_gibbs(data, map, config, init, true, rng)
}

pub(crate) fn run_gibbs<R: Rng + ?Sized>(
    data: &Dataset,
    map: &FeatureMap,
    config: &GibbsConfig,
    init: Option<&HorseshoeState>,
    update_scales: bool,
    rng: &mut R,
) -> Result<BlrPosterior> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let y = data.ys();
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("response {bad}")));
    }
    let design = Design::new(map, data)?;
    let (n, m) = (design.n, design.m);
    let alpha_sampler = AlphaSampler::new(&design, y);
    let mut state = match init {
        Some(s) if s.alpha.len() == m => s.clone(),
        Some(s) => return Err(Error::DimensionMismatch { expected: m, got: s.alpha.len() }),
        None => HorseshoeState::initial(m, y),
    };
    let mut draws = Vec::with_capacity(config.retained());
    let mut prior_var = vec![0.0; m];

    for t in 1..=config.n_iter {
        for k in 0..m {
            prior_var[k] = state.global_scale_sq * state.local_scale_sq[k];
        }
        state.alpha = alpha_sampler.sample(&design, y, &prior_var, state.sigma2.sqrt(), rng)?;

        let fitted = design.mul(&state.alpha);
        let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
        let shrink: f64 = (0..m).map(|k| state.alpha[k].powi(2) / prior_var[k]).sum();
        state.sigma2 = inv_gamma((n + m) as f64 / 2.0, 0.5 * (rss + shrink), rng)
            .clamp(SCALE_MIN, SCALE_MAX);

        if update_scales {
            let tau2 = state.global_scale_sq;
            let sigma2 = state.sigma2;
            for k in 0..m {
                let a2 = state.alpha[k].powi(2);
                state.local_scale_sq[k] =
                    inv_gamma(1.0, 1.0 / state.nu[k] + a2 / (2.0 * tau2 * sigma2), rng)
                        .clamp(SCALE_MIN, SCALE_MAX);
            }
            let s: f64 = (0..m)
                .map(|k| state.alpha[k].powi(2) / state.local_scale_sq[k])
                .sum::<f64>();
            state.global_scale_sq =
                inv_gamma((m as f64 + 1.0) / 2.0, 1.0 / state.xi + s / (2.0 * sigma2), rng)
                    .clamp(SCALE_MIN, SCALE_MAX);
            for k in 0..m {
                state.nu[k] = inv_gamma(1.0, 1.0 + 1.0 / state.local_scale_sq[k], rng)
                    .clamp(SCALE_MIN, SCALE_MAX);
            }
            state.xi = inv_gamma(1.0, 1.0 + 1.0 / state.global_scale_sq, rng)
                .clamp(SCALE_MIN, SCALE_MAX);
        }
        state.check(t)?;

        if t > config.burn_in && (t - config.burn_in) % config.thin == 0 {
            draws.push(state.clone());
        }
    }
    Ok(BlrPosterior { map: map.clone(), draws, last: state })
}

impl PredictiveSampler for BlrPosterior {
    fn sample_f<R: Rng + ?Sized>(&self, x: &Point, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let values = self.f_values(x)?;
        Ok((0..count).map(|_| values[rng.random_range(0..values.len())]).collect())
    }

    /// Picking `h` draws uniformly with replacement is a multinomial over the
    /// retained states; for large `h` the counts are drawn directly.
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
        let values = self.f_values(x)?;
        let log_u = values
            .iter()
            .map(|&f| utility.utility(f).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        let d = log_u.len();
        let total: f64 = if h <= 4 * d {
            (0..h).map(|_| log_u[rng.random_range(0..d)]).sum()
        } else {
            let mut remaining = h as u64;
            let mut total = 0.0;
            for (j, lu) in log_u.iter().enumerate() {
                if remaining == 0 {
                    break;
                }
                let c = if j + 1 == d {
                    remaining
                } else {
                    Binomial::new(remaining, 1.0 / (d - j) as f64)
                        .expect("valid binomial")
                        .sample(rng)
                };
                total += c as f64 * lu;
                remaining -= c;
            }
            total
        };
        Ok(total / h as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sense;
    use crate::Prng;
    use rand::SeedableRng;

    #[test]
    fn feature_examples() {
        let map = FeatureMap::new(&SpaceSpec::binary(2).unwrap());
        assert_eq!(map.features(&Point::from_categories(&[0, 0])).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(map.features(&Point::from_categories(&[1, 1])).unwrap(), vec![1.0; 4]);
        let map = FeatureMap::new(&SpaceSpec::binary(3).unwrap());
        assert_eq!(
            map.features(&Point::from_categories(&[1, 0, 1])).unwrap(),
            vec![1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
        assert!(map.features(&Point::from_categories(&[1, 0])).is_err());
    }

    #[test]
    fn feature_count_for_one_hot_blocks() {
        // 30 four-letter positions: 120 indicators, within-block products dropped.
        let map = FeatureMap::new(&SpaceSpec::categorical(&[4; 30]).unwrap());
        assert_eq!(map.len(), 1 + 120 + 120 * 119 / 2 - 30 * 6);
        let map = FeatureMap::new(&SpaceSpec::binary(25).unwrap());
        assert_eq!(map.len(), 1 + 25 + 300);
    }

    #[test]
    fn features_injective_on_binary_space() {
        let space = SpaceSpec::binary(4).unwrap();
        let map = FeatureMap::new(&space);
        let all: Vec<Vec<f64>> =
            space.enumerate().unwrap().iter().map(|x| map.features(x).unwrap()).collect();
        for i in 0..all.len() {
            assert_eq!(all[i][0], 1.0);
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn pair_feature_is_product() {
        let space = SpaceSpec::categorical(&[2, 3, 2]).unwrap();
        let map = FeatureMap::new(&space);
        for x in space.enumerate().unwrap() {
            let dense = map.features(&x).unwrap();
            let sparse = map.sparse_features(&x).unwrap();
            assert!(sparse.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(sparse.len(), dense.iter().filter(|v| **v != 0.0).count());
        }
    }

    fn random_binary_data(p: usize, n: usize, rng: &mut Prng, f: impl Fn(&Point) -> f64) -> Dataset {
        let space = SpaceSpec::binary(p).unwrap();
        Dataset::from_pairs((0..n).map(|_| {
            let x = space.sample_uniform(rng);
            let y = f(&x);
            (x, y)
        }))
    }

    #[test]
    fn sparse_recovery() {
        let space = SpaceSpec::binary(8).unwrap();
        let map = FeatureMap::new(&space);
        let idx_linear = 1; // x_1
        let idx_pair = map
            .sparse_features(&Point::from_categories(&[0, 1, 1, 0, 0, 0, 0, 0]))
            .unwrap()
            .last()
            .unwrap()
            .0; // x_2 x_3
        let mut successes = 0;
        for seed in 0..10 {
            let mut rng = Prng::seed_from_u64(100 + seed);
            let data = random_binary_data(8, 150, &mut rng.clone(), |x| {
                2.0 * x.values()[0] - 3.0 * x.values()[1] * x.values()[2]
            });
            let noisy = Dataset::from_pairs(
                data.iter().map(|(x, y)| (x.clone(), y + 0.1 * rng.sample::<f64, _>(StandardNormal))),
            );
            let post = gibbs_fit(&noisy, &map, &GibbsConfig::default(), None, &mut rng).unwrap();
            let (mean, _) = post.coefficient_summary();
            let mut inactive: Vec<f64> = mean
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != idx_linear && *k != idx_pair)
                .map(|(_, v)| v.abs())
                .collect();
            inactive.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = inactive[inactive.len() / 2];
            let ok = mean[idx_linear] > 0.0
                && mean[idx_pair] < 0.0
                && mean[idx_linear].abs() > 5.0 * median
                && mean[idx_pair].abs() > 5.0 * median;
            successes += ok as usize;
        }
        assert!(successes >= 8, "{successes}/10");
    }

    #[test]
    fn constant_response() {
        let c = 3.5;
        let space = SpaceSpec::binary(4).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(8);
        let data = random_binary_data(4, 40, &mut rng, |_| c);
        let post = gibbs_fit(&data, &map, &GibbsConfig::default(), None, &mut rng).unwrap();
        let (mean, sd) = post.coefficient_summary();
        assert!((mean[0] - c).abs() <= 2.0 * sd[0] + 1e-9, "{} ± {}", mean[0], sd[0]);
        for k in 1..mean.len() {
            assert!(mean[k].abs() <= 2.0 * sd[k] + 1e-9, "k={k}: {} ± {}", mean[k], sd[k]);
        }
        // Monte Carlo mean of predictive draws at an arbitrary point.
        let x = Point::from_categories(&[1, 0, 1, 1]);
        let draws = post.sample_f(&x, 10_000, &mut rng).unwrap();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let s = (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
        assert!((m - c).abs() <= 2.0 * s + 1e-9);
    }

    #[test]
    fn degenerate_posteriors() {
        let space = SpaceSpec::binary(3).unwrap();
        let map = FeatureMap::new(&space);
        let m = map.len();
        let mut alpha = vec![0.0; m];
        alpha[0] = 1.0;
        let state = HorseshoeState {
            alpha,
            local_scale_sq: vec![1.0; m],
            global_scale_sq: 1.0,
            sigma2: 1.0,
            nu: vec![1.0; m],
            xi: 1.0,
        };
        let post = BlrPosterior::from_draws(map.clone(), vec![state]).unwrap();
        let mut rng = Prng::seed_from_u64(0);
        for x in space.enumerate().unwrap() {
            let draws = post.sample_f(&x, 5, &mut rng).unwrap();
            assert!(draws.iter().all(|&d| d == 1.0));
        }
        assert!(matches!(BlrPosterior::from_draws(map, vec![]), Err(Error::NotFitted)));
    }

    #[test]
    fn retained_count() {
        let space = SpaceSpec::binary(3).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(4);
        let data = random_binary_data(3, 10, &mut rng, |x| x.values()[0]);
        let cfg = GibbsConfig { n_iter: 57, burn_in: 20, thin: 4 };
        let post = gibbs_fit(&data, &map, &cfg, None, &mut rng).unwrap();
        assert_eq!(post.draws().len(), 9);
        assert!(gibbs_fit(&data, &map, &GibbsConfig { n_iter: 5, burn_in: 5, thin: 1 }, None, &mut rng)
            .is_err());
    }

    #[test]
    fn conjugate_subcase_matches_normal_inverse_gamma() {
        // Fix lambda = tau = 1: alpha | sigma2 ~ N(0, sigma2 I), p(sigma2) ∝ 1/sigma2.
        let space = SpaceSpec::binary(2).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(21);
        let data = random_binary_data(2, 20, &mut rng.clone(), |x| {
            1.0 + 0.5 * x.values()[0] - 0.7 * x.values()[1]
        });
        let data = Dataset::from_pairs(
            data.iter().map(|(x, y)| (x.clone(), y + 0.3 * rng.sample::<f64, _>(StandardNormal))),
        );
        let n_iter = 100_000;
        let cfg = GibbsConfig { n_iter, burn_in: 1000, thin: 1 };
        let post = run_gibbs(&data, &map, &cfg, None, false, &mut rng).unwrap();

        // Analytic posterior.
        let m = map.len();
        let phi = DMatrix::from_fn(data.len(), m, |i, k| map.features(&data.xs()[i]).unwrap()[k]);
        let y = DVector::from_column_slice(data.ys());
        let a = phi.transpose() * &phi + DMatrix::identity(m, m);
        let a_inv = a.clone().try_inverse().unwrap();
        let mean = &a_inv * phi.transpose() * &y;
        let shape = data.len() as f64 / 2.0;
        let rate = 0.5 * (y.dot(&y) - (phi.transpose() * &y).dot(&mean));
        let e_sigma2 = rate / (shape - 1.0);

        let d = post.draws().len() as f64;
        let mc_sigma2 = post.draws().iter().map(|s| s.sigma2).sum::<f64>() / d;
        assert!(((mc_sigma2 - e_sigma2) / e_sigma2).abs() < 0.05, "{mc_sigma2} vs {e_sigma2}");
        for k in 0..m {
            let mc = post.draws().iter().map(|s| s.alpha[k]).sum::<f64>() / d;
            let sd = (e_sigma2 * a_inv[(k, k)]).sqrt();
            assert!((mc - mean[k]).abs() < 0.05 * mean[k].abs().max(sd), "k={k}: {mc} vs {}", mean[k]);
            let var = post.draws().iter().map(|s| (s.alpha[k] - mc).powi(2)).sum::<f64>() / d;
            assert!((var / sd.powi(2) - 1.0).abs() < 0.05, "k={k}: var {var} vs {}", sd * sd);
        }
    }

    #[test]
    fn both_alpha_routes_agree_in_distribution() {
        // Same conditional drawn through the m x m and n x n routes.
        let space = SpaceSpec::binary(3).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(5);
        let data = random_binary_data(3, 12, &mut rng, |x| x.values()[0] - x.values()[2]);
        let design = Design::new(&map, &data).unwrap();
        let y = data.ys();
        let prior_var: Vec<f64> = (0..map.len()).map(|k| 0.5 + 0.1 * k as f64).collect();
        let dense = AlphaSampler::new(&design, y);
        assert!(dense.gram.is_some());
        let woodbury = AlphaSampler { gram: None, xty: dense.xty.clone() };
        let n = 40_000;
        let moments = |s: &AlphaSampler, rng: &mut Prng| {
            let mut sum = vec![0.0; map.len()];
            let mut sq = vec![0.0; map.len()];
            for _ in 0..n {
                let a = s.sample(&design, y, &prior_var, 0.7, rng).unwrap();
                for k in 0..a.len() {
                    sum[k] += a[k];
                    sq[k] += a[k] * a[k];
                }
            }
            sum.iter().zip(&sq).map(|(s, q)| (s / n as f64, q / n as f64 - (s / n as f64).powi(2))).collect::<Vec<_>>()
        };
        let a = moments(&dense, &mut rng);
        let b = moments(&woodbury, &mut rng);
        for ((ma, va), (mb, vb)) in a.iter().zip(&b) {
            assert!((ma - mb).abs() < 5.0 * ((va + vb) / n as f64).sqrt());
            assert!((va / vb - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn predictive_interval_calibration() {
        let space = SpaceSpec::binary(6).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(31);
        let m = map.len();
        // Sparse truth drawn once, noise sd 0.5.
        let mut truth = vec![0.0; m];
        truth[0] = 1.0;
        truth[2] = -1.5;
        truth[5] = 2.0;
        truth[m - 3] = 1.2;
        let sigma = 0.5;
        let f = |x: &Point| -> f64 {
            map.features(x).unwrap().iter().zip(&truth).map(|(a, b)| a * b).sum()
        };
        let draw = |rng: &mut Prng| {
            let x = space.sample_uniform(rng);
            let y = f(&x) + sigma * rng.sample::<f64, _>(StandardNormal);
            (x, y)
        };
        let data = Dataset::from_pairs((0..120).map(|_| draw(&mut rng)));
        let post = gibbs_fit(&data, &map, &GibbsConfig { n_iter: 3000, burn_in: 1000, thin: 4 }, None, &mut rng)
            .unwrap();
        let held_out = 500;
        let mut covered = 0;
        for _ in 0..held_out {
            let (x, y) = draw(&mut rng);
            let fs = post.f_values(&x).unwrap();
            let mut ys: Vec<f64> = post
                .draws()
                .iter()
                .zip(&fs)
                .flat_map(|(s, f)| {
                    let sd = s.sigma2.sqrt();
                    (0..8).map(move |_| (f, sd)).collect::<Vec<_>>()
                })
                .map(|(f, sd)| f + sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let lo = ys[(0.05 * ys.len() as f64) as usize];
            let hi = ys[(0.95 * ys.len() as f64) as usize - 1];
            covered += (lo <= y && y <= hi) as usize;
        }
        let coverage = covered as f64 / held_out as f64;
        assert!((0.85..=0.95).contains(&coverage), "coverage {coverage}");
    }

    #[test]
    fn multinomial_shortcut_matches_direct_draws() {
        let space = SpaceSpec::binary(3).unwrap();
        let map = FeatureMap::new(&space);
        let mut rng = Prng::seed_from_u64(12);
        let data = random_binary_data(3, 30, &mut rng, |x| x.values()[0] + x.values()[1]);
        let post = gibbs_fit(&data, &map, &GibbsConfig::default(), None, &mut rng).unwrap();
        let x = Point::from_categories(&[1, 0, 0]);
        let spec = UtilitySpec::expected_improvement(1.0, Sense::Maximize);
        let h = 5000;
        let reps = 300;
        let fast: Vec<f64> = (0..reps).map(|_| post.mean_log_utility(&x, h, &spec, &mut rng).unwrap()).collect();
        let slow: Vec<f64> = (0..reps)
            .map(|_| spec.mean_log_utility(&post.sample_f(&x, h, &mut rng).unwrap()).unwrap())
            .collect();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (m, v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64)
        };
        let (mf, vf) = stats(&fast);
        let (ms, vs) = stats(&slow);
        assert!((mf - ms).abs() < 5.0 * ((vf + vs) / reps as f64).sqrt());
        assert!((vf / vs - 1.0).abs() < 0.35);
    }
}
