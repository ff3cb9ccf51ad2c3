//! Decision spaces, point encodings and the proposal kernels shared by the
//! samplers and the baselines.
//!
//! A [`Point`] stores one `f64` per dimension. Categorical coordinates hold the
//! category index as an exact small integer; continuous coordinates hold the
//! real value.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest space (in points) that `enumerate` will walk.
pub const MAX_ENUMERABLE: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Categorical { k: usize },
    Continuous { lower: f64, upper: f64 },
}

impl Domain {
    pub fn is_categorical(&self) -> bool {
        matches!(self, Domain::Categorical { .. })
    }

    fn contains(&self, value: f64) -> bool {
        match *self {
            Domain::Categorical { k } => {
                value.fract() == 0.0 && value >= 0.0 && (value as usize) < k
            }
            Domain::Continuous { lower, upper } => value >= lower && value <= upper,
        }
    }
}

/// A combinatorial or mixed search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct SpaceSpec {
    dims: Vec<Domain>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    dims: Vec<Domain>,
}

impl TryFrom<SpaceRepr> for SpaceSpec {
    type Error = Error;
    fn try_from(repr: SpaceRepr) -> Result<Self> {
        SpaceSpec::new(repr.dims)
    }
}

impl From<SpaceSpec> for SpaceRepr {
    fn from(space: SpaceSpec) -> Self {
        SpaceRepr { dims: space.dims }
    }
}

impl SpaceSpec {
    pub fn new(dims: Vec<Domain>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpace("space needs at least one dimension".into()));
        }
        for (s, dim) in dims.iter().enumerate() {
            match *dim {
                Domain::Categorical { k } if k < 2 => {
                    return Err(Error::InvalidSpace(format!(
                        "dimension {s}: cardinality {k} < 2"
                    )))
                }
                Domain::Continuous { lower, upper } if !(lower < upper) => {
                    return Err(Error::InvalidSpace(format!(
                        "dimension {s}: bounds [{lower}, {upper}] are empty"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { dims })
    }

    /// `{0,1}^p`.
    pub fn binary(p: usize) -> Result<Self> {
        Self::categorical(&vec![2; p])
    }

    pub fn categorical(cardinalities: &[usize]) -> Result<Self> {
        Self::new(cardinalities.iter().map(|&k| Domain::Categorical { k }).collect())
    }

    pub fn dims(&self) -> &[Domain] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn is_categorical(&self) -> bool {
        self.dims.iter().all(Domain::is_categorical)
    }

    /// Category count of dimension `s`, `None` for continuous dimensions.
    pub fn cardinality(&self, s: usize) -> Option<usize> {
        match self.dims.get(s)? {
            Domain::Categorical { k } => Some(*k),
            Domain::Continuous { .. } => None,
        }
    }

    /// Number of points in a fully categorical space.
    pub fn size(&self) -> Option<u128> {
        self.dims.iter().try_fold(1u128, |acc, d| match d {
            Domain::Categorical { k } => acc.checked_mul(*k as u128),
            Domain::Continuous { .. } => None,
        })
    }

    pub fn validate(&self, x: &Point) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        for (s, (dim, &v)) in self.dims.iter().zip(x.values()).enumerate() {
            if !dim.contains(v) {
                return Err(Error::OutOfDomain { dim: s, value: v });
            }
        }
        Ok(())
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(self.dims.iter().map(|d| sample_domain(d, rng)).collect())
    }

    /// Mixed-radix index of a categorical point (dimension 0 is the least
    /// significant digit).
    pub fn index_of(&self, x: &Point) -> Result<usize> {
        self.validate(x)?;
        let mut index = 0usize;
        for (s, dim) in self.dims.iter().enumerate().rev() {
            let Domain::Categorical { k } = *dim else {
                return Err(Error::EncodingUnsupported(s));
            };
            index = index * k + x.category(s);
        }
        Ok(index)
    }

    pub fn point_at(&self, mut index: usize) -> Result<Point> {
        let mut values = Vec::with_capacity(self.len());
        for (s, dim) in self.dims.iter().enumerate() {
            let Domain::Categorical { k } = *dim else {
                return Err(Error::EncodingUnsupported(s));
            };
            values.push((index % k) as f64);
            index /= k;
        }
        Ok(Point(values))
    }

    /// Every point of a categorical space, ordered by [`SpaceSpec::index_of`].
    pub fn enumerate(&self) -> Result<Vec<Point>> {
        let size = self.size().ok_or_else(|| {
            Error::InvalidSpace("only categorical spaces can be enumerated".into())
        })?;
        if size > MAX_ENUMERABLE {
            return Err(Error::SpaceTooLarge(size));
        }
        (0..size as usize).map(|i| self.point_at(i)).collect()
    }

    /// Width of the one-hot encoding, `sum_s k_s`.
    pub fn one_hot_width(&self) -> Result<usize> {
        let mut width = 0;
        for (s, dim) in self.dims.iter().enumerate() {
            match dim {
                Domain::Categorical { k } => width += k,
                Domain::Continuous { .. } => return Err(Error::EncodingUnsupported(s)),
            }
        }
        Ok(width)
    }

    /// One block per dimension in index order, categories in index order.
    pub fn encode_one_hot(&self, x: &Point) -> Result<OneHotEncoding> {
        let width = self.one_hot_width()?;
        self.validate(x)?;
        let mut bits = vec![0u8; width];
        let mut offset = 0;
        for (s, dim) in self.dims.iter().enumerate() {
            if let Domain::Categorical { k } = *dim {
                bits[offset + x.category(s)] = 1;
                offset += k;
            }
        }
        Ok(OneHotEncoding { bits })
    }

    pub fn decode_one_hot(&self, encoding: &OneHotEncoding) -> Result<Point> {
        let width = self.one_hot_width()?;
        if encoding.bits.len() != width {
            return Err(Error::DimensionMismatch { expected: width, got: encoding.bits.len() });
        }
        let mut values = Vec::with_capacity(self.len());
        let mut offset = 0;
        for (s, dim) in self.dims.iter().enumerate() {
            if let Domain::Categorical { k } = *dim {
                let block = &encoding.bits[offset..offset + k];
                let mut set = block.iter().enumerate().filter(|(_, &b)| b != 0);
                match (set.next(), set.next()) {
                    (Some((c, _)), None) => values.push(c as f64),
                    _ => {
                        return Err(Error::InvalidSpace(format!(
                            "one-hot block {s} must have exactly one bit set"
                        )))
                    }
                }
                offset += k;
            }
        }
        Ok(Point(values))
    }

    /// Pick a coordinate uniformly and resample it uniformly over its whole
    /// range. The current value may be drawn again, which keeps the kernel
    /// exactly symmetric.
    pub fn propose_uniform_flip<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> Point {
        let s = rng.random_range(0..self.len());
        let mut out = x.clone();
        out.0[s] = sample_domain(&self.dims[s], rng);
        out
    }

    /// Pick a coordinate uniformly and move it to a different category (or a
    /// fresh uniform value for continuous coordinates). Used by local search.
    pub fn propose_neighbor<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> Point {
        let s = rng.random_range(0..self.len());
        let mut out = x.clone();
        out.0[s] = match self.dims[s] {
            Domain::Categorical { k } => {
                let current = x.category(s);
                let shift = rng.random_range(1..k);
                ((current + shift) % k) as f64
            }
            ref d => sample_domain(d, rng),
        };
        out
    }

    /// Additive Gaussian move on continuous coordinate `s`, clipped to bounds.
    pub fn propose_gaussian_component<R: Rng + ?Sized>(
        &self,
        x: &Point,
        s: usize,
        step: f64,
        rng: &mut R,
    ) -> Result<Point> {
        let Some(Domain::Continuous { lower, upper }) = self.dims.get(s).copied() else {
            return Err(Error::InvalidDimension(s));
        };
        let mut out = x.clone();
        if step > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            out.0[s] = (x.0[s] + step * z).clamp(lower, upper);
        }
        Ok(out)
    }

    /// Coordinate-wise probe used by the Metropolis-within-Gibbs sweep:
    /// categorical coordinates are resampled uniformly, continuous ones get
    /// a Gaussian move with standard deviation `step * (upper - lower)`.
    pub fn propose_coordinate<R: Rng + ?Sized>(
        &self,
        x: &Point,
        s: usize,
        step: f64,
        rng: &mut R,
    ) -> Result<Point> {
        match self.dims.get(s).copied() {
            Some(Domain::Categorical { k }) => {
                let mut out = x.clone();
                out.0[s] = rng.random_range(0..k) as f64;
                Ok(out)
            }
            Some(Domain::Continuous { lower, upper }) => {
                self.propose_gaussian_component(x, s, step * (upper - lower), rng)
            }
            None => Err(Error::InvalidDimension(s)),
        }
    }
}

fn sample_domain<R: Rng + ?Sized>(dim: &Domain, rng: &mut R) -> f64 {
    match *dim {
        Domain::Categorical { k } => rng.random_range(0..k) as f64,
        Domain::Continuous { lower, upper } => rng.random_range(lower..=upper),
    }
}

/// Proposal kernel used by the Metropolis-Hastings acquisition sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Proposal {
    /// [`SpaceSpec::propose_uniform_flip`].
    UniformFlip,
    /// Uniform coordinate choice, then [`SpaceSpec::propose_coordinate`].
    LocalGaussian { step: f64 },
}

impl Default for Proposal {
    fn default() -> Self {
        Proposal::UniformFlip
    }
}

impl Proposal {
    pub fn propose<R: Rng + ?Sized>(&self, space: &SpaceSpec, x: &Point, rng: &mut R) -> Point {
        match *self {
            Proposal::UniformFlip => space.propose_uniform_flip(x, rng),
            Proposal::LocalGaussian { step } => {
                let s = rng.random_range(0..space.len());
                space
                    .propose_coordinate(x, s, step, rng)
                    .expect("coordinate index drawn from the space")
            }
        }
    }

    /// `log q(to | from) - log q(from | to)`; zero for the symmetric kernels
    /// implemented here (away from continuous bounds).
    pub fn log_ratio(&self, _from: &Point, _to: &Point) -> f64 {
        0.0
    }
}

/// A point of a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn from_categories(categories: &[usize]) -> Self {
        Point(categories.iter().map(|&c| c as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn category(&self, s: usize) -> usize {
        self.0[s] as usize
    }

    pub fn categories(&self) -> Vec<usize> {
        self.0.iter().map(|&v| v as usize).collect()
    }

    pub fn hamming(&self, other: &Point) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Point {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Trace(format!("bad point coordinate {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotEncoding {
    pub bits: Vec<u8>,
}
