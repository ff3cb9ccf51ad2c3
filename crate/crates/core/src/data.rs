use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Point;

/// Direction of optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Maps a value onto the maximization scale.
    #[inline]
    pub fn orient(self, y: f64) -> f64 {
        match self {
            Sense::Maximize => y,
            Sense::Minimize => -y,
        }
    }

    /// `true` when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        self.orient(a) > self.orient(b)
    }

    pub fn best(self, a: f64, b: f64) -> f64 {
        if self.better(b, a) {
            b
        } else {
            a
        }
    }
}

/// Observed `(x, y)` pairs in evaluation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    xs: Vec<Point>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Point, f64)>) -> Self {
        let (xs, ys) = pairs.into_iter().unzip();
        Self { xs, ys }
    }

    pub fn push(&mut self, x: Point, y: f64) {
        self.xs.push(x);
        self.ys.push(y);
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn xs(&self) -> &[Point] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.xs.iter().zip(self.ys.iter().copied())
    }

    /// Best observed response under `sense`.
    pub fn best(&self, sense: Sense) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &y) in self.ys.iter().enumerate() {
            match best {
                Some((_, b)) if !sense.better(y, b) => {}
                _ => best = Some((i, y)),
            }
        }
        best.ok_or(Error::EmptyDataset)
    }
}
