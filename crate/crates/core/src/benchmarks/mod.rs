//! Black-box objectives: binary quadratic programming, contamination
//! control and RNA sequence design.

pub mod bqp;
pub mod contamination;
pub mod rna;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::data::Sense;
use crate::error::Result;
use crate::space::{Point, SpaceSpec};

pub use bqp::BqpInstance;
pub use contamination::{ContaminationConfig, ContaminationInstance};
pub use rna::{RnaBackend, RnaInstance};

/// Expensive black-box function. Implementations are pure given the
/// instance, so concurrent calls are allowed.
pub trait Objective: Sync {
    fn space(&self) -> &SpaceSpec;
    fn sense(&self) -> Sense;
    fn evaluate(&self, x: &Point) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn space(&self) -> &SpaceSpec {
        (**self).space()
    }

    fn sense(&self) -> Sense {
        (**self).sense()
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        (**self).evaluate(x)
    }
}

/// Wraps an objective and counts every call, including failed ones.
pub struct CountingObjective<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O: Objective> CountingObjective<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Objective> Objective for CountingObjective<O> {
    fn space(&self) -> &SpaceSpec {
        self.inner.space()
    }

    fn sense(&self) -> Sense {
        self.inner.sense()
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(x)
    }
}
