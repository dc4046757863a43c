//! Analytic test problems and the high-dimensional embedding wrappers.

mod embedding;
mod functions;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

pub use embedding::{embed, random_rotation, Embedded, EmbeddingSpec, Rotation};
pub use functions::{
    branin2, hartmann6, paraboloid, rosenbrock, Branin, Hartmann6, Paraboloid, Rosenbrock,
};
pub use functions::{HARTMANN6_LOCAL_MIN, HARTMANN6_MINIMIZER, HARTMANN6_MIN_VALUE};

use crate::error::{Error, Result};
use crate::geometry::DomainBounds;

/// A known global minimizer and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
}

/// A bounded black-box objective to be minimized.
///
/// `evaluate` must be deterministic and free of side effects visible to the
/// optimizer; it receives points of length [`Objective::dim`].
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn bounds(&self) -> &DomainBounds;

    fn evaluate(&self, x: &[f64]) -> f64;

    fn dim(&self) -> usize {
        self.bounds().dim()
    }

    fn optimum(&self) -> Option<&Optimum> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn bounds(&self) -> &DomainBounds {
        (**self).bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn optimum(&self) -> Option<&Optimum> {
        (**self).optimum()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn bounds(&self) -> &DomainBounds {
        (**self).bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn optimum(&self) -> Option<&Optimum> {
        (**self).optimum()
    }
}

/// Objective backed by a closure.
pub struct FnObjective<F> {
    name: String,
    bounds: DomainBounds,
    optimum: Option<Optimum>,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnObjective<F> {
    pub fn new(name: impl Into<String>, bounds: DomainBounds, f: F) -> Self {
        Self {
            name: name.into(),
            bounds,
            optimum: None,
            f,
        }
    }

    pub fn with_optimum(mut self, optimum: Optimum) -> Self {
        self.optimum = Some(optimum);
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Objective for FnObjective<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }
}

/// Wrapper counting every call to `evaluate`.
pub struct Counting<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O: Objective> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Objective> Objective for Counting<O> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn bounds(&self) -> &DomainBounds {
        self.inner.bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn optimum(&self) -> Option<&Optimum> {
        self.inner.optimum()
    }
}

/// Seed of the rotation used by the `hartmann6-500r` registry entry.
pub const REGISTRY_ROTATION_SEED: u64 = 0x5241_5300;

/// Ambient dimension of the embedded registry entries.
pub const REGISTRY_AMBIENT_DIM: usize = 500;

/// Benchmarks named in the literature that need external code bases.
pub const EXTERNAL_SUITES: &[&str] = &[
    "mopta08",
    "svm",
    "svm388",
    "svm-388",
    "lasso-hard",
    "lasso-high",
    "lassobench",
];

/// Names accepted by [`by_name`] without a dimension argument.
pub const REGISTRY: &[&str] = &[
    "rosenbrock2",
    "paraboloid100",
    "branin2-500",
    "hartmann6-500r",
];

/// Names accepted by [`build`].
pub const FUNCTIONS: &[&str] = &[
    "rosenbrock",
    "paraboloid",
    "branin2",
    "hartmann6",
    "rosenbrock2",
    "paraboloid100",
    "branin2-500",
    "hartmann6-500r",
];

/// Looks up one of the fixed registry problems.
pub fn by_name(name: &str) -> Result<Box<dyn Objective>> {
    build(name, None)
}

/// Builds a benchmark by name, with an optional dimension for the
/// parametric families (`rosenbrock`, `paraboloid`) or the ambient dimension
/// of the embedded problems.
pub fn build(name: &str, dim: Option<usize>) -> Result<Box<dyn Objective>> {
    let key = name.to_ascii_lowercase();
    if EXTERNAL_SUITES.contains(&key.as_str()) {
        return Err(Error::Unavailable(name.to_string()));
    }
    let fixed = |expected: usize| match dim {
        Some(d) if d != expected => Err(Error::DimensionMismatch { expected, found: d }),
        _ => Ok(()),
    };
    let objective: Box<dyn Objective> = match key.as_str() {
        "rosenbrock" => Box::new(rosenbrock(dim.unwrap_or(2))?),
        "paraboloid" => Box::new(paraboloid(dim.unwrap_or(100))?),
        "rosenbrock2" => {
            fixed(2)?;
            Box::new(rosenbrock(2)?)
        }
        "paraboloid100" => {
            fixed(100)?;
            Box::new(paraboloid(100)?)
        }
        "branin2" => {
            fixed(2)?;
            Box::new(branin2())
        }
        "hartmann6" => {
            fixed(6)?;
            Box::new(hartmann6())
        }
        "branin2-500" => {
            let ambient = dim.unwrap_or(REGISTRY_AMBIENT_DIM);
            let spec = EmbeddingSpec::axis_aligned(ambient, (0..2).collect())?;
            Box::new(embed(branin2(), spec)?.named("branin2-500"))
        }
        "hartmann6-500r" => {
            let ambient = dim.unwrap_or(REGISTRY_AMBIENT_DIM);
            let spec = EmbeddingSpec::rotated(ambient, (0..6).collect(), REGISTRY_ROTATION_SEED)?;
            Box::new(embed(hartmann6(), spec)?.named("hartmann6-500r"))
        }
        _ => return Err(Error::UnknownFunction(name.to_string())),
    };
    Ok(objective)
}
