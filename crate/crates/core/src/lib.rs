//! Reactive Affine Shaker (RAS): derivative-free local search driven by an
//! adaptive, anisotropic search box.
//!
//! The box is spanned by `d` basis vectors. Each iteration samples a random
//! combination `Δ` of them, tries `x + Δ` and then `x - Δ`, and reshapes the
//! box with a rank-one map that stretches it along `Δ` on success and
//! squeezes it along `Δ` on failure. Only success/failure information is
//! used; function values are never modelled.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! tool and parallel campaign drivers live in the companion `ras` crate.
//!
//! ```
//! use ras_core::benchmarks::rosenbrock;
//! use ras_core::optimizer::{run, RasConfig};
//!
//! let f = rosenbrock(2).unwrap();
//! let config = RasConfig { max_evaluations: 1000, seed: 7, ..RasConfig::default() };
//! let result = run(&f, &config, None).unwrap();
//! assert!(result.evaluations_used <= 1000);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod benchmarks;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod optimizer;

pub use benchmarks::{Objective, Optimum};
pub use diagnostics::{MultiRunSummary, Trace, TraceRecord};
pub use error::{Error, Result};
pub use geometry::{Displacement, DomainBounds, SearchBox};
pub use optimizer::{run, RasConfig, RunResult, Status, StepOutcome, Variant};
