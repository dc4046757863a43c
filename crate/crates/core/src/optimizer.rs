//! The Reactive Affine Shaker main loop.
//!
//! Each iteration draws `Δ` from the current box and tries `x + Δ`. If that
//! does not improve, `x - Δ` is tried (unless the single-shot ablation is
//! selected). An improving shot moves the point and dilates the box along
//! `Δ`; a failed iteration keeps the point and contracts the box along `Δ`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::Objective;
use crate::diagnostics::{record_iteration, Trace};
use crate::error::{config_err, Error, Result};
use crate::geometry::{init_box, sample_displacement, DomainBounds, SearchBox};

/// Random stream used by every run. Seeded with [`SeedableRng::seed_from_u64`].
pub type Stream = ChaCha8Rng;

/// Algorithm variant, including the two ablations and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Variant {
    /// Rank-one box updates with double-shot probing.
    #[default]
    Full,
    /// Uniform box scaling instead of the rank-one update.
    Isotropic,
    /// No `x - Δ` probe after a failed first shot.
    SingleShot,
    IsotropicSingleShot,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::Isotropic,
        Variant::SingleShot,
        Variant::IsotropicSingleShot,
    ];

    pub fn is_isotropic(self) -> bool {
        matches!(self, Variant::Isotropic | Variant::IsotropicSingleShot)
    }

    pub fn is_double_shot(self) -> bool {
        matches!(self, Variant::Full | Variant::Isotropic)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Isotropic => "isotropic",
            Variant::SingleShot => "single-shot",
            Variant::IsotropicSingleShot => "isotropic-single-shot",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| config_err(format!("unknown variant `{s}` (expected full|isotropic|single-shot|isotropic-single-shot)")))
    }
}

/// Run parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RasConfig {
    /// Initial box edge as a fraction of each coordinate range.
    pub eta: f64,
    /// Factor applied along `Δ` after an improving shot.
    pub rho_dil: f64,
    /// Factor applied along `Δ` after a failed iteration.
    pub rho_con: f64,
    pub variant: Variant,
    /// Hard cap on objective calls, including the evaluation of the start point.
    pub max_evaluations: usize,
    /// Stop after this many consecutive non-improving iterations.
    pub stagnation_limit: Option<usize>,
    /// Stop once the longest basis vector is shorter than this fraction of
    /// the domain diagonal.
    pub min_box_ratio_stop: Option<f64>,
    pub seed: u64,
}

impl Default for RasConfig {
    fn default() -> Self {
        Self {
            eta: 0.2,
            rho_dil: 5.0,
            rho_con: 0.2,
            variant: Variant::Full,
            max_evaluations: 1000,
            stagnation_limit: None,
            min_box_ratio_stop: None,
            seed: 0,
        }
    }
}

impl RasConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(config_err(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if !(self.rho_con > 0.0 && self.rho_con < 1.0) {
            return Err(config_err(format!(
                "rho_con must lie in (0, 1), got {}",
                self.rho_con
            )));
        }
        if !(self.rho_dil > 1.0 && self.rho_dil.is_finite()) {
            return Err(config_err(format!(
                "rho_dil must be finite and > 1, got {}",
                self.rho_dil
            )));
        }
        if self.max_evaluations < 2 {
            return Err(config_err("max_evaluations must be >= 2"));
        }
        if self.stagnation_limit == Some(0) {
            return Err(config_err("stagnation_limit must be positive"));
        }
        if let Some(r) = self.min_box_ratio_stop {
            if !(r > 0.0 && r.is_finite()) {
                return Err(config_err("min_box_ratio_stop must be positive"));
            }
        }
        Ok(())
    }
}

/// How an iteration resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StepOutcome {
    FirstShot,
    SecondShot,
    /// Every attempted shot failed (also used for a failed single shot).
    DoubleFailure,
}

impl StepOutcome {
    pub fn is_success(self) -> bool {
        !matches!(self, StepOutcome::DoubleFailure)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StepOutcome::FirstShot => "first-shot",
            StepOutcome::SecondShot => "second-shot",
            StepOutcome::DoubleFailure => "double-failure",
        }
    }
}

impl fmt::Display for StepOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-shot" => Ok(StepOutcome::FirstShot),
            "second-shot" => Ok(StepOutcome::SecondShot),
            "double-failure" => Ok(StepOutcome::DoubleFailure),
            _ => Err(config_err(format!("unknown step outcome `{s}`"))),
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Status {
    BudgetExhausted,
    Stagnated,
    BoxCollapsed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::BudgetExhausted => "budget-exhausted",
            Status::Stagnated => "stagnated",
            Status::BoxCollapsed => "box-collapsed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mutable state of one run.
///
/// Moves are accepted only on strict improvement, so the current point is
/// always the incumbent; `best_x`/`best_f` are views of `x`/`f_x`.
#[derive(Debug, Clone)]
pub struct RunState {
    pub x: Vec<f64>,
    pub f_x: f64,
    pub sbox: SearchBox,
    pub evaluations_used: usize,
    pub iterations: usize,
    /// Consecutive iterations without improvement.
    pub since_improvement: usize,
}

impl RunState {
    /// Evaluates `x0` (one objective call) and builds the initial box.
    pub fn new<O: Objective + ?Sized>(
        objective: &O,
        config: &RasConfig,
        x0: Vec<f64>,
    ) -> Result<Self> {
        let bounds = objective.bounds();
        if x0.len() != bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: bounds.dim(),
                found: x0.len(),
            });
        }
        if !bounds.contains(&x0) {
            return Err(config_err("start point lies outside the bounds"));
        }
        let sbox = init_box(bounds, config.eta)?;
        let f_x = objective.evaluate(&x0);
        Ok(Self {
            x: x0,
            f_x,
            sbox,
            evaluations_used: 1,
            iterations: 0,
            since_improvement: 0,
        })
    }

    pub fn best_x(&self) -> &[f64] {
        &self.x
    }

    pub fn best_f(&self) -> f64 {
        self.f_x
    }
}

/// What one call to [`ras_step`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub outcome: StepOutcome,
    pub f_first_shot: f64,
    pub f_second_shot: Option<f64>,
    /// Some evaluated shot returned NaN or an infinity.
    pub non_finite: bool,
    /// Objective calls made by this step (1 or 2).
    pub evaluations: usize,
}

/// Strict improvement. Non-finite candidates never improve; a NaN incumbent
/// is beaten by any finite value.
fn improves(candidate: f64, current: f64) -> bool {
    candidate.is_finite() && (candidate < current || current.is_nan())
}

/// Componentwise projection onto the bounds.
pub fn clamp_to_bounds(x: &[f64], bounds: &DomainBounds) -> Vec<f64> {
    bounds.clamp(x)
}

/// One double-shot iteration. Uses one or two objective calls.
pub fn ras_step<O, R>(
    state: &mut RunState,
    objective: &O,
    config: &RasConfig,
    rng: &mut R,
) -> Result<StepReport>
where
    O: Objective + ?Sized,
    R: rand::Rng + ?Sized,
{
    let remaining = config
        .max_evaluations
        .saturating_sub(state.evaluations_used);
    if remaining == 0 {
        return Err(config_err("evaluation budget already exhausted"));
    }
    let bounds = objective.bounds();
    let delta = sample_displacement(&state.sbox, rng)?;

    let first = bounds.clamp(&delta.offset(&state.x, 1.0));
    let f_first = objective.evaluate(&first);
    let mut report = StepReport {
        outcome: StepOutcome::DoubleFailure,
        f_first_shot: f_first,
        f_second_shot: None,
        non_finite: !f_first.is_finite(),
        evaluations: 1,
    };

    let mut accepted = None;
    if improves(f_first, state.f_x) {
        accepted = Some((first, f_first));
        report.outcome = StepOutcome::FirstShot;
    } else if config.variant.is_double_shot() && remaining >= 2 {
        let second = bounds.clamp(&delta.offset(&state.x, -1.0));
        let f_second = objective.evaluate(&second);
        report.evaluations = 2;
        report.f_second_shot = Some(f_second);
        report.non_finite |= !f_second.is_finite();
        if improves(f_second, state.f_x) {
            accepted = Some((second, f_second));
            report.outcome = StepOutcome::SecondShot;
        }
    }

    let rho = match accepted {
        Some((x, f)) => {
            state.x = x;
            state.f_x = f;
            state.since_improvement = 0;
            config.rho_dil
        }
        None => {
            state.since_improvement += 1;
            config.rho_con
        }
    };
    // Δ and -Δ give the same rank-one map, so both shots share one update.
    state.sbox = if config.variant.is_isotropic() {
        state.sbox.apply_isotropic(rho)?
    } else {
        state.sbox.apply_affine(&delta, rho)?
    };
    state.evaluations_used += report.evaluations;
    state.iterations += 1;
    Ok(report)
}

/// Final outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub status: Status,
    pub evaluations_used: usize,
    pub iterations: usize,
    pub trace: Trace,
    pub seed: u64,
    pub config: RasConfig,
}

/// Runs the optimizer until the budget, stagnation limit or box collapse stops
/// it. Without `x0` the start point is drawn uniformly in the bounds from the
/// run's stream, before any displacement.
pub fn run<O: Objective + ?Sized>(
    objective: &O,
    config: &RasConfig,
    x0: Option<&[f64]>,
) -> Result<RunResult> {
    config.validate()?;
    let bounds = objective.bounds();
    if objective.dim() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            found: objective.dim(),
        });
    }
    let mut rng = Stream::seed_from_u64(config.seed);
    let start = match x0 {
        Some(x) => x.to_vec(),
        None => bounds.sample_uniform(&mut rng),
    };
    let mut state = RunState::new(objective, config, start)?;
    let mut trace = Trace::new(config.clone(), state.f_x, state.evaluations_used);
    let stop_len = config.min_box_ratio_stop.map(|r| r * bounds.diagonal());

    let status = loop {
        if state.evaluations_used >= config.max_evaluations {
            break Status::BudgetExhausted;
        }
        let report = ras_step(&mut state, objective, config, &mut rng)?;
        trace.push(record_iteration(&state, &report, objective));
        debug_assert!(state.evaluations_used <= config.max_evaluations);

        if state.sbox.is_collapsed() || stop_len.is_some_and(|s| state.sbox.metrics().max_len < s) {
            break Status::BoxCollapsed;
        }
        if config
            .stagnation_limit
            .is_some_and(|n| state.since_improvement >= n)
        {
            break Status::Stagnated;
        }
    };

    Ok(RunResult {
        best_f: state.f_x,
        best_x: state.x,
        status,
        evaluations_used: state.evaluations_used,
        iterations: state.iterations,
        trace,
        seed: config.seed,
        config: config.clone(),
    })
}
