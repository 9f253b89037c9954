//! Iterative reconstruction: the dual Tikhonov method, temporal variational
//! regularization, Landweber iteration and a filtered back-projection
//! baseline.

mod dual;
mod fbp;
mod temporal;

pub use dual::{dual_tikhonov, dual_tikhonov_static, initial_bound, StaticSolution};
pub use fbp::{fbp, fbp_frame, ram_lak_kernel};
pub use temporal::{landweber, temporal_variational};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridFunction;
use crate::radon::{operator_norm_estimate, ForwardModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum StepRule {
    /// `τ = safety / ‖A*A‖` with `‖A*A‖` from seeded power iteration.
    Auto { safety: f64, iters: usize, seed: u64 },
    Fixed { tau: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Auto { safety: 0.95, iters: 50, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Each time step on its own, `X = L^r`, `Y = L^s`.
    Static,
    /// The full Lebesgue-Bochner setting.
    Dynamic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: StepRule,
    /// Discrepancy factor, `> 1`.
    pub rho: f64,
    /// Noise level in the data norm the solver measures discrepancies in.
    pub delta: f64,
    pub max_iters: usize,
    pub nonneg: bool,
    pub mode: SolverMode,
    /// Stop after two consecutive discrepancy increases.
    pub stop_on_increase: bool,
    /// Safety factor on the initial Bregman bound of the dual method.
    pub r0_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 1.0,
            tau: StepRule::default(),
            rho: 1.05,
            delta: 0.0,
            max_iters: 1000,
            nonneg: false,
            mode: SolverMode::Dynamic,
            stop_on_increase: true,
            r0_safety: 10.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::Parameter(format!("ρ = {} must exceed 1", self.rho)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter(format!("δ = {} must be nonnegative", self.delta)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite() && self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter("α and β must be nonnegative".into()));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Parameter(format!("γ = {} must be positive", self.gamma)));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        if !(self.r0_safety >= 1.0 && self.r0_safety.is_finite()) {
            return Err(Error::Parameter(format!("r0_safety = {} must be at least 1", self.r0_safety)));
        }
        match self.tau {
            StepRule::Auto { safety, iters, .. } => {
                if !(safety > 0.0 && safety <= 2.0) || iters == 0 {
                    return Err(Error::Parameter("auto step needs safety in (0, 2] and iters ≥ 1".into()));
                }
            }
            StepRule::Fixed { tau } => {
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::Parameter(format!("τ = {tau} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Resolves the step size for `model`.
    pub fn resolve_tau(&self, model: &dyn ForwardModel) -> Result<f64> {
        match self.tau {
            StepRule::Fixed { tau } => Ok(tau),
            StepRule::Auto { safety, iters, seed } => {
                let lambda = operator_norm_estimate(model, iters, seed)?;
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::NumericalFailure {
                        iteration: 0,
                        message: format!("operator norm estimate {lambda} is unusable"),
                        trace: Box::default(),
                    });
                }
                Ok(safety / lambda)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Discrepancy reached `ρδ`.
    Threshold,
    /// Discrepancy increased twice in a row; the best iterate is returned.
    Stagnation,
    MaxIters,
    /// The gradient vanished exactly.
    Stationary,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Threshold => "threshold",
            StopReason::Stagnation => "stagnation",
            StopReason::MaxIters => "max_iters",
            StopReason::Stationary => "stationary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub discrepancy: f64,
    /// Tikhonov functional for the dual method, the temporal energy otherwise.
    pub functional: f64,
    pub step: f64,
    /// Bregman bound `R_k` before the step (dual method only).
    pub bound: Option<f64>,
    /// Whether the step size took the interior branch of the minimum.
    pub interior_step: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub initial_discrepancy: f64,
    pub records: Vec<IterationRecord>,
    pub stop_reason: Option<StopReason>,
    /// Index of the returned iterate (0 is the initial guess).
    pub returned_iteration: usize,
    pub tau: Option<f64>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Discrepancy of the returned iterate.
    pub fn final_discrepancy(&self) -> f64 {
        if self.returned_iteration == 0 {
            self.initial_discrepancy
        } else {
            self.records[self.returned_iteration - 1].discrepancy
        }
    }
}

/// Discrepancy-principle and stagnation bookkeeping shared by all solvers.
pub(crate) struct StopMonitor {
    threshold: f64,
    stop_on_increase: bool,
    max_iters: usize,
    last: f64,
    increases: usize,
    best: (usize, f64, Option<GridFunction>),
}

pub(crate) enum Verdict {
    Continue,
    Stop(StopReason),
}

impl StopMonitor {
    pub fn new(cfg: &SolverConfig, initial: f64) -> Self {
        Self {
            // without a noise level only the other rules apply
            threshold: if cfg.delta > 0.0 { cfg.rho * cfg.delta } else { f64::NEG_INFINITY },
            stop_on_increase: cfg.stop_on_increase,
            max_iters: cfg.max_iters,
            last: initial,
            increases: 0,
            best: (0, initial, None),
        }
    }

    /// Initial guess already satisfies the discrepancy principle.
    pub fn satisfied_at_start(&self) -> bool {
        self.last <= self.threshold || self.last == 0.0
    }

    pub fn observe(&mut self, k: usize, discrepancy: f64, iterate: &GridFunction) -> Verdict {
        if discrepancy < self.best.1 {
            self.best = (k, discrepancy, None);
            if self.stop_on_increase {
                self.best.2 = Some(iterate.clone());
            }
        }
        if discrepancy <= self.threshold {
            return Verdict::Stop(StopReason::Threshold);
        }
        if discrepancy > self.last {
            self.increases += 1;
        } else {
            self.increases = 0;
        }
        self.last = discrepancy;
        if self.stop_on_increase && self.increases >= 2 {
            return Verdict::Stop(StopReason::Stagnation);
        }
        if k >= self.max_iters {
            return Verdict::Stop(StopReason::MaxIters);
        }
        Verdict::Continue
    }

    /// Best iterate so far and its index; `None` means the initial guess.
    pub fn take_best(&mut self) -> (usize, Option<GridFunction>) {
        (self.best.0, self.best.2.take())
    }
}

/// Finishes a run: picks the returned iterate according to the stop reason.
pub(crate) fn conclude(
    mut monitor: StopMonitor,
    reason: StopReason,
    last: GridFunction,
    initial: GridFunction,
    k: usize,
    trace: &mut IterationTrace,
) -> GridFunction {
    trace.stop_reason = Some(reason);
    if reason == StopReason::Stagnation {
        let (idx, best) = monitor.take_best();
        trace.returned_iteration = idx;
        best.unwrap_or(initial)
    } else {
        trace.returned_iteration = k;
        last
    }
}

pub(crate) fn numerical_failure(k: usize, message: impl Into<String>, trace: &IterationTrace) -> Error {
    Error::NumericalFailure {
        iteration: k,
        message: message.into(),
        trace: Box::new(trace.clone()),
    }
}

pub(crate) fn check_data_len(model: &dyn ForwardModel, psi: &[f64], s: f64) -> Result<std::sync::Arc<crate::geometry::Quadrature>> {
    let range = model.range_quadrature(s)?;
    if psi.len() != range.len() {
        return Err(Error::Shape(format!("data has {} samples, operator range {}", psi.len(), range.len())));
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("data contains non-finite values".into()));
    }
    Ok(range)
}
