use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    bochner_norm, bochner_smoothness, conjugate, constant_for_power, dual_norm, duality_map_bochner,
    smoothness_constant_lebesgue, Exponents, GridFunction, SpaceSpec,
};
use crate::radon::{forward, weighted_adjoint, DynamicRadon, ForwardModel, Volume};

use super::{
    check_data_len, conclude, numerical_failure, IterationRecord, IterationTrace, SolverConfig, SolverMode,
    StopMonitor, StopReason, Verdict,
};

/// Upper bound for the Bregman distance between `ϑ_0 = 0` and the Tikhonov
/// minimizer. From `T_α(ϑ_α) ≤ T_α(0)` one gets `‖ϑ_α‖^v ≤ v‖ψ‖^u/(uα)`,
/// and `D(0, ϑ_α) = ‖ϑ_α‖^v / v*`.
pub fn initial_bound(spec: &SpaceSpec, psi_norm: f64, alpha: f64, safety: f64) -> f64 {
    safety * spec.v * psi_norm.powf(spec.u) / (spec.u * conjugate(spec.v) * alpha)
}

fn exponents(spec: &SpaceSpec, mode: SolverMode) -> (Exponents, Exponents) {
    match mode {
        SolverMode::Dynamic => (spec.primal(), spec.data()),
        SolverMode::Static => (Exponents::uniform(spec.r), Exponents::uniform(spec.s)),
    }
}

/// Smoothness constant of the dual primal space for the power `v*`.
fn dual_constant(spec: &SpaceSpec, mode: SolverMode) -> Result<f64> {
    let vstar = conjugate(spec.v);
    let known = match mode {
        SolverMode::Dynamic => bochner_smoothness(spec.primal().conjugate())?,
        SolverMode::Static => smoothness_constant_lebesgue(conjugate(spec.r)),
    };
    constant_for_power(known, vstar)
}

/// Gradient descent on `T_α(ϑ) = ‖Aϑ - ψ‖^u/u + α‖ϑ‖^v/v` carried out in the
/// dual of the primal space, with the step size and Bregman bound update
/// driven by the smoothness constant of that dual space.
pub fn dual_tikhonov(
    model: &dyn ForwardModel,
    psi: &[f64],
    spec: &SpaceSpec,
    cfg: &SolverConfig,
) -> Result<(Volume, IterationTrace)> {
    cfg.validate()?;
    spec.validate()?;
    let alpha = cfg.alpha;
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!("the dual method needs α > 0, got {alpha}")));
    }
    if cfg.mode == SolverMode::Static && model.n_time() != 1 {
        return Err(Error::Parameter("static mode runs on a single time step".into()));
    }
    let layout = model.volume_layout();
    let (xq, yq) = exponents(spec, cfg.mode);
    let (u, v) = (spec.u, spec.v);
    let vstar = conjugate(v);
    let g = dual_constant(spec, cfg.mode)?;

    let range = check_data_len(model, psi, yq.inner)?;
    let domain = model.domain_quadrature();
    let psi = GridFunction::new(psi.to_vec(), range.clone())?;
    let initial = GridFunction::zeros(domain.clone());
    let mut x = initial.clone();
    let mut xs = initial.clone();
    let mut residual = psi.clone();
    residual.scale(-1.0);
    let d0 = bochner_norm(&residual, yq.outer, yq.inner);
    let mut bound = initial_bound(spec, d0, alpha, cfg.r0_safety);

    let mut trace = IterationTrace {
        initial_discrepancy: d0,
        ..Default::default()
    };
    let to_volume = |x: GridFunction| Volume::new(layout.0, layout.1, layout.2, x.into_values());
    let mut monitor = StopMonitor::new(cfg, d0);
    if monitor.satisfied_at_start() {
        trace.stop_reason = Some(StopReason::Threshold);
        return Ok((to_volume(x)?, trace));
    }

    for k in 1..=cfg.max_iters {
        let ju = duality_map_bochner(&residual, u, yq);
        let mut theta = weighted_adjoint(model, &ju)?;
        if !x.is_zero() {
            theta.axpy(alpha, &duality_map_bochner(&x, v, xq))?;
        }
        let norm_theta = dual_norm(&theta, xq);
        if !norm_theta.is_finite() {
            return Err(numerical_failure(k, "gradient became non-finite", &trace));
        }
        if norm_theta == 0.0 {
            trace.stop_reason = Some(StopReason::Stationary);
            trace.returned_iteration = k - 1;
            return Ok((to_volume(x)?, trace));
        }
        let theta_pow = norm_theta.powf(vstar);
        let interior = (alpha * bound / (g * theta_pow)).powf(1.0 / (vstar - 1.0));
        let (mu, is_interior) = if interior < 1.0 / alpha { (interior, true) } else { (1.0 / alpha, false) };
        let next_bound = (1.0 - mu * alpha) * bound + mu.powf(vstar) * (g / vstar) * theta_pow;

        xs.axpy(-mu, &theta)?;
        x = duality_map_bochner(&xs, vstar, xq.conjugate());
        if !x.is_finite() {
            return Err(numerical_failure(k, "iterate became non-finite", &trace));
        }
        residual = forward(model, &x, &range)?;
        residual.axpy(-1.0, &psi)?;
        let d = bochner_norm(&residual, yq.outer, yq.inner);
        let xn = bochner_norm(&x, xq.outer, xq.inner);
        trace.records.push(IterationRecord {
            iteration: k,
            discrepancy: d,
            functional: d.powf(u) / u + alpha * xn.powf(v) / v,
            step: mu,
            bound: Some(bound),
            interior_step: Some(is_interior),
        });
        bound = next_bound;
        if let Verdict::Stop(reason) = monitor.observe(k, d, &x) {
            let out = conclude(monitor, reason, x, initial, k, &mut trace);
            return Ok((to_volume(out)?, trace));
        }
    }
    unreachable!("the monitor stops at max_iters")
}

/// Frame-by-frame reconstruction with a common `α`.
#[derive(Clone, Debug)]
pub struct StaticSolution {
    pub volume: Volume,
    pub traces: Vec<IterationTrace>,
    /// `‖Aϑ - ψ‖` of the stacked result in `L²(0,T; W̄_s)`.
    pub discrepancy: f64,
}

/// Runs the dual method independently on every time step. `deltas[k]` is
/// the noise level of step `k` in that step's data norm.
pub fn dual_tikhonov_static(
    op: &DynamicRadon,
    psi: &[f64],
    spec: &SpaceSpec,
    cfg: &SolverConfig,
    deltas: &[f64],
) -> Result<StaticSolution> {
    let nt = op.n_time();
    if deltas.len() != nt {
        return Err(Error::Shape(format!("{} noise levels for {nt} time steps", deltas.len())));
    }
    let frame_len = op.geometry().frame_len();
    if psi.len() != nt * frame_len {
        return Err(Error::Shape(format!("data has {} samples, expected {}", psi.len(), nt * frame_len)));
    }
    let results: Vec<Result<(Volume, IterationTrace)>> = (0..nt)
        .into_par_iter()
        .map(|k| {
            let frame = op.frame(k)?;
            let cfg_k = SolverConfig {
                delta: deltas[k],
                mode: SolverMode::Static,
                ..cfg.clone()
            };
            dual_tikhonov(&frame, &psi[k * frame_len..(k + 1) * frame_len], spec, &cfg_k)
        })
        .collect();

    let (_, size, horizon) = op.volume_layout();
    let mut volume = Volume::zeros(nt, size, horizon);
    let mut traces = Vec::with_capacity(nt);
    for (k, r) in results.into_iter().enumerate() {
        let (frame, trace) = r?;
        volume.frame_mut(k).copy_from_slice(&frame.values);
        traces.push(trace);
    }
    let range = op.range_quadrature(spec.s)?;
    let mut residual = forward(op, &volume.to_grid(), &range)?;
    residual.axpy(-1.0, &GridFunction::new(psi.to_vec(), range)?)?;
    let discrepancy = bochner_norm(&residual, 2.0, spec.s);
    Ok(StaticSolution { volume, traces, discrepancy })
}
