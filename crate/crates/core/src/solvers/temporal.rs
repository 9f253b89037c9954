use crate::dct::{cosine_forward, cosine_inverse, spectral_filter, temporal_seminorm_sq};
use crate::error::{Error, Result};
use crate::geometry::{lebesgue_norm, GridFunction};
use crate::radon::{forward, weighted_adjoint, ForwardModel, Volume};

use super::{check_data_len, conclude, numerical_failure, IterationRecord, IterationTrace, SolverConfig, StopMonitor, StopReason, Verdict};

/// Temporal variational regularization: a Landweber step followed by the
/// cosine-spectral solve penalizing `∂_t` in an `H⁻¹_γ`-type norm.
pub fn temporal_variational(model: &dyn ForwardModel, psi: &[f64], cfg: &SolverConfig) -> Result<(Volume, IterationTrace)> {
    run(model, psi, cfg, true)
}

/// Plain Landweber iteration `ϑ ← ϑ - τA*(Aϑ - ψ)` in the Hilbert quadrature.
pub fn landweber(model: &dyn ForwardModel, psi: &[f64], cfg: &SolverConfig) -> Result<(Volume, IterationTrace)> {
    run(model, psi, cfg, false)
}

fn to_volume(x: &GridFunction, layout: (usize, usize, f64)) -> Result<Volume> {
    Volume::new(layout.0, layout.1, layout.2, x.values().to_vec())
}

fn run(model: &dyn ForwardModel, psi: &[f64], cfg: &SolverConfig, filtered: bool) -> Result<(Volume, IterationTrace)> {
    cfg.validate()?;
    let range = check_data_len(model, psi, 2.0)?;
    let domain = model.domain_quadrature();
    let layout = model.volume_layout();
    if layout.0 * layout.1 * layout.1 != domain.len() {
        return Err(Error::Layout("operator domain is not a square image volume".into()));
    }
    let tau = cfg.resolve_tau(model)?;
    let (alpha, beta) = if filtered { (cfg.alpha, cfg.beta) } else { (0.0, 0.0) };
    let cell = domain.time_weights()[0] * domain.space_weights()[0];

    let psi = GridFunction::new(psi.to_vec(), range.clone())?;
    let initial = GridFunction::zeros(domain.clone());
    let mut x = initial.clone();
    let mut residual = psi.clone();
    residual.scale(-1.0);
    let d0 = lebesgue_norm(&residual, 2.0);

    let mut trace = IterationTrace {
        initial_discrepancy: d0,
        tau: Some(tau),
        ..Default::default()
    };
    let mut monitor = StopMonitor::new(cfg, d0);
    if monitor.satisfied_at_start() {
        trace.stop_reason = Some(StopReason::Threshold);
        return Ok((to_volume(&x, layout)?, trace));
    }

    for k in 1..=cfg.max_iters {
        let grad = weighted_adjoint(model, &residual)?;
        x.axpy(-tau, &grad)?;
        let mut penalty = 0.0;
        if filtered {
            let c = spectral_filter(&cosine_forward(&to_volume(&x, layout)?), tau, alpha, beta, cfg.gamma)?;
            if beta > 0.0 {
                penalty = 0.5 * beta * cell * temporal_seminorm_sq(&c, cfg.gamma);
            }
            x = GridFunction::new(cosine_inverse(&c).values, domain.clone())?;
        }
        if cfg.nonneg {
            x.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        }
        if !x.is_finite() {
            return Err(numerical_failure(k, "iterate became non-finite", &trace));
        }
        residual = forward(model, &x, &range)?;
        residual.axpy(-1.0, &psi)?;
        let d = lebesgue_norm(&residual, 2.0);
        if !d.is_finite() {
            return Err(numerical_failure(k, "discrepancy became non-finite", &trace));
        }
        if filtered && beta > 0.0 && cfg.nonneg {
            // the projection moved x off the filtered coefficients
            penalty = 0.5 * beta * cell * temporal_seminorm_sq(&cosine_forward(&to_volume(&x, layout)?), cfg.gamma);
        }
        let functional = 0.5 * d * d + 0.5 * alpha * lebesgue_norm(&x, 2.0).powi(2) + penalty;
        trace.records.push(IterationRecord {
            iteration: k,
            discrepancy: d,
            functional,
            step: tau,
            bound: None,
            interior_step: None,
        });
        if let Verdict::Stop(reason) = monitor.observe(k, d, &x) {
            let out = conclude(monitor, reason, x, initial, k, &mut trace);
            return Ok((to_volume(&out, layout)?, trace));
        }
    }
    unreachable!("the monitor stops at max_iters")
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::Quadrature;
    use crate::radon::{AngleMode, DynamicRadon, GeometrySpec};
    use crate::solvers::testing::Identity;
    use crate::solvers::StepRule;

    fn small_problem() -> (DynamicRadon, Vec<f64>) {
        let g = GeometrySpec::new(24, 5, 6, AngleMode::Rotating, 1.0).unwrap();
        let op = DynamicRadon::new(&g, 17).unwrap();
        let mut vol = Volume::zeros(6, 17, 1.0);
        for t in 0..6 {
            for i in 4..10 {
                for j in (5 + t)..(10 + t) {
                    vol.frame_mut(t)[i * 17 + j] = 1.0;
                }
            }
        }
        let sino = op.forward(&vol).unwrap();
        (op, sino.values)
    }

    #[test]
    fn landweber_on_identity_converges_geometrically() {
        let quad = Arc::new(Quadrature::uniform(2, 9, 0.5, 0.25).unwrap());
        let psi: Vec<f64> = (0..18).map(|i| i as f64 * 0.1 - 0.5).collect();
        let cfg = SolverConfig {
            tau: StepRule::Fixed { tau: 0.5 },
            max_iters: 30,
            stop_on_increase: false,
            ..Default::default()
        };
        let (vol, trace) = landweber(&Identity(quad), &psi, &cfg).unwrap();
        assert!((trace.records[0].discrepancy / trace.initial_discrepancy - 0.5).abs() < 1e-12);
        for w in trace.records[..20].windows(2) {
            assert!((w[1].discrepancy / w[0].discrepancy - 0.5).abs() < 1e-6);
        }
        for (a, b) in vol.values.iter().zip(&psi) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_penalties_reproduce_landweber() {
        let (op, psi) = small_problem();
        let cfg = SolverConfig { max_iters: 10, stop_on_increase: false, ..Default::default() };
        let (a, ta) = temporal_variational(&op, &psi, &cfg).unwrap();
        let (b, tb) = landweber(&op, &psi, &cfg).unwrap();
        assert_eq!(ta.len(), tb.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_spatial_penalty_is_damped_landweber() {
        let (op, psi) = small_problem();
        let tau = 0.9 / crate::radon::operator_norm_estimate(&op, 30, 1).unwrap();
        let alpha = 0.3;
        let cfg = SolverConfig {
            alpha,
            tau: StepRule::Fixed { tau },
            max_iters: 6,
            stop_on_increase: false,
            ..Default::default()
        };
        let (got, _) = temporal_variational(&op, &psi, &cfg).unwrap();

        let range = op.range_quadrature(2.0).unwrap();
        let psi_g = GridFunction::new(psi.clone(), range.clone()).unwrap();
        let mut x = GridFunction::zeros(op.domain_quadrature());
        for _ in 0..6 {
            let mut r = forward(&op, &x, &range).unwrap();
            r.axpy(-1.0, &psi_g).unwrap();
            x.axpy(-tau, &weighted_adjoint(&op, &r).unwrap()).unwrap();
            x.scale(1.0 / (1.0 + tau * alpha));
        }
        for (a, b) in got.values.iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn discrepancy_at_stop_never_exceeds_the_start() {
        let (op, mut psi) = small_problem();
        for (i, v) in psi.iter_mut().enumerate() {
            *v += 0.05 * ((i * 37 % 101) as f64 / 50.0 - 1.0);
        }
        let cfg = SolverConfig { beta: 50.0, gamma: 10.0, max_iters: 200, ..Default::default() };
        let (_, trace) = temporal_variational(&op, &psi, &cfg).unwrap();
        assert!(trace.final_discrepancy() <= trace.initial_discrepancy);
        assert!(trace.len() <= 200);
        let d: Vec<f64> = trace.records.iter().map(|r| r.discrepancy).collect();
        assert!(d[0] < trace.initial_discrepancy && d[1] < d[0] && d[2] < d[1]);
    }

    #[test]
    fn nonnegativity_is_enforced() {
        let (op, psi) = small_problem();
        let cfg = SolverConfig { beta: 10.0, nonneg: true, max_iters: 15, ..Default::default() };
        let (vol, _) = temporal_variational(&op, &psi, &cfg).unwrap();
        assert!(vol.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn mismatched_data_is_rejected() {
        let (op, psi) = small_problem();
        assert!(matches!(
            landweber(&op, &psi[1..], &SolverConfig::default()),
            Err(Error::Shape(_))
        ));
    }
}
