//! Simulation, reconstruction, evaluation, parameter sweeps and result tables.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{bochner_norm, Exponents, GridFunction, SpaceSpec};
use crate::metrics::{psnr_mean, relative_error, resample, ssim_mean, MetricReport};
use crate::phantoms::{add_noise, frame_noise_levels};
use crate::radon::{forward, DynamicRadon, ForwardModel, GeometrySpec, Sinogram, Volume};
use crate::solvers::{
    dual_tikhonov, dual_tikhonov_static, fbp, landweber, temporal_variational, IterationTrace, SolverConfig,
    SolverMode, StepRule,
};

use super::config::{ExperimentConfig, NoiseConfig, PhantomKind, SolverKind};

/// Everything a reconstruction is judged against.
#[derive(Clone, Debug)]
pub struct Problem {
    /// Ground truth on the generation grid.
    pub truth_generation: Volume,
    /// Ground truth resampled onto the reconstruction grid.
    pub truth: Volume,
    pub clean: Sinogram,
    pub noisy: Sinogram,
    /// Operator on the reconstruction grid.
    pub op: DynamicRadon,
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub method: SolverKind,
    pub volume: Volume,
    /// One trace for dynamic solvers, one per time step for the static
    /// dual method, none for FBP.
    pub traces: Vec<IterationTrace>,
    /// `‖Aϑ - ψ‖` in `L²(0,T; L²)` with the data weights.
    pub discrepancy: f64,
}

impl Reconstruction {
    /// Returned iteration index (the largest over time steps for the static method).
    pub fn iterations(&self) -> usize {
        self.traces.iter().map(|t| t.returned_iteration).max().unwrap_or(0)
    }

    pub fn stop_reason(&self) -> String {
        let reasons: Vec<&str> = self
            .traces
            .iter()
            .map(|t| t.stop_reason.map(|r| r.as_str()).unwrap_or("none"))
            .collect();
        match reasons.first() {
            None => "direct".into(),
            Some(first) if reasons.iter().all(|r| r == first) => first.to_string(),
            Some(_) => "mixed".into(),
        }
    }
}

pub fn phantom_volume(cfg: &ExperimentConfig, size: usize) -> Result<Volume> {
    match cfg.phantom {
        PhantomKind::Intensity => cfg.intensity.generate(cfg.n_frames, size),
        PhantomKind::Mass => cfg.mass.generate(cfg.n_frames, size),
    }
}

/// Generates the phantom, its sinogram on the generation grid and the noisy data.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Problem> {
    cfg.validate()?;
    let truth_generation = phantom_volume(cfg, cfg.generation_resolution)?;
    let generator = DynamicRadon::new(&cfg.geometry, cfg.generation_resolution)?;
    let clean = generator.forward(&truth_generation)?;
    let (noisy, _) = add_noise(&clean, cfg.noise.std, cfg.noise.seed, Exponents::uniform(2.0))?;
    let truth = resample(&truth_generation, cfg.reconstruction_resolution);
    let op = DynamicRadon::new(&cfg.geometry, cfg.reconstruction_resolution)?;
    Ok(Problem { truth_generation, truth, clean, noisy, op })
}

/// Norm of the seeded noise in `L^outer(0,T; L^inner)` of the data space,
/// unless the config pins it.
pub fn noise_level(geometry: &GeometrySpec, noise: &NoiseConfig, data: Exponents) -> Result<f64> {
    if let Some(d) = noise.delta {
        return Ok(d);
    }
    Ok(add_noise(&Sinogram::zeros(geometry.clone()), noise.std, noise.seed, data)?.1)
}

/// Per-step noise norms in `L^s` of the data space.
pub fn frame_noise(geometry: &GeometrySpec, noise: &NoiseConfig, s: f64) -> Result<Vec<f64>> {
    if let Some(d) = noise.delta {
        return Ok(vec![d; geometry.n_time_steps]);
    }
    let zero = Sinogram::zeros(geometry.clone());
    let (pure, _) = add_noise(&zero, noise.std, noise.seed, Exponents::uniform(s))?;
    frame_noise_levels(&zero, &pure, s)
}

fn hilbert_discrepancy(op: &DynamicRadon, vol: &Volume, data: &Sinogram) -> Result<f64> {
    let range = op.range_quadrature(2.0)?;
    let mut r = forward(op, &vol.to_grid(), &range)?;
    r.axpy(-1.0, &GridFunction::new(data.values.clone(), range)?)?;
    Ok(bochner_norm(&r, 2.0, 2.0))
}

/// Runs one solver on `data`. Noise levels for the stopping rules are
/// recomputed from the seed in the norm each solver measures.
pub fn reconstruct(
    op: &DynamicRadon,
    data: &Sinogram,
    kind: SolverKind,
    spaces: &SpaceSpec,
    solver: &SolverConfig,
    noise: &NoiseConfig,
) -> Result<Reconstruction> {
    let g = op.geometry();
    if data.geometry.n_time_steps != g.n_time_steps || data.geometry.frame_len() != g.frame_len() {
        return Err(Error::Shape("sinogram does not match the reconstruction geometry".into()));
    }
    let (volume, traces) = match kind {
        SolverKind::Fbp => (fbp(data, op.size())?, vec![]),
        SolverKind::Temporal | SolverKind::Landweber => {
            let cfg = SolverConfig {
                delta: noise_level(g, noise, Exponents::uniform(2.0))?,
                ..solver.clone()
            };
            let run = if kind == SolverKind::Temporal { temporal_variational } else { landweber };
            let (v, t) = run(op, &data.values, &cfg)?;
            (v, vec![t])
        }
        SolverKind::Dual => {
            let cfg = SolverConfig {
                delta: noise_level(g, noise, spaces.data())?,
                mode: SolverMode::Dynamic,
                ..solver.clone()
            };
            let (v, t) = dual_tikhonov(op, &data.values, spaces, &cfg)?;
            (v, vec![t])
        }
        SolverKind::DualStatic => {
            let deltas = frame_noise(g, noise, spaces.s)?;
            let sol = dual_tikhonov_static(op, &data.values, spaces, solver, &deltas)?;
            (sol.volume, sol.traces)
        }
    };
    let discrepancy = hilbert_discrepancy(op, &volume, data)?;
    Ok(Reconstruction { method: kind, volume, traces, discrepancy })
}

pub fn evaluate(truth: &Volume, reco: &Reconstruction, spaces: &SpaceSpec) -> Result<MetricReport> {
    Ok(MetricReport {
        rel_l2_error: relative_error(&reco.volume, truth, Exponents::uniform(2.0))?,
        rel_error_in_norm: relative_error(&reco.volume, truth, spaces.primal())?,
        mean_ssim: ssim_mean(&reco.volume, truth)?,
        mean_psnr: psnr_mean(&reco.volume, truth)?,
        discrepancy: reco.discrepancy,
        iterations: reco.iterations(),
    })
}

/// Simulates, reconstructs with the configured solver and evaluates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Problem, Reconstruction, MetricReport)> {
    let problem = simulate(cfg)?;
    let reco = reconstruct(&problem.op, &problem.noisy, cfg.solver, &cfg.spaces, &cfg.solver_config, &cfg.noise)?;
    let report = evaluate(&problem.truth, &reco, &cfg.spaces)?;
    Ok((problem, reco, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rel_l2_error: Option<f64>,
    pub rel_error_in_norm: Option<f64>,
    pub mean_ssim: Option<f64>,
    pub mean_psnr: Option<f64>,
    pub discrepancy: Option<f64>,
    pub iterations: Option<usize>,
    pub stop_reason: String,
    /// Empty unless the run failed.
    pub error: String,
}

impl SweepRow {
    fn new(method: SolverKind, solver: &SolverConfig, outcome: Result<(MetricReport, String)>) -> Self {
        let mut row = SweepRow {
            method: method.as_str().into(),
            alpha: solver.alpha,
            beta: solver.beta,
            gamma: solver.gamma,
            rel_l2_error: None,
            rel_error_in_norm: None,
            mean_ssim: None,
            mean_psnr: None,
            discrepancy: None,
            iterations: None,
            stop_reason: String::new(),
            error: String::new(),
        };
        match outcome {
            Ok((m, reason)) => {
                row.rel_l2_error = Some(m.rel_l2_error);
                row.rel_error_in_norm = Some(m.rel_error_in_norm);
                row.mean_ssim = Some(m.mean_ssim);
                row.mean_psnr = Some(m.mean_psnr);
                row.discrepancy = Some(m.discrepancy);
                row.iterations = Some(m.iterations);
                row.stop_reason = reason;
            }
            Err(e) => {
                row.stop_reason = if e.is_numerical() { "numerical_failure".into() } else { "error".into() };
                row.error = e.to_string();
            }
        }
        row
    }
}

fn grid_or(values: &[f64], fallback: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    }
}

/// Replaces an automatic step rule by its resolved value so that every run
/// of a sweep shares one power iteration.
fn fixed_step(solver: &SolverConfig, op: &DynamicRadon) -> Result<SolverConfig> {
    Ok(SolverConfig {
        tau: StepRule::Fixed { tau: solver.resolve_tau(op)? },
        ..solver.clone()
    })
}

/// Runs `kind` for every `(γ, β, α)` of the grids on one simulated problem.
/// Rows come back sorted by `(γ, β, α)`; a failing run fills its error column.
pub fn sweep_problem(
    problem: &Problem,
    cfg: &ExperimentConfig,
    kind: SolverKind,
    grid: (&[f64], &[f64], &[f64]),
) -> Result<Vec<SweepRow>> {
    let base = &cfg.solver_config;
    let mut points = Vec::new();
    for gamma in grid_or(grid.2, base.gamma) {
        for beta in grid_or(grid.1, base.beta) {
            for alpha in grid_or(grid.0, base.alpha) {
                points.push((gamma, beta, alpha));
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite sweep values"));
    points.dedup();
    let shared = match kind {
        SolverKind::Temporal | SolverKind::Landweber => fixed_step(base, &problem.op)?,
        _ => base.clone(),
    };
    Ok(points
        .par_iter()
        .map(|&(gamma, beta, alpha)| {
            let solver = SolverConfig { alpha, beta, gamma, ..shared.clone() };
            let outcome = solver.validate().and_then(|_| {
                let reco = reconstruct(&problem.op, &problem.noisy, kind, &cfg.spaces, &solver, &cfg.noise)?;
                Ok((evaluate(&problem.truth, &reco, &cfg.spaces)?, reco.stop_reason()))
            });
            SweepRow::new(kind, &solver, outcome)
        })
        .collect())
}

/// Sweep over the configured grids with the configured solver.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let problem = simulate(cfg)?;
    let s = &cfg.sweep;
    sweep_problem(&problem, cfg, cfg.solver, (&s.alphas, &s.betas, &s.gammas))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub method: String,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub l2_error: f64,
    pub mean_ssim: f64,
    pub mean_psnr: f64,
    pub discrepancy: f64,
    pub iterations: usize,
}

/// Comparison table: FBP, Landweber, and for every `γ` of the sweep the
/// temporal reconstruction with the smallest relative `L²` error over `β`.
pub fn table(cfg: &ExperimentConfig) -> Result<Vec<TableRow>> {
    let problem = simulate(cfg)?;
    table_for(&problem, cfg)
}

pub fn table_for(problem: &Problem, cfg: &ExperimentConfig) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for kind in [SolverKind::Fbp, SolverKind::Landweber] {
        let solver = match kind {
            SolverKind::Landweber => fixed_step(&cfg.solver_config, &problem.op)?,
            _ => cfg.solver_config.clone(),
        };
        let reco = reconstruct(&problem.op, &problem.noisy, kind, &cfg.spaces, &solver, &cfg.noise)?;
        let m = evaluate(&problem.truth, &reco, &cfg.spaces)?;
        rows.push(TableRow {
            method: kind.as_str().into(),
            gamma: None,
            beta: None,
            l2_error: m.rel_l2_error,
            mean_ssim: m.mean_ssim,
            mean_psnr: m.mean_psnr,
            discrepancy: m.discrepancy,
            iterations: m.iterations,
        });
    }
    let sweep = sweep_problem(
        problem,
        cfg,
        SolverKind::Temporal,
        (&[cfg.solver_config.alpha], &cfg.sweep.betas, &cfg.sweep.gammas),
    )?;
    let mut gammas = grid_or(&cfg.sweep.gammas, cfg.solver_config.gamma);
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite sweep values"));
    gammas.dedup();
    for gamma in gammas {
        let best = sweep
            .iter()
            .filter(|r| r.gamma == gamma && r.rel_l2_error.is_some())
            .min_by(|a, b| a.rel_l2_error.partial_cmp(&b.rel_l2_error).expect("finite errors"));
        match best {
            Some(r) => rows.push(TableRow {
                method: "temporal".into(),
                gamma: Some(gamma),
                beta: Some(r.beta),
                l2_error: r.rel_l2_error.unwrap_or(f64::NAN),
                mean_ssim: r.mean_ssim.unwrap_or(f64::NAN),
                mean_psnr: r.mean_psnr.unwrap_or(f64::NAN),
                discrepancy: r.discrepancy.unwrap_or(f64::NAN),
                iterations: r.iterations.unwrap_or(0),
            }),
            None => {
                return Err(Error::NumericalFailure {
                    iteration: 0,
                    message: format!("every run at γ = {gamma} failed"),
                    trace: Box::default(),
                })
            }
        }
    }
    Ok(rows)
}

/// Writes rows with a header; identical rows give identical bytes.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}
