//! Command line interface. Every subcommand starts from a preset (or a JSON
//! config file) and applies its flags on top, so flags and files validate
//! through the same path.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Exponents;
use crate::metrics::{psnr_mean, relative_error, resample, ssim_mean, MetricReport};
use crate::phantoms::add_noise;
use crate::radon::DynamicRadon;

use super::config::{ExperimentConfig, PhantomKind, SolverKind};
use super::container::{read_meta, read_sinogram, read_volume, write_sinogram, write_volume};
use super::experiments::{
    csv_string, phantom_volume, reconstruct, simulate, sweep_problem, table_for,
};
use super::images::{default_frames, emit_images};

#[derive(Debug, Parser)]
#[command(name = "bochner", version, about = "Dynamic CT reconstruction in Lebesgue-Bochner spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a phantom volume and save it as a container.
    Phantom(PhantomArgs),
    /// Project a phantom and add seeded Gaussian noise.
    Sinogram(SinogramArgs),
    /// Run a solver on a saved sinogram.
    Reconstruct(ReconstructArgs),
    /// Solve over a parameter grid and write one CSV row per run.
    Sweep(SweepArgs),
    /// FBP, Landweber and the best temporal run per γ as CSV.
    Table(TableArgs),
    /// Compare a reconstruction with a ground truth.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file overriding the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Phantom preset: intensity or mass.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<PhantomKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_std: Option<f64>,
    /// Permit generating and reconstructing on the same grid.
    #[arg(long)]
    allow_inverse_crime: bool,
}

#[derive(Debug, Args)]
struct PhantomArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    frames: Option<usize>,
    /// Generation resolution.
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write PNG frames into this directory.
    #[arg(long)]
    images: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SinogramArgs {
    #[command(flatten)]
    common: Common,
    /// Phantom container; generated from the config when absent.
    #[arg(long)]
    phantom: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    sinogram: PathBuf,
    /// Reconstruction resolution.
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    images: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    common: Common,
    /// Phantom preset, same as `--kind`.
    #[arg(long, value_parser = parse_kind)]
    which: Option<PhantomKind>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    /// Reconstructed volume.
    #[arg(long)]
    reco: PathBuf,
    /// Ground truth, resampled to the reconstruction grid when needed.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<PhantomKind, String> {
    match s {
        "intensity" => Ok(PhantomKind::Intensity),
        "mass" => Ok(PhantomKind::Mass),
        _ => Err(format!("unknown phantom `{s}` (intensity or mass)")),
    }
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Phantom(a) => phantom(a, out),
        Command::Sinogram(a) => sinogram(a, out),
        Command::Reconstruct(a) => reconstruct_cmd(a, out),
        Command::Sweep(a) => sweep_cmd(a, out),
        Command::Table(a) => table_cmd(a, out),
        Command::Report(a) => report(a, out),
    }
}

/// Config file (or `{}`), then flags, merged over the preset.
fn load_config(common: &Common, patch: Map<String, Value>) -> Result<ExperimentConfig> {
    let mut base = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => json!({}),
    };
    let obj = base
        .as_object_mut()
        .ok_or_else(|| Error::Config("experiment config must be a JSON object".into()))?;
    if let Some(kind) = common.kind {
        obj.insert("phantom".into(), serde_json::to_value(kind)?);
    }
    let mut noise = Map::new();
    if let Some(seed) = common.seed {
        noise.insert("seed".into(), json!(seed));
    }
    if let Some(std) = common.noise_std {
        noise.insert("std".into(), json!(std));
    }
    if !noise.is_empty() {
        deep_insert(obj, "noise", Value::Object(noise));
    }
    if common.allow_inverse_crime {
        obj.insert("allow_inverse_crime".into(), json!(true));
    }
    for (k, v) in patch {
        deep_insert(obj, &k, v);
    }
    ExperimentConfig::from_json(&base.to_string())
}

fn deep_insert(obj: &mut Map<String, Value>, key: &str, value: Value) {
    match (obj.get_mut(key), value) {
        (Some(Value::Object(slot)), Value::Object(v)) => {
            for (k, x) in v {
                deep_insert(slot, &k, x);
            }
        }
        (_, v) => {
            obj.insert(key.into(), v);
        }
    }
}

fn solver_patch(s: &SolverArgs, patch: &mut Map<String, Value>) {
    if let Some(kind) = s.solver {
        patch.insert("solver".into(), json!(kind.as_str()));
    }
    let mut sc = Map::new();
    for (name, v) in [("alpha", s.alpha), ("beta", s.beta), ("gamma", s.gamma), ("rho", s.rho)] {
        if let Some(v) = v {
            sc.insert(name.into(), json!(v));
        }
    }
    if let Some(m) = s.max_iters {
        sc.insert("max_iters".into(), json!(m));
    }
    if !sc.is_empty() {
        patch.insert("solver_config".into(), Value::Object(sc));
    }
}

fn grid_patch(g: &GridArgs, patch: &mut Map<String, Value>) {
    let mut sweep = Map::new();
    for (name, v) in [("alphas", &g.alphas), ("betas", &g.betas), ("gammas", &g.gammas)] {
        if let Some(v) = v {
            sweep.insert(name.into(), json!(v));
        }
    }
    if !sweep.is_empty() {
        patch.insert("sweep".into(), Value::Object(sweep));
    }
}

fn frames_patch(frames: usize, patch: &mut Map<String, Value>) {
    patch.insert("n_frames".into(), json!(frames));
    patch.insert("geometry".into(), json!({ "n_time_steps": frames }));
}

fn write_text(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn phantom(a: PhantomArgs, out: &mut dyn Write) -> Result<()> {
    let mut patch = Map::new();
    if let Some(f) = a.frames {
        frames_patch(f, &mut patch);
    }
    if let Some(r) = a.res {
        patch.insert("generation_resolution".into(), json!(r));
    }
    // only the generation grid matters here
    patch.insert("allow_inverse_crime".into(), json!(true));
    let cfg = load_config(&a.common, patch)?;
    let vol = phantom_volume(&cfg, cfg.generation_resolution)?;
    let meta = json!({ "phantom": cfg.phantom, "resolution": cfg.generation_resolution });
    write_volume(&a.out, &vol, Some(meta))?;
    if let Some(dir) = &a.images {
        emit_images(&vol, &default_frames(vol.n_time), dir, "phantom")?;
    }
    writeln!(out, "wrote {} ({}×{}×{})", a.out.display(), vol.n_time, vol.size, vol.size)?;
    Ok(())
}

fn sinogram(a: SinogramArgs, out: &mut dyn Write) -> Result<()> {
    let mut patch = Map::new();
    patch.insert("allow_inverse_crime".into(), json!(true));
    let mut cfg = load_config(&a.common, patch)?;
    let vol = match &a.phantom {
        Some(p) => read_volume(p)?,
        None => phantom_volume(&cfg, cfg.generation_resolution)?,
    };
    if vol.n_time != cfg.geometry.n_time_steps {
        cfg.geometry.n_time_steps = vol.n_time;
        cfg.n_frames = vol.n_time;
    }
    let op = DynamicRadon::new(&cfg.geometry, vol.size)?;
    let clean = op.forward(&vol)?;
    let (noisy, delta) = add_noise(&clean, cfg.noise.std, cfg.noise.seed, Exponents::uniform(2.0))?;
    let meta = json!({
        "noise_std": cfg.noise.std,
        "seed": cfg.noise.seed,
        "generation_resolution": vol.size,
        "delta": delta,
    });
    write_sinogram(&a.out, &noisy, Some(meta))?;
    writeln!(out, "wrote {} (noise level {delta:.6})", a.out.display())?;
    Ok(())
}

fn reconstruct_cmd(a: ReconstructArgs, out: &mut dyn Write) -> Result<()> {
    let (sino, meta) = read_sinogram(&a.sinogram)?;
    let mut patch = Map::new();
    solver_patch(&a.solver, &mut patch);
    patch.insert("n_frames".into(), json!(sino.geometry.n_time_steps));
    patch.insert("geometry".into(), serde_json::to_value(&sino.geometry)?);
    if let Some(r) = a.res {
        patch.insert("reconstruction_resolution".into(), json!(r));
    }
    // the flags win over what the sinogram recorded
    let mut noise = Map::new();
    if a.common.seed.is_none() {
        if let Some(s) = meta.get("seed") {
            noise.insert("seed".into(), s.clone());
        }
    }
    if a.common.noise_std.is_none() {
        if let Some(s) = meta.get("noise_std") {
            noise.insert("std".into(), s.clone());
        }
    }
    patch.insert("noise".into(), Value::Object(noise));
    if let Some(g) = meta.get("generation_resolution") {
        patch.insert("generation_resolution".into(), g.clone());
    }
    let cfg = load_config(&a.common, patch)?;
    let op = DynamicRadon::new(&cfg.geometry, cfg.reconstruction_resolution)?;
    let reco = reconstruct(&op, &sino, cfg.solver, &cfg.spaces, &cfg.solver_config, &cfg.noise)?;
    let info = json!({
        "solver": cfg.solver.as_str(),
        "alpha": cfg.solver_config.alpha,
        "beta": cfg.solver_config.beta,
        "gamma": cfg.solver_config.gamma,
        "iterations": reco.iterations(),
        "stop_reason": reco.stop_reason(),
        "discrepancy": reco.discrepancy,
    });
    write_volume(&a.out, &reco.volume, Some(info))?;
    if let Some(dir) = &a.images {
        emit_images(&reco.volume, &default_frames(reco.volume.n_time), dir, cfg.solver.as_str())?;
    }
    writeln!(
        out,
        "wrote {}: {} iterations, stop reason {}, discrepancy {:.6}",
        a.out.display(),
        reco.iterations(),
        reco.stop_reason(),
        reco.discrepancy
    )?;
    Ok(())
}

fn sweep_cmd(a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    let mut patch = Map::new();
    solver_patch(&a.solver, &mut patch);
    grid_patch(&a.grid, &mut patch);
    let cfg = load_config(&a.common, patch)?;
    let problem = simulate(&cfg)?;
    let s = &cfg.sweep;
    let rows = sweep_problem(&problem, &cfg, cfg.solver, (&s.alphas, &s.betas, &s.gammas))?;
    write_text(a.out.as_deref(), &csv_string(&rows)?, out)
}

fn table_cmd(mut a: TableArgs, out: &mut dyn Write) -> Result<()> {
    if a.which.is_some() {
        a.common.kind = a.which;
    }
    let mut patch = Map::new();
    grid_patch(&a.grid, &mut patch);
    let cfg = load_config(&a.common, patch)?;
    let problem = simulate(&cfg)?;
    write_text(a.out.as_deref(), &csv_string(&table_for(&problem, &cfg)?)?, out)
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(&a.common, Map::new())?;
    let reco = read_volume(&a.reco)?;
    let mut truth = read_volume(&a.truth)?;
    if truth.size != reco.size {
        truth = resample(&truth, reco.size);
    }
    let info = read_meta(&a.reco)?.unwrap_or(Value::Null);
    let report = MetricReport {
        rel_l2_error: relative_error(&reco, &truth, Exponents::uniform(2.0))?,
        rel_error_in_norm: relative_error(&reco, &truth, cfg.spaces.primal())?,
        mean_ssim: ssim_mean(&reco, &truth)?,
        mean_psnr: psnr_mean(&reco, &truth)?,
        discrepancy: info.get("discrepancy").and_then(Value::as_f64).unwrap_or(f64::NAN),
        iterations: info.get("iterations").and_then(Value::as_u64).unwrap_or(0) as usize,
    };
    write_text(a.out.as_deref(), &csv_string(&[report])?, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("bochner").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["phantom", "--bogus"]).0, 1);
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&[]).0, 1);
        let (code, _, err) = call(&["reconstruct", "--solver", "simplex", "--sinogram", "x", "--out", "y"]);
        assert_eq!(code, 1);
        assert!(err.contains("simplex"));
    }

    #[test]
    fn help_and_version_exit_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("reconstruct"));
        assert_eq!(call(&["--version"]).0, 0);
    }

    #[test]
    fn phantom_writes_the_requested_shape() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.breg");
        let (code, _, err) =
            call(&["phantom", "--kind", "intensity", "--frames", "20", "--res", "41", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let vol = read_volume(&p).unwrap();
        assert_eq!((vol.n_time, vol.size), (20, 41));
    }

    #[test]
    fn config_errors_exit_one() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"solver_config": {"rho": 0.5}}"#).unwrap();
        let out = dir.path().join("p.breg");
        let (code, _, err) =
            call(&["phantom", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("ρ"), "{err}");
        let missing = dir.path().join("none.breg");
        assert_eq!(
            call(&["reconstruct", "--sinogram", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]).0,
            1
        );
    }

    #[test]
    fn inverse_crime_is_refused_unless_allowed() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.breg");
        let r = dir.path().join("r.breg");
        let args = ["sinogram", "--kind", "intensity", "--out", s.to_str().unwrap()];
        assert_eq!(call(&args).0, 0);
        let base = ["reconstruct", "--sinogram", s.to_str().unwrap(), "--out", r.to_str().unwrap(), "--res", "41"];
        let (code, _, err) = call(&[&base[..], &["--solver", "fbp"]].concat());
        assert_eq!(code, 1);
        assert!(err.contains("inverse crime"), "{err}");
        let (code, _, err) = call(&[&base[..], &["--solver", "fbp", "--allow-inverse-crime"]].concat());
        assert_eq!(code, 0, "{err}");
    }

    #[test]
    fn numerical_failures_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.breg");
        let r = dir.path().join("r.breg");
        assert_eq!(call(&["sinogram", "--out", s.to_str().unwrap()]).0, 0);
        // an absurd step size overflows within a few iterations
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"solver_config": {"tau": {"rule": "fixed", "tau": 1e200}, "max_iters": 50}}"#).unwrap();
        let (code, _, err) = call(&[
            "reconstruct",
            "--config",
            cfg.to_str().unwrap(),
            "--sinogram",
            s.to_str().unwrap(),
            "--out",
            r.to_str().unwrap(),
            "--solver",
            "landweber",
        ]);
        assert_eq!(code, 2, "{err}");
    }
}
