//! Parallel-beam static and dynamic Radon transforms on the unit disk.
//!
//! Images live on an `n × n` grid of pixel centers `x_j = -1 + (j + ½)h`,
//! `h = 2/n`, with row index `i` running along `y` and column index `j`
//! along `x`. Pixels whose centers lie outside the unit disk are masked out
//! before projecting. Each line integral
//! `(Rf)(φ, σ) = ∫ f(σθ + wθ⊥) dw`, `θ = (cos φ, sin φ)`, is evaluated by
//! sampling `w ∈ [-1, 1]` every half pixel, bilinear interpolation and the
//! trapezoidal rule. The unweighted transpose of that matrix is applied by
//! splatting with the same weights, and the weighted adjoint
//! `A* = W_X⁻¹ Aᵀ W_Y` is built on top of it.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lebesgue_norm, GridFunction, Quadrature};

/// Lower clamp of `1 - σ²` in the data-space weight.
pub const WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// Every time step sees the same angles.
    Fixed,
    /// Step `k` sees angles `k, k + n_t, k + 2n_t, ...` of a grid of
    /// `n_angles_per_step · n_t` equidistant angles on `[0, π)`.
    Rotating,
}

/// Acquisition geometry of a dynamic parallel-beam scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub n_offsets: usize,
    pub n_angles_per_step: usize,
    pub n_time_steps: usize,
    pub mode: AngleMode,
    /// Time horizon `T`.
    pub horizon: f64,
}

impl GeometrySpec {
    pub fn new(
        n_offsets: usize,
        n_angles_per_step: usize,
        n_time_steps: usize,
        mode: AngleMode,
        horizon: f64,
    ) -> Result<Self> {
        let g = Self {
            n_offsets,
            n_angles_per_step,
            n_time_steps,
            mode,
            horizon,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_offsets == 0 || self.n_angles_per_step == 0 || self.n_time_steps == 0 {
            return Err(Error::Parameter("geometry counts must be positive".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon {} must be positive", self.horizon)));
        }
        Ok(())
    }

    /// Offset spacing `h_σ = 2/N`.
    pub fn h_sigma(&self) -> f64 {
        2.0 / self.n_offsets as f64
    }

    /// Angle spacing within one time step.
    pub fn h_theta(&self) -> f64 {
        PI / self.n_angles_per_step as f64
    }

    /// Offsets at cell centers of `[-1, 1]`, so `|σ_i| < 1`.
    pub fn offsets(&self) -> Vec<f64> {
        let h = self.h_sigma();
        (0..self.n_offsets).map(|i| -1.0 + (i as f64 + 0.5) * h).collect()
    }

    /// Angles measured at time step `k`.
    pub fn angles_at(&self, k: usize) -> Vec<f64> {
        let na = self.n_angles_per_step;
        match self.mode {
            AngleMode::Fixed => (0..na).map(|l| l as f64 * PI / na as f64).collect(),
            AngleMode::Rotating => {
                let nt = self.n_time_steps;
                let total = (na * nt) as f64;
                (0..na).map(|l| (k + l * nt) as f64 * PI / total).collect()
            }
        }
    }

    pub fn schedule(&self) -> Vec<Vec<f64>> {
        (0..self.n_time_steps).map(|k| self.angles_at(k)).collect()
    }

    /// Quadrature weight of one time step.
    pub fn time_weight(&self) -> f64 {
        self.horizon / self.n_time_steps as f64
    }

    /// Samples per time step.
    pub fn frame_len(&self) -> usize {
        self.n_angles_per_step * self.n_offsets
    }

    /// Weights `2π h_σ h_θ (1-σ²)^{-(s-1)/2}` of one (angle × offset) frame.
    pub fn data_space_weights(&self, s: f64) -> Vec<f64> {
        let base = 2.0 * PI * self.h_sigma() * self.h_theta();
        let per_offset: Vec<f64> = self
            .offsets()
            .iter()
            .map(|sigma| base * (1.0 - sigma * sigma).max(WEIGHT_FLOOR).powf(-(s - 1.0) / 2.0))
            .collect();
        (0..self.n_angles_per_step).flat_map(|_| per_offset.iter().copied()).collect()
    }

    /// Product quadrature of the data space for inner exponent `s`.
    pub fn data_quadrature(&self, s: f64) -> Result<Quadrature> {
        Quadrature::new(vec![self.time_weight(); self.n_time_steps], self.data_space_weights(s))
    }

    /// The geometry of step `k` alone, with unit time weight.
    pub fn single_step(&self, k: usize) -> Result<(GeometrySpec, Vec<f64>)> {
        if k >= self.n_time_steps {
            return Err(Error::Shape(format!("time step {k} of {}", self.n_time_steps)));
        }
        let g = GeometrySpec {
            n_time_steps: 1,
            horizon: 1.0,
            mode: AngleMode::Fixed,
            ..self.clone()
        };
        Ok((g, self.angles_at(k)))
    }
}

/// Time series of square images on `[-1, 1]²`, stored `(t, y, x)` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    pub n_time: usize,
    pub size: usize,
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl Volume {
    pub fn new(n_time: usize, size: usize, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if n_time == 0 || size == 0 {
            return Err(Error::Shape("volume dimensions must be positive".into()));
        }
        if values.len() != n_time * size * size {
            return Err(Error::Shape(format!(
                "{} values for a {n_time}×{size}×{size} volume",
                values.len()
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon {horizon} must be positive")));
        }
        Ok(Self { n_time, size, horizon, values })
    }

    pub fn zeros(n_time: usize, size: usize, horizon: f64) -> Self {
        Self {
            n_time,
            size,
            horizon,
            values: vec![0.0; n_time * size * size],
        }
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 / self.size as f64
    }

    pub fn frame_len(&self) -> usize {
        self.size * self.size
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.frame_len();
        &self.values[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f64] {
        let n = self.frame_len();
        &mut self.values[t * n..(t + 1) * n]
    }

    /// Quadrature with weight `T/n_t` per frame and `h²` per pixel.
    pub fn quadrature(&self) -> Quadrature {
        let h = self.pixel_size();
        Quadrature::uniform(self.n_time, self.frame_len(), self.horizon / self.n_time as f64, h * h)
            .expect("volume dimensions are validated")
    }

    pub fn to_grid(&self) -> GridFunction {
        GridFunction::new(self.values.clone(), Arc::new(self.quadrature())).expect("lengths agree")
    }

    /// Reshapes grid values into a volume with the layout of `self`.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Volume> {
        Volume::new(self.n_time, self.size, self.horizon, values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Time series of (angle × offset) projections with their geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    pub geometry: GeometrySpec,
    /// Inner data exponent used when the sinogram is measured in a norm.
    pub exponent_s: f64,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn new(geometry: GeometrySpec, values: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        let expected = geometry.n_time_steps * geometry.frame_len();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "{} values for a sinogram of {expected} samples",
                values.len()
            )));
        }
        Ok(Self { geometry, exponent_s: 2.0, values })
    }

    pub fn zeros(geometry: GeometrySpec) -> Self {
        let n = geometry.n_time_steps * geometry.frame_len();
        Self { geometry, exponent_s: 2.0, values: vec![0.0; n] }
    }

    pub fn n_time(&self) -> usize {
        self.geometry.n_time_steps
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.geometry.frame_len();
        &self.values[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f64] {
        let n = self.geometry.frame_len();
        &mut self.values[t * n..(t + 1) * n]
    }

    pub fn to_grid(&self, s: f64) -> Result<GridFunction> {
        GridFunction::new(self.values.clone(), Arc::new(self.geometry.data_quadrature(s)?))
    }
}

/// `1` for pixels whose centers lie in the closed unit disk, else `0`.
pub fn disk_mask(size: usize) -> Vec<f64> {
    let h = 2.0 / size as f64;
    let mut mask = Vec::with_capacity(size * size);
    for i in 0..size {
        let y = -1.0 + (i as f64 + 0.5) * h;
        for j in 0..size {
            let x = -1.0 + (j as f64 + 0.5) * h;
            mask.push(if x * x + y * y <= 1.0 { 1.0 } else { 0.0 });
        }
    }
    mask
}

/// Calls `visit(pixel_index, weight)` for every bilinear contribution of
/// the line integral at `(φ, σ)`.
#[inline]
fn trace_ray(size: usize, cos: f64, sin: f64, sigma: f64, mut visit: impl FnMut(usize, f64)) {
    let h = 2.0 / size as f64;
    let n_samples = 2 * size + 1;
    let dw = 2.0 / (n_samples - 1) as f64;
    // Samples this far out only touch masked pixels.
    let reach = 1.0 + 1.5 * h;
    let reach2 = reach * reach;
    for k in 0..n_samples {
        let w = -1.0 + k as f64 * dw;
        let x = sigma * cos - w * sin;
        let y = sigma * sin + w * cos;
        if x * x + y * y > reach2 {
            continue;
        }
        let weight = if k == 0 || k == n_samples - 1 { 0.5 * dw } else { dw };
        let fx = (x + 1.0) / h - 0.5;
        let fy = (y + 1.0) / h - 0.5;
        let j0 = fx.floor();
        let i0 = fy.floor();
        let a = fx - j0;
        let b = fy - i0;
        let (j0, i0) = (j0 as isize, i0 as isize);
        for (di, wy) in [(0isize, 1.0 - b), (1, b)] {
            let i = i0 + di;
            if i < 0 || i >= size as isize || wy == 0.0 {
                continue;
            }
            for (dj, wx) in [(0isize, 1.0 - a), (1, a)] {
                let j = j0 + dj;
                if j < 0 || j >= size as isize || wx == 0.0 {
                    continue;
                }
                visit(i as usize * size + j as usize, weight * wx * wy);
            }
        }
    }
}

/// Unweighted line integrals of one masked image, `(angle, offset)` row-major.
pub fn static_forward(image: &[f64], size: usize, angles: &[f64], offsets: &[f64]) -> Result<Vec<f64>> {
    if image.len() != size * size {
        return Err(Error::Shape(format!("{} pixels for a {size}² image", image.len())));
    }
    let mask = disk_mask(size);
    let masked: Vec<f64> = image.iter().zip(&mask).map(|(v, m)| v * m).collect();
    let mut out = vec![0.0; angles.len() * offsets.len()];
    forward_frame(&masked, size, angles, offsets, &mut out);
    Ok(out)
}

fn forward_frame(masked: &[f64], size: usize, angles: &[f64], offsets: &[f64], out: &mut [f64]) {
    for (a, phi) in angles.iter().enumerate() {
        let (sin, cos) = phi.sin_cos();
        for (o, sigma) in offsets.iter().enumerate() {
            let mut acc = 0.0;
            trace_ray(size, cos, sin, *sigma, |idx, w| acc += w * masked[idx]);
            out[a * offsets.len() + o] = acc;
        }
    }
}

/// Ray weights of one frame in compressed-row form, mask applied, entries
/// of each row merged by pixel.
#[derive(Clone, Debug)]
struct FrameMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl FrameMatrix {
    fn build(size: usize, angles: &[f64], offsets: &[f64], mask: &[f64]) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(u32, f64)> = Vec::new();
        for phi in angles {
            let (sin, cos) = phi.sin_cos();
            for sigma in offsets {
                row.clear();
                trace_ray(size, cos, sin, *sigma, |idx, w| {
                    if mask[idx] != 0.0 {
                        row.push((idx as u32, w));
                    }
                });
                row.sort_by_key(|e| e.0);
                for &(c, w) in row.iter() {
                    if cols.len() > *row_ptr.last().expect("nonempty") && *cols.last().expect("nonempty") == c {
                        *vals.last_mut().expect("nonempty") += w;
                    } else {
                        cols.push(c);
                        vals.push(w);
                    }
                }
                row_ptr.push(cols.len());
            }
        }
        Self { row_ptr, cols, vals }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(c, w)| w * x[*c as usize])
                .sum();
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, g) in y.iter().enumerate() {
            if *g == 0.0 {
                continue;
            }
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            for (c, w) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                out[*c as usize] += w * g;
            }
        }
    }
}

fn transpose_frame(sino: &[f64], size: usize, angles: &[f64], offsets: &[f64], mask: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (a, phi) in angles.iter().enumerate() {
        let (sin, cos) = phi.sin_cos();
        for (o, sigma) in offsets.iter().enumerate() {
            let g = sino[a * offsets.len() + o];
            if g == 0.0 {
                continue;
            }
            trace_ray(size, cos, sin, *sigma, |idx, w| out[idx] += w * g);
        }
    }
    out.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
}

/// Exact matrix transpose of [`static_forward`].
pub fn static_transpose(sino: &[f64], size: usize, angles: &[f64], offsets: &[f64]) -> Result<Vec<f64>> {
    if sino.len() != angles.len() * offsets.len() {
        return Err(Error::Shape(format!(
            "{} samples for {} angles × {} offsets",
            sino.len(),
            angles.len(),
            offsets.len()
        )));
    }
    let mask = disk_mask(size);
    let mut out = vec![0.0; size * size];
    transpose_frame(sino, size, angles, offsets, &mask, &mut out);
    Ok(out)
}

/// Weighted back-projection `h⁻² Aᵀ W̄ g` of one frame with the `s`-weights
/// of `geometry`: the adjoint with respect to the `W̄` pairing on the data side
/// and the pixel-area pairing on the image side.
pub fn static_adjoint(sino: &[f64], size: usize, angles: &[f64], geometry: &GeometrySpec, s: f64) -> Result<Vec<f64>> {
    if angles.len() != geometry.n_angles_per_step {
        return Err(Error::Shape(format!(
            "{} angles for a geometry with {} per step",
            angles.len(),
            geometry.n_angles_per_step
        )));
    }
    let weights = geometry.data_space_weights(s);
    if sino.len() != weights.len() {
        return Err(Error::Shape(format!("{} samples for {} weights", sino.len(), weights.len())));
    }
    let weighted: Vec<f64> = sino.iter().zip(&weights).map(|(g, w)| g * w).collect();
    let mut out = static_transpose(&weighted, size, angles, &geometry.offsets())?;
    let area = (2.0 / size as f64).powi(2);
    out.iter_mut().for_each(|v| *v /= area);
    Ok(out)
}

/// A discretized linear operator between weighted grids.
pub trait ForwardModel: Sync {
    fn n_time(&self) -> usize;
    fn domain_quadrature(&self) -> Arc<Quadrature>;
    /// Data-space quadrature for inner exponent `s`.
    fn range_quadrature(&self, s: f64) -> Result<Arc<Quadrature>>;
    /// Unweighted matrix-vector product.
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// Exact transpose of [`ForwardModel::apply`].
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]);
    /// `(n_time, size, horizon)` of the square image volumes in the domain.
    fn volume_layout(&self) -> (usize, usize, f64);
}

/// `A x` carrying the range quadrature of `range`.
pub fn forward(model: &dyn ForwardModel, x: &GridFunction, range: &Arc<Quadrature>) -> Result<GridFunction> {
    let domain = model.domain_quadrature();
    if x.values().len() != domain.len() {
        return Err(Error::Shape(format!(
            "operator expects {} samples, got {}",
            domain.len(),
            x.values().len()
        )));
    }
    let mut out = vec![0.0; range.len()];
    model.apply(x.values(), &mut out);
    GridFunction::new(out, range.clone())
}

/// `A* g = W_X⁻¹ Aᵀ W_Y g`, the adjoint under the quadrature pairings carried by `g` and the domain.
pub fn weighted_adjoint(model: &dyn ForwardModel, g: &GridFunction) -> Result<GridFunction> {
    let domain = model.domain_quadrature();
    let range = g.quadrature();
    let n = range.n_space();
    let mut weighted = g.values().to_vec();
    for (t, wt) in range.time_weights().iter().enumerate() {
        for (v, ws) in weighted[t * n..(t + 1) * n].iter_mut().zip(range.space_weights()) {
            *v *= wt * ws;
        }
    }
    let mut out = vec![0.0; domain.len()];
    model.apply_transpose(&weighted, &mut out);
    let m = domain.n_space();
    for (t, wt) in domain.time_weights().iter().enumerate() {
        for (v, ws) in out[t * m..(t + 1) * m].iter_mut().zip(domain.space_weights()) {
            *v /= wt * ws;
        }
    }
    GridFunction::new(out, domain)
}

/// The dynamic Radon transform for one geometry and image size.
#[derive(Clone, Debug)]
pub struct DynamicRadon {
    geometry: GeometrySpec,
    size: usize,
    matrices: Arc<Vec<FrameMatrix>>,
    domain: Arc<Quadrature>,
}

impl DynamicRadon {
    pub fn new(geometry: &GeometrySpec, size: usize) -> Result<Self> {
        geometry.validate()?;
        Self::with_schedule(geometry.clone(), geometry.schedule(), size)
    }

    fn with_schedule(geometry: GeometrySpec, schedule: Vec<Vec<f64>>, size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Parameter(format!("image size {size} too small")));
        }
        let h = 2.0 / size as f64;
        let domain = Quadrature::uniform(geometry.n_time_steps, size * size, geometry.time_weight(), h * h)?;
        let offsets = geometry.offsets();
        let mask = disk_mask(size);
        let matrices = schedule
            .par_iter()
            .map(|angles| FrameMatrix::build(size, angles, &offsets, &mask))
            .collect();
        Ok(Self {
            matrices: Arc::new(matrices),
            geometry,
            size,
            domain: Arc::new(domain),
        })
    }

    /// The static transform of time step `k` with unit time weight.
    pub fn frame(&self, k: usize) -> Result<DynamicRadon> {
        let (g, _) = self.geometry.single_step(k)?;
        let h = 2.0 / self.size as f64;
        Ok(Self {
            domain: Arc::new(Quadrature::uniform(1, self.size * self.size, 1.0, h * h)?),
            matrices: Arc::new(vec![self.matrices[k].clone()]),
            geometry: g,
            size: self.size,
        })
    }

    pub fn geometry(&self) -> &GeometrySpec {
        &self.geometry
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self, vol: &Volume) -> Result<Sinogram> {
        if vol.n_time != self.geometry.n_time_steps || vol.size != self.size {
            return Err(Error::Shape(format!(
                "volume {}×{}² does not match operator {}×{}²",
                vol.n_time, vol.size, self.geometry.n_time_steps, self.size
            )));
        }
        let mut sino = Sinogram::zeros(self.geometry.clone());
        self.apply(&vol.values, &mut sino.values);
        Ok(sino)
    }

    /// Weighted adjoint with data exponent `s`.
    pub fn adjoint(&self, sino: &Sinogram, s: f64) -> Result<Volume> {
        if sino.geometry.n_time_steps != self.geometry.n_time_steps
            || sino.geometry.frame_len() != self.geometry.frame_len()
        {
            return Err(Error::Shape("sinogram does not match the operator geometry".into()));
        }
        let g = GridFunction::new(sino.values.clone(), self.range_quadrature(s)?)?;
        let out = weighted_adjoint(self, &g)?;
        Volume::new(self.geometry.n_time_steps, self.size, self.geometry.horizon, out.into_values())
    }
}

impl ForwardModel for DynamicRadon {
    fn n_time(&self) -> usize {
        self.geometry.n_time_steps
    }

    fn domain_quadrature(&self) -> Arc<Quadrature> {
        self.domain.clone()
    }

    fn range_quadrature(&self, s: f64) -> Result<Arc<Quadrature>> {
        Ok(Arc::new(self.geometry.data_quadrature(s)?))
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let npix = self.size * self.size;
        let nd = self.geometry.frame_len();
        out.par_chunks_mut(nd)
            .zip(x.par_chunks(npix))
            .zip(self.matrices.par_iter())
            .for_each(|((o, img), m)| m.apply(img, o));
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let npix = self.size * self.size;
        let nd = self.geometry.frame_len();
        out.par_chunks_mut(npix)
            .zip(y.par_chunks(nd))
            .zip(self.matrices.par_iter())
            .for_each(|((o, sino), m)| m.apply_transpose(sino, o));
    }

    fn volume_layout(&self) -> (usize, usize, f64) {
        (self.geometry.n_time_steps, self.size, self.geometry.horizon)
    }
}

/// Rayleigh quotients `‖A x_k‖²/‖x_k‖²` of power iteration on `A*A` in the
/// Hilbert (`s = 2`) quadrature, starting from a seeded Gaussian vector.
pub fn power_iteration(model: &dyn ForwardModel, iters: usize, seed: u64) -> Result<Vec<f64>> {
    if iters == 0 {
        return Err(Error::Parameter("power iteration needs at least one step".into()));
    }
    let domain = model.domain_quadrature();
    let range = model.range_quadrature(2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..domain.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x = GridFunction::new(values, domain)?;
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        let nx = lebesgue_norm(&x, 2.0);
        if nx == 0.0 {
            history.push(0.0);
            break;
        }
        x.scale(1.0 / nx);
        let ax = forward(model, &x, &range)?;
        history.push(lebesgue_norm(&ax, 2.0).powi(2));
        x = weighted_adjoint(model, &ax)?;
    }
    Ok(history)
}

/// Estimate of `‖A*A‖` in the Hilbert quadrature.
pub fn operator_norm_estimate(model: &dyn ForwardModel, iters: usize, seed: u64) -> Result<f64> {
    let history = power_iteration(model, iters, seed)?;
    Ok(*history.last().expect("at least one iteration"))
}
