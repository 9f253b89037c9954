//! Simulated dynamic phantoms and measurement noise.
//!
//! Both phantoms move template shapes with axis-aligned affine motions
//! `Φ(t, x) = c(t) + S(t)(x - c₀)`, `c` and `S` linear in `t`. Such motions map
//! rectangles to rectangles and ellipses to ellipses, so every frame is the
//! exact pull-back `ξ(Γ(t, ·))` of the template (times `det DΓ` for the
//! mass-preserving model), rasterized as cell averages: exact overlap areas
//! for rectangles, 8 × 8 supersampling for ellipses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bochner_norm, Exponents, GridFunction};
use crate::radon::{Sinogram, Volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    MassPreserving,
    IntensityPreserving,
}

/// `Φ(t, x) = c(t) + S(t)(x - anchor)` with `c(0) = anchor`, `S(0) = I`,
/// both interpolated linearly to their values at `t = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMotion {
    pub anchor: [f64; 2],
    pub end_center: [f64; 2],
    pub end_scale: [f64; 2],
}

impl AffineMotion {
    pub fn identity() -> Self {
        Self {
            anchor: [0.0, 0.0],
            end_center: [0.0, 0.0],
            end_scale: [1.0, 1.0],
        }
    }

    pub fn center(&self, t: f64) -> [f64; 2] {
        [0, 1].map(|i| self.anchor[i] + t * (self.end_center[i] - self.anchor[i]))
    }

    pub fn scale(&self, t: f64) -> [f64; 2] {
        [0, 1].map(|i| 1.0 + t * (self.end_scale[i] - 1.0))
    }

    pub fn phi(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let (c, s) = (self.center(t), self.scale(t));
        [0, 1].map(|i| c[i] + s[i] * (x[i] - self.anchor[i]))
    }

    /// Inverse map `Γ(t, ·) = Φ(t, ·)⁻¹`.
    pub fn gamma(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let (c, s) = (self.center(t), self.scale(t));
        [0, 1].map(|i| self.anchor[i] + (y[i] - c[i]) / s[i])
    }

    /// Eulerian velocity `V(t, y) = ∂_tΦ(t, Γ(t, y))`.
    pub fn velocity(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let x = self.gamma(t, y);
        [0, 1].map(|i| (self.end_center[i] - self.anchor[i]) + (self.end_scale[i] - 1.0) * (x[i] - self.anchor[i]))
    }

    /// `det DΓ(t, ·)`, the density factor of mass-preserving transport.
    pub fn inverse_jacobian(&self, t: f64) -> f64 {
        let s = self.scale(t);
        1.0 / (s[0] * s[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    pub kind: MotionKind,
    pub motion: AffineMotion,
}

impl MotionModel {
    /// Pulls a template value at `Γ(t, y)` back to `(t, y)`.
    pub fn density_factor(&self, t: f64) -> f64 {
        match self.kind {
            MotionKind::IntensityPreserving => 1.0,
            MotionKind::MassPreserving => self.motion.inverse_jacobian(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
}

/// An axis-aligned rectangle or ellipse with constant value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: [f64; 2],
    pub half_widths: [f64; 2],
    pub value: f64,
}

impl Shape {
    pub fn rectangle(x: [f64; 2], y: [f64; 2], value: f64) -> Self {
        Self {
            kind: ShapeKind::Rectangle,
            center: [(x[0] + x[1]) / 2.0, (y[0] + y[1]) / 2.0],
            half_widths: [(x[1] - x[0]) / 2.0, (y[1] - y[0]) / 2.0],
            value,
        }
    }

    pub fn circle(center: [f64; 2], radius: f64, value: f64) -> Self {
        Self {
            kind: ShapeKind::Ellipse,
            center,
            half_widths: [radius, radius],
            value,
        }
    }

    /// The shape at time `t` under `model`.
    pub fn moved(&self, model: &MotionModel, t: f64) -> Shape {
        let s = model.motion.scale(t);
        Shape {
            kind: self.kind,
            center: model.motion.phi(t, self.center),
            half_widths: [self.half_widths[0] * s[0].abs(), self.half_widths[1] * s[1].abs()],
            value: self.value * model.density_factor(t),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = (p[0] - self.center[0]) / self.half_widths[0];
        let dy = (p[1] - self.center[1]) / self.half_widths[1];
        match self.kind {
            ShapeKind::Rectangle => dx.abs() <= 1.0 && dy.abs() <= 1.0,
            ShapeKind::Ellipse => dx * dx + dy * dy <= 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        let a = 4.0 * self.half_widths[0] * self.half_widths[1];
        match self.kind {
            ShapeKind::Rectangle => a,
            ShapeKind::Ellipse => a * std::f64::consts::PI / 4.0,
        }
    }

    /// Adds the cell averages of this shape to a `size × size` image on `[-1, 1]²`.
    pub fn rasterize_into(&self, image: &mut [f64], size: usize) {
        let h = 2.0 / size as f64;
        let lo = [0, 1].map(|i| self.center[i] - self.half_widths[i]);
        let hi = [0, 1].map(|i| self.center[i] + self.half_widths[i]);
        let first = |v: f64| (((v + 1.0) / h).floor().max(0.0) as usize).min(size);
        let last = |v: f64| (((v + 1.0) / h).ceil().max(0.0) as usize).min(size);
        const SUB: usize = 8;
        for i in first(lo[1])..last(hi[1]) {
            let y0 = -1.0 + i as f64 * h;
            for j in first(lo[0])..last(hi[0]) {
                let x0 = -1.0 + j as f64 * h;
                let fraction = match self.kind {
                    ShapeKind::Rectangle => {
                        let ox = (hi[0].min(x0 + h) - lo[0].max(x0)).max(0.0);
                        let oy = (hi[1].min(y0 + h) - lo[1].max(y0)).max(0.0);
                        ox * oy / (h * h)
                    }
                    ShapeKind::Ellipse => {
                        let mut hits = 0;
                        for a in 0..SUB {
                            for b in 0..SUB {
                                let p = [x0 + (b as f64 + 0.5) * h / SUB as f64, y0 + (a as f64 + 0.5) * h / SUB as f64];
                                if self.contains(p) {
                                    hits += 1;
                                }
                            }
                        }
                        hits as f64 / (SUB * SUB) as f64
                    }
                };
                image[i * size + j] += self.value * fraction;
            }
        }
    }
}

/// Template shapes moved by one global motion that stretches vertically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityPhantom {
    pub shapes: Vec<Shape>,
    /// Vertical stretch factor reached at `t = 1`.
    pub stretch: f64,
}

impl Default for IntensityPhantom {
    fn default() -> Self {
        Self {
            shapes: vec![
                Shape::rectangle([-0.55, 0.05], [0.3, 0.55], 0.8),
                Shape::rectangle([-0.3, 0.4], [-0.6, -0.42], 0.5),
                Shape::circle([0.35, 0.3], 0.18, 1.0),
            ],
            stretch: 1.5,
        }
    }
}

impl IntensityPhantom {
    /// `Φ(t, x) = (x₁, (1 + (stretch - 1)t) x₂)`.
    pub fn motion(&self) -> MotionModel {
        MotionModel {
            kind: MotionKind::IntensityPreserving,
            motion: AffineMotion {
                anchor: [0.0, 0.0],
                end_center: [0.0, 0.0],
                end_scale: [1.0, self.stretch],
            },
        }
    }

    pub fn generate(&self, n_time: usize, size: usize) -> Result<Volume> {
        let model = self.motion();
        let shapes: Vec<(Shape, MotionModel)> = self.shapes.iter().map(|s| (*s, model)).collect();
        render(&shapes, n_time, size)
    }
}

/// Static shapes plus one shape that translates and grows while its
/// intensity drops so that its mass is conserved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassPhantom {
    pub static_shapes: Vec<Shape>,
    pub moving: Shape,
    pub end_center: [f64; 2],
    pub end_scale: [f64; 2],
}

impl Default for MassPhantom {
    fn default() -> Self {
        Self {
            static_shapes: vec![Shape::circle([-0.35, 0.0], 0.25, 0.8)],
            moving: Shape::rectangle([0.08, 0.32], [-0.4, -0.2], 1.0),
            end_center: [0.35, 0.3],
            end_scale: [1.5, 1.5],
        }
    }
}

impl MassPhantom {
    pub fn motion(&self) -> MotionModel {
        MotionModel {
            kind: MotionKind::MassPreserving,
            motion: AffineMotion {
                anchor: self.moving.center,
                end_center: self.end_center,
                end_scale: self.end_scale,
            },
        }
    }

    pub fn generate(&self, n_time: usize, size: usize) -> Result<Volume> {
        let still = MotionModel {
            kind: MotionKind::MassPreserving,
            motion: AffineMotion::identity(),
        };
        let mut shapes: Vec<(Shape, MotionModel)> = self.static_shapes.iter().map(|s| (*s, still)).collect();
        shapes.push((self.moving, self.motion()));
        render(&shapes, n_time, size)
    }
}

/// Time of frame `k` among `n` equidistant samples of `[0, 1]`.
pub fn frame_time(k: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        k as f64 / (n - 1) as f64
    }
}

fn render(shapes: &[(Shape, MotionModel)], n_time: usize, size: usize) -> Result<Volume> {
    if n_time == 0 || size == 0 {
        return Err(Error::Parameter("phantom needs at least one frame and one pixel".into()));
    }
    let mut vol = Volume::zeros(n_time, size, 1.0);
    for k in 0..n_time {
        let t = frame_time(k, n_time);
        let frame = vol.frame_mut(k);
        for (shape, model) in shapes {
            shape.moved(model, t).rasterize_into(frame, size);
        }
    }
    Ok(vol)
}

/// The default intensity-preserving phantom.
pub fn intensity_phantom(n_time: usize, resolution: usize) -> Result<Volume> {
    IntensityPhantom::default().generate(n_time, resolution)
}

/// The default mass-preserving phantom.
pub fn mass_phantom(n_time: usize, resolution: usize) -> Result<Volume> {
    MassPhantom::default().generate(n_time, resolution)
}

/// Adds seeded i.i.d. Gaussian noise and returns the noise norm in the data
/// norm with exponents `data` (outer `q`, inner `s`).
pub fn add_noise(sino: &Sinogram, std: f64, seed: u64, data: Exponents) -> Result<(Sinogram, f64)> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::Parameter(format!("noise std {std} must be nonnegative")));
    }
    data.validate()?;
    if std == 0.0 {
        return Ok((sino.clone(), 0.0));
    }
    let normal = Normal::new(0.0, std).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..sino.values.len()).map(|_| normal.sample(&mut rng)).collect();
    let mut noisy = sino.clone();
    noisy.values.iter_mut().zip(&noise).for_each(|(v, n)| *v += n);
    let grid = GridFunction::new(noise, std::sync::Arc::new(sino.geometry.data_quadrature(data.inner)?))?;
    Ok((noisy, bochner_norm(&grid, data.outer, data.inner)))
}

/// Per-step noise levels `‖noisy(t) - clean(t)‖` with unit time weight and inner exponent `s`.
pub fn frame_noise_levels(clean: &Sinogram, noisy: &Sinogram, s: f64) -> Result<Vec<f64>> {
    if clean.values.len() != noisy.values.len() {
        return Err(Error::Shape("sinograms differ in size".into()));
    }
    let w = clean.geometry.data_space_weights(s);
    Ok((0..clean.n_time())
        .map(|k| {
            clean
                .frame(k)
                .iter()
                .zip(noisy.frame(k))
                .zip(&w)
                .map(|((a, b), w)| w * (b - a).abs().powf(s))
                .sum::<f64>()
                .powf(1.0 / s)
        })
        .collect())
}
