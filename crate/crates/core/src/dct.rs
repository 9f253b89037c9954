//! Separable orthonormal cosine transform (even boundary, type II forward,
//! type III inverse) over `(t, y, x)` volumes, and the diagonal spectral
//! solve of `(1+τα)(-Δ_N + γ)θ - τβ ∂_tt θ = (-Δ_N + γ)θ_½`.
//!
//! Coefficient `(m, k_y, k_x)` multiplies the sampled basis function
//! `u_m(t) u_{k_y}(y) u_{k_x}(x)` with `u_k(x) = c_k cos(πk(x + b)/(2b))`.
//! The multipliers use the continuous Neumann eigenvalues
//! `ω'_i = πω_i/(2b_i)` in space and `m' = πm/T` in time.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::radon::Volume;

/// Extents of the box on which the cosine series lives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDomain {
    pub horizon: f64,
    /// Half-widths `(b_y, b_x)`.
    pub extents: [f64; 2],
}

impl SpectralDomain {
    /// `[0, T] × [-1, 1]²` for a volume of horizon `T`.
    pub fn of(vol: &Volume) -> Self {
        Self {
            horizon: vol.horizon,
            extents: [1.0, 1.0],
        }
    }

    pub fn temporal_frequency(&self, m: usize) -> f64 {
        PI * m as f64 / self.horizon
    }

    pub fn spatial_frequency(&self, axis: usize, k: usize) -> f64 {
        PI * k as f64 / (2.0 * self.extents[axis])
    }
}

/// Cosine coefficients of a volume, `(m, k_y, k_x)` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGrid {
    pub n_time: usize,
    pub size: usize,
    pub domain: SpectralDomain,
    pub coefficients: Vec<f64>,
}

impl SpectralGrid {
    pub fn zeros(n_time: usize, size: usize, domain: SpectralDomain) -> Self {
        Self {
            n_time,
            size,
            domain,
            coefficients: vec![0.0; n_time * size * size],
        }
    }
}

/// Orthonormal DCT-II matrix, `c[k][n] = c_k cos(πk(n + ½)/N)`.
fn cosine_matrix(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    let s0 = (1.0 / n as f64).sqrt();
    let s = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let scale = if k == 0 { s0 } else { s };
        for j in 0..n {
            c[k * n + j] = scale * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
        }
    }
    c
}

fn transposed(c: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|i| c[(i % n) * n + i / n]).collect()
}

/// Applies the `n × n` matrix `c` along one axis of a `(n0, n1, n2)` array.
fn transform_axis(data: &mut [f64], dims: [usize; 3], axis: usize, c: &[f64]) {
    let n = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let block = n * stride;
    data.par_chunks_mut(block).for_each(|chunk| {
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for offset in 0..stride {
            for (j, l) in line.iter_mut().enumerate() {
                *l = chunk[offset + j * stride];
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o = c[k * n..(k + 1) * n].iter().zip(&line).map(|(a, b)| a * b).sum();
            }
            for (k, o) in out.iter().enumerate() {
                chunk[offset + k * stride] = *o;
            }
        }
    });
}

fn separable(values: &mut [f64], n_time: usize, size: usize, transpose: bool) {
    let dims = [n_time, size, size];
    let (mut ct, mut cs) = (cosine_matrix(n_time), cosine_matrix(size));
    if transpose {
        ct = transposed(&ct, n_time);
        cs = transposed(&cs, size);
    }
    transform_axis(values, dims, 0, &ct);
    transform_axis(values, dims, 1, &cs);
    transform_axis(values, dims, 2, &cs);
}

pub fn cosine_forward(f: &Volume) -> SpectralGrid {
    let mut coefficients = f.values.clone();
    separable(&mut coefficients, f.n_time, f.size, false);
    SpectralGrid {
        n_time: f.n_time,
        size: f.size,
        domain: SpectralDomain::of(f),
        coefficients,
    }
}

pub fn cosine_inverse(c: &SpectralGrid) -> Volume {
    let mut values = c.coefficients.clone();
    separable(&mut values, c.n_time, c.size, true);
    Volume {
        n_time: c.n_time,
        size: c.size,
        horizon: c.domain.horizon,
        values,
    }
}

/// `|ω'|²` for every spatial index pair, `(k_y, k_x)` row-major.
fn spatial_eigenvalues(c: &SpectralGrid) -> Vec<f64> {
    let n = c.size;
    let mut out = Vec::with_capacity(n * n);
    for ky in 0..n {
        let wy = c.domain.spatial_frequency(0, ky);
        for kx in 0..n {
            let wx = c.domain.spatial_frequency(1, kx);
            out.push(wy * wy + wx * wx);
        }
    }
    out
}

fn check_filter_params(tau: f64, alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("step size τ = {tau} must be positive")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("γ = {gamma} must be positive")));
    }
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::Parameter(format!("α = {alpha}, β = {beta} must be nonnegative")));
    }
    Ok(())
}

/// Factor `1/((1+τα) + τβ m'²/(|ω'|² + γ))` applied to every coefficient.
pub fn spectral_filter(c: &SpectralGrid, tau: f64, alpha: f64, beta: f64, gamma: f64) -> Result<SpectralGrid> {
    check_filter_params(tau, alpha, beta, gamma)?;
    let lap = spatial_eigenvalues(c);
    let plane = c.size * c.size;
    let mut out = c.clone();
    for (m, block) in out.coefficients.chunks_mut(plane).enumerate() {
        let mt = c.domain.temporal_frequency(m);
        let mt2 = mt * mt;
        for (v, l) in block.iter_mut().zip(&lap) {
            *v /= (1.0 + tau * alpha) + tau * beta * mt2 / (l + gamma);
        }
    }
    Ok(out)
}

/// `Σ (m')²/(|ω'|² + γ) C²`, the squared `H⁻¹_γ`-type seminorm of `∂_t` in coefficient space.
pub fn temporal_seminorm_sq(c: &SpectralGrid, gamma: f64) -> f64 {
    let lap = spatial_eigenvalues(c);
    let plane = c.size * c.size;
    c.coefficients
        .chunks(plane)
        .enumerate()
        .map(|(m, block)| {
            let mt = c.domain.temporal_frequency(m);
            block.iter().zip(&lap).map(|(v, l)| mt * mt * v * v / (l + gamma)).sum::<f64>()
        })
        .sum()
}

/// Relative residual of the spectral PDE for a candidate `next` given `half`.
pub fn spectral_pde_residual(
    next: &Volume,
    half: &Volume,
    tau: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    check_filter_params(tau, alpha, beta, gamma)?;
    if next.n_time != half.n_time || next.size != half.size {
        return Err(Error::Shape("residual needs volumes of equal shape".into()));
    }
    let cn = cosine_forward(next);
    let ch = cosine_forward(half);
    let lap = spatial_eigenvalues(&cn);
    let plane = cn.size * cn.size;
    let mut diff2 = 0.0;
    let mut rhs2 = 0.0;
    for m in 0..cn.n_time {
        let mt = cn.domain.temporal_frequency(m);
        for (i, l) in lap.iter().enumerate() {
            let idx = m * plane + i;
            let rhs = (l + gamma) * ch.coefficients[idx];
            let lhs = ((1.0 + tau * alpha) * (l + gamma) + tau * beta * mt * mt) * cn.coefficients[idx];
            diff2 += (lhs - rhs).powi(2);
            rhs2 += rhs * rhs;
        }
    }
    if rhs2 == 0.0 {
        Ok(diff2.sqrt())
    } else {
        Ok((diff2 / rhs2).sqrt())
    }
}
