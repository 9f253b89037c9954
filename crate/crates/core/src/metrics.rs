//! Reconstruction quality: relative errors, SSIM and PSNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bochner_norm, Exponents};
use crate::radon::Volume;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Percent.
    pub rel_l2_error: f64,
    /// Percent, in the configured primal Bochner norm.
    pub rel_error_in_norm: f64,
    pub mean_ssim: f64,
    /// Decibels; `inf` for an exact match.
    pub mean_psnr: f64,
    pub discrepancy: f64,
    pub iterations: usize,
}

fn check_same_grid(a: &Volume, b: &Volume) -> Result<()> {
    if a.n_time != b.n_time || a.size != b.size {
        return Err(Error::Shape(format!(
            "volumes {}×{}² and {}×{}² differ",
            a.n_time, a.size, b.n_time, b.size
        )));
    }
    Ok(())
}

/// `100 ‖reco - truth‖ / ‖truth‖` in `L^outer(0,T; L^inner)`.
pub fn relative_error(reco: &Volume, truth: &Volume, norm: Exponents) -> Result<f64> {
    check_same_grid(reco, truth)?;
    let t = truth.to_grid();
    let denom = bochner_norm(&t, norm.outer, norm.inner);
    if denom == 0.0 {
        return Err(Error::Domain("relative error against a zero ground truth".into()));
    }
    let diff = reco.to_grid().sub(&t)?;
    Ok(100.0 * bochner_norm(&diff, norm.outer, norm.inner) / denom)
}

/// PSNR of one frame with peak 1.
pub fn psnr(a: &[f64], b: &[f64]) -> f64 {
    let mse = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

pub fn psnr_mean(reco: &Volume, truth: &Volume) -> Result<f64> {
    check_same_grid(reco, truth)?;
    Ok((0..reco.n_time).map(|t| psnr(reco.frame(t), truth.frame(t))).sum::<f64>() / reco.n_time as f64)
}

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let r = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        *v = (-(i as f64 - r).powi(2) / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Symmetric (half-sample) reflection of an index into `0..n`.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// Separable Gaussian smoothing with reflected borders.
fn blur(img: &[f64], n: usize, w: &[f64; WINDOW]) -> Vec<f64> {
    let r = (WINDOW / 2) as isize;
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            tmp[i * n + j] = (0..WINDOW)
                .map(|k| w[k] * img[i * n + reflect(j as isize + k as isize - r, n)])
                .sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..WINDOW)
                .map(|k| w[k] * tmp[reflect(i as isize + k as isize - r, n) * n + j])
                .sum();
        }
    }
    out
}

/// Single-scale SSIM of two `n × n` frames with data range 1: Gaussian
/// window of size 11 and width 1.5, averaged over pixels at least 5 away
/// from the border (all pixels if the frame is smaller than the window).
pub fn ssim(a: &[f64], b: &[f64], n: usize) -> f64 {
    let w = gaussian_window();
    let mu_a = blur(a, n, &w);
    let mu_b = blur(b, n, &w);
    let sq = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let e_aa = blur(&sq(a, a), n, &w);
    let e_bb = blur(&sq(b, b), n, &w);
    let e_ab = blur(&sq(a, b), n, &w);
    let pad = WINDOW / 2;
    let range = if n > 2 * pad { pad..n - pad } else { 0..n };
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in range.clone() {
        for j in range.clone() {
            let k = i * n + j;
            let (ma, mb) = (mu_a[k], mu_b[k]);
            let va = e_aa[k] - ma * ma;
            let vb = e_bb[k] - mb * mb;
            let cov = e_ab[k] - ma * mb;
            acc += ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            count += 1;
        }
    }
    acc / count as f64
}

pub fn ssim_mean(reco: &Volume, truth: &Volume) -> Result<f64> {
    check_same_grid(reco, truth)?;
    let n = reco.size;
    Ok((0..reco.n_time).map(|t| ssim(reco.frame(t), truth.frame(t), n)).sum::<f64>() / reco.n_time as f64)
}

/// Bilinear resampling of every frame onto an `size × size` grid of the same square.
pub fn resample(vol: &Volume, size: usize) -> Volume {
    if size == vol.size {
        return vol.clone();
    }
    let n = vol.size;
    let (h_src, h_dst) = (2.0 / n as f64, 2.0 / size as f64);
    let mut out = Volume::zeros(vol.n_time, size, vol.horizon);
    for t in 0..vol.n_time {
        let src = vol.frame(t);
        let dst = out.frame_mut(t);
        for i in 0..size {
            let fy = ((-1.0 + (i as f64 + 0.5) * h_dst + 1.0) / h_src - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = (fy.floor() as usize).min(n - 2);
            let b = fy - i0 as f64;
            for j in 0..size {
                let fx = ((-1.0 + (j as f64 + 0.5) * h_dst + 1.0) / h_src - 0.5).clamp(0.0, (n - 1) as f64);
                let j0 = (fx.floor() as usize).min(n - 2);
                let a = fx - j0 as f64;
                dst[i * size + j] = (1.0 - b) * ((1.0 - a) * src[i0 * n + j0] + a * src[i0 * n + j0 + 1])
                    + b * ((1.0 - a) * src[(i0 + 1) * n + j0] + a * src[(i0 + 1) * n + j0 + 1]);
            }
        }
    }
    out
}
