use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::radon::{disk_mask, Sinogram, Volume};

/// Band-limited ramp kernel sampled at spacing `d`, indices `0..n`:
/// `1/(4d²)` at zero, `-1/(π²k²d²)` at odd `k`, zero at even `k`.
pub fn ram_lak_kernel(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k == 0 {
                1.0 / (4.0 * d * d)
            } else if k % 2 == 1 {
                -1.0 / (PI * PI * (k * k) as f64 * d * d)
            } else {
                0.0
            }
        })
        .collect()
}

/// Convolves every row of `rows × n` data with the ramp kernel via FFT.
fn ramp_filter(data: &[f64], n: usize, d: f64) -> Vec<f64> {
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let kernel = ram_lak_kernel(n, d);
    let mut h = vec![Complex::new(0.0, 0.0); len];
    h[0].re = kernel[0];
    for k in 1..n {
        h[k].re = kernel[k];
        h[len - k].re = kernel[k];
    }
    fwd.process(&mut h);

    let mut out = Vec::with_capacity(data.len());
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for row in data.chunks(n) {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (b, v) in buf.iter_mut().zip(row) {
            b.re = *v;
        }
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&h) {
            *b *= k;
        }
        inv.process(&mut buf);
        out.extend(buf[..n].iter().map(|c| c.re * d / len as f64));
    }
    out
}

/// Filtered back-projection of one frame onto a `size × size` grid.
pub fn fbp_frame(frame: &[f64], angles: &[f64], offsets: &[f64], size: usize) -> Result<Vec<f64>> {
    let n = offsets.len();
    if frame.len() != angles.len() * n || n < 2 {
        return Err(Error::Shape(format!(
            "{} samples for {} angles × {n} offsets",
            frame.len(),
            angles.len()
        )));
    }
    let d = offsets[1] - offsets[0];
    let filtered = ramp_filter(frame, n, d);
    let h = 2.0 / size as f64;
    let mask = disk_mask(size);
    let scale = PI / angles.len() as f64;
    let mut image = vec![0.0; size * size];
    for (a, phi) in angles.iter().enumerate() {
        let (sin, cos) = phi.sin_cos();
        let row = &filtered[a * n..(a + 1) * n];
        for i in 0..size {
            let y = -1.0 + (i as f64 + 0.5) * h;
            for j in 0..size {
                let idx = i * size + j;
                if mask[idx] == 0.0 {
                    continue;
                }
                let x = -1.0 + (j as f64 + 0.5) * h;
                let pos = (x * cos + y * sin - offsets[0]) / d;
                let k0 = pos.floor();
                let frac = pos - k0;
                let k0 = k0 as isize;
                let mut v = 0.0;
                if k0 >= 0 && (k0 as usize) < n {
                    v += (1.0 - frac) * row[k0 as usize];
                }
                if k0 + 1 >= 0 && ((k0 + 1) as usize) < n {
                    v += frac * row[(k0 + 1) as usize];
                }
                image[idx] += scale * v;
            }
        }
    }
    Ok(image)
}

/// Frame-by-frame filtered back-projection of a dynamic sinogram.
pub fn fbp(psi: &Sinogram, size: usize) -> Result<Volume> {
    let g = &psi.geometry;
    let offsets = g.offsets();
    let mut vol = Volume::zeros(g.n_time_steps, size, g.horizon);
    for k in 0..g.n_time_steps {
        let frame = fbp_frame(psi.frame(k), &g.angles_at(k), &offsets, size)?;
        vol.frame_mut(k).copy_from_slice(&frame);
    }
    Ok(vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radon::{static_forward, AngleMode, GeometrySpec};

    #[test]
    fn kernel_values() {
        let k = ram_lak_kernel(4, 0.5);
        assert!((k[0] - 1.0).abs() < 1e-15);
        assert!((k[1] + 4.0 / (PI * PI)).abs() < 1e-15);
        assert_eq!(k[2], 0.0);
    }

    #[test]
    fn dense_angle_disk_reconstruction() {
        let n = 64;
        let h = 2.0 / n as f64;
        let mut image = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (-1.0 + (j as f64 + 0.5) * h, -1.0 + (i as f64 + 0.5) * h);
                if (x - 0.1).powi(2) + (y + 0.05).powi(2) <= 0.5f64.powi(2) {
                    image[i * n + j] = 1.0;
                }
            }
        }
        let g = GeometrySpec::new(128, 180, 1, AngleMode::Fixed, 1.0).unwrap();
        let sino = static_forward(&image, n, &g.angles_at(0), &g.offsets()).unwrap();
        let reco = fbp_frame(&sino, &g.angles_at(0), &g.offsets(), n).unwrap();
        let num: f64 = reco.iter().zip(&image).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = image.iter().map(|b| b * b).sum();
        let err = (num / den).sqrt();
        assert!(err < 0.10, "relative error {err}");
    }

    #[test]
    fn zero_sinogram_gives_zero_image() {
        let g = GeometrySpec::new(20, 5, 2, AngleMode::Rotating, 1.0).unwrap();
        let vol = fbp(&Sinogram::zeros(g), 15).unwrap();
        assert!(vol.values.iter().all(|v| *v == 0.0));
    }
}
