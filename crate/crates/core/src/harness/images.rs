//! 8-bit grayscale PNG frames. Values map linearly from the window `[0, 1]`
//! to `0..=255` and are clamped; the first image row is the top (`y = 1`).

use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};

use crate::error::{Error, Result};
use crate::radon::Volume;

pub const DEFAULT_FRAMES: [usize; 5] = [0, 5, 10, 15, 19];

pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        (v.clamp(0.0, 1.0) * 255.0).round() as u8
    }
}

pub fn frame_image(vol: &Volume, t: usize) -> Result<GrayImage> {
    if t >= vol.n_time {
        return Err(Error::Shape(format!("frame {t} of {}", vol.n_time)));
    }
    let n = vol.size;
    let frame = vol.frame(t);
    Ok(GrayImage::from_fn(n as u32, n as u32, |x, y| {
        let row = n - 1 - y as usize;
        Luma([to_byte(frame[row * n + x as usize])])
    }))
}

/// Frames to draw by default: the standard five for 20-frame volumes,
/// otherwise first, quarters and last.
pub fn default_frames(n_time: usize) -> Vec<usize> {
    if n_time == 20 {
        return DEFAULT_FRAMES.to_vec();
    }
    let mut v: Vec<usize> = (0..5).map(|i| i * (n_time - 1) / 4).collect();
    v.dedup();
    v
}

/// Writes `<prefix>_tNN.png` into `dir` for each requested frame.
pub fn emit_images(vol: &Volume, times: &[usize], dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    times
        .iter()
        .map(|&t| {
            let path = dir.join(format!("{prefix}_t{t:02}.png"));
            frame_image(vol, t)?.save_with_format(&path, image::ImageFormat::Png)?;
            Ok(path)
        })
        .collect()
}
