//! Attention heatmaps and rendered frames as plain Netpbm files, which
//! need no image dependency and open anywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Grayscale P5 image of a [rows, cols] matrix, brightest at the matrix
/// maximum. `upscale` repeats every entry into an NxN block so tiny
/// attention grids become visible images.
pub fn write_pgm(path: &Path, values: &Tensor, upscale: usize) -> Result<()> {
    assert!(upscale > 0, "upscale must be positive");
    assert_eq!(values.shape().len(), 2, "heatmaps are 2-d, got {:?}", values.shape());
    let (rows, cols) = (values.rows(), values.cols());
    let max = values.data().iter().copied().fold(0.0f64, f64::max);
    let mut buf = format!("P5\n{} {}\n255\n", cols * upscale, rows * upscale).into_bytes();
    for r in 0..rows * upscale {
        for c in 0..cols * upscale {
            let v = values.at2(r / upscale, c / upscale);
            let level = if max > 0.0 { ((v / max).clamp(0.0, 1.0) * 255.0).round() as u8 } else { 0 };
            buf.push(level);
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Color P6 image of a [h, w, 3] tensor with channel values in [0, 1].
pub fn write_ppm(path: &Path, image: &Tensor, upscale: usize) -> Result<()> {
    assert!(upscale > 0, "upscale must be positive");
    let shape = image.shape();
    assert!(
        shape.len() == 3 && shape[2] == 3,
        "expected [h, w, 3], got {shape:?}"
    );
    let (h, w) = (shape[0], shape[1]);
    let mut buf = format!("P6\n{} {}\n255\n", w * upscale, h * upscale).into_bytes();
    for r in 0..h * upscale {
        for c in 0..w * upscale {
            let base = ((r / upscale) * w + c / upscale) * 3;
            for ch in 0..3 {
                let v = image.data()[base + ch];
                buf.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// The exact numbers behind a heatmap, one row per line, full precision.
pub fn write_matrix_text(path: &Path, values: &Tensor) -> Result<()> {
    assert_eq!(values.shape().len(), 2, "matrices are 2-d, got {:?}", values.shape());
    let mut out = String::new();
    for r in 0..values.rows() {
        let row = values.row_slice(r);
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout_and_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let m = Tensor::new(&[2, 2], vec![0.0, 0.25, 0.5, 0.5]);
        write_pgm(&path, &m, 2).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n4 4\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        let body = &bytes[header.len()..];
        // Max 0.5 maps to 255, 0.25 to 128 (0.5 * 255 rounded), 0 to 0.
        assert_eq!(
            body,
            [
                0, 0, 128, 128, //
                0, 0, 128, 128, //
                255, 255, 255, 255, //
                255, 255, 255, 255,
            ]
        );
    }

    #[test]
    fn all_zero_heatmap_is_black_not_nan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.pgm");
        write_pgm(&path, &Tensor::zeros(&[3, 3]), 1).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.ends_with(&[0u8; 9]));
    }

    #[test]
    fn ppm_writes_rgb_triples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let img = Tensor::new(&[1, 2, 3], vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        write_ppm(&path, &img, 1).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"P6\n2 1\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], [255, 0, 0, 0, 255, 0]);
    }

    #[test]
    fn matrix_text_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        let m = Tensor::new(&[2, 2], vec![1.0 / 3.0, 0.125, -2.5, 1e-17]);
        write_matrix_text(&path, &m).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let parsed: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(parsed, m.data());
    }
}
