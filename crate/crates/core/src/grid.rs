//! Sampled nonnegative functions on regular box grids (`d <= 3`) and their
//! on-disk format.
//!
//! File layout: one line of JSON (the header, terminated by `\n`) followed by
//! the samples as little-endian `f64`, row-major with the last axis fastest.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const FORMAT_NAME: &str = "polymax-grid";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, len: usize) -> Result<Self> {
        if len < 2 || !(max > min) {
            return Err(invalid(format!("axis needs len >= 2 and max > min, got [{min}, {max}] x {len}")));
        }
        Ok(Axis { min, step: (max - min) / (len - 1) as f64, len })
    }

    pub fn max(&self) -> f64 {
        self.min + (self.len - 1) as f64 * self.step
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    /// Same extent, `2 len - 1` points (half the step).
    pub fn refined(&self) -> Axis {
        Axis { min: self.min, step: 0.5 * self.step, len: 2 * self.len - 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    axes: Vec<Axis>,
    samples: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    d: usize,
    /// Per axis `[min, max, step]`.
    extent: Vec<[f64; 3]>,
    shape: Vec<usize>,
    dtype: String,
}

impl GridFunction {
    pub fn new(axes: Vec<Axis>, samples: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(invalid(format!("grid functions live in d = 1..3, got d = {}", axes.len())));
        }
        let n: usize = axes.iter().map(|a| a.len).product();
        if samples.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: samples.len() });
        }
        if let Some(bad) = samples.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("grid samples must be finite and nonnegative, found {bad}")));
        }
        Ok(GridFunction { axes, samples })
    }

    pub fn from_fn(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n: usize = axes.iter().map(|a| a.len).product();
        let mut samples = Vec::with_capacity(n);
        let mut x = vec![0.0; axes.len()];
        for idx in 0..n {
            Self::point_into(&axes, idx, &mut x);
            samples.push(f(&x));
        }
        Self::new(axes, samples)
    }

    /// A grid with the same lattice and new values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(self.axes.clone(), samples)
    }

    pub fn d(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    fn point_into(axes: &[Axis], mut idx: usize, x: &mut [f64]) {
        for (j, axis) in axes.iter().enumerate().rev() {
            x[j] = axis.coord(idx % axis.len);
            idx /= axis.len;
        }
    }

    /// Lattice point of flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d()];
        Self::point_into(&self.axes, idx, &mut x);
        x
    }

    /// Whether `x` lies in the closed box spanned by the lattice.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes.iter().zip(x).all(|(a, &v)| v >= a.min - 1e-9 * a.step && v <= a.max() + 1e-9 * a.step)
    }

    /// Multilinear interpolation; zero outside the box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d());
        let mut base = 0usize;
        let mut fracs = [0.0f64; 3];
        let mut strides = [0usize; 3];
        let mut stride = 1usize;
        for j in (0..self.d()).rev() {
            let a = &self.axes[j];
            let u = (x[j] - a.min) / a.step;
            let top = (a.len - 1) as f64;
            if !(u >= -1e-9 && u <= top + 1e-9) {
                return 0.0;
            }
            let u = u.clamp(0.0, top);
            let i = (u.floor() as usize).min(a.len - 2);
            fracs[j] = u - i as f64;
            base += i * stride;
            strides[j] = stride;
            stride *= a.len;
        }
        let d = self.d();
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut off = base;
            for j in 0..d {
                if corner >> j & 1 == 1 {
                    w *= fracs[j];
                    off += strides[j];
                } else {
                    w *= 1.0 - fracs[j];
                }
            }
            if w != 0.0 {
                acc += w * self.samples[off];
            }
        }
        acc
    }

    /// Lattice `L^2` norm, `(sum f^2 * cell volume)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Same extent with every step halved, resampled from `f`.
    pub fn refined_from(&self, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::from_fn(self.axes.iter().map(Axis::refined).collect(), f)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            format: FORMAT_NAME.to_string(),
            version: 1,
            d: self.d(),
            extent: self.axes.iter().map(|a| [a.min, a.max(), a.step]).collect(),
            shape: self.axes.iter().map(|a| a.len).collect(),
            dtype: "f64-le".to_string(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for v in &self.samples {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = Vec::new();
        r.read_until(b'\n', &mut line)?;
        let header: Header = serde_json::from_slice(&line)?;
        if header.format != FORMAT_NAME || header.version != 1 || header.dtype != "f64-le" {
            return Err(Error::Format(format!("unsupported grid header: {} v{} {}", header.format, header.version, header.dtype)));
        }
        if header.extent.len() != header.d || header.shape.len() != header.d {
            return Err(Error::Format("header d does not match extent/shape".into()));
        }
        let axes = header
            .extent
            .iter()
            .zip(&header.shape)
            .map(|(e, &len)| {
                let axis = Axis { min: e[0], step: e[2], len };
                if len < 2 || !(e[2] > 0.0) || (axis.max() - e[1]).abs() > 1e-9 * (1.0 + e[1].abs()) {
                    return Err(Error::Format(format!("inconsistent axis {e:?} x {len}")));
                }
                Ok(axis)
            })
            .collect::<Result<Vec<_>>>()?;
        let n: usize = axes.iter().map(|a| a.len).product();
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)?;
        let samples = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(axes, samples)
    }
}
