//! Time-ordered image volume (layers x rows x cols).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{GrayImage, Resample};
use crate::scalar::Real;

/// Layer-major real volume. Layer `j` is the sample at time `j * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageStack<T = f64> {
    layers: usize,
    rows: usize,
    cols: usize,
    data: Vec<T>,
    dt: T,
}

impl<T: Real> ImageStack<T> {
    pub fn new(layers: usize, rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if layers == 0 || rows == 0 || cols == 0 {
            return Err(Error::Dimensions(format!(
                "stack must be non-empty on every axis, got {layers}x{rows}x{cols}"
            )));
        }
        if data.len() != layers * rows * cols {
            return Err(Error::Dimensions(format!(
                "data length {} does not match {layers}x{rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { layers, rows, cols, data, dt: T::one() })
    }

    pub fn zeros(layers: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(layers, rows, cols, vec![T::zero(); layers * rows * cols])
    }

    /// Builds a stack from equally sized frames.
    pub fn from_layers(frames: Vec<GrayImage<T>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Dimensions("stack needs at least one layer".into()))?;
        let (rows, cols) = first.dims();
        let layers = frames.len();
        let mut data = Vec::with_capacity(layers * rows * cols);
        for f in frames {
            if f.dims() != (rows, cols) {
                return Err(Error::DimensionMismatch(format!(
                    "layer {}x{} in a {rows}x{cols} stack",
                    f.rows(),
                    f.cols()
                )));
            }
            data.extend(f.into_data());
        }
        Self::new(layers, rows, cols, data)
    }

    /// Replaces the time-step spacing.
    pub fn with_dt(mut self, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        self.dt = dt;
        Ok(self)
    }

    #[inline]
    pub fn layers(&self) -> usize {
        self.layers
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.layers, self.rows, self.cols)
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, t: usize, r: usize, c: usize) -> T {
        self.data[(t * self.rows + r) * self.cols + c]
    }

    pub fn layer_slice(&self, t: usize) -> &[T] {
        let n = self.plane_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn layer(&self, t: usize) -> GrayImage<T> {
        GrayImage::new(self.rows, self.cols, self.layer_slice(t).to_vec())
            .expect("stack layer has valid dims")
    }

    pub fn to_layers(&self) -> Vec<GrayImage<T>> {
        (0..self.layers).map(|t| self.layer(t)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn layer_means(&self) -> Vec<T> {
        let n = T::from_count(self.plane_len());
        self.data
            .chunks_exact(self.plane_len())
            .map(|l| l.iter().copied().sum::<T>() / n)
            .collect()
    }

    /// Pointwise mean over all layers.
    pub fn mean_layer(&self) -> GrayImage<T> {
        let n = self.plane_len();
        let mut acc = vec![T::zero(); n];
        for layer in self.data.chunks_exact(n) {
            for (a, &v) in acc.iter_mut().zip(layer) {
                *a = *a + v;
            }
        }
        let inv = T::one() / T::from_count(self.layers);
        acc.iter_mut().for_each(|a| *a = *a * inv);
        GrayImage::new(self.rows, self.cols, acc).expect("mean layer has valid dims")
    }

    /// Grows each axis by `2 * pad`, copying the nearest edge voxel.
    pub fn pad_replicate_3d(&self, pad_t: usize, pad_r: usize, pad_c: usize) -> Self {
        let (nl, nr, nc) = (self.layers + 2 * pad_t, self.rows + 2 * pad_r, self.cols + 2 * pad_c);
        let mut data = Vec::with_capacity(nl * nr * nc);
        for t in 0..nl {
            let st = t.saturating_sub(pad_t).min(self.layers - 1);
            for r in 0..nr {
                let sr = r.saturating_sub(pad_r).min(self.rows - 1);
                let src = &self.data[(st * self.rows + sr) * self.cols..][..self.cols];
                data.extend(std::iter::repeat_n(src[0], pad_c));
                data.extend_from_slice(src);
                data.extend(std::iter::repeat_n(src[self.cols - 1], pad_c));
            }
        }
        Self { layers: nl, rows: nr, cols: nc, data, dt: self.dt }
    }

    /// Removes `pad` voxels from both ends of each axis.
    pub fn crop_3d(&self, pad_t: usize, pad_r: usize, pad_c: usize) -> Result<Self> {
        self.crop_range(pad_t, self.layers.saturating_sub(2 * pad_t), pad_r, pad_c)
            .map_err(|_| {
                Error::Dimensions(format!(
                    "crop ({pad_t},{pad_r},{pad_c}) too large for {}x{}x{} stack",
                    self.layers, self.rows, self.cols
                ))
            })
    }

    /// Keeps `count` layers starting at `start`, and crops `pad_r` / `pad_c`
    /// from both spatial borders.
    pub fn crop_range(&self, start: usize, count: usize, pad_r: usize, pad_c: usize) -> Result<Self> {
        if count == 0 || start + count > self.layers || 2 * pad_r >= self.rows || 2 * pad_c >= self.cols {
            return Err(Error::Dimensions(format!(
                "crop of {count} layers from {start} with pads ({pad_r},{pad_c}) exceeds {}x{}x{}",
                self.layers, self.rows, self.cols
            )));
        }
        let (nr, nc) = (self.rows - 2 * pad_r, self.cols - 2 * pad_c);
        let mut data = Vec::with_capacity(count * nr * nc);
        for t in start..start + count {
            for r in pad_r..pad_r + nr {
                let off = (t * self.rows + r) * self.cols + pad_c;
                data.extend_from_slice(&self.data[off..off + nc]);
            }
        }
        Ok(Self { layers: count, rows: nr, cols: nc, data, dt: self.dt })
    }

    /// Per-pixel moving average along time, edge-replicated. `width` must be odd.
    pub fn smooth_time(&self, width: usize) -> Result<Self> {
        if width == 0 || width.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "temporal smoothing width must be odd, got {width}"
            )));
        }
        if width == 1 {
            return Ok(self.clone());
        }
        let half = width / 2;
        let n = self.plane_len();
        let inv = T::one() / T::from_count(width);
        let mut data = vec![T::zero(); self.data.len()];
        data.par_chunks_mut(n).enumerate().for_each(|(t, out)| {
            for k in 0..width {
                let src = (t + k).saturating_sub(half).min(self.layers - 1);
                for (o, &v) in out.iter_mut().zip(&self.data[src * n..(src + 1) * n]) {
                    *o = *o + v;
                }
            }
            out.iter_mut().for_each(|o| *o = *o * inv);
        });
        Ok(Self { data, ..self.clone_shape() })
    }

    /// Keeps every `step`-th layer starting from layer 0.
    pub fn subsample_time(&self, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidParameter("temporal step must be >= 1".into()));
        }
        let n = self.plane_len();
        let kept: Vec<usize> = (0..self.layers).step_by(step).collect();
        let mut data = Vec::with_capacity(kept.len() * n);
        for &t in &kept {
            data.extend_from_slice(&self.data[t * n..(t + 1) * n]);
        }
        Ok(Self {
            layers: kept.len(),
            data,
            dt: self.dt * T::from_count(step),
            ..self.clone_shape()
        })
    }

    /// Extends the time axis to `new_layers` by replicating the first and last
    /// layers. The extra layers are split between the two ends, the front
    /// receiving `extra / 2`. Returns the stack and the front offset.
    pub fn extend_time(&self, new_layers: usize) -> Result<(Self, usize)> {
        if new_layers < self.layers {
            return Err(Error::Dimensions(format!(
                "cannot extend {} layers to {new_layers}",
                self.layers
            )));
        }
        let front = (new_layers - self.layers) / 2;
        let n = self.plane_len();
        let mut data = Vec::with_capacity(new_layers * n);
        for t in 0..new_layers {
            let src = t.saturating_sub(front).min(self.layers - 1);
            data.extend_from_slice(&self.data[src * n..(src + 1) * n]);
        }
        Ok((Self { layers: new_layers, data, ..self.clone_shape() }, front))
    }

    /// Resamples every layer to `rows x cols`.
    pub fn resample_layers(&self, rows: usize, cols: usize, method: Resample) -> Result<Self> {
        let frames = (0..self.layers)
            .into_par_iter()
            .map(|t| self.layer(t).resample(rows, cols, method))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_layers(frames)?.with_dt(self.dt).expect("existing dt valid"))
    }

    fn clone_shape(&self) -> Self {
        Self { layers: self.layers, rows: self.rows, cols: self.cols, data: Vec::new(), dt: self.dt }
    }
}
