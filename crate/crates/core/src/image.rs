//! Single-plane real image and 2-D resampling.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major single-plane image.
///
/// Samples are nominally in `[0, 1]` after loading, but intermediate products
/// (Stokes differences, blur increments) are free to leave that range.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Interpolation used by [`GrayImage::resample`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Resample {
    Nearest,
    #[default]
    Bilinear,
}

impl<T: Real> GrayImage<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimensions(format!("image must be non-empty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimensions(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, T::zero())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
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
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
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

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Sample with coordinates clamped into the image.
    #[inline]
    pub fn get_clamped(&self, r: isize, c: isize) -> T {
        let r = r.clamp(0, self.rows as isize - 1) as usize;
        let c = c.clamp(0, self.cols as isize - 1) as usize;
        self.data[r * self.cols + c]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two images of equal dimensions.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self[(r, c)]);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_count(self.len())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Affinely maps `[min, max]` onto `[0, 1]`. A constant image maps to zeros.
    pub fn normalized(&self) -> Self {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        if !(span > T::zero()) {
            return self.map(|_| T::zero());
        }
        self.map(|v| (v - lo) / span)
    }

    /// Converts the sample type.
    pub fn cast<U: Real>(&self) -> GrayImage<U> {
        GrayImage {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }

    /// Resamples to exactly `new_rows x new_cols`.
    ///
    /// Grid corners are aligned: output index `i` maps to source coordinate
    /// `i * (n_in - 1) / (n_out - 1)`, so the first and last samples of each
    /// axis are preserved and equal dimensions reproduce the input exactly.
    pub fn resample(&self, new_rows: usize, new_cols: usize, method: Resample) -> Result<Self> {
        if new_rows == 0 || new_cols == 0 {
            return Err(Error::Dimensions(format!(
                "resample target must be non-empty, got {new_rows}x{new_cols}"
            )));
        }
        if (new_rows, new_cols) == self.dims() {
            return Ok(self.clone());
        }
        let row_pos = axis_positions::<T>(self.rows, new_rows);
        let col_pos = axis_positions::<T>(self.cols, new_cols);
        let mut data = Vec::with_capacity(new_rows * new_cols);
        match method {
            Resample::Nearest => {
                for &y in &row_pos {
                    let r = nearest_index(y, self.rows);
                    for &x in &col_pos {
                        let c = nearest_index(x, self.cols);
                        data.push(self.data[r * self.cols + c]);
                    }
                }
            }
            Resample::Bilinear => {
                let col_taps: Vec<_> = col_pos.iter().map(|&x| linear_taps(x, self.cols)).collect();
                for &y in &row_pos {
                    let (r0, r1, wy) = linear_taps(y, self.rows);
                    let top = self.row(r0);
                    let bottom = self.row(r1);
                    for &(c0, c1, wx) in &col_taps {
                        let upper = top[c0] + (top[c1] - top[c0]) * wx;
                        let lower = bottom[c0] + (bottom[c1] - bottom[c0]) * wx;
                        data.push(upper + (lower - upper) * wy);
                    }
                }
            }
        }
        Self::new(new_rows, new_cols, data)
    }
}

fn axis_positions<T: Real>(n_in: usize, n_out: usize) -> Vec<T> {
    if n_out == 1 {
        return vec![T::from_count(n_in - 1) / T::lit(2.0)];
    }
    let scale = T::from_count(n_in - 1) / T::from_count(n_out - 1);
    (0..n_out).map(|i| T::from_count(i) * scale).collect()
}

fn nearest_index<T: Real>(x: T, n: usize) -> usize {
    x.round().to_usize().unwrap_or(0).min(n - 1)
}

/// Edge-clamped pair of source indices and the weight of the second.
fn linear_taps<T: Real>(x: T, n: usize) -> (usize, usize, T) {
    let x = x.max(T::zero()).min(T::from_count(n - 1));
    let i0 = x.floor().to_usize().unwrap_or(0).min(n - 1);
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, x - T::from_count(i0))
}

impl<T> Index<(usize, usize)> for GrayImage<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for GrayImage<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}
