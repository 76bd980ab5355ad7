//! Spatiotemporal Fourier transforms over [`ImageStack`] volumes.
//!
//! Forward transforms are unnormalized; the inverse carries the `1/N` factor.
//! Frequencies are angular: index `k` on an axis of length `n` maps to
//! `2*pi*k/n`, with `k - n` used for `k > n/2`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::Result;
use crate::scalar::Real;
use crate::stack::ImageStack;

/// Complex 3-D spectrum with its frequency grids.
#[derive(Clone, Debug)]
pub struct Spectrum3D<T = f64> {
    layers: usize,
    rows: usize,
    cols: usize,
    dt: T,
    /// Layer-major complex bins, same layout as the source stack.
    pub data: Vec<Complex<T>>,
    xi2: Vec<T>,
    omega: Vec<T>,
}

/// Signed DFT index: `k` for `k <= n/2`, else `k - n`.
#[inline]
pub fn signed_index(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Angular frequency of bin `k` on an axis of `n` samples spaced `spacing`.
pub fn angular_frequency<T: Real>(k: usize, n: usize, spacing: T) -> T {
    T::TAU() * T::lit(signed_index(k, n) as f64) / (T::from_count(n) * spacing)
}

/// Spatial `xi^2 = xi_row^2 + xi_col^2` on a `rows x cols` grid, unit pixel spacing.
pub fn spatial_xi2<T: Real>(rows: usize, cols: usize) -> Vec<T> {
    let xr: Vec<T> = (0..rows).map(|k| angular_frequency(k, rows, T::one())).collect();
    let xc: Vec<T> = (0..cols).map(|k| angular_frequency(k, cols, T::one())).collect();
    let mut out = Vec::with_capacity(rows * cols);
    for &a in &xr {
        for &b in &xc {
            out.push(a * a + b * b);
        }
    }
    out
}

/// Temporal angular frequencies for `layers` steps of spacing `dt`.
pub fn temporal_omega<T: Real>(layers: usize, dt: T) -> Vec<T> {
    (0..layers).map(|k| angular_frequency(k, layers, dt)).collect()
}

impl<T: Real> Spectrum3D<T> {
    /// Wraps complex bins, populating the frequency grids.
    pub fn from_bins(layers: usize, rows: usize, cols: usize, dt: T, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), layers * rows * cols, "spectrum data length");
        Self {
            layers,
            rows,
            cols,
            dt,
            data,
            xi2: spatial_xi2(rows, cols),
            omega: temporal_omega(layers, dt),
        }
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.layers, self.rows, self.cols)
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
    pub fn dt(&self) -> T {
        self.dt
    }

    /// Per-(row, col) spatial frequency magnitude squared, rad^2/px^2.
    #[inline]
    pub fn xi2(&self) -> &[T] {
        &self.xi2
    }

    /// Per-layer temporal angular frequency, rad/step.
    #[inline]
    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    #[inline]
    pub fn bin(&self, t: usize, r: usize, c: usize) -> Complex<T> {
        self.data[(t * self.rows + r) * self.cols + c]
    }

    /// Flat index of the conjugate-mirror bin `(-t, -r, -c)`.
    pub fn mirror_index(&self, t: usize, r: usize, c: usize) -> usize {
        let mt = (self.layers - t) % self.layers;
        let mr = (self.rows - r) % self.rows;
        let mc = (self.cols - c) % self.cols;
        (mt * self.rows + mr) * self.cols + mc
    }
}

/// Forward 3-D DFT of a real volume.
pub fn fft3<T: Real>(stack: &ImageStack<T>) -> Spectrum3D<T> {
    let (l, r, c) = stack.dims();
    let mut data: Vec<Complex<T>> = stack.data().iter().map(|&v| Complex::new(v, T::zero())).collect();
    transform_3d(&mut data, (l, r, c), FftDirection::Forward);
    Spectrum3D::from_bins(l, r, c, stack.dt(), data)
}

/// Inverse 3-D DFT, scaled by `1/N`. Returns the complex volume.
pub fn ifft3_complex<T: Real>(spec: &Spectrum3D<T>) -> Vec<Complex<T>> {
    let mut data = spec.data.clone();
    transform_3d(&mut data, spec.dims(), FftDirection::Inverse);
    let scale = T::one() / T::from_count(data.len());
    data.par_iter_mut().for_each(|z| *z = *z * scale);
    data
}

/// Inverse 3-D DFT keeping the real part.
pub fn ifft3<T: Real>(spec: &Spectrum3D<T>) -> Result<ImageStack<T>> {
    let (l, r, c) = spec.dims();
    let data = ifft3_complex(spec).into_iter().map(|z| z.re).collect();
    ImageStack::new(l, r, c, data)?.with_dt(spec.dt)
}

/// In-place unnormalized 3-D transform of a layer-major volume.
pub(crate) fn transform_3d<T: Real>(data: &mut [Complex<T>], (l, r, c): (usize, usize, usize), dir: FftDirection) {
    let mut planner = FftPlanner::<T>::new();
    let plane = r * c;

    // columns: contiguous lines
    let fft_c = planner.plan_fft(c, dir);
    data.par_chunks_mut(plane).for_each(|layer| run_lines(&fft_c, layer));

    // rows: transpose each layer, transform, transpose back
    if r > 1 {
        let fft_r = planner.plan_fft(r, dir);
        data.par_chunks_mut(plane).for_each(|layer| {
            let mut t = transpose(layer, r, c);
            run_lines(&fft_r, &mut t);
            transpose_into(&t, c, r, layer);
        });
    }

    // time: view as (layers x plane), transpose to (plane x layers)
    if l > 1 {
        let fft_t = planner.plan_fft(l, dir);
        let mut t = transpose(data, l, plane);
        t.par_chunks_mut(l * 64).for_each(|chunk| run_lines(&fft_t, chunk));
        transpose_into(&t, plane, l, data);
    }
}

fn run_lines<T: Real>(fft: &Arc<dyn Fft<T>>, buf: &mut [Complex<T>]) {
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

/// Transposes an `n_rows x n_cols` row-major matrix.
fn transpose<T: Copy + Send + Sync + Default>(src: &[T], n_rows: usize, n_cols: usize) -> Vec<T> {
    let mut out = vec![T::default(); src.len()];
    transpose_into(src, n_rows, n_cols, &mut out);
    out
}

fn transpose_into<T: Copy + Send + Sync>(src: &[T], n_rows: usize, n_cols: usize, dst: &mut [T]) {
    // dst is n_cols x n_rows
    dst.par_chunks_mut(n_rows).enumerate().for_each(|(j, out_row)| {
        for (i, o) in out_row.iter_mut().enumerate() {
            *o = src[i * n_cols + j];
        }
    });
}
