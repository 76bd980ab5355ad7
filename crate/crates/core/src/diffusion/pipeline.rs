use std::time::Instant;

use log::debug;
use rayon::prelude::*;

use super::blur::build_diffusion_stack;
use super::kernel::DiffusionKernel;
use super::DehazeParams;
use crate::error::{Error, Result};
use crate::image::{GrayImage, Resample};
use crate::scalar::Real;
use crate::spectrum::{fft3, ifft3_complex, Spectrum3D};
use crate::stack::ImageStack;

/// Blurred-minus-original layers, smoothed in time and then thinned to every
/// `t_downsample`-th layer.
pub fn blur_increments<T: Real>(stack: &ImageStack<T>, original: &GrayImage<T>, p: &DehazeParams) -> Result<ImageStack<T>> {
    p.validate()?;
    if (stack.rows(), stack.cols()) != original.dims() {
        return Err(Error::DimensionMismatch(format!(
            "stack layers {}x{} vs original {}x{}",
            stack.rows(),
            stack.cols(),
            original.rows(),
            original.cols()
        )));
    }
    let mut inc = stack.clone();
    let n = stack.plane_len();
    inc.data_mut().par_chunks_mut(n).for_each(|layer| {
        for (v, &o) in layer.iter_mut().zip(original.data()) {
            *v = *v - o;
        }
    });
    inc.smooth_time(p.smooth_window)?.subsample_time(p.t_downsample)
}

/// Result of [`apply_deconvolution`].
#[derive(Clone, Debug)]
pub struct Deconvolved<T = f64> {
    /// Restored volume at the reduced spatial resolution.
    pub stack: ImageStack<T>,
    /// Largest `|Im|` of the inverse transform before the real part was taken.
    pub max_imag_residue: T,
    /// Largest `|Re|` of the inverse transform.
    pub volume_max: T,
}

/// Reverses the simulated diffusion of an increment volume.
///
/// Stages: replicate padding, bilinear spatial reduction, temporal smoothing,
/// replicate extension of the time axis, forward FFT, multiplication by the
/// deconvolution kernel, inverse FFT, real part, crop back to the padded-out
/// region, and restoration of each layer's pre-transform mean.
///
/// The extended time length is rounded up to an odd number so that no
/// temporal bin is its own conjugate mirror; the kernel is then exactly
/// Hermitian and a real volume stays real.
pub fn apply_deconvolution<T: Real>(stack: &ImageStack<T>, p: &DehazeParams) -> Result<Deconvolved<T>> {
    p.validate()?;
    let (layers, rows, cols) = stack.dims();
    if p.pad_t > layers || p.pad_s > rows || p.pad_s > cols {
        return Err(Error::Dimensions(format!(
            "pads (t={}, s={}) larger than {layers}x{rows}x{cols} volume",
            p.pad_t, p.pad_s
        )));
    }

    let padded = stack.pad_replicate_3d(p.pad_t, p.pad_s, p.pad_s);
    let (pr, pc) = (padded.rows(), padded.cols());
    let (dr, dc) = (pr.div_ceil(p.s_downsample), pc.div_ceil(p.s_downsample));
    let reduced = padded.resample_layers(dr, dc, Resample::Bilinear)?;
    drop(padded);
    let reduced = reduced.smooth_time(p.smooth_window)?;

    // original region inside the reduced grid
    let crop_r = reduced_pad(p.pad_s, pr, dr);
    let crop_c = reduced_pad(p.pad_s, pc, dc);
    if 2 * crop_r >= dr || 2 * crop_c >= dc {
        return Err(Error::Dimensions(format!(
            "spatial pad {} leaves nothing of the {dr}x{dc} reduced grid",
            p.pad_s
        )));
    }
    let target_means = reduced.crop_range(p.pad_t, layers, crop_r, crop_c)?.layer_means();

    let mut ext_len = reduced.layers() * p.t_extend_factor;
    if ext_len.is_multiple_of(2) {
        ext_len += 1;
    }
    let (extended, front) = reduced.extend_time(ext_len)?;
    drop(reduced);

    let t0 = Instant::now();
    let mut spec: Spectrum3D<T> = fft3(&extended);
    let kernel = DiffusionKernel::for_spectrum(&spec, T::lit(p.k_diff), p.dc_policy)?;
    kernel.apply(&mut spec)?;
    let restored = ifft3_complex(&spec);
    drop(spec);
    debug!("spectral stage {:?} on {:?}", t0.elapsed(), extended.dims());

    let (max_imag_residue, volume_max) = restored
        .iter()
        .fold((T::zero(), T::zero()), |(mi, mr), z| (mi.max(z.im.abs()), mr.max(z.re.abs())));
    let real = ImageStack::new(ext_len, dr, dc, restored.into_iter().map(|z| z.re).collect())?
        .with_dt(extended.dt())?;
    let mut out = real.crop_range(front + p.pad_t, layers, crop_r, crop_c)?;

    let n = out.plane_len();
    let current = out.layer_means();
    out.data_mut().par_chunks_mut(n).enumerate().for_each(|(t, layer)| {
        let shift = target_means[t] - current[t];
        layer.iter_mut().for_each(|v| *v = *v + shift);
    });
    Ok(Deconvolved { stack: out, max_imag_residue, volume_max })
}

/// Padding width measured on the reduced grid, for corner-aligned resampling
/// of `full` samples onto `reduced` samples.
fn reduced_pad(pad: usize, full: usize, reduced: usize) -> usize {
    if full <= 1 || reduced <= 1 {
        return 0;
    }
    (pad as f64 * (reduced - 1) as f64 / (full - 1) as f64).round() as usize
}

/// Averages adjacent layers into exactly `outputs` frames.
///
/// The sequence is first replicate-padded by one layer in front and as many
/// as needed at the back (or truncated) to `outputs + 1` layers; frame `j` is
/// the mean of padded layers `j` and `j + 1`. With 50 input layers and 51
/// outputs this pads one layer at each end.
pub fn pair_average<T: Real>(stack: &ImageStack<T>, outputs: usize) -> Result<ImageStack<T>> {
    if outputs == 0 {
        return Err(Error::InvalidParameter("outputs must be >= 1".into()));
    }
    let n = stack.plane_len();
    let last = stack.layers() - 1;
    let src = |k: usize| k.saturating_sub(1).min(last);
    let half = T::lit(0.5);
    let mut data = vec![T::zero(); outputs * n];
    data.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
        let a = stack.layer_slice(src(j));
        let b = stack.layer_slice(src(j + 1));
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = (x + y) * half;
        }
    });
    ImageStack::new(outputs, stack.rows(), stack.cols(), data)?.with_dt(stack.dt())
}

/// Output of [`dehaze`].
#[derive(Clone, Debug)]
pub struct Dehazed<T = f64> {
    /// `1 - normalize(mean(sequence))`, same dims as the input.
    pub image: GrayImage<T>,
    /// Restored sequence at input resolution, before normalization.
    pub sequence: ImageStack<T>,
    pub max_imag_residue: T,
    pub volume_max: T,
}

impl<T: Real> Dehazed<T> {
    /// Pointwise mean of the restored sequence, before normalization.
    pub fn mean_frame(&self) -> GrayImage<T> {
        self.sequence.mean_layer()
    }
}

/// Full pipeline: diffusion stack, increments, deconvolution, pairwise
/// averaging to `outputs` frames, resampling to input size, mean and inversion.
pub fn dehaze<T: Real>(img: &GrayImage<T>, p: &DehazeParams) -> Result<Dehazed<T>> {
    p.validate()?;
    let start = Instant::now();
    let stack = build_diffusion_stack(img, p)?;
    debug!("diffusion stack {:?}", start.elapsed());
    let inc = blur_increments(&stack, img, p)?;
    drop(stack);
    debug!("increments {:?}", start.elapsed());
    let deconv = apply_deconvolution(&inc, p)?;
    drop(inc);
    debug!("deconvolution {:?}", start.elapsed());
    let averaged = pair_average(&deconv.stack, p.outputs)?;
    let sequence = averaged.resample_layers(img.rows(), img.cols(), Resample::Bilinear)?;
    let image = sequence.mean_layer().normalized().map(|v| T::one() - v);
    debug!("dehaze total {:?}", start.elapsed());
    Ok(Dehazed {
        image,
        sequence,
        max_imag_residue: deconv.max_imag_residue,
        volume_max: deconv.volume_max,
    })
}
