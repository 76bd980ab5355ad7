//! Histogram matching by cumulative-distribution inversion.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Real;

pub const DEFAULT_BINS: usize = 256;

/// Equal-width binning of `[lo, hi]`.
#[derive(Clone, Copy, Debug)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidParameter(format!("histogram needs >= 2 bins, got {bins}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidParameter(format!("bad histogram range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, bins })
    }

    /// Range covering both images.
    pub fn spanning<T: Real>(a: &GrayImage<T>, b: &GrayImage<T>, bins: usize) -> Result<Self> {
        let (alo, ahi) = a.min_max();
        let (blo, bhi) = b.min_max();
        Self::new(alo.min(blo).as_f64(), ahi.max(bhi).as_f64(), bins)
    }

    #[inline]
    pub fn index(&self, v: f64) -> usize {
        let span = self.hi - self.lo;
        if !(span > 0.0) {
            return 0;
        }
        let i = ((v - self.lo) / span * self.bins as f64).floor();
        (i.max(0.0) as usize).min(self.bins - 1)
    }

    /// Cumulative counts per bin.
    pub fn cumulative<T: Real>(&self, img: &GrayImage<T>) -> Vec<u64> {
        let mut counts = vec![0u64; self.bins];
        for &v in img.data() {
            counts[self.index(v.as_f64())] += 1;
        }
        let mut acc = 0;
        counts
            .into_iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect()
    }
}

/// Maps `src` so that its histogram follows `reference`.
///
/// Both images are binned over their joint value range. The source CDF is
/// taken from the histogram and interpolated linearly inside each bin; each
/// sample becomes the smallest reference value whose empirical CDF exceeds
/// the sample's interpolated CDF. The mapping is non-decreasing.
pub fn match_histogram<T: Real>(src: &GrayImage<T>, reference: &GrayImage<T>, bins: usize) -> Result<GrayImage<T>> {
    let binning = Binning::spanning(src, reference, bins)?;
    if binning.hi == binning.lo {
        return Ok(src.clone());
    }
    let cdf_s = binning.cumulative(src);
    let sorted = sorted_samples(reference);
    let (n_s, n_r) = (src.len() as f64, sorted.len());
    let width = (binning.hi - binning.lo) / bins as f64;
    Ok(src.map(|v| {
        let v = v.as_f64();
        let b = binning.index(v);
        let below = if b == 0 { 0 } else { cdf_s[b - 1] };
        let frac = ((v - binning.lo) / width - b as f64).clamp(0.0, 1.0);
        let position = below as f64 + frac * (cdf_s[b] - below) as f64;
        let k = ((position / n_s * n_r as f64).floor() + 1.0).min(n_r as f64) as usize;
        sorted[k - 1]
    }))
}

/// Classic lookup-table matching: every sample of source bin `b` becomes the
/// smallest reference value whose empirical CDF reaches the source CDF at the
/// top of `b`. Output takes at most `bins` distinct values.
pub fn match_histogram_binned<T: Real>(src: &GrayImage<T>, reference: &GrayImage<T>, bins: usize) -> Result<GrayImage<T>> {
    let binning = Binning::spanning(src, reference, bins)?;
    if binning.hi == binning.lo {
        return Ok(src.clone());
    }
    let cdf_s = binning.cumulative(src);
    let sorted = sorted_samples(reference);
    let (n_s, n_r) = (src.len() as u128, sorted.len() as u128);
    // F_ref(x_(k)) = k / n_r >= cdf_s[b] / n_s  <=>  k = ceil(cdf_s[b] * n_r / n_s), exact in integers
    let lut: Vec<T> = cdf_s
        .iter()
        .map(|&c| sorted[(c as u128 * n_r).div_ceil(n_s).max(1) as usize - 1])
        .collect();
    Ok(src.map(|v| lut[binning.index(v.as_f64())]))
}

fn sorted_samples<T: Real>(img: &GrayImage<T>) -> Vec<T> {
    let mut v = img.data().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}
