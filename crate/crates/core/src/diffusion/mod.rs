//! Dehazing by simulated fog diffusion and spatiotemporal deconvolution.
//!
//! The input image is replicated into a stack whose layers are blurred with a
//! growing Gaussian, emulating fog spreading over time. The per-layer blur
//! increments form a (time, row, col) volume that is transformed with a 3-D
//! FFT and multiplied by `sqrt(xi^2 + i*omega/K)`, the reciprocal of the
//! diffusion transfer function. The restored sequence is averaged and inverted
//! into the final detail image.

mod analytic;
mod blur;
mod kernel;
mod pipeline;

pub use analytic::{analytic_diffusion, analytic_diffusion_at};
pub use blur::{build_diffusion_stack, gaussian_blur, gaussian_kernel_1d};
pub use kernel::{deconvolution_kernel, DcPolicy, DiffusionKernel};
pub use pipeline::{apply_deconvolution, blur_increments, dehaze, pair_average, Deconvolved, Dehazed};

use crate::error::{Error, Result};

/// Every tunable of the dehazing pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct DehazeParams {
    /// Depth of the simulated diffusion stack.
    pub layers: usize,
    /// Number of frames in the restored sequence.
    pub outputs: usize,
    /// Diffusion coefficient `K`.
    pub k_diff: f64,
    /// Blur sigma of the last stack layer, pixels.
    pub sigma_max: f64,
    /// Keep every n-th increment layer.
    pub t_downsample: usize,
    /// Spatial reduction factor before the transform.
    pub s_downsample: usize,
    /// Replicate padding on the time axis, layers per side.
    pub pad_t: usize,
    /// Replicate padding on both spatial axes, pixels per side.
    pub pad_s: usize,
    /// Temporal moving-average width, odd.
    pub smooth_window: usize,
    /// The time axis is extended to this multiple of its length before the FFT.
    pub t_extend_factor: usize,
    pub dc_policy: DcPolicy,
}

impl Default for DehazeParams {
    fn default() -> Self {
        Self {
            layers: 100,
            outputs: 51,
            k_diff: 1.0,
            sigma_max: 5.0,
            t_downsample: 2,
            s_downsample: 2,
            pad_t: 8,
            pad_s: 16,
            smooth_window: 3,
            t_extend_factor: 2,
            dc_policy: DcPolicy::default(),
        }
    }
}

impl DehazeParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if self.layers < 2 {
            return fail(format!("layers must be >= 2, got {}", self.layers));
        }
        if self.outputs < 1 {
            return fail("outputs must be >= 1".into());
        }
        if !(self.k_diff > 0.0) || !self.k_diff.is_finite() {
            return fail(format!("k_diff must be positive, got {}", self.k_diff));
        }
        if !(self.sigma_max > 0.0) || !self.sigma_max.is_finite() {
            return fail(format!("sigma_max must be positive, got {}", self.sigma_max));
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return fail(format!("smooth_window must be odd, got {}", self.smooth_window));
        }
        if self.t_downsample == 0 || self.s_downsample == 0 || self.t_extend_factor == 0 {
            return fail("t_downsample, s_downsample and t_extend_factor must be >= 1".into());
        }
        Ok(())
    }

    /// Blur sigma of stack layer `j`, linear from 0 to `sigma_max`.
    pub fn sigma_at(&self, j: usize) -> f64 {
        self.sigma_max * j as f64 / (self.layers - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = DehazeParams::default();
        p.validate().unwrap();
        assert_eq!((p.layers, p.outputs, p.k_diff), (100, 51, 1.0));
        assert_eq!(p.sigma_at(0), 0.0);
        assert_eq!(p.sigma_at(99), 5.0);
    }

    #[test]
    fn rejects_bad_params() {
        let base = DehazeParams::default();
        for p in [
            DehazeParams { layers: 1, ..base.clone() },
            DehazeParams { outputs: 0, ..base.clone() },
            DehazeParams { k_diff: 0.0, ..base.clone() },
            DehazeParams { k_diff: f64::NAN, ..base.clone() },
            DehazeParams { sigma_max: -1.0, ..base.clone() },
            DehazeParams { smooth_window: 4, ..base.clone() },
            DehazeParams { t_downsample: 0, ..base.clone() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
