//! Polarization image dehazing and detail enhancement.
//!
//! The crate simulates fog as heat-like diffusion of an image, then undoes
//! that diffusion with a spatiotemporal Fourier deconvolution. Around that
//! core it provides polarization mosaic handling (angle planes, Stokes
//! parameters, DOLP, AOLP), a single-scattering haze synthesizer with exact
//! inversion, blind quality metrics and histogram matching.
//!
//! Containers and operations are generic over the sample type through
//! [`Real`]; the aliases below fix it to `f64` or `f32`.
//!
//! ```
//! use polarfog::{dehaze, DehazeParams, GrayImage64};
//!
//! let img = GrayImage64::from_fn(24, 24, |_, c| if c < 12 { 0.2 } else { 0.8 }).unwrap();
//! let params = DehazeParams { layers: 10, outputs: 5, pad_t: 2, pad_s: 4, ..Default::default() };
//! let out = dehaze(&img, &params).unwrap();
//! assert_eq!(out.image.dims(), (24, 24));
//! assert_eq!(out.sequence.layers(), 5);
//! ```

// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod histmatch;
pub mod image;
pub mod io;
pub mod metrics;
pub mod mosaic;
pub mod scalar;
pub mod scatter;
pub mod spectrum;
pub mod stack;

pub use diffusion::{
    analytic_diffusion, apply_deconvolution, blur_increments, build_diffusion_stack, deconvolution_kernel, dehaze,
    gaussian_blur, DcPolicy, DehazeParams, Dehazed, DiffusionKernel,
};
pub use error::{Error, Result};
pub use histmatch::{match_histogram, match_histogram_binned};
pub use image::{GrayImage, Resample};
pub use io::{load_image, load_stack, save_image16, save_stack};
pub use metrics::{metric_ag, metric_e, metric_rbar, metric_sd, metric_sigma, visible_edges, MetricsReport};
pub use mosaic::{aolp, demosaic, dolp, stokes, AnglePlanes, MosaicLayout, PolarFrame, Stokes};
pub use scalar::Real;
pub use scatter::{invert_haze, synth_haze, Hazy, ScatterParams};
pub use spectrum::{fft3, ifft3, Spectrum3D};
pub use stack::ImageStack;

/// Re-exported complex type used by spectra and kernels.
pub use rustfft::num_complex::Complex;

pub type GrayImage64 = GrayImage<f64>;
pub type GrayImage32 = GrayImage<f32>;
pub type ImageStack64 = ImageStack<f64>;
pub type ImageStack32 = ImageStack<f32>;
pub type Spectrum3D64 = Spectrum3D<f64>;
pub type Spectrum3D32 = Spectrum3D<f32>;
pub type PolarFrame64 = PolarFrame<f64>;
pub type DiffusionKernel64 = DiffusionKernel<f64>;
