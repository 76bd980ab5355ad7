//! Single-scattering atmospheric haze model and its inversion.
//!
//! With transmittance `t = exp(-beta * z)` the observed intensity is
//! `I = L t + A_inf (1 - t)`, the second term being the airlight `A`.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Real;

/// Transmittance below which the inverse model is not evaluated.
pub const MIN_TRANSMITTANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ScatterParams<T = f64> {
    beta: T,
    a_inf: T,
    depth: GrayImage<T>,
}

impl<T: Real> ScatterParams<T> {
    /// `beta > 0`, `0 < a_inf <= 1`, depth `>= 0` everywhere.
    pub fn new(beta: T, a_inf: T, depth: GrayImage<T>) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(a_inf > T::zero() && a_inf <= T::one()) {
            return Err(Error::InvalidParameter(format!("a_inf must be in (0, 1], got {a_inf}")));
        }
        if depth.data().iter().any(|&z| !(z >= T::zero())) {
            return Err(Error::InvalidParameter("depth must be non-negative everywhere".into()));
        }
        Ok(Self { beta, a_inf, depth })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn a_inf(&self) -> T {
        self.a_inf
    }

    pub fn depth(&self) -> &GrayImage<T> {
        &self.depth
    }

    pub fn transmittance(&self) -> GrayImage<T> {
        self.depth.map(|z| (-self.beta * z).exp())
    }
}

/// Hazy image and airlight.
#[derive(Clone, Debug)]
pub struct Hazy<T = f64> {
    pub image: GrayImage<T>,
    pub airlight: GrayImage<T>,
}

pub fn synth_haze<T: Real>(scene: &GrayImage<T>, p: &ScatterParams<T>) -> Result<Hazy<T>> {
    scene.ensure_same_dims(&p.depth)?;
    let t = p.transmittance();
    let airlight = t.map(|t| p.a_inf * (T::one() - t));
    let image = scene.zip_map(&t, |l, t| l * t)?.zip_map(&airlight, |d, a| d + a)?;
    Ok(Hazy { image, airlight })
}

/// Recovered scene radiance, plus the number of pixels where
/// `1 - A/A_inf < 1e-6` and the observed value was passed through.
pub fn invert_haze<T: Real>(image: &GrayImage<T>, airlight: &GrayImage<T>, a_inf: T) -> Result<(GrayImage<T>, usize)> {
    if !(a_inf > T::zero()) {
        return Err(Error::InvalidParameter(format!("a_inf must be positive, got {a_inf}")));
    }
    image.ensure_same_dims(airlight)?;
    let floor = T::lit(MIN_TRANSMITTANCE);
    let mut violations = 0;
    let data = image
        .data()
        .iter()
        .zip(airlight.data())
        .map(|(&i, &a)| {
            let t = T::one() - a / a_inf;
            if t < floor {
                violations += 1;
                i
            } else {
                (i - a) / t
            }
        })
        .collect();
    Ok((GrayImage::new(image.rows(), image.cols(), data)?, violations))
}

/// Depth increasing linearly from 0 at the left column to `max_depth` at the right.
pub fn depth_ramp<T: Real>(rows: usize, cols: usize, max_depth: T) -> Result<GrayImage<T>> {
    let denom = T::from_count(cols.saturating_sub(1).max(1));
    GrayImage::from_fn(rows, cols, |_, c| max_depth * T::from_count(c) / denom)
}

/// Depth `near` above row `split` and `far` from it on.
pub fn depth_step<T: Real>(rows: usize, cols: usize, split: usize, near: T, far: T) -> Result<GrayImage<T>> {
    GrayImage::from_fn(rows, cols, |r, _| if r < split { near } else { far })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_medium_is_identity() {
        let scene = GrayImage::from_fn(3, 4, |r, c| (r + c) as f64 / 7.0).unwrap();
        let p = ScatterParams::new(0.7, 0.9, GrayImage::zeros(3, 4).unwrap()).unwrap();
        let h = synth_haze(&scene, &p).unwrap();
        assert_eq!(h.image, scene);
        assert!(h.airlight.data().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn infinite_depth_is_pure_airlight() {
        let scene = GrayImage::from_fn(2, 2, |r, c| (r * 2 + c) as f64 / 4.0).unwrap();
        let p = ScatterParams::new(1.0, 0.8, GrayImage::filled(2, 2, 1e9).unwrap()).unwrap();
        let h = synth_haze(&scene, &p).unwrap();
        assert!(h.image.data().iter().all(|&v| v == 0.8));
    }

    #[test]
    fn half_transmittance_example() {
        let ln2 = std::f64::consts::LN_2;
        let p = ScatterParams::new(ln2, 1.0, GrayImage::filled(1, 1, 1.0).unwrap()).unwrap();
        let h = synth_haze(&GrayImage::filled(1, 1, 0.5).unwrap(), &p).unwrap();
        // independent scalar evaluation
        let t = (-ln2 * 1.0f64).exp();
        assert!((t - 0.5).abs() < 1e-15);
        assert!((h.airlight[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((h.image[(0, 0)] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        let i = GrayImage::filled(1, 1, 0.75f64).unwrap();
        let (l, n) = invert_haze(&i, &GrayImage::filled(1, 1, 0.5).unwrap(), 1.0).unwrap();
        assert!((l[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(n, 0);
        let (l, _) = invert_haze(&i, &GrayImage::zeros(1, 1).unwrap(), 1.0).unwrap();
        assert_eq!(l, i);
    }

    #[test]
    fn saturated_airlight_passes_through() {
        let i = GrayImage::filled(1, 2, 0.9).unwrap();
        let a = GrayImage::new(1, 2, vec![1.0, 0.2]).unwrap();
        let (l, n) = invert_haze(&i, &a, 1.0).unwrap();
        assert_eq!(n, 1);
        assert_eq!(l[(0, 0)], 0.9);
        assert!(invert_haze(&i, &a, 0.0).is_err());
    }

    #[test]
    fn invalid_params() {
        let d = GrayImage::zeros(1, 1).unwrap();
        assert!(ScatterParams::new(0.0, 1.0, d.clone()).is_err());
        assert!(ScatterParams::new(1.0, 1.5, d.clone()).is_err());
        assert!(ScatterParams::new(1.0, 1.0, GrayImage::filled(1, 1, -1.0).unwrap()).is_err());
        let p = ScatterParams::new(1.0, 1.0, d).unwrap();
        assert!(synth_haze(&GrayImage::zeros(2, 1).unwrap(), &p).is_err());
    }

    #[test]
    fn depth_generators() {
        let r = depth_ramp(2, 5, 4.0).unwrap();
        assert_eq!(r.row(1), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let s = depth_step(3, 1, 1, 0.5, 2.0).unwrap();
        assert_eq!(s.data(), &[0.5, 2.0, 2.0]);
    }
}
