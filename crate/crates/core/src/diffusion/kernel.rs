use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::Spectrum3D;

/// Treatment of the joint zero-frequency bin, where the kernel's square root vanishes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DcPolicy {
    /// Multiplier 0; callers restore the mean afterwards.
    #[default]
    Annihilate,
    /// Multiplier 1; the mean passes through untouched.
    Pass,
}

impl std::str::FromStr for DcPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "annihilate" => Ok(Self::Annihilate),
            "pass" => Ok(Self::Pass),
            _ => Err(Error::InvalidParameter(format!("dc policy must be annihilate or pass, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for DcPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Annihilate => "annihilate",
            Self::Pass => "pass",
        })
    }
}

/// `sqrt(xi^2 + i*omega/K)` over a spectrum's frequency grids (principal root).
///
/// Values are evaluated on demand from the separable grids instead of being
/// materialized as a full complex volume.
#[derive(Clone, Debug)]
pub struct DiffusionKernel<T = f64> {
    xi2: Vec<T>,
    omega: Vec<T>,
    k_diff: T,
    dc_policy: DcPolicy,
}

pub fn deconvolution_kernel<T: Real>(xi2: &[T], omega: &[T], k_diff: T, dc_policy: DcPolicy) -> Result<DiffusionKernel<T>> {
    if !(k_diff > T::zero()) || !k_diff.is_finite() {
        return Err(Error::InvalidParameter(format!("diffusion coefficient must be positive, got {k_diff}")));
    }
    if xi2.is_empty() || omega.is_empty() {
        return Err(Error::Dimensions("empty frequency grid".into()));
    }
    Ok(DiffusionKernel { xi2: xi2.to_vec(), omega: omega.to_vec(), k_diff, dc_policy })
}

impl<T: Real> DiffusionKernel<T> {
    pub fn for_spectrum(spec: &Spectrum3D<T>, k_diff: T, dc_policy: DcPolicy) -> Result<Self> {
        deconvolution_kernel(spec.xi2(), spec.omega(), k_diff, dc_policy)
    }

    pub fn dc_policy(&self) -> DcPolicy {
        self.dc_policy
    }

    /// Kernel at temporal bin `t` and flat spatial bin `p`.
    #[inline]
    pub fn at(&self, t: usize, p: usize) -> Complex<T> {
        let xi2 = self.xi2[p];
        let w = self.omega[t];
        if xi2 == T::zero() && w == T::zero() {
            return match self.dc_policy {
                DcPolicy::Annihilate => Complex::new(T::zero(), T::zero()),
                DcPolicy::Pass => Complex::new(T::one(), T::zero()),
            };
        }
        Complex::new(xi2, w / self.k_diff).sqrt()
    }

    /// The kernel as a dense layer-major volume.
    pub fn to_volume(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.omega.len() * self.xi2.len());
        for t in 0..self.omega.len() {
            for p in 0..self.xi2.len() {
                out.push(self.at(t, p));
            }
        }
        out
    }

    /// Multiplies every bin of `spec` by the kernel.
    pub fn apply(&self, spec: &mut Spectrum3D<T>) -> Result<()> {
        let (l, r, c) = spec.dims();
        if l != self.omega.len() || r * c != self.xi2.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel grid {}x{} vs spectrum {l}x{}",
                self.omega.len(),
                self.xi2.len(),
                r * c
            )));
        }
        use rayon::prelude::*;
        spec.data.par_chunks_mut(r * c).enumerate().for_each(|(t, layer)| {
            for (p, z) in layer.iter_mut().enumerate() {
                *z = *z * self.at(t, p);
            }
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{spatial_xi2, temporal_omega};

    #[test]
    fn scalar_examples() {
        let k = deconvolution_kernel(&[0.0, 1.0], &[0.0, 2.0], 1.0f64, DcPolicy::Annihilate).unwrap();
        assert_eq!(k.at(0, 1), Complex::new(1.0, 0.0));
        assert_eq!(k.at(0, 0), Complex::new(0.0, 0.0));
        let z = k.at(1, 0);
        // sqrt(2i) = 1 + i
        assert!((z - Complex::new(1.0, 1.0)).norm() < 1e-15);
        assert!((z * z - Complex::new(0.0, 2.0)).norm() < 1e-15);
        let pass = deconvolution_kernel(&[0.0], &[0.0], 1.0f64, DcPolicy::Pass).unwrap();
        assert_eq!(pass.at(0, 0), Complex::new(1.0, 0.0));
    }

    #[test]
    fn rejects_nonpositive_k() {
        assert!(deconvolution_kernel(&[0.0], &[0.0], 0.0f64, DcPolicy::Annihilate).is_err());
        assert!(deconvolution_kernel(&[0.0], &[0.0], -2.0f64, DcPolicy::Annihilate).is_err());
    }

    #[test]
    fn real_magnitude_at_zero_temporal_frequency() {
        let xi2 = spatial_xi2::<f64>(6, 5);
        let k = deconvolution_kernel(&xi2, &[0.0], 1.7, DcPolicy::Annihilate).unwrap();
        for (p, &x) in xi2.iter().enumerate() {
            let z = k.at(0, p);
            assert_eq!(z.im, 0.0);
            assert!((z.re - x.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn principal_branch_and_conjugate_symmetry() {
        let (l, r, c) = (7usize, 4usize, 5usize);
        let xi2 = spatial_xi2::<f64>(r, c);
        let om = temporal_omega::<f64>(l, 1.0);
        let k = deconvolution_kernel(&xi2, &om, 0.8, DcPolicy::Annihilate).unwrap();
        for t in 0..l {
            for rr in 0..r {
                for cc in 0..c {
                    let z = k.at(t, rr * c + cc);
                    assert!(z.re >= 0.0);
                    let mirror = k.at((l - t) % l, ((r - rr) % r) * c + (c - cc) % c);
                    assert!((mirror - z.conj()).norm() < 1e-14);
                }
            }
        }
    }
}
