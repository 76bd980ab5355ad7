use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point-source solution of `dC/dt = K lap(C)` in three dimensions:
/// `(4 pi K t)^(-3/2) exp(-|X - X0|^2 / (4 K t))`.
pub fn analytic_diffusion_at<T: Real>(x: [T; 3], t: T, k_diff: T, x0: [T; 3]) -> Result<T> {
    check(t, k_diff)?;
    Ok(eval(x, t, k_diff, x0))
}

/// Evaluates the point-source solution on the tensor grid `xs x ys x zs`.
/// Output index `(i, j, l)` is at `(i * ys.len() + j) * zs.len() + l`.
pub fn analytic_diffusion<T: Real>(xs: &[T], ys: &[T], zs: &[T], t: T, k_diff: T, x0: [T; 3]) -> Result<Vec<T>> {
    check(t, k_diff)?;
    let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &x in xs {
        for &y in ys {
            for &z in zs {
                out.push(eval([x, y, z], t, k_diff, x0));
            }
        }
    }
    Ok(out)
}

fn check<T: Real>(t: T, k_diff: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("diffusion time must be positive, got {t}")));
    }
    if !(k_diff > T::zero()) {
        return Err(Error::InvalidParameter(format!("diffusion coefficient must be positive, got {k_diff}")));
    }
    Ok(())
}

#[inline]
fn eval<T: Real>(x: [T; 3], t: T, k: T, x0: [T; 3]) -> T {
    let four_kt = T::lit(4.0) * k * t;
    let r2 = (0..3).map(|i| (x[i] - x0[i]) * (x[i] - x0[i])).fold(T::zero(), |a, b| a + b);
    (T::PI() * four_kt).powf(T::lit(-1.5)) * (-r2 / four_kt).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_value() {
        let t = 1.0 / (4.0 * std::f64::consts::PI);
        let v = analytic_diffusion_at([0.5, -1.0, 2.0], t, 1.0, [0.5, -1.0, 2.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_time() {
        assert!(analytic_diffusion_at([0.0; 3], 0.0, 1.0f64, [0.0; 3]).is_err());
        assert!(analytic_diffusion(&[0.0], &[0.0], &[0.0], -1.0, 1.0f64, [0.0; 3]).is_err());
    }

    #[test]
    fn grid_layout() {
        let xs = [0.0, 1.0];
        let ys = [0.0, 2.0, 3.0];
        let zs = [0.0];
        let v = analytic_diffusion(&xs, &ys, &zs, 0.7, 1.3, [0.0; 3]).unwrap();
        let direct = analytic_diffusion_at([1.0, 2.0, 0.0], 0.7, 1.3, [0.0; 3]).unwrap();
        assert_eq!(v[3 + 1], direct);
    }
}
