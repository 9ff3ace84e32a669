//! Log-log decay-rate fits used by the residual studies.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit<T> {
    /// exponent s in |y| ≈ K·x^s
    pub slope: T,
    pub prefactor: T,
    pub r_squared: T,
}

/// Weighted least squares of log|y| against log x. Zero weights drop points.
pub fn loglog_fit<T: Real>(x: &[T], y: &[T], w: Option<&[T]>) -> Result<PowerFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Precondition("log-log fit needs at least two (x, y) pairs".into()));
    }
    let mut sw = T::zero();
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..x.len() {
        let wi = w.map_or(T::one(), |w| w[i]);
        if wi == T::zero() {
            continue;
        }
        if !(x[i] > T::zero()) || y[i] == T::zero() {
            return Err(Error::Precondition(format!("log-log fit needs x > 0 and y != 0 (point {i})")));
        }
        let (lx, ly) = (x[i].ln(), y[i].abs().ln());
        sw = sw + wi;
        sx = sx + wi * lx;
        sy = sy + wi * ly;
        sxx = sxx + wi * lx * lx;
        sxy = sxy + wi * lx * ly;
        syy = syy + wi * ly * ly;
    }
    let vx = sxx - sx * sx / sw;
    if !(vx > T::zero()) {
        return Err(Error::Precondition("log-log fit needs distinct abscissae".into()));
    }
    let cov = sxy - sx * sy / sw;
    let vy = syy - sy * sy / sw;
    let slope = cov / vx;
    let intercept = (sy - slope * sx) / sw;
    let r_squared = if vy > T::zero() { cov * cov / (vx * vy) } else { T::one() };
    Ok(PowerFit { slope, prefactor: intercept.exp(), r_squared })
}

/// Running maximum of |y| taken from the right, the envelope of a decaying oscillating sequence.
pub fn upper_envelope<T: Real>(y: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); y.len()];
    let mut m = T::zero();
    for i in (0..y.len()).rev() {
        m = m.max(y[i].abs());
        out[i] = m;
    }
    out
}

/// Whether |y| is non-increasing along the sequence.
pub fn is_monotone_decay<T: Real>(y: &[T]) -> bool {
    y.windows(2).all(|w| w[1].abs() <= w[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x: Vec<f64> = (1..=8).map(|k| 2f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|&x| -3.0 * x.powf(-0.75)).collect();
        let f = loglog_fit(&x, &y, None).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_monotone() {
        let e = upper_envelope(&[1.0f64, -0.2, 0.5, 0.1, -0.3, 0.05]);
        assert_eq!(e, vec![1.0, 0.5, 0.5, 0.3, 0.3, 0.05]);
        assert!(is_monotone_decay(&e));
        assert!(!is_monotone_decay(&[1.0f64, 0.2, 0.5]));
    }
}
