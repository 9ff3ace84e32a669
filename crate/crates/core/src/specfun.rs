//! Gamma function on the positive axis plus a few scalar helpers.

use crate::error::{Error, Result};
use crate::real::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

// Observed truncation error of the g = 7 series on the right half plane.
const LANCZOS_TRUNCATION: f64 = 2.0e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaResult<T> {
    pub value: T,
    pub relative_error_bound: T,
}

/// Γ(x) for 0 < x < 171.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    gamma_with_bound(x).map(|g| g.value)
}

pub fn gamma_with_bound<T: Real>(x: T) -> Result<GammaResult<T>> {
    if !(x > T::zero()) {
        return Err(Error::Domain { function: "gamma", value: x.as_f64() });
    }
    if x >= T::lit(171.0) {
        return Err(Error::Overflow { function: "gamma", value: x.as_f64() });
    }
    // Shift small arguments up once instead of reflecting.
    let (z, divisor) = if x < T::lit(0.5) { (x + T::one(), x) } else { (x, T::one()) };

    let zm1 = z - T::one();
    let mut series = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + T::lit(c) / (zm1 + T::from_usize_lossy(i));
    }
    let t = zm1 + T::lit(LANCZOS_G + 0.5);
    // Split the power in two so large arguments do not overflow before exp(-t) kicks in.
    let half = (zm1 + T::lit(0.5)) / T::lit(2.0);
    let p = t.powf(half);
    let value = (T::TAU()).sqrt() * p * (p * (-t).exp()) * series / divisor;

    let eps = T::epsilon();
    let rounding = eps * T::lit(16.0) * (T::one() + t.ln().abs());
    let bound = rounding.max(T::lit(LANCZOS_TRUNCATION));
    Ok(GammaResult { value, relative_error_bound: bound })
}

/// cos x / sin x, refusing arguments where sin x underflows.
pub fn cot<T: Real>(x: T) -> Result<T> {
    let s = x.sin();
    if s.abs() <= T::min_positive_value().max(T::lit(1e-300)) {
        return Err(Error::Pole(x.as_f64()));
    }
    Ok(x.cos() / s)
}

/// sin(x)/x without cancellation near zero.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// sin(πx), exactly zero at integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    if r == T::zero() || r.abs() == T::one() {
        return T::zero();
    }
    (T::PI() * r).sin()
}

/// log(Σ exp(xᵢ)) with the max factored out. Empty input gives -∞.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
