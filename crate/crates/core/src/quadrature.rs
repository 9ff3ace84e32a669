//! Adaptive Gauss–Kronrod, Gauss–Legendre rules and Filon-type oscillatory quadrature.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::sinc;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = (b - a) / T::lit(2.0);
    let center = (a + b) / T::lit(2.0);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = half * T::lit(XGK[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[i]) * pair;
        if i % 2 == 1 {
            gauss = gauss + T::lit(WG[i / 2]) * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`.
///
/// Converges when the summed error estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral { value: T::zero(), abs_error: T::zero() });
    }
    let mut segs = vec![gk15(&f, a, b)];
    let roundoff = T::epsilon() * T::lit(50.0);
    loop {
        let value: T = segs.iter().map(|s| s.value).sum();
        let error: T = segs.iter().map(|s| s.error).sum();
        let scale: T = segs.iter().map(|s| s.value.abs()).sum();
        let target = abs_tol.max(rel_tol * value.abs()).max(roundoff * scale);
        if error <= target {
            return Ok(Integral { value, abs_error: error });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs[worst];
        let mid = (s.a + s.b) / T::lit(2.0);
        if segs.len() >= MAX_SUBINTERVALS || mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature { a: a.as_f64(), b: b.as_f64(), error: error.as_f64() });
        }
        segs[worst] = gk15(&f, s.a, mid);
        segs.push(gk15(&f, mid, s.b));
    }
}

/// Integrates over `[a, b]` split at the interior `points`, so kinks and jumps sit on panel edges.
pub fn integrate_split<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    points: &[T],
    abs_tol: T,
    rel_tol: T,
) -> Result<Integral<T>> {
    let edges = panel_edges(a, b, points);
    let share = abs_tol / T::from_usize_lossy(edges.len().max(2) - 1);
    let mut out = Integral { value: T::zero(), abs_error: T::zero() };
    for w in edges.windows(2) {
        let piece = integrate(&f, w[0], w[1], share, rel_tol)?;
        out.value = out.value + piece.value;
        out.abs_error = out.abs_error + piece.abs_error;
    }
    Ok(out)
}

/// Sorted edges `a, p₁, …, b` keeping only the points strictly inside `(a, b)`.
pub fn panel_edges<T: Real>(a: T, b: T, points: &[T]) -> Vec<T> {
    let mut edges = vec![a];
    let mut inner: Vec<T> = points.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    edges
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cos,
    Sin,
}

/// ∫ₗʳ cos(ks) ds or ∫ₗʳ sin(ks) ds in closed form.
pub fn trig_integral<T: Real>(kernel: Kernel, k: T, l: T, r: T) -> T {
    if r <= l {
        return T::zero();
    }
    let m = (l + r) / T::lit(2.0);
    let w = (r - l) / T::lit(2.0);
    let base = (r - l) * sinc(k * w);
    match kernel {
        Kernel::Cos => base * (k * m).cos(),
        Kernel::Sin => base * (k * m).sin(),
    }
}

// (sin z − z cos z)/z³
fn sj1<T: Real>(z: T) -> T {
    if z.abs() < T::lit(0.05) {
        let z2 = z * z;
        T::one() / T::lit(3.0) - z2 / T::lit(30.0) + z2 * z2 / T::lit(840.0)
    } else {
        (z.sin() - z * z.cos()) / (z * z * z)
    }
}

/// Exact ∫ of the piecewise-linear interpolant of `(xs, ys)` against cos(ks) or sin(ks).
pub fn filon_linear<T: Real>(kernel: Kernel, k: T, xs: &[T], ys: &[T]) -> T {
    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in 0..xs.len().saturating_sub(1) {
        let (l, r) = (xs[i], xs[i + 1]);
        let w = (r - l) / two;
        if w <= T::zero() {
            continue;
        }
        let m = (l + r) / two;
        let fm = (ys[i] + ys[i + 1]) / two;
        let slope = (ys[i + 1] - ys[i]) / (r - l);
        let even = two * w * sinc(k * w); // ∫ cos(ku) over [-w, w]
        let odd = two * k * w * w * w * sj1(k * w); // ∫ u sin(ku) over [-w, w]
        let (c, s) = ((k * m).cos(), (k * m).sin());
        total = total
            + match kernel {
                Kernel::Cos => fm * c * even - slope * s * odd,
                Kernel::Sin => fm * s * even + slope * c * odd,
            };
    }
    total
}

fn filon_weights<T: Real>(theta: T) -> (T, T, T) {
    if theta.abs() < T::lit(1.0 / 6.0) {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = T::lit(2.0 / 45.0) * t3 - T::lit(2.0 / 315.0) * t3 * t2 + T::lit(2.0 / 4725.0) * t3 * t2 * t2;
        let beta = T::lit(2.0 / 3.0) + T::lit(2.0 / 15.0) * t2 - T::lit(4.0 / 105.0) * t2 * t2
            + T::lit(2.0 / 567.0) * t2 * t2 * t2;
        let gamma = T::lit(4.0 / 3.0) - T::lit(2.0 / 15.0) * t2 + T::lit(1.0 / 210.0) * t2 * t2
            - T::lit(1.0 / 11340.0) * t2 * t2 * t2;
        (alpha, beta, gamma)
    } else {
        let (s, c) = (theta.sin(), theta.cos());
        let t3 = theta * theta * theta;
        let two = T::lit(2.0);
        let alpha = (theta * theta + theta * s * c - two * s * s) / t3;
        let beta = two * (theta * (T::one() + c * c) - two * s * c) / t3;
        let gamma = T::lit(4.0) * (s - theta * c) / t3;
        (alpha, beta, gamma)
    }
}

/// Composite Filon–Simpson rule with `2·panels` subintervals.
pub fn filon_simpson<T: Real, F: Fn(T) -> T>(f: &F, kernel: Kernel, k: T, a: T, b: T, panels: usize) -> T {
    let m = 2 * panels.max(1);
    let h = (b - a) / T::from_usize_lossy(m);
    let (alpha, beta, gamma) = filon_weights(k * h);
    let (fa, fb) = (f(a), f(b));
    let mut even = T::zero();
    let mut odd = T::zero();
    for i in 0..=m {
        let x = a + h * T::from_usize_lossy(i);
        let fx = if i == 0 { fa } else if i == m { fb } else { f(x) };
        let kx = match kernel {
            Kernel::Cos => (k * x).cos(),
            Kernel::Sin => (k * x).sin(),
        };
        let mut term = fx * kx;
        if i % 2 == 0 {
            if i == 0 || i == m {
                term = term / T::lit(2.0);
            }
            even = even + term;
        } else {
            odd = odd + term;
        }
    }
    let boundary = match kernel {
        Kernel::Cos => fb * (k * b).sin() - fa * (k * a).sin(),
        Kernel::Sin => -(fb * (k * b).cos() - fa * (k * a).cos()),
    };
    h * (alpha * boundary + beta * even + gamma * odd)
}

/// ∫ₐᵇ f(s)·cos(ks) or ·sin(ks) ds for a smooth `f`.
///
/// Uses Gauss–Kronrod when `k·(b−a) ≤ 20`, and Filon–Simpson with panel doubling above that.
pub fn oscillatory<T: Real, F: Fn(T) -> T>(f: &F, kernel: Kernel, k: T, a: T, b: T, abs_tol: T) -> Result<Integral<T>> {
    if b <= a {
        return Ok(Integral { value: T::zero(), abs_error: T::zero() });
    }
    if (k * (b - a)).abs() <= T::lit(20.0) {
        let g = |s: T| {
            f(s) * match kernel {
                Kernel::Cos => (k * s).cos(),
                Kernel::Sin => (k * s).sin(),
            }
        };
        return integrate(g, a, b, abs_tol, T::lit(1e-13));
    }
    let mut panels = 16usize.max((k.abs() * (b - a) / T::PI()).to_usize().unwrap_or(16));
    let mut prev = filon_simpson(f, kernel, k, a, b, panels);
    for _ in 0..14 {
        panels *= 2;
        let next = filon_simpson(f, kernel, k, a, b, panels);
        // Fourth-order rule: the Richardson correction estimates the remaining error.
        let err = (next - prev).abs() / T::lit(15.0);
        if err <= abs_tol.max(T::epsilon() * T::lit(100.0) * next.abs()) {
            return Ok(Integral { value: next + (next - prev) / T::lit(15.0), abs_error: err });
        }
        prev = next;
    }
    Err(Error::Quadrature { a: a.as_f64(), b: b.as_f64(), error: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_smooth_and_sqrt() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let r = integrate(|x: f64| (4.0 - x * x).max(0.0).sqrt(), 1.0, 2.0, 1e-11, 1e-12).unwrap();
        assert!((r.value - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-10);
    }

    #[test]
    fn split_handles_jump() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = integrate_split(step, 0.0, 1.0, &[0.3], 1e-12, 1e-12).unwrap();
        assert!((r.value - (0.3 + 1.4)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 10, 16] {
            let (x, w) = gauss_legendre::<f64>(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - want).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn trig_integrals() {
        assert!((trig_integral(Kernel::Sin, PI, 0.0, 1.0) - 2.0 / PI).abs() < 1e-15);
        assert!((trig_integral(Kernel::Cos, 0.0f64, -1.0, 2.0) - 3.0).abs() < 1e-15);
        let want = (3.0f64 * 2.0).sin() / 3.0 - (3.0f64 * 0.5).sin() / 3.0;
        assert!((trig_integral(Kernel::Cos, 3.0, 0.5, 2.0) - want).abs() < 1e-15);
    }

    #[test]
    fn filon_linear_exact_on_lines() {
        // f(s) = 1 + 2s on [0, 1], against cos(7s)
        let k = 7.0f64;
        let exact = |s: f64| (1.0 + 2.0 * s) * (k * s).sin() / k + 2.0 * (k * s).cos() / (k * k);
        let want = exact(1.0) - exact(0.0);
        let got = filon_linear(Kernel::Cos, k, &[0.0, 0.4, 1.0], &[1.0, 1.8, 3.0]);
        assert!((got - want).abs() < 1e-14);
        let exact_s = |s: f64| -(1.0 + 2.0 * s) * (k * s).cos() / k + 2.0 * (k * s).sin() / (k * k);
        let got = filon_linear(Kernel::Sin, k, &[0.0, 1.0], &[1.0, 3.0]);
        assert!((got - (exact_s(1.0) - exact_s(0.0))).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_high_frequency() {
        let f = |s: f64| s * s;
        let k = 400.0;
        let anti = |s: f64| s * s * (k * s).sin() / k + 2.0 * s * (k * s).cos() / (k * k) - 2.0 * (k * s).sin() / (k * k * k);
        let r = oscillatory(&f, Kernel::Cos, k, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - (anti(1.0) - anti(0.0))).abs() < 1e-11);
    }
}
