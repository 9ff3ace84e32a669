//! Interior solutions on [0, b] through the Volterra form
//!
//! f(x) = c₁cos√μx ± c₂sin√μx/√μ + (1/√μ)∫₀ˣ sin(√μ(x−s))[q(±s) − q(b)]f(s)ds
//!
//! solved twice: by Picard iteration on Gauss panels and by integrating the ODE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{is_monotone_decay, loglog_fit, upper_envelope};
use crate::ode::{Dp45, Tolerances};
use crate::potential::{Limit, PotentialSpec};
use crate::quadrature::{gauss_legendre, panel_edges};
use crate::real::Real;

const PANEL_NODES: usize = 20;
const PICARD_TOL: f64 = 1e-12;
const PICARD_CAP: usize = 200;
const CROSS_CHECK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign<T: Real>(self) -> T {
        match self {
            Side::Plus => T::one(),
            Side::Minus => -T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InteriorSolution<T> {
    pub lambda: T,
    pub mu: T,
    pub c1: T,
    pub c2: T,
    pub side: Side,
    pub b: T,
    /// sample points: 0, the Gauss nodes of every panel, b
    pub x: Vec<T>,
    pub f: Vec<T>,
    pub df: Vec<T>,
    /// quadrature weights for ∫₀ᵇ over the samples (zero at both ends)
    pub weights: Vec<T>,
    /// q(±x) − q(b) at the samples
    pub kernel: Vec<T>,
    pub picard_iterations: usize,
    /// max |f_Picard − f_ODE| over the samples, relative to |c₁| + |c₂|/√μ
    pub picard_difference: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KFunctionals<T> {
    pub k1_plus: T,
    pub k2_plus: T,
    pub k1_minus: T,
    pub k2_minus: T,
    pub lambda: T,
}

struct Panels<T> {
    x: Vec<T>,
    w: Vec<T>,
    /// (start index into x, left edge, right edge)
    spans: Vec<(usize, T, T)>,
    /// cumulative integration matrix on [−1, 1]
    cumulative: Vec<Vec<T>>,
}

// ∫_{−1}^{x_i} ℓ_j for the Lagrange basis on the Gauss nodes, using the discrete
// orthogonality of Legendre polynomials on those nodes.
fn cumulative_matrix<T: Real>(nodes: &[T], weights: &[T]) -> Vec<Vec<T>> {
    let n = nodes.len();
    let legendre = |x: T| {
        let mut p = vec![T::one(), x];
        for k in 2..=n {
            let kf = T::from_usize_lossy(k);
            let next = ((T::lit(2.0) * kf - T::one()) * x * p[k - 1] - (kf - T::one()) * p[k - 2]) / kf;
            p.push(next);
        }
        p
    };
    let pn: Vec<Vec<T>> = nodes.iter().map(|&x| legendre(x)).collect();
    let mut m = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = nodes[i] + T::one();
            for k in 1..n {
                acc = acc + pn[j][k] * (pn[i][k + 1] - pn[i][k - 1]);
            }
            m[i][j] = weights[j] / T::lit(2.0) * acc;
        }
    }
    m
}

fn build_panels<T: Real>(spec: &PotentialSpec<T>, side: Side, rmu: T) -> Panels<T> {
    let b = spec.b;
    let sgn: T = side.sign();
    let breaks: Vec<T> = spec.perturbation.breakpoints().into_iter().map(|p| p * sgn).collect();
    let mut width = (T::PI() / rmu).min(b / T::lit(4.0));
    let wmax = spec.perturbation.max_frequency();
    if wmax > T::zero() {
        width = width.min(T::TAU() / wmax);
    }
    let (gx, gw) = gauss_legendre::<T>(PANEL_NODES);
    let cumulative = cumulative_matrix(&gx, &gw);
    let mut x = Vec::new();
    let mut w = Vec::new();
    let mut spans = Vec::new();
    for e in panel_edges(T::zero(), b, &breaks).windows(2) {
        let m = ((e[1] - e[0]) / width).ceil().to_usize().unwrap_or(1).max(1);
        let step = (e[1] - e[0]) / T::from_usize_lossy(m);
        for k in 0..m {
            let lo = e[0] + step * T::from_usize_lossy(k);
            let hi = if k + 1 == m { e[1] } else { lo + step };
            let half = (hi - lo) / T::lit(2.0);
            spans.push((x.len(), lo, hi));
            for i in 0..PANEL_NODES {
                x.push(lo + half * (gx[i] + T::one()));
                w.push(half * gw[i]);
            }
        }
    }
    Panels { x, w, spans, cumulative }
}

fn q_reflected<T: Real>(spec: &PotentialSpec<T>, side: Side, x: T, from_right: bool) -> T {
    // a sample inside (lo, hi) sees the one-sided limit pointing into the interval
    match side {
        Side::Plus => spec.q_side(x, if from_right { Limit::Right } else { Limit::Left }),
        Side::Minus => spec.q_side(-x, if from_right { Limit::Left } else { Limit::Right }),
    }
}

struct Picard<T> {
    f: Vec<T>,
    iterations: usize,
    /// f, f′ at b from the full-panel integrals
    end: (T, T),
}

fn picard<T: Real>(p: &Panels<T>, kernel: &[T], rmu: T, c1: T, c2s: T, b: T, lambda: T) -> Result<Picard<T>> {
    let n = p.x.len();
    let (sn, cs): (Vec<T>, Vec<T>) = p.x.iter().map(|&x| (rmu * x).sin_cos()).unzip();
    let free: Vec<T> = (0..n).map(|i| c1 * cs[i] + c2s * sn[i] / rmu).collect();
    let scale = c1.abs() + c2s.abs() / rmu;
    let mut f = free.clone();
    for it in 1..=PICARD_CAP {
        let mut next = vec![T::zero(); n];
        let (mut c_acc, mut s_acc) = (T::zero(), T::zero());
        for &(start, lo, hi) in &p.spans {
            let half = (hi - lo) / T::lit(2.0);
            let gc: Vec<T> = (0..PANEL_NODES).map(|j| cs[start + j] * kernel[start + j] * f[start + j]).collect();
            let gs: Vec<T> = (0..PANEL_NODES).map(|j| sn[start + j] * kernel[start + j] * f[start + j]).collect();
            for i in 0..PANEL_NODES {
                let row = &p.cumulative[i];
                let (mut ci, mut si) = (T::zero(), T::zero());
                for j in 0..PANEL_NODES {
                    ci = ci + row[j] * gc[j];
                    si = si + row[j] * gs[j];
                }
                let (c, s) = (c_acc + half * ci, s_acc + half * si);
                let k = start + i;
                next[k] = free[k] + (sn[k] * c - cs[k] * s) / rmu;
            }
            for j in 0..PANEL_NODES {
                c_acc = c_acc + p.w[start + j] * gc[j];
                s_acc = s_acc + p.w[start + j] * gs[j];
            }
        }
        let diff = next.iter().zip(&f).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        f = next;
        if diff <= T::lit(PICARD_TOL) * scale.max(T::one()) {
            let (sb, cb) = (rmu * b).sin_cos();
            let (k1, k2) = (c_acc, s_acc);
            let fb = cb * (c1 - k2 / rmu) + sb * (c2s + k1) / rmu;
            let dfb = cb * (c2s + k1) + sb * (-c1 * rmu + k2);
            return Ok(Picard { f, iterations: it, end: (fb, dfb) });
        }
        if !diff.is_finite() {
            break;
        }
    }
    Err(Error::NoContraction { iterations: PICARD_CAP, lambda: lambda.as_f64() })
}

fn integrate_ode<T: Real>(spec: &PotentialSpec<T>, side: Side, p: &Panels<T>, lambda: T, c1: T, c2s: T) -> Result<(Vec<T>, Vec<T>, (T, T))> {
    let tol = Tolerances { rtol: T::lit(1e-12).max(T::epsilon() * T::lit(16.0)), atol: T::lit(1e-14), max_steps: 10_000_000 };
    let mut y = [c1, c2s];
    let mut f = Vec::with_capacity(p.x.len());
    let mut df = Vec::with_capacity(p.x.len());
    let mut x0 = T::zero();
    for &(start, lo, hi) in &p.spans {
        let mid = (lo + hi) / T::lit(2.0);
        let mut rhs = |x: T, y: &[T; 2]| [y[1], (q_reflected(spec, side, x, x < mid) - lambda) * y[0]];
        let mut st = Dp45::new(x0, y, tol);
        for j in 0..PANEL_NODES {
            st.advance(&mut rhs, p.x[start + j])?;
            f.push(st.y[0]);
            df.push(st.y[1]);
        }
        st.advance(&mut rhs, hi)?;
        y = st.y;
        x0 = hi;
    }
    Ok((f, df, (y[0], y[1])))
}

/// Interior solution with f(0) = c₁ and f′(0) = ±c₂ on the chosen side.
pub fn solve_interior<T: Real>(spec: &PotentialSpec<T>, lambda: T, c1: T, c2: T, side: Side) -> Result<InteriorSolution<T>> {
    spec.validate()?;
    let qb = spec.q_at_b();
    if !(lambda > qb + T::one()) {
        return Err(Error::Precondition(format!("interior solve needs lambda > q0(b) + 1 = {}", qb + T::one())));
    }
    let mu = lambda - qb;
    let rmu = mu.sqrt();
    let c2s = side.sign::<T>() * c2;
    let panels = build_panels(spec, side, rmu);
    let mut kernel = Vec::with_capacity(panels.x.len());
    for &(start, lo, hi) in &panels.spans {
        let mid = (lo + hi) / T::lit(2.0);
        for j in 0..PANEL_NODES {
            let x = panels.x[start + j];
            kernel.push(q_reflected(spec, side, x, x < mid) - qb);
        }
    }
    let pic = picard(&panels, &kernel, rmu, c1, c2s, spec.b, lambda)?;
    let (f, df, end) = integrate_ode(spec, side, &panels, lambda, c1, c2s)?;
    let scale = (c1.abs() + c2.abs() / rmu).max(T::min_positive_value());
    let mut diff = f.iter().zip(&pic.f).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
    diff = diff.max((end.0 - pic.end.0).abs()) / scale;
    if !(diff <= T::lit(CROSS_CHECK)) {
        return Err(Error::Integration {
            x: spec.b.as_f64(),
            reason: format!("Picard and ODE interior solutions differ by {diff} (relative) at lambda = {lambda}"),
        });
    }
    let mut x = vec![T::zero()];
    x.extend(&panels.x);
    x.push(spec.b);
    let mut fv = vec![c1];
    fv.extend(&f);
    fv.push(end.0);
    let mut dfv = vec![c2s];
    dfv.extend(&df);
    dfv.push(end.1);
    let mut weights = vec![T::zero()];
    weights.extend(&panels.w);
    weights.push(T::zero());
    let mut kern = vec![q_reflected(spec, side, T::zero(), true) - qb];
    kern.extend(&kernel);
    kern.push(T::zero());
    Ok(InteriorSolution {
        lambda,
        mu,
        c1,
        c2,
        side,
        b: spec.b,
        x,
        f: fv,
        df: dfv,
        weights,
        kernel: kern,
        picard_iterations: pic.iterations,
        picard_difference: diff,
    })
}

impl<T: Real> InteriorSolution<T> {
    /// (∫₀ᵇ cos(√μs)[q(±s) − q(b)]f ds, ∫₀ᵇ sin(√μs)[q(±s) − q(b)]f ds)
    pub fn k_pair(&self) -> (T, T) {
        let rmu = self.mu.sqrt();
        let mut k = (T::zero(), T::zero());
        for i in 0..self.x.len() {
            let (s, c) = (rmu * self.x[i]).sin_cos();
            let g = self.weights[i] * self.kernel[i] * self.f[i];
            k = (k.0 + c * g, k.1 + s * g);
        }
        k
    }

    /// (f(b), f′(b)) rebuilt from c₁, c₂ and the k functionals.
    pub fn boundary_from_k(&self) -> (T, T) {
        let rmu = self.mu.sqrt();
        let c2s = self.side.sign::<T>() * self.c2;
        let (k1, k2) = self.k_pair();
        let (sb, cb) = (rmu * self.b).sin_cos();
        (cb * (self.c1 - k2 / rmu) + sb * (c2s + k1) / rmu, cb * (c2s + k1) + sb * (-self.c1 * rmu + k2))
    }

    pub fn at_b(&self) -> (T, T) {
        (self.f[self.f.len() - 1], self.df[self.df.len() - 1])
    }

    /// sup |f − c₁cos√μx ∓ c₂sin√μx/√μ| over the samples.
    pub fn free_deviation(&self) -> T {
        let rmu = self.mu.sqrt();
        let c2s = self.side.sign::<T>() * self.c2;
        self.x
            .iter()
            .zip(&self.f)
            .map(|(&x, &f)| {
                let (s, c) = (rmu * x).sin_cos();
                (f - self.c1 * c - c2s * s / rmu).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// Wronskian f·g′ − f′·g at every sample of two solutions on the same grid.
pub fn wronskian<T: Real>(a: &InteriorSolution<T>, b: &InteriorSolution<T>) -> Result<Vec<T>> {
    if a.x != b.x {
        return Err(Error::Precondition("Wronskian needs solutions sampled on the same grid".into()));
    }
    Ok((0..a.x.len()).map(|i| a.f[i] * b.df[i] - a.df[i] * b.f[i]).collect())
}

pub fn k_functionals<T: Real>(plus: &InteriorSolution<T>, minus: &InteriorSolution<T>) -> Result<KFunctionals<T>> {
    if plus.side != Side::Plus || minus.side != Side::Minus {
        return Err(Error::Precondition("k functionals need one plus-side and one minus-side solution".into()));
    }
    if plus.lambda != minus.lambda || plus.c1 != minus.c1 || plus.c2 != minus.c2 {
        return Err(Error::Precondition("k functionals need matching lambda, c1 and c2".into()));
    }
    let (k1_plus, k2_plus) = plus.k_pair();
    let (k1_minus, k2_minus) = minus.k_pair();
    Ok(KFunctionals { k1_plus, k2_plus, k1_minus, k2_minus, lambda: plus.lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaCheck {
    /// sup |f₊ − cos√μx| with c₁ = 1, c₂ = 0
    FEst,
    /// |k₁⁺ − (1/2)∫₀ᵇ(q − q(b))| with c₁ = 1, c₂ = 0
    K1,
    /// |k₂⁺| with c₁ = 1, c₂ = 0
    K2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RateCheck<T> {
    pub which: LemmaCheck,
    pub lambdas: Vec<T>,
    pub errors: Vec<T>,
    pub envelope: Vec<T>,
    /// false when oscillation masks the decay; the fit then uses the envelope
    pub monotone: bool,
    /// fitted decay exponent p in error ≈ K·λ^{−p}
    pub exponent: T,
}

/// Error of the chosen lemma at one λ.
pub fn lemma_error<T: Real>(spec: &PotentialSpec<T>, lambda: T, which: LemmaCheck) -> Result<T> {
    let sol = solve_interior(spec, lambda, T::one(), T::zero(), Side::Plus)?;
    Ok(match which {
        LemmaCheck::FEst => sol.free_deviation(),
        LemmaCheck::K1 => {
            let half_mean = (spec.mean_integral()? + spec.perturbation.integral_on(T::zero(), spec.b)
                - spec.perturbation.integral_on(-spec.b, T::zero()))
                / T::lit(4.0);
            (sol.k_pair().0 - half_mean).abs()
        }
        LemmaCheck::K2 => sol.k_pair().1.abs(),
    })
}

/// Log-log decay exponent of a lemma's error term over a geometric λ grid.
pub fn lemma_rate_check<T: Real>(spec: &PotentialSpec<T>, lambdas: &[T], which: LemmaCheck) -> Result<RateCheck<T>> {
    if lambdas.len() < 5 {
        return Err(Error::Precondition("rate check needs at least five lambda values".into()));
    }
    let errors = lambdas.iter().map(|&l| lemma_error(spec, l, which)).collect::<Result<Vec<T>>>()?;
    let envelope = upper_envelope(&errors);
    let monotone = is_monotone_decay(&errors);
    let fit = loglog_fit(lambdas, if monotone { &errors } else { &envelope }, None)?;
    Ok(RateCheck { which, lambdas: lambdas.to_vec(), errors, envelope, monotone, exponent: -fit.slope })
}

/// n points spaced geometrically from lo to hi.
pub fn geometric_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * T::from_usize_lossy(i) / T::from_usize_lossy(n.max(2) - 1)).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Perturbation, PowerTerm};

    #[test]
    fn cumulative_matrix_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(PANEL_NODES);
        let m = cumulative_matrix(&x, &w);
        for i in 0..PANEL_NODES {
            let got: f64 = (0..PANEL_NODES).map(|j| m[i][j] * x[j].powi(5)).sum();
            let want = (x[i].powi(6) - 1.0) / 6.0;
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_potential_gives_free_solution() {
        // q₀ = 0·|x| + 1e-300|x|⁸ is flat to rounding on [0, 1]
        let spec = PotentialSpec::plain(vec![PowerTerm { a: 1e-300f64, alpha: 8.0 }], 1.0);
        let s = solve_interior(&spec, 50.0, 0.7, 2.0, Side::Plus).unwrap();
        assert!(s.free_deviation() < 1e-12);
        let m = solve_interior(&spec, 50.0, 0.7, 2.0, Side::Minus).unwrap();
        assert!((m.df[0] + 2.0).abs() < 1e-15);
        assert!(m.free_deviation() < 1e-12);
    }

    #[test]
    fn harmonic_interior_close_to_cosine() {
        let spec = PotentialSpec::power(2.0f64, 1.0);
        let s = solve_interior(&spec, 400.0, 1.0, 0.0, Side::Plus).unwrap();
        let dev = s.free_deviation();
        assert!(dev > 0.0 && dev * 400f64.sqrt() < 2.0, "{dev}");
        assert!(s.picard_difference < 1e-8);
        let (fb, dfb) = s.at_b();
        let (rb, rdb) = s.boundary_from_k();
        assert!((fb - rb).abs() < 1e-8 && (dfb - rdb).abs() < 1e-8 * 20.0);
    }

    #[test]
    fn even_potential_sides_agree() {
        let spec = PotentialSpec::power(2.0f64, 1.0);
        let p = solve_interior(&spec, 900.0, 1.0, 0.0, Side::Plus).unwrap();
        let m = solve_interior(&spec, 900.0, 1.0, 0.0, Side::Minus).unwrap();
        let k = k_functionals(&p, &m).unwrap();
        assert!((k.k1_plus - k.k1_minus).abs() < 1e-12 && (k.k2_plus - k.k2_minus).abs() < 1e-12);
        assert!(k_functionals(&m, &p).is_err());
    }

    #[test]
    fn k1_tends_to_half_mean() {
        let spec = PotentialSpec::power(2.0f64, 1.0);
        let err: Vec<f64> = [1e3, 1e4, 1e5].iter().map(|&l| lemma_error(&spec, l, LemmaCheck::K1).unwrap()).collect();
        assert!(err[2] < err[0] && err[2] < 1e-3, "{err:?}");
    }

    #[test]
    fn wronskian_and_linearity() {
        let spec = PotentialSpec::power(2.0f64, 1.2).with_perturbation(Perturbation::step(0.4, -0.3, 0.5));
        let u = solve_interior(&spec, 80.0, 1.0, 0.0, Side::Plus).unwrap();
        let v = solve_interior(&spec, 80.0, 0.0, 1.0, Side::Plus).unwrap();
        let w = wronskian(&u, &v).unwrap();
        assert!(w.iter().all(|x| (x - 1.0).abs() < 1e-8));
        let uv = solve_interior(&spec, 80.0, 2.0, -3.0, Side::Plus).unwrap();
        for i in 0..uv.x.len() {
            assert!((uv.f[i] - (2.0 * u.f[i] - 3.0 * v.f[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn precondition_and_grid() {
        let spec = PotentialSpec::power(2.0f64, 1.0);
        assert!(matches!(solve_interior(&spec, 1.5, 1.0, 0.0, Side::Plus), Err(Error::Precondition(_))));
        let g = geometric_grid(1e2f64, 1e6, 5);
        assert!((g[2] - 1e4).abs() < 1e-8 && (g[4] - 1e6).abs() < 1e-6);
    }
}
