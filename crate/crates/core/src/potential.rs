//! The potential q(x) = q₀(x) + V(x): evaluation, turning points, action integrals
//! and oscillatory transforms of the perturbation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Kernel};
use crate::real::Real;
use crate::specfun::{gamma, sin_pi};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PowerTerm<T> {
    pub a: T,
    pub alpha: T,
}

/// Closed form of the confining part q₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Composite<T> {
    /// Σ aⱼ|x|^αⱼ over `terms`.
    #[default]
    PlainSum,
    /// (|x| + c)^α
    ShiftedPower { c: T, alpha: T },
    /// (x² + c)²
    Quartic { c: T },
}

/// One building block of a perturbation. Each block vanishes outside its own window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Piece<T> {
    Zero,
    /// Σ_{j=1}^{J} 2^{−jτ} cos(2ʲx) on [−π, π].
    TruncatedWeierstrass { tau: T, j: u32 },
    WindowedCosine { amplitude: T, omega: T, lo: T, hi: T },
    Step { height: T, lo: T, hi: T },
    /// Linear interpolation of `(x, v)`; zero outside `[x₀, x_last]`.
    SampledTable { x: Vec<T>, v: Vec<T> },
}

/// Which one-sided value to use at a jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Left,
    Right,
    Mean,
}

fn inside<T: Real>(x: T, lo: T, hi: T, side: Limit) -> T {
    if x > lo && x < hi {
        return T::one();
    }
    let at_lo = x == lo;
    let at_hi = x == hi;
    match side {
        Limit::Right if at_lo => T::one(),
        Limit::Left if at_hi => T::one(),
        Limit::Mean if at_lo || at_hi => T::lit(0.5),
        _ => T::zero(),
    }
}

fn pow2<T: Real>(j: u32) -> T {
    T::lit(2f64.powi(j as i32))
}

impl<T: Real> Piece<T> {
    pub fn window(&self) -> Option<(T, T)> {
        match self {
            Piece::Zero => None,
            Piece::TruncatedWeierstrass { .. } => Some((-T::PI(), T::PI())),
            Piece::WindowedCosine { lo, hi, .. } | Piece::Step { lo, hi, .. } => Some((*lo, *hi)),
            Piece::SampledTable { x, .. } => Some((x[0], x[x.len() - 1])),
        }
    }

    /// Value ignoring the window cut-off.
    fn raw(&self, x: T) -> T {
        match self {
            Piece::Zero => T::zero(),
            Piece::TruncatedWeierstrass { tau, j } => (1..=*j)
                .map(|k| {
                    let p = pow2::<T>(k);
                    p.powf(-*tau) * (p * x).cos()
                })
                .sum(),
            Piece::WindowedCosine { amplitude, omega, .. } => *amplitude * (*omega * x).cos(),
            Piece::Step { height, .. } => *height,
            Piece::SampledTable { x: xs, v } => {
                let i = match xs.iter().position(|&p| p > x) {
                    Some(0) => return v[0],
                    Some(i) => i,
                    None => return v[v.len() - 1],
                };
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                v[i - 1] + t * (v[i] - v[i - 1])
            }
        }
    }

    pub fn eval(&self, x: T, side: Limit) -> T {
        match self.window() {
            None => T::zero(),
            Some((lo, hi)) => {
                let w = inside(x, lo, hi, side);
                if w == T::zero() {
                    T::zero()
                } else {
                    w * self.raw(x)
                }
            }
        }
    }

    pub fn tau(&self) -> T {
        match self {
            Piece::TruncatedWeierstrass { tau, .. } => *tau,
            _ => T::one(),
        }
    }

    pub fn sup_bound(&self) -> T {
        match self {
            Piece::Zero => T::zero(),
            Piece::TruncatedWeierstrass { tau, j } => (1..=*j).map(|k| pow2::<T>(k).powf(-*tau)).sum(),
            Piece::WindowedCosine { amplitude, .. } => amplitude.abs(),
            Piece::Step { height, .. } => height.abs(),
            Piece::SampledTable { v, .. } => v.iter().fold(T::zero(), |m, &y| m.max(y.abs())),
        }
    }

    /// Hölder constant for exponent `t ≤ self.tau()` valid between consecutive breakpoints.
    pub fn holder_constant(&self, t: T) -> T {
        let two = T::lit(2.0);
        let bound = |m: T, lip: T| (two * m).powf(T::one() - t) * lip.powf(t);
        match self {
            Piece::Zero | Piece::Step { .. } => T::zero(),
            Piece::TruncatedWeierstrass { tau, j } => (1..=*j)
                .map(|k| pow2::<T>(k).powf(-*tau) * bound(T::one(), pow2::<T>(k)))
                .sum(),
            Piece::WindowedCosine { amplitude, omega, .. } => bound(amplitude.abs(), amplitude.abs() * omega.abs()),
            Piece::SampledTable { x, v } => {
                let lip = (1..x.len()).fold(T::zero(), |m, i| m.max(((v[i] - v[i - 1]) / (x[i] - x[i - 1])).abs()));
                bound(self.sup_bound(), lip)
            }
        }
    }

    pub fn max_frequency(&self) -> T {
        match self {
            Piece::TruncatedWeierstrass { j, .. } => pow2(*j),
            Piece::WindowedCosine { omega, .. } => omega.abs(),
            _ => T::zero(),
        }
    }

    fn breakpoints(&self, out: &mut Vec<T>) {
        match self {
            Piece::Zero => {}
            Piece::SampledTable { x, .. } => out.extend(x.iter().copied()),
            _ => {
                let (lo, hi) = self.window().unwrap();
                out.push(lo);
                out.push(hi);
            }
        }
    }

    /// ∫_{lo}^{hi} V(s)·K(ωs) ds in closed form.
    pub fn transform_on(&self, kernel: Kernel, omega: T, lo: T, hi: T) -> T {
        let Some((wl, wr)) = self.window() else { return T::zero() };
        let (l, r) = (wl.max(lo), wr.min(hi));
        if r <= l {
            return T::zero();
        }
        let half = T::lit(0.5);
        match self {
            Piece::Zero => T::zero(),
            Piece::TruncatedWeierstrass { tau, j } => {
                let whole = l == wl && r == wr;
                (1..=*j)
                    .map(|k| {
                        let a = pow2::<T>(k);
                        let weight = a.powf(-*tau);
                        let pair = if whole {
                            // symmetric window: exact at integer frequencies
                            match kernel {
                                Kernel::Cos => full_window_cos(omega - a) + full_window_cos(omega + a),
                                Kernel::Sin => T::zero(),
                            }
                        } else {
                            quadrature::trig_integral(kernel, omega - a, l, r)
                                + quadrature::trig_integral(kernel, omega + a, l, r)
                        };
                        weight * half * pair
                    })
                    .sum()
            }
            Piece::WindowedCosine { amplitude, omega: w0, .. } => {
                *amplitude
                    * half
                    * (quadrature::trig_integral(kernel, omega - *w0, l, r)
                        + quadrature::trig_integral(kernel, omega + *w0, l, r))
            }
            Piece::Step { height, .. } => *height * quadrature::trig_integral(kernel, omega, l, r),
            Piece::SampledTable { x, v } => {
                let (xs, vs) = clip_table(x, v, l, r);
                quadrature::filon_linear(kernel, omega, &xs, &vs)
            }
        }
    }
}

// ∫_{−π}^{π} cos(ks) ds = 2 sin(πk)/k
fn full_window_cos<T: Real>(k: T) -> T {
    if k.abs() < T::lit(1e-8) {
        T::TAU() * (T::one() - (T::PI() * k).powi(2) / T::lit(6.0))
    } else {
        T::lit(2.0) * sin_pi(k) / k
    }
}

fn clip_table<T: Real>(x: &[T], v: &[T], lo: T, hi: T) -> (Vec<T>, Vec<T>) {
    let interp = |p: T| {
        let piece: Piece<T> = Piece::SampledTable { x: x.to_vec(), v: v.to_vec() };
        piece.raw(p)
    };
    let mut xs = vec![lo];
    let mut vs = vec![interp(lo)];
    for (&a, &b) in x.iter().zip(v) {
        if a > lo && a < hi {
            xs.push(a);
            vs.push(b);
        }
    }
    xs.push(hi);
    vs.push(interp(hi));
    (xs, vs)
}

/// Compactly supported, piecewise Hölder perturbation V(x) = Σ pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(bound = "T: Real")]
pub struct Perturbation<T> {
    #[serde(default)]
    pub pieces: Vec<Piece<T>>,
}

impl<T: Real> Perturbation<T> {
    pub fn zero() -> Self {
        Perturbation { pieces: vec![] }
    }

    pub fn from_piece(p: Piece<T>) -> Self {
        Perturbation { pieces: vec![p] }
    }

    pub fn step(height: T, lo: T, hi: T) -> Self {
        Self::from_piece(Piece::Step { height, lo, hi })
    }

    pub fn weierstrass(tau: T, j: u32) -> Self {
        Self::from_piece(Piece::TruncatedWeierstrass { tau, j })
    }

    pub fn windowed_cosine(amplitude: T, omega: T, lo: T, hi: T) -> Self {
        Self::from_piece(Piece::WindowedCosine { amplitude, omega, lo, hi })
    }

    pub fn table(x: Vec<T>, v: Vec<T>) -> Self {
        Self::from_piece(Piece::SampledTable { x, v })
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Zero))
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.pieces {
            let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
            match p {
                Piece::Zero => {}
                Piece::TruncatedWeierstrass { tau, j } => {
                    if !(*tau > T::zero() && *tau < T::one()) {
                        return bad("weierstrass tau must lie in (0, 1)");
                    }
                    if *j < 1 || *j > 60 {
                        return bad("weierstrass J must lie in 1..=60");
                    }
                }
                Piece::WindowedCosine { amplitude, omega, lo, hi } => {
                    if !(lo < hi) || !amplitude.is_finite() || !omega.is_finite() {
                        return bad("windowed cosine needs finite parameters and lo < hi");
                    }
                }
                Piece::Step { height, lo, hi } => {
                    if !(lo < hi) || !height.is_finite() {
                        return bad("step needs a finite height and lo < hi");
                    }
                }
                Piece::SampledTable { x, v } => {
                    if x.len() < 2 || x.len() != v.len() {
                        return bad("sampled table needs at least two (x, v) pairs of equal length");
                    }
                    if x.windows(2).any(|w| !(w[0] < w[1])) {
                        return bad("sampled table abscissae must be strictly increasing");
                    }
                }
            }
        }
        Ok(())
    }

    /// V(x), averaging the one-sided limits at a jump.
    pub fn eval(&self, x: T) -> T {
        self.eval_side(x, Limit::Mean)
    }

    pub fn eval_side(&self, x: T, side: Limit) -> T {
        self.pieces.iter().map(|p| p.eval(x, side)).sum()
    }

    /// Sorted, deduplicated points where V may jump or kink.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut out = Vec::new();
        for p in &self.pieces {
            p.breakpoints(&mut out);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Smallest interval containing every window.
    pub fn support(&self) -> Option<(T, T)> {
        self.pieces
            .iter()
            .filter_map(|p| p.window())
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    pub fn tau(&self) -> T {
        self.pieces.iter().map(|p| p.tau()).fold(T::one(), T::min)
    }

    pub fn sup_bound(&self) -> T {
        self.pieces.iter().map(|p| p.sup_bound()).sum()
    }

    pub fn holder_constant(&self, t: T) -> T {
        self.pieces.iter().map(|p| p.holder_constant(t)).sum()
    }

    pub fn max_frequency(&self) -> T {
        self.pieces.iter().map(|p| p.max_frequency()).fold(T::zero(), T::max)
    }

    /// Sup-norm of the Weierstrass terms dropped by truncating at `J`, i.e. 2^{−Jτ}/(2^τ − 1).
    pub fn weierstrass_tail_bound(tau: T, j: u32) -> T {
        pow2::<T>(j).powf(-tau) / (T::lit(2.0).powf(tau) - T::one())
    }

    /// ∫ V over the real line.
    pub fn integral(&self) -> T {
        self.cos_transform(T::zero())
    }

    pub fn integral_on(&self, lo: T, hi: T) -> T {
        self.cos_transform_on(T::zero(), lo, hi)
    }

    /// ∫ V(s) cos(ωs) ds over the real line.
    pub fn cos_transform(&self, omega: T) -> T {
        self.cos_transform_on(omega, T::neg_infinity(), T::infinity())
    }

    /// ∫ V(s) sin(ωs) ds over the real line.
    pub fn sin_transform(&self, omega: T) -> T {
        self.sin_transform_on(omega, T::neg_infinity(), T::infinity())
    }

    pub fn cos_transform_on(&self, omega: T, lo: T, hi: T) -> T {
        self.pieces.iter().map(|p| p.transform_on(Kernel::Cos, omega, lo, hi)).sum()
    }

    pub fn sin_transform_on(&self, omega: T, lo: T, hi: T) -> T {
        self.pieces.iter().map(|p| p.transform_on(Kernel::Sin, omega, lo, hi)).sum()
    }
}

/// q(x) = q₀(x) + V(x) together with the support radius `b` of V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PotentialSpec<T> {
    #[serde(default)]
    pub terms: Vec<PowerTerm<T>>,
    #[serde(default)]
    pub composite: Composite<T>,
    #[serde(default)]
    pub perturbation: Perturbation<T>,
    pub b: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct PotentialFile<T> {
    #[serde(default = "default_schema")]
    schema_version: u32,
    #[serde(flatten)]
    spec: PotentialSpec<T>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl<T: Real> PotentialSpec<T> {
    pub fn plain(terms: Vec<PowerTerm<T>>, b: T) -> Self {
        PotentialSpec { terms, composite: Composite::PlainSum, perturbation: Perturbation::zero(), b }
    }

    /// |x|^α
    pub fn power(alpha: T, b: T) -> Self {
        Self::plain(vec![PowerTerm { a: T::one(), alpha }], b)
    }

    pub fn shifted_power(c: T, alpha: T, b: T) -> Self {
        PotentialSpec {
            terms: vec![],
            composite: Composite::ShiftedPower { c, alpha },
            perturbation: Perturbation::zero(),
            b,
        }
    }

    pub fn quartic(c: T, b: T) -> Self {
        PotentialSpec { terms: vec![], composite: Composite::Quartic { c }, perturbation: Perturbation::zero(), b }
    }

    pub fn with_perturbation(mut self, v: Perturbation<T>) -> Self {
        self.perturbation = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.b > T::zero()) || !self.b.is_finite() {
            return bad("b must be positive".into());
        }
        match self.composite {
            Composite::PlainSum => {
                if self.terms.is_empty() {
                    return bad("plain sum needs at least one term".into());
                }
                for t in &self.terms {
                    if !(t.alpha > T::zero()) || !t.a.is_finite() {
                        return bad(format!("term exponent {} must be positive", t.alpha));
                    }
                }
                if self.terms.windows(2).any(|w| !(w[0].alpha < w[1].alpha)) {
                    return bad("term exponents must be strictly increasing".into());
                }
                if !(self.terms.last().unwrap().a > T::zero()) {
                    return bad("leading coefficient must be positive".into());
                }
            }
            Composite::ShiftedPower { c, alpha } => {
                if !(alpha > T::zero()) {
                    return bad("shifted power exponent must be positive".into());
                }
                if !(c >= T::zero()) {
                    return bad("shifted power needs c >= 0 so that |x| + c stays nonnegative".into());
                }
            }
            Composite::Quartic { c } => {
                if !c.is_finite() {
                    return bad("quartic c must be finite".into());
                }
            }
        }
        self.perturbation.validate()?;
        if let Some((lo, hi)) = self.perturbation.support() {
            if !(lo > -self.b && hi < self.b) {
                return bad(format!("perturbation support [{lo}, {hi}] is not inside (-b, b) with b = {}", self.b));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PotentialFile<T> = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: file.schema_version, expected: SCHEMA_VERSION });
        }
        file.spec.validate()?;
        Ok(file.spec)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PotentialFile { schema_version: SCHEMA_VERSION, spec: self.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Exponent governing growth at infinity.
    pub fn leading_alpha(&self) -> T {
        match self.composite {
            Composite::PlainSum => self.terms.last().map(|t| t.alpha).unwrap_or(T::zero()),
            Composite::ShiftedPower { alpha, .. } => alpha,
            Composite::Quartic { .. } => T::lit(4.0),
        }
    }

    /// `(a, α)` when q₀ = a|x|^α is a single power.
    pub fn single_power(&self) -> Option<(T, T)> {
        match (self.composite, self.terms.as_slice()) {
            (Composite::PlainSum, [t]) => Some((t.a, t.alpha)),
            _ => None,
        }
    }

    pub fn q0(&self, x: T) -> T {
        let ax = x.abs();
        match self.composite {
            Composite::PlainSum => self.terms.iter().map(|t| t.a * ax.powf(t.alpha)).sum(),
            Composite::ShiftedPower { c, alpha } => (ax + c).powf(alpha),
            Composite::Quartic { c } => (x * x + c).powi(2),
        }
    }

    /// dq₀/dx for x > 0.
    pub fn q0_prime(&self, x: T) -> T {
        match self.composite {
            Composite::PlainSum => self
                .terms
                .iter()
                .map(|t| t.a * t.alpha * x.powf(t.alpha - T::one()))
                .sum(),
            Composite::ShiftedPower { c, alpha } => alpha * (x + c).powf(alpha - T::one()),
            Composite::Quartic { c } => T::lit(4.0) * x * (x * x + c),
        }
    }

    pub fn q(&self, x: T) -> T {
        self.q0(x) + self.perturbation.eval(x)
    }

    pub fn q_side(&self, x: T, side: Limit) -> T {
        self.q0(x) + self.perturbation.eval_side(x, side)
    }

    /// q(b) = q₀(b) since V vanishes outside (−b, b).
    pub fn q_at_b(&self) -> T {
        self.q0(self.b)
    }

    /// A point beyond which q₀ is strictly increasing.
    pub fn monotone_from(&self) -> T {
        match self.composite {
            Composite::ShiftedPower { .. } => T::zero(),
            Composite::Quartic { c } => (-c).max(T::zero()).sqrt(),
            Composite::PlainSum => {
                let Some(lead) = self.terms.last() else { return T::zero() };
                let negatives: Vec<_> = self.terms.iter().filter(|t| t.a < T::zero()).collect();
                if negatives.is_empty() {
                    return T::zero();
                }
                // the leading term dominates the negative ones from here on
                let dominated = |x: T| {
                    let neg: T = negatives.iter().map(|t| -t.a * t.alpha * x.powf(t.alpha - T::one())).sum();
                    lead.a * lead.alpha * x.powf(lead.alpha - T::one()) > neg
                };
                let mut hi = T::one();
                while !dominated(hi) {
                    hi = hi * T::lit(2.0);
                }
                let mut lo = T::zero();
                for _ in 0..80 {
                    let mid = (lo + hi) / T::lit(2.0);
                    if dominated(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    fn check_monotone_beyond_b(&self) -> Result<()> {
        let xs = self.monotone_from();
        if xs <= self.b {
            return Ok(());
        }
        let samples = 400;
        for i in 0..=samples {
            let x = self.b + (xs - self.b) * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            if !(self.q0_prime(x) > T::zero()) {
                return Err(Error::NonMonotone { from: self.b.as_f64(), to: xs.as_f64() });
            }
        }
        Ok(())
    }

    /// The turning point a(λ) > b with q₀(a) = λ.
    pub fn turning_point(&self, lambda: T) -> Result<T> {
        let qb = self.q_at_b();
        if !(lambda > qb) {
            return Err(Error::NoRoot(format!("lambda = {lambda} does not exceed q0(b) = {qb}")));
        }
        self.check_monotone_beyond_b()?;
        self.outer_turning_point(lambda)
    }

    /// Largest x with q₀(x) = λ on the increasing tail, without the b preconditions.
    /// Returns `monotone_from()` when q₀ already exceeds λ there.
    pub fn outer_turning_point(&self, lambda: T) -> Result<T> {
        let start = self.monotone_from();
        if self.q0(start) >= lambda {
            return Ok(start);
        }
        let mut lo = start;
        let mut hi = start.max(T::one()) * T::lit(2.0);
        while self.q0(hi) <= lambda {
            lo = hi;
            hi = hi * T::lit(2.0);
            if !hi.is_finite() {
                return Err(Error::NoRoot(format!("q0 stays below {lambda}")));
            }
        }
        let mut x = (lo + hi) / T::lit(2.0);
        for _ in 0..200 {
            let f = self.q0(x) - lambda;
            if f > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.q0_prime(x);
            let mut next = x - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = (lo + hi) / T::lit(2.0);
            }
            // Newton converges quadratically, so run it to rounding level (well below 1e-12·a)
            let tol = T::lit(4.0) * T::epsilon() * x.max(T::one());
            if (next - x).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// Q(x₀, λ) = ∫_{x₀}^{a(λ)} √(λ − q(t)) dt for x₀ ≥ b.
    pub fn action_q(&self, x0: T, lambda: T) -> Result<T> {
        if x0 < self.b {
            return Err(Error::Precondition(format!("action_Q needs x0 >= b, got x0 = {x0} < b = {}", self.b)));
        }
        self.turning_point(lambda)?;
        self.action_q0(x0, lambda)
    }

    /// ∫_{x₀}^{a(λ)} √(λ − q₀(t))₊ dt with no restriction on x₀.
    pub fn action_q0(&self, x0: T, lambda: T) -> Result<T> {
        let a = self.outer_turning_point(lambda)?;
        if x0 >= a {
            return Ok(T::zero());
        }
        // t = a − u² removes the square-root singularity at the turning point
        let umax = (a - x0).sqrt();
        let two = T::lit(2.0);
        let g = |u: T| two * u * (lambda - self.q0(a - u * u)).max(T::zero()).sqrt();
        let mut points = Vec::new();
        if x0 < T::zero() {
            points.push(a.sqrt());
        }
        let r = quadrature::integrate_split(g, T::zero(), umax, &points, T::lit(1e-11), T::lit(1e-13))?;
        Ok(r.value)
    }

    /// ∫_{−b}^{b} (q(s) − q(b)) ds.
    pub fn mean_integral(&self) -> Result<T> {
        let b = self.b;
        let half = quadrature::integrate(|s| self.q0(s), T::zero(), b, T::lit(1e-12), T::lit(1e-14))?;
        Ok(T::lit(2.0) * half.value - T::lit(2.0) * b * self.q_at_b() + self.perturbation.integral_on(-b, b))
    }

    /// ∫_{lo}^{hi} (q(s) − q(b))·K(ωs) ds with −b ≤ lo < hi ≤ b.
    pub fn shifted_transform(&self, kernel: Kernel, omega: T, lo: T, hi: T) -> Result<T> {
        let qb = self.q_at_b();
        let f = |s: T| self.q0(s) - qb;
        let mut total = self.perturbation.pieces.iter().map(|p| p.transform_on(kernel, omega, lo, hi)).sum::<T>();
        let edges = quadrature::panel_edges(lo, hi, &[T::zero()]);
        for w in edges.windows(2) {
            total = total + quadrature::oscillatory(&f, kernel, omega, w[0], w[1], T::lit(1e-12))?.value;
        }
        Ok(total)
    }
}

/// Three-term expansion of Q(b, λ) for q₀ = |x|^α.
pub fn q_power_expansion<T: Real>(b: T, lambda: T, alpha: T) -> Result<T> {
    let three_half = T::lit(1.5);
    let inv = T::one() / alpha;
    let lead = gamma(three_half)? * gamma(inv)? / (alpha * gamma(three_half + inv)?);
    let sq = lambda.sqrt();
    Ok(lead * lambda.powf((alpha + T::lit(2.0)) / (T::lit(2.0) * alpha)) - b * sq
        + b.powf(alpha + T::one()) / ((alpha + T::one()) * T::lit(2.0) * sq))
}
