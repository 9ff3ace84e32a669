//! Implicit quantization relations solved for λ.

use serde::{Deserialize, Serialize};

use super::spec_d2;
use crate::eigensolve::TypeTag;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::real::Real;

/// One solved relation nπ = Q(b,λ) + φ₀ + b√μ − correction − d₂ with φ₀ = π/4 (D) or 3π/4 (N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuantizationContext<T> {
    pub n: usize,
    pub lambda: T,
    /// λ − q(b)
    pub mu: T,
    #[serde(rename = "Q")]
    pub q: T,
    /// (1/(4√μ))[∫(q − q(b)) + ∫V cos(2√μ s)]
    pub correction: T,
    pub d2: T,
    #[serde(rename = "type")]
    pub type_tag: TypeTag,
    /// relation residual at `lambda`
    pub residual: T,
}

struct Relation<'a, T> {
    spec: &'a PotentialSpec<T>,
    qb: T,
    mean: T,
}

impl<'a, T: Real> Relation<'a, T> {
    fn new(spec: &'a PotentialSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(Relation { spec, qb: spec.q_at_b(), mean: spec.mean_integral()? })
    }

    /// (Q, correction, d₂) at λ.
    fn parts(&self, lambda: T) -> Result<(T, T, T)> {
        let mu = lambda - self.qb;
        let rmu = mu.sqrt();
        let q = self.spec.action_q(self.spec.b, lambda)?;
        let osc = self.spec.perturbation.cos_transform(T::lit(2.0) * rmu);
        let corr = (self.mean + osc) / (T::lit(4.0) * rmu);
        Ok((q, corr, spec_d2(self.spec, lambda)?))
    }

    /// Q + b√μ − correction − d₂.
    fn phase(&self, lambda: T) -> Result<T> {
        let (q, corr, d2) = self.parts(lambda)?;
        Ok(q + self.spec.b * (lambda - self.qb).sqrt() - corr - d2)
    }
}

fn offset<T: Real>(tag: TypeTag) -> Result<T> {
    match tag {
        TypeTag::DType => Ok(T::FRAC_PI_4()),
        TypeTag::NType => Ok(T::lit(3.0) * T::FRAC_PI_4()),
        TypeTag::Unknown => Err(Error::Precondition("quantization needs a D_type or N_type tag".into())),
    }
}

fn solve_with<T: Real>(rel: &Relation<'_, T>, n: usize, tag: TypeTag) -> Result<QuantizationContext<T>> {
    if n == 0 {
        return Err(Error::Precondition("eigenvalue indices start at 1".into()));
    }
    let target = T::from_usize_lossy(n) * T::PI() - offset::<T>(tag)?;
    let f = |lam: T| rel.phase(lam).map(|p| p - target);
    let mut a = rel.qb + T::one();
    let mut fa = f(a)?;
    if fa >= T::zero() {
        return Err(Error::NoRoot(format!("no quantization root above q0(b) + 1 = {a} for n = {n}")));
    }
    let mut b = a + T::one();
    let mut fb = f(b)?;
    while fb <= T::zero() {
        a = b;
        fa = fb;
        b = rel.qb + (b - rel.qb) * T::lit(2.0);
        if !b.is_finite() {
            return Err(Error::NoRoot(format!("quantization relation for n = {n} never changes sign")));
        }
        fb = f(b)?;
    }
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0) * target.abs());
    let mut side = 0i8;
    let (mut lam, mut fl) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..300 {
        if fl.abs() <= tol || b - a <= T::epsilon() * T::lit(4.0) * b.abs() {
            break;
        }
        let mut c = a - fa * (b - a) / (fb - fa);
        if !(c > a && c < b) {
            c = (a + b) / T::lit(2.0);
        }
        let fc = f(c)?;
        lam = c;
        fl = fc;
        if fc < T::zero() {
            a = c;
            fa = fc;
            if side == -1 {
                fb = fb / T::lit(2.0);
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa / T::lit(2.0);
            }
            side = 1;
        }
    }
    let (q, correction, d2) = rel.parts(lam)?;
    Ok(QuantizationContext { n, lambda: lam, mu: lam - rel.qb, q, correction, d2, type_tag: tag, residual: fl })
}

/// λ̂ₙ (D_type) or λ̌ₙ (N_type): root of the quantization relation with the O(λ⁻¹) term dropped.
pub fn quantization_solve<T: Real>(spec: &PotentialSpec<T>, n: usize, tag: TypeTag) -> Result<QuantizationContext<T>> {
    solve_with(&Relation::new(spec)?, n, tag)
}

/// Q(b,λ) + b√μ − correction − d₂, the λ-dependent side of the quantization relation.
pub fn quantization_phase<T: Real>(spec: &PotentialSpec<T>, lambda: T) -> Result<T> {
    let qb = spec.q_at_b();
    if !(lambda > qb) {
        return Err(Error::Precondition(format!("lambda = {lambda} must exceed q0(b) = {qb}")));
    }
    Relation::new(spec)?.phase(lambda)
}

/// (π/4)(2n − 1) minus the right side of the general implicit relation, remainders dropped.
pub fn thm2_residual<T: Real>(spec: &PotentialSpec<T>, n: usize, lambda: T) -> Result<T> {
    let qb = spec.q_at_b();
    if !(lambda > qb) {
        return Err(Error::Precondition(format!("lambda = {lambda} must exceed q0(b) = {qb}")));
    }
    let rl = lambda.sqrt();
    let q = spec.action_q(spec.b, lambda)?;
    let mean = spec.mean_integral()?;
    let osc = spec.perturbation.cos_transform(T::lit(2.0) * rl);
    let rhs = q + spec.b * (lambda - qb).sqrt() - (mean + osc) / (T::lit(4.0) * rl);
    Ok(T::FRAC_PI_4() * T::from_usize_lossy(2 * n - 1) - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MergedEntry<T> {
    pub m: usize,
    pub nu: T,
    /// (π/4)(2m − 1) − (Q + b√μ − correction − d₂) at ν
    pub residual: T,
}

/// ν_{2n−1} = λ̌ₙ, ν_{2n} = λ̂ₙ for m = 1..=m_max, skipping leading indices with no root.
pub fn merged_sequence<T: Real>(spec: &PotentialSpec<T>, m_max: usize) -> Result<Vec<MergedEntry<T>>> {
    let rel = Relation::new(spec)?;
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let (n, tag) = if m % 2 == 1 { (m.div_ceil(2), TypeTag::NType) } else { (m / 2, TypeTag::DType) };
        let ctx = match solve_with(&rel, n, tag) {
            Ok(c) => c,
            Err(Error::NoRoot(_)) if out.is_empty() => continue,
            Err(e) => return Err(e),
        };
        let residual = T::FRAC_PI_4() * T::from_usize_lossy(2 * m - 1) - rel.phase(ctx.lambda)?;
        out.push(MergedEntry { m, nu: ctx.lambda, residual });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Perturbation;

    #[test]
    fn harmonic_roots() {
        let s = PotentialSpec::power(2.0f64, 1.0);
        let d = quantization_solve(&s, 10, TypeTag::DType).unwrap();
        assert!((d.lambda - 39.0).abs() < 5e-3, "{}", d.lambda);
        assert!(d.residual.abs() <= 1e-10);
        assert!(d.mu > 0.0 && d.q > 0.0 && d.d2 == 0.0);
        let n = quantization_solve(&s, 10, TypeTag::NType).unwrap();
        assert!((n.lambda - 37.0).abs() < 5e-3, "{}", n.lambda);
    }

    #[test]
    fn small_index_has_no_root() {
        let s = PotentialSpec::power(2.0f64, 3.0);
        assert!(matches!(quantization_solve(&s, 1, TypeTag::NType), Err(Error::NoRoot(_))));
        assert!(quantization_solve(&s, 1, TypeTag::Unknown).is_err());
    }

    #[test]
    fn thm2_harmonic_and_precondition() {
        let s = PotentialSpec::power(2.0f64, 1.0);
        assert!(thm2_residual(&s, 50, 99.0).unwrap().abs() <= 0.02);
        assert!(matches!(thm2_residual(&s, 50, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn merged_sequence_is_self_consistent() {
        let s = PotentialSpec::power(4.0f64, 1.0).with_perturbation(Perturbation::step(0.5, -0.5, 0.8));
        let seq = merged_sequence(&s, 40).unwrap();
        assert!(seq.len() >= 35);
        for e in &seq {
            assert!(e.residual.abs() <= 10.0 / e.m as f64);
        }
        assert!(seq.windows(2).all(|w| w[1].nu > w[0].nu));
    }
}
