use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::quadrature::integrate;
use crate::real::Real;
use crate::specfun::gamma;

/// (2/π)(Q(b,λ) + b√(λ − q(b))), the counting function up to O(1).
pub fn counting_asymptotic<T: Real>(spec: &PotentialSpec<T>, lambda: T) -> Result<T> {
    let qb = spec.q_at_b();
    if !(lambda > qb) {
        return Err(Error::Precondition(format!("lambda = {lambda} must exceed q0(b) = {qb}")));
    }
    let q = spec.action_q(spec.b, lambda)?;
    Ok(T::lit(2.0) / T::PI() * (q + spec.b * (lambda - qb).sqrt()))
}

/// (1/√π)Γ((α+1)/α)t^{−(α+2)/(2α)} − (c/√π)t^{−1/2}.
pub fn heat_trace_leading<T: Real>(alpha: T, t: T, c_shift: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain { function: "heat_trace_leading", value: t.as_f64() });
    }
    let sp = T::PI().sqrt();
    let g = gamma((alpha + T::one()) / alpha)?;
    Ok(g / sp * t.powf(-(alpha + T::lit(2.0)) / (T::lit(2.0) * alpha)) - c_shift / sp * t.powf(-T::lit(0.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HeatTrace<T> {
    pub t: T,
    /// Σ_{n ≤ N} e^{−tλₙ}
    pub partial_sum: T,
    /// bound on the omitted terms
    pub tail_bound: T,
    pub terms: usize,
}

impl<T: Real> HeatTrace<T> {
    pub fn total(&self) -> T {
        self.partial_sum + self.tail_bound
    }
}

/// Truncated trace over sorted eigenvalues plus a tail bound.
///
/// Σ_{n>N} e^{−tλₙ} = t∫_{λ_N}^∞ e^{−tλ}(N(λ) − N)dλ, and N(λ) is bounded by the
/// counting asymptotic plus `band`.
pub fn heat_trace_numeric<T: Real>(spec: &PotentialSpec<T>, lambdas: &[T], t: T, band: T) -> Result<HeatTrace<T>> {
    if !(t > T::zero()) {
        return Err(Error::Domain { function: "heat_trace_numeric", value: t.as_f64() });
    }
    let Some(&top) = lambdas.last() else {
        return Err(Error::Precondition("heat trace needs at least one eigenvalue".into()));
    };
    let partial_sum = lambdas.iter().map(|&l| (-t * l).exp()).sum();
    let count = T::from_usize_lossy(lambdas.len());
    let lo = top.max(spec.q_at_b() + T::lit(1e-9));
    let hi = lo + T::lit(60.0) / t;
    let g = |l: T| {
        let excess = counting_asymptotic(spec, l).map_or(T::zero(), |c| (c + band - count).max(T::zero()));
        (-t * (l - lo)).exp() * excess
    };
    let edges: Vec<T> = (0..=12).map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::lit(12.0)).collect();
    let mut acc = T::zero();
    for w in edges.windows(2) {
        acc = acc + integrate(g, w[0], w[1], T::lit(1e-12), T::lit(1e-10))?.value;
    }
    Ok(HeatTrace { t, partial_sum, tail_bound: t * (-t * lo).exp() * acc, terms: lambdas.len() })
}
