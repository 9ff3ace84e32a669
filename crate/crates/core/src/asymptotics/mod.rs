//! Closed-form eigenvalue asymptotics and the implicit quantization relations.

mod counting;
mod quantize;
mod quartic;
mod report;

pub use counting::{counting_asymptotic, heat_trace_leading, heat_trace_numeric, HeatTrace};
pub use quantize::{merged_sequence, quantization_phase, quantization_solve, thm2_residual, MergedEntry, QuantizationContext};
pub use quartic::{quartic_coefficients_for, quartic_q_coefficients, quartic_residual, QuarticCoefficients};
pub use report::{ExpansionReport, ExpansionRow, REPORT_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::eigensolve::BoundaryCondition;
use crate::error::{Error, Result};
use crate::potential::{Perturbation, PotentialSpec};
use crate::real::Real;
use crate::specfun::{cot, gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExpansionConstants<T> {
    #[serde(rename = "C0")]
    pub c0: T,
    #[serde(rename = "C1")]
    pub c1: T,
    #[serde(rename = "C2")]
    pub c2: T,
    pub alpha: T,
}

/// C₁ = 4Γ(3/2)Γ(1/α) / (απΓ(3/2 + 1/α)).
pub fn c1<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::Domain { function: "C1", value: alpha.as_f64() });
    }
    let inv = T::one() / alpha;
    let h = T::lit(1.5);
    Ok(T::lit(4.0) * gamma(h)? * gamma(inv)? / (alpha * T::PI() * gamma(h + inv)?))
}

/// C₂ = (α − 1)cot(π/α) / (12π(2 + α)C₁); exactly zero at α = 1.
pub fn c2<T: Real>(alpha: T) -> Result<T> {
    if alpha == T::one() {
        return Ok(T::zero());
    }
    let c1 = c1(alpha)?;
    Ok((alpha - T::one()) * cot(T::PI() / alpha)? / (T::lit(12.0) * T::PI() * (T::lit(2.0) + alpha) * c1))
}

impl<T: Real> ExpansionConstants<T> {
    /// Full-line constants, C₀ = (1/π)∫V.
    pub fn new(alpha: T, v: &Perturbation<T>) -> Result<Self> {
        Ok(ExpansionConstants { c0: v.integral() / T::PI(), c1: c1(alpha)?, c2: c2(alpha)?, alpha })
    }

    /// Half-line variant with C₀ = (1/π)∫₀^∞ V.
    pub fn half_line(alpha: T, v: &Perturbation<T>) -> Result<Self> {
        let hi = v.support().map_or(T::zero(), |(_, hi)| hi.max(T::zero()));
        Ok(ExpansionConstants { c0: v.integral_on(T::zero(), hi) / T::PI(), c1: c1(alpha)?, c2: c2(alpha)?, alpha })
    }

    fn exponent(&self, num: T) -> T {
        num / (self.alpha + T::lit(2.0))
    }

    /// Four terms at a generic index argument m (2n − 1, 4n − 1 or 4n − 3) with the
    /// supplied oscillatory transform s ↦ ∫V cos(ωs).
    fn terms_at(&self, m: T, cos_transform: impl Fn(T) -> T) -> [T; 4] {
        let a = self.alpha;
        let two = T::lit(2.0);
        let k = two * a / (a + two);
        let term1 = self.c1.powf(-k) * m.powf(k);
        let pref = k * self.c1.powf(-self.exponent(a + T::lit(4.0))) * m.powf(-self.exponent(two));
        let term2 = pref * self.c0;
        let omega = two * self.c1.powf(-self.exponent(a)) * m.powf(self.exponent(a));
        let term3 = pref / (T::lit(4.0) * T::PI()) * cos_transform(omega);
        let term4 = k * self.c2 * self.c1.powf(-self.exponent(a + T::lit(6.0))) * m.powf(-self.exponent(T::lit(4.0)));
        [term1, term2, term3, term4]
    }
}

/// The four displayed terms of the full-line expansion at index n.
pub fn eigenvalue_expansion<T: Real>(consts: &ExpansionConstants<T>, v: &Perturbation<T>, n: usize) -> Result<ExpansionRow<T>> {
    if n == 0 {
        return Err(Error::Precondition("eigenvalue indices start at 1".into()));
    }
    let m = T::from_usize_lossy(2 * n - 1);
    Ok(ExpansionRow::new(n, consts.terms_at(m, |w| v.cos_transform(w))))
}

/// Half-line expansion: (4n − 1) for Dirichlet and (4n − 3) for Neumann, oscillatory integral over [0, ∞).
/// `consts` should come from [`ExpansionConstants::half_line`].
pub fn halfline_expansion<T: Real>(
    consts: &ExpansionConstants<T>,
    v: &Perturbation<T>,
    n: usize,
    bc: BoundaryCondition,
) -> Result<ExpansionRow<T>> {
    if n == 0 {
        return Err(Error::Precondition("eigenvalue indices start at 1".into()));
    }
    let m = match bc {
        BoundaryCondition::Dirichlet => 4 * n - 1,
        BoundaryCondition::Neumann => 4 * n - 3,
    };
    let hi = v.support().map_or(T::zero(), |(_, hi)| hi.max(T::zero()));
    let row = consts.terms_at(T::from_usize_lossy(m), |w| if hi > T::zero() { v.cos_transform_on(w, T::zero(), hi) } else { T::zero() });
    Ok(ExpansionRow::new(n, row))
}

/// Coefficient of λ^{−(α+2)/(2α)} in d₂ for α > 2.
pub fn d2_coefficient<T: Real>(alpha: T) -> Result<T> {
    let inv = T::one() / alpha;
    let h = T::lit(1.5);
    Ok(alpha * (alpha - T::one()) * gamma(h + inv)? * cot(T::PI() / alpha)?
        / (T::lit(48.0) * (T::lit(2.0) + alpha) * gamma(h)? * gamma(inv)?))
}

/// d₂(λ) for |x|^α: zero when α ≤ 2, the explicit tail otherwise.
pub fn d2_asymptotic<T: Real>(alpha: T, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain { function: "d2", value: lambda.as_f64() });
    }
    if alpha <= T::lit(2.0) {
        return Ok(T::zero());
    }
    Ok(d2_coefficient(alpha)? * lambda.powf(-(alpha + T::lit(2.0)) / (T::lit(2.0) * alpha)))
}

/// d₂ for a potential: a|x|^α rescales to the unit power, everything else gets 0.
pub fn spec_d2<T: Real>(spec: &PotentialSpec<T>, lambda: T) -> Result<T> {
    match spec.single_power() {
        Some((a, alpha)) => d2_asymptotic(alpha, lambda * a.powf(-T::lit(2.0) / (alpha + T::lit(2.0)))),
        None => Ok(T::zero()),
    }
}

/// Explicit right side of the implicit relation for (|x| + c)^α + V:
/// Kλ^{(α+2)/(2α)} − c√λ + (1/(4√λ))(2c^{α+1}/(α+1) − ∫V) − (1/(4√λ))∫V cos(2√λs),
/// with K = Γ(3/2)Γ(1/α)/(αΓ(3/2 + 1/α)).
pub fn shifted_power_phase<T: Real>(c: T, alpha: T, v: &Perturbation<T>, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain { function: "shifted_power_phase", value: lambda.as_f64() });
    }
    let k = c1(alpha)? * T::PI() / T::lit(4.0);
    let rl = lambda.sqrt();
    let a1 = alpha + T::one();
    let mean = T::lit(2.0) * c.powf(a1) / a1 - v.integral();
    Ok(k * lambda.powf((alpha + T::lit(2.0)) / (T::lit(2.0) * alpha)) - c * rl + mean / (T::lit(4.0) * rl)
        - v.cos_transform(T::lit(2.0) * rl) / (T::lit(4.0) * rl))
}

/// First index from which `lo[i] ≤ hi[i] ≤ lo[i+1]` holds for every later i (1-based),
/// or `None` when the last comparable index already fails.
pub fn interlacing_onset<T: Real>(lo: &[T], hi: &[T]) -> Option<usize> {
    let len = hi.len().min(lo.len().saturating_sub(1));
    let mut onset = None;
    for i in (0..len).rev() {
        if lo[i] <= hi[i] && hi[i] <= lo[i + 1] {
            onset = Some(i + 1);
        } else {
            break;
        }
    }
    onset
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_oracles() {
        let k = ExpansionConstants::new(2.0f64, &Perturbation::zero()).unwrap();
        assert!((k.c1 - 1.0).abs() < 1e-14 && k.c0 == 0.0 && k.c2.abs() < 1e-16);
        assert!((c1(4.0f64).unwrap() - 1.11283578889876424838).abs() < 1e-13);
        assert!((c2(4.0f64).unwrap() - 0.0119181213047158310635).abs() < 1e-15);
        assert_eq!(c2(1.0f64).unwrap(), 0.0);
        let w = ExpansionConstants::new(2.0f64, &Perturbation::weierstrass(0.5, 6)).unwrap();
        assert!(w.c0.abs() < 1e-14);
    }

    #[test]
    fn harmonic_terms() {
        let k = ExpansionConstants::new(2.0f64, &Perturbation::zero()).unwrap();
        let r = eigenvalue_expansion(&k, &Perturbation::zero(), 10).unwrap();
        assert!((r.term1 - 19.0).abs() < 1e-12);
        assert!(r.term2 == 0.0 && r.term3 == 0.0 && r.term4.abs() < 1e-15);
        assert_eq!(r.predicted, r.term1 + r.term2 + r.term3 + r.term4);
    }

    #[test]
    fn quartic_fourth_term_plug_in() {
        let k = ExpansionConstants::new(4.0f64, &Perturbation::zero()).unwrap();
        let r = eigenvalue_expansion(&k, &Perturbation::zero(), 10).unwrap();
        let want = 8.0 / 6.0 * k.c2 * k.c1.powf(-10.0 / 6.0) * 19f64.powf(-2.0 / 3.0);
        assert!((r.term4 - want).abs() < 1e-16);
    }

    #[test]
    fn weierstrass_resonant_third_term() {
        // with exact resonance 2√(2n−1) = 2^k the displayed term3 is n^{−(1+τ)/2}2^{−(5+3τ)/2}
        let tau = 0.5f64;
        let v = Perturbation::weierstrass(tau, 6);
        let k = ExpansionConstants::new(2.0, &v).unwrap();
        for kk in 3..=6 {
            let nk = 2f64.powi(2 * kk - 3);
            let m = 2.0 * nk;
            let t = k.terms_at(m, |w| v.cos_transform(w));
            let want = nk.powf(-(1.0 + tau) / 2.0) * 2f64.powf(-(5.0 + 3.0 * tau) / 2.0);
            assert!((t[2] - want).abs() < 1e-12 * want.abs().max(1.0), "k={kk}: {} vs {want}", t[2]);
        }
    }

    #[test]
    fn half_line_harmonic() {
        let z = Perturbation::zero();
        let k = ExpansionConstants::half_line(2.0f64, &z).unwrap();
        assert!((halfline_expansion(&k, &z, 5, BoundaryCondition::Dirichlet).unwrap().predicted - 19.0).abs() < 1e-12);
        assert!((halfline_expansion(&k, &z, 5, BoundaryCondition::Neumann).unwrap().predicted - 17.0).abs() < 1e-12);
        let d: Vec<f64> = (1..=101).map(|n| halfline_expansion(&k, &z, n, BoundaryCondition::Dirichlet).unwrap().predicted).collect();
        let nn: Vec<f64> = (1..=101).map(|n| halfline_expansion(&k, &z, n, BoundaryCondition::Neumann).unwrap().predicted).collect();
        assert_eq!(interlacing_onset(&nn, &d), Some(1));
    }

    #[test]
    fn half_line_mean_uses_positive_axis() {
        let v = Perturbation::step(0.3, 0.2, 1.2);
        let k = ExpansionConstants::half_line(2.0f64, &v).unwrap();
        assert!((k.c0 - 0.3 / std::f64::consts::PI).abs() < 1e-14);
        let v = Perturbation::step(0.3, -1.0, 1.0);
        let k = ExpansionConstants::half_line(2.0f64, &v).unwrap();
        assert!((k.c0 - 0.3 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn d2_values() {
        assert_eq!(d2_asymptotic(2.0f64, 100.0).unwrap(), 0.0);
        assert!((d2_asymptotic(4.0f64, 1e4).unwrap() - 0.0119181213047158310635e-3).abs() < 1e-17);
        assert!((d2_coefficient(3.0f64).unwrap() - 0.00571876770377382970).abs() < 1e-16);
        assert!((d2_asymptotic(3.0f64, 1e4).unwrap() - 2.65441683158620e-6).abs() < 1e-18);
        // a|x|^α rescales λ
        let s = PotentialSpec::plain(vec![crate::potential::PowerTerm { a: 2.0f64, alpha: 4.0 }], 1.0);
        let want = d2_asymptotic(4.0, 1e4 * 2f64.powf(-1.0 / 3.0)).unwrap();
        assert_eq!(spec_d2(&s, 1e4).unwrap(), want);
        assert_eq!(spec_d2(&PotentialSpec::quartic(0.0f64, 1.0), 1e4).unwrap(), 0.0);
    }

    #[test]
    fn shifted_phase_matches_exact_action() {
        // the c^{α+1} term enters with a plus sign; the opposite sign is off by c^{α+1}/((α+1)√λ)
        let v = Perturbation::step(0.4, -0.5, 0.7);
        let spec = PotentialSpec::shifted_power(1.0f64, 3.0, 1.0).with_perturbation(v.clone());
        for &lam in &[1e4f64, 1e5] {
            let rl = lam.sqrt();
            let exact = spec.action_q(1.0, lam).unwrap() + (lam - spec.q_at_b()).sqrt()
                - (spec.mean_integral().unwrap() + v.cos_transform(2.0 * rl)) / (4.0 * rl);
            let phase = shifted_power_phase(1.0, 3.0, &v, lam).unwrap();
            assert!((phase - exact).abs() < 5.0 / lam, "{lam}: {phase} vs {exact}");
            assert!((phase - exact).abs() < 0.01 * (0.5 / (4.0 * rl)));
        }
    }

    #[test]
    fn interlacing_reports_onset() {
        let lo = [1.0f64, 5.0, 4.0, 6.0, 8.0];
        let hi = [2.0f64, 3.0, 5.0, 7.0];
        assert_eq!(interlacing_onset(&lo, &hi), Some(3));
        assert_eq!(interlacing_onset(&[1.0f64, 2.0], &[3.0]), None);
    }
}
