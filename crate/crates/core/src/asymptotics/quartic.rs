//! Coefficients of the quartic quantization relation from a fit of the exact action.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Composite, PotentialSpec};
use crate::real::Real;

const GRID: usize = 64;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuarticCoefficients<T> {
    /// a₀..a₆ multiplying λ^{(3−k)/4}
    pub a: Vec<T>,
    /// Taylor coefficients g₀..g₆ of g(r) = r³Q(b, r⁻⁴)
    pub g: Vec<T>,
    /// condition number of the column-scaled design matrix
    pub condition: T,
    /// largest |fit − g| over the λ grid
    pub max_fit_residual: T,
}

impl<T: Real> QuarticCoefficients<T> {
    /// Σ a_k λ^{(3−k)/4}.
    pub fn phase(&self, lambda: T) -> T {
        let r = lambda.powf(-T::lit(0.25));
        let mut acc = T::zero();
        for &a in self.a.iter().rev() {
            acc = acc * r + a;
        }
        acc / (r * r * r)
    }
}

/// Fits g(r) on λ ∈ [10⁴, 10⁸] and folds in the b√μ and mean terms:
/// a₁ = g₁ + b, a₅ = g₅ − (1/4)∫_{−b}^{b} q, a_k = g_k otherwise.
pub fn quartic_q_coefficients<T: Real>(c: T, b: T) -> Result<QuarticCoefficients<T>> {
    quartic_coefficients_for(&PotentialSpec::quartic(c, b))
}

/// As [`quartic_q_coefficients`] for a quartic spec that may carry a perturbation.
pub fn quartic_coefficients_for<T: Real>(spec: &PotentialSpec<T>) -> Result<QuarticCoefficients<T>> {
    spec.validate()?;
    if !matches!(spec.composite, Composite::Quartic { .. }) {
        return Err(Error::InvalidSpec("quartic coefficients need the quartic composite".into()));
    }
    let (l0, l1) = (1e4f64, 1e8f64);
    let rmax = l0.powf(-0.25);
    let mut design = DMatrix::<f64>::zeros(GRID, 7);
    let mut rhs = DVector::<f64>::zeros(GRID);
    for i in 0..GRID {
        let lam = l0 * (l1 / l0).powf(i as f64 / (GRID - 1) as f64);
        let r = lam.powf(-0.25);
        let q = spec.action_q(spec.b, T::lit(lam))?.as_f64();
        rhs[i] = q * r * r * r;
        for k in 0..7 {
            design[(i, k)] = (r / rmax).powi(k as i32);
        }
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let scaled = svd.solve(&rhs, f64::EPSILON * smax).map_err(|e| Error::Precondition(e.to_string()))?;
    let fit = &design * &scaled;
    let max_fit_residual = (fit - &rhs).amax();
    let g: Vec<f64> = (0..7).map(|k| scaled[k] / rmax.powi(k as i32)).collect();
    let full = spec.mean_integral()? + T::lit(2.0) * spec.b * spec.q_at_b();
    let mut a: Vec<T> = g.iter().map(|&v| T::lit(v)).collect();
    a[1] = a[1] + spec.b;
    a[5] = a[5] - full / T::lit(4.0);
    Ok(QuarticCoefficients {
        a,
        g: g.into_iter().map(T::lit).collect(),
        condition: T::lit(condition),
        max_fit_residual: T::lit(max_fit_residual),
    })
}

/// (π/4)(2n − 1) − [Σ a_k λ^{(3−k)/4} − (1/(4√λ))∫V cos(2√λ s)].
pub fn quartic_residual<T: Real>(spec: &PotentialSpec<T>, coeffs: &QuarticCoefficients<T>, n: usize, lambda: T) -> T {
    let rl = lambda.sqrt();
    let osc = spec.perturbation.cos_transform(T::lit(2.0) * rl) / (T::lit(4.0) * rl);
    T::FRAC_PI_4() * T::from_usize_lossy(2 * n - 1) - (coeffs.phase(lambda) - osc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const K4: f64 = 0.874019184764039937;

    #[test]
    fn pure_quartic_coefficients() {
        let c = quartic_q_coefficients(0.0f64, 1.0).unwrap();
        assert!(c.condition < MAX_CONDITION);
        assert!((c.a[0] - K4).abs() < 1e-9, "{}", c.a[0]);
        assert!((c.g[1] + 1.0).abs() < 1e-7, "{}", c.g[1]);
        assert!(c.a[1].abs() < 1e-7);
        assert!(c.a[2].abs() < 1e-5 && c.a[3].abs() < 1e-4, "{:?}", c.a);
        // g₅ = b⁵/10 cancels against (1/4)∫s⁴
        assert!((c.g[5] - 0.1).abs() < 1e-2, "{}", c.g[5]);
        assert!(c.a[5].abs() < 1e-2);
    }

    #[test]
    fn phase_reproduces_action() {
        let spec = PotentialSpec::quartic(1.0f64, 1.5);
        let c = quartic_coefficients_for(&spec).unwrap();
        for &lam in &[2e4, 3e6] {
            let direct = spec.action_q(1.5, lam).unwrap() + 1.5 * (lam - spec.q_at_b()).sqrt()
                - spec.mean_integral().unwrap() / (4.0 * lam.sqrt());
            assert!((c.phase(lam) - direct).abs() < 1e-6 * direct, "{lam}: {} vs {direct}", c.phase(lam));
        }
    }

    #[test]
    fn rejects_other_composites() {
        assert!(quartic_coefficients_for(&PotentialSpec::power(4.0f64, 1.0)).is_err());
    }
}
