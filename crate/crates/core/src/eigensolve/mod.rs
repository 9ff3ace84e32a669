//! Numerical eigenvalues of −y″ + q(x)y = λy on a truncated line or half-line.
//!
//! Indices come from Sturm pivot counts on a three-point discretization; values are then
//! polished by Prüfer shooting on the continuous problem.

pub mod discrete;
pub mod prufer;
pub mod spectrum;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::real::Real;

pub use discrete::DiscreteOperator;
pub use prufer::{OriginData, Shooter};
pub use spectrum::{Eigenpair, Spectrum, SpectrumMeta, TypeTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[default]
    FullLine,
    HalfLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fd2,
    #[default]
    Numerov,
}

/// Truncated boundary value problem: Dirichlet at ±L, and `bc` at 0 on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundaryProblem<T> {
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub bc: BoundaryCondition,
    pub l: T,
    pub h: T,
    #[serde(default)]
    pub scheme: Scheme,
}

impl<T: Real> BoundaryProblem<T> {
    pub fn full_line(l: T, h: T) -> Self {
        BoundaryProblem { geometry: Geometry::FullLine, bc: BoundaryCondition::Dirichlet, l, h, scheme: Scheme::Numerov }
    }

    pub fn half_line(bc: BoundaryCondition, l: T, h: T) -> Self {
        BoundaryProblem { geometry: Geometry::HalfLine, bc, l, h, scheme: Scheme::Numerov }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > T::zero() && self.h > T::zero() && self.h < self.l) {
            return Err(Error::Precondition(format!("need 0 < h < L, got h = {}, L = {}", self.h, self.l)));
        }
        Ok(())
    }

    /// Chooses L and h for indices up to `n_max`.
    ///
    /// L satisfies q₀(L) ≥ λ_max + 25 and also leaves a decay integral
    /// ∫ √(q₀ − λ_max) ≥ 20 beyond the turning point, which the margin alone
    /// does not guarantee once λ is large.
    pub fn auto(spec: &PotentialSpec<T>, geometry: Geometry, bc: BoundaryCondition, n_max: usize) -> Result<Self> {
        spec.validate()?;
        let lambda_max = wkb_level(spec, geometry, n_max + 1)? * T::lit(1.05) + spec.perturbation.sup_bound() + T::lit(5.0);
        let a = spec.outer_turning_point(lambda_max)?;
        let mut l = a.max(spec.b * T::lit(1.05));
        let mut decay = T::zero();
        let dx = T::lit(0.01) * a.max(T::one());
        while spec.q0(l) < lambda_max + T::lit(25.0) || decay < T::lit(20.0) {
            let mid = l + dx / T::lit(2.0);
            decay = decay + dx * (spec.q0(mid) - lambda_max).max(T::zero()).sqrt();
            l = l + dx;
        }
        if let Some((lo, hi)) = spec.perturbation.support() {
            l = l.max(hi.abs().max(lo.abs()) * T::lit(1.05));
        }
        let mut h = T::lit(0.01).min(l / T::lit(400.0));
        let wmax = spec.perturbation.max_frequency();
        if wmax > T::zero() {
            h = h.min(T::TAU() / wmax / T::lit(16.0));
        }
        // keep every off-diagonal product positive: h²·max|q − λ|/12 < 1
        let spread = spec.q0(l) + spec.perturbation.sup_bound() + lambda_max.abs();
        h = h.min((T::lit(6.0) / spread).sqrt());
        Ok(BoundaryProblem { geometry, bc, l, h, scheme: Scheme::Numerov })
    }
}

/// λ at which the semiclassical count (1/π)∫√(λ − q₀)₊ over the domain reaches `count`.
pub fn wkb_level<T: Real>(spec: &PotentialSpec<T>, geometry: Geometry, count: usize) -> Result<T> {
    let factor = match geometry {
        Geometry::FullLine => T::lit(2.0),
        Geometry::HalfLine => T::one(),
    };
    let target = T::from_usize_lossy(count);
    let n = |lam: T| -> Result<T> { Ok(factor * spec.action_q0(T::zero(), lam)? / T::PI()) };
    let floor = spec.q0(spec.monotone_from()).min(spec.q0(T::zero()));
    let mut lo = floor;
    let mut hi = floor.abs() + T::one();
    while n(hi)? < target {
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    for _ in 0..100 {
        let mid = (lo + hi) / T::lit(2.0);
        if n(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-9) * hi.abs().max(T::one()) {
            break;
        }
    }
    Ok(hi)
}

/// Number of discrete eigenvalues ≤ λ.
pub fn sturm_count<T: Real>(problem: &BoundaryProblem<T>, spec: &PotentialSpec<T>, lambda: T) -> Result<usize> {
    DiscreteOperator::new(problem, spec)?.count(lambda)
}

/// The n-th eigenvalue of the discretized operator (no continuous polish).
pub fn discrete_eigenvalue<T: Real>(problem: &BoundaryProblem<T>, spec: &PotentialSpec<T>, n: usize, tol: T) -> Result<T> {
    DiscreteOperator::new(problem, spec)?.eigenvalue(n, tol)
}

/// Boundary angle φ(λ) ∈ [0, 2π) of an eigenfunction and its D/N classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryAngle<T> {
    pub phi: T,
    pub tag: TypeTag,
    pub y0: T,
    pub dy0: T,
}

/// φ = atan2(y′(0)/√(λ − q(b)), y(0)) for the normalized eigenfunction positive near −L.
pub fn boundary_angle<T: Real>(problem: &BoundaryProblem<T>, spec: &PotentialSpec<T>, lambda: T) -> Result<BoundaryAngle<T>> {
    let shooter = Shooter::new(problem, spec)?;
    boundary_angle_with(&shooter, spec, lambda)
}

fn boundary_angle_with<T: Real>(shooter: &Shooter<'_, T>, spec: &PotentialSpec<T>, lambda: T) -> Result<BoundaryAngle<T>> {
    let d = shooter.origin_data(lambda)?;
    let small = T::lit(1e-12);
    if d.y.abs() < small && d.dy.abs() < small {
        return Err(Error::DegenerateEigenfunction(lambda.as_f64()));
    }
    let mu = lambda - spec.q_at_b();
    if !(mu > T::zero()) {
        return Err(Error::Precondition(format!("boundary angle needs lambda > q(b), got {lambda}")));
    }
    let mut phi = (d.dy / mu.sqrt()).atan2(d.y);
    if phi < T::zero() {
        phi = phi + T::TAU();
    }
    let tag = if phi.sin().abs() >= phi.cos().abs() { TypeTag::DType } else { TypeTag::NType };
    Ok(BoundaryAngle { phi, tag, y0: d.y, dy0: d.dy })
}

/// Eigenvalues n_lo..=n_hi (1-based) with certified indices.
pub fn solve_range<T: Real>(
    problem: &BoundaryProblem<T>,
    spec: &PotentialSpec<T>,
    n_lo: usize,
    n_hi: usize,
    tol: T,
) -> Result<Spectrum<T>> {
    spec.validate()?;
    if n_lo == 0 || n_hi < n_lo {
        return Err(Error::Precondition(format!("invalid index range {n_lo}..{n_hi}")));
    }
    if !(tol >= T::lit(1e-10)) {
        return Err(Error::Precondition(format!("tol must be at least 1e-10, got {tol}")));
    }
    let op = DiscreteOperator::new(problem, spec)?;
    let shooter = Shooter::new(problem, spec)?;
    // two looseness levels so that one lucky cancellation does not hide the error
    let loose = [shooter.loosened(T::lit(10.0)), shooter.loosened(T::lit(100.0))];
    let entries: Result<Vec<Eigenpair<T>>> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| solve_one(problem, spec, &op, (&shooter, &loose), n, tol))
        .collect();
    let entries = entries?;
    for w in entries.windows(2) {
        let gap = w[1].lambda - w[0].lambda;
        if !(gap > w[0].est_error + w[1].est_error) {
            return Err(Error::MissedIndex {
                n: w[1].n,
                reason: format!("eigenvalues {} and {} are not separated beyond their error", w[0].lambda, w[1].lambda),
            });
        }
    }
    Ok(Spectrum { meta: SpectrumMeta::new(problem, spec, tol), eigenvalues: entries })
}

fn solve_one<T: Real>(
    problem: &BoundaryProblem<T>,
    spec: &PotentialSpec<T>,
    op: &DiscreteOperator<T>,
    (shooter, loose): (&Shooter<'_, T>, &[Shooter<'_, T>]),
    n: usize,
    tol: T,
) -> Result<Eigenpair<T>> {
    let (lo, hi) = op.bracket(n, tol)?;
    let guess = (lo + hi) / T::lit(2.0);
    let (lambda, root_err) = shooter.polish(n, guess, tol)?;
    let shoot_err = root_err + shooter.integration_error(loose, n, lambda)?;
    if !(lambda < op.lambda_limit()) {
        return Err(Error::TruncationMargin {
            q_at_l: (op.lambda_limit() + T::lit(25.0)).as_f64(),
            required: (lambda + T::lit(25.0)).as_f64(),
        });
    }
    // the continuous eigenvalue must sit between the discrete neighbours n−1 and n+1
    let c = op.count(lambda)?;
    if c + 1 < n || c > n {
        return Err(Error::MissedIndex {
            n,
            reason: format!("shooting gave {lambda} but the discrete count there is {c}; refine h"),
        });
    }
    let (phi, tag) = match problem.geometry {
        // below q(b) the angle is undefined; keep the raw phase and leave the type open
        Geometry::FullLine if lambda <= spec.q_at_b() => {
            let d = shooter.origin_data(lambda)?;
            let phi = d.dy.atan2(d.y);
            (if phi < T::zero() { phi + T::TAU() } else { phi }, TypeTag::Unknown)
        }
        Geometry::FullLine => {
            let a = boundary_angle_with(shooter, spec, lambda)?;
            (a.phi, a.tag)
        }
        Geometry::HalfLine => match problem.bc {
            BoundaryCondition::Dirichlet => (T::FRAC_PI_2(), TypeTag::DType),
            BoundaryCondition::Neumann => (T::zero(), TypeTag::NType),
        },
    };
    Ok(Eigenpair { n, lambda, type_tag: tag, phi, est_error: shoot_err.max(T::epsilon() * lambda.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_examples() {
        let spec = PotentialSpec::power(2.0f64, 1.0);
        let full = BoundaryProblem::full_line(12.0, 0.005);
        assert_eq!(sturm_count(&full, &spec, 9.5).unwrap(), 5);
        assert_eq!(sturm_count(&full, &spec, 0.5).unwrap(), 0);
        let half = BoundaryProblem::half_line(BoundaryCondition::Neumann, 12.0, 0.005);
        assert_eq!(sturm_count(&half, &spec, 6.0).unwrap(), 2);
        assert!(matches!(sturm_count(&full, &spec, 130.0), Err(Error::TruncationMargin { .. })));
    }

    #[test]
    fn harmonic_first_ten() {
        let spec = PotentialSpec::power(2.0f64, 0.5);
        let p = BoundaryProblem::full_line(12.0, 0.01);
        let s = solve_range(&p, &spec, 1, 10, 1e-8).unwrap();
        for e in &s.eigenvalues {
            let want = 2.0 * e.n as f64 - 1.0;
            assert!((e.lambda - want).abs() < 1e-6, "n = {} got {}", e.n, e.lambda);
            let expect = if e.n % 2 == 1 { TypeTag::NType } else { TypeTag::DType };
            assert_eq!(e.type_tag, expect, "n = {}", e.n);
        }
    }

    #[test]
    fn quartic_ground_state() {
        let spec = PotentialSpec::power(4.0f64, 1.0);
        let p = BoundaryProblem::auto(&spec, Geometry::FullLine, BoundaryCondition::Dirichlet, 1).unwrap();
        let s = solve_range(&p, &spec, 1, 1, 1e-9).unwrap();
        assert!((s.eigenvalues[0].lambda - 1.060_362_090_484).abs() < 1e-9);
    }
}
