//! Three-point discretization of −y″ + q y = λ y and Sturm pivot counting.

use super::{BoundaryCondition, BoundaryProblem, Geometry, Scheme};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::real::Real;

const MAX_NODES: usize = 50_000_000;

/// Row coefficients stored as `A − λ·B` pairs so a count costs one pass.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub x: Vec<T>,
    diag: Vec<(T, T)>,
    lower: Vec<(T, T)>,
    upper: Vec<(T, T)>,
    lambda_limit: T,
    q_min: T,
}

/// Grid nodes from `lo` to `hi` with every anchor strictly inside landing on a node.
pub(crate) fn anchored_grid<T: Real>(lo: T, hi: T, anchors: &[T], h: T) -> Result<Vec<T>> {
    let edges = crate::quadrature::panel_edges(lo, hi, anchors);
    let mut nodes = vec![lo];
    for w in edges.windows(2) {
        let m = ((w[1] - w[0]) / h).ceil().to_usize().unwrap_or(usize::MAX).max(1);
        if nodes.len() + m > MAX_NODES {
            return Err(Error::GridTooCoarse { h: h.as_f64(), reason: format!("grid would exceed {MAX_NODES} nodes") });
        }
        let step = (w[1] - w[0]) / T::from_usize_lossy(m);
        for k in 1..m {
            nodes.push(w[0] + step * T::from_usize_lossy(k));
        }
        nodes.push(w[1]);
    }
    Ok(nodes)
}

// Three-point compact weights exact for y'' = f on a non-uniform stencil.
fn stencil_weights<T: Real>(scheme: Scheme, h1: T, h2: T) -> (T, T, T) {
    match scheme {
        Scheme::Fd2 => (T::zero(), T::one(), T::zero()),
        Scheme::Numerov => {
            let six = T::lit(6.0);
            let wm = (h1 * h1 + h1 * h2 - h2 * h2) / (six * h1 * (h1 + h2));
            let wp = (h2 * h2 + h1 * h2 - h1 * h1) / (six * h2 * (h1 + h2));
            (wm, T::one() - wm - wp, wp)
        }
    }
}

impl<T: Real> DiscreteOperator<T> {
    pub fn new(problem: &BoundaryProblem<T>, spec: &PotentialSpec<T>) -> Result<Self> {
        problem.validate()?;
        let (lo, mut anchors) = match problem.geometry {
            Geometry::FullLine => (-problem.l, vec![T::zero()]),
            Geometry::HalfLine => (T::zero(), vec![]),
        };
        anchors.extend(spec.perturbation.breakpoints());
        let nodes = anchored_grid(lo, problem.l, &anchors, problem.h)?;
        let q: Vec<T> = nodes.iter().map(|&x| spec.q(x)).collect();
        let last = nodes.len() - 1;
        let neumann = problem.geometry == Geometry::HalfLine && problem.bc == BoundaryCondition::Neumann;
        let first = if neumann { 0 } else { 1 };

        let mut x = Vec::with_capacity(last);
        let mut diag = Vec::with_capacity(last);
        let mut lower = Vec::with_capacity(last);
        let mut upper = Vec::with_capacity(last);
        for i in first..last {
            let h2 = nodes[i + 1] - nodes[i];
            // the Neumann ghost node mirrors node 1
            let (h1, q_left) = if i == 0 { (h2, q[1]) } else { (nodes[i] - nodes[i - 1], q[i - 1]) };
            let s = (h1 + h2) / T::lit(2.0);
            let (wm, w0, wp) = stencil_weights(problem.scheme, h1, h2);
            let mut up = (-T::one() / h2 + s * wp * q[i + 1], s * wp);
            if i == 0 {
                up = (up.0 * T::lit(2.0), up.1 * T::lit(2.0));
            }
            x.push(nodes[i]);
            diag.push((T::one() / h1 + T::one() / h2 + s * w0 * q[i], s * w0));
            lower.push((-T::one() / h1 + s * wm * q_left, s * wm));
            upper.push(up);
        }
        let q_min = q.iter().copied().fold(T::infinity(), T::min);
        Ok(DiscreteOperator { x, diag, lower, upper, lambda_limit: spec.q0(problem.l) - T::lit(25.0), q_min })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Largest λ allowed by the truncation margin q₀(L) ≥ λ + 25.
    pub fn lambda_limit(&self) -> T {
        self.lambda_limit
    }

    /// Number of discrete eigenvalues below `lambda` (negative pivots of A − λB).
    pub fn count(&self, lambda: T) -> Result<usize> {
        if !(lambda < self.lambda_limit) {
            return Err(Error::TruncationMargin {
                q_at_l: (self.lambda_limit + T::lit(25.0)).as_f64(),
                required: (lambda + T::lit(25.0)).as_f64(),
            });
        }
        let at = |c: (T, T)| c.0 - lambda * c.1;
        let tiny = T::min_positive_value().sqrt();
        let mut d = at(self.diag[0]);
        let mut negatives = usize::from(d < T::zero());
        for i in 1..self.diag.len() {
            let prod = at(self.lower[i]) * at(self.upper[i - 1]);
            if !(prod > T::zero()) {
                return Err(Error::GridTooCoarse {
                    h: (self.x[i] - self.x[i - 1]).as_f64(),
                    reason: format!("stencil loses its oscillation property at x = {} for lambda = {lambda}", self.x[i]),
                });
            }
            if d == T::zero() {
                d = tiny;
            }
            d = at(self.diag[i]) - prod / d;
            if d < T::zero() {
                negatives += 1;
            }
        }
        Ok(negatives)
    }

    /// Interval `[lo, hi]` with `count(lo) < n ≤ count(hi)` and width at most `tol`.
    pub fn bracket(&self, n: usize, tol: T) -> Result<(T, T)> {
        let mut lo = self.q_min - T::one();
        while self.count(lo)? >= n {
            lo = lo - (lo.abs() + T::one());
        }
        let cap = self.lambda_limit - (self.lambda_limit.abs() + T::one()) * T::lit(1e-12);
        let mut hi = (lo + T::one()).min(cap);
        while self.count(hi)? < n {
            if hi >= cap {
                return Err(Error::TruncationMargin {
                    q_at_l: (self.lambda_limit + T::lit(25.0)).as_f64(),
                    required: (hi + T::lit(25.0)).as_f64(),
                });
            }
            lo = hi;
            hi = (hi + (hi - self.q_min).abs() + T::one()).min(cap);
        }
        for _ in 0..300 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count(mid)? >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((lo, hi))
    }

    /// n-th discrete eigenvalue (1-based) to within `tol`.
    pub fn eigenvalue(&self, n: usize, tol: T) -> Result<T> {
        if n == 0 {
            return Err(Error::Precondition("eigenvalue indices start at 1".into()));
        }
        let (lo, hi) = self.bracket(n, tol)?;
        Ok((lo + hi) / T::lit(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerov_weights_reduce_to_uniform() {
        let (a, b, c) = stencil_weights(Scheme::Numerov, 0.1f64, 0.1);
        assert!((a - 1.0 / 12.0).abs() < 1e-15 && (c - 1.0 / 12.0).abs() < 1e-15);
        assert!((b - 10.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn anchors_land_on_nodes() {
        let g = anchored_grid(-2.0f64, 2.0, &[0.0, 0.3, 5.0], 0.07).unwrap();
        assert!(g.contains(&0.0) && g.contains(&0.3));
        assert_eq!(g[0], -2.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.07 + 1e-12));
    }
}
