//! Modified Prüfer phase shooting on the continuous problem.
//!
//! With y = ρ sin θ and y′ = Sρ cos θ, where S > 0 is constant on each mesh interval,
//! the phase obeys θ′ = S cos²θ + (W/S) sin²θ with W = λ − q. The mismatch
//! D(λ) equals (n − 1)π exactly at the n-th eigenvalue and crosses it upwards.

use super::{BoundaryCondition, BoundaryProblem, Geometry};
use crate::eigensolve::discrete::anchored_grid;
use crate::error::{Error, Result};
use crate::ode::{Dp45, Tolerances};
use crate::potential::{Limit, PotentialSpec};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct Shooter<'a, T> {
    spec: &'a PotentialSpec<T>,
    problem: BoundaryProblem<T>,
    /// increasing nodes from −L (or 0) to L
    mesh: Vec<T>,
    origin: usize,
    tol: Tolerances<T>,
}

/// Phase and normalization state at the end of a sweep.
#[derive(Debug, Clone, Copy)]
struct SweepEnd<T> {
    theta: T,
    /// S of the last interval crossed
    s: T,
    /// ∫ρ² sin²θ over the swept part divided by ρ² at the end point
    j: T,
}

/// Normalized boundary data of an eigenfunction at x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginData<T> {
    pub y: T,
    pub dy: T,
}

fn remap<T: Real>(theta: T, ratio: T) -> T {
    // θ = mπ + φ with φ ∈ [−π/2, π/2); tan φ scales by S_new/S_old
    let m = (theta / T::PI() + T::lit(0.5)).floor();
    let phi = theta - m * T::PI();
    let phi_new = if phi <= -T::FRAC_PI_2() { phi } else { (ratio * phi.tan()).atan() };
    m * T::PI() + phi_new
}

impl<'a, T: Real> Shooter<'a, T> {
    pub fn new(problem: &BoundaryProblem<T>, spec: &'a PotentialSpec<T>) -> Result<Self> {
        problem.validate()?;
        let l = problem.l;
        let (lo, mut anchors) = match problem.geometry {
            Geometry::FullLine => (-l, vec![T::zero(), -spec.b, spec.b]),
            Geometry::HalfLine => (T::zero(), vec![spec.b]),
        };
        anchors.extend(spec.perturbation.breakpoints());
        let mut spacing = T::lit(0.05).min(l / T::lit(200.0));
        let wmax = spec.perturbation.max_frequency();
        if wmax > T::zero() {
            spacing = spacing.min(T::PI() / (T::lit(4.0) * wmax));
        }
        let mesh = anchored_grid(lo, l, &anchors, spacing)?;
        let origin = mesh.iter().position(|&x| x == T::zero()).unwrap_or(0);
        let tol = Tolerances { rtol: T::lit(1e-13).max(T::epsilon() * T::lit(8.0)), atol: T::lit(1e-12).max(T::epsilon() * T::lit(8.0)), max_steps: 5_000_000 };
        Ok(Shooter { spec, problem: problem.clone(), mesh, origin, tol })
    }

    /// Same mesh with both ODE tolerances multiplied by `factor`.
    pub fn loosened(&self, factor: T) -> Self {
        let mut s = self.clone();
        s.tol.rtol = s.tol.rtol * factor;
        s.tol.atol = s.tol.atol * factor;
        s
    }

    /// Integration error of the phase condition at a computed eigenvalue, in λ units:
    /// the worst mismatch of the looser shooters divided by dD/dλ.
    pub fn integration_error(&self, loose: &[Self], n: usize, lambda: T) -> Result<T> {
        let target = T::from_usize_lossy(n - 1) * T::PI();
        let h = T::lit(1e-6) * (T::one() + lambda.abs());
        let slope = (self.mismatch(lambda + h)? - self.mismatch(lambda - h)?) / (T::lit(2.0) * h);
        let mut worst = T::zero();
        for l in loose {
            worst = worst.max(((l.mismatch(lambda)? - target) / slope).abs());
        }
        Ok(worst)
    }

    fn scale(&self, lambda: T, a: T, b: T) -> T {
        let w = lambda - self.spec.q((a + b) / T::lit(2.0));
        w.abs().max(T::one()).sqrt()
    }

    /// Sweeps the phase along `nodes` (in integration order) starting from `theta0`.
    fn sweep(&self, lambda: T, nodes: &[T], theta0: T, with_norm: bool) -> Result<SweepEnd<T>> {
        let mut theta = theta0;
        let mut j = T::zero();
        let mut s_prev: Option<T> = None;
        let forward = nodes[nodes.len() - 1] > nodes[0];
        let sign = if forward { T::one() } else { -T::one() };
        for w in nodes.windows(2) {
            let (xa, xb) = (w[0], w[1]);
            let s = self.scale(lambda, xa, xb);
            if let Some(sp) = s_prev {
                if sp != s {
                    if with_norm {
                        let (sn, cs) = theta.sin_cos();
                        let r = sp / s;
                        j = j / (sn * sn + r * r * cs * cs);
                    }
                    theta = remap(theta, s / sp);
                }
            }
            s_prev = Some(s);
            let mid = (xa + xb) / T::lit(2.0);
            let spec = self.spec;
            let q_at = move |x: T| spec.q_side(x, if x < mid { Limit::Right } else { Limit::Left });
            if with_norm {
                let mut rhs = |x: T, y: &[T; 2]| {
                    let wv = lambda - q_at(x);
                    let (sn, cs) = y[0].sin_cos();
                    let g = (s - wv / s) * sn * cs;
                    [s * cs * cs + wv / s * sn * sn, sign * sn * sn - T::lit(2.0) * g * y[1]]
                };
                let mut st = Dp45::new(xa, [theta, j], self.tol);
                st.advance(&mut rhs, xb)?;
                theta = st.y[0];
                j = st.y[1];
            } else {
                let mut rhs = |x: T, y: &[T; 1]| {
                    let wv = lambda - q_at(x);
                    let (sn, cs) = y[0].sin_cos();
                    [s * cs * cs + wv / s * sn * sn]
                };
                let mut st = Dp45::new(xa, [theta], self.tol);
                st.advance(&mut rhs, xb)?;
                theta = st.y[0];
            }
        }
        Ok(SweepEnd { theta, s: s_prev.unwrap_or(T::one()), j })
    }

    fn left_nodes(&self) -> &[T] {
        &self.mesh[..=self.origin]
    }

    fn right_nodes_to(&self, stop: usize) -> Vec<T> {
        self.mesh[stop..].iter().rev().copied().collect()
    }

    fn boundary_phase(&self) -> T {
        match self.problem.bc {
            BoundaryCondition::Dirichlet => T::zero(),
            BoundaryCondition::Neumann => T::FRAC_PI_2(),
        }
    }

    /// D(λ); the n-th eigenvalue solves D(λ) = (n − 1)π.
    pub fn mismatch(&self, lambda: T) -> Result<T> {
        let right = self.sweep(lambda, &self.right_nodes_to(self.origin), T::PI(), false)?;
        match self.problem.geometry {
            Geometry::HalfLine => Ok(self.boundary_phase() - right.theta),
            Geometry::FullLine => {
                let left = self.sweep(lambda, self.left_nodes(), T::zero(), false)?;
                Ok(left.theta - remap(right.theta, left.s / right.s))
            }
        }
    }

    /// Solves D(λ) = (n − 1)π inside an expanding bracket around `guess`.
    /// Returns the eigenvalue and an error estimate.
    pub fn polish(&self, n: usize, guess: T, tol: T) -> Result<(T, T)> {
        let target = T::from_usize_lossy(n - 1) * T::PI();
        let f = |lam: T| self.mismatch(lam).map(|d| d - target);
        let mut delta = tol.max(T::lit(1e-6) * (T::one() + guess.abs()));
        let (mut a, mut b) = (guess - delta, guess + delta);
        let (mut fa, mut fb) = (f(a)?, f(b)?);
        let mut expansions = 0;
        while fa > T::zero() || fb < T::zero() {
            delta = delta * T::lit(4.0);
            if fa > T::zero() {
                b = a;
                fb = fa;
                a = guess - delta;
                fa = f(a)?;
            } else {
                a = b;
                fa = fb;
                b = guess + delta;
                fb = f(b)?;
            }
            expansions += 1;
            if expansions > 60 {
                return Err(Error::MissedIndex { n, reason: "phase condition could not be bracketed".into() });
            }
        }
        // Illinois variant of regula falsi
        let mut side = 0i8;
        let mut best = (a, fa);
        for _ in 0..200 {
            let width = b - a;
            let slope = (fb - fa) / width;
            let mut c = a - fa / slope;
            if !(c > a && c < b) {
                c = (a + b) / T::lit(2.0);
            }
            let fc = f(c)?;
            if fc.abs() < best.1.abs() {
                best = (c, fc);
            }
            let residual = fc.abs() / slope.abs();
            if residual <= tol * T::lit(0.01) || width <= tol {
                let est = residual.max(if width <= tol { width } else { T::zero() });
                return Ok((c, est.max(T::epsilon() * c.abs() * T::lit(8.0))));
            }
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
        let slope = (fb - fa) / (b - a);
        Ok((best.0, (best.1 / slope).abs().max(b - a)))
    }

    /// Normalized (y(0), y′(0)) of the eigenfunction at `lambda`, positive near −L.
    pub fn origin_data(&self, lambda: T) -> Result<OriginData<T>> {
        let right = self.sweep(lambda, &self.right_nodes_to(self.origin), T::PI(), true)?;
        let (theta, s, norm) = match self.problem.geometry {
            Geometry::HalfLine => {
                // right solution has y(L)=0, y'(L)<0; flip so that y > 0 just inside L is irrelevant here
                (right.theta, right.s, right.j)
            }
            Geometry::FullLine => {
                let left = self.sweep(lambda, self.left_nodes(), T::zero(), true)?;
                let (sn, cs) = left.theta.sin_cos();
                let r = left.s / right.s;
                (left.theta, left.s, left.j + right.j * (sn * sn + r * r * cs * cs))
            }
        };
        let inv = T::one() / norm.sqrt();
        Ok(OriginData { y: theta.sin() * inv, dy: s * theta.cos() * inv })
    }

    /// Direction (y, y′)/|·| of the decaying solution at a mesh node x ≥ 0.
    pub fn right_direction(&self, lambda: T, x: T) -> Result<(T, T)> {
        let Some(stop) = self.mesh.iter().position(|&m| m == x) else {
            return Err(Error::Precondition(format!("x = {x} is not a shooting mesh node")));
        };
        let end = self.sweep(lambda, &self.right_nodes_to(stop), T::PI(), false)?;
        let (y, dy) = (end.theta.sin(), end.s * end.theta.cos());
        let r = (y * y + dy * dy).sqrt();
        Ok((y / r, dy / r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remap_keeps_zeros_and_branch() {
        let pi = std::f64::consts::PI;
        assert_eq!(remap(3.0 * pi, 2.0), 3.0 * pi);
        let t = remap(0.3 + 2.0 * pi, 3.0);
        assert!((t - (2.0 * pi + (3.0 * 0.3f64.tan()).atan())).abs() < 1e-14);
        let t = remap(-0.2, 0.5);
        assert!(t < 0.0 && t > -0.2);
    }
}
