//! Dormand–Prince 5(4) with step size control, generic over a fixed-size state.

use crate::error::{Error, Result};
use crate::real::Real;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances { rtol: T::lit(1e-11), atol: T::lit(1e-13), max_steps: 1_000_000 }
    }
}

/// Stateful integrator that can be advanced to successive targets.
#[derive(Debug, Clone)]
pub struct Dp45<T, const N: usize> {
    pub x: T,
    pub y: [T; N],
    h: T,
    tol: Tolerances<T>,
    pub steps: usize,
}

impl<T: Real, const N: usize> Dp45<T, N> {
    pub fn new(x0: T, y0: [T; N], tol: Tolerances<T>) -> Self {
        Dp45 { x: x0, y: y0, h: T::zero(), tol, steps: 0 }
    }

    /// Integrates from the current point to `x_end` (either direction).
    pub fn advance<F: FnMut(T, &[T; N]) -> [T; N]>(&mut self, f: &mut F, x_end: T) -> Result<()> {
        let span = x_end - self.x;
        if span == T::zero() {
            return Ok(());
        }
        let dir = span.signum();
        let mut h = if self.h == T::zero() {
            span.abs().min(T::lit(0.01))
        } else {
            self.h.abs().min(span.abs())
        };
        let mut k = [[T::zero(); N]; 7];
        k[0] = f(self.x, &self.y);
        loop {
            let remaining = (x_end - self.x) * dir;
            if remaining <= T::zero() {
                return Ok(());
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            for s in 1..7 {
                let mut ys = self.y;
                for (i, v) in ys.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc = acc + T::lit(A[s][j]) * kj[i];
                    }
                    *v = *v + hs * acc;
                }
                let xs = if s == 6 && last { x_end } else { self.x + hs * T::lit(C[s]) };
                k[s] = f(xs, &ys);
            }
            let mut y_new = self.y;
            for (i, v) in y_new.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(6) {
                    acc = acc + T::lit(A[6][j]) * kj[i];
                }
                *v = *v + hs * acc;
            }
            let mut err = T::zero();
            for i in 0..N {
                let mut e = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    e = e + T::lit(E[j]) * kj[i];
                }
                let scale = self.tol.atol + self.tol.rtol * self.y[i].abs().max(y_new[i].abs());
                let r = (hs * e / scale).abs();
                err = err.max(r);
            }
            self.steps += 1;
            if self.steps > self.tol.max_steps {
                return Err(Error::Integration { x: self.x.as_f64(), reason: "step budget exhausted".into() });
            }
            if !err.is_finite() {
                return Err(Error::Integration { x: self.x.as_f64(), reason: "non-finite state".into() });
            }
            if err <= T::one() {
                self.x = if last { x_end } else { self.x + hs };
                self.y = y_new;
                k[0] = k[6];
                let grow = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0))
                };
                // keep the unclipped step for the next call when the last step was shortened
                if !last {
                    self.h = h * grow;
                } else {
                    self.h = self.h.abs().max(h);
                }
                h = h * grow;
            } else {
                h = h * (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
                if h < T::epsilon() * self.x.abs().max(T::one()) * T::lit(16.0) {
                    return Err(Error::Integration { x: self.x.as_f64(), reason: "step size underflow".into() });
                }
            }
        }
    }
}

/// Convenience wrapper: integrates `y' = f(x, y)` from `x0` to `x1`.
pub fn solve_ivp<T: Real, const N: usize, F: FnMut(T, &[T; N]) -> [T; N]>(
    mut f: F,
    x0: T,
    y0: [T; N],
    x1: T,
    tol: Tolerances<T>,
) -> Result<[T; N]> {
    let mut st = Dp45::new(x0, y0, tol);
    st.advance(&mut f, x1)?;
    Ok(st.y)
}
