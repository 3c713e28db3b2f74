//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

// Dormand-Prince tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 100_000;

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction), returning y(x1).
///
/// `h_guess` is the initial step magnitude; it is updated in place with the
/// last accepted step so consecutive calls over a fine output grid stay cheap.
pub fn integrate<T, F, const N: usize>(
    f: &F,
    x0: T,
    x1: T,
    y0: [T; N],
    tol: Tolerance<T>,
    h_guess: &mut T,
) -> Result<[T; N]>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let span = x1 - x0;
    if span == T::zero() {
        return Ok(y0);
    }
    let dir = span.signum();
    let min_step = T::epsilon() * T::lit(16.0) * (x0.abs() + x1.abs() + T::one());
    let mut h = h_guess.abs().min(span.abs()).max(min_step);
    let mut x = x0;
    let mut y = y0;

    for _ in 0..MAX_STEPS {
        let remaining = (x1 - x).abs();
        if remaining <= min_step {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = dir * step;

        let mut k = [[T::zero(); N]; 7];
        k[0] = f(x, &y);
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + T::lit(A[s][j]) * kj[i];
                }
                *yi = *yi + hs * acc;
            }
            k[s] = f(x + T::lit(C[s]) * hs, &ys);
        }

        let mut y_new = y;
        let mut err = T::zero();
        for i in 0..N {
            let mut hi = T::zero();
            let mut lo = T::zero();
            for s in 0..7 {
                hi = hi + T::lit(B5[s]) * k[s][i];
                lo = lo + T::lit(B4[s]) * k[s][i];
            }
            y_new[i] = y[i] + hs * hi;
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            let e = (hs * (hi - lo)) / scale;
            err = err + e * e;
        }
        err = (err / T::from_count(N)).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationBlowup {
                at: x.to_f64_lossy(),
            });
        }

        if err <= T::one() {
            x = if last { x1 } else { x + hs };
            y = y_new;
            *h_guess = step;
            if last {
                return Ok(y);
            }
        }
        // standard controller with safety factor 0.9, growth clamped to [0.2, 5]
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2)))
                .max(T::lit(0.2))
                .min(T::lit(5.0))
        };
        h = (step * factor).max(min_step);
    }
    Err(Error::Consistency(
        "ODE integrator exceeded its step budget".into(),
    ))
}
