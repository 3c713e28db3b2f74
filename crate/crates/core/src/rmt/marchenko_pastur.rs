use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::Real;

/// Marchenko-Pastur law for the eigenvalues of `XᵀX / n`, `X` an `n × p`
/// standard Gaussian matrix with `n ≥ p`.
///
/// `gamma = n / p ≥ 1`. The spectral edges use the reciprocal ratio
/// `p / n ≤ 1`, giving `0 ≤ a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpParams<T> {
    pub gamma: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> MpParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma >= T::one()) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "Marchenko-Pastur ratio n/p must be finite and >= 1, got {gamma}"
            )));
        }
        let root = gamma.recip().sqrt();
        Ok(Self {
            gamma,
            a: (T::one() - root).powi(2),
            b: (T::one() + root).powi(2),
        })
    }

    /// Parameters for an `n × p` data matrix; the larger dimension plays `n`.
    pub fn from_dims(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::domain(
                "Marchenko-Pastur dimensions must be positive",
            ));
        }
        let (n, p) = if n >= p { (n, p) } else { (p, n) };
        Self::new(T::from_count(n) / T::from_count(p))
    }

    /// `p / n`, the aspect ratio that enters the edges.
    pub fn inverse_ratio(&self) -> T {
        self.gamma.recip()
    }
}

/// Limiting spectral density `g(t) = γ/(2πt) · √((b − t)(t − a))` on `[a, b]`,
/// zero elsewhere (including `t = 0`).
pub fn mp_density<T: Real>(t: T, params: &MpParams<T>) -> T {
    if t <= T::zero() || t < params.a || t > params.b {
        return T::zero();
    }
    let radicand = (params.b - t) * (t - params.a);
    if radicand <= T::zero() {
        return T::zero();
    }
    params.gamma / (T::lit(2.0 * PI) * t) * radicand.sqrt()
}

const MP_PANELS: usize = 2000;

/// `∫_lo^hi g(t) dt`, computed in the angle `t = a + (b − a)(1 − cos φ)/2`
/// so the square-root edges (and the `1/√t` pole when `a = 0`) become smooth.
pub fn mp_integral<T: Real>(lo: T, hi: T, params: &MpParams<T>) -> T {
    let lo = lo.max(params.a);
    let hi = hi.min(params.b);
    if hi <= lo {
        return T::zero();
    }
    let width = params.b - params.a;
    let angle = |t: T| {
        let c = (T::one() - T::lit(2.0) * (t - params.a) / width)
            .max(-T::one())
            .min(T::one());
        c.acos()
    };
    let half = width / T::lit(2.0);
    let integrand = |phi: T| {
        let t = params.a + half * (T::one() - phi.cos());
        let s = phi.sin();
        if t <= T::zero() {
            // a = 0, φ → 0: sin²φ / t → 2 / half
            return params.gamma / T::lit(2.0 * PI) * half * half * T::lit(2.0) / half;
        }
        params.gamma / (T::lit(2.0 * PI) * t) * half * half * s * s
    };
    simpson(integrand, angle(lo), angle(hi), MP_PANELS)
}

fn simpson<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, panels: usize) -> T {
    let n = panels + panels % 2;
    let h = (hi - lo) / T::from_count(n);
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc = acc + w * f(lo + h * T::from_count(i));
    }
    acc * h / T::lit(3.0)
}
