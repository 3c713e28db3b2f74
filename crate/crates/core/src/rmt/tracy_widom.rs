//! Tabulated Tracy-Widom F1 distribution.
//!
//! The Hastings-McLeod solution of Painlevé II, `q'' = s q + 2 q³` with
//! `q(s) ~ Ai(s)` as `s → ∞`, is integrated once from `s_max` down to
//! `s_min`. F1 then follows from
//!
//! ```text
//! F1(s) = exp(-½ ∫_s^∞ [q(x) + (x − s) q(x)²] dx)
//! ```
//!
//! evaluated with cumulative Simpson quadrature on the same grid.
//!
//! The backward shot along the Hastings-McLeod separatrix loses accuracy
//! exponentially; left of `s = -7` the table switches to the asymptotic
//! series `q(s) = √(−s/2) (1 + s⁻³/8 − 73 s⁻⁶/128 + 10657 s⁻⁹/1024)`, which
//! is accurate to better than 1e-7 there.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::ode::{self, Tolerance};
use crate::special::{airy_ai_asymptotic, airy_ai_prime_asymptotic};

pub const DEFAULT_S_MIN: f64 = -10.0;
pub const DEFAULT_S_MAX: f64 = 8.0;
pub const DEFAULT_STEP: f64 = 0.005;

/// Smallest right endpoint at which the Airy expansion is trusted.
const MIN_S_MAX: f64 = 6.0;
const ODE_TOL: f64 = 1e-14;
/// Below this point the shot is replaced by the s → −∞ expansion of q; the
/// separatrix is too unstable to follow further in double precision.
const HM_JOIN: f64 = -7.0;
/// Allowed relative mismatch between the shot and the expansion at the join.
const HM_JOIN_TOL: f64 = 1e-4;
const AIRY_MATCH_TOL: f64 = 1e-3;
const MONOTONE_TOL: f64 = 1e-9;

/// Immutable grid of `(s, q(s), F1(s))`, ascending in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwTable<T> {
    pub grid: Vec<T>,
    pub q: Vec<T>,
    pub f1: Vec<T>,
    pub s_min: T,
    pub s_max: T,
}

impl<T: Real> TwTable<T> {
    /// Table over the default window `[-10, 8]` with step `0.005`.
    pub fn standard() -> Result<Self> {
        build_tw_table(
            T::lit(DEFAULT_S_MIN),
            T::lit(DEFAULT_S_MAX),
            T::lit(DEFAULT_STEP),
        )
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn cdf(&self, s: T) -> T {
        tw_cdf(s, self)
    }

    pub fn quantile(&self, prob: T) -> Result<T> {
        tw_quantile(prob, self)
    }
}

/// Asymptotic expansion of the Hastings-McLeod solution as `s → −∞`.
fn hastings_mcleod_left<T: Real>(s: T) -> T {
    let inv3 = s.powi(-3);
    let series = T::one() + inv3 / T::lit(8.0) - T::lit(73.0 / 128.0) * inv3 * inv3
        + T::lit(10657.0 / 1024.0) * inv3 * inv3 * inv3;
    (-s / T::lit(2.0)).sqrt() * series
}

/// Hastings-McLeod `q` must stay positive and below the blow-up envelope;
/// leaving either bound means the backward shot fell off the separatrix.
fn on_branch<T: Real>(s: T, q: T) -> bool {
    let envelope = T::lit(2.0) * (s.abs() / T::lit(2.0)).sqrt() + T::one();
    q.is_finite() && q > T::zero() && q < envelope
}

/// Integrates Painlevé II and tabulates F1 on `[s_min, s_max]`.
///
/// `step` is shrunk slightly if needed so that the grid lands on both ends.
pub fn build_tw_table<T: Real>(s_min: T, s_max: T, step: T) -> Result<TwTable<T>> {
    if !(s_min < s_max) || !s_min.is_finite() || !s_max.is_finite() {
        return Err(Error::domain(format!(
            "need finite s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    if !(step > T::zero()) {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    if s_max < T::lit(MIN_S_MAX) {
        return Err(Error::domain(format!(
            "s_max = {s_max} is outside the Airy asymptotic regime; use s_max >= {MIN_S_MAX}"
        )));
    }

    let intervals = ((s_max - s_min) / step)
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::domain("grid too large"))?
        .max(1);
    let h = (s_max - s_min) / T::from_count(intervals);
    let half = h / T::lit(2.0);

    // Fine nodes at half steps, walking left from s_max: fine[j] = q(s_max − j h/2).
    let fine_len = 2 * intervals + 1;
    let mut fine = Vec::with_capacity(fine_len);
    let painleve = |s: T, y: &[T; 2]| [y[1], s * y[0] + T::lit(2.0) * y[0] * y[0] * y[0]];
    let mut state = [airy_ai_asymptotic(s_max), airy_ai_prime_asymptotic(s_max)];
    // q(s_max) is tiny (≈ 5e-8 at s = 8), so the absolute tolerance is taken
    // relative to it; a flat 1e-10 would permit percent-level error on the
    // right where the separatrix is set.
    let rel = T::lit(ODE_TOL).max(T::epsilon() * T::lit(16.0));
    let tol = Tolerance {
        abs: rel * state[0].abs().max(T::min_positive_value()),
        rel,
    };
    let mut h_guess = half;
    fine.push(state[0]);
    let join = T::lit(HM_JOIN);
    let mut s = s_max;
    for j in 1..fine_len {
        let next = s_max - half * T::from_count(j);
        if next < join && s >= join {
            let expected = hastings_mcleod_left(s);
            let mismatch = (state[0] / expected - T::one()).abs();
            if !(mismatch < T::lit(HM_JOIN_TOL)) {
                return Err(Error::IntegrationBlowup {
                    at: s.to_f64_lossy(),
                });
            }
        }
        if next < join {
            fine.push(hastings_mcleod_left(next));
            s = next;
            continue;
        }
        state =
            ode::integrate(&painleve, s, next, state, tol, &mut h_guess).map_err(|e| match e {
                Error::IntegrationBlowup { .. } => Error::IntegrationBlowup {
                    at: next.to_f64_lossy(),
                },
                other => other,
            })?;
        if !on_branch(next, state[0]) {
            return Err(Error::IntegrationBlowup {
                at: next.to_f64_lossy(),
            });
        }
        fine.push(state[0]);
        s = next;
    }

    let airy_ratio = fine[0] / airy_ai_asymptotic(s_max);
    if (airy_ratio - T::one()).abs() >= T::lit(AIRY_MATCH_TOL) {
        return Err(Error::Consistency(format!(
            "q(s_max)/Ai(s_max) = {airy_ratio}, expected 1"
        )));
    }

    // Cumulative integrals from each grid node up to s_max (Simpson per interval
    // using the midpoint node), plus the Airy tail beyond s_max for ∫ q:
    //   A(s) = ∫ q,  B(s) = ∫ x q²,  C(s) = ∫ q²,
    //   ∫_s^∞ q + (x − s) q² = A + B − s C.
    let tail_q = airy_ai_asymptotic(s_max) / s_max.sqrt();
    let node = |i: usize| s_max - h * T::from_count(i);
    let mut a = vec![T::zero(); intervals + 1];
    let mut b = vec![T::zero(); intervals + 1];
    let mut c = vec![T::zero(); intervals + 1];
    a[0] = tail_q;
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    for i in 0..intervals {
        let (qr, qm, ql) = (fine[2 * i], fine[2 * i + 1], fine[2 * i + 2]);
        let (sr, sl) = (node(i), node(i + 1));
        let sm = sr - half;
        a[i + 1] = a[i] + h / six * (qr + four * qm + ql);
        b[i + 1] = b[i] + h / six * (sr * qr * qr + four * sm * qm * qm + sl * ql * ql);
        c[i + 1] = c[i] + h / six * (qr * qr + four * qm * qm + ql * ql);
    }

    let mut grid = Vec::with_capacity(intervals + 1);
    let mut q = Vec::with_capacity(intervals + 1);
    let mut f1 = Vec::with_capacity(intervals + 1);
    for i in (0..=intervals).rev() {
        let s = if i == intervals { s_min } else { node(i) };
        let exponent = a[i] + b[i] - s * c[i];
        grid.push(s);
        q.push(fine[2 * i]);
        f1.push((-exponent / T::lit(2.0)).exp().min(T::one()));
    }

    // Remove round-off level non-monotonicity; anything larger is a bug.
    for i in 1..f1.len() {
        if f1[i] < f1[i - 1] {
            if f1[i - 1] - f1[i] > T::lit(MONOTONE_TOL) {
                return Err(Error::Consistency(format!(
                    "F1 decreases by {} at s = {}",
                    f1[i - 1] - f1[i],
                    grid[i]
                )));
            }
            f1[i] = f1[i - 1];
        }
    }

    Ok(TwTable {
        grid,
        q,
        f1,
        s_min,
        s_max,
    })
}

/// Linear interpolation of F1 from the table, clamped to 0 below `s_min` and
/// 1 above `s_max`.
pub fn tw_cdf<T: Real>(s: T, table: &TwTable<T>) -> T {
    if s.is_nan() {
        return T::nan();
    }
    if s < table.s_min {
        return T::zero();
    }
    if s > table.s_max {
        return T::one();
    }
    let idx = table.grid.partition_point(|&g| g <= s);
    if idx == 0 {
        return table.f1[0];
    }
    if idx >= table.grid.len() {
        return *table.f1.last().expect("non-empty table");
    }
    let (s0, s1) = (table.grid[idx - 1], table.grid[idx]);
    let (f0, f1) = (table.f1[idx - 1], table.f1[idx]);
    let w = (s - s0) / (s1 - s0);
    f0 + (f1 - f0) * w
}

/// Inverse of [`tw_cdf`] on the tabulated window.
pub fn tw_quantile<T: Real>(prob: T, table: &TwTable<T>) -> Result<T> {
    if !(prob > T::zero() && prob < T::one()) {
        return Err(Error::domain(format!(
            "quantile probability must lie in (0, 1), got {prob}"
        )));
    }
    let f = &table.f1;
    if prob <= f[0] {
        return Ok(table.s_min);
    }
    if prob >= *f.last().expect("non-empty table") {
        return Ok(table.s_max);
    }
    let idx = f.partition_point(|&v| v < prob);
    let (f0, f1) = (f[idx - 1], f[idx]);
    let (s0, s1) = (table.grid[idx - 1], table.grid[idx]);
    if f1 == f0 {
        return Ok(s0);
    }
    Ok(s0 + (s1 - s0) * (prob - f0) / (f1 - f0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn table() -> &'static TwTable<f64> {
        static TABLE: OnceLock<TwTable<f64>> = OnceLock::new();
        TABLE.get_or_init(|| TwTable::standard().expect("default table builds"))
    }

    #[test]
    fn rules_of_thumb() {
        let t = table();
        assert!(
            (tw_cdf(0.0, t) - 0.83).abs() < 0.01,
            "F1(0) = {}",
            tw_cdf(0.0, t)
        );
        assert!(
            (tw_cdf(1.0, t) - 0.95).abs() < 0.01,
            "F1(1) = {}",
            tw_cdf(1.0, t)
        );
        assert!(
            (tw_cdf(2.0, t) - 0.99).abs() < 0.005,
            "F1(2) = {}",
            tw_cdf(2.0, t)
        );
    }

    #[test]
    fn left_tail_and_clamping() {
        let t = table();
        assert!(t.f1[0] < 1e-6);
        assert_eq!(tw_cdf(-10.5, t), 0.0);
        assert_eq!(tw_cdf(9.0, t), 1.0);
        assert!(tw_cdf(-10.0, t) < 1e-6);
    }

    #[test]
    fn grid_invariants() {
        let t = table();
        assert_eq!(t.grid.len(), 3601);
        assert_eq!(t.grid[0], -10.0);
        assert_eq!(*t.grid.last().unwrap(), 8.0);
        assert!(t.q.iter().all(|&q| q > 0.0));
        assert!(t.f1.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.f1.iter().all(|&f| (0.0..=1.0).contains(&f)));
        let ratio = t.q.last().unwrap() / airy_ai_asymptotic(8.0);
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn hastings_mcleod_left_asymptotics() {
        // q(s) ~ √(−s/2) as s → −∞
        let t = table();
        let q = t.q[0];
        assert!((q / 5.0_f64.sqrt() - 1.0).abs() < 0.02, "q(-10) = {q}");
    }

    #[test]
    fn interpolation_between_nodes() {
        let t = table();
        let i = 2000;
        let mid = (t.grid[i] + t.grid[i + 1]) / 2.0;
        let v = tw_cdf(mid, t);
        assert!(v >= t.f1[i] && v <= t.f1[i + 1]);
    }

    #[test]
    fn quantiles() {
        let t = table();
        assert!(tw_quantile(0.83, t).unwrap().abs() < 0.05);
        let p1 = tw_cdf(1.0, t);
        assert!((tw_quantile(p1, t).unwrap() - 1.0).abs() < 1e-6);
        let median = tw_quantile(0.5, t).unwrap();
        assert!(median > t.s_min && median < t.s_max);
        for &p in &[0.05, 0.5, 0.83, 0.95, 0.99] {
            let s = tw_quantile(p, t).unwrap();
            assert!((tw_cdf(s, t) - p).abs() < 1e-4);
        }
        assert!(tw_quantile(0.0, t).is_err());
        assert!(tw_quantile(1.0, t).is_err());
    }

    #[test]
    fn argument_checks() {
        assert!(build_tw_table(2.0_f64, 1.0, 0.01).is_err());
        assert!(build_tw_table(-5.0_f64, 5.0, 0.01).is_err());
        assert!(build_tw_table(-5.0_f64, 8.0, 0.0).is_err());
    }

    #[test]
    fn coarse_table_agrees() {
        let coarse = build_tw_table(-8.0_f64, 8.0, 0.05).unwrap();
        for &s in &[-3.0, -1.0, 0.0, 1.0, 2.0] {
            assert!((tw_cdf(s, &coarse) - tw_cdf(s, table())).abs() < 1e-4);
        }
    }
}
