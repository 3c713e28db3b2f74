//! Small descriptive statistics shared across modules.
//!
//! Standard deviations use the population convention (divide by the count)
//! throughout the crate.

use crate::num::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / T::from_count(xs.len())
}

/// Population variance (divides by `n`).
pub fn variance<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m)) / T::from_count(xs.len())
}

/// Population standard deviation (divides by `n`).
pub fn std_dev<T: Real>(xs: &[T]) -> T {
    variance(xs).sqrt()
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    assert_eq!(a.len(), b.len(), "pearson: length mismatch");
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return None;
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Ranks starting at 1, ties receive their average rank.
pub fn ranks<T: Real>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("ranks: NaN input"));
    let mut out = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = T::from_count(i + j + 2) / T::lit(2.0);
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    pearson(&ranks(a), &ranks(b))
}

/// Percentile with linear interpolation between order statistics, `q ∈ [0, 1]`.
pub fn percentile<T: Real>(xs: &[T], q: T) -> T {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("percentile: NaN input"));
    percentile_sorted(&sorted, q)
}

pub(crate) fn percentile_sorted<T: Real>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * T::from_count(n - 1);
    let lo = pos.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = pos - T::from_count(lo);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Kolmogorov-Smirnov distance sup |F_n(x) - F(x)| between a sample and a CDF.
pub fn ks_distance<T: Real, F: Fn(T) -> T>(sample: &[T], cdf: F) -> T {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("ks_distance: NaN input"));
    let n = T::from_count(sorted.len());
    let mut d = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = T::from_count(i) / n;
        let above = T::from_count(i + 1) / n;
        d = d.max((f - below).abs()).max((above - f).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn population_std() {
        assert_relative_eq!(
            std_dev(&[0.5_f64, 0.6, 0.7]),
            0.081_649_658_092_772_6,
            epsilon = 1e-12
        );
        assert_eq!(std_dev(&[2.0_f64; 4]), 0.0);
    }

    #[test]
    fn ranks_average_ties() {
        let r = ranks(&[3.0_f64, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_monotone_transform() {
        let a = [1.0_f64, 2.0, 3.0, 4.0, 5.0];
        let b: Vec<f64> = a.iter().map(|x| x * x * x).collect();
        assert_relative_eq!(spearman(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
        let c: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_relative_eq!(spearman(&a, &c).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn percentile_linear_interpolation() {
        let xs = [1.0_f64, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&xs, 0.0), 1.0);
        assert_eq!(percentile(&xs, 1.0), 4.0);
        assert_relative_eq!(percentile(&xs, 0.5), 2.5);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert_relative_eq!(ks_distance(&xs, |x| x), 0.05, epsilon = 1e-12);
    }
}
