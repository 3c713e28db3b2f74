//! Rolling-window σ_λ indicator.
//!
//! For every window of `w` observations ending at `k`, both the effect `y`
//! and each cause candidate `x` are standardized. For each lag `i` in
//! `0..=max_lag`, `x` is shifted forward by `i` against the original window
//! (shifts do not accumulate), the non-overlapping head is dropped, and the
//! explanatory power `λ₁/(λ₁+λ₂)` of the 2×2 correlation matrix of the
//! overlap is recorded. σ_λ is the population standard deviation of those
//! values over the configured lag set (lags `1..=max_lag` by default).
//!
//! A window in which a series (or a shifted overlap) has zero variance yields
//! a gap, never a zero.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::panel::TimeSeriesPanel;
use crate::stats;

/// Which lags enter the standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LagSet {
    /// Lags `1..=max_lag`.
    #[default]
    ExcludeZero,
    /// Lags `0..=max_lag`.
    IncludeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    window: usize,
    max_lag: usize,
    lag_set: LagSet,
}

impl WindowSpec {
    pub fn new(window: usize, max_lag: usize) -> Result<Self> {
        Self::with_lag_set(window, max_lag, LagSet::default())
    }

    pub fn with_lag_set(window: usize, max_lag: usize, lag_set: LagSet) -> Result<Self> {
        if window < 4 {
            return Err(Error::domain(format!("window must be >= 4, got {window}")));
        }
        if max_lag < 1 {
            return Err(Error::domain("max_lag must be >= 1"));
        }
        if window <= max_lag + 2 {
            return Err(Error::domain(format!(
                "window {window} too short for max_lag {max_lag} (need window > max_lag + 2)"
            )));
        }
        let spec = Self {
            window,
            max_lag,
            lag_set,
        };
        if spec.std_lags().count() < 2 {
            return Err(Error::domain(
                "lag set for the standard deviation needs at least 2 lags",
            ));
        }
        Ok(spec)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn lag_set(&self) -> LagSet {
        self.lag_set
    }

    /// Lags that enter σ_λ.
    pub fn std_lags(&self) -> std::ops::RangeInclusive<usize> {
        match self.lag_set {
            LagSet::ExcludeZero => 1..=self.max_lag,
            LagSet::IncludeZero => 0..=self.max_lag,
        }
    }
}

/// Explanatory power per lag; `values[i]` belongs to lag `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagProfile<T> {
    pub values: Vec<T>,
}

impl<T: Real> LagProfile<T> {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Lag with the largest explanatory power (first one on ties).
    pub fn argmax(&self) -> usize {
        argmax(&self.values)
    }
}

pub(crate) fn argmax<T: Real>(values: &[T]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// σ_λ for every window end and cause candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries<T> {
    pub effect: String,
    pub causes: Vec<String>,
    /// Window end times.
    pub timestamps: Vec<NaiveDate>,
    /// `sigma_lambda[k][j]`: window `k`, cause `j`; `None` marks a gap.
    pub sigma_lambda: Vec<Vec<Option<T>>>,
}

impl<T: Real> IndicatorSeries<T> {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// σ_λ over time for cause `j`, gaps included.
    pub fn column(&self, j: usize) -> Vec<Option<T>> {
        self.sigma_lambda.iter().map(|row| row[j]).collect()
    }

    /// Mean over non-gap windows for cause `j`.
    pub fn column_mean(&self, j: usize) -> Option<T> {
        let vals: Vec<T> = self.column(j).into_iter().flatten().collect();
        if vals.is_empty() {
            None
        } else {
            Some(stats::mean(&vals))
        }
    }
}

/// Population z-scores of a window.
pub fn standardize_window<T: Real>(segment: &[T]) -> Result<Vec<T>> {
    if segment.len() < 2 {
        return Err(Error::domain("standardization needs at least 2 points"));
    }
    let m = stats::mean(segment);
    let sd = stats::std_dev(segment);
    let scale = segment.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if !(sd > T::epsilon() * scale) {
        return Err(Error::DegenerateWindow {
            what: "window".into(),
        });
    }
    Ok(segment.iter().map(|&v| (v - m) / sd).collect())
}

/// Correlation between `y[lag..]` and `x[..len − lag]`, i.e. `x` leading `y`
/// by `lag` steps. Both overlaps are re-standardized.
pub fn lagged_correlation<T: Real>(y: &[T], x: &[T], lag: usize) -> Result<T> {
    if y.len() != x.len() {
        return Err(Error::domain(format!(
            "series lengths differ ({} vs {})",
            y.len(),
            x.len()
        )));
    }
    let overlap = y.len().saturating_sub(lag);
    if overlap < 3 {
        return Err(Error::InsufficientOverlap { overlap });
    }
    let ys = standardize_window(&y[lag..]).map_err(|_| Error::DegenerateWindow {
        what: format!("effect overlap at lag {lag}"),
    })?;
    let xs = standardize_window(&x[..overlap]).map_err(|_| Error::DegenerateWindow {
        what: format!("cause overlap at lag {lag}"),
    })?;
    let dot = ys
        .iter()
        .zip(&xs)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    let rho = dot / T::from_count(overlap);
    Ok(rho.max(-T::one()).min(T::one()))
}

/// Eigenvalues `(λ₁ ≥ λ₂)` of the symmetric matrix `[[a, b], [b, d]]`.
pub fn symmetric_2x2_eigenvalues<T: Real>(a: T, b: T, d: T) -> (T, T) {
    let two = T::lit(2.0);
    let centre = (a + d) / two;
    let radius = ((a - d) / two).hypot(b);
    (centre + radius, centre - radius)
}

/// `λ₁ / (λ₁ + λ₂)` for the correlation matrix `[[1, ρ], [ρ, 1]]`.
pub fn explanatory_power<T: Real>(rho: T) -> Result<T> {
    if !(rho.abs() <= T::one() + T::lit(1e-12)) {
        return Err(Error::domain(format!("correlation {rho} outside [-1, 1]")));
    }
    let rho = rho.max(-T::one()).min(T::one());
    let (l1, l2) = symmetric_2x2_eigenvalues(T::one(), rho, T::one());
    Ok(l1 / (l1 + l2))
}

/// Explanatory power at lags `0..=max_lag` for one pair of windows.
pub fn lag_profile<T: Real>(y: &[T], x: &[T], spec: &WindowSpec) -> Result<LagProfile<T>> {
    let values = (0..=spec.max_lag())
        .map(|lag| explanatory_power(lagged_correlation(y, x, lag)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(LagProfile { values })
}

/// Population standard deviation of the profile over the spec's lag set.
pub fn sigma_lambda<T: Real>(profile: &LagProfile<T>, spec: &WindowSpec) -> Result<T> {
    let lags = spec.std_lags();
    if *lags.end() >= profile.values.len() {
        return Err(Error::domain(format!(
            "profile covers lags 0..={} but the lag set needs {}",
            profile.max_lag(),
            lags.end()
        )));
    }
    let selected = &profile.values[*lags.start()..=*lags.end()];
    if selected.len() < 2 {
        return Err(Error::domain("lag set smaller than 2"));
    }
    Ok(stats::std_dev(selected))
}

fn is_gap(err: &Error) -> bool {
    matches!(err, Error::DegenerateWindow { .. })
}

fn check_lengths(rows: usize, spec: &WindowSpec) -> Result<()> {
    if rows <= spec.window() {
        return Err(Error::InsufficientData {
            rows,
            needed: spec.window(),
        });
    }
    Ok(())
}

fn window_profile<T: Real>(y: &[T], x: &[T], spec: &WindowSpec) -> Result<Option<LagProfile<T>>> {
    let ys = match standardize_window(y) {
        Ok(v) => v,
        Err(e) if is_gap(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let xs = match standardize_window(x) {
        Ok(v) => v,
        Err(e) if is_gap(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    match lag_profile(&ys, &xs, spec) {
        Ok(p) => Ok(Some(p)),
        Err(e) if is_gap(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Lag profiles of one cause against the effect for every window end
/// `k = w−1 … T−1`; `None` marks a degenerate window.
pub fn lag_profiles<T: Real>(
    panel: &TimeSeriesPanel<T>,
    effect: &str,
    cause: &str,
    spec: &WindowSpec,
) -> Result<Vec<Option<LagProfile<T>>>> {
    let y = panel.column(effect)?;
    let x = panel.column(cause)?;
    check_lengths(panel.len(), spec)?;
    let w = spec.window();
    (w - 1..panel.len())
        .into_par_iter()
        .map(|k| window_profile(&y[k + 1 - w..=k], &x[k + 1 - w..=k], spec))
        .collect()
}

/// Per-lag mean of the non-gap profiles, or `None` if every window is a gap.
pub fn average_profile<T: Real>(profiles: &[Option<LagProfile<T>>]) -> Option<LagProfile<T>> {
    let present: Vec<&LagProfile<T>> = profiles.iter().flatten().collect();
    let first = present.first()?;
    let count = T::from_count(present.len());
    let values = (0..first.values.len())
        .map(|i| present.iter().fold(T::zero(), |acc, p| acc + p.values[i]) / count)
        .collect();
    Some(LagProfile { values })
}

/// σ_λ series of every cause candidate against `effect`.
pub fn indicator_series<T: Real>(
    panel: &TimeSeriesPanel<T>,
    effect: &str,
    causes: &[String],
    spec: &WindowSpec,
) -> Result<IndicatorSeries<T>> {
    let y = panel.column(effect)?;
    let xs = causes
        .iter()
        .map(|c| panel.column(c))
        .collect::<Result<Vec<_>>>()?;
    check_lengths(panel.len(), spec)?;
    let w = spec.window();

    let sigma_lambda = (w - 1..panel.len())
        .into_par_iter()
        .map(|k| {
            let range = k + 1 - w..=k;
            xs.iter()
                .map(|x| {
                    window_profile(&y[range.clone()], &x[range.clone()], spec)?
                        .map(|p| sigma_lambda(&p, spec))
                        .transpose()
                })
                .collect::<Result<Vec<Option<T>>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IndicatorSeries {
        effect: effect.to_string(),
        causes: causes.to_vec(),
        timestamps: panel.timestamps()[w - 1..].to_vec(),
        sigma_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::daily_index;
    use crate::rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
    }

    #[test]
    fn standardize_examples() {
        let z = standardize_window(&[1.0_f64, 2.0, 3.0]).unwrap();
        let e = 1.5_f64.sqrt();
        assert_relative_eq!(z[0], -e, epsilon = 1e-12);
        assert_relative_eq!(z[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(z[2], e, epsilon = 1e-12);
        assert!(matches!(
            standardize_window(&[5.0_f64, 5.0, 5.0]),
            Err(Error::DegenerateWindow { .. })
        ));
        let again = standardize_window(&z).unwrap();
        for (a, b) in z.iter().zip(&again) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(standardize_window(&[1.0_f64]).is_err());
    }

    #[test]
    fn lagged_correlation_examples() {
        let x: Vec<f64> = rng::normals(&mut rng::stream(1, 0), 60);
        assert_relative_eq!(lagged_correlation(&x, &x, 0).unwrap(), 1.0, epsilon = 1e-12);
        let mut y = vec![0.3, -0.7];
        y.extend_from_slice(&x[..58]);
        assert_relative_eq!(lagged_correlation(&y, &x, 2).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            lagged_correlation(&x[..5], &x[..5], 3),
            Err(Error::InsufficientOverlap { overlap: 2 })
        ));
        assert!(lagged_correlation(&x[..5], &x[..4], 0).is_err());
    }

    #[test]
    fn lagged_correlation_independent_is_small() {
        let mut hits = 0;
        for seed in 0..100 {
            let x: Vec<f64> = rng::normals(&mut rng::stream(seed, 0), 60);
            let y: Vec<f64> = rng::normals(&mut rng::stream(seed, 1), 60);
            if lagged_correlation(&y, &x, 1).unwrap().abs() < 0.2 {
                hits += 1;
            }
        }
        // |ρ| has sd ≈ 1/√59 ≈ 0.13; P(|ρ| < 0.2) ≈ 0.87
        assert!(hits >= 75, "{hits}");
    }

    #[test]
    fn explanatory_power_examples() {
        assert_relative_eq!(explanatory_power(0.0_f64).unwrap(), 0.5);
        assert_relative_eq!(explanatory_power(1.0_f64).unwrap(), 1.0);
        assert_relative_eq!(explanatory_power(-0.6_f64).unwrap(), 0.8, epsilon = 1e-15);
        assert!(explanatory_power(1.1_f64).is_err());
        assert!(explanatory_power(f64::NAN).is_err());
        assert_relative_eq!(explanatory_power(-0.6_f32).unwrap(), 0.8, epsilon = 1e-6);
    }

    #[test]
    fn sigma_lambda_examples() {
        let spec = WindowSpec::new(10, 3).unwrap();
        let flat = LagProfile {
            values: vec![0.9, 0.5, 0.5, 0.5],
        };
        assert_eq!(sigma_lambda(&flat, &spec).unwrap(), 0.0);
        let ramp = LagProfile {
            values: vec![0.9, 0.5, 0.6, 0.7],
        };
        assert_relative_eq!(
            sigma_lambda(&ramp, &spec).unwrap(),
            0.081_649_658,
            epsilon = 1e-8
        );
        let with_zero = WindowSpec::with_lag_set(10, 3, LagSet::IncludeZero).unwrap();
        assert!(sigma_lambda(&flat, &with_zero).unwrap() > 0.0);
        let short = LagProfile {
            values: vec![0.5, 0.6],
        };
        assert!(sigma_lambda(&short, &spec).is_err());
    }

    #[test]
    fn window_spec_checks() {
        assert!(WindowSpec::new(3, 1).is_err());
        assert!(WindowSpec::new(60, 0).is_err());
        assert!(WindowSpec::new(7, 5).is_err());
        assert!(WindowSpec::new(8, 5).is_ok());
        // {1} alone is too small for a standard deviation
        assert!(WindowSpec::new(60, 1).is_err());
        assert!(WindowSpec::with_lag_set(60, 1, LagSet::IncludeZero).is_ok());
    }

    #[test]
    fn identical_series_profile() {
        // AR(1) so neighbouring lags are correlated but not perfectly
        let e: Vec<f64> = rng::normals(&mut rng::stream(3, 0), 80);
        let mut x = vec![0.0; 80];
        for t in 1..80 {
            x[t] = 0.6 * x[t - 1] + e[t];
        }
        let spec = WindowSpec::new(80, 4).unwrap();
        let p = lag_profile(&x, &x, &spec).unwrap();
        assert_relative_eq!(p.values[0], 1.0, epsilon = 1e-12);
        assert!(p.values[1..].iter().all(|&v| (0.5..1.0).contains(&v)));
    }

    #[test]
    fn lagged_copy_recovers_lag() {
        let n = 60;
        let x: Vec<f64> = rng::normals(&mut rng::stream(9, 0), n);
        let e: Vec<f64> = rng::normals(&mut rng::stream(9, 1), n);
        let y: Vec<f64> = (0..n)
            .map(|t| if t >= 2 { x[t - 2] + 0.1 * e[t] } else { e[t] })
            .collect();
        let spec = WindowSpec::new(n, 5).unwrap();
        let p = lag_profile(&y, &x, &spec).unwrap();
        assert_eq!(p.argmax(), 2);
    }

    #[test]
    fn independent_profile_near_half() {
        let spec = WindowSpec::new(60, 5).unwrap();
        let mut total = 0.0;
        for seed in 0..100 {
            let x: Vec<f64> = rng::normals(&mut rng::stream(seed, 0), 60);
            let y: Vec<f64> = rng::normals(&mut rng::stream(seed, 1), 60);
            let p = lag_profile(&y, &x, &spec).unwrap();
            total += stats::mean(&p.values);
        }
        let m = total / 100.0;
        assert!((0.5..0.65).contains(&m), "{m}");
    }

    fn panel(cols: Vec<Vec<f64>>) -> TimeSeriesPanel<f64> {
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        TimeSeriesPanel::new(daily_index(start(), cols[0].len()), names, cols).unwrap()
    }

    #[test]
    fn series_matches_single_window_composition() {
        let y: Vec<f64> = rng::normals(&mut rng::stream(5, 0), 30);
        let x: Vec<f64> = rng::normals(&mut rng::stream(5, 1), 30);
        let p = panel(vec![y.clone(), x.clone()]);
        let spec = WindowSpec::new(20, 3).unwrap();
        let s = indicator_series(&p, "c0", &["c1".to_string()], &spec).unwrap();
        assert_eq!(s.len(), 11);
        assert_eq!(s.timestamps[0], p.timestamps()[19]);
        let k = 25;
        let ys = standardize_window(&y[k - 19..=k]).unwrap();
        let xs = standardize_window(&x[k - 19..=k]).unwrap();
        let direct = sigma_lambda(&lag_profile(&ys, &xs, &spec).unwrap(), &spec).unwrap();
        assert_eq!(s.sigma_lambda[k - 19][0], Some(direct));
    }

    #[test]
    fn degenerate_windows_are_gaps() {
        let mut x: Vec<f64> = rng::normals(&mut rng::stream(6, 0), 40);
        let y: Vec<f64> = rng::normals(&mut rng::stream(6, 1), 40);
        for v in &mut x[..12] {
            *v = 1.0;
        }
        let p = panel(vec![y, x]);
        let spec = WindowSpec::new(10, 2).unwrap();
        let s = indicator_series(&p, "c0", &["c1".to_string()], &spec).unwrap();
        assert_eq!(s.sigma_lambda[0][0], None);
        assert_eq!(s.sigma_lambda[2][0], None);
        assert!(s.sigma_lambda.last().unwrap()[0].is_some());
    }

    #[test]
    fn series_errors() {
        let p = panel(vec![
            vec![1.0, 2.0, 3.0, 5.0, 4.0, 6.0],
            vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0],
        ]);
        let spec = WindowSpec::new(6, 2).unwrap();
        assert!(matches!(
            indicator_series(&p, "c0", &["c1".to_string()], &spec),
            Err(Error::InsufficientData { .. })
        ));
        let spec = WindowSpec::new(5, 2).unwrap();
        assert!(matches!(
            indicator_series(&p, "nope", &["c1".to_string()], &spec),
            Err(Error::UnknownColumn(_))
        ));
        assert!(matches!(
            indicator_series(&p, "c0", &["nope".to_string()], &spec),
            Err(Error::UnknownColumn(_))
        ));
    }

    proptest! {
        #[test]
        fn closed_form_matches_eigen_path(rho in -1.0_f64..=1.0) {
            let ev = explanatory_power(rho).unwrap();
            prop_assert!((ev - (1.0 + rho.abs()) / 2.0).abs() < 1e-12);
            prop_assert!((0.5..=1.0).contains(&ev));
        }

        #[test]
        fn profile_invariances(seed in 0u64..500, scale in 0.01_f64..100.0) {
            let x: Vec<f64> = rng::normals(&mut rng::stream(seed, 0), 30);
            let y: Vec<f64> = rng::normals(&mut rng::stream(seed, 1), 30);
            let spec = WindowSpec::new(30, 4).unwrap();
            let base = lag_profile(&y, &x, &spec).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * scale).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let scaled = lag_profile(&ys, &xs, &spec).unwrap();
            let negated = lag_profile(&y, &neg, &spec).unwrap();
            for i in 0..=4 {
                prop_assert!((base.values[i] - scaled.values[i]).abs() < 1e-10);
                prop_assert!((base.values[i] - negated.values[i]).abs() < 1e-12);
                prop_assert!(base.values[i] >= 0.5 && base.values[i] <= 1.0);
            }
            let s = sigma_lambda(&base, &spec).unwrap();
            prop_assert!((0.0..=0.25).contains(&s));
        }
    }
}
