//! Single-equation Granger causality F-test.
//!
//! Restricted model: `y_t` on an intercept and `y_{t−1..t−L}`. Unrestricted
//! model: additionally `x_{t−1..t−L}`. With `T_eff = T − L` usable rows,
//!
//! ```text
//! F = ((RSS_r − RSS_u) / L) / (RSS_u / (T_eff − 2L − 1))
//! ```
//!
//! and the p-value is the F(L, T_eff − 2L − 1) upper tail. Results are also
//! reported as `ln(1/p)`, computed in log space so it stays finite when `p`
//! underflows.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SVD};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::num::MatrixReal;
use crate::panel::TimeSeriesPanel;
use crate::special::f_ln_sf;
use crate::stats;

/// Winsorization bounds (percentiles) of the outlier variant.
pub const WINSOR_LOWER: f64 = 0.01;
pub const WINSOR_UPPER: f64 = 0.99;

/// Preprocessing applied to both series before the test. When both flags are
/// set the series are differenced first, then winsorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GrangerVariant {
    pub differenced: bool,
    pub winsorized: bool,
}

impl GrangerVariant {
    pub const RAW: Self = Self {
        differenced: false,
        winsorized: false,
    };
    pub const DIFF: Self = Self {
        differenced: true,
        winsorized: false,
    };
    pub const WINSOR: Self = Self {
        differenced: false,
        winsorized: true,
    };
    pub const DIFF_WINSOR: Self = Self {
        differenced: true,
        winsorized: true,
    };
    pub const ALL: [Self; 4] = [Self::RAW, Self::DIFF, Self::WINSOR, Self::DIFF_WINSOR];

    pub fn label(&self) -> &'static str {
        match (self.differenced, self.winsorized) {
            (false, false) => "raw",
            (true, false) => "diff",
            (false, true) => "winsor",
            (true, true) => "diff_winsor",
        }
    }

    fn apply<T: MatrixReal>(&self, series: &[T]) -> Vec<T> {
        let mut out = if self.differenced {
            series.windows(2).map(|w| w[1] - w[0]).collect()
        } else {
            series.to_vec()
        };
        if self.winsorized {
            out = winsorize(&out, T::lit(WINSOR_LOWER), T::lit(WINSOR_UPPER));
        }
        out
    }
}

impl fmt::Display for GrangerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GrangerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Self::RAW),
            "diff" => Ok(Self::DIFF),
            "winsor" => Ok(Self::WINSOR),
            "diff_winsor" => Ok(Self::DIFF_WINSOR),
            other => Err(Error::Usage(format!(
                "unknown Granger variant `{other}` (expected raw, diff, winsor, diff_winsor)"
            ))),
        }
    }
}

/// Clamps values to the `[lower, upper]` percentiles of the series.
pub fn winsorize<T: MatrixReal>(series: &[T], lower: T, upper: T) -> Vec<T> {
    if series.is_empty() {
        return Vec::new();
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite series"));
    let lo = stats::percentile_sorted(&sorted, lower);
    let hi = stats::percentile_sorted(&sorted, upper);
    series
        .iter()
        .map(|&v| Float::min(Float::max(v, lo), hi))
        .collect()
}

/// Outcome of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrangerStat<T> {
    pub lag_order: usize,
    pub f_statistic: T,
    pub p_value: T,
    pub log_inv_p: T,
    pub rss_restricted: T,
    pub rss_unrestricted: T,
    pub df_num: usize,
    pub df_den: usize,
}

/// Least-squares fit returning the residual sum of squares and the rank.
fn ols_rss<T: MatrixReal>(design: DMatrix<T>, target: &DVector<T>) -> Result<(T, usize)> {
    let (rows, cols) = design.shape();
    let svd = SVD::new(design.clone(), true, true);
    let smax = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| Float::max(acc, s));
    let tol = T::from_count(rows.max(cols)) * <T as Float>::epsilon() * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let beta = svd
        .solve(target, tol)
        .map_err(|e| Error::Consistency(format!("least squares: {e}")))?;
    let resid = target - design * beta;
    Ok((resid.dot(&resid), rank))
}

/// Tests whether `x` Granger-causes `y` with `lag_order` lags of each.
pub fn granger_test<T: MatrixReal>(
    y: &[T],
    x: &[T],
    lag_order: usize,
    variant: GrangerVariant,
) -> Result<GrangerStat<T>> {
    if lag_order < 1 {
        return Err(Error::domain("lag_order must be >= 1"));
    }
    if y.len() != x.len() {
        return Err(Error::domain(format!(
            "series lengths differ ({} vs {})",
            y.len(),
            x.len()
        )));
    }
    let y = variant.apply(y);
    let x = variant.apply(x);
    let n = y.len();
    if n <= 3 * lag_order + 2 {
        return Err(Error::InsufficientData {
            rows: n,
            needed: 3 * lag_order + 2,
        });
    }

    let l = lag_order;
    let rows = n - l;
    let target = DVector::from_iterator(rows, y[l..].iter().copied());
    let restricted = DMatrix::from_fn(
        rows,
        l + 1,
        |r, c| {
            if c == 0 {
                T::one()
            } else {
                y[l + r - c]
            }
        },
    );
    let unrestricted = DMatrix::from_fn(rows, 2 * l + 1, |r, c| match c {
        0 => T::one(),
        c if c <= l => y[l + r - c],
        c => x[l + r - (c - l)],
    });

    let (rss_u, rank_u) = ols_rss(unrestricted, &target)?;
    if rank_u < 2 * l + 1 {
        return Err(Error::SingularDesign {
            rank: rank_u,
            columns: 2 * l + 1,
        });
    }
    let (rss_r, _) = ols_rss(restricted, &target)?;

    let df_den = rows - 2 * l - 1;
    let tss = target.iter().fold(T::zero(), |acc, &v| acc + v * v);
    if !(rss_u > <T as Float>::epsilon() * tss) {
        return Err(Error::DegenerateModel(
            "unrestricted residual variance is zero".into(),
        ));
    }
    // nested least squares: RSS_u <= RSS_r up to round-off
    let rss_r = Float::max(rss_r, rss_u);
    let f = ((rss_r - rss_u) / T::from_count(l)) / (rss_u / T::from_count(df_den));
    let ln_p = f_ln_sf(f, T::from_count(l), T::from_count(df_den));
    let p_value = Float::max(Float::exp(ln_p), <T as Float>::min_positive_value());
    Ok(GrangerStat {
        lag_order: l,
        f_statistic: f,
        p_value,
        log_inv_p: -ln_p,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        df_num: l,
        df_den,
    })
}

/// One row of a panel run; failures are kept per row.
#[derive(Debug, Clone)]
pub struct GrangerResult<T> {
    pub cause: String,
    pub effect: String,
    pub lag_order: usize,
    pub variant: GrangerVariant,
    pub outcome: std::result::Result<GrangerStat<T>, String>,
}

/// Cartesian product causes × lag orders × variants, in that nesting order.
pub fn granger_panel<T: MatrixReal>(
    panel: &TimeSeriesPanel<T>,
    effect: &str,
    causes: &[String],
    lag_orders: &[usize],
    variants: &[GrangerVariant],
) -> Result<Vec<GrangerResult<T>>> {
    let y = panel.column(effect)?;
    let xs = causes
        .iter()
        .map(|c| panel.column(c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(causes.len() * lag_orders.len() * variants.len());
    for (cause, x) in causes.iter().zip(xs) {
        for &lag_order in lag_orders {
            for &variant in variants {
                out.push(GrangerResult {
                    cause: cause.clone(),
                    effect: effect.to_string(),
                    lag_order,
                    variant,
                    outcome: granger_test(y, x, lag_order, variant).map_err(|e| e.to_string()),
                });
            }
        }
    }
    Ok(out)
}
