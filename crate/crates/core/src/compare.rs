//! Side-by-side ranking of cause candidates by mean σ_λ and by Granger
//! `ln(1/p)`.

use crate::error::Result;
use crate::granger::{granger_panel, GrangerVariant};
use crate::indicator::{indicator_series, WindowSpec};
use crate::num::MatrixReal;
use crate::panel::TimeSeriesPanel;
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow<T> {
    pub cause: String,
    /// Mean σ_λ per configured lag (indicator run with that `max_lag`).
    pub mean_sigma_lambda: Vec<Option<T>>,
    /// Granger `ln(1/p)` per configured lag order.
    pub log_inv_p: Vec<Option<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison<T> {
    pub effect: String,
    pub lags: Vec<usize>,
    pub variant: GrangerVariant,
    pub rows: Vec<ComparisonRow<T>>,
    /// Spearman correlation between the two rankings, per lag. `None` when a
    /// column has missing entries or no variation.
    pub spearman: Vec<Option<T>>,
}

impl<T: MatrixReal> Comparison<T> {
    /// Cause with the largest mean σ_λ at lag index `i`.
    pub fn top_by_sigma(&self, i: usize) -> Option<&str> {
        top(&self.rows, |r| r.mean_sigma_lambda[i])
    }

    /// Cause with the largest `ln(1/p)` at lag index `i`.
    pub fn top_by_granger(&self, i: usize) -> Option<&str> {
        top(&self.rows, |r| r.log_inv_p[i])
    }
}

fn top<T: MatrixReal, F: Fn(&ComparisonRow<T>) -> Option<T>>(
    rows: &[ComparisonRow<T>],
    key: F,
) -> Option<&str> {
    rows.iter()
        .filter_map(|r| key(r).map(|v| (r.cause.as_str(), v)))
        .fold(None, |best: Option<(&str, T)>, (c, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((c, v)),
        })
        .map(|(c, _)| c)
}

/// Runs both methods on one panel.
pub fn compare<T: MatrixReal>(
    panel: &TimeSeriesPanel<T>,
    effect: &str,
    causes: &[String],
    window: usize,
    lags: &[usize],
    variant: GrangerVariant,
) -> Result<Comparison<T>> {
    let mut sigma_by_lag = Vec::with_capacity(lags.len());
    for &lag in lags {
        let spec = WindowSpec::new(window, lag)?;
        let series = indicator_series(panel, effect, causes, &spec)?;
        sigma_by_lag.push(
            (0..causes.len())
                .map(|j| series.column_mean(j))
                .collect::<Vec<_>>(),
        );
    }
    let granger = granger_panel(panel, effect, causes, lags, &[variant])?;

    let rows: Vec<ComparisonRow<T>> = causes
        .iter()
        .enumerate()
        .map(|(j, cause)| ComparisonRow {
            cause: cause.clone(),
            mean_sigma_lambda: sigma_by_lag.iter().map(|col| col[j]).collect(),
            log_inv_p: (0..lags.len())
                .map(|i| {
                    granger[j * lags.len() + i]
                        .outcome
                        .as_ref()
                        .ok()
                        .map(|s| s.log_inv_p)
                })
                .collect(),
        })
        .collect();

    let spearman = (0..lags.len())
        .map(|i| {
            let a: Option<Vec<T>> = rows.iter().map(|r| r.mean_sigma_lambda[i]).collect();
            let b: Option<Vec<T>> = rows.iter().map(|r| r.log_inv_p[i]).collect();
            match (a, b) {
                (Some(a), Some(b)) if a.len() >= 2 => stats::spearman(&a, &b),
                _ => None,
            }
        })
        .collect();

    Ok(Comparison {
        effect: effect.to_string(),
        lags: lags.to_vec(),
        variant,
        rows,
        spearman,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{coupled_panel, iid_panel, CouplingSpec, CAUSE, EFFECT};

    #[test]
    fn true_cause_ranks_first() {
        let panel = coupled_panel(
            &CouplingSpec {
                true_lag: 2,
                beta: 0.9,
                noise_sigma: 0.5,
                len: 400,
                seed: 12,
            },
            4,
        )
        .unwrap();
        let causes: Vec<String> = panel
            .names()
            .iter()
            .filter(|n| *n != EFFECT)
            .cloned()
            .collect();
        let cmp = compare(&panel, EFFECT, &causes, 60, &[2, 5], GrangerVariant::RAW).unwrap();
        assert_eq!(cmp.rows.len(), 5);
        for i in 0..2 {
            assert_eq!(cmp.top_by_sigma(i), Some(CAUSE));
            assert_eq!(cmp.top_by_granger(i), Some(CAUSE));
            assert!(cmp.spearman[i].is_some());
        }
    }

    #[test]
    fn iid_panel_output_well_formed() {
        let panel = iid_panel::<f64>(4, 200, 3).unwrap();
        let causes: Vec<String> = panel.names()[1..].to_vec();
        let cmp = compare(&panel, "x1", &causes, 40, &[2, 5], GrangerVariant::RAW).unwrap();
        assert_eq!(cmp.rows.len(), 3);
        for row in &cmp.rows {
            assert_eq!(row.mean_sigma_lambda.len(), 2);
            assert!(row.log_inv_p.iter().all(|v| v.is_some()));
        }
        assert!(cmp
            .spearman
            .iter()
            .all(|s| s.is_none_or(|v| (-1.0..=1.0).contains(&v))));
    }
}
