//! Seeded synthetic panels: independent Gaussian series and linearly
//! lag-coupled cause/effect pairs.
//!
//! Stream layout under a given seed: `iid_panel` column `j` uses stream `j`;
//! `coupled_pair` draws the cause from stream 0 and the effect noise from
//! stream 1; `coupled_panel` distractor `k` (1-based) uses stream `1 + k`.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::panel::{daily_index, TimeSeriesPanel};
use crate::rng;

pub const CAUSE: &str = "cause";
pub const EFFECT: &str = "effect";

/// First date of every synthetic index.
pub fn synthetic_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date")
}

/// `y[t] = beta · x[t − true_lag] + noise_sigma · ε[t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec<T> {
    pub true_lag: usize,
    pub beta: T,
    pub noise_sigma: T,
    pub len: usize,
    pub seed: u64,
}

impl<T: Real> CouplingSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.len <= self.true_lag + 10 {
            return Err(Error::domain(format!(
                "coupled series of length {} too short for lag {}",
                self.len, self.true_lag
            )));
        }
        if !(self.noise_sigma >= T::zero()) || !self.beta.is_finite() {
            return Err(Error::domain("noise_sigma must be >= 0 and beta finite"));
        }
        Ok(())
    }
}

/// `n_series` independent standard normal columns named `x1, x2, …`.
pub fn iid_panel<T: Real>(n_series: usize, len: usize, seed: u64) -> Result<TimeSeriesPanel<T>> {
    if n_series < 2 || len < 10 {
        return Err(Error::domain(format!(
            "iid panel needs n_series >= 2 and length >= 10, got {n_series} x {len}"
        )));
    }
    let columns = (0..n_series)
        .map(|j| rng::normals(&mut rng::stream(seed, j as u64), len))
        .collect();
    let names = (1..=n_series).map(|j| format!("x{j}")).collect();
    TimeSeriesPanel::new(daily_index(synthetic_start(), len), names, columns)
}

fn coupled_columns<T: Real>(spec: &CouplingSpec<T>) -> Result<(Vec<T>, Vec<T>)> {
    spec.validate()?;
    let x: Vec<T> = rng::normals(&mut rng::stream(spec.seed, 0), spec.len);
    let eps: Vec<T> = rng::normals(&mut rng::stream(spec.seed, 1), spec.len);
    let y = (0..spec.len)
        .map(|t| {
            let noise = spec.noise_sigma * eps[t];
            if t >= spec.true_lag {
                spec.beta * x[t - spec.true_lag] + noise
            } else {
                noise
            }
        })
        .collect();
    Ok((x, y))
}

/// Two columns, `cause` (i.i.d. N(0, 1)) and `effect` driven by it.
pub fn coupled_pair<T: Real>(spec: &CouplingSpec<T>) -> Result<TimeSeriesPanel<T>> {
    let (x, y) = coupled_columns(spec)?;
    TimeSeriesPanel::new(
        daily_index(synthetic_start(), spec.len),
        vec![CAUSE.to_string(), EFFECT.to_string()],
        vec![x, y],
    )
}

/// A coupled pair plus `distractors` independent columns `noise_1, …`.
pub fn coupled_panel<T: Real>(
    spec: &CouplingSpec<T>,
    distractors: usize,
) -> Result<TimeSeriesPanel<T>> {
    let (x, y) = coupled_columns(spec)?;
    let mut names = vec![CAUSE.to_string(), EFFECT.to_string()];
    let mut columns = vec![x, y];
    for k in 1..=distractors {
        names.push(format!("noise_{k}"));
        columns.push(rng::normals(
            &mut rng::stream(spec.seed, 1 + k as u64),
            spec.len,
        ));
    }
    TimeSeriesPanel::new(daily_index(synthetic_start(), spec.len), names, columns)
}
