use std::collections::HashSet;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::num::Real;

/// `T` observations of `M` named series on a strictly increasing date index.
///
/// Values are stored column-major (one `Vec` per series) and are always
/// finite; missing data is resolved at ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel<T> {
    timestamps: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<T>>,
}

impl<T: Real> TimeSeriesPanel<T> {
    pub fn new(
        timestamps: Vec<NaiveDate>,
        names: Vec<String>,
        columns: Vec<Vec<T>>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::domain(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::domain(format!("duplicate column name `{name}`")));
            }
        }
        for (i, pair) in timestamps.windows(2).enumerate() {
            if pair[1] == pair[0] {
                return Err(Error::Duplicate { row: i + 1 });
            }
            if pair[1] < pair[0] {
                return Err(Error::Order { row: i + 1 });
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != timestamps.len() {
                return Err(Error::domain(format!(
                    "column `{name}` has {} values for {} timestamps",
                    col.len(),
                    timestamps.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    message: "non-finite value".into(),
                });
            }
        }
        Ok(Self {
            timestamps,
            names,
            columns,
        })
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[T]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn column_at(&self, index: usize) -> &[T] {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }
}

/// Consecutive daily dates starting at `start`.
pub fn daily_index(start: NaiveDate, len: usize) -> Vec<NaiveDate> {
    start.iter_days().take(len).collect()
}
