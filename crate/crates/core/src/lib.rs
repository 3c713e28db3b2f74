//! Lead-lag monitoring for multivariate time series.
//!
//! The crate is generic over the floating-point scalar (`f32` or `f64`);
//! the aliases below fix it to `f64`, which is what the I/O layer and the
//! command-line tool use.

// NaN-rejecting guards are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod error;
pub mod granger;
pub mod indicator;
pub mod num;
pub mod ode;
pub mod panel;
pub mod panel_io;
pub mod rmt;
pub mod rng;
pub mod special;
pub mod stats;
pub mod synth;

pub use compare::{compare, Comparison, ComparisonRow};
pub use error::{Error, ErrorClass, Result};
pub use granger::{granger_panel, granger_test, GrangerResult, GrangerStat, GrangerVariant};
pub use indicator::{
    indicator_series, lag_profile, sigma_lambda, IndicatorSeries, LagProfile, LagSet, WindowSpec,
};
pub use num::{MatrixReal, Real};
pub use panel::TimeSeriesPanel;
pub use panel_io::{read_indicator, read_panel, write_results, OutputFormat, PanelSchema};
pub use rmt::{tw_cdf, tw_quantile, wishart_constants, MpParams, TwTable, WishartConstants};

pub type Panel = TimeSeriesPanel<f64>;
pub type Indicator = IndicatorSeries<f64>;
pub type Profile = LagProfile<f64>;
pub type Granger = GrangerResult<f64>;
pub type Ranking = Comparison<f64>;
pub type Table = TwTable<f64>;
