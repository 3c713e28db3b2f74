//! Random-matrix building blocks: the Marchenko-Pastur bulk law, the
//! Tracy-Widom F1 edge law, and Monte-Carlo white Wishart sampling used to
//! validate both.

mod marchenko_pastur;
mod tracy_widom;
mod validation;
mod wishart;

pub use marchenko_pastur::{mp_density, mp_integral, MpParams};
pub use tracy_widom::{
    build_tw_table, tw_cdf, tw_quantile, TwTable, DEFAULT_STEP, DEFAULT_S_MAX, DEFAULT_S_MIN,
};
pub use validation::{mp_histogram_check, MpCheck};
pub use wishart::{
    lmax_sample, standardized_lmax_sample, wishart_constants, wishart_spectra, wishart_spectrum,
    WishartConstants,
};
