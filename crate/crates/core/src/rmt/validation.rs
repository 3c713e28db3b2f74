//! Histogram comparison of simulated Wishart spectra against the
//! Marchenko-Pastur density.

use crate::error::{Error, Result};
use crate::num::MatrixReal;

use super::marchenko_pastur::{mp_integral, MpParams};
use super::wishart::wishart_spectra;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpCheck<T> {
    pub n: usize,
    pub p: usize,
    pub matrices: usize,
    pub bins: usize,
    /// Mean over bins of |histogram density − bin-averaged MP density|.
    pub mad: T,
    /// ∫ g over the support; should be 1.
    pub normalization: T,
}

/// Pools the spectra of `matrices` draws of `XᵀX / n` (`X` is `n × p`,
/// `p ≤ n`) into `bins` equal bins over the MP support `[a, b]`.
///
/// Each bin is compared with the density averaged over that bin rather than
/// its midpoint value, which matters near the square-root edges.
pub fn mp_histogram_check<T: MatrixReal>(
    n: usize,
    p: usize,
    matrices: usize,
    bins: usize,
    seed: u64,
) -> Result<MpCheck<T>> {
    if p > n || bins == 0 {
        return Err(Error::domain(format!(
            "MP check needs p <= n and bins >= 1 (got n={n}, p={p}, bins={bins})"
        )));
    }
    let params = MpParams::<T>::from_dims(n, p)?;
    let spectra = wishart_spectra::<T>(n, p, matrices, seed)?;
    let total = spectra.iter().map(Vec::len).sum::<usize>();
    let width = (params.b - params.a) / T::from_count(bins);

    let mut counts = vec![0usize; bins];
    for &v in spectra.iter().flatten() {
        if v < params.a || v > params.b {
            continue;
        }
        let k = ((v - params.a) / width)
            .to_usize()
            .unwrap_or(bins)
            .min(bins - 1);
        counts[k] += 1;
    }
    let scale = T::from_count(total) * width;
    let mut mad = T::zero();
    for (k, &c) in counts.iter().enumerate() {
        let lo = params.a + width * T::from_count(k);
        let expected = mp_integral(lo, lo + width, &params) / width;
        mad += num_traits::Float::abs(T::from_count(c) / scale - expected);
    }
    Ok(MpCheck {
        n,
        p,
        matrices,
        bins,
        mad: mad / T::from_count(bins),
        normalization: mp_integral(params.a, params.b, &params),
    })
}
