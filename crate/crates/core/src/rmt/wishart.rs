use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{MatrixReal, Real};
use crate::rng;

/// Centering and scaling constants for the largest eigenvalue of a white
/// Wishart matrix. `n` is always the larger of the two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WishartConstants<T> {
    pub n: usize,
    pub p: usize,
    pub mu_np: T,
    pub sigma_np: T,
}

/// `μ = (√(n−1) + √p)²`, `σ = (√(n−1) + √p)(1/√(n−1) + 1/√p)^{1/3}`,
/// with `n` and `p` exchanged when `n < p`.
pub fn wishart_constants<T: Real>(n: usize, p: usize) -> Result<WishartConstants<T>> {
    let (n, p) = if n < p { (p, n) } else { (n, p) };
    if n < 2 || p < 1 {
        return Err(Error::domain(format!(
            "Wishart constants need max(n, p) >= 2 and min(n, p) >= 1, got n={n}, p={p}"
        )));
    }
    let rn = T::from_count(n - 1).sqrt();
    let rp = T::from_count(p).sqrt();
    let sum = rn + rp;
    Ok(WishartConstants {
        n,
        p,
        mu_np: sum * sum,
        sigma_np: sum * (rn.recip() + rp.recip()).cbrt(),
    })
}

fn check_dims(n: usize, p: usize, replications: usize) -> Result<()> {
    if n < 2 || p < 1 || replications < 1 {
        return Err(Error::domain(format!(
            "Wishart sampling needs n >= 2, p >= 1, replications >= 1 (got {n}, {p}, {replications})"
        )));
    }
    Ok(())
}

fn gaussian_matrix<T: MatrixReal>(n: usize, p: usize, seed: u64, stream: u64) -> DMatrix<T> {
    let mut rng = rng::stream(seed, stream);
    DMatrix::from_vec(n, p, rng::normals::<T, _>(&mut rng, n * p))
}

fn eigenvalues<T: MatrixReal>(w: DMatrix<T>) -> Option<Vec<T>> {
    let dim = w.nrows();
    let max_iter = 100 * dim.max(10);
    SymmetricEigen::try_new(w, T::epsilon(), max_iter)
        .map(|e| e.eigenvalues.iter().copied().collect())
}

fn largest_eigenvalue<T: MatrixReal>(n: usize, p: usize, seed: u64, stream: u64) -> Option<T> {
    let x = gaussian_matrix::<T>(n, p, seed, stream);
    let w = x.tr_mul(&x);
    eigenvalues(w)?.into_iter().fold(None, |acc: Option<T>, v| {
        Some(acc.map_or(v, |m| Float::max(m, v)))
    })
}

/// Raw largest eigenvalues `l₁` of `XᵀX` for `replications` independent
/// `n × p` standard Gaussian matrices.
///
/// Replication `r` draws from PRNG stream `r` under `seed`, so the output does
/// not depend on thread scheduling. Replications whose eigen-solve fails are
/// dropped; more than 1% failures is an error.
pub fn lmax_sample<T: MatrixReal>(
    n: usize,
    p: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<T>> {
    check_dims(n, p, replications)?;
    let draws: Vec<Option<T>> = (0..replications)
        .into_par_iter()
        .map(|r| largest_eigenvalue::<T>(n, p, seed, r as u64))
        .collect();
    let failed = draws.iter().filter(|d| d.is_none()).count();
    if failed * 100 > replications {
        return Err(Error::Convergence {
            failed,
            total: replications,
        });
    }
    Ok(draws.into_iter().flatten().collect())
}

/// Standardized largest eigenvalues `(l₁ − μ_np) / σ_np`.
pub fn standardized_lmax_sample<T: MatrixReal>(
    n: usize,
    p: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let c = wishart_constants::<T>(n, p)?;
    Ok(lmax_sample::<T>(n, p, replications, seed)?
        .into_iter()
        .map(|l| (l - c.mu_np) / c.sigma_np)
        .collect())
}

fn spectrum<T: MatrixReal>(n: usize, p: usize, seed: u64, stream: u64) -> Option<Vec<T>> {
    let x = gaussian_matrix::<T>(n, p, seed, stream);
    let w = x.tr_mul(&x) / T::from_count(n);
    let mut ev = eigenvalues(w)?;
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Some(ev)
}

/// Full spectrum of `XᵀX / n` for one `n × p` Gaussian matrix (ascending).
pub fn wishart_spectrum<T: MatrixReal>(n: usize, p: usize, seed: u64) -> Result<Vec<T>> {
    check_dims(n, p, 1)?;
    spectrum(n, p, seed, 0).ok_or(Error::Convergence {
        failed: 1,
        total: 1,
    })
}

/// Spectra of `matrices` independent draws; draw `r` uses stream `r`, so the
/// first one equals [`wishart_spectrum`].
pub fn wishart_spectra<T: MatrixReal>(
    n: usize,
    p: usize,
    matrices: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    check_dims(n, p, matrices)?;
    let spectra: Vec<Option<Vec<T>>> = (0..matrices)
        .into_par_iter()
        .map(|r| spectrum(n, p, seed, r as u64))
        .collect();
    let failed = spectra.iter().filter(|s| s.is_none()).count();
    if failed > 0 {
        return Err(Error::Convergence {
            failed,
            total: matrices,
        });
    }
    Ok(spectra.into_iter().flatten().collect())
}
