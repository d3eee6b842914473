//! Exhaustive best-subset least squares, the ground truth the certified
//! bounds are checked against.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::LsqInstance;
use crate::error::{Error, Result};
use crate::vector::{binomial, for_each_subset, SupportSet};

/// Largest number of supports [`exact_sparse_lsq`] agrees to enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Relative singular-value cutoff of the restricted least-squares solves.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Optimal value, support and minimizer of an exact sparse problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub value: f64,
    pub support: SupportSet,
    pub x: Vec<f64>,
}

/// Minimum-norm least-squares fit of `z` by the columns of `A` indexed by
/// `support`; returns the coefficients on the support and the residual
/// `|z - A_K u|^2`.
pub fn restricted_lsq(a: &DMatrix<f64>, z: &[f64], support: &[usize]) -> (Vec<f64>, f64) {
    let zv = DVector::from_column_slice(z);
    if support.is_empty() {
        return (Vec::new(), zv.norm_squared());
    }
    let sub = a.select_columns(support);
    let svd = sub.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd
        .solve(&zv, SINGULAR_TOL * smax)
        .expect("singular vectors were requested");
    let residual = (&zv - &sub * &u).norm_squared();
    (u.iter().copied().collect(), residual)
}

/// Exact `min { |z - Ax|^2 : l0(x) <= k }` by enumerating every support of
/// size at most `k`.
///
/// Values within `1e-12 (1 + |best|)` of each other count as ties, which go
/// to the lexicographically smallest support.
pub fn exact_sparse_lsq(inst: &LsqInstance) -> Result<ExactSolution> {
    let d = inst.dim();
    let k = inst.k();
    let count: u128 = (0..=k).map(|j| binomial(d, j)).sum();
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { count, limit: ENUMERATION_LIMIT });
    }
    let mut supports = Vec::with_capacity(count as usize);
    for j in 0..=k {
        for_each_subset(d, j, |s| supports.push(s.to_vec()));
    }
    supports.sort();
    let fits: Vec<(Vec<f64>, f64)> = supports
        .par_iter()
        .map(|s| restricted_lsq(inst.a(), inst.z(), s))
        .collect();

    let mut best = 0;
    for i in 1..fits.len() {
        let (v, b) = (fits[i].1, fits[best].1);
        if v < b - 1e-12 * (1.0 + b.abs()) {
            best = i;
        }
    }
    let support = SupportSet::new(d, supports[best].clone())?;
    let x = support.scatter(&fits[best].0);
    Ok(ExactSolution { value: fits[best].1, support, x })
}
