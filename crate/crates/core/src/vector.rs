//! Dense vector helpers and the [`SupportSet`] type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|a| a.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, a| m.max(a.abs()))
}

pub fn scale(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|a| a * s).collect()
}

pub fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `x + s * y`
pub fn axpy(x: &[f64], s: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + s * b).collect()
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidInput("vector has dimension 0".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("entry {i} is not finite")));
    }
    Ok(())
}

/// A subset `K` of the coordinates `{0, .., d-1}` of `R^d`.
///
/// Indices are kept sorted and deduplicated, so two sets with the same
/// members compare equal and order lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportSet {
    dim: usize,
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&i) = indices.last() {
            if i >= dim {
                return Err(Error::InvalidInput(format!(
                    "index {i} outside of dimension {dim}"
                )));
            }
        }
        Ok(SupportSet { dim, indices })
    }

    /// Builds a support set from 1-based indices.
    pub fn from_one_based(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidInput("1-based index 0".into()));
        }
        Self::new(dim, indices.iter().map(|i| i - 1).collect())
    }

    pub fn empty(dim: usize) -> Self {
        SupportSet { dim, indices: Vec::new() }
    }

    pub fn full(dim: usize) -> Self {
        SupportSet { dim, indices: (0..dim).collect() }
    }

    /// The set `{ j : x_j != 0 }`.
    pub fn of(x: &[f64]) -> Self {
        SupportSet {
            dim: x.len(),
            indices: x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// The complement `-K`.
    pub fn complement(&self) -> Self {
        SupportSet {
            dim: self.dim,
            indices: (0..self.dim).filter(|i| !self.contains(*i)).collect(),
        }
    }

    /// `x_K`: coincides with `x` on `K`, zero elsewhere.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut out = vec![0.0; x.len()];
        for &i in &self.indices {
            out[i] = x[i];
        }
        out
    }

    /// The entries of `x` indexed by `K`, in increasing index order.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| x[i]).collect()
    }

    /// Inverse of [`gather`](Self::gather): embeds local coordinates into `R^d`.
    pub fn scatter(&self, local: &[f64]) -> Vec<f64> {
        debug_assert_eq!(local.len(), self.indices.len());
        let mut out = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(local) {
            out[i] = v;
        }
        out
    }
}

/// Calls `visit` on every subset of `{0, .., d-1}` of cardinality exactly
/// `k`, in lexicographic order.
pub fn for_each_subset(d: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > d {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < d - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All subsets of cardinality exactly `k`, lexicographically ordered.
pub fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_subset(d, k, |s| out.push(s.to_vec()));
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
