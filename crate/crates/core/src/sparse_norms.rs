//! The `l0` pseudonorm, the 2-k-symmetric gauge norm (top-k Euclidean norm)
//! and its dual, the k-support norm.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::vector::{dot, norm2};

/// Number of nonzero entries. The test is exact: `-0.0` and `0.0` count as
/// zero, every other float (however small) counts as nonzero.
pub fn l0(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Whether `x` lies in the level set `{ l0 <= k }`.
pub fn level_set_membership(x: &[f64], k: usize) -> Result<bool> {
    check_k(x.len(), k, 0)?;
    Ok(l0(x) <= k)
}

fn check_k(d: usize, k: usize, min: usize) -> Result<()> {
    if k < min || k > d {
        return Err(Error::SparsityOutOfRange { k, d });
    }
    Ok(())
}

/// Orders indices by decreasing magnitude, ties broken by the lowest index.
fn by_magnitude(x: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    }
}

/// Indices of the `k` largest-magnitude entries (ties go to the lowest
/// index), returned in increasing index order.
pub fn top_k_indices(x: &[f64], k: usize) -> Vec<usize> {
    let k = k.min(x.len());
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_magnitude(x));
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// 2-k-symmetric gauge norm: the Euclidean norm of the `k` largest-magnitude
/// entries of `x`. By convention the value at `k = 0` is `0`.
pub fn gauge_norm(x: &[f64], k: usize) -> Result<f64> {
    check_k(x.len(), k, 0)?;
    Ok(top_k_indices(x, k)
        .iter()
        .map(|&i| x[i] * x[i])
        .sum::<f64>()
        .sqrt())
}

/// Magnitudes of `x` sorted in decreasing order.
fn sorted_magnitudes(x: &[f64]) -> Vec<f64> {
    let mut z: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    z.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    z
}

/// Split point of the k-support norm closed form.
///
/// With `z` the sorted magnitudes, returns the `r` in `0..k` such that
/// `z[h-1] > T / (r+1) >= z[h]` where `h = k - r - 1` and `T = sum_{i >= h} z[i]`
/// (the left condition is vacuous when `h = 0`), together with `T`.
/// The leading `h` entries keep their magnitude, the tail is averaged.
fn ksupport_split(z: &[f64], k: usize) -> (usize, f64) {
    let d = z.len();
    let slack = 1e-12 * z[0];
    // suffix[i] = sum_{j >= i} z[j]
    let mut suffix = vec![0.0; d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] + z[i];
    }
    let mut best = (0, suffix[k - 1], f64::INFINITY);
    for r in 0..k {
        let h = k - r - 1;
        let tail = suffix[h];
        let avg = tail / (r + 1) as f64;
        let upper_violation = if h == 0 { 0.0 } else { (avg - z[h - 1]).max(0.0) };
        let lower_violation = (z[h] - avg).max(0.0);
        if upper_violation <= slack && lower_violation <= slack {
            return (r, tail);
        }
        let violation = upper_violation + lower_violation;
        if violation < best.2 {
            best = (r, tail, violation);
        }
    }
    (best.0, best.1)
}

/// k-support norm: the dual norm of [`gauge_norm`]`(., k)`, `1 <= k <= d`.
///
/// Evaluated in closed form from the sorted magnitudes `z`:
/// `||x||^2 = sum_{i<h} z_i^2 + (sum_{i>=h} z_i)^2 / (r+1)` with the split
/// `(r, h = k-r-1)` chosen so the averaged tail sits between `z_{h-1}` and `z_h`.
pub fn ksupport_norm(x: &[f64], k: usize) -> Result<f64> {
    check_k(x.len(), k, 1)?;
    let z = sorted_magnitudes(x);
    if z[0] == 0.0 {
        return Ok(0.0);
    }
    let (r, tail) = ksupport_split(&z, k);
    let h = k - r - 1;
    let head: f64 = z[..h].iter().map(|v| v * v).sum();
    Ok((head + tail * tail / (r + 1) as f64).sqrt())
}

/// A dual vector `y` with `gauge_norm(y, k) = 1` and
/// `<x, y> = ksupport_norm(x, k)`, certifying the value of the k-support norm
/// from below. Zero for `x = 0`.
pub fn ksupport_dual_certificate(x: &[f64], k: usize) -> Result<Vec<f64>> {
    check_k(x.len(), k, 1)?;
    let norm = ksupport_norm(x, k)?;
    if norm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let z = sorted_magnitudes(x);
    let (r, tail) = ksupport_split(&z, k);
    let h = k - r - 1;
    let avg = tail / (r + 1) as f64;
    // entries among the h largest keep their magnitude, the rest get the tail average
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by(by_magnitude(x));
    let mut y = vec![0.0; x.len()];
    for (rank, &i) in order.iter().enumerate() {
        let mag = if rank < h { x[i].abs() } else { avg };
        // zero entries of x get a positive sign; they do not touch <x, y>
        y[i] = x[i].signum() * mag / norm;
    }
    Ok(y)
}

/// Linear maximization oracle of the k-support unit ball: returns
/// `c_K / ||c_K||` with `K` the `k` largest-magnitude entries of `c`, which
/// attains `max { <x, c> : ksupport_norm(x, k) <= 1 } = gauge_norm(c, k)`.
///
/// For `c = 0` every point of the ball is a maximizer; the zero vector is
/// returned.
pub fn lmo_ksupport_ball(c: &[f64], k: usize) -> Result<Vec<f64>> {
    check_k(c.len(), k, 1)?;
    let support = top_k_indices(c, k);
    let mut x = vec![0.0; c.len()];
    for &i in &support {
        x[i] = c[i];
    }
    let n = norm2(&x);
    if n == 0.0 {
        return Ok(x);
    }
    x.iter_mut().for_each(|v| *v /= n);
    Ok(x)
}

/// Duality gap of the pair `(x, y)`: `ksupport(x) * gauge(y) - <x, y>`,
/// nonnegative by the generalized Cauchy-Schwarz inequality.
pub fn ksupport_sandwich_gap(x: &[f64], y: &[f64], k: usize) -> Result<f64> {
    Ok(ksupport_norm(x, k)? * gauge_norm(y, k)? - dot(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l0_examples() {
        assert_eq!(l0(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(l0(&[1.0, 0.0, -2.0]), 2);
        assert_eq!(l0(&[-3.5, 0.0, 7.0]), l0(&[1.0, 0.0, -2.0]));
        assert_eq!(l0(&[-0.0, 1e-300]), 1);
    }

    #[test]
    fn level_sets() {
        assert!(level_set_membership(&[0.0; 4], 0).unwrap());
        assert!(!level_set_membership(&[1.0, 1.0, 1.0], 2).unwrap());
        assert!(level_set_membership(&[1.0, 0.0, 1.0], 2).unwrap());
        assert!(level_set_membership(&[1.0], 2).is_err());
    }

    #[test]
    fn gauge_examples() {
        let x = [3.0, -4.0, 0.0];
        assert_eq!(gauge_norm(&x, 1).unwrap(), 4.0);
        assert_eq!(gauge_norm(&x, 3).unwrap(), 5.0);
        assert_eq!(gauge_norm(&x, 0).unwrap(), 0.0);
        assert!((gauge_norm(&[1.0, 2.0, 2.0, 4.0], 2).unwrap() - 20f64.sqrt()).abs() < 1e-12);
        assert!(gauge_norm(&x, 4).is_err());
    }

    #[test]
    fn ksupport_examples() {
        let x = [3.0, -4.0, 0.0];
        assert!((ksupport_norm(&x, 1).unwrap() - 7.0).abs() < 1e-12);
        assert!((ksupport_norm(&x, 3).unwrap() - 5.0).abs() < 1e-12);
        assert!((ksupport_norm(&[3.0, 4.0, 0.0], 2).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(ksupport_norm(&x, 0), Err(Error::SparsityOutOfRange { .. })));
        assert_eq!(ksupport_norm(&[0.0, 0.0], 1).unwrap(), 0.0);
    }

    #[test]
    fn ksupport_with_ties() {
        // all-equal magnitudes: the tail absorbs every entry
        let v = ksupport_norm(&[1.0, -1.0, 1.0], 2).unwrap();
        assert!((v - 3.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dual_certificate_is_tight() {
        for x in [
            vec![3.0, -4.0, 0.0],
            vec![1.0, 2.0, 2.0, 4.0],
            vec![0.5, -0.1, 0.3, 0.0, 2.0],
            vec![1.0, 1.0, 1.0],
        ] {
            for k in 1..=x.len() {
                let y = ksupport_dual_certificate(&x, k).unwrap();
                assert!((gauge_norm(&y, k).unwrap() - 1.0).abs() < 1e-12);
                assert!((dot(&x, &y) - ksupport_norm(&x, k).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lmo_examples() {
        let x = lmo_ksupport_ball(&[3.0, -4.0, 0.0], 1).unwrap();
        assert_eq!(x, vec![0.0, -1.0, 0.0]);
        assert_eq!(dot(&x, &[3.0, -4.0, 0.0]), 4.0);
        let x = lmo_ksupport_ball(&[3.0, 4.0, 0.0], 2).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-15 && (x[1] - 0.8).abs() < 1e-15 && x[2] == 0.0);
        assert!((dot(&x, &[3.0, 4.0, 0.0]) - 5.0).abs() < 1e-12);
        for k in 1..=3 {
            assert_eq!(lmo_ksupport_ball(&[1.0, 0.0, 0.0], k).unwrap(), vec![1.0, 0.0, 0.0]);
        }
        assert_eq!(lmo_ksupport_ball(&[0.0, 0.0], 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn top_k_tie_break_prefers_low_index() {
        assert_eq!(top_k_indices(&[1.0, -1.0, 1.0], 2), vec![0, 1]);
        assert_eq!(top_k_indices(&[0.0, 2.0, -2.0, 1.0], 1), vec![1]);
    }
}
