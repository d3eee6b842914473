//! Independent reference computations shared by the integration tests.
//! Nothing here calls the routine it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparselb::{GroupStructure, SupportSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// All subsets of `{0, .., d-1}` with at most `k` elements, by bitmask.
pub fn small_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << d)
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| (0..d).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// `sup { <x/|x|, y> : 0 < l0(x) <= k }` together with `0` (the value at
/// `x = 0`), by enumerating supports: the best unit vector on a support `S`
/// is `y_S / |y_S|`.
pub fn levelset_sup_by_supports(y: &[f64], k: usize) -> f64 {
    small_subsets(y.len(), k)
        .iter()
        .map(|s| s.iter().map(|&i| y[i] * y[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Lower Moreau addition on `f64` with infinities.
pub fn lower_add(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// Upper Moreau addition on `f64` with infinities.
pub fn upper_add(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        f64::INFINITY
    } else {
        s
    }
}

/// `f^c(y) = sup_x c(x, y) +lower (-f(x))` on a table `c[x][y]`.
pub fn table_conjugate(f: &[f64], c: &[Vec<f64>]) -> Vec<f64> {
    let cols = c.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| (0..f.len()).map(|i| lower_add(c[i][j], -f[i])).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// `g^{c'}(x) = sup_y c(x, y) +lower (-g(y))`.
pub fn table_reverse_conjugate(g: &[f64], c: &[Vec<f64>]) -> Vec<f64> {
    c.iter()
        .map(|row| row.iter().zip(g).map(|(cv, gv)| lower_add(*cv, -gv)).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// A random extended value: mostly small integers, sometimes infinite.
pub fn random_ext(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => f64::INFINITY,
        1 => f64::NEG_INFINITY,
        _ => rng.random_range(-4..=4) as f64 * 0.5,
    }
}

/// Random cover of `{0, .., d-1}` by groups of size 2 or 3 with weights in
/// `[0.5, 2]`: a shuffled chain of overlapping groups plus random extras.
pub fn random_cover(d: usize, rng: &mut ChaCha8Rng) -> GroupStructure {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut groups = Vec::new();
    let mut start = 0;
    while start < d {
        let len = rng.random_range(2..=3).min(d);
        let end = (start + len).min(d);
        let lo = end.saturating_sub(len);
        groups.push(SupportSet::new(d, perm[lo..end].to_vec()).unwrap());
        start = end;
    }
    for _ in 0..rng.random_range(0..=2) {
        let a = rng.random_range(0..d);
        let b = (a + rng.random_range(1..d)) % d;
        groups.push(SupportSet::new(d, vec![a, b]).unwrap());
    }
    let weights = groups.iter().map(|_| rng.random_range(0.5..2.0)).collect();
    GroupStructure::new(d, groups, weights).unwrap()
}

/// Sampled `sup { <v, y> / norm(v) }` over vectors supported in single
/// groups (random directions in each group, then a random-perturbation
/// ascent from the best one) and over random dense vectors. Every sample is
/// a genuine ratio, so the result never exceeds the true dual norm up to
/// the accuracy of `norm`.
pub fn sampled_dual(
    gs: &GroupStructure,
    y: &[f64],
    norm: impl Fn(&[f64]) -> f64,
    per_group: usize,
    dense: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let d = gs.dim();
    let mut best = 0.0f64;
    for g in gs.groups() {
        let ratio = |local: &[f64]| {
            let v = g.scatter(local);
            dot(&v, y) / norm(&v)
        };
        let mut top = (f64::NEG_INFINITY, vec![]);
        for _ in 0..per_group {
            let mut local = normal_vec(rng, g.len());
            let n = norm2(&local);
            local.iter_mut().for_each(|c| *c /= n);
            let r = ratio(&local);
            if r > top.0 {
                top = (r, local);
            }
        }
        let mut radius = 0.5;
        for _ in 0..per_group {
            let step = normal_vec(rng, g.len());
            let mut cand: Vec<f64> = top.1.iter().zip(&step).map(|(a, b)| a + radius * b).collect();
            let n = norm2(&cand);
            cand.iter_mut().for_each(|c| *c /= n);
            let r = ratio(&cand);
            if r > top.0 {
                top = (r, cand);
            } else {
                radius *= 0.97;
            }
        }
        best = best.max(top.0);
    }
    for _ in 0..dense {
        let v = normal_vec(rng, d);
        best = best.max(dot(&v, y) / norm(&v));
    }
    best
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// `min { |z - A x|^2 : l0(x) <= k }` by enumerating supports of size
/// exactly `min(k, d)` (supersets never hurt) and solving each restricted
/// problem through the normal equations with a pseudo-inverse.
pub fn sparse_lsq_by_supports(a: &nalgebra::DMatrix<f64>, z: &[f64], k: usize) -> f64 {
    let d = a.ncols();
    let zv = nalgebra::DVector::from_column_slice(z);
    let mut best = zv.norm_squared();
    for s in small_subsets(d, k.min(d)) {
        if s.is_empty() {
            continue;
        }
        let sub = a.select_columns(&s);
        let gram = sub.transpose() * &sub;
        let rhs = sub.transpose() * &zv;
        let x = gram.pseudo_inverse(1e-12).unwrap() * rhs;
        best = best.min((&zv - &sub * x).norm_squared());
    }
    best
}
