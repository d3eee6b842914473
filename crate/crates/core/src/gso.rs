//! Sparse optimization over finite unions of coordinate subspaces: norms
//! built from local norms on groups of coordinates or from symmetric point
//! clouds, their duals, and certified lower bounds for problems constrained
//! to a union of groups.

use std::time::Instant;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::caprac::{caprac_conjugate, normalize};
use crate::error::{check_dim, Error, Result};
use crate::lower_bound::{
    ascend, lsq_starts, random_starts, restricted_lsq, BoundReport, ConjugateEval, DualSearchConfig, LsqInstance,
    LsqSphereSup,
};
use crate::vector::{check_finite, dot, norm2, subsets, SupportSet};

/// Finite family of coordinate groups, each carrying the local norm
/// `w_j * |.|_2` on the coordinates it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    d: usize,
    groups: Vec<SupportSet>,
    weights: Vec<f64>,
}

impl GroupStructure {
    /// Fails with [`Error::NotANorm`] when the groups do not cover every
    /// coordinate, since the resulting gauge is then infinite somewhere.
    pub fn new(d: usize, groups: Vec<SupportSet>, weights: Vec<f64>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptySet("group family"));
        }
        check_dim(groups.len(), weights.len())?;
        let mut covered = vec![false; d];
        for (g, w) in groups.iter().zip(&weights) {
            check_dim(d, g.dim())?;
            if g.is_empty() {
                return Err(Error::InvalidInput("empty group".into()));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("group weight {w} is not positive")));
            }
            g.indices().iter().for_each(|&i| covered[i] = true);
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::NotANorm(format!("coordinate {} belongs to no group", i + 1)));
        }
        Ok(GroupStructure { d, groups, weights })
    }

    /// Every support of size exactly `k`, unit weights: the k-support norm.
    pub fn ksupport(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::SparsityOutOfRange { k, d });
        }
        let groups = subsets(d, k)
            .into_iter()
            .map(|s| SupportSet::new(d, s))
            .collect::<Result<Vec<_>>>()?;
        let n = groups.len();
        GroupStructure::new(d, groups, vec![1.0; n])
    }

    /// Every nonempty support of size at most `k`, unit weights. The union
    /// of the groups is the level set `{ l0 <= k }`.
    pub fn up_to(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::SparsityOutOfRange { k, d });
        }
        let mut groups = Vec::new();
        for j in 1..=k {
            for s in subsets(d, j) {
                groups.push(SupportSet::new(d, s)?);
            }
        }
        let n = groups.len();
        GroupStructure::new(d, groups, vec![1.0; n])
    }

    /// Singleton groups: the l1 norm.
    pub fn singletons(d: usize) -> Result<Self> {
        let groups = (0..d).map(|i| SupportSet::new(d, vec![i])).collect::<Result<Vec<_>>>()?;
        GroupStructure::new(d, groups, vec![1.0; d])
    }

    /// One group holding every coordinate: the Euclidean norm.
    pub fn full(d: usize) -> Result<Self> {
        GroupStructure::new(d, vec![SupportSet::full(d)], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn groups(&self) -> &[SupportSet] {
        &self.groups
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Bracket of [`convolution_norm`] with the decomposition attaining the
/// upper end and the dual vector certifying the lower end.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionNorm {
    pub lower: f64,
    pub upper: f64,
    /// One vector of `R^d` per group, supported in the group, summing to `v`.
    pub parts: Vec<Vec<f64>>,
    /// `lower = <v, certificate>` and `dual_sup_norm(certificate) <= 1`.
    pub certificate: Vec<f64>,
    pub iterations: usize,
}

/// Iteration cap of the decomposition solver.
pub const CONVOLUTION_MAX_ITER: usize = 200_000;

/// `min { sum_j w_j |v^j|_2 : sum_j v^j = v, supp(v^j) in group j }`,
/// the largest norm whose restriction to each group is below the local norm.
/// Returns the upper end of [`convolution_norm_bracket`].
pub fn convolution_norm(gs: &GroupStructure, v: &[f64], tol: f64) -> Result<f64> {
    Ok(convolution_norm_bracket(gs, v, tol)?.upper)
}

/// Solves the decomposition program by ADMM on copies of the group parts:
/// a group soft-threshold step per group, then a projection of the copies
/// onto `sum_j v^j = v`, coordinate by coordinate. Stops once the feasible
/// decomposition and the scaled multiplier are within `tol` of each other.
pub fn convolution_norm_bracket(gs: &GroupStructure, v: &[f64], tol: f64) -> Result<ConvolutionNorm> {
    check_dim(gs.d, v.len())?;
    check_finite(v)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    let n = gs.len();
    let vn = norm2(v);
    if vn == 0.0 {
        return Ok(ConvolutionNorm {
            lower: 0.0,
            upper: 0.0,
            parts: vec![vec![0.0; gs.d]; n],
            certificate: vec![0.0; gs.d],
            iterations: 0,
        });
    }
    let mut count = vec![0usize; gs.d];
    for g in &gs.groups {
        g.indices().iter().for_each(|&i| count[i] += 1);
    }
    let support = SupportSet::of(v);
    let single_group = gs
        .groups
        .iter()
        .zip(&gs.weights)
        .enumerate()
        .filter(|(_, (g, _))| support.indices().iter().all(|&i| g.contains(i)))
        .map(|(j, (_, w))| (j, w * vn))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let mut rho = gs.weights.iter().sum::<f64>() / n as f64 / vn;

    let local: Vec<&[usize]> = gs.groups.iter().map(|g| g.indices()).collect();
    // fixed dual candidates: v and its restriction to each group, which are
    // exact when v lives in a single group
    let mut fixed = (0.0, vec![0.0; gs.d]);
    for cand in std::iter::once(v.to_vec()).chain(gs.groups.iter().map(|g| g.project(v))) {
        let dn = dual_sup_norm(gs, &cand)?;
        if dn > 0.0 && dot(v, &cand) / dn > fixed.0 {
            fixed = (dot(v, &cand) / dn, cand.iter().map(|c| c / dn).collect());
        }
    }
    // copies s start at an even split of v, which is feasible
    let mut s: Vec<Vec<f64>> = local.iter().map(|idx| idx.iter().map(|&i| v[i] / count[i] as f64).collect()).collect();
    let mut x = s.clone();
    let mut u: Vec<Vec<f64>> = local.iter().map(|idx| vec![0.0; idx.len()]).collect();
    let mut best: Option<ConvolutionNorm> = None;

    for iter in 1..=CONVOLUTION_MAX_ITER {
        for j in 0..n {
            let a: Vec<f64> = s[j].iter().zip(&u[j]).map(|(sv, uv)| sv - uv).collect();
            let an = norm2(&a);
            let shrink = if an > 0.0 { (1.0 - gs.weights[j] / (rho * an)).max(0.0) } else { 0.0 };
            x[j] = a.iter().map(|c| c * shrink).collect();
        }
        let mut excess = v.to_vec();
        for j in 0..n {
            for (&i, (xv, uv)) in local[j].iter().zip(x[j].iter().zip(&u[j])) {
                excess[i] -= xv + uv;
            }
        }
        let (mut primal_res, mut dual_res) = (0.0, 0.0);
        for j in 0..n {
            for (t, &i) in local[j].iter().enumerate() {
                let next = x[j][t] + u[j][t] + excess[i] / count[i] as f64;
                dual_res += (next - s[j][t]).powi(2);
                s[j][t] = next;
            }
        }
        for j in 0..n {
            for t in 0..u[j].len() {
                let r = x[j][t] - s[j][t];
                primal_res += r * r;
                u[j][t] += r;
            }
        }
        // residual balancing; u is the scaled multiplier, so it rescales with rho
        if iter % 10 == 0 {
            let (pr, dr) = (primal_res.sqrt(), rho * dual_res.sqrt());
            let factor = if pr > 10.0 * dr { 2.0 } else if dr > 10.0 * pr { 0.5 } else { 1.0 };
            if factor != 1.0 {
                rho *= factor;
                u.iter_mut().flatten().for_each(|c| *c /= factor);
            }
        }

        if iter % 10 == 0 || iter == CONVOLUTION_MAX_ITER {
            let mut upper: f64 = s.iter().zip(&gs.weights).map(|(sj, w)| w * norm2(sj)).sum();
            let mut parts: Vec<Vec<f64>> = s.iter().zip(&gs.groups).map(|(sj, g)| g.scatter(sj)).collect();
            if let Some((j, value)) = single_group {
                if value < upper {
                    upper = value;
                    parts = (0..n).map(|i| if i == j { v.to_vec() } else { vec![0.0; gs.d] }).collect();
                }
            }
            let mut lambda = vec![0.0; gs.d];
            for j in 0..n {
                for (&i, uv) in local[j].iter().zip(&u[j]) {
                    lambda[i] -= rho * uv / count[i] as f64;
                }
            }
            let dn = dual_sup_norm(gs, &lambda)?;
            if dn > 0.0 {
                lambda.iter_mut().for_each(|l| *l /= dn);
            }
            if dot(v, &lambda) < fixed.0 {
                lambda.clone_from(&fixed.1);
            }
            let lower = dot(v, &lambda).max(0.0).min(upper);
            let improves = best.as_ref().is_none_or(|b| upper - lower < b.upper - b.lower);
            if improves {
                best = Some(ConvolutionNorm {
                    lower,
                    upper,
                    parts,
                    certificate: lambda,
                    iterations: iter,
                });
            }
            if upper - lower <= tol {
                break;
            }
        }
    }
    let best = best.expect("checked at the last iteration");
    if best.upper - best.lower > tol {
        return Err(Error::NoConvergence { iterations: CONVOLUTION_MAX_ITER, gap: best.upper - best.lower });
    }
    Ok(best)
}

/// Dual of [`convolution_norm`]: `max_j |y_J|_2 / w_j`.
pub fn dual_sup_norm(gs: &GroupStructure, y: &[f64]) -> Result<f64> {
    check_dim(gs.d, y.len())?;
    Ok(gs
        .groups
        .iter()
        .zip(&gs.weights)
        .map(|(g, w)| norm2(&g.gather(y)) / w)
        .fold(0.0, f64::max))
}

/// A subgradient of [`dual_sup_norm`] at `y`: the normalized restriction
/// to the first maximizing group.
fn dual_sup_subgradient(gs: &GroupStructure, y: &[f64]) -> Vec<f64> {
    let mut best = (0.0, None);
    for (j, (g, w)) in gs.groups.iter().zip(&gs.weights).enumerate() {
        let v = norm2(&g.gather(y)) / w;
        if v > best.0 {
            best = (v, Some(j));
        }
    }
    match best.1 {
        Some(j) => {
            let g = &gs.groups[j];
            let n = norm2(&g.gather(y));
            g.scatter(&g.gather(y).iter().map(|c| c / (n * gs.weights[j])).collect::<Vec<_>>())
        }
        None => vec![0.0; y.len()],
    }
}

/// Finite family of symmetric point clouds whose union spans `R^d`; the
/// closed convex hull of the union is the unit ball of a norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFamily {
    d: usize,
    sets: Vec<Vec<Vec<f64>>>,
}

/// Relative singular-value cutoff of the span check.
pub const SPAN_TOL: f64 = 1e-10;

impl PointFamily {
    pub fn new(d: usize, sets: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("point family in dimension 0".into()));
        }
        for set in &sets {
            for p in set {
                check_dim(d, p.len())?;
                check_finite(p)?;
            }
            let twins = |p: &Vec<f64>, q: &Vec<f64>| p.iter().zip(q).all(|(a, b)| a == b);
            for p in set {
                let neg: Vec<f64> = p.iter().map(|c| -c).collect();
                let same = set.iter().filter(|q| twins(q, p)).count();
                let opposite = set.iter().filter(|q| twins(q, &neg)).count();
                if same != opposite {
                    return Err(Error::InvalidInput(format!("point set is not symmetric: {p:?} has no opposite")));
                }
            }
        }
        let all: Vec<&Vec<f64>> = sets.iter().flatten().collect();
        if all.is_empty() {
            return Err(Error::NotANorm("the point family is empty".into()));
        }
        let m = DMatrix::from_fn(d, all.len(), |i, j| all[j][i]);
        let sv = m.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|s| **s > SPAN_TOL * smax).count();
        if rank < d {
            return Err(Error::NotANorm(format!("the points span a subspace of dimension {rank} < {d}")));
        }
        Ok(PointFamily { d, sets })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sets(&self) -> &[Vec<Vec<f64>>] {
        &self.sets
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.sets.iter().flatten()
    }
}

/// Gauge of the convex hull of all points at `v`, from the linear program
/// `min { sum mu : sum mu_i p_i = v, mu >= 0 }`.
pub fn norm_from_point_family(pf: &PointFamily, v: &[f64]) -> Result<f64> {
    check_dim(pf.d, v.len())?;
    check_finite(v)?;
    if v.iter().all(|c| *c == 0.0) {
        return Ok(0.0);
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let points: Vec<&Vec<f64>> = pf.points().collect();
    let vars: Vec<_> = points.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (i, vi) in v.iter().enumerate() {
        let row: Vec<_> = vars
            .iter()
            .zip(&points)
            .filter(|(_, p)| p[i] != 0.0)
            .map(|(var, p)| (*var, p[i]))
            .collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, *vi);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::InvalidInput(format!("gauge linear program failed: {e}")))?;
    Ok(sol.objective())
}

/// Support function of the union of all points, the dual of
/// [`norm_from_point_family`].
pub fn dual_norm_from_point_family(pf: &PointFamily, y: &[f64]) -> Result<f64> {
    check_dim(pf.d, y.len())?;
    Ok(set_support_functions(pf, y)?.into_iter().fold(0.0, f64::max))
}

/// Support function of each point set at `y` (`-inf` for an empty set).
pub fn set_support_functions(pf: &PointFamily, y: &[f64]) -> Result<Vec<f64>> {
    check_dim(pf.d, y.len())?;
    Ok(pf
        .sets
        .iter()
        .map(|set| set.iter().map(|p| dot(p, y)).fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Normalization mapping of the group classes `{ w : supp(w) = J }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaMode {
    /// `w / (w_J |w|_2)`, onto the unit sphere of the local norm.
    #[default]
    LocalNorm,
    /// `w / |w|_2`, ignoring the group weights.
    Euclidean,
}

fn effective_weights(gs: &GroupStructure, mode: ThetaMode) -> Vec<f64> {
    match mode {
        ThetaMode::LocalNorm => gs.weights.clone(),
        ThetaMode::Euclidean => vec![1.0; gs.len()],
    }
}

/// With `disjoint_required`, checks that no two groups coincide, so that the
/// classes of vectors with support exactly equal to a group are pairwise
/// disjoint. Otherwise checks that the normalization mappings agree on
/// overlapping classes, i.e. coinciding groups carry the same weight.
pub fn compatibility_check(gs: &GroupStructure, disjoint_required: bool) -> bool {
    for i in 0..gs.len() {
        for j in i + 1..gs.len() {
            if gs.groups[i] == gs.groups[j] && (disjoint_required || gs.weights[i] != gs.weights[j]) {
                return false;
            }
        }
    }
    true
}

/// Samples each local sphere and checks that every sample is within `1e-6`
/// of the image of a vector with support exactly the group, and that the
/// images stay in the local unit ball.
pub fn normalization_condition_check(gs: &GroupStructure, mode: ThetaMode, samples: usize, seed: u64) -> bool {
    let weights = effective_weights(gs, mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (g, w) in gs.groups.iter().zip(&weights) {
        for _ in 0..samples {
            let raw: Vec<f64> = (0..g.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut u = normalize(&raw);
            if u.iter().all(|c| *c == 0.0) {
                continue;
            }
            u.iter_mut().for_each(|c| *c /= w);
            // a point of the class: fill zero coordinates with tiny values
            let member: Vec<f64> = u.iter().map(|c| if *c == 0.0 { 1e-9 } else { *c }).collect();
            let image: Vec<f64> = normalize(&member).iter().map(|c| c / w).collect();
            let dist = norm2(&image.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dist > 1e-6 || w * norm2(&image) > 1.0 + 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Largest group size accepted by the generic oracle of [`gso_lower_bound`].
pub const GSO_ORACLE_MAX_GROUP: usize = 4;

/// Minimizes `h` over the span of a group by multi-start compass search.
fn minimize_on_group(h: &impl Fn(&[f64]) -> f64, g: &SupportSet, seed: u64) -> (f64, Vec<f64>) {
    let m = g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![vec![0.0; m]];
    for _ in 0..7 {
        starts.push((0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let lifted = |u: &[f64]| h(&g.scatter(u));
    let mut best = (f64::INFINITY, vec![0.0; m]);
    for mut u in starts {
        let mut val = lifted(&u);
        let mut step = 1.0;
        let mut evals = 0;
        while step > 1e-10 && evals < 200_000 {
            let mut moved = false;
            for i in 0..m {
                for dir in [step, -step] {
                    u[i] += dir;
                    let cand = lifted(&u);
                    evals += 1;
                    if cand < val {
                        val = cand;
                        moved = true;
                        break;
                    }
                    u[i] -= dir;
                }
            }
            if moved {
                step *= 2.0;
            } else {
                step *= 0.5;
            }
        }
        if val < best.0 {
            best = (val, u);
        }
    }
    (best.0, g.scatter(&best.1))
}

/// Certified lower bound for `min { h(w) : w = 0 or supp(w) is a group }`.
///
/// Maximizes `-max(-h(0), max_j Psi_j(y)) - sigma(y)` where
/// `Psi_j(y) = sup { <u, y> - inf_{l > 0} h(l u) : u on the normalized sphere of group j }`
/// is bracketed by [`caprac_conjugate`] on the group's coordinates and
/// `sigma` is [`dual_sup_norm`] (unit weights in [`ThetaMode::Euclidean`]).
/// The exact value is the best of `h(0)` and a multi-start local
/// minimization of `h` on each group, so it is exact for convex `h`.
pub fn gso_lower_bound(
    gs: &GroupStructure,
    mode: ThetaMode,
    h: impl Fn(&[f64]) -> f64 + Sync,
    cfg: &DualSearchConfig,
) -> Result<BoundReport> {
    cfg.validate()?;
    if let Some(g) = gs.groups.iter().find(|g| g.len() > GSO_ORACLE_MAX_GROUP) {
        return Err(Error::InvalidInput(format!(
            "group of size {} exceeds the oracle limit {GSO_ORACLE_MAX_GROUP}",
            g.len()
        )));
    }
    let start = Instant::now();
    let d = gs.d;
    let weights = effective_weights(gs, mode);
    let weighted = GroupStructure { d, groups: gs.groups.clone(), weights: weights.clone() };

    let conj = |y: &[f64]| -> Result<ConjugateEval> {
        let mut best = ConjugateEval { upper: f64::NEG_INFINITY, argmax: vec![0.0; d], width: 0.0 };
        let mut best_lower = f64::NEG_INFINITY;
        for (g, w) in gs.groups.iter().zip(&weights) {
            let yj: Vec<f64> = g.gather(y).iter().map(|c| c / w).collect();
            let b = caprac_conjugate(|u: &[f64]| h(&g.scatter(u)), &yj, &cfg.sphere)?;
            best.upper = best.upper.max(b.upper);
            best.width = best.width.max(b.upper - b.lower);
            if b.lower > best_lower {
                best_lower = b.lower;
                best.argmax = g.scatter(&b.argmax.iter().map(|c| c / w).collect::<Vec<_>>());
            }
        }
        Ok(best)
    };
    let at_zero = conj(&vec![0.0; d])?;
    if !at_zero.upper.is_finite() {
        return Err(Error::NotProper("the group conjugates are not finite at 0".into()));
    }

    let (exact_value, exact_support) = gs
        .groups
        .par_iter()
        .enumerate()
        .map(|(j, g)| {
            let (v, x) = minimize_on_group(&h, g, cfg.seed.wrapping_add(j as u64));
            (v, SupportSet::of(&x))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((h(&vec![0.0; d]), SupportSet::empty(d)), |a, b| if b.0 < a.0 { b } else { a });

    let scale = h(&vec![0.0; d]).abs().max(1.0);
    let mut starts = vec![vec![0.0; d]];
    starts.extend(random_starts(d, cfg.starts - 1, scale, cfg.seed));
    let penalty = |y: &[f64]| Ok((dual_sup_norm(&weighted, y)?, dual_sup_subgradient(&weighted, y)));
    let r = ascend(cfg, scale, starts, penalty, |y, _tol| conj(y))?;
    let report = BoundReport {
        dual_value: r.value,
        certificate_y: r.y,
        exact_value,
        exact_support,
        gap: exact_value - r.value,
        inner_sup_tolerance: r.width.max(cfg.inner_tol * scale),
        wallclock: start.elapsed().as_secs_f64(),
    };
    report.validate(d)?;
    Ok(report)
}

/// Group-sparse least squares `min { |z - Aw|^2 : w = 0 or supp(w) is a group }`
/// with the certified sphere suprema of [`LsqSphereSup`] on each group's
/// columns.
pub struct GsoLsq {
    gs: GroupStructure,
    weights: Vec<f64>,
    sups: Vec<LsqSphereSup>,
    z2: f64,
}

impl GsoLsq {
    /// `a` is the `p x d` matrix of a map `R^d -> R^p`.
    pub fn new(gs: &GroupStructure, mode: ThetaMode, a: &DMatrix<f64>, z: &[f64]) -> Result<Self> {
        check_dim(gs.d, a.ncols())?;
        check_dim(a.nrows(), z.len())?;
        check_finite(z)?;
        let sups = gs
            .groups
            .iter()
            .map(|g| LsqSphereSup::new(&a.select_columns(g.indices()), z))
            .collect::<Result<Vec<_>>>()?;
        Ok(GsoLsq { gs: gs.clone(), weights: effective_weights(gs, mode), sups, z2: norm2(z).powi(2) })
    }

    fn conjugate(&self, y: &[f64], tol: f64) -> Result<ConjugateEval> {
        let d = self.gs.d;
        // the class {0} contributes -h(0) = -|z|^2
        let mut best = ConjugateEval { upper: 0.0, argmax: vec![0.0; d], width: 0.0 };
        let mut best_lower = 0.0;
        for ((g, w), sup) in self.gs.groups.iter().zip(&self.weights).zip(&self.sups) {
            let yj: Vec<f64> = g.gather(y).iter().map(|c| c / w).collect();
            let b = sup.certify(&yj, tol)?;
            best.upper = best.upper.max(b.upper);
            best.width = best.width.max(b.gap());
            if b.lower > best_lower {
                best_lower = b.lower;
                best.argmax = g.scatter(&b.argmax.iter().map(|c| c / w).collect::<Vec<_>>());
            }
        }
        best.upper -= self.z2;
        Ok(best)
    }

    fn penalty(&self) -> GroupStructure {
        GroupStructure { d: self.gs.d, groups: self.gs.groups.clone(), weights: self.weights.clone() }
    }

    /// Certified dual objective at one `y`, with the width of the inner
    /// brackets.
    pub fn dual_objective(&self, y: &[f64], tol: f64) -> Result<(f64, f64)> {
        check_dim(self.gs.d, y.len())?;
        let c = self.conjugate(y, tol)?;
        Ok((-c.upper - dual_sup_norm(&self.penalty(), y)?, c.width))
    }
}

/// Certified lower bound for group-sparse least squares, checked against
/// the exact optimum from the normal equations of every group.
pub fn gso_lower_bound_lsq(
    gs: &GroupStructure,
    mode: ThetaMode,
    a: &DMatrix<f64>,
    z: &[f64],
    cfg: &DualSearchConfig,
) -> Result<BoundReport> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = GsoLsq::new(gs, mode, a, z)?;
    let d = gs.d;
    let z2 = problem.z2;

    let mut exact_value = z2;
    let mut exact_support = SupportSet::empty(d);
    for g in &gs.groups {
        let (_, residual) = restricted_lsq(a, z, g.indices());
        if residual < exact_value - 1e-12 * (1.0 + exact_value) {
            exact_value = residual;
            exact_support = g.clone();
        }
    }

    let (value, y, width, scale) = if z2 == 0.0 {
        (0.0, vec![0.0; d], 0.0, 1.0)
    } else {
        let inst = LsqInstance::new(a.clone(), z.to_vec(), d)?;
        let starts = lsq_starts(&inst, cfg.starts, z2, cfg.seed);
        let weighted = problem.penalty();
        let penalty = |y: &[f64]| Ok((dual_sup_norm(&weighted, y)?, dual_sup_subgradient(&weighted, y)));
        let r = ascend(cfg, z2, starts, penalty, |y, tol| problem.conjugate(y, tol))?;
        (r.value, r.y, r.width, z2)
    };
    let report = BoundReport {
        dual_value: value,
        certificate_y: y,
        exact_value,
        exact_support,
        gap: exact_value - value,
        inner_sup_tolerance: width.max(cfg.inner_tol * scale),
        wallclock: start.elapsed().as_secs_f64(),
    };
    report.validate(d)?;
    Ok(report)
}
