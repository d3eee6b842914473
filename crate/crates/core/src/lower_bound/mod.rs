//! Certified lower bounds for `min { f(x) : l0(x) <= k }`.
//!
//! For any `y`, `-f^*(y) - gauge_norm(y, k)` bounds the sparse optimum from
//! below, where `f^*` is the conjugate for the ray-constant coupling of
//! [`crate::caprac`]. The routines here maximize that concave function of `y`
//! and evaluate `f^*` with certified upper ends, so the reported value is a
//! bound and not an estimate.

mod exact;
mod grid;
mod sphere;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::{exact_sparse_lsq, restricted_lsq, ExactSolution, ENUMERATION_LIMIT, SINGULAR_TOL};
pub use grid::{primal_ksupport_grid, primal_ksupport_grid_lsq, GridConfig};
pub use sphere::{LsqSphereSup, SupBracket};

use crate::caprac::{caprac_conjugate, SphereSearchConfig};
use crate::error::{check_dim, Error, Result};
use crate::sparse_norms::{gauge_norm, top_k_indices};
use crate::vector::{check_finite, norm2, SupportSet};

/// Sparse least squares `min { |z - Ax|^2 : l0(x) <= k }` with `A` the
/// `p x d` matrix of a linear map `R^d -> R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsqInstance {
    a: DMatrix<f64>,
    z: Vec<f64>,
    k: usize,
}

impl LsqInstance {
    pub fn new(a: DMatrix<f64>, z: Vec<f64>, k: usize) -> Result<Self> {
        check_dim(a.nrows(), z.len())?;
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::InvalidInput("design matrix has an empty dimension".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design matrix has non-finite entries".into()));
        }
        check_finite(&z)?;
        if k > a.ncols() {
            return Err(Error::SparsityOutOfRange { k, d: a.ncols() });
        }
        Ok(LsqInstance { a, z, k })
    }

    /// Instance with `p x d` standard normal design and target, as drawn by
    /// the batch tools from `seed`.
    pub fn random(d: usize, p: usize, k: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(p, d, |_, _| rng.sample(StandardNormal));
        let z = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        Self::new(a, z, k)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.a.clone(), self.z.clone(), k)
    }

    /// Dimension `d` of the unknown.
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Dimension `p` of the observations.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// `|z - Ax|^2`
    pub fn objective(&self, x: &[f64]) -> f64 {
        let r = DVector::from_column_slice(&self.z) - &self.a * DVector::from_column_slice(x);
        r.norm_squared()
    }

    /// `|z|^2`, the objective at `x = 0`.
    pub fn z_norm2(&self) -> f64 {
        self.z.iter().map(|v| v * v).sum()
    }
}

/// Closed form of `inf_{lambda > 0} |z - lambda A x|^2`:
/// `|z|^2 - <z, Ax>^2 / |Ax|^2` when `<z, Ax> > 0`, and `|z|^2` otherwise
/// (in particular when `Ax = 0`).
pub fn lsq_radial_infimum(inst: &LsqInstance, x: &[f64]) -> f64 {
    let ax = inst.a() * DVector::from_column_slice(x);
    let zax: f64 = ax.iter().zip(inst.z()).map(|(a, b)| a * b).sum();
    let n2 = ax.norm_squared();
    let ratio = if zax > 0.0 && n2 > 0.0 { zax * zax / n2 } else { 0.0 };
    inst.z_norm2() - ratio
}

/// Certified lower bound for a sparse problem, with the exact optimum it is
/// compared to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dual_value: f64,
    pub certificate_y: Vec<f64>,
    pub exact_value: f64,
    pub exact_support: SupportSet,
    pub gap: f64,
    pub inner_sup_tolerance: f64,
    /// Seconds spent computing the report.
    pub wallclock: f64,
}

impl BoundReport {
    /// Checks `dual_value <= exact_value + inner_sup_tolerance`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let ok = self.dual_value.is_finite()
            && self.exact_value.is_finite()
            && self.dual_value <= self.exact_value + self.inner_sup_tolerance;
        if !ok {
            return Err(Error::BoundViolated {
                dual: self.dual_value,
                exact: self.exact_value,
                tol: self.inner_sup_tolerance,
            });
        }
        if self.exact_support.len() > k {
            return Err(Error::InvalidInput(format!(
                "exact support has {} elements, more than k = {k}",
                self.exact_support.len()
            )));
        }
        Ok(())
    }
}

/// Parameters of the dual ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSearchConfig {
    /// Number of ascent starts (structured starts first, then random ones).
    pub starts: usize,
    /// Supergradient steps per start.
    pub iterations: usize,
    /// A start stops after this many steps without improving its best value
    /// by more than the ascent tolerance.
    pub patience: usize,
    /// Initial step, relative to the scale of the objective at `0`.
    pub step: f64,
    /// Tolerance of the final certified inner supremum, relative to the same
    /// scale.
    pub inner_tol: f64,
    /// Tolerance of the inner supremum during the ascent.
    pub ascent_tol: f64,
    pub seed: u64,
    /// Sphere search used by the generic bound; its `lipschitz` field bounds
    /// the Lipschitz constant of the radial infimum of `f`.
    pub sphere: SphereSearchConfig,
}

impl Default for DualSearchConfig {
    fn default() -> Self {
        DualSearchConfig {
            starts: 16,
            iterations: 500,
            patience: 50,
            step: 0.5,
            inner_tol: 1e-9,
            ascent_tol: 1e-5,
            seed: 42,
            sphere: SphereSearchConfig::new(8, 0.0),
        }
    }
}

impl DualSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidConfig("at least one ascent start is needed".into()));
        }
        for (name, v) in [("step", self.step), ("inner_tol", self.inner_tol), ("ascent_tol", self.ascent_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// A subgradient of `gauge_norm(., k)` at `y`.
fn gauge_subgradient(y: &[f64], k: usize) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    let top = top_k_indices(y, k);
    let n = top.iter().map(|&i| y[i] * y[i]).sum::<f64>().sqrt();
    if n > 0.0 {
        for &i in &top {
            g[i] = y[i] / n;
        }
    }
    g
}

/// Outcome of one conjugate evaluation: a certified upper end of `f^*(y)`,
/// the point attaining the lower end (a supergradient of `-f^*`), and the
/// width of the bracket.
pub(crate) struct ConjugateEval {
    pub upper: f64,
    pub argmax: Vec<f64>,
    pub width: f64,
}

pub(crate) struct AscentResult {
    pub value: f64,
    pub y: Vec<f64>,
    pub width: f64,
}

/// Diminishing-step supergradient ascent of `y -> -f^*(y) - penalty(y)`
/// from each start, in parallel. `penalty` returns its value and a
/// subgradient. The best iterate of every start is re-evaluated with the
/// final tolerance and the best of those wins (lowest start index on ties).
pub(crate) fn ascend(
    cfg: &DualSearchConfig,
    scale: f64,
    starts: Vec<Vec<f64>>,
    penalty: impl Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
    eval: impl Fn(&[f64], f64) -> Result<ConjugateEval> + Sync,
) -> Result<AscentResult> {
    let objective = |y: &[f64], tol: f64| -> Result<(f64, Vec<f64>, ConjugateEval)> {
        let c = eval(y, tol)?;
        let (p, sub) = penalty(y)?;
        Ok((-c.upper - p, sub, c))
    };
    let runs: Vec<Result<(f64, Vec<f64>)>> = starts
        .par_iter()
        .map(|start| {
            let mut y = start.clone();
            let (mut value, mut sub, mut c) = objective(&y, cfg.ascent_tol * scale)?;
            let mut best = (value, y.clone());
            let mut stale = 0;
            for t in 0..cfg.iterations {
                let g: Vec<f64> = sub.iter().zip(&c.argmax).map(|(s, x)| -s - x).collect();
                let gn = norm2(&g);
                if gn == 0.0 {
                    break;
                }
                let alpha = cfg.step * scale / ((t + 1) as f64).sqrt();
                y.iter_mut().zip(&g).for_each(|(yi, gi)| *yi += alpha * gi / gn);
                (value, sub, c) = objective(&y, cfg.ascent_tol * scale)?;
                stale += 1;
                if value > best.0 {
                    if value > best.0 + cfg.ascent_tol * scale {
                        stale = 0;
                    }
                    best = (value, y.clone());
                }
                if stale >= cfg.patience {
                    break;
                }
            }
            Ok(best)
        })
        .collect();
    let candidates = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let finals = candidates
        .par_iter()
        .map(|(_, y)| objective(y, cfg.inner_tol * scale))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for i in 1..finals.len() {
        if finals[i].0 > finals[best].0 {
            best = i;
        }
    }
    let (value, _, c) = &finals[best];
    let (value, y) = (*value, candidates[best].1.clone());
    Ok(AscentResult { value, y, width: c.width })
}

pub(crate) fn random_starts(d: usize, count: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
            (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect()
        })
        .collect()
}

/// Certified lower bound for `min { f(x) : l0(x) <= k }` over `R^d` for a
/// generic objective, with the conjugate bracketed by
/// [`caprac_conjugate`]. Returns the bound and the dual point certifying it.
///
/// `cfg.sphere.lipschitz` must bound the Lipschitz constant on the unit
/// sphere of `x -> inf_{lambda > 0} f(lambda x)`; the bound is only as
/// trustworthy as that constant.
pub fn dual_lower_bound_l0(
    f: impl Fn(&[f64]) -> f64 + Sync,
    d: usize,
    k: usize,
    cfg: &DualSearchConfig,
) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    if k > d {
        return Err(Error::SparsityOutOfRange { k, d });
    }
    let zero = vec![0.0; d];
    let scale = f(&zero).abs().max(1.0);
    let mut starts = vec![zero];
    starts.extend(random_starts(d, cfg.starts - 1, scale, cfg.seed));
    let penalty = |y: &[f64]| Ok((gauge_norm(y, k)?, gauge_subgradient(y, k)));
    let result = ascend(cfg, scale, starts, penalty, |y, _tol| {
        let b = caprac_conjugate(&f, y, &cfg.sphere)?;
        Ok(ConjugateEval { upper: b.upper, width: b.upper - b.lower, argmax: b.argmax })
    })?;
    Ok((result.value, result.y))
}

/// Certified value `|z|^2 - Phi_upper(y) - gauge_norm(y, k)` of the
/// least-squares dual objective at one `y`, with the width of the inner
/// bracket.
pub fn lsq_dual_objective(inst: &LsqInstance, y: &[f64], tol: f64) -> Result<(f64, f64)> {
    let sup = LsqSphereSup::new(inst.a(), inst.z())?;
    let b = sup.certify(y, tol)?;
    Ok((inst.z_norm2() - b.upper.max(0.0) - gauge_norm(y, inst.k())?, b.gap()))
}

/// Starts used by the least-squares ascent: `0`, scaled opposites of
/// `A^T z` and of the least-squares solution, then random points.
pub(crate) fn lsq_starts(inst: &LsqInstance, count: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let d = inst.dim();
    let b = inst.a().transpose() * DVector::from_column_slice(inst.z());
    let (x_ls, _) = restricted_lsq(inst.a(), inst.z(), &(0..d).collect::<Vec<_>>());
    let mut starts = vec![vec![0.0; d]];
    for dir in [b.iter().copied().collect::<Vec<_>>(), x_ls] {
        let n = norm2(&dir);
        if n == 0.0 {
            continue;
        }
        for s in [0.25, 0.5, 1.0, 2.0] {
            starts.push(dir.iter().map(|v| -s * scale * v / n).collect());
        }
    }
    starts.truncate(count);
    let missing = count - starts.len();
    starts.extend(random_starts(d, missing, scale, seed));
    starts
}

/// Certified lower bound for sparse least squares, checked against the
/// exhaustive optimum.
///
/// The conjugate is `Phi(y) - |z|^2` with `Phi` the sphere supremum of
/// [`LsqSphereSup`]; its upper end enters the dual objective, so the bound
/// holds whatever the quality of the ascent.
pub fn dual_lower_bound_lsq(inst: &LsqInstance, cfg: &DualSearchConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let start = Instant::now();
    let exact = exact_sparse_lsq(inst)?;
    let z2 = inst.z_norm2();
    let k = inst.k();
    let (value, y, width, scale) = if z2 == 0.0 {
        // f(x) = |Ax|^2 >= 0 = f(0)
        (0.0, vec![0.0; inst.dim()], 0.0, 1.0)
    } else {
        let sup = LsqSphereSup::new(inst.a(), inst.z())?;
        let starts = lsq_starts(inst, cfg.starts, z2, cfg.seed);
        let penalty = |y: &[f64]| Ok((gauge_norm(y, k)?, gauge_subgradient(y, k)));
        let r = ascend(cfg, z2, starts, penalty, |y, tol| {
            let b = sup.certify(y, tol)?;
            Ok(ConjugateEval { upper: b.upper.max(0.0) - z2, width: b.gap(), argmax: b.argmax })
        })?;
        (r.value, r.y, r.width, z2)
    };
    let report = BoundReport {
        dual_value: value,
        certificate_y: y,
        exact_value: exact.value,
        exact_support: exact.support,
        gap: exact.value - value,
        inner_sup_tolerance: width.max(cfg.inner_tol * scale),
        wallclock: start.elapsed().as_secs_f64(),
    };
    report.validate(k)?;
    Ok(report)
}
