//! Primal side of the sparse bound at toy dimension: minimize the
//! biconjugate of `f^*` over the k-support unit ball, all on dense grids.

use rayon::prelude::*;

use super::{LsqInstance, LsqSphereSup};
use crate::conjugacy::SampledSpace;
use crate::error::{Error, Result};
use crate::sparse_norms::ksupport_norm;
use crate::vector::dot;

/// Grids of [`primal_ksupport_grid`]: the dual grid covers `[-radius, radius]^d`
/// and the primal grid `[-1, 1]^d`, both with the given spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub spacing: f64,
    pub dual_radius: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { spacing: 0.05, dual_radius: 2.0 }
    }
}

/// Largest dimension accepted by the dense grids.
pub const GRID_MAX_DIM: usize = 3;

fn axis_nodes(radius: f64, spacing: f64) -> usize {
    (2.0 * radius / spacing).round() as usize + 1
}

/// `min { g^*(x) : ksupport_norm(x, k) <= 1 }` with `g = f^*` tabulated by
/// `conj` on the dual grid and `g^*` computed on the primal grid.
///
/// Refuses (with [`Error::NotProper`]) when the tabulated conjugate is
/// `+inf` everywhere or takes the value `-inf`.
pub fn primal_ksupport_grid(
    conj: impl Fn(&[f64]) -> Result<f64> + Sync,
    d: usize,
    k: usize,
    grid: &GridConfig,
) -> Result<f64> {
    if d == 0 || d > GRID_MAX_DIM {
        return Err(Error::InvalidInput(format!("grid biconjugation needs 1 <= d <= {GRID_MAX_DIM}, got {d}")));
    }
    if k == 0 || k > d {
        return Err(Error::SparsityOutOfRange { k, d });
    }
    if !(grid.spacing > 0.0 && grid.dual_radius > 0.0 && grid.spacing <= grid.dual_radius) {
        return Err(Error::InvalidInput("degenerate grid".into()));
    }
    let dual = SampledSpace::grid(d, -grid.dual_radius, grid.spacing, axis_nodes(grid.dual_radius, grid.spacing))?;
    let table = dual
        .points()
        .par_iter()
        .map(|y| conj(y))
        .collect::<Result<Vec<f64>>>()?;
    if table.iter().any(|v| *v == f64::NEG_INFINITY || v.is_nan()) {
        return Err(Error::NotProper("conjugate takes the value -inf".into()));
    }
    if table.iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::NotProper("conjugate is +inf on the whole grid".into()));
    }

    let primal = SampledSpace::grid(d, -1.0, grid.spacing, axis_nodes(1.0, grid.spacing))?;
    let values = primal
        .points()
        .par_iter()
        .map(|x| -> Result<Option<f64>> {
            if ksupport_norm(x, k)? > 1.0 + 1e-12 {
                return Ok(None);
            }
            let bic = dual
                .points()
                .iter()
                .zip(&table)
                .filter(|(_, g)| g.is_finite())
                .map(|(y, g)| dot(x, y) - g)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Some(bic))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().flatten().fold(f64::INFINITY, f64::min))
}

/// [`primal_ksupport_grid`] for sparse least squares, with the conjugate
/// `max(Phi(y), 0) - |z|^2` evaluated at the upper end of its certified
/// bracket.
pub fn primal_ksupport_grid_lsq(inst: &LsqInstance, grid: &GridConfig) -> Result<f64> {
    let sup = LsqSphereSup::new(inst.a(), inst.z())?;
    let z2 = inst.z_norm2();
    let tol = 1e-9 * z2.max(1.0);
    primal_ksupport_grid(
        |y| Ok(sup.certify(y, tol)?.upper.max(0.0) - z2),
        inst.dim(),
        inst.k(),
        grid,
    )
}
