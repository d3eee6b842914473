//! The coupling `<x/|x|, y>` (zero at `x = 0`), which is constant along
//! primal rays, its conjugates, and the closed forms it gives for the `l0`
//! pseudonorm and its level sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::sparse_norms::{gauge_norm, l0};
use crate::vector::{check_finite, dot, norm2};

/// Tolerance on `|x| = 1` for arguments expected on the unit sphere.
pub const UNIT_TOL: f64 = 1e-12;

/// `<x, y> / |x|` for `x != 0`, and `0` at `x = 0`.
pub fn caprac_coupling(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = norm2(x);
    if n == 0.0 {
        0.0
    } else {
        dot(x, y) / n
    }
}

/// `x / |x|`, or `0` at `x = 0`.
pub fn normalize(x: &[f64]) -> Vec<f64> {
    let n = norm2(x);
    if n == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v / n).collect()
    }
}

/// Search parameters for `inf_{lambda > 0} f(lambda x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Relative tolerance of the golden-section search in `lambda`.
    pub tol: f64,
}

impl Default for RadialProfile {
    fn default() -> Self {
        RadialProfile { lambda_min: 1e-8, lambda_max: 1e8, tol: 1e-10 }
    }
}

impl RadialProfile {
    pub fn new(lambda_min: f64, lambda_max: f64, tol: f64) -> Result<Self> {
        let p = RadialProfile { lambda_min, lambda_max, tol };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_max.is_finite() && self.lambda_max > self.lambda_min) {
            return Err(Error::InvalidConfig(format!(
                "radial bracket ({}, {}) must satisfy 0 < min < max < inf",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("radial tolerance must be positive".into()));
        }
        Ok(())
    }
}

const PRESCAN: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn eval(f: &impl Fn(&[f64]) -> f64, x: &[f64], lambda: f64) -> f64 {
    let v = f(&x.iter().map(|c| c * lambda).collect::<Vec<_>>());
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Approximates `inf_{lambda > 0} f(lambda x)` for `x` on the unit sphere
/// (or `x = 0`, where `f(0)` is returned).
///
/// 64 log-spaced values of `lambda` are scanned over the profile bracket,
/// then a golden-section search refines around the best one. The result is
/// the smallest value of `f` actually evaluated, so it never undershoots
/// the true infimum.
pub fn radial_infimum(f: impl Fn(&[f64]) -> f64, x: &[f64], profile: &RadialProfile) -> Result<f64> {
    profile.validate()?;
    let n = norm2(x);
    if n == 0.0 {
        return Ok(eval(&f, x, 0.0));
    }
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidInput(format!("direction has norm {n}, expected 1")));
    }
    let (lo, hi) = (profile.lambda_min.ln(), profile.lambda_max.ln());
    let grid: Vec<f64> = (0..PRESCAN)
        .map(|i| (lo + (hi - lo) * i as f64 / (PRESCAN - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&l| eval(&f, x, l)).collect();
    let mut best_i = 0;
    for i in 1..PRESCAN {
        if values[i] < values[best_i] {
            best_i = i;
        }
    }
    let mut best = values[best_i];
    if !best.is_finite() {
        return Ok(best);
    }

    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(PRESCAN - 1)];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&f, x, c);
    let mut fd = eval(&f, x, d);
    while b - a > profile.tol * (1.0 + a) {
        best = best.min(fc).min(fd);
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&f, x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&f, x, d);
        }
    }
    Ok(best.min(fc).min(fd))
}

/// Configuration of the sphere search behind [`caprac_conjugate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSearchConfig {
    /// Grid divisions per face of the cube `[-1, 1]^d` whose radial
    /// projection samples the sphere.
    pub divisions: usize,
    /// Pattern-search sweeps applied to the best mesh points.
    pub refine_iters: usize,
    /// Number of mesh points that get refined.
    pub refine_points: usize,
    /// Lipschitz constant of `x -> inf_lambda f(lambda x)` on the sphere.
    /// The linear part `<x, y>` adds `|y|`, which is accounted for
    /// internally.
    pub lipschitz: f64,
    pub profile: RadialProfile,
}

impl SphereSearchConfig {
    pub fn new(divisions: usize, lipschitz: f64) -> Self {
        SphereSearchConfig {
            divisions,
            refine_iters: 50,
            refine_points: 8,
            lipschitz,
            profile: RadialProfile::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.divisions == 0 {
            return Err(Error::InvalidConfig("sphere mesh needs at least one division".into()));
        }
        if !(self.lipschitz >= 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::InvalidConfig("Lipschitz bound must be nonnegative and finite".into()));
        }
        self.profile.validate()
    }
}

/// Largest sphere mesh accepted by [`sphere_mesh`].
pub const MESH_LIMIT: usize = 5_000_000;

/// Radially projected surface grid of the cube `[-1, 1]^d` with `n`
/// divisions per axis. Every point of the unit sphere lies within
/// [`mesh_radius`]`(d, n)` of a mesh point, and the mesh is symmetric.
pub fn sphere_mesh(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidInput("degenerate sphere mesh".into()));
    }
    let total = (n + 1)
        .checked_pow(d as u32)
        .filter(|t| *t <= 4 * MESH_LIMIT)
        .ok_or(Error::InvalidConfig(format!("sphere mesh with {n} divisions in dimension {d} is too large")))?;
    let surface = total - (n - 1).pow(d as u32);
    if surface > MESH_LIMIT {
        return Err(Error::InvalidConfig(format!(
            "sphere mesh of {surface} points exceeds the limit of {MESH_LIMIT}"
        )));
    }
    let mut mesh = Vec::with_capacity(surface);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        if idx.iter().any(|&i| i == 0 || i == n) {
            let p: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * i as f64 / n as f64).collect();
            mesh.push(normalize(&p));
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot <= n {
                break;
            }
            *slot = 0;
        }
    }
    Ok(mesh)
}

/// Covering radius of [`sphere_mesh`]`(d, n)`. Each cube-surface point is
/// within `sqrt(d-1)/n` of a grid node on its face, and the radial
/// projection is 1-Lipschitz outside the open unit ball.
pub fn mesh_radius(d: usize, n: usize) -> f64 {
    ((d.max(1) - 1) as f64).sqrt() / n as f64
}

/// Two-sided bracket of a conjugate value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateBracket {
    /// Best value found; always attained by an actual point.
    pub lower: f64,
    /// Lipschitz-mesh certificate: `lower <= true value <= upper`.
    pub upper: f64,
    /// The point attaining `lower` (on the sphere, or `0`).
    pub argmax: Vec<f64>,
}

/// Rotates `x` by `angle` in the coordinate plane `(i, j)`.
fn rotate(x: &[f64], i: usize, j: usize, angle: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = x.to_vec();
    out[i] = c * x[i] - s * x[j];
    out[j] = s * x[i] + c * x[j];
    out
}

/// Maximizes `phi` on the unit sphere by Givens-rotation pattern search from
/// `start`. Returns the best value and point.
fn rotation_search(
    phi: &impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    value: f64,
    initial_angle: f64,
    sweeps: usize,
) -> (f64, Vec<f64>) {
    let d = start.len();
    let (mut x, mut best) = (start, value);
    let mut angle = initial_angle;
    for _ in 0..sweeps {
        let mut improved = false;
        for i in 0..d {
            for j in i + 1..d {
                for a in [angle, -angle] {
                    let cand = normalize(&rotate(&x, i, j, a));
                    let v = phi(&cand);
                    if v > best {
                        best = v;
                        x = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            angle *= 0.5;
            if angle < 1e-12 {
                break;
            }
        }
    }
    (best, x)
}

/// Brackets the conjugate of `f` for the ray-constant coupling:
///
/// `f^*(y) = max( -f(0), sup_{|x| = 1} [ <x, y> - inf_{lambda > 0} f(lambda x) ] )`.
///
/// The sphere is sampled by [`sphere_mesh`], the best points are refined by
/// pattern search, and the upper end adds `(lipschitz + |y|) * mesh_radius`
/// plus the radial tolerance to the best mesh value.
pub fn caprac_conjugate(
    f: impl Fn(&[f64]) -> f64 + Sync,
    y: &[f64],
    cfg: &SphereSearchConfig,
) -> Result<ConjugateBracket> {
    cfg.validate()?;
    check_finite(y)?;
    let d = y.len();
    let mesh = sphere_mesh(d, cfg.divisions)?;
    let phi = |x: &[f64]| -> f64 {
        match radial_infimum(&f, x, &cfg.profile) {
            Ok(r) => dot(x, y) - r,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let values: Vec<f64> = mesh.par_iter().map(|x| phi(x)).collect();

    let at_zero = -eval(&f, y, 0.0);
    let mut order: Vec<usize> = (0..mesh.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mesh_best = values[order[0]];

    let radius = mesh_radius(d, cfg.divisions);
    let starts: Vec<usize> = order.iter().take(cfg.refine_points).copied().collect();
    let refined: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|&i| {
            if values[i].is_finite() {
                rotation_search(&phi, mesh[i].clone(), values[i], radius.max(1e-3), cfg.refine_iters)
            } else {
                (values[i], mesh[i].clone())
            }
        })
        .collect();

    let mut lower = at_zero;
    let mut argmax = vec![0.0; d];
    for (v, x) in refined {
        if v > lower {
            lower = v;
            argmax = x;
        }
    }
    let upper = at_zero.max(mesh_best + (cfg.lipschitz + norm2(y)) * radius + cfg.profile.tol).max(lower);
    Ok(ConjugateBracket { lower, upper, argmax })
}

/// Conjugate of the characteristic function of `{ l0 <= k }`, which is the
/// top-k gauge norm.
pub fn delta_levelset_conjugate(y: &[f64], k: usize) -> Result<f64> {
    gauge_norm(y, k)
}

/// Conjugate of `l0`: `max_{l = 0..d} [ gauge_norm(y, l) - l ]`.
pub fn l0_conjugate(y: &[f64]) -> f64 {
    let mut sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    sq.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    let mut acc = 0.0;
    for (l, s) in sq.iter().enumerate() {
        acc += s;
        best = best.max(acc.sqrt() - (l + 1) as f64);
    }
    best
}

/// `<x/|x|, y> - l0_conjugate(y)`, the quantity maximized over `y` by the
/// biconjugate of `l0`.
pub fn l0_biconjugate_objective(x: &[f64], y: &[f64]) -> f64 {
    caprac_coupling(x, y) - l0_conjugate(y)
}

/// Configuration of [`l0_biconjugate_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    /// Random restarts on top of the structured directions.
    pub starts: usize,
    /// Pattern-search sweeps per start.
    pub iterations: usize,
    /// Points of the log-spaced scale grid.
    pub grid_points: usize,
    /// Largest scale on the grid.
    pub t_max: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig { starts: 8, iterations: 200, grid_points: 400, t_max: 1e3, seed: 42 }
    }
}

impl AscentConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 2 || !(self.t_max > 1.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig("scale grid needs 2 points and t_max > 1".into()));
        }
        Ok(())
    }
}

/// Coordinate pattern search maximizing `obj` from `start`.
fn coordinate_ascent(obj: &impl Fn(&[f64]) -> f64, start: Vec<f64>, step: f64, sweeps: usize) -> f64 {
    let mut y = start;
    let mut best = obj(&y);
    let mut step = step;
    for _ in 0..sweeps {
        let mut improved = false;
        for i in 0..y.len() {
            for s in [step, -step] {
                y[i] += s;
                let v = obj(&y);
                if v > best {
                    best = v;
                    improved = true;
                } else {
                    y[i] -= s;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    best
}

/// Lower estimate of the biconjugate of `l0` at `x`:
/// `sup_y [ <x/|x|, y> - l0_conjugate(y) ]`.
///
/// Tries `y = t * d` for a log grid of scales `t` and structured directions
/// `d` (signs and values of `x` on its top-j supports), then random restarts
/// refined by coordinate pattern search. Every candidate is an actual value
/// of the objective, so the estimate stays below the true biconjugate,
/// which is `l0(x)`.
pub fn l0_biconjugate_estimate(x: &[f64], cfg: &AscentConfig) -> Result<f64> {
    cfg.validate()?;
    check_finite(x)?;
    let d = x.len();
    let obj = |y: &[f64]| l0_biconjugate_objective(x, y);
    let m = l0(x);
    let scales: Vec<f64> = (0..cfg.grid_points)
        .map(|i| (1e-2f64.ln() + (cfg.t_max.ln() - 1e-2f64.ln()) * i as f64 / (cfg.grid_points - 1) as f64).exp())
        .collect();

    let mut directions = Vec::new();
    for j in 1..=m {
        let support = crate::sparse_norms::top_k_indices(x, j);
        let mut signs = vec![0.0; d];
        let mut values = vec![0.0; d];
        for &i in &support {
            signs[i] = x[i].signum();
            values[i] = x[i];
        }
        directions.push(signs);
        directions.push(normalize(&values));
    }
    let structured = directions
        .par_iter()
        .map(|dir| {
            scales
                .iter()
                .map(|&t| obj(&dir.iter().map(|v| v * t).collect::<Vec<_>>()))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<_>>();

    let random = (0..cfg.starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64));
            let scale = 1.0 + (m.max(1) as f64).sqrt() * rng.random::<f64>() * 4.0;
            let y0: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
            coordinate_ascent(&obj, y0, scale * 0.5, cfg.iterations)
        })
        .collect::<Vec<_>>();

    Ok(structured
        .into_iter()
        .chain(random)
        .fold(obj(&vec![0.0; d]), f64::max))
}

/// Checks that `x` lies on the unit sphere (or is zero) and has dimension `d`.
pub fn check_direction(x: &[f64], d: usize) -> Result<()> {
    check_dim(d, x.len())?;
    let n = norm2(x);
    if n != 0.0 && (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidInput(format!("direction has norm {n}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_examples() {
        assert_eq!(caprac_coupling(&[0.0, 0.0], &[5.0, -1.0]), 0.0);
        assert_eq!(caprac_coupling(&[2.0, 0.0], &[3.0, 1.0]), 3.0);
        let x = [0.3, -1.2, 0.7];
        let y = [1.0, 2.0, -0.5];
        let scaled: Vec<f64> = x.iter().map(|v| v * 7.3).collect();
        assert!((caprac_coupling(&scaled, &y) - caprac_coupling(&x, &y)).abs() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(normalize(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(normalize(&[0.0, 1.0, 0.0]), vec![0.0, 1.0, 0.0]);
    }

    fn dist_to(z: [f64; 2]) -> impl Fn(&[f64]) -> f64 {
        move |v: &[f64]| (z[0] - v[0]).powi(2) + (z[1] - v[1]).powi(2)
    }

    #[test]
    fn radial_infimum_examples() {
        let p = RadialProfile::default();
        let f = dist_to([1.0, 0.0]);
        assert!(radial_infimum(&f, &[1.0, 0.0], &p).unwrap().abs() < 1e-12);
        assert!((radial_infimum(&f, &[0.0, 1.0], &p).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(radial_infimum(|_: &[f64]| 2.5, &[0.6, 0.8], &p).unwrap(), 2.5);
        assert_eq!(radial_infimum(&f, &[0.0, 0.0], &p).unwrap(), 1.0);
        assert!(radial_infimum(&f, &[2.0, 0.0], &p).is_err());
    }

    #[test]
    fn radial_infimum_finds_interior_minimum() {
        // f(lambda x) = (lambda - 3.7)^2 + 1 along x = e2
        let f = |v: &[f64]| (v[1] - 3.7).powi(2) + 1.0 + v[0] * v[0];
        let r = radial_infimum(f, &[0.0, 1.0], &RadialProfile::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_is_symmetric_and_covers() {
        let mesh = sphere_mesh(3, 4).unwrap();
        assert_eq!(mesh.len(), 5usize.pow(3) - 3usize.pow(3));
        for p in &mesh {
            assert!((norm2(p) - 1.0).abs() < 1e-12);
            let q: Vec<f64> = p.iter().map(|v| -v).collect();
            assert!(mesh.iter().any(|m| m.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-15)));
        }
        let r = mesh_radius(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = normalize(&(0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>());
            let nearest = mesh
                .iter()
                .map(|m| norm2(&crate::vector::sub(m, &x)))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= r + 1e-12);
        }
    }

    #[test]
    fn conjugate_of_zero_is_euclidean_norm() {
        let y = [0.3, -1.1, 0.4];
        let cfg = SphereSearchConfig::new(8, 0.0);
        let b = caprac_conjugate(|_: &[f64]| 0.0, &y, &cfg).unwrap();
        assert!(b.lower <= norm2(&y) + 1e-12);
        assert!(b.upper >= norm2(&y));
        assert!(norm2(&y) - b.lower < 1e-8);
    }

    #[test]
    fn conjugate_rejects_bad_config() {
        let f = |_: &[f64]| 0.0;
        assert!(caprac_conjugate(f, &[1.0], &SphereSearchConfig::new(0, 1.0)).is_err());
        assert!(caprac_conjugate(f, &[1.0], &SphereSearchConfig::new(4, -1.0)).is_err());
        assert!(caprac_conjugate(f, &[1.0], &SphereSearchConfig::new(4, f64::NAN)).is_err());
    }

    #[test]
    fn l0_conjugate_examples() {
        assert_eq!(l0_conjugate(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(l0_conjugate(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(l0_conjugate(&[2.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn levelset_conjugate_examples() {
        assert_eq!(delta_levelset_conjugate(&[3.0, -4.0, 0.0], 1).unwrap(), 4.0);
        assert_eq!(delta_levelset_conjugate(&[3.0, -4.0, 0.0], 0).unwrap(), 0.0);
        assert_eq!(delta_levelset_conjugate(&[3.0, -4.0, 0.0], 3).unwrap(), 5.0);
    }

    #[test]
    fn biconjugate_examples() {
        let cfg = AscentConfig::default();
        assert_eq!(l0_biconjugate_estimate(&[0.0, 0.0, 0.0], &cfg).unwrap(), 0.0);
        let v = l0_biconjugate_estimate(&[1.0, 1.0, 0.0], &cfg).unwrap();
        assert!((2.0 - 1e-3..=2.0 + 1e-9).contains(&v), "{v}");
    }
}
