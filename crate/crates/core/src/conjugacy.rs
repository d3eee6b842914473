//! Fenchel-Moreau conjugacy for arbitrary couplings on finite sampled spaces.
//!
//! Every supremum and infimum here ranges over a finite index set, so all
//! values are exact maxima and minima of [`ExtReal`]s. Conjugates use the
//! Moreau lower addition (a `-inf` term never wins a supremum); the primal
//! side of the weak duality inequality uses the upper addition.
//!
//! Ties in argmax/argmin are resolved in favour of the lowest index.

use crate::error::{check_dim, Error, Result};
use crate::extreal::{ExtReal, NegInf, PosInf};
use crate::vector::dot;

/// A finite, duplicate-free set of points of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpace {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl SampledSpace {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet("sampled space"))?;
        let dim = first.len();
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite sample point".into()));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::InvalidInput(format!("duplicate sample point at index {i}")));
            }
        }
        Ok(SampledSpace { dim, points })
    }

    /// The regular grid `{lo + i*step}^d` with `n` nodes per axis.
    pub fn grid(dim: usize, lo: f64, step: f64, n: usize) -> Result<Self> {
        if dim == 0 || n == 0 || !(step > 0.0) {
            return Err(Error::InvalidInput("degenerate grid".into()));
        }
        let total = n.checked_pow(dim as u32).ok_or(Error::InvalidInput("grid too large".into()))?;
        let mut points = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut p = vec![0.0; dim];
            for c in p.iter_mut() {
                *c = lo + (code % n) as f64 * step;
                code /= n;
            }
            points.push(p);
        }
        Ok(SampledSpace { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Index of a point, by exact equality.
    pub fn index_of(&self, p: &[f64]) -> Option<usize> {
        self.points.iter().position(|q| q.as_slice() == p)
    }
}

/// Coupling values `c(x_i, y_j)` between a primal and a dual sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    rows: usize,
    cols: usize,
    values: Vec<ExtReal>,
}

impl CouplingTable {
    /// Row-major table: entry `(i, j)` is `values[i * cols + j]`.
    pub fn new(rows: usize, cols: usize, values: Vec<ExtReal>) -> Result<Self> {
        check_dim(rows * cols, values.len())?;
        Ok(CouplingTable { rows, cols, values })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExtReal) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        CouplingTable { rows, cols, values }
    }

    /// The Fenchel coupling `<x, y>`.
    pub fn bilinear(primal: &SampledSpace, dual: &SampledSpace) -> Result<Self> {
        check_dim(primal.dim(), dual.dim())?;
        Ok(Self::from_fn(primal.len(), dual.len(), |i, j| {
            ExtReal::new(dot(primal.point(i), dual.point(j)))
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> ExtReal {
        self.values[i * self.cols + j]
    }

    /// The coupling `-c`.
    pub fn negated(&self) -> Self {
        CouplingTable {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| -*v).collect(),
        }
    }

    /// The reverse coupling `c'(y, x) = c(x, y)`.
    pub fn transposed(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, i| self.get(i, j))
    }
}

/// An extended-real-valued function on a sampled space, one value per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtFunction {
    values: Vec<ExtReal>,
}

impl ExtFunction {
    pub fn new(values: Vec<ExtReal>) -> Self {
        ExtFunction { values }
    }

    pub fn from_f64(values: &[f64]) -> Self {
        ExtFunction { values: values.iter().map(|v| ExtReal::new(*v)).collect() }
    }

    pub fn constant(n: usize, v: ExtReal) -> Self {
        ExtFunction { values: vec![v; n] }
    }

    /// Characteristic function: `0` where `mask` holds, `+inf` elsewhere.
    pub fn indicator(mask: &[bool]) -> Self {
        ExtFunction {
            values: mask.iter().map(|&m| if m { ExtReal::ZERO } else { PosInf }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> ExtReal {
        self.values[i]
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    /// Minimum value and its lowest minimizing index.
    pub fn argmin(&self) -> Option<(usize, ExtReal)> {
        let mut best: Option<(usize, ExtReal)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        best
    }

    /// Maximum value and its lowest maximizing index.
    pub fn argmax(&self) -> Option<(usize, ExtReal)> {
        let mut best: Option<(usize, ExtReal)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    }

    pub fn min(&self) -> ExtReal {
        self.argmin().map_or(PosInf, |(_, v)| v)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &ExtFunction) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

/// A map `theta` from the points of a sampled space into `R^d`, possibly
/// undefined outside the effective domain of the function it is used with.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMapping {
    dim: usize,
    images: Vec<Option<Vec<f64>>>,
}

impl ThetaMapping {
    pub fn new(dim: usize, images: Vec<Option<Vec<f64>>>) -> Result<Self> {
        for img in images.iter().flatten() {
            check_dim(dim, img.len())?;
        }
        Ok(ThetaMapping { dim, images })
    }

    pub fn total(dim: usize, images: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(dim, images.into_iter().map(Some).collect())
    }

    pub fn identity(space: &SampledSpace) -> Self {
        ThetaMapping {
            dim: space.dim(),
            images: space.points().iter().cloned().map(Some).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, i: usize) -> Option<&[f64]> {
        self.images[i].as_deref()
    }

    /// The one-sided linear coupling `c_theta(w, y) = <theta(w), y>`.
    /// Requires `theta` to be defined everywhere.
    pub fn coupling(&self, dual: &SampledSpace) -> Result<CouplingTable> {
        check_dim(self.dim, dual.dim())?;
        let mut values = Vec::with_capacity(self.len() * dual.len());
        for (i, img) in self.images.iter().enumerate() {
            let img = img.as_ref().ok_or_else(|| {
                Error::InvalidInput(format!("theta undefined at point {i}"))
            })?;
            values.extend(dual.points().iter().map(|y| ExtReal::new(dot(img, y))));
        }
        CouplingTable::new(self.len(), dual.len(), values)
    }
}

/// `c`-Fenchel-Moreau conjugate:
/// `f^c(y) = max_x [ c(x, y) +lower (-f(x)) ]`.
pub fn conjugate(f: &ExtFunction, c: &CouplingTable) -> Result<ExtFunction> {
    check_dim(c.rows(), f.len())?;
    Ok(ExtFunction::new(
        (0..c.cols())
            .map(|j| {
                (0..c.rows())
                    .map(|i| c.get(i, j).lower_add(-f.get(i)))
                    .fold(NegInf, ExtReal::max)
            })
            .collect(),
    ))
}

/// Conjugate with respect to the reverse coupling `c'`:
/// `g^{c'}(x) = max_y [ c(x, y) +lower (-g(y)) ]`.
pub fn reverse_conjugate(g: &ExtFunction, c: &CouplingTable) -> Result<ExtFunction> {
    check_dim(c.cols(), g.len())?;
    Ok(ExtFunction::new(
        (0..c.rows())
            .map(|i| {
                (0..c.cols())
                    .map(|j| c.get(i, j).lower_add(-g.get(j)))
                    .fold(NegInf, ExtReal::max)
            })
            .collect(),
    ))
}

/// `f^{cc'}`, always below `f`.
pub fn biconjugate(f: &ExtFunction, c: &CouplingTable) -> Result<ExtFunction> {
    reverse_conjugate(&conjugate(f, c)?, c)
}

/// Both sides of the generic weak duality inequality
///
/// `max_y [ (-f^c(y)) +lower (-h^{-c}(y)) ]  <=  min_x [ f(x) +upper h(x) ]`.
pub fn weak_duality_gap(
    f: &ExtFunction,
    h: &ExtFunction,
    c: &CouplingTable,
) -> Result<(ExtReal, ExtReal)> {
    check_dim(f.len(), h.len())?;
    let fc = conjugate(f, c)?;
    let hmc = conjugate(h, &c.negated())?;
    let lhs = fc
        .values()
        .iter()
        .zip(hmc.values())
        .map(|(a, b)| (-*a).lower_add(-*b))
        .fold(NegInf, ExtReal::max);
    let rhs = f
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| a.upper_add(*b))
        .fold(PosInf, ExtReal::min);
    Ok((lhs, rhs))
}

/// Infimal postcomposition `(theta |> h)(x) = min { h(w) : theta(w) = x }`
/// on a sampled target space, `+inf` where `x` has no preimage.
///
/// `theta` must be defined wherever `h < +inf`, and those images must be
/// points of `target`.
pub fn infimal_postcomposition(
    h: &ExtFunction,
    theta: &ThetaMapping,
    target: &SampledSpace,
) -> Result<ExtFunction> {
    check_dim(theta.len(), h.len())?;
    check_dim(target.dim(), theta.dim())?;
    let mut out = vec![PosInf; target.len()];
    for (w, &hw) in h.values().iter().enumerate() {
        if hw.is_pos_inf() {
            continue;
        }
        let img = theta
            .image(w)
            .ok_or_else(|| Error::InvalidInput(format!("theta undefined at point {w} of dom h")))?;
        let x = target
            .index_of(img)
            .ok_or_else(|| Error::InvalidInput(format!("theta image of point {w} is not in the target space")))?;
        out[x] = out[x].min(hw);
    }
    Ok(ExtFunction::new(out))
}

/// Outcome of [`theta_conjugate_identity_check`], one flag per identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaIdentities {
    /// `g^{c'_theta} = g^* o theta`
    pub reverse_is_composition: bool,
    /// `h^{c_theta} = (theta |> h)^*`
    pub conjugate_is_pushforward: bool,
    /// `delta_W^{-c_theta} = sigma_{-theta(W)}`
    pub indicator_is_support: bool,
}

impl ThetaIdentities {
    pub fn all(&self) -> bool {
        self.reverse_is_composition && self.conjugate_is_pushforward && self.indicator_is_support
    }
}

/// Checks, exactly on finite samples, the three conjugacy identities of a
/// one-sided linear coupling `c_theta(w, y) = <theta(w), y>`.
///
/// `h` lives on the source of `theta`, `g` on `dual`, `w_mask` selects the
/// subset `W`; `target` must contain every image of `theta`, which must be
/// total.
pub fn theta_conjugate_identity_check(
    h: &ExtFunction,
    g: &ExtFunction,
    w_mask: &[bool],
    theta: &ThetaMapping,
    target: &SampledSpace,
    dual: &SampledSpace,
) -> Result<ThetaIdentities> {
    check_dim(theta.len(), h.len())?;
    check_dim(theta.len(), w_mask.len())?;
    check_dim(dual.len(), g.len())?;
    let c_theta = theta.coupling(dual)?;
    let fenchel = CouplingTable::bilinear(target, dual)?;
    let image_index = (0..theta.len())
        .map(|w| {
            target.index_of(theta.image(w).unwrap()).ok_or_else(|| {
                Error::InvalidInput(format!("theta image of point {w} is not in the target space"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let lhs = reverse_conjugate(g, &c_theta)?;
    let g_star = reverse_conjugate(g, &fenchel)?;
    let reverse_is_composition = (0..theta.len()).all(|w| lhs.get(w) == g_star.get(image_index[w]));

    let pushed = infimal_postcomposition(h, theta, target)?;
    let conjugate_is_pushforward = conjugate(h, &c_theta)? == conjugate(&pushed, &fenchel)?;

    let delta_w = ExtFunction::indicator(w_mask);
    let lhs = conjugate(&delta_w, &c_theta.negated())?;
    let w_images: Vec<Vec<f64>> = (0..theta.len())
        .filter(|&w| w_mask[w])
        .map(|w| theta.image(w).unwrap().iter().map(|v| -v).collect())
        .collect();
    let indicator_is_support = (0..dual.len()).all(|j| {
        let sigma = if w_images.is_empty() {
            NegInf
        } else {
            ExtReal::new(support_function(&w_images, dual.point(j)).unwrap())
        };
        lhs.get(j) == sigma
    });

    Ok(ThetaIdentities {
        reverse_is_composition,
        conjugate_is_pushforward,
        indicator_is_support,
    })
}

/// Support function `sigma_X(y) = max_{x in X} <x, y>` of a finite point set.
pub fn support_function(points: &[Vec<f64>], y: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySet("support function of an empty set"));
    }
    let mut best = f64::NEG_INFINITY;
    for p in points {
        check_dim(y.len(), p.len())?;
        best = best.max(dot(p, y));
    }
    Ok(best)
}

/// Membership of `y` in the polar set `{ y : <x, y> <= 1 for all x }`.
pub fn polar_membership(points: &[Vec<f64>], y: &[f64]) -> Result<bool> {
    Ok(support_function(points, y)? <= 1.0)
}

/// Exact finite-sample value of the one-sided linear lower bound
///
/// `max_y [ -(theta |> h)^*(y) +lower (-sigma_{-theta(W)}(y)) ]  <=  min_{w in W} h(w)`
///
/// together with the index of the maximizing dual point. `theta` must be
/// defined on `W`; points outside the domain of `theta` are left out of the
/// pushforward, which only shrinks the conjugate's domain.
pub fn lower_bound_finite(
    h: &ExtFunction,
    w_mask: &[bool],
    theta: &ThetaMapping,
    dual: &SampledSpace,
) -> Result<(ExtReal, usize)> {
    check_dim(theta.len(), h.len())?;
    check_dim(theta.len(), w_mask.len())?;
    check_dim(theta.dim(), dual.dim())?;
    if !w_mask.iter().any(|&m| m) {
        return Err(Error::EmptySet("constraint set W"));
    }
    for (w, &m) in w_mask.iter().enumerate() {
        if m && theta.image(w).is_none() {
            return Err(Error::InvalidInput(format!("theta undefined at point {w} of W")));
        }
    }
    let mut best = (NegInf, 0);
    for (j, y) in dual.points().iter().enumerate() {
        let mut conj = NegInf;
        let mut sigma = NegInf;
        for w in 0..theta.len() {
            let Some(img) = theta.image(w) else { continue };
            let pairing = dot(img, y);
            conj = conj.max(ExtReal::new(pairing).lower_add(-h.get(w)));
            if w_mask[w] {
                sigma = sigma.max(ExtReal::new(-pairing));
            }
        }
        let value = (-conj).lower_add(-sigma);
        if j == 0 || value > best.0 {
            best = (value, j);
        }
    }
    Ok(best)
}
