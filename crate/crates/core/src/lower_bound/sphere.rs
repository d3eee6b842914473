//! Certified evaluation of
//!
//! `Phi(y) = sup_{|x| = 1} [ <x, y> + <z, Ax>^2 / |Ax|^2 * 1{<z, Ax> > 0} ]`
//!
//! The ratio term equals `max_{lambda >= 0} 2 lambda <A^T z, x> - lambda^2 |Ax|^2`.
//! For fixed `lambda` the supremum over `x` is a trust-region subproblem
//! with a closed-form Lagrangian upper bound; a branch and bound over
//! `lambda` (and over the split of `x` between the null space of `A` and its
//! orthogonal complement) turns those into a certified bracket
//! `lower <= Phi(y) <= upper`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Result};
use crate::vector::{dot, norm2};

/// Bracket of a supremum with a point attaining the lower end.
#[derive(Debug, Clone, PartialEq)]
pub struct SupBracket {
    pub lower: f64,
    pub upper: f64,
    pub argmax: Vec<f64>,
}

impl SupBracket {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Precomputed data for certifying `Phi` for a fixed pair `(A, z)`,
/// `A` being the `p x d` matrix of a map `R^d -> R^p`.
#[derive(Debug, Clone)]
pub struct LsqSphereSup {
    a: DMatrix<f64>,
    z: DVector<f64>,
    /// Eigenvectors of `A^T A` (columns).
    basis: DMatrix<f64>,
    /// Eigenvector indices spanning the range of `A^T`, and the null space of `A`.
    range: Vec<usize>,
    null: Vec<usize>,
    /// Eigenvalues of `A^T A` on the range.
    mu: Vec<f64>,
    /// `A^T z` in the range eigenbasis.
    b_tilde: Vec<f64>,
    /// Largest useful scaling `|A^T z| / mu_min` of the ratio term.
    lambda_max: f64,
    /// True when `A^T z = 0`: the ratio term vanishes and `Phi(y) = |y|`.
    trivial: bool,
}

const RANGE_TOL: f64 = 1e-13;
const MAX_NODES: usize = 20_000;

/// Lagrangian bound and primal point of `max_{|x| = 1} <q, x> - x^T Q x`
/// for `Q = diag(nu)` (`nu >= 0`) in its eigenbasis.
fn trs(q: &[f64], nu: &[f64]) -> (f64, Vec<f64>) {
    let d = q.len();
    let (imin, &nu_min) = nu
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let qn = norm2(q);
    if qn == 0.0 {
        let mut x = vec![0.0; d];
        x[imin] = 1.0;
        return (-nu_min + 1e-15 * nu_min.abs(), x);
    }
    // eta = nu_min - s, s > 0, gives a valid bound for every s; the best one
    // solves |x(s)| = 1 with x_i(s) = q_i / (2 (nu_i - nu_min + s)), s <= |q|/2.
    // 1/|x(s)| is concave and increasing, so Newton from the left converges
    // monotonically.
    let norm_x = |s: f64| -> (f64, f64) {
        let mut n2 = 0.0;
        let mut slope = 0.0;
        for (qi, ni) in q.iter().zip(nu) {
            let den = ni - nu_min + s;
            let xi2 = qi * qi / (4.0 * den * den);
            n2 += xi2;
            slope += xi2 / den;
        }
        (n2.sqrt(), slope)
    };
    let hi = 0.5 * qn;
    let mut s = hi * 1e-15;
    for _ in 0..100 {
        let (xn, slope) = norm_x(s);
        let phi = 1.0 / xn - 1.0;
        if phi >= -1e-15 {
            break;
        }
        let next = (s - phi * xn * xn * xn / slope).min(hi);
        if next <= s * (1.0 + 1e-15) {
            break;
        }
        s = next;
    }
    let mut magnitude = nu_min.abs() + s;
    let mut ub = -(nu_min - s);
    let mut x = vec![0.0; d];
    for i in 0..d {
        let denom = nu[i] - nu_min + s;
        let term = q[i] * q[i] / (4.0 * denom);
        ub += term;
        magnitude += term;
        x[i] = q[i] / (2.0 * denom);
    }
    let xn2: f64 = x.iter().map(|v| v * v).sum();
    if xn2 < 1.0 {
        // hard case: complete with the bottom eigenvector
        x[imin] += (1.0 - xn2).sqrt().copysign(if q[imin] == 0.0 { 1.0 } else { q[imin] });
    }
    let xn = norm2(&x);
    x.iter_mut().for_each(|v| *v /= xn);
    (ub + 1e-12 * magnitude, x)
}

/// Box `[w1, w2] x [l1, l2]` of the branch and bound, `w` being the weight
/// of the range-space part of `x` and `l` the scaling of the ratio term.
#[derive(Debug)]
struct Node {
    upper: f64,
    w1: f64,
    w2: f64,
    l1: f64,
    l2: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then(other.l1.total_cmp(&self.l1))
            .then(other.w1.total_cmp(&self.w1))
    }
}

impl LsqSphereSup {
    pub fn new(a: &DMatrix<f64>, z: &[f64]) -> Result<Self> {
        check_dim(a.nrows(), z.len())?;
        let z = DVector::from_column_slice(z);
        let eig = SymmetricEigen::new(a.transpose() * a);
        let mu_all: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        let mu_max = mu_all.iter().cloned().fold(0.0, f64::max);
        let (range, null): (Vec<usize>, Vec<usize>) =
            (0..mu_all.len()).partition(|&i| mu_max > 0.0 && mu_all[i] > RANGE_TOL * mu_max);
        let b = a.transpose() * &z;
        let b_all: Vec<f64> = (eig.eigenvectors.transpose() * &b).iter().copied().collect();
        let mu: Vec<f64> = range.iter().map(|&i| mu_all[i]).collect();
        let b_tilde: Vec<f64> = range.iter().map(|&i| b_all[i]).collect();
        let mu_plus = mu.iter().cloned().fold(f64::INFINITY, f64::min);
        let b_norm = norm2(&b_tilde);
        Ok(LsqSphereSup {
            a: a.clone(),
            z,
            basis: eig.eigenvectors,
            range,
            null,
            mu,
            b_tilde,
            lambda_max: if mu_max == 0.0 { 0.0 } else { b_norm / mu_plus },
            trivial: b_norm == 0.0 || mu_max == 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Exact value of the objective `<x, y> + ratio(x)` at a point.
    pub fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, y) + self.ratio(x)
    }

    /// `<z, Ax>^2 / |Ax|^2` when `<z, Ax> > 0`, and `0` otherwise
    /// (including `Ax = 0`).
    pub fn ratio(&self, x: &[f64]) -> f64 {
        let ax = &self.a * DVector::from_column_slice(x);
        let zax = self.z.dot(&ax);
        let n2 = ax.norm_squared();
        if zax > 0.0 && n2 > 0.0 {
            zax * zax / n2
        } else {
            0.0
        }
    }

    /// [`Self::ratio`] of a range-space direction given in eigen coordinates.
    fn range_ratio(&self, u: &[f64]) -> f64 {
        let bu = dot(&self.b_tilde, u);
        let au2: f64 = self.mu.iter().zip(u).map(|(m, v)| m * v * v).sum();
        if bu > 0.0 && au2 > 0.0 {
            bu * bu / au2
        } else {
            0.0
        }
    }

    /// Maps `sqrt(1 - w^2) * null_dir + w * u` (eigen coordinates, `u` on the
    /// range sphere) back to the original coordinates, normalized.
    fn assemble(&self, null_dir: &[f64], w: f64, u: &[f64]) -> Vec<f64> {
        let mut xt = vec![0.0; self.dim()];
        let c = (1.0 - w * w).max(0.0).sqrt();
        for (&i, v) in self.null.iter().zip(null_dir) {
            xt[i] = c * v;
        }
        for (&i, v) in self.range.iter().zip(u) {
            xt[i] = w * v;
        }
        let v = &self.basis * DVector::from_column_slice(&xt);
        let n = v.norm();
        v.iter().map(|c| c / n).collect()
    }

    /// Certified bracket of `Phi(y)`; the branch and bound stops once
    /// `upper - lower <= tol` (or after a node budget, with a wider but
    /// still valid bracket).
    ///
    /// Writing `x = sqrt(1 - w^2) x_N + w u` with `x_N` a unit vector of the
    /// null space of `A` (aligned with `y`) and `u` on the unit sphere of
    /// the range of `A^T`, the objective is at most
    /// `sqrt(1 - w^2) |P_N y| + w <u, y> + 2 l <A^T z, u> - l^2 |Au|^2`,
    /// maximized over `w in [0, 1]` and `l in [0, |A^T z| / mu_min]`.
    /// On a box of `(w, l)` this is bounded through corner values or
    /// tangents, each piece being a trust-region subproblem on the range
    /// sphere.
    pub fn certify(&self, y: &[f64], tol: f64) -> Result<SupBracket> {
        check_dim(self.dim(), y.len())?;
        let d = self.dim();
        let yn = norm2(y);
        let unit_y: Vec<f64> = if yn > 0.0 {
            y.iter().map(|v| v / yn).collect()
        } else {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        };
        if self.trivial {
            return Ok(SupBracket { lower: yn, upper: yn, argmax: unit_y });
        }

        let y_all: Vec<f64> = (self.basis.transpose() * DVector::from_column_slice(y))
            .iter()
            .copied()
            .collect();
        let y_r: Vec<f64> = self.range.iter().map(|&i| y_all[i]).collect();
        let y_n: Vec<f64> = self.null.iter().map(|&i| y_all[i]).collect();
        let n = norm2(&y_n);
        let null_dir: Vec<f64> = if n > 0.0 {
            y_n.iter().map(|v| v / n).collect()
        } else {
            let mut e = vec![0.0; y_n.len()];
            if let Some(first) = e.first_mut() {
                *first = 1.0;
            }
            e
        };
        let has_null = !self.null.is_empty();

        let mut best_val = self.objective(&unit_y, y);
        let mut best_x = unit_y;
        let consider = |x: Vec<f64>, best_val: &mut f64, best_x: &mut Vec<f64>| {
            let v = self.objective(&x, y);
            if v > *best_val {
                *best_val = v;
                *best_x = x;
            }
        };
        for sign in [1.0, -1.0] {
            let u: Vec<f64> = self.b_tilde.iter().map(|v| v * sign).collect();
            consider(self.assemble(&null_dir, 1.0, &crate::caprac::normalize(&u)), &mut best_val, &mut best_x);
        }

        // Upper bound on a box. For fixed u the objective is concave in w and
        // in l separately and affine in <u, y_R>, so each part is bounded
        // either by corner values (first order) or by tangents at the box
        // centre (second order near a maximum); every pairing is evaluated
        // and the smallest kept. Each (head, w, l, curvature) combination is one subproblem.
        let bound = |w1: f64, w2: f64, l1: f64, l2: f64, best_val: &mut f64, best_x: &mut Vec<f64>| -> f64 {
            let corner_w = [(n * (1.0 - w1 * w1).max(0.0).sqrt(), w1), (n * (1.0 - w1 * w1).max(0.0).sqrt(), w2)];
            let (mw, dw) = (0.5 * (w1 + w2), 0.5 * (w2 - w1));
            let tangent_w = if has_null && w2 < 1.0 {
                let c = (1.0 - mw * mw).sqrt();
                [(n * c + dw * n * mw / c, mw - dw), (n * c - dw * n * mw / c, mw + dw)]
            } else {
                corner_w
            };
            let corner_l = [(l1, l1 * l1), (l2, l1 * l2)];
            let (ml, dl) = (0.5 * (l1 + l2), 0.5 * (l2 - l1));
            let tangent_l = [(ml - dl, ml * ml - 2.0 * ml * dl), (ml + dl, ml * ml + 2.0 * ml * dl)];
            let mut ub = f64::INFINITY;
            for (ws, ls) in [
                (corner_w, corner_l),
                (corner_w, tangent_l),
                (tangent_w, corner_l),
                (tangent_w, tangent_l),
            ] {
                let mut scheme = f64::NEG_INFINITY;
                for &(head, w) in &ws {
                    for &(l, curv) in &ls {
                        let nu: Vec<f64> = self.mu.iter().map(|m| curv * m).collect();
                        let q: Vec<f64> = y_r
                            .iter()
                            .zip(&self.b_tilde)
                            .map(|(yt, bt)| w * yt + 2.0 * l * bt)
                            .collect();
                        let (u_val, u) = trs(&q, &nu);
                        scheme = scheme.max(head + u_val);
                        // valued in eigen coordinates so that w -> 0+ (x nearly in
                        // the null space) is scored by its limit, which the
                        // supremum may only approach
                        let value = n * (1.0 - w * w).max(0.0).sqrt() + w * dot(&u, &y_r) + self.range_ratio(&u);
                        if value > *best_val {
                            *best_val = value;
                            *best_x = self.assemble(&null_dir, w.clamp(1e-6, 1.0), &u);
                        }
                    }
                }
                ub = ub.min(scheme);
            }
            ub
        };

        // w = 0 puts x in the null space, where the objective is |P_N y|
        if has_null {
            consider(self.assemble(&null_dir, 0.0, &vec![0.0; self.range.len()]), &mut best_val, &mut best_x);
        }
        let w_lo = if has_null { 0.0 } else { 1.0 };
        let yr_norm = norm2(&y_r);
        let b_norm = norm2(&self.b_tilde);
        let mu_max = self.mu.iter().cloned().fold(0.0, f64::max);
        let lmax = self.lambda_max;
        let mut heap = BinaryHeap::new();
        let ub = bound(w_lo, 1.0, 0.0, lmax, &mut best_val, &mut best_x);
        heap.push(Node { upper: ub, w1: w_lo, w2: 1.0, l1: 0.0, l2: lmax });
        let mut nodes = 1;
        while nodes < MAX_NODES {
            let top = heap.peek().expect("heap never empties").upper;
            if top - best_val <= tol {
                break;
            }
            let node = heap.pop().expect("nonempty");
            // split the coordinate with the larger first-order effect on the bound
            let (mw, dw) = (0.5 * (node.w1 + node.w2), 0.5 * (node.w2 - node.w1));
            let c = (1.0 - mw * mw).max(1e-6).sqrt();
            let w_effect = (dw * (n * mw / c + yr_norm)).min(dw * dw * (n / (c * c * c) + yr_norm * yr_norm));
            let dl = 0.5 * (node.l2 - node.l1);
            let l_effect = (dl * 2.0 * (b_norm + node.l2 * mu_max)).min(dl * dl * (mu_max + 4.0 * b_norm * b_norm));
            let split_l = !has_null || l_effect >= w_effect;
            let children = if split_l {
                let mid = if node.l1 == 0.0 {
                    node.l2 / 16.0
                } else if node.l2 > 2.0 * node.l1 {
                    (node.l1 * node.l2).sqrt()
                } else {
                    0.5 * (node.l1 + node.l2)
                };
                if !(mid > node.l1 && mid < node.l2) {
                    heap.push(node);
                    break;
                }
                [(node.w1, node.w2, node.l1, mid), (node.w1, node.w2, mid, node.l2)]
            } else {
                let mid = 0.5 * (node.w1 + node.w2);
                if !(mid > node.w1 && mid < node.w2) {
                    heap.push(node);
                    break;
                }
                [(node.w1, mid, node.l1, node.l2), (mid, node.w2, node.l1, node.l2)]
            };
            for (w1, w2, l1, l2) in children {
                let ub = bound(w1, w2, l1, l2, &mut best_val, &mut best_x).min(node.upper);
                heap.push(Node { upper: ub, w1, w2, l1, l2 });
            }
            nodes += 2;
        }
        let upper = heap.peek().expect("nonempty").upper.max(best_val);
        Ok(SupBracket { lower: best_val, upper, argmax: best_x })
    }
}
