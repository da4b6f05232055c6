//! Small dense linear algebra for 3×3 deformation gradients.
//!
//! Two independent symmetric eigensolvers live here: a trigonometric closed
//! form (with Jacobi fallback near repeated roots) used on the hot path, and a
//! plain cyclic Jacobi iteration that serves as its cross-check. Singular
//! values come from one-sided Jacobi, which keeps small singular values
//! accurate relative to their size.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Returns `a / |a|`, or `None` for the zero vector.
pub fn normalize(a: &Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Dense 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    /// Builds a matrix from nine row-major entries, rejecting non-finite values.
    pub fn from_row_major(entries: &[f64]) -> Result<Self> {
        if entries.len() != 9 {
            return Err(Error::invalid(format!(
                "expected 9 matrix entries, got {}",
                entries.len()
            )));
        }
        let mut m = Mat3::ZERO;
        for (k, &x) in entries.iter().enumerate() {
            m.0[k / 3][k % 3] = x;
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn diag(d: Vec3) -> Self {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    /// Matrix `a bᵀ`.
    pub fn outer(a: &Vec3, b: &Vec3) -> Self {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for k in 0..3 {
                m.0[i][k] = a[i] * b[k];
            }
        }
        m
    }

    pub fn from_columns(c: [Vec3; 3]) -> Self {
        let mut m = Mat3::ZERO;
        for (k, col) in c.iter().enumerate() {
            for i in 0..3 {
                m.0[i][k] = col[i];
            }
        }
        m
    }

    pub fn column(&self, k: usize) -> Vec3 {
        [self.0[0][k], self.0[1][k], self.0[2][k]]
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.0[i]
    }

    pub fn row_major(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..3 {
            for k in 0..3 {
                out[3 * i + k] = self.0[i][k];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Self {
        self.transpose() * *self
    }

    pub fn mul_vec(&self, x: &Vec3) -> Vec3 {
        [dot(&self.0[0], x), dot(&self.0[1], x), dot(&self.0[2], x)]
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::RankDeficient {
                sigma_min: 0.0,
                sigma_max: self.frobenius_norm(),
            });
        }
        let c0 = cross(&self.row(1), &self.row(2));
        let c1 = cross(&self.row(2), &self.row(0));
        let c2 = cross(&self.row(0), &self.row(1));
        Ok(Mat3::from_columns([c0, c1, c2]) * (1.0 / d))
    }

    /// `‖MᵀM − I‖_max` small.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        (self.gram() - Mat3::IDENTITY).max_abs() <= tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (*self - self.transpose()).max_abs() <= tol * self.max_abs().max(1.0)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, k): (usize, usize)) -> &f64 {
        &self.0[i][k]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut f64 {
        &mut self.0[i][k]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for k in 0..3 {
                out.0[i][k] = (0..3).map(|j| self.0[i][j] * rhs.0[j][k]).sum();
            }
        }
        out
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(mut self, s: f64) -> Mat3 {
        self.0.iter_mut().flatten().for_each(|x| *x *= s);
        self
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, x: Vec3) -> Vec3 {
        self.mul_vec(&x)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, rhs: Mat3) -> Mat3 {
        for i in 0..3 {
            for k in 0..3 {
                self.0[i][k] += rhs.0[i][k];
            }
        }
        self
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self + (-rhs)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

/// Eigen-decomposition of a symmetric 3×3 matrix, eigenvalues ascending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymEigen3 {
    pub values: [f64; 3],
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: [Vec3; 3],
}

impl SymEigen3 {
    pub fn lam1(&self) -> f64 {
        self.values[0]
    }
    pub fn lam2(&self) -> f64 {
        self.values[1]
    }
    pub fn lam3(&self) -> f64 {
        self.values[2]
    }

    /// Largest `‖M w − λ w‖` over the three pairs.
    pub fn max_residual(&self, m: &Mat3) -> f64 {
        (0..3)
            .map(|i| {
                let w = &self.vectors[i];
                norm(&sub(&m.mul_vec(w), &scale(w, self.values[i])))
            })
            .fold(0.0, f64::max)
    }

    /// Reorders the pairs so that `vectors[i]` best continues `prev[i]`,
    /// flipping signs so that `prev[i] · vectors[i] >= 0`.
    pub fn align_to(&self, prev: &[Vec3; 3]) -> SymEigen3 {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let score = |p: &[usize; 3]| -> f64 {
            (0..3)
                .map(|i| dot(&prev[i], &self.vectors[p[i]]).abs())
                .sum()
        };
        let best = PERMS
            .iter()
            .max_by(|a, b| score(a).total_cmp(&score(b)))
            .expect("non-empty");
        let mut out = *self;
        for i in 0..3 {
            out.values[i] = self.values[best[i]];
            let w = self.vectors[best[i]];
            out.vectors[i] = if dot(&prev[i], &w) < 0.0 {
                scale(&w, -1.0)
            } else {
                w
            };
        }
        out
    }
}

/// Below this normalized cubic discriminant the closed form hands over to Jacobi.
const TRIG_DISCRIMINANT_FLOOR: f64 = 1e-12;

/// Symmetric eigensolver: trigonometric closed form with robust eigenvectors,
/// falling back to Jacobi rotations for near-repeated spectra.
pub fn sym_eigen(m: &Mat3) -> SymEigen3 {
    let s = m.max_abs();
    if s == 0.0 {
        return SymEigen3 {
            values: [0.0; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
    }
    let b = *m * (1.0 / s);
    let off = b[(0, 1)].powi(2) + b[(0, 2)].powi(2) + b[(1, 2)].powi(2);
    if off == 0.0 {
        return sorted_diagonal(&b, s);
    }

    let q = b.trace() / 3.0;
    let p2 =
        (b[(0, 0)] - q).powi(2) + (b[(1, 1)] - q).powi(2) + (b[(2, 2)] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let shifted = (b - Mat3::IDENTITY * q) * (1.0 / p);
    let r = (shifted.det() / 2.0).clamp(-1.0, 1.0);
    if 1.0 - r * r < TRIG_DISCRIMINANT_FLOOR {
        return jacobi_eigen(m);
    }
    let phi = r.acos() / 3.0;
    let e_max = q + 2.0 * p * phi.cos();
    let e_min = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e_mid = 3.0 * q - e_max - e_min;
    let evals = [e_min, e_mid, e_max];

    let (values, vectors) = robust_pairs(&b, &evals);
    SymEigen3 {
        values: values.map(|x| x * s),
        vectors,
    }
}

fn sorted_diagonal(b: &Mat3, s: f64) -> SymEigen3 {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &k| b[(i, i)].total_cmp(&b[(k, k)]));
    let mut vectors = [[0.0; 3]; 3];
    let mut values = [0.0; 3];
    for (slot, &i) in idx.iter().enumerate() {
        values[slot] = b[(i, i)] * s;
        vectors[slot][i] = 1.0;
    }
    SymEigen3 { values, vectors }
}

/// Eigenpairs of `b` from approximate ascending eigenvalues `e`. The more
/// isolated extreme eigenvector is solved first by cross products; the
/// remaining close pair comes from the 2×2 projection of `b` onto its
/// orthogonal complement, which keeps both values and vectors accurate when
/// the pair is nearly degenerate.
fn robust_pairs(b: &Mat3, e: &[f64; 3]) -> ([f64; 3], [Vec3; 3]) {
    let iso = if e[2] - e[1] >= e[1] - e[0] { 2 } else { 0 };
    let w_iso = null_vector(b, e[iso]);
    let (cu, cv) = complement_basis(&w_iso);
    let (pair_values, pair_vectors) = projected_pair(b, &cu, &cv);
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    values[iso] = dot(&w_iso, &b.mul_vec(&w_iso));
    vectors[iso] = w_iso;
    let slots = if iso == 2 { [0, 1] } else { [1, 2] };
    for k in 0..2 {
        values[slots[k]] = pair_values[k];
        vectors[slots[k]] = pair_vectors[k];
    }
    // Rounding can only swap the isolated value with its neighbour.
    for i in [1, 0, 1] {
        if values[i] > values[i + 1] {
            values.swap(i, i + 1);
            vectors.swap(i, i + 1);
        }
    }
    (values, vectors)
}

/// Ascending eigenpairs of `b` restricted to `span{u, v}`.
fn projected_pair(b: &Mat3, u: &Vec3, v: &Vec3) -> ([f64; 2], [Vec3; 2]) {
    let (bu, bv) = (b.mul_vec(u), b.mul_vec(v));
    let (m00, m01, m11) = (dot(u, &bu), 0.5 * (dot(u, &bv) + dot(v, &bu)), dot(v, &bv));
    let mean = 0.5 * (m00 + m11);
    let half = 0.5 * (m00 - m11);
    let radius = half.hypot(m01);
    let values = [mean - radius, mean + radius];
    if radius == 0.0 {
        return (values, [*u, *v]);
    }
    // Rotation angle of the larger eigenvector, computed without cancellation.
    let (c, s) = if half >= 0.0 {
        let t = m01 / (half + radius);
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, t * c)
    } else {
        let t = (radius - half) / m01;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, t * c)
    };
    let big = add(&scale(u, c), &scale(v, s));
    let small = add(&scale(u, -s), &scale(v, c));
    (values, [small, big])
}

fn null_vector(b: &Mat3, e: f64) -> Vec3 {
    let s = *b - Mat3::IDENTITY * e;
    let (r0, r1, r2) = (s.row(0), s.row(1), s.row(2));
    let candidates = [cross(&r0, &r1), cross(&r0, &r2), cross(&r1, &r2)];
    let best = candidates
        .iter()
        .max_by(|a, c| dot(a, a).total_cmp(&dot(c, c)))
        .expect("non-empty");
    normalize(best).unwrap_or([1.0, 0.0, 0.0])
}

fn complement_basis(w: &Vec3) -> (Vec3, Vec3) {
    let u = if w[0].abs() > w[1].abs() {
        let inv = 1.0 / (w[0] * w[0] + w[2] * w[2]).sqrt();
        [-w[2] * inv, 0.0, w[0] * inv]
    } else {
        let inv = 1.0 / (w[1] * w[1] + w[2] * w[2]).sqrt();
        [0.0, w[2] * inv, -w[1] * inv]
    };
    let v = cross(w, &u);
    (u, v)
}

/// Cyclic Jacobi rotations. Slow but unconditionally robust; results sorted ascending.
pub fn jacobi_eigen(m: &Mat3) -> SymEigen3 {
    let mut a = *m;
    let mut v = Mat3::IDENTITY;
    let diag_scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off.sqrt() <= 1e-17 * diag_scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Mat3::IDENTITY;
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            a = rot.transpose() * a * rot;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v = v * rot;
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &k| a[(i, i)].total_cmp(&a[(k, k)]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &i) in idx.iter().enumerate() {
        values[slot] = a[(i, i)];
        vectors[slot] = v.column(i);
    }
    SymEigen3 { values, vectors }
}

/// Eigen-decomposition of `AᵀA`.
pub fn gram_eigen(a: &Mat3) -> Result<SymEigen3> {
    a.check_finite()?;
    Ok(sym_eigen(&a.gram()))
}

/// As [`gram_eigen`], with pairs ordered by eigenvector continuity against `prev`
/// instead of by value. Used by branch-tracking callers.
pub fn gram_eigen_tracked(a: &Mat3, prev: &[Vec3; 3]) -> Result<SymEigen3> {
    Ok(gram_eigen(a)?.align_to(prev))
}

/// Full SVD `A = U diag(sigma) Vᵀ`, singular values ascending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: [f64; 3],
    pub v: Mat3,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd_jacobi(a: &Mat3) -> Svd3 {
    let mut w = *a;
    let mut v = Mat3::IDENTITY;
    for _sweep in 0..80 {
        let mut rotated = false;
        for (i, k) in [(0, 1), (0, 2), (1, 2)] {
            let ci = w.column(i);
            let ck = w.column(k);
            let alpha = dot(&ci, &ci);
            let beta = dot(&ck, &ck);
            let gamma = dot(&ci, &ck);
            if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            for row in 0..3 {
                let (x, y) = (w[(row, i)], w[(row, k)]);
                w[(row, i)] = c * x - s * y;
                w[(row, k)] = s * x + c * y;
                let (x, y) = (v[(row, i)], v[(row, k)]);
                v[(row, i)] = c * x - s * y;
                v[(row, k)] = s * x + c * y;
            }
        }
        if !rotated {
            break;
        }
    }
    let norms = [0, 1, 2].map(|k| norm(&w.column(k)));
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &k| norms[i].total_cmp(&norms[k]));
    let mut sigma = [0.0; 3];
    let mut ucols = [[0.0; 3]; 3];
    let mut vcols = [[0.0; 3]; 3];
    for (slot, &k) in idx.iter().enumerate() {
        sigma[slot] = norms[k];
        vcols[slot] = v.column(k);
        ucols[slot] = if norms[k] > 0.0 {
            scale(&w.column(k), 1.0 / norms[k])
        } else {
            [0.0; 3]
        };
    }
    // Complete U when a column vanished (rank-deficient input).
    if sigma[0] == 0.0 {
        ucols[0] = if sigma[1] > 0.0 {
            normalize(&cross(&ucols[1], &ucols[2])).unwrap_or([1.0, 0.0, 0.0])
        } else {
            [1.0, 0.0, 0.0]
        };
    }
    Svd3 {
        u: Mat3::from_columns(ucols),
        sigma,
        v: Mat3::from_columns(vcols),
    }
}

/// Relative size below which the smallest singular value counts as zero.
const RANK_TOL: f64 = 1e-14;

/// Singular values ascending, rejecting rank-deficient input.
pub fn singular_values(a: &Mat3) -> Result<[f64; 3]> {
    a.check_finite()?;
    let s = svd_jacobi(a).sigma;
    if !(s[0] > RANK_TOL * s[2]) {
        return Err(Error::RankDeficient {
            sigma_min: s[0],
            sigma_max: s[2],
        });
    }
    Ok(s)
}

/// Normal form `A = scale · Q · diag(1, alpha, beta) · R` with orthogonal `Q`, `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularForm {
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q: Mat3,
    pub r: Mat3,
}

impl SingularForm {
    /// The canonical diagonal form `diag(1, alpha, beta)` with identity factors.
    pub fn sing(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::invalid("alpha and beta must be finite"));
        }
        if !(1.0 <= alpha && alpha <= beta) {
            return Err(Error::invalid(format!(
                "need 1 <= alpha <= beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(SingularForm {
            scale: 1.0,
            alpha,
            beta,
            q: Mat3::IDENTITY,
            r: Mat3::IDENTITY,
        })
    }

    pub fn normalized(&self) -> Mat3 {
        Mat3::diag([1.0, self.alpha, self.beta])
    }

    pub fn reconstruct(&self) -> Mat3 {
        self.q * self.normalized() * self.r * self.scale
    }

    /// True when `1 < alpha < beta` up to the default relative tolerance.
    pub fn has_distinct_values(&self) -> bool {
        let d = |a: f64, b: f64| !tol::close(a, b, tol::REL, tol::ABS_FLOOR);
        d(1.0, self.alpha) && d(self.alpha, self.beta)
    }

    pub fn require_distinct(&self) -> Result<()> {
        if self.has_distinct_values() {
            Ok(())
        } else {
            Err(Error::DegenerateSpectrum {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }
}

/// Normalizes `A` to its singular form.
pub fn svd3(a: &Mat3) -> Result<SingularForm> {
    a.check_finite()?;
    let svd = svd_jacobi(a);
    let s = svd.sigma;
    if !(s[0] > RANK_TOL * s[2]) {
        return Err(Error::RankDeficient {
            sigma_min: s[0],
            sigma_max: s[2],
        });
    }
    Ok(SingularForm {
        scale: s[0],
        alpha: s[1] / s[0],
        beta: s[2] / s[0],
        q: svd.u,
        r: svd.v.transpose(),
    })
}
