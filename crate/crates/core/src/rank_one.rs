//! Behaviour of `H` along rank-one lines `t ↦ A + t·(u⊗v)`.
//!
//! Derivatives come from perturbation theory for the simple extreme
//! eigenvalues of the Gram pencil `(A+tB)ᵀ(A+tB) = X₀ + tX₁ + t²X₂`, checked
//! against Richardson-extrapolated central differences of `H` itself.
//!
//! Tensor convention: `(u⊗v)x = (u·x) v`, i.e. the matrix `v uᵀ`. With this
//! choice `u` is the normal of the lamination planes and `v` the direction in
//! which the laminate displaces material.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing;
use crate::distortion::linear_distortion;
use crate::error::{Error, Result};
use crate::laminate;
use crate::mat::{self, Mat3, SingularForm, Vec3};

/// Unit vectors `u`, `v` of a rank-one direction `B = u⊗v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneDir {
    pub u: Vec3,
    pub v: Vec3,
}

impl RankOneDir {
    /// Normalizes both vectors; fails on zero or non-finite input.
    pub fn new(u: Vec3, v: Vec3) -> Result<Self> {
        let nu =
            mat::normalize(&u).ok_or_else(|| Error::invalid("u must be non-zero and finite"))?;
        let nv =
            mat::normalize(&v).ok_or_else(|| Error::invalid("v must be non-zero and finite"))?;
        Ok(RankOneDir { u: nu, v: nv })
    }

    /// The matrix `v uᵀ`, so that `B x = (u·x) v`.
    pub fn matrix(&self) -> Mat3 {
        Mat3::outer(&self.v, &self.u)
    }

    /// The opposite pencil orientation, `B ↦ −B`.
    pub fn flipped(&self) -> Self {
        RankOneDir {
            u: self.u,
            v: mat::scale(&self.v, -1.0),
        }
    }

    pub fn pencil(&self, a: &Mat3, t: f64) -> Mat3 {
        *a + self.matrix() * t
    }
}

/// Spherical parameterization `u = (√(1−r²), r cos θ₁, r sin θ₁)`,
/// `v = (√(1−s²), s cos θ₂, s sin θ₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalParam {
    pub r: f64,
    pub s: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl SphericalParam {
    pub fn u(&self) -> Vec3 {
        let (r, t) = (self.r, self.theta1);
        [(1.0 - r * r).max(0.0).sqrt(), r * t.cos(), r * t.sin()]
    }

    pub fn v(&self) -> Vec3 {
        let (s, t) = (self.s, self.theta2);
        [(1.0 - s * s).max(0.0).sqrt(), s * t.cos(), s * t.sin()]
    }

    pub fn direction(&self) -> RankOneDir {
        RankOneDir {
            u: self.u(),
            v: self.v(),
        }
    }

    /// Inverse map for vectors with non-negative first component.
    pub fn from_direction(dir: &RankOneDir) -> Self {
        let angle = |w: &Vec3| w[2].atan2(w[1]).rem_euclid(2.0 * PI);
        let radius = |w: &Vec3| (w[1] * w[1] + w[2] * w[2]).sqrt().min(1.0);
        SphericalParam {
            r: radius(&dir.u),
            s: radius(&dir.v),
            theta1: angle(&dir.u),
            theta2: angle(&dir.v),
        }
    }
}

/// Second-order Taylor data of the extreme Gram eigenvalues along a pencil:
/// `λ_min(t) = λ₁ + μ₁t + μ₂t²`, `λ_max(t) = λ₃ + η₁t + η₂t²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub lam_min: f64,
    pub lam_max: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl TaylorCoefficients {
    /// `η₂ − (λ₃/λ₁)·μ₂`; reduces to `η₂ − β²μ₂` in the normalized frame. Under
    /// the first-order constraint the second derivative of `H` is `H·Q/λ₃`.
    pub fn q(&self) -> f64 {
        self.eta2 - self.lam_max / self.lam_min * self.mu2
    }

    /// First-order constraint `η₁ − (λ₃/λ₁)·μ₁`, zero exactly when `dH/dt = 0`.
    pub fn constraint(&self) -> f64 {
        self.eta1 - self.lam_max / self.lam_min * self.mu1
    }

    pub fn h0(&self) -> f64 {
        (self.lam_max / self.lam_min).sqrt()
    }

    pub fn d1(&self) -> f64 {
        let g1 = 0.5 * (self.eta1 / self.lam_max - self.mu1 / self.lam_min);
        self.h0() * g1
    }

    pub fn d2(&self) -> f64 {
        let (l1, l3) = (self.lam_min, self.lam_max);
        let g1 = 0.5 * (self.eta1 / l3 - self.mu1 / l1);
        let g2 = 0.5
            * (2.0 * self.eta2 / l3 - (self.eta1 / l3).powi(2) - 2.0 * self.mu2 / l1
                + (self.mu1 / l1).powi(2));
        self.h0() * (g2 + g1 * g1)
    }
}

/// Precomputed eigenbasis of `AᵀA` for repeated derivative evaluation.
#[derive(Clone, Debug)]
pub struct PencilAnalyzer {
    a: Mat3,
    /// Eigenvectors of `AᵀA` as columns; `None` when `A` is diagonal.
    basis: Option<Mat3>,
    lam: [f64; 3],
}

/// Relative eigenvalue gap below which an extreme eigenvalue counts as repeated.
const SIMPLE_GAP: f64 = 1e-9;

impl PencilAnalyzer {
    pub fn new(a: &Mat3) -> Result<Self> {
        mat::singular_values(a)?;
        let e = mat::gram_eigen(a)?;
        let lam = e.values;
        let gap_low = (lam[1] - lam[0]) / lam[2];
        let gap_high = (lam[2] - lam[1]) / lam[2];
        if gap_low < SIMPLE_GAP || gap_high < SIMPLE_GAP {
            return Err(Error::NonSmooth { gap_low, gap_high });
        }
        Ok(PencilAnalyzer {
            a: *a,
            basis: Some(Mat3::from_columns(e.vectors)),
            lam,
        })
    }

    /// Diagonal matrices need no eigensolve.
    pub fn for_form(form: &SingularForm) -> Result<Self> {
        form.require_distinct()?;
        let (a, b) = (form.alpha, form.beta);
        Ok(PencilAnalyzer {
            a: form.normalized(),
            basis: None,
            lam: [1.0, a * a, b * b],
        })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.a
    }

    pub fn taylor(&self, dir: &RankOneDir) -> TaylorCoefficients {
        let b = dir.matrix();
        let x1 = self.a.transpose() * b + b.transpose() * self.a;
        let x2 = b.transpose() * b;
        let (x1r, x2r) = match self.basis {
            Some(w) => (w.transpose() * x1 * w, w.transpose() * x2 * w),
            None => (x1, x2),
        };
        let second = |k: usize| {
            let coupling: f64 = (0..3)
                .filter(|&j| j != k)
                .map(|j| x1r[(j, k)].powi(2) / (self.lam[k] - self.lam[j]))
                .sum();
            x2r[(k, k)] + coupling
        };
        TaylorCoefficients {
            lam_min: self.lam[0],
            lam_max: self.lam[2],
            mu1: x1r[(0, 0)],
            mu2: second(0),
            eta1: x1r[(2, 2)],
            eta2: second(2),
        }
    }
}

/// `H(A)` and the first two derivatives of `t ↦ H(A + tB)` at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalSeries {
    pub h0: f64,
    pub d1: f64,
    pub d2: f64,
    /// Finite-difference estimates used as the cross-check.
    pub fd_d1: f64,
    pub fd_d2: f64,
    /// Worst relative disagreement between the two routes.
    pub fd_disagreement: f64,
    /// Set when the routes disagree by more than [`FD_AGREEMENT`].
    pub conditioning_warning: bool,
}

pub const FD_AGREEMENT: f64 = 1e-6;

pub fn directional_series(a: &Mat3, dir: &RankOneDir) -> Result<DirectionalSeries> {
    let analyzer = PencilAnalyzer::new(a)?;
    let taylor = analyzer.taylor(dir);
    let (d1, d2) = (taylor.d1(), taylor.d2());
    let h0 = taylor.h0();

    let smin = taylor.lam_min.sqrt();
    let h = |t: f64| linear_distortion(&dir.pencil(a, t)).map(f64::from);
    let central = |step: f64| -> Result<f64> { Ok((h(step)? - h(-step)?) / (2.0 * step)) };
    let curvature =
        |step: f64| -> Result<f64> { Ok((h(step)? - 2.0 * h0 + h(-step)?) / (step * step)) };
    let richardson = |coarse: f64, fine: f64| (100.0 * fine - coarse) / 99.0;
    let fd_d1 = richardson(central(1e-4 * smin)?, central(1e-5 * smin)?);
    let fd_d2 = richardson(curvature(1e-2 * smin)?, curvature(1e-3 * smin)?);

    let floor = 1e-3 * h0 / smin;
    let rel = |x: f64, y: f64, f: f64| (x - y).abs() / x.abs().max(y.abs()).max(f);
    let fd_disagreement = rel(d1, fd_d1, floor).max(rel(d2, fd_d2, floor / smin));
    Ok(DirectionalSeries {
        h0,
        d1,
        d2,
        fd_d1,
        fd_d2,
        fd_disagreement,
        conditioning_warning: fd_disagreement > FD_AGREEMENT,
    })
}

/// `q(α, β)` with `H(diag(1,α,β) + tB₀) = β − q t² + O(t³)`.
pub fn second_order_coefficient(alpha: f64, beta: f64) -> f64 {
    let p = quadratic_form(alpha, beta);
    (beta - 1.0).powi(3) * beta / (4.0 * (alpha + 1.0) * (beta + 1.0) * (alpha + beta) * p)
}

/// `α² + α + β² + (α−1)β + 1`, the recurring normalizer of the optimal direction.
pub(crate) fn quadratic_form(alpha: f64, beta: f64) -> f64 {
    alpha * alpha + alpha + beta * beta + (alpha - 1.0) * beta + 1.0
}

/// The optimal rank-one direction for a matrix with distinct singular values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalDirection {
    /// `u₀`, `v₀` for `diag(1, α, β)`.
    pub normalized: RankOneDir,
    /// The same direction for the original matrix `scale·Q·diag(1,α,β)·R`:
    /// `u = Rᵀu₀`, `v = Qv₀`. A physical pencil parameter is `scale` times
    /// the normalized one.
    pub physical: RankOneDir,
    pub scale: f64,
    pub spherical: SphericalParam,
    pub q: f64,
    pub d1: f64,
    pub d2: f64,
}

impl OptimalDirection {
    pub fn physical_t(&self, t_normalized: f64) -> f64 {
        self.scale * t_normalized
    }
}

/// Closed-form `B₀ = u₀⊗v₀` maximizing the second-order decrease of `H`.
///
/// `u₀` carries the `+` sign on its middle component and `v₀` the `−` sign;
/// the swapped assignment is tried if the first fails its derivative checks.
pub fn optimal_direction(form: &SingularForm) -> Result<OptimalDirection> {
    form.require_distinct()?;
    let (a, b) = (form.alpha, form.beta);
    let norm = 1.0 / (2f64.sqrt() * quadratic_form(a, b).sqrt());
    let c1 = (b - 1.0) / (b + 1.0).sqrt();
    let c2 = (2.0 * a * a + 2.0 * (b + 1.0) * a + b * b + 1.0).sqrt();
    let c3 = (b - 1.0) * b.sqrt() / (b + 1.0).sqrt();
    let plus = mat::scale(&[c1, c2, c3], norm);
    let minus = mat::scale(&[c1, -c2, c3], norm);

    let analyzer = PencilAnalyzer::for_form(form)?;
    let q = second_order_coefficient(a, b);
    let mut last = None;
    for (u, v) in [(plus, minus), (minus, plus)] {
        let dir = RankOneDir::new(u, v)?;
        let t = analyzer.taylor(&dir);
        let (d1, d2) = (t.d1(), t.d2());
        if d1.abs() <= 1e-8 * b && d2 < 0.0 {
            return Ok(OptimalDirection {
                normalized: dir,
                physical: RankOneDir::new(
                    form.r.transpose().mul_vec(&dir.u),
                    form.q.mul_vec(&dir.v),
                )?,
                scale: form.scale,
                spherical: SphericalParam::from_direction(&dir),
                q,
                d1,
                d2,
            });
        }
        last = Some((d1, d2));
    }
    let (d1, d2) = last.expect("two candidates tried");
    Err(Error::Certificate {
        t: 0.0,
        reason: format!(
            "closed-form direction failed derivative checks (d1 = {d1:e}, d2 = {d2:e})"
        ),
    })
}

/// Best admissible direction found by exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub param: SphericalParam,
    pub direction: RankOneDir,
    pub series: DirectionalSeries,
    pub taylor: TaylorCoefficients,
    pub admissible: usize,
    pub evaluated: usize,
}

/// Solves the first-order constraint `u₃v₃ = β u₁v₁` for `s` given `(r, θ₁, θ₂)`.
fn eliminate_s(beta: f64, r: f64, theta1: f64, theta2: f64) -> Option<f64> {
    let sines = theta1.sin() * theta2.sin();
    if !(sines > 1e-12 && r > 0.0 && r < 1.0) {
        return None;
    }
    let k = beta * (1.0 - r * r).sqrt() / (r * sines);
    Some(k / (1.0 + k * k).sqrt())
}

pub const ORACLE_ADMISSIBLE_D1: f64 = 1e-6;

/// Best admissible point of one `θ₁` row, with admissible and evaluated counts.
type OracleRow = (Option<(f64, SphericalParam)>, usize, usize);

/// Brute-force search over `(θ₁, θ₂, r)` with `s` eliminated by the
/// first-order constraint; among directions with `|d1| ≤ 1e-6` returns the one
/// with the most negative second derivative.
///
/// Work is split by `θ₁` row and reduced in row order, so the result does not
/// depend on the thread count.
pub fn grid_oracle(form: &SingularForm, n_theta: usize, n_rs: usize) -> Result<OracleResult> {
    if n_theta < 64 || n_rs < 32 {
        return Err(Error::invalid(format!(
            "grid oracle needs n_theta >= 64 and n_rs >= 32 (got {n_theta}, {n_rs})"
        )));
    }
    let analyzer = PencilAnalyzer::for_form(form)?;
    let beta = form.beta;
    let theta = |k: usize| 2.0 * PI * k as f64 / n_theta as f64;
    let radius = |i: usize| (i + 1) as f64 / (n_rs + 1) as f64;

    let rows: Vec<OracleRow> = (0..n_theta)
        .into_par_iter()
        .map(|k1| {
            let mut best: Option<(f64, SphericalParam)> = None;
            let (mut admissible, mut evaluated) = (0, 0);
            for k2 in 0..n_theta {
                for i in 0..n_rs {
                    let (t1, t2, r) = (theta(k1), theta(k2), radius(i));
                    let Some(s) = eliminate_s(beta, r, t1, t2) else {
                        continue;
                    };
                    let param = SphericalParam {
                        r,
                        s,
                        theta1: t1,
                        theta2: t2,
                    };
                    let taylor = analyzer.taylor(&param.direction());
                    evaluated += 1;
                    if taylor.d1().abs() > ORACLE_ADMISSIBLE_D1 {
                        continue;
                    }
                    admissible += 1;
                    let d2 = taylor.d2();
                    if best.is_none_or(|(b, _)| d2 < b) {
                        best = Some((d2, param));
                    }
                }
            }
            (best, admissible, evaluated)
        })
        .collect();

    let mut best: Option<(f64, SphericalParam)> = None;
    let (mut admissible, mut evaluated) = (0, 0);
    for (row_best, adm, ev) in rows {
        admissible += adm;
        evaluated += ev;
        if let Some((d2, p)) = row_best {
            if best.is_none_or(|(b, _)| d2 < b) {
                best = Some((d2, p));
            }
        }
    }
    let (_, param) = best.ok_or_else(|| Error::Certificate {
        t: 0.0,
        reason: "no admissible direction on the oracle grid".into(),
    })?;
    let direction = param.direction();
    Ok(OracleResult {
        param,
        direction,
        series: directional_series(&analyzer.a, &direction)?,
        taylor: analyzer.taylor(&direction),
        admissible,
        evaluated,
    })
}

/// `Q(θ₁, θ₂)`: the most negative `Q = η₂ − β²μ₂` over admissible `(r, s)`
/// at fixed angles, or `None` when the angles admit no direction with
/// `dH/dt = 0` (then `sin θ₁ sin θ₂ ≤ 0`).
pub fn q_landscape(
    form: &SingularForm,
    theta1: f64,
    theta2: f64,
    n_rs: usize,
) -> Result<Option<f64>> {
    let analyzer = PencilAnalyzer::for_form(form)?;
    Ok(q_landscape_with(
        &analyzer,
        form.beta,
        theta1,
        theta2,
        n_rs.max(8),
    ))
}

fn q_landscape_with(
    analyzer: &PencilAnalyzer,
    beta: f64,
    theta1: f64,
    theta2: f64,
    n_rs: usize,
) -> Option<f64> {
    let objective = |r: f64| -> Option<f64> {
        let s = eliminate_s(beta, r, theta1, theta2)?;
        let param = SphericalParam {
            r,
            s,
            theta1,
            theta2,
        };
        Some(analyzer.taylor(&param.direction()).q())
    };
    let radius = |i: usize| (i + 1) as f64 / (n_rs + 1) as f64;
    let (mut best_i, mut best) = (usize::MAX, f64::INFINITY);
    for i in 0..n_rs {
        let val = objective(radius(i))?;
        if val < best {
            best = val;
            best_i = i;
        }
    }
    // Golden-section refinement in the bracketing cell pair.
    let lo = if best_i == 0 {
        1e-9
    } else {
        radius(best_i - 1)
    };
    let hi = if best_i + 1 == n_rs {
        1.0 - 1e-12
    } else {
        radius(best_i + 1)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    for _ in 0..120 {
        if (b - a) < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d)?;
        }
    }
    Some(best.min(fc).min(fd))
}

/// One sample of the landscape table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub theta1: f64,
    pub theta2: f64,
    pub q: Option<f64>,
}

/// `Q` on an `n × n` grid over `[0, π]²` (endpoints included).
pub fn q_landscape_table(
    form: &SingularForm,
    n: usize,
    n_rs: usize,
) -> Result<Vec<LandscapePoint>> {
    if n < 2 {
        return Err(Error::invalid(
            "landscape grid needs at least 2 points per axis",
        ));
    }
    let analyzer = PencilAnalyzer::for_form(form)?;
    let step = PI / (n - 1) as f64;
    let points = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (theta1, theta2) = ((k / n) as f64 * step, (k % n) as f64 * step);
            LandscapePoint {
                theta1,
                theta2,
                q: q_landscape_with(&analyzer, form.beta, theta1, theta2, n_rs.max(8)),
            }
        })
        .collect();
    Ok(points)
}

/// Reconstruction of the classical failure of rank-one convexity at
/// `A_c = diag(1, c, c²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwaniecDemo {
    pub c: f64,
    pub a_c: Mat3,
    pub h_a: f64,
    pub direction: RankOneDir,
    pub d2: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    /// A pencil parameter with `H(A_c + t B₀) < H(A_c)`.
    pub t_witness: f64,
    pub h_witness: f64,
    pub jump_ratio: f64,
}

pub fn iwaniec_example(c: f64) -> Result<IwaniecDemo> {
    if !(c.is_finite() && c > 1.0) {
        return Err(Error::invalid(format!("need c > 1, got {c}")));
    }
    let a_c = Mat3::diag([1.0, c, c * c]);
    let h_a = linear_distortion(&a_c)?.value();
    let form = SingularForm::sing(c, c * c)?;
    let opt = optimal_direction(&form)?;
    let interval = crossing::crossing_interval(&form)?;
    let t_witness = 0.5 * interval.t_plus;
    let h_witness = linear_distortion(&opt.normalized.pencil(&a_c, t_witness))?.value();
    if !(h_witness < h_a) {
        return Err(Error::Certificate {
            t: t_witness,
            reason: format!("distortion did not decrease ({h_witness} >= {h_a})"),
        });
    }
    let report = laminate::optimal_laminate(&a_c, 1)?.distortion()?;
    Ok(IwaniecDemo {
        c,
        a_c,
        h_a,
        direction: opt.normalized,
        d2: opt.d2,
        t_minus: interval.t_minus,
        t_plus: interval.t_plus,
        t_witness,
        h_witness,
        jump_ratio: report.ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn form(a: f64, b: f64) -> SingularForm {
        SingularForm::sing(a, b).unwrap()
    }

    #[test]
    fn optimal_direction_at_2_4() {
        let opt = optimal_direction(&form(2.0, 4.0)).unwrap();
        let (u, v) = (opt.normalized.u, opt.normalized.v);
        assert!((mat::norm(&u) - 1.0).abs() < 1e-12 && (mat::norm(&v) - 1.0).abs() < 1e-12);
        assert_eq!(u[0], v[0]);
        assert_eq!(u[2], v[2]);
        assert_eq!(u[1], -v[1]);
        assert!(u[1] > 0.0);

        let s = directional_series(&Mat3::diag([1.0, 2.0, 4.0]), &opt.normalized).unwrap();
        assert!(s.d1.abs() <= 1e-8);
        assert!((s.d2 + 2.0 / 90.0).abs() <= 1e-6 * (2.0 / 90.0), "{}", s.d2);
        assert!(!s.conditioning_warning, "{s:?}");
    }

    #[test]
    fn stretching_the_long_axis_increases_distortion() {
        let e3 = [0.0, 0.0, 1.0];
        let dir = RankOneDir::new(e3, e3).unwrap();
        let s = directional_series(&Mat3::diag([1.0, 2.0, 4.0]), &dir).unwrap();
        assert!(s.d1 > 0.0 && s.fd_d1 > 0.0);
        assert!((s.d1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_bounds_the_true_curve() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let opt = optimal_direction(&form(2.0, 4.0)).unwrap();
        let q = opt.q;
        let mut worst = 0.0_f64;
        for k in -100..=100 {
            let t = k as f64 * 1e-4;
            let h = linear_distortion(&opt.normalized.pencil(&a, t))
                .unwrap()
                .value();
            if t != 0.0 {
                worst = worst.max((h - (4.0 - q * t * t)) / t.abs().powi(3));
            }
        }
        // Bounded third-order remainder.
        assert!(worst < 1.0, "{worst}");
    }

    #[test]
    fn optimal_direction_rejects_repeated_values() {
        for (a, b) in [(1.0, 2.0), (2.0, 2.0), (1.0, 1.0)] {
            assert!(matches!(
                optimal_direction(&form(a, b)),
                Err(Error::DegenerateSpectrum { .. })
            ));
        }
    }

    #[test]
    fn curvature_vanishes_as_beta_approaches_one() {
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let eps = 10f64.powi(-k);
            let f = form(1.0 + eps / 2.0, 1.0 + eps);
            let opt = optimal_direction(&f).unwrap();
            assert!(opt.d2 < 0.0 && opt.d2.abs() < prev);
            assert!((opt.d2 + 2.0 * opt.q).abs() <= 1e-6 * opt.q + 1e-15);
            prev = opt.d2.abs();
        }
    }

    #[test]
    fn directional_series_errors_at_repeated_extremes() {
        let dir = RankOneDir::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            directional_series(&Mat3::IDENTITY, &dir),
            Err(Error::NonSmooth { .. })
        ));
        assert!(matches!(
            directional_series(&Mat3::diag([1.0, 2.0, 2.0]), &dir),
            Err(Error::NonSmooth { .. })
        ));
    }

    #[test]
    fn sign_symmetry() {
        let a = Mat3::from_rows([[1.2, 0.3, -0.1], [0.0, 2.1, 0.4], [0.2, -0.3, 3.7]]);
        let dir = RankOneDir::new([0.3, 0.5, -0.2], [0.1, -0.7, 0.4]).unwrap();
        let neg = RankOneDir {
            u: mat::scale(&dir.u, -1.0),
            v: mat::scale(&dir.v, -1.0),
        };
        let s = directional_series(&a, &dir).unwrap();
        assert_eq!(s, directional_series(&a, &neg).unwrap());
        let f = directional_series(&a, &dir.flipped()).unwrap();
        assert_eq!(f.d1, -s.d1);
        assert!((f.d2 - s.d2).abs() <= 1e-12 * s.d2.abs());
    }

    #[test]
    fn perturbation_matches_finite_differences_on_general_matrices() {
        let a = Mat3::from_rows([[1.2, 0.3, -0.1], [0.0, 2.1, 0.4], [0.2, -0.3, 3.7]]);
        for (u, v) in [
            ([0.3, 0.5, -0.2], [0.1, -0.7, 0.4]),
            ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ([0.2, 0.2, 0.9], [0.6, 0.3, -0.1]),
        ] {
            let s = directional_series(&a, &RankOneDir::new(u, v).unwrap()).unwrap();
            assert!(!s.conditioning_warning, "{s:?}");
        }
    }

    #[test]
    fn spherical_round_trip() {
        let p = SphericalParam {
            r: 0.4,
            s: 0.9,
            theta1: 1.1,
            theta2: 4.0,
        };
        let back = SphericalParam::from_direction(&p.direction());
        assert!((back.r - p.r).abs() < 1e-14 && (back.s - p.s).abs() < 1e-14);
        assert!((back.theta1 - p.theta1).abs() < 1e-14 && (back.theta2 - p.theta2).abs() < 1e-14);
    }

    #[test]
    fn optimal_direction_lies_on_the_antidiagonal() {
        let opt = optimal_direction(&form(2.0, 4.0)).unwrap();
        let p = opt.spherical;
        assert!((p.theta1 + p.theta2 - PI).abs() < 1e-12);
        assert!((p.r - p.s).abs() < 1e-14);
    }

    #[test]
    fn grid_oracle_finds_closed_form_value() {
        let f = form(2.0, 4.0);
        let res = grid_oracle(&f, 256, 128).unwrap();
        let expect = -1.0 / 45.0;
        assert!(res.series.d1.abs() <= ORACLE_ADMISSIBLE_D1);
        assert!(res.series.d2 >= expect * (1.0 + 1e-9));
        assert!(
            (res.series.d2 - expect).abs() <= 0.01 * expect.abs(),
            "{}",
            res.series.d2
        );
        // Minimizers sit on θ₂ = π − θ₁ (mod 2π), up to one grid cell.
        let off = (res.param.theta1 + res.param.theta2 - PI).rem_euclid(2.0 * PI);
        let off = off.min(2.0 * PI - off);
        assert!(off <= 2.0 * PI / 256.0 + 1e-12, "{:?}", res.param);
        assert!(res.admissible > 0 && res.admissible == res.evaluated);
    }

    #[test]
    fn grid_oracle_rejects_small_grids() {
        assert!(grid_oracle(&form(2.0, 4.0), 32, 64).is_err());
        assert!(grid_oracle(&form(2.0, 4.0), 64, 16).is_err());
    }

    #[test]
    fn landscape_symmetry() {
        let f = form(2.0, 4.0);
        let thetas = [0.3, 0.7, 1.2, 1.9, 2.6];
        for &t1 in &thetas {
            for &t2 in &thetas {
                let a = q_landscape(&f, t1, t2, 64).unwrap().unwrap();
                let b = q_landscape(&f, PI - t2, PI - t1, 64).unwrap().unwrap();
                assert!(
                    (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                    "{t1} {t2}: {a} vs {b}"
                );
            }
        }
        assert_eq!(q_landscape(&f, 0.5, 4.0, 64).unwrap(), None);
    }

    #[test]
    fn landscape_minimum_matches_closed_form() {
        let f = form(2.0, 4.0);
        let opt = optimal_direction(&f).unwrap();
        let q = q_landscape(&f, opt.spherical.theta1, opt.spherical.theta2, 128)
            .unwrap()
            .unwrap();
        // d2 = Q / β in the normalized frame.
        assert!((q / 4.0 - opt.d2).abs() <= 1e-9, "{q}");
    }

    #[test]
    fn iwaniec_demo() {
        let demo = iwaniec_example(2.0).unwrap();
        assert_eq!(demo.h_a, 4.0);
        assert!(demo.h_witness < 4.0);
        assert!(demo.jump_ratio > 1.0);
        assert!(iwaniec_example(1.0).is_err());
        assert!(iwaniec_example(0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn closed_form_is_optimal_among_admissible_directions(
            r in 0.05f64..0.999, t1 in 0.01f64..3.13, t2 in 0.01f64..3.13,
            a in 1.1f64..10.0, gap in 0.1f64..10.0,
        ) {
            let f = form(a, a + gap);
            let analyzer = PencilAnalyzer::for_form(&f).unwrap();
            let s = eliminate_s(f.beta, r, t1, t2).unwrap();
            let dir = SphericalParam { r, s, theta1: t1, theta2: t2 }.direction();
            let t = analyzer.taylor(&dir);
            prop_assert!(t.d1().abs() <= 1e-8 * f.beta);
            let best = optimal_direction(&f).unwrap().d2;
            prop_assert!(t.d2() >= best - 1e-6);
        }

        #[test]
        fn pointwise_landscape_symmetry(r in 0.05f64..0.95, s in 0.05f64..0.95, t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
            let f = form(2.0, 4.0);
            let analyzer = PencilAnalyzer::for_form(&f).unwrap();
            let p = SphericalParam { r, s, theta1: t1, theta2: t2 };
            let q = SphericalParam { r: s, s: r, theta1: PI - t2, theta2: PI - t1 };
            let (a, b) = (analyzer.taylor(&p.direction()), analyzer.taylor(&q.direction()));
            prop_assert!((a.d2() - b.d2()).abs() <= 1e-12 * (1.0 + a.d2().abs()));
        }
    }
}
