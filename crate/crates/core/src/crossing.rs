//! Eigenvalue branches of the Gram pencil along the optimal direction.
//!
//! With `S = diag(1, −1, 1)` the optimal direction satisfies `v₀ = S u₀`, so
//! `S (A + tB₀) = diag(1, −α, β) + t u₀u₀ᵀ =: N(t)` is symmetric. The Gram
//! eigenvalues of the pencil are the squares of the signed eigenvalues
//! `ν₁ < ν₂ < ν₃` of `N(t)`, which interlace and never cross. Continuity
//! labels therefore come for free: `λ_mid = ν₁²`, `λ_min = ν₂²`,
//! `λ_max = ν₃²`. The crossing points are `t₊` where `ν₁ = −ν₂` and `t₋` where
//! `ν₁ = −ν₃`.
//!
//! All pencil parameters here are in the normalized frame `diag(1, α, β)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distortion::linear_distortion;
use crate::error::{Error, Result};
use crate::mat::{self, Mat3, SingularForm};
use crate::rank_one::{optimal_direction, quadratic_form, RankOneDir};

/// Coefficients `c₀ … c₆` of `t ↦ det[(A+tB)ᵀ(A+tB) − λ²Id]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub coeffs: [f64; 7],
}

impl CharPoly {
    pub fn c0(&self) -> f64 {
        self.coeffs[0]
    }
    pub fn c1(&self) -> f64 {
        self.coeffs[1]
    }
    pub fn c2(&self) -> f64 {
        self.coeffs[2]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `max |c₃…c₆|` relative to the largest coefficient.
    pub fn higher_order_residual(&self) -> f64 {
        let low = self.coeffs[..3].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let high = self.coeffs[3..].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        high / low.max(high).max(f64::MIN_POSITIVE)
    }

    /// Degree after discarding coefficients below `rel` times the largest.
    pub fn degree(&self, rel: f64) -> usize {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        (0..7)
            .rev()
            .find(|&k| self.coeffs[k].abs() > rel * scale)
            .unwrap_or(0)
    }
}

type Poly = [f64; 7];

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = [0.0; 7];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j < 7 {
                out[i + j] += x * y;
            } else {
                debug_assert!(x * y == 0.0);
            }
        }
    }
    out
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = *a;
    for (o, y) in out.iter_mut().zip(b) {
        *o -= y;
    }
    out
}

/// Full expansion in `t` of `det[(A+tB)ᵀ(A+tB) − λ²Id]` for `A = diag(1,α,β)`.
///
/// `lam` is a signed root of the Gram variable; only `λ²` enters.
pub fn pencil_charpoly(form: &SingularForm, dir: &RankOneDir, lam: f64) -> Result<CharPoly> {
    form.require_distinct()?;
    if !lam.is_finite() {
        return Err(Error::invalid("lambda must be finite"));
    }
    let a = form.normalized();
    let b = dir.matrix();
    let x0 = a.gram() - Mat3::IDENTITY * (lam * lam);
    let x1 = a.transpose() * b + b.transpose() * a;
    let x2 = b.gram();
    let entry = |i: usize, j: usize| -> Poly {
        let mut p = [0.0; 7];
        p[0] = x0[(i, j)];
        p[1] = x1[(i, j)];
        p[2] = x2[(i, j)];
        p
    };
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        poly_sub(
            &poly_mul(&entry(r1, c1), &entry(r2, c2)),
            &poly_mul(&entry(r1, c2), &entry(r2, c1)),
        )
    };
    let t0 = poly_mul(&entry(0, 0), &minor(1, 2, 1, 2));
    let t1 = poly_mul(&entry(0, 1), &minor(1, 2, 0, 2));
    let t2 = poly_mul(&entry(0, 2), &minor(1, 2, 0, 1));
    let mut coeffs = poly_sub(&t0, &t1);
    for (c, y) in coeffs.iter_mut().zip(&t2) {
        *c += y;
    }
    Ok(CharPoly { coeffs })
}

/// Squared components of `u₀` in terms of its first spherical parameter `r`.
fn weights(beta: f64, r: f64) -> [f64; 3] {
    let w1 = 1.0 - r * r;
    [w1, r * r - beta * w1, beta * w1]
}

/// The pencil parameter at which the signed value `lam` is an eigenvalue of
/// `N(t)`; its square is then a Gram eigenvalue of `diag(1,α,β) + tB₀`.
///
/// Exact secular form `t = −Π(dᵢ − λ) / Σ uᵢ² Π_{j≠i}(dⱼ − λ)` with
/// `d = (1, −α, β)`; `r` is bound to the optimal direction.
pub fn t_of_lambda(form: &SingularForm, lam: f64) -> Result<f64> {
    let r = optimal_direction(form)?.spherical.r;
    t_of_lambda_with_r(form.alpha, form.beta, r, lam)
}

pub(crate) fn t_of_lambda_with_r(alpha: f64, beta: f64, r: f64, lam: f64) -> Result<f64> {
    let d = [1.0 - lam, -alpha - lam, beta - lam];
    let w = weights(beta, r);
    let terms = [w[0] * d[1] * d[2], w[1] * d[0] * d[2], w[2] * d[0] * d[1]];
    let den: f64 = terms.iter().sum();
    let size = terms.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if den.abs() <= 1e-12 * size {
        return Err(Error::Pole { lambda: lam });
    }
    Ok(-(d[0] * d[1] * d[2]) / den)
}

/// Coefficients of the branch cubic `k₃ν³ + k₂ν² + k₁ν + k₀ = 0` whose roots
/// are the signed eigenvalues of `N(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCubic {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl BranchCubic {
    pub fn new(alpha: f64, beta: f64, t: f64) -> Self {
        let (a, b) = (alpha, beta);
        let p = quadratic_form(a, b);
        let k0 = 2.0 * a * b * (b + 1.0) * p
            - b * t * (2.0 * a * a + 2.0 * a * (a + 4.0) * b + b * b * b + b * b + b + 1.0);
        let k1 = t
            * (2.0 * a * a * (b + 1.0).powi(2)
                + a * (b * (b + 6.0) + 1.0) * (b + 1.0)
                + b * (b * (b * (b + 4.0) - 2.0) + 4.0)
                + 1.0)
            - 2.0 * (b + 1.0) * p * (a * (b + 1.0) - b);
        let k2 = -2.0 * (b + 1.0) * (b + 1.0 - a) * p - 2.0 * (b + 1.0) * t * p;
        let k3 = 2.0 * (b + 1.0) * p;
        BranchCubic { k0, k1, k2, k3 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.k3 * x + self.k2) * x + self.k1) * x + self.k0
    }

    fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.k3 * x + 2.0 * self.k2) * x + self.k1
    }

    /// Closed-form roots from the cube roots of `−1`, real parts ascending.
    pub fn cardano_roots(&self) -> [f64; 3] {
        let (a, b, c, d) = (self.k0, self.k1, self.k2, self.k3);
        let delta0 = c * c - 3.0 * b * d;
        let delta1 = 2.0 * c * c * c - 9.0 * b * c * d + 27.0 * a * d * d;
        let disc = Complex64::new(delta1 * delta1 - 4.0 * delta0 * delta0 * delta0, 0.0);
        let mut w = (disc.sqrt() - delta1).powf(1.0 / 3.0);
        if w.norm() == 0.0 {
            // Triple root: both cube-root terms vanish.
            w = Complex64::new(f64::MIN_POSITIVE, 0.0);
        }
        let cbrt2 = 2f64.cbrt();
        let zetas = [
            Complex64::new(-1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3),
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_3),
        ];
        let mut roots = zetas.map(|z| {
            let x = -c / (3.0 * d) - z * w / (3.0 * cbrt2 * d)
                + 2.0 * z.conj() * (3.0 * b * d - c * c) / (3.0 * cbrt2 * cbrt2 * d * w);
            x.re
        });
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Cardano roots refined by Newton steps on the cubic. For strongly
    /// anisotropic forms the closed form alone loses digits on the small roots.
    pub fn roots(&self) -> [f64; 3] {
        let mut roots = self.cardano_roots();
        for x in roots.iter_mut() {
            for _ in 0..4 {
                let (f, df) = (self.eval(*x), self.derivative(*x));
                if df == 0.0 || !f.is_finite() {
                    break;
                }
                let next = *x - f / df;
                if !(self.eval(next).abs() < f.abs()) {
                    break;
                }
                *x = next;
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// Gram eigenvalues of the optimal pencil at `t`, labelled by continuity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilBranches {
    pub t: f64,
    pub lam_min: f64,
    pub lam_mid: f64,
    pub lam_max: f64,
}

impl PencilBranches {
    fn from_signed(t: f64, nu: [f64; 3]) -> Self {
        PencilBranches {
            t,
            lam_min: nu[1] * nu[1],
            lam_mid: nu[0] * nu[0],
            lam_max: nu[2] * nu[2],
        }
    }

    /// `H` of the pencil member: extreme Gram eigenvalues regardless of label.
    pub fn distortion(&self) -> f64 {
        let v = [self.lam_min, self.lam_mid, self.lam_max];
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        (hi / lo).sqrt()
    }
}

/// Closed-form branches along the optimal pencil of `form`.
pub fn branch_eigenvalues(form: &SingularForm, t: f64) -> Result<PencilBranches> {
    form.require_distinct()?;
    if !t.is_finite() {
        return Err(Error::invalid("t must be finite"));
    }
    Ok(PencilBranches::from_signed(
        t,
        BranchCubic::new(form.alpha, form.beta, t).roots(),
    ))
}

/// Same labelling via a numeric eigensolve of the symmetric `N(t)`.
pub fn branch_eigenvalues_numeric(form: &SingularForm, t: f64) -> Result<PencilBranches> {
    let opt = optimal_direction(form)?;
    let s = Mat3::diag([1.0, -1.0, 1.0]);
    let mut n = s * opt.normalized.pencil(&form.normalized(), t);
    // Symmetrize away rounding.
    for i in 0..3 {
        for j in 0..i {
            let m = 0.5 * (n[(i, j)] + n[(j, i)]);
            n[(i, j)] = m;
            n[(j, i)] = m;
        }
    }
    Ok(PencilBranches::from_signed(t, mat::sym_eigen(&n).values))
}

/// `(p₀, p₁, p₂)` with `p₀ − p₁t − p₂t² = 0` at the two crossing points.
pub fn crossing_quadratic(alpha: f64, beta: f64) -> (f64, f64, f64) {
    let (a, b) = (alpha, beta);
    let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
    let (b2, b3, b4, b5) = (b * b, b * b * b, b.powi(4), b.powi(5));
    let p0 = 2.0
        * (a4 * b2 + 2.0 * a4 * b + a4
            - 2.0 * a2 * b3
            - 4.0 * a2 * b2
            - 2.0 * a2 * b
            - a * b5
            - a * b4
            + 2.0 * a * b3
            + 2.0 * a * b2
            - a * b
            - a
            + b5
            + b4
            + b2
            + b);
    let p1 = 4.0 * a3 * b2
        + 8.0 * a3 * b
        + 4.0 * a3
        + a2 * b3
        + 7.0 * a2 * b2
        + 7.0 * a2 * b
        + a2
        + 2.0 * a * b4
        - 4.0 * a * b3
        - 12.0 * a * b2
        - 4.0 * a * b
        + 2.0 * a
        - b5
        - 6.0 * b4
        - b3
        - b2
        - 6.0 * b
        - 1.0;
    let p2 = -2.0 * a2 * b2
        - 4.0 * a2 * b
        - 2.0 * a2
        - a * b3
        - 7.0 * a * b2
        - 7.0 * a * b
        - a
        - b4
        - 4.0 * b3
        + 2.0 * b2
        - 4.0 * b
        - 1.0;
    (p0, p1, p2)
}

/// Branch coincidence required at a certified crossing, relative.
pub const CROSSING_COINCIDENCE: f64 = 1e-7;

/// The interval `[t₋, t₊]` on which `H` stays smooth along the optimal pencil.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingInterval {
    pub t_minus: f64,
    pub t_plus: f64,
    pub h_a: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// Relative branch gaps at `t₋` (mid/max) and `t₊` (min/mid).
    pub gap_minus: f64,
    pub gap_plus: f64,
}

impl CrossingInterval {
    pub fn h_laminate(&self) -> f64 {
        self.h_minus.max(self.h_plus)
    }

    pub fn fraction_plus(&self) -> f64 {
        self.t_minus.abs() / (self.t_plus + self.t_minus.abs())
    }
}

/// Solves the crossing quadratic and certifies both roots against the
/// closed-form branches.
pub fn crossing_interval(form: &SingularForm) -> Result<CrossingInterval> {
    crossing_interval_impl(form, 0.0)
}

/// Fault-injection hook: scales the linear coefficient of the crossing
/// quadratic by `1 + rel` before solving.
#[doc(hidden)]
pub fn crossing_interval_with_fault(form: &SingularForm, rel: f64) -> Result<CrossingInterval> {
    crossing_interval_impl(form, rel)
}

fn crossing_interval_impl(form: &SingularForm, fault: f64) -> Result<CrossingInterval> {
    form.require_distinct()?;
    let (p0, p1, p2) = crossing_quadratic(form.alpha, form.beta);
    let p1 = p1 * (1.0 + fault);
    let size = p0.abs().max(p1.abs());
    if p2.abs() <= 1e-14 * size {
        return Err(Error::DegenerateGeometry { leading: p2 });
    }
    // p₂t² + p₁t − p₀ = 0, without cancellation.
    let disc = p1 * p1 + 4.0 * p2 * p0;
    if disc < 0.0 {
        return Err(Error::CrossingConsistency(format!(
            "complex crossing roots (discriminant {disc:e})"
        )));
    }
    let q = -0.5 * (p1 + p1.signum() * disc.sqrt());
    let (r1, r2) = (q / p2, -p0 / q);
    let (t_minus, t_plus) = (r1.min(r2), r1.max(r2));
    if !(t_minus < 0.0 && t_plus > 0.0) {
        return Err(Error::CrossingConsistency(format!(
            "roots {t_minus} and {t_plus} lie on the same side of zero"
        )));
    }

    let rel_gap = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    let at_plus = branch_eigenvalues(form, t_plus)?;
    let gap_plus = rel_gap(at_plus.lam_min, at_plus.lam_mid);
    if gap_plus > CROSSING_COINCIDENCE {
        return Err(Error::Certificate {
            t: t_plus,
            reason: format!("lam_min and lam_mid differ by {gap_plus:e} relative"),
        });
    }
    let at_minus = branch_eigenvalues(form, t_minus)?;
    let gap_minus = rel_gap(at_minus.lam_mid, at_minus.lam_max);
    if gap_minus > CROSSING_COINCIDENCE {
        return Err(Error::Certificate {
            t: t_minus,
            reason: format!("lam_mid and lam_max differ by {gap_minus:e} relative"),
        });
    }

    let opt = optimal_direction(form)?;
    let a = form.normalized();
    let h = |t: f64| linear_distortion(&opt.normalized.pencil(&a, t)).map(f64::from);
    Ok(CrossingInterval {
        t_minus,
        t_plus,
        h_a: form.beta,
        h_minus: h(t_minus)?,
        h_plus: h(t_plus)?,
        gap_minus,
        gap_plus,
    })
}

/// Crossing points located without any closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScannedCrossings {
    pub t_minus: f64,
    pub t_plus: f64,
    pub evaluations: usize,
}

/// Walks `t` outward from zero in steps of `step`, tracking the Gram
/// eigenvalues of the pencil by eigenvector continuity, and bisects the first
/// sign change of a tracked branch difference on each side.
pub fn scan_crossings(form: &SingularForm, step: f64, t_max: f64) -> Result<ScannedCrossings> {
    if !(step > 0.0 && t_max > step) {
        return Err(Error::invalid("need 0 < step < t_max"));
    }
    let opt = optimal_direction(form)?;
    let a = form.normalized();
    let dir = opt.normalized;
    let mut evaluations = 0;
    let mut side = |sign: f64| -> Result<f64> {
        let mut eig = mat::gram_eigen(&a)?;
        let mut t = 0.0;
        let diff = |e: &mat::SymEigen3| [e.values[1] - e.values[0], e.values[2] - e.values[1]];
        let start = diff(&eig);
        loop {
            let next_t = t + sign * step;
            if next_t.abs() > t_max {
                return Err(Error::Certificate {
                    t: next_t,
                    reason: "no crossing within the scan range".into(),
                });
            }
            let next = mat::gram_eigen_tracked(&dir.pencil(&a, next_t), &eig.vectors)?;
            evaluations += 1;
            let d = diff(&next);
            let flipped = (0..2).find(|&k| d[k].signum() != start[k].signum());
            if let Some(k) = flipped {
                let (mut lo, mut hi) = (t, next_t);
                let mut lo_eig = eig;
                while (hi - lo).abs() > 1e-10 * lo.abs().max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    let m = mat::gram_eigen_tracked(&dir.pencil(&a, mid), &lo_eig.vectors)?;
                    evaluations += 1;
                    if diff(&m)[k].signum() == start[k].signum() {
                        lo = mid;
                        lo_eig = m;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
            t = next_t;
            eig = next;
        }
    };
    let t_plus = side(1.0)?;
    let t_minus = side(-1.0)?;
    Ok(ScannedCrossings {
        t_minus,
        t_plus,
        evaluations,
    })
}

/// Sampled evidence that `H` is smooth and concave between the crossings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub samples: usize,
    pub max_second_difference: f64,
    pub argmax_t: f64,
    pub h_a: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// `|Δ²H|/h` at `t₋` and `t₊`: order one at a kink, order `h` where smooth.
    pub kink_minus: f64,
    pub kink_plus: f64,
}

pub const CONCAVITY_TOL: f64 = 1e-8;

/// Normalized second difference `|H(t+h) − 2H(t) + H(t−h)| / h` along the
/// optimal pencil.
pub fn kink_strength(form: &SingularForm, t: f64, h: f64) -> Result<f64> {
    let opt = optimal_direction(form)?;
    let a = form.normalized();
    let f = |s: f64| linear_distortion(&opt.normalized.pencil(&a, s)).map(f64::from);
    Ok((f(t + h)? - 2.0 * f(t)? + f(t - h)?).abs() / h)
}

/// Samples `H(A + tB₀)` at 1000 points of `[t₋, t₊]`; fails with the offending
/// `t` when a second difference exceeds [`CONCAVITY_TOL`], the maximum is not
/// at the sample nearest zero, or an endpoint fails to drop below `H(A)`.
pub fn concavity_certificate(
    form: &SingularForm,
    interval: &CrossingInterval,
) -> Result<ConcavityReport> {
    const N: usize = 1000;
    let opt = optimal_direction(form)?;
    let a = form.normalized();
    let (lo, hi) = (interval.t_minus, interval.t_plus);
    let dt = (hi - lo) / (N - 1) as f64;
    let ts: Vec<f64> = (0..N).map(|i| lo + dt * i as f64).collect();
    let hs = ts
        .iter()
        .map(|&t| linear_distortion(&opt.normalized.pencil(&a, t)).map(f64::from))
        .collect::<Result<Vec<_>>>()?;

    let mut max_second_difference = f64::NEG_INFINITY;
    for i in 1..N - 1 {
        let d2 = hs[i + 1] - 2.0 * hs[i] + hs[i - 1];
        if d2 > CONCAVITY_TOL {
            return Err(Error::Certificate {
                t: ts[i],
                reason: format!("second difference {d2:e} is positive"),
            });
        }
        max_second_difference = max_second_difference.max(d2);
    }
    let imax = (0..N)
        .max_by(|&i, &j| hs[i].total_cmp(&hs[j]))
        .expect("samples");
    let argmax_t = ts[imax];
    if argmax_t.abs() > dt {
        return Err(Error::Certificate {
            t: argmax_t,
            reason: "sampled maximum is not at t = 0".into(),
        });
    }
    let h_a = form.beta;
    for (t, h) in [(lo, hs[0]), (hi, hs[N - 1])] {
        if !(h < h_a) {
            return Err(Error::Certificate {
                t,
                reason: format!("endpoint distortion {h} is not below {h_a}"),
            });
        }
    }
    let probe = |t: f64| kink_strength(form, t, 1e-6 * t.abs().max(1e-3));
    Ok(ConcavityReport {
        samples: N,
        max_second_difference,
        argmax_t,
        h_a,
        h_minus: hs[0],
        h_plus: hs[N - 1],
        kink_minus: probe(lo)?,
        kink_plus: probe(hi)?,
    })
}

/// Branch samples on `n` equally spaced points of `[t_lo, t_hi]`.
pub fn branch_table(
    form: &SingularForm,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> Result<Vec<PencilBranches>> {
    if n < 2 || !(t_lo < t_hi) {
        return Err(Error::invalid("branch table needs n >= 2 and t_lo < t_hi"));
    }
    let dt = (t_hi - t_lo) / (n - 1) as f64;
    (0..n)
        .map(|i| branch_eigenvalues(form, t_lo + dt * i as f64))
        .collect()
}

pub const BRANCH_CSV_HEADER: &str = "t,lam_min,lam_mid,lam_max,H";

pub fn branch_csv(rows: &[PencilBranches]) -> String {
    let mut out = String::from(BRANCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            r.lam_min,
            r.lam_mid,
            r.lam_max,
            r.distortion()
        );
    }
    out
}
