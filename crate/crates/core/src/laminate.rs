//! Sawtooth laminates `f_j(x) = Ax + a(j u·x) v / j` built on the optimal
//! direction, their jump ratios and lamination angles, and parameter sweeps.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::crossing_interval;
use crate::distortion::linear_distortion;
use crate::error::{Error, Result};
use crate::mat::{self, svd3, Mat3, SingularForm, Vec3};
use crate::rank_one::{optimal_direction, quadratic_form, RankOneDir};

/// Periodic piecewise-linear profile with slopes `t₋ < 0 < t₊`, `a(0) = 0`
/// and `a(1/t₊) = a(1/t₋) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sawtooth {
    t_minus: f64,
    t_plus: f64,
}

impl Sawtooth {
    pub fn new(t_minus: f64, t_plus: f64) -> Result<Self> {
        if !(t_minus < 0.0 && t_plus > 0.0 && t_minus.is_finite() && t_plus.is_finite()) {
            return Err(Error::invalid(format!(
                "need t_minus < 0 < t_plus, got {t_minus}, {t_plus}"
            )));
        }
        Ok(Sawtooth { t_minus, t_plus })
    }

    pub fn t_minus(&self) -> f64 {
        self.t_minus
    }

    pub fn t_plus(&self) -> f64 {
        self.t_plus
    }

    pub fn period(&self) -> f64 {
        1.0 / self.t_plus - 1.0 / self.t_minus
    }

    /// Share of each period spent on the rising (`t₊`) piece.
    pub fn fraction_plus(&self) -> f64 {
        self.t_minus.abs() / (self.t_plus + self.t_minus.abs())
    }

    /// Offset into the current period, measured from the peak at `1/t₋`, and
    /// whether it falls on the falling piece.
    fn locate(&self, r: f64) -> (f64, bool) {
        let m = (r - 1.0 / self.t_minus).rem_euclid(self.period());
        (m, m < (1.0 / self.t_minus).abs())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self.locate(r) {
            (m, true) => 1.0 + self.t_minus * m,
            (m, false) => self.t_plus * (m - (1.0 / self.t_minus).abs()),
        }
    }

    /// `t₋` or `t₊`; the right-hand slope at kinks.
    pub fn slope(&self, r: f64) -> f64 {
        if self.locate(r).1 {
            self.t_minus
        } else {
            self.t_plus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Minus,
    Plus,
}

/// The laminate `f_j` in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminateSpec {
    pub a: Mat3,
    pub dir: RankOneDir,
    pub t_minus: f64,
    pub t_plus: f64,
    pub j: u32,
}

/// Builds `f_j` from the optimal direction and certified crossings of `a`.
pub fn optimal_laminate(a: &Mat3, j: u32) -> Result<LaminateSpec> {
    if j == 0 {
        return Err(Error::invalid("j must be positive"));
    }
    let form = svd3(a)?;
    let opt = optimal_direction(&form)?;
    let iv = crossing_interval(&form)?;
    Ok(LaminateSpec {
        a: *a,
        dir: opt.physical,
        t_minus: opt.physical_t(iv.t_minus),
        t_plus: opt.physical_t(iv.t_plus),
        j,
    })
}

impl LaminateSpec {
    pub fn sawtooth(&self) -> Sawtooth {
        Sawtooth {
            t_minus: self.t_minus,
            t_plus: self.t_plus,
        }
    }

    fn phase_coordinate(&self, x: &Vec3) -> f64 {
        self.j as f64 * mat::dot(&self.dir.u, x)
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        let amp = self.sawtooth().eval(self.phase_coordinate(x)) / self.j as f64;
        mat::add(&self.a.mul_vec(x), &mat::scale(&self.dir.v, amp))
    }

    pub fn gradient(&self, x: &Vec3) -> Mat3 {
        self.a + self.dir.matrix() * self.sawtooth().slope(self.phase_coordinate(x))
    }

    pub fn phase(&self, x: &Vec3) -> Phase {
        if self.sawtooth().slope(self.phase_coordinate(x)) > 0.0 {
            Phase::Plus
        } else {
            Phase::Minus
        }
    }

    /// `(A + t₋B₀, A + t₊B₀)`.
    pub fn phase_matrices(&self) -> (Mat3, Mat3) {
        let b = self.dir.matrix();
        (self.a + b * self.t_minus, self.a + b * self.t_plus)
    }

    /// Centre of the `k`-th slab of the given phase on the line through the
    /// origin along `u`, together with the slab half-width.
    pub fn slab_center(&self, phase: Phase, k: i64) -> (Vec3, f64) {
        let saw = self.sawtooth();
        let j = self.j as f64;
        let (offset, half) = match phase {
            Phase::Plus => (0.5 / self.t_plus, 0.5 / self.t_plus),
            Phase::Minus => (0.5 / self.t_minus, 0.5 / self.t_minus.abs()),
        };
        let r = offset + k as f64 * saw.period();
        (mat::scale(&self.dir.u, r / j), half / j)
    }

    pub fn distortion(&self) -> Result<JumpReport> {
        let h_a = linear_distortion(&self.a)?.value();
        let (gm, gp) = self.phase_matrices();
        let h_minus = linear_distortion(&gm)?.value();
        let h_plus = linear_distortion(&gp)?.value();
        let h_laminate = h_minus.max(h_plus);
        if !(h_laminate < h_a) {
            return Err(Error::Certificate {
                t: if h_minus >= h_plus {
                    self.t_minus
                } else {
                    self.t_plus
                },
                reason: format!("laminate distortion {h_laminate} is not below {h_a}"),
            });
        }
        Ok(JumpReport {
            h_a,
            h_minus,
            h_plus,
            h_laminate,
            ratio: h_a / h_laminate,
            fraction_plus: self.sawtooth().fraction_plus(),
            det_minus: gm.det(),
            det_plus: gp.det(),
        })
    }
}

/// Distortion of the linear map against that of its laminate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub h_a: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub h_laminate: f64,
    pub ratio: f64,
    pub fraction_plus: f64,
    pub det_minus: f64,
    pub det_plus: f64,
}

/// Angle between the lamination normal `u₀` and the principal axis `e₃`.
pub fn lamination_angle(form: &SingularForm) -> Result<f64> {
    form.require_distinct()?;
    let (a, b) = (form.alpha, form.beta);
    let cos = (b - 1.0) * b.sqrt() / (SQRT_2 * ((b + 1.0) * quadratic_form(a, b)).sqrt());
    Ok(cos.clamp(-1.0, 1.0).acos())
}

/// Limit of `cos θ` when `α = kβ` and `β → ∞`.
pub fn weak_anisotropy_cos(k: f64) -> f64 {
    1.0 / (SQRT_2 * (k * k + k + 1.0).sqrt())
}

/// One successful sweep cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpCell {
    pub t_minus: f64,
    pub t_plus: f64,
    pub h_a: f64,
    pub h_laminate: f64,
    pub ratio: f64,
    pub angle_rad: f64,
    pub fraction_plus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub outcome: std::result::Result<JumpCell, String>,
}

pub const SWEEP_MAX_PARAM: f64 = 1e8;
pub const JUMP_BOUND_SLACK: f64 = 1e-9;

fn sweep_cell(alpha: f64, beta: f64) -> Result<JumpCell> {
    if !(alpha > 1.0 && alpha < beta && beta <= SWEEP_MAX_PARAM) {
        return Err(Error::invalid(format!(
            "cell ({alpha}, {beta}) outside 1 < alpha < beta <= 1e8"
        )));
    }
    let form = SingularForm::sing(alpha, beta)?;
    let a = form.normalized();
    let spec = optimal_laminate(&a, 1)?;
    let rep = spec.distortion()?;
    if !(rep.det_minus > 0.0 && rep.det_plus > 0.0) {
        return Err(Error::Certificate {
            t: if rep.det_minus <= 0.0 {
                spec.t_minus
            } else {
                spec.t_plus
            },
            reason: "phase gradient is not orientation preserving".into(),
        });
    }
    if rep.ratio > SQRT_2 + JUMP_BOUND_SLACK {
        return Err(Error::Certificate {
            t: 0.0,
            reason: format!("jump ratio {} exceeds sqrt(2)", rep.ratio),
        });
    }
    Ok(JumpCell {
        t_minus: spec.t_minus,
        t_plus: spec.t_plus,
        h_a: rep.h_a,
        h_laminate: rep.h_laminate,
        ratio: rep.ratio,
        angle_rad: lamination_angle(&form)?,
        fraction_plus: rep.fraction_plus,
    })
}

/// Evaluates every `(α, β)` cell in parallel; output order matches input order
/// and failing cells are recorded rather than aborting the sweep.
pub fn jump_sweep(cells: &[(f64, f64)]) -> Vec<SweepRow> {
    cells
        .par_iter()
        .map(|&(alpha, beta)| SweepRow {
            alpha,
            beta,
            outcome: sweep_cell(alpha, beta).map_err(|e| e.to_string()),
        })
        .collect()
}

/// `α` fixed, `β` over `betas`.
pub fn strong_regime(alpha: f64, betas: &[f64]) -> Vec<(f64, f64)> {
    betas.iter().map(|&b| (alpha, b)).collect()
}

/// `α = kβ` for each `k` in `ks` and `β` in `betas`, α-major. `k = 1` is
/// replaced by `β = α + 1`, the bounded-gap limit.
pub fn weak_regime(ks: &[f64], alphas: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(ks.len() * alphas.len());
    for &k in ks {
        for &a in alphas {
            out.push(if k >= 1.0 { (a, a + 1.0) } else { (a, a / k) });
        }
    }
    out
}

/// `β = α²` for each `α`.
pub fn square_path(alphas: &[f64]) -> Vec<(f64, f64)> {
    alphas.iter().map(|&a| (a, a * a)).collect()
}

/// Largest ratio among successful rows and the failure count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_ratio: f64,
    pub argmax_alpha: f64,
    pub argmax_beta: f64,
    pub cells: usize,
    pub failures: usize,
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let mut s = SweepSummary {
        max_ratio: f64::NAN,
        argmax_alpha: f64::NAN,
        argmax_beta: f64::NAN,
        cells: rows.len(),
        failures: 0,
    };
    for row in rows {
        match &row.outcome {
            Ok(c) if !(c.ratio <= s.max_ratio) => {
                s.max_ratio = c.ratio;
                s.argmax_alpha = row.alpha;
                s.argmax_beta = row.beta;
            }
            Ok(_) => {}
            Err(_) => s.failures += 1,
        }
    }
    s
}

pub const SWEEP_CSV_HEADER: &str =
    "alpha,beta,t_minus,t_plus,h_A,h_laminate,ratio,angle_rad,fraction_plus";

/// Successful rows in input order; failed cells are left out.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        if let Ok(c) = &row.outcome {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.alpha,
                row.beta,
                c.t_minus,
                c.t_plus,
                c.h_a,
                c.h_laminate,
                c.ratio,
                c.angle_rad,
                c.fraction_plus
            );
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub j: u32,
    pub max_deviation: f64,
    pub bound: f64,
    /// Largest `H(Df_j)` over the sampled points.
    pub h_fj: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub h_a: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(max_deviation)` against `log j`.
    pub slope: f64,
}

/// Uniform samples of the unit cube from a seeded stream.
pub fn cube_samples(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()
}

/// Sup-norm distance of `f_j` from `A x` on sampled points of the unit cube
/// for each `j`, with the distortion of `f_j` at the same points.
pub fn convergence_study(
    a: &Mat3,
    j_list: &[u32],
    samples: usize,
    seed: u64,
) -> Result<ConvergenceStudy> {
    if j_list.is_empty() || j_list[0] == 0 || j_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("j_list must be ascending positive integers"));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let base = optimal_laminate(a, 1)?;
    let points = cube_samples(samples, seed);
    let mut rows = Vec::with_capacity(j_list.len());
    for &j in j_list {
        let spec = LaminateSpec { j, ..base };
        let (gm, gp) = spec.phase_matrices();
        let (hm, hp) = (
            linear_distortion(&gm)?.value(),
            linear_distortion(&gp)?.value(),
        );
        let mut max_deviation = 0.0_f64;
        let mut h_fj = 0.0_f64;
        for x in &points {
            let dev = mat::norm(&mat::sub(&spec.eval(x), &a.mul_vec(x)));
            max_deviation = max_deviation.max(dev);
            h_fj = h_fj.max(match spec.phase(x) {
                Phase::Minus => hm,
                Phase::Plus => hp,
            });
        }
        rows.push(ConvergenceRow {
            j,
            max_deviation,
            bound: 1.0 / j as f64,
            h_fj,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.j as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_deviation.ln()).collect();
    Ok(ConvergenceStudy {
        h_a: linear_distortion(a)?.value(),
        slope: loglog_slope(&xs, &ys),
        rows,
    })
}

/// Least-squares slope; `NaN` with fewer than two distinct abscissae.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `(x, f_j(x), phase)` triples for external visualization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySample {
    pub x: Vec3,
    pub fx: Vec3,
    pub phase: Phase,
}

pub fn sample_geometry(spec: &LaminateSpec, n: usize, seed: u64) -> Vec<GeometrySample> {
    cube_samples(n, seed)
        .into_iter()
        .map(|x| GeometrySample {
            x,
            fx: spec.eval(&x),
            phase: spec.phase(&x),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::sampled_distortion;

    fn saw() -> Sawtooth {
        Sawtooth::new(-2.0, 1.0).unwrap()
    }

    #[test]
    fn sawtooth_shape() {
        let s = saw();
        assert_eq!(s.eval(0.0), 0.0);
        assert!((s.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((s.eval(-0.5) - 1.0).abs() < 1e-15);
        assert!((s.eval(1.0 + s.period()) - 1.0).abs() < 1e-14);
        assert_eq!(s.period(), 1.5);
        assert_eq!(s.slope(0.0), 1.0);
        assert_eq!(s.slope(1.0), -2.0);
        assert_eq!(s.slope(-0.25), -2.0);
        for k in -300..300 {
            let r = k as f64 * 0.0137;
            let v = s.eval(r);
            assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn sawtooth_fraction_balances_slopes() {
        let s = Sawtooth::new(-2.04584, 1.19219).unwrap();
        let f = s.fraction_plus();
        assert!((f * s.t_plus() + (1.0 - f) * s.t_minus()).abs() < 1e-15);
        // Measure of the rising piece over a fine grid of one period.
        let n = 100_000;
        let plus = (0..n)
            .filter(|&i| s.slope((i as f64 + 0.5) * s.period() / n as f64) > 0.0)
            .count();
        assert!((plus as f64 / n as f64 - f).abs() < 1e-4);
        assert!(Sawtooth::new(1.0, 2.0).is_err());
    }

    #[test]
    fn sawtooth_is_continuous() {
        let s = saw();
        for k in -20..20 {
            for kink in [0.0, 1.0] {
                let r = kink + k as f64 * s.period();
                assert!((s.eval(r - 1e-9) - s.eval(r + 1e-9)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn laminate_basics() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let spec = optimal_laminate(&a, 10).unwrap();
        let x = mat::cross(&spec.dir.u, &[0.3, -0.2, 0.9]);
        assert!(mat::norm(&mat::sub(&spec.eval(&x), &a.mul_vec(&x))) < 1e-15);
        let on_plane = mat::scale(&spec.dir.v, 0.0);
        assert_eq!(spec.eval(&on_plane), a.mul_vec(&on_plane));
        let (gm, gp) = spec.phase_matrices();
        let jump = gp - gm;
        // Rank-one compatibility.
        assert!(jump.det().abs() < 1e-12);
        let e = mat::gram_eigen(&jump).unwrap();
        assert!(e.lam2() < 1e-14 * e.lam3());
        for x in cube_samples(500, 3) {
            assert!(mat::norm(&mat::sub(&spec.eval(&x), &a.mul_vec(&x))) <= 0.1 + 1e-15);
            let g = spec.gradient(&x);
            assert!((g - gm).max_abs() < 1e-12 || (g - gp).max_abs() < 1e-12);
        }
    }

    #[test]
    fn jump_report_at_2_4() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let r1 = optimal_laminate(&a, 1).unwrap().distortion().unwrap();
        let r7 = optimal_laminate(&a, 7).unwrap().distortion().unwrap();
        assert_eq!(r1, r7);
        assert!(r1.ratio > 1.0 && r1.ratio <= SQRT_2);
        assert!((r1.h_minus - 3.97539).abs() < 1e-5 && (r1.h_plus - 3.97539).abs() < 1e-5);
        assert!(optimal_laminate(&(Mat3::IDENTITY * 3.0), 1).is_err());
        assert!(optimal_laminate(&a, 0).is_err());
    }

    #[test]
    fn laminate_of_rotated_matrix_has_same_jump() {
        let q = Mat3::from_rows([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let (s, c) = (0.6_f64, 0.8_f64);
        let r = Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]);
        let a = q * Mat3::diag([1.0, 2.0, 4.0]) * r * 2.5;
        let rep = optimal_laminate(&a, 1).unwrap().distortion().unwrap();
        let base = optimal_laminate(&Mat3::diag([1.0, 2.0, 4.0]), 1)
            .unwrap()
            .distortion()
            .unwrap();
        assert!((rep.ratio - base.ratio).abs() < 1e-9);
        assert!((rep.h_laminate - base.h_laminate).abs() < 1e-9);
    }

    #[test]
    fn sampled_distortion_inside_slabs() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let spec = optimal_laminate(&a, 10).unwrap();
        let (gm, gp) = spec.phase_matrices();
        for (phase, g) in [(Phase::Minus, gm), (Phase::Plus, gp)] {
            let (x, half) = spec.slab_center(phase, 1);
            assert_eq!(spec.phase(&x), phase);
            let h = sampled_distortion(|y| spec.eval(y), &x, &[1e-2 * half, 1e-3 * half]).unwrap();
            let exact = linear_distortion(&g).unwrap().value();
            assert!((h - exact).abs() <= 0.02 * exact, "{h} vs {exact}");
        }
    }

    #[test]
    fn angle_matches_direction() {
        for (a, b) in [(2.0, 4.0), (1.5, 30.0), (7.0, 8.0)] {
            let f = SingularForm::sing(a, b).unwrap();
            let u = optimal_direction(&f).unwrap().normalized.u;
            let theta = lamination_angle(&f).unwrap();
            assert!((theta - u[2].acos()).abs() < 1e-9);
        }
    }

    #[test]
    fn angle_limits() {
        let strong = lamination_angle(&SingularForm::sing(2.0, 1e6).unwrap()).unwrap();
        assert!((strong - std::f64::consts::FRAC_PI_4).abs() < 1e-3);
        let near = lamination_angle(&SingularForm::sing(1e6, 1e6 + 1.0).unwrap()).unwrap();
        assert!((near - (1.0 / 6f64.sqrt()).acos()).abs() < 1e-3);
        for k in [0.25, 0.5, 0.75] {
            let f = SingularForm::sing(1e6, 1e6 / k).unwrap();
            let c = lamination_angle(&f).unwrap().cos();
            assert!((c - weak_anisotropy_cos(k)).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_is_ordered_and_bounded() {
        let cells = [
            (2.0, 10.0),
            (2.0, 100.0),
            (0.5, 3.0),
            (5.0, 4.0),
            (3.0, 9.0),
        ];
        let rows = jump_sweep(&cells);
        assert_eq!(rows.len(), cells.len());
        for (row, cell) in rows.iter().zip(&cells) {
            assert_eq!((row.alpha, row.beta), *cell);
        }
        assert!(rows[2].outcome.is_err() && rows[3].outcome.is_err());
        let s = summarize(&rows);
        assert_eq!(s.failures, 2);
        assert!(s.max_ratio > 1.0 && s.max_ratio <= SQRT_2);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with(SWEEP_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn ratio_tends_to_one_near_degeneracy() {
        let far = sweep_cell(2.0, 4.0).unwrap().ratio;
        let close = sweep_cell(2.0, 2.0 + 1e-3).unwrap().ratio;
        let low = sweep_cell(1.0 + 1e-3, 4.0).unwrap().ratio;
        assert!(close < far && close - 1.0 < 1e-3);
        assert!(low - 1.0 < far - 1.0);
    }

    #[test]
    fn regime_builders() {
        assert_eq!(
            strong_regime(2.0, &[10.0, 100.0]),
            vec![(2.0, 10.0), (2.0, 100.0)]
        );
        assert_eq!(
            weak_regime(&[0.5, 1.0], &[10.0]),
            vec![(10.0, 20.0), (10.0, 11.0)]
        );
        assert_eq!(square_path(&[3.0]), vec![(3.0, 9.0)]);
    }

    #[test]
    fn convergence_rate() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let study = convergence_study(&a, &[1, 10, 100], 10_000, 0).unwrap();
        for row in &study.rows {
            assert!(row.max_deviation <= row.bound + 1e-15);
            assert_eq!(row.h_fj.to_bits(), study.rows[0].h_fj.to_bits());
            assert!(row.h_fj < study.h_a);
        }
        assert!((study.slope + 1.0).abs() <= 0.05, "{}", study.slope);
        assert!(convergence_study(&a, &[10, 1], 10, 0).is_err());
        assert!(convergence_study(&a, &[0, 1], 10, 0).is_err());
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 0.25, 0.0625].iter().map(|y| y.ln()).collect();
        assert!((loglog_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }
}
