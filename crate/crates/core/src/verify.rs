//! Desk-scale self-check: each closed form against an independent route.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crossing::{self, crossing_interval, crossing_interval_with_fault, scan_crossings};
use crate::distortion::{energy_gap, linear_distortion, sampled_distortion, EnergySpec};
use crate::error::{Error, Result};
use crate::laminate::{self, lamination_angle, optimal_laminate, weak_anisotropy_cos, Phase};
use crate::mat::{self, jacobi_eigen, sym_eigen, Mat3, SingularForm};
use crate::rank_one::{
    directional_series, grid_oracle, optimal_direction, second_order_coefficient,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Multiplies every tolerance; values above one loosen the profile.
    pub tolerance_scale: f64,
    /// Perturbs one closed-form coefficient so the crossing check must fail.
    pub inject_fault: bool,
    pub seed: u64,
    /// Cells per axis of the `(α, β)` grid used by the direction, crossing
    /// and distortion-drop checks.
    pub grid: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerance_scale: 1.0,
            inject_fault: false,
            seed: 0,
            grid: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

type Check = fn(&VerifyOptions) -> Result<(bool, String)>;

/// `n × n` cells with `β` evenly spaced in `(1, 20]` and `α` at the midpoints
/// of `n` equal slices of `(1, β)`.
pub fn verify_cells(n: usize) -> Vec<(f64, f64)> {
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        let beta = 1.0 + 19.0 * (i + 1) as f64 / n as f64;
        for j in 0..n {
            cells.push((1.0 + (beta - 1.0) * (j as f64 + 0.5) / n as f64, beta));
        }
    }
    cells
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.grid == 0 {
        return Err(Error::invalid("verification grid must be nonempty"));
    }
    if !(opts.tolerance_scale.is_finite() && opts.tolerance_scale > 0.0) {
        return Err(Error::invalid("tolerance scale must be positive"));
    }
    let checks: [(&str, Check); 11] = [
        ("distortion_family", distortion_family),
        ("dual_eigensolvers", dual_eigensolvers),
        ("optimal_direction", optimal_direction_grid),
        ("grid_oracle", oracle),
        ("jacobi_quadratic", jacobi_quadratic),
        ("crossings", crossings),
        ("asymptotics", asymptotics),
        ("distortion_drop", distortion_drop),
        ("jump_bound", jump_bound),
        ("angles", angles),
        ("laminate", laminate_sequence),
    ];
    let checks: Vec<CheckResult> = checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f(opts) {
                Ok(r) => r,
                Err(e) => (false, e.to_string()),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
            }
        })
        .collect();
    let failures = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    Ok(VerifyReport { checks, failures })
}

fn distortion_family(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for c in [1.5, 2.0, 3.0] {
        let h = linear_distortion(&Mat3::diag([1.0, c, c * c]))?.value();
        worst = worst.max((h - c * c).abs());
    }
    Ok((
        worst <= 1e-12 * o.tolerance_scale,
        format!("max error {worst:e}"),
    ))
}

fn dual_eigensolvers(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let a = Mat3(std::array::from_fn(|_| {
            std::array::from_fn(|_| rng.gen_range(-2.0..2.0))
        }));
        let g = a.gram();
        let (x, y) = (sym_eigen(&g), jacobi_eigen(&g));
        for k in 0..3 {
            worst = worst.max((x.values[k] - y.values[k]).abs() / (1.0 + y.values[k].abs()));
        }
    }
    Ok((
        worst <= 1e-9 * o.tolerance_scale,
        format!("max scaled difference {worst:e}"),
    ))
}

fn optimal_direction_grid(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    let mut worst_d1 = 0.0_f64;
    for (alpha, beta) in verify_cells(o.grid) {
        let f = SingularForm::sing(alpha, beta)?;
        let dir = optimal_direction(&f)?.normalized;
        let series = directional_series(&f.normalized(), &dir)?;
        let expect = -2.0 * second_order_coefficient(alpha, beta);
        worst = worst.max(((series.d2 - expect) / expect).abs());
        worst_d1 = worst_d1.max(series.d1.abs());
        if series.conditioning_warning {
            return Ok((
                false,
                format!("finite differences disagree at ({alpha}, {beta})"),
            ));
        }
    }
    let ok = worst_d1 <= 1e-8 * o.tolerance_scale && worst <= 1e-6 * o.tolerance_scale;
    Ok((
        ok,
        format!("max |d1| {worst_d1:e}, max d2 relative error {worst:e}"),
    ))
}

fn oracle(o: &VerifyOptions) -> Result<(bool, String)> {
    let f = SingularForm::sing(2.0, 4.0)?;
    let best = grid_oracle(&f, 256, 128)?;
    let closed = optimal_direction(&f)?.d2;
    let undercut = (closed - best.series.d2) / closed.abs();
    let gap = (best.series.d2 - closed).abs() / closed.abs();
    let ok = undercut <= 0.01 * o.tolerance_scale && gap <= 0.01 * o.tolerance_scale;
    Ok((
        ok,
        format!("oracle d2 {} vs closed form {closed}", best.series.d2),
    ))
}

fn jacobi_quadratic(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let alpha = rng.gen_range(1.1..10.0);
        let beta = alpha + rng.gen_range(0.1..10.0);
        let f = SingularForm::sing(alpha, beta)?;
        let dir = optimal_direction(&f)?.normalized;
        let p = crossing::pencil_charpoly(&f, &dir, rng.gen_range(0.1..beta))?;
        worst = worst.max(p.higher_order_residual());
    }
    Ok((
        worst <= 1e-10 * o.tolerance_scale,
        format!("max t^3..t^6 residual {worst:e}"),
    ))
}

fn crossings(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for (alpha, beta) in verify_cells(o.grid) {
        let f = SingularForm::sing(alpha, beta)?;
        let iv = if o.inject_fault {
            crossing_interval_with_fault(&f, 1e-3)?
        } else {
            crossing_interval(&f)?
        };
        let scan = scan_crossings(&f, 1e-3, 1e3)?;
        worst = worst
            .max(((iv.t_plus - scan.t_plus) / scan.t_plus).abs())
            .max(((iv.t_minus - scan.t_minus) / scan.t_minus).abs());
    }
    Ok((
        worst <= 1e-7 * o.tolerance_scale,
        format!("max relative t difference {worst:e}"),
    ))
}

fn asymptotics(o: &VerifyOptions) -> Result<(bool, String)> {
    let iv = crossing_interval(&SingularForm::sing(2.0, 1e6)?)?;
    let ok = ((iv.t_plus - 2.0) / 2.0).abs() <= 1e-3 * o.tolerance_scale && iv.t_minus < -1e3;
    Ok((ok, format!("t_plus {}, t_minus {}", iv.t_plus, iv.t_minus)))
}

fn distortion_drop(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut min_delta = f64::INFINITY;
    for (alpha, beta) in verify_cells(o.grid) {
        let f = SingularForm::sing(alpha, beta)?;
        let iv = crossing_interval(&f)?;
        if !(iv.h_laminate() < iv.h_a) {
            return Ok((false, format!("no drop at ({alpha}, {beta})")));
        }
        min_delta = min_delta.min(energy_gap(&f.normalized(), &EnergySpec::Identity)?.delta);
    }
    Ok((
        min_delta > 0.0,
        format!("smallest energy gap {min_delta:e}"),
    ))
}

fn jump_bound(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut cells = laminate::strong_regime(2.0, &[1e1, 1e3, 1e5]);
    cells.extend(laminate::weak_regime(&[0.1, 0.5, 1.0], &[1e1, 1e3]));
    cells.extend(laminate::square_path(&[10.0, 100.0]));
    let rows = laminate::jump_sweep(&cells);
    let s = laminate::summarize(&rows);
    let all_above_one = rows
        .iter()
        .all(|r| matches!(&r.outcome, Ok(c) if c.ratio > 1.0));
    let ok = s.failures == 0 && all_above_one && s.max_ratio <= SQRT_2 + laminate::JUMP_BOUND_SLACK;
    Ok((
        ok,
        format!(
            "max ratio {} at ({}, {})",
            s.max_ratio, s.argmax_alpha, s.argmax_beta
        ),
    ))
}

fn angles(o: &VerifyOptions) -> Result<(bool, String)> {
    let strong = lamination_angle(&SingularForm::sing(2.0, 1e6)?)?;
    let near = lamination_angle(&SingularForm::sing(1e6, 1e6 + 1.0)?)?;
    let mut k_err = 0.0_f64;
    for k in [0.25, 0.5, 0.75] {
        let c = lamination_angle(&SingularForm::sing(1e6, 1e6 / k)?)?.cos();
        k_err = k_err.max((c - weak_anisotropy_cos(k)).abs());
    }
    let e1 = (strong - FRAC_PI_4).abs();
    let e2 = (near - (1.0 / 6f64.sqrt()).acos()).abs();
    let t = o.tolerance_scale;
    let ok = e1 <= 1e-3 * t && e2 <= 1e-3 * t && k_err <= 1e-6 * t;
    Ok((ok, format!("errors {e1:e}, {e2:e}, {k_err:e}")))
}

fn laminate_sequence(o: &VerifyOptions) -> Result<(bool, String)> {
    let a = Mat3::diag([1.0, 2.0, 4.0]);
    let points = laminate::cube_samples(1000, o.seed);
    let mut h_ref = None;
    for j in [1, 10] {
        let spec = optimal_laminate(&a, j)?;
        let (gm, gp) = spec.phase_matrices();
        for x in &points {
            let dev = mat::norm(&mat::sub(&spec.eval(x), &a.mul_vec(x)));
            if dev > 1.0 / j as f64 + 1e-15 {
                return Ok((false, format!("deviation {dev} exceeds 1/{j}")));
            }
            let g = spec.gradient(x);
            if (g - gm).max_abs() > 1e-12 && (g - gp).max_abs() > 1e-12 {
                return Ok((false, "gradient outside the two phases".into()));
            }
        }
        for (phase, g) in [(Phase::Minus, gm), (Phase::Plus, gp)] {
            let (x, half) = spec.slab_center(phase, 0);
            let sampled = sampled_distortion(|y| spec.eval(y), &x, &[1e-2 * half, 1e-3 * half])?;
            let exact = linear_distortion(&g)?.value();
            if (sampled - exact).abs() > 0.02 * o.tolerance_scale * exact {
                return Ok((false, format!("sampled distortion {sampled} vs {exact}")));
            }
        }
        let h = spec.distortion()?.h_laminate;
        if *h_ref.get_or_insert(h) != h {
            return Ok((false, "laminate distortion depends on j".into()));
        }
    }
    Ok((true, format!("h_laminate {}", h_ref.unwrap_or(f64::NAN))))
}
