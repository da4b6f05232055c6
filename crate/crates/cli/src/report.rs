use std::fmt::Write as _;

use lindist::laminate::{cube_samples, summarize, SweepSummary};
use lindist::mat::{self, Vec3};
use lindist::rank_one::optimal_direction;
use lindist::{
    energy_gap, lamination_angle, linear_distortion, optimal_laminate, svd3, EnergyGap, EnergySpec,
    Error, JumpReport, Mat3, Phase, SingularForm, SweepRow,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Improved,
    NoRankOneImprovement,
}

/// Optimal rank-one data. Directions and `t±` are in the frame of the input
/// matrix; `d1`, `d2` are taken along the normalized direction of
/// `diag(1, α, β)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub u0: Vec3,
    pub v0: Vec3,
    pub u0_normalized: Vec3,
    pub v0_normalized: Vec3,
    pub d1: f64,
    pub d2: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub jump: JumpReport,
    pub angle_rad: f64,
    pub energy_gap: EnergyGap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub matrix: Mat3,
    pub h: f64,
    pub singular_form: SingularForm,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improvement: Option<Improvement>,
}

pub fn analyze(a: &Mat3) -> Result<AnalyzeReport, Failure> {
    let distortion = linear_distortion(a)?;
    let h = distortion.value();
    let form = svd3(a)?;
    let none = |reason: String| AnalyzeReport {
        matrix: *a,
        h,
        singular_form: form,
        status: Status::NoRankOneImprovement,
        reason: Some(reason),
        improvement: None,
    };
    if distortion.is_conformal(lindist::tol::REL) {
        return Ok(none("conformal, no improvement".into()));
    }
    let opt = match optimal_direction(&form) {
        Ok(o) => o,
        Err(e @ (Error::DegenerateSpectrum { .. } | Error::NonSmooth { .. })) => {
            return Ok(none(format!("{e}, no improvement")));
        }
        Err(e) => return Err(e.into()),
    };
    let spec = optimal_laminate(a, 1)?;
    Ok(AnalyzeReport {
        matrix: *a,
        h,
        singular_form: form,
        status: Status::Improved,
        reason: None,
        improvement: Some(Improvement {
            u0: opt.physical.u,
            v0: opt.physical.v,
            u0_normalized: opt.normalized.u,
            v0_normalized: opt.normalized.v,
            d1: opt.d1,
            d2: opt.d2,
            t_minus: spec.t_minus,
            t_plus: spec.t_plus,
            jump: spec.distortion()?,
            angle_rad: lamination_angle(&form)?,
            energy_gap: energy_gap(a, &EnergySpec::Identity)?,
        }),
    })
}

/// Sweep summary with JSON-safe fields: `None` when no cell succeeded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub cells: usize,
    pub failures: usize,
    pub max_ratio: Option<f64>,
    pub argmax_alpha: Option<f64>,
    pub argmax_beta: Option<f64>,
}

impl From<SweepSummary> for SweepStats {
    fn from(s: SweepSummary) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        SweepStats {
            cells: s.cells,
            failures: s.failures,
            max_ratio: finite(s.max_ratio),
            argmax_alpha: finite(s.argmax_alpha),
            argmax_beta: finite(s.argmax_beta),
        }
    }
}

impl SweepStats {
    pub fn of(rows: &[SweepRow]) -> Self {
        summarize(rows).into()
    }

    pub fn line(&self) -> String {
        match (self.max_ratio, self.argmax_alpha, self.argmax_beta) {
            (Some(r), Some(a), Some(b)) => format!(
                "max ratio {r} at alpha = {a}, beta = {b} ({} cells, {} failed)",
                self.cells, self.failures
            ),
            _ => format!(
                "no successful cells ({} cells, {} failed)",
                self.cells, self.failures
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminateSample {
    pub x: Vec3,
    pub fx: Vec3,
    pub phase: Phase,
    pub deviation: f64,
    /// Distance of `Df_j(x)` to the nearer phase matrix (max-abs norm).
    pub gradient_mismatch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaminateReport {
    pub j: u32,
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub within_bound: bool,
    pub fraction_plus_sampled: f64,
    pub fraction_plus_expected: f64,
    pub max_gradient_mismatch: f64,
    pub two_valued: bool,
    pub phase_minus: Mat3,
    pub phase_plus: Mat3,
    pub jump: JumpReport,
}

pub const TWO_VALUED_TOL: f64 = 1e-12;

pub fn laminate(
    a: &Mat3,
    j: u32,
    n: usize,
    seed: u64,
) -> Result<(LaminateReport, Vec<LaminateSample>), Failure> {
    if n == 0 {
        return Err(Failure::Usage("need at least one sample".into()));
    }
    let spec = optimal_laminate(a, j)?;
    let jump = spec.distortion()?;
    let (gm, gp) = spec.phase_matrices();
    let samples: Vec<LaminateSample> = cube_samples(n, seed)
        .par_iter()
        .map(|x| {
            let fx = spec.eval(x);
            let g = spec.gradient(x);
            LaminateSample {
                x: *x,
                fx,
                phase: spec.phase(x),
                deviation: mat::norm(&mat::sub(&fx, &a.mul_vec(x))),
                gradient_mismatch: (g - gm).max_abs().min((g - gp).max_abs()),
            }
        })
        .collect();
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    let mean_deviation = samples.iter().map(|s| s.deviation).sum::<f64>() / n as f64;
    let plus = samples.iter().filter(|s| s.phase == Phase::Plus).count();
    let max_gradient_mismatch = samples
        .iter()
        .map(|s| s.gradient_mismatch)
        .fold(0.0, f64::max);
    let bound = 1.0 / j as f64;
    let report = LaminateReport {
        j,
        samples: n,
        seed,
        bound,
        max_deviation,
        mean_deviation,
        within_bound: max_deviation <= bound,
        fraction_plus_sampled: plus as f64 / n as f64,
        fraction_plus_expected: jump.fraction_plus,
        max_gradient_mismatch,
        two_valued: max_gradient_mismatch <= TWO_VALUED_TOL,
        phase_minus: gm,
        phase_plus: gp,
        jump,
    };
    Ok((report, samples))
}

pub const SAMPLE_CSV_HEADER: &str = "x,y,z,fx,fy,fz,phase,deviation";

pub fn samples_csv(samples: &[LaminateSample]) -> String {
    let mut out = format!("{SAMPLE_CSV_HEADER}\n");
    for s in samples {
        let phase = match s.phase {
            Phase::Minus => "minus",
            Phase::Plus => "plus",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{phase},{}",
            s.x[0], s.x[1], s.x[2], s.fx[0], s.fx[1], s.fx[2], s.deviation
        );
    }
    out
}

/// `key,value` lines for the scalar fields of an analysis.
pub fn analyze_csv(r: &AnalyzeReport) -> String {
    let mut out = String::from("key,value\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    row("h", r.h.to_string());
    row("scale", r.singular_form.scale.to_string());
    row("alpha", r.singular_form.alpha.to_string());
    row("beta", r.singular_form.beta.to_string());
    row(
        "status",
        match r.status {
            Status::Improved => "improved".into(),
            Status::NoRankOneImprovement => "no_rank_one_improvement".into(),
        },
    );
    if let Some(reason) = &r.reason {
        row("reason", format!("\"{}\"", reason.replace('"', "\"\"")));
    }
    if let Some(i) = &r.improvement {
        for (k, v) in [("u0", i.u0), ("v0", i.v0)] {
            for (c, x) in v.iter().enumerate() {
                row(&format!("{k}_{c}"), x.to_string());
            }
        }
        for (k, v) in [
            ("d1", i.d1),
            ("d2", i.d2),
            ("t_minus", i.t_minus),
            ("t_plus", i.t_plus),
            ("h_minus", i.jump.h_minus),
            ("h_plus", i.jump.h_plus),
            ("h_laminate", i.jump.h_laminate),
            ("ratio", i.jump.ratio),
            ("fraction_plus", i.jump.fraction_plus),
            ("angle_rad", i.angle_rad),
            ("energy_gap", i.energy_gap.delta),
        ] {
            row(k, v.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_report_round_trips() {
        for a in [
            Mat3::diag([1.0, 2.0, 4.0]),
            Mat3::IDENTITY,
            Mat3::diag([1.0, 3.0, 3.0]),
        ] {
            let r = analyze(&a).unwrap();
            let text = serde_json::to_string_pretty(&r).unwrap();
            assert_eq!(serde_json::from_str::<AnalyzeReport>(&text).unwrap(), r);
        }
    }

    #[test]
    fn laminate_report_round_trips() {
        let (r, _) = laminate(&Mat3::diag([1.0, 2.0, 4.0]), 3, 200, 7).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<LaminateReport>(&text).unwrap(), r);
    }

    #[test]
    fn degenerate_spectrum_has_reason() {
        let r = analyze(&Mat3::diag([1.0, 3.0, 3.0])).unwrap();
        assert_eq!(r.status, Status::NoRankOneImprovement);
        assert!(r.reason.unwrap().contains("no improvement"));
        assert!(r.improvement.is_none());
    }
}
