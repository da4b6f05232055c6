//! The linear distortion functional and energies built on it.
//!
//! For an invertible matrix the linear distortion is the ratio of the largest
//! to the smallest stretch, `H(A) = σ_max / σ_min = sqrt(λ₃ / λ₁)` with `λᵢ`
//! the eigenvalues of `AᵀA`. For a map it is the ratio of the largest to the
//! smallest image radius of a small sphere, which [`sampled_distortion`]
//! estimates directly from point evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laminate;
use crate::mat::{self, Mat3, Vec3};

/// A linear distortion value, always `>= 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistortionValue(f64);

impl DistortionValue {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h >= 1.0 {
            Ok(DistortionValue(h))
        } else {
            Err(Error::invalid(format!(
                "distortion must be finite and >= 1, got {h}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Conformal up to `rel`.
    pub fn is_conformal(self, rel: f64) -> bool {
        self.0 - 1.0 <= rel
    }
}

impl From<DistortionValue> for f64 {
    fn from(h: DistortionValue) -> f64 {
        h.0
    }
}

/// `H(A) = σ_max / σ_min`.
pub fn linear_distortion(a: &Mat3) -> Result<DistortionValue> {
    let s = mat::singular_values(a)?;
    // Rounding can push a conformal ratio a hair below one.
    Ok(DistortionValue((s[2] / s[0]).max(1.0)))
}

/// Deterministic, roughly uniform directions on the unit sphere (Fibonacci lattice).
#[derive(Clone, Debug)]
pub struct SphereSampler {
    directions: Vec<Vec3>,
}

/// Default direction count for [`sampled_distortion`].
pub const DEFAULT_SPHERE_DIRECTIONS: usize = 4096;

impl SphereSampler {
    pub fn fibonacci(n: usize) -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let directions = (0..n)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
        SphereSampler { directions }
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

impl Default for SphereSampler {
    fn default() -> Self {
        SphereSampler::fibonacci(DEFAULT_SPHERE_DIRECTIONS)
    }
}

/// Ratio `max |f(x+h) − f(x)| / min |f(x+h) − f(x)|` over `|h| = r`, evaluated
/// for each radius in descending order; returns the value at the smallest radius.
pub fn sampled_distortion<F>(f: F, x: &Vec3, radii: &[f64]) -> Result<f64>
where
    F: Fn(&Vec3) -> Vec3,
{
    sampled_distortion_with(f, x, radii, &SphereSampler::default())
}

pub fn sampled_distortion_with<F>(
    f: F,
    x: &Vec3,
    radii: &[f64],
    sampler: &SphereSampler,
) -> Result<f64>
where
    F: Fn(&Vec3) -> Vec3,
{
    if radii.is_empty() {
        return Err(Error::invalid("need at least one radius"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::invalid("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be strictly descending"));
    }
    if sampler.len() < 2 {
        return Err(Error::invalid(
            "sphere sampler needs at least two directions",
        ));
    }
    let fx = f(x);
    let mut ratio = f64::NAN;
    for &r in radii {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for d in sampler.directions() {
            let y = f(&mat::add(x, &mat::scale(d, r)));
            let len = mat::norm(&mat::sub(&y, &fx));
            lo = lo.min(len);
            hi = hi.max(len);
        }
        if !(lo > 1e-300 * r.max(1.0)) || !hi.is_finite() {
            return Err(Error::DegenerateImage(format!(
                "minimum image radius {lo:e} at sphere radius {r:e}"
            )));
        }
        ratio = hi / lo;
    }
    Ok(ratio)
}

/// Convex increasing integrand Φ applied to the distortion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergySpec {
    Identity,
    Power { p: f64 },
    Exp,
}

impl EnergySpec {
    pub fn eval(&self, h: f64) -> f64 {
        match *self {
            EnergySpec::Identity => h,
            EnergySpec::Power { p } => h.powf(p),
            EnergySpec::Exp => h.exp(),
        }
    }

    /// Checks parameters, then monotonicity and convexity by finite
    /// differences on a grid over `[1, 20]`.
    pub fn validate(&self) -> Result<()> {
        if let EnergySpec::Power { p } = *self {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::InvalidEnergy(format!(
                    "power exponent must be >= 1, got {p}"
                )));
            }
        }
        let n = 400;
        let step = 19.0 / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| self.eval(1.0 + step * i as f64)).collect();
        for (i, w) in vals.windows(3).enumerate() {
            let h = 1.0 + step * (i + 1) as f64;
            let scale = w.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if w[1] - w[0] <= 0.0 {
                return Err(Error::InvalidEnergy(format!("not increasing near h = {h}")));
            }
            if w[2] - 2.0 * w[1] + w[0] < -1e-12 * scale {
                return Err(Error::InvalidEnergy(format!("not convex near h = {h}")));
            }
        }
        Ok(())
    }
}

/// Energy over the unit cube of a map whose distortion is `h_plus` on a
/// volume fraction `fraction_plus` and `h_minus` on the rest.
pub fn energy_of_two_phase(
    h_plus: f64,
    h_minus: f64,
    fraction_plus: f64,
    phi: &EnergySpec,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&fraction_plus) {
        return Err(Error::invalid(format!(
            "volume fraction {fraction_plus} outside [0, 1]"
        )));
    }
    if !(h_plus >= 1.0 && h_minus >= 1.0) {
        return Err(Error::invalid("distortion values must be >= 1"));
    }
    Ok(fraction_plus * phi.eval(h_plus) + (1.0 - fraction_plus) * phi.eval(h_minus))
}

/// Energy deficit of the optimal laminate below the linear map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGap {
    pub delta: f64,
    pub linear_energy: f64,
    pub laminate_energy: f64,
    pub h_a: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub fraction_plus: f64,
}

/// The gap `Φ(H(A)) − ∫ Φ(H(Df))` for the optimal two-phase laminate near `A`.
///
/// Requires three distinct singular values; otherwise there is no rank-one
/// direction that lowers the distortion to second order.
pub fn energy_gap(a: &Mat3, phi: &EnergySpec) -> Result<EnergyGap> {
    phi.validate()?;
    let report = laminate::optimal_laminate(a, 1)?.distortion()?;
    let linear_energy = phi.eval(report.h_a);
    let laminate_energy =
        energy_of_two_phase(report.h_plus, report.h_minus, report.fraction_plus, phi)?;
    Ok(EnergyGap {
        delta: linear_energy - laminate_energy,
        linear_energy,
        laminate_energy,
        h_a: report.h_a,
        h_minus: report.h_minus,
        h_plus: report.h_plus,
        fraction_plus: report.fraction_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::svd_jacobi;
    use proptest::prelude::*;

    #[test]
    fn iwaniec_family_distortion() {
        for c in [1.5, 2.0, 3.0] {
            let h = linear_distortion(&Mat3::diag([1.0, c, c * c]))
                .unwrap()
                .value();
            assert!((h - c * c).abs() <= 1e-12 * c * c);
        }
        assert_eq!(linear_distortion(&Mat3::IDENTITY).unwrap().value(), 1.0);
    }

    #[test]
    fn singular_input_rejected() {
        let a = Mat3::diag([1.0, 0.0, 2.0]);
        assert!(matches!(
            linear_distortion(&a),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn distortion_value_bounds() {
        assert!(DistortionValue::new(0.5).is_err());
        assert!(DistortionValue::new(f64::NAN).is_err());
        assert!(DistortionValue::new(1.0).unwrap().is_conformal(1e-12));
    }

    #[test]
    fn sampled_distortion_of_linear_maps() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        let h = sampled_distortion(|x| a.mul_vec(x), &[0.3, -0.2, 0.5], &[1e-2, 1e-3]).unwrap();
        assert!((h - 4.0).abs() / 4.0 < 0.02, "{h}");
        assert!(h <= 4.0 + 1e-12);

        let id = sampled_distortion(|x| *x, &[0.0; 3], &[1e-2, 1e-3]).unwrap();
        assert!((id - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_distortion_errors() {
        let zero = |_: &Vec3| [0.0; 3];
        assert!(matches!(
            sampled_distortion(zero, &[0.0; 3], &[1e-2]),
            Err(Error::DegenerateImage(_))
        ));
        assert!(sampled_distortion(|x| *x, &[0.0; 3], &[1e-3, 1e-2]).is_err());
        assert!(sampled_distortion(|x| *x, &[0.0; 3], &[]).is_err());
    }

    #[test]
    fn two_phase_energy() {
        let id = EnergySpec::Identity;
        assert_eq!(energy_of_two_phase(3.0, 5.0, 0.5, &id).unwrap(), 4.0);
        assert_eq!(energy_of_two_phase(3.0, 5.0, 1.0, &id).unwrap(), 3.0);
        assert!(energy_of_two_phase(3.0, 5.0, 1.5, &id).is_err());
        assert!(energy_of_two_phase(3.0, 5.0, -0.1, &id).is_err());
    }

    #[test]
    fn energy_family_validation() {
        assert!(EnergySpec::Identity.validate().is_ok());
        assert!(EnergySpec::Power { p: 2.5 }.validate().is_ok());
        assert!(EnergySpec::Exp.validate().is_ok());
        assert!(EnergySpec::Power { p: 0.5 }.validate().is_err());
    }

    #[test]
    fn energy_gap_positive_for_distinct_values() {
        let a = Mat3::diag([1.0, 2.0, 4.0]);
        for phi in [
            EnergySpec::Identity,
            EnergySpec::Power { p: 2.0 },
            EnergySpec::Exp,
        ] {
            let gap = energy_gap(&a, &phi).unwrap();
            assert!(gap.delta > 0.0, "{phi:?}: {gap:?}");
        }
    }

    #[test]
    fn energy_gap_requires_distinct_values() {
        let id = EnergySpec::Identity;
        assert!(matches!(
            energy_gap(&Mat3::diag([1.0, 1.0, 2.0]), &id),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let c = Mat3::IDENTITY * 3.0;
        assert!(energy_gap(&c, &id).is_err());
        assert_eq!(linear_distortion(&c).unwrap().value(), 1.0);
    }

    fn arb_invertible() -> impl Strategy<Value = Mat3> {
        proptest::array::uniform9(-3.0f64..3.0)
            .prop_map(|e| Mat3::from_row_major(&e).unwrap())
            .prop_filter("well conditioned", |m| {
                let s = svd_jacobi(m).sigma;
                s[0] > 1e-2 * s[2]
            })
    }

    proptest! {
        #[test]
        fn distortion_invariances(a in arb_invertible(), b in arb_invertible(), c in arb_invertible(), k in 0.01f64..100.0) {
            let h = linear_distortion(&a).unwrap().value();
            prop_assert!(h >= 1.0);
            let hs = linear_distortion(&(a * k)).unwrap().value();
            prop_assert!((hs - h).abs() <= 1e-10 * h);
            let q = svd_jacobi(&b).u;
            let r = svd_jacobi(&c).v;
            let ho = linear_distortion(&(q * a * r)).unwrap().value();
            prop_assert!((ho - h).abs() <= 1e-9 * h);
            let hi = linear_distortion(&a.inverse().unwrap()).unwrap().value();
            prop_assert!((hi - h).abs() <= 1e-9 * h);
        }

        #[test]
        fn distortion_inequality_is_tight(a in arb_invertible()) {
            let h = linear_distortion(&a).unwrap().value();
            let svd = svd_jacobi(&a);
            let stretch = |k: usize| mat::norm(&a.mul_vec(&svd.v.column(k)));
            prop_assert!((stretch(2) - h * stretch(0)).abs() <= 1e-9 * stretch(2));
        }
    }
}
