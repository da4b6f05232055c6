//! Linear distortion of 3×3 deformation gradients and its failure of
//! rank-one convexity.
//!
//! * [`distortion`]: `H(A) = σ_max/σ_min`, a sphere-sampling estimator for
//!   maps, and energies `Φ∘H`.
//! * [`rank_one`]: derivatives of `H` along `A + t(u⊗v)` and the closed-form
//!   direction of steepest second-order decrease.
//! * [`crossing`]: Gram eigenvalue branches along that direction and the
//!   crossing interval `[t₋, t₊]`.
//! * [`laminate`]: the sawtooth laminates realizing the drop in distortion.
//! * [`verify`]: a self-check comparing every closed form to an oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod crossing;
pub mod distortion;
pub mod error;
pub mod laminate;
pub mod mat;
pub mod rank_one;
pub mod tol;
pub mod verify;

pub use crossing::{
    branch_eigenvalues, concavity_certificate, crossing_interval, pencil_charpoly, scan_crossings,
    t_of_lambda, CharPoly, ConcavityReport, CrossingInterval, PencilBranches,
};
pub use distortion::{
    energy_gap, energy_of_two_phase, linear_distortion, sampled_distortion, DistortionValue,
    EnergyGap, EnergySpec,
};
pub use error::{Error, Result};
pub use laminate::{
    jump_sweep, lamination_angle, optimal_laminate, JumpReport, LaminateSpec, Phase, Sawtooth,
    SweepRow,
};
pub use mat::{gram_eigen, svd3, Mat3, SingularForm, SymEigen3, Vec3};
pub use rank_one::{
    directional_series, grid_oracle, iwaniec_example, optimal_direction, DirectionalSeries,
    OptimalDirection, RankOneDir, SphericalParam,
};
