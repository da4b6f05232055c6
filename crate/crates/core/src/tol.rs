//! Shared comparison tolerances.

/// Default relative tolerance for eigenvalue and distortion comparisons.
pub const REL: f64 = 1e-9;

/// Absolute floor used together with [`REL`].
pub const ABS_FLOOR: f64 = 1e-12;

/// Orthonormality tolerance for eigenvector frames and SVD factors.
pub const ORTHO: f64 = 1e-12;

/// `|a - b| <= rel * max(|a|, |b|) + abs`.
#[inline]
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// Relative difference with the default absolute floor in the denominator.
#[inline]
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(ABS_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_uses_both_floors() {
        assert!(close(1.0, 1.0 + 1e-10, REL, ABS_FLOOR));
        assert!(!close(1.0, 1.0 + 1e-6, REL, ABS_FLOOR));
        assert!(close(0.0, 1e-13, REL, ABS_FLOOR));
        assert_eq!(rel_diff(0.0, 0.0), 0.0);
    }
}
