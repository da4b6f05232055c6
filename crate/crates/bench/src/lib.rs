//! Fixtures shared by the criterion benches.

use lindist::{Mat3, SingularForm};

/// The running example `diag(1, 2, 4)`.
pub fn example_form() -> SingularForm {
    SingularForm::sing(2.0, 4.0).expect("valid form")
}

/// A fixed non-diagonal matrix with distinct singular values.
pub fn general_matrix() -> Mat3 {
    Mat3::from_rows([[1.2, 0.3, -0.1], [0.0, 2.1, 0.4], [0.2, -0.3, 3.7]])
}

/// `(α, β)` cells spread over the desk-scale grid.
pub fn sweep_cells() -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    for j in 1..=10 {
        let beta = 1.0 + 1.9 * j as f64;
        for i in 0..10 {
            cells.push((1.0 + (beta - 1.0) * (0.05 + 0.1 * i as f64), beta));
        }
    }
    cells
}
