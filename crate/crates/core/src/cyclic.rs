//! Cyclic tridiagonal linear systems
//! `lower_i x_{i−1} + diag_i x_i + upper_i x_{i+1} = rhs_i` with indices taken mod `n`.
//!
//! The two corner entries are treated as a rank-one correction of an ordinary
//! tridiagonal matrix (Sherman–Morrison), so a solve costs two Thomas sweeps.

/// Solves the cyclic system in place of a fresh vector. `n ≥ 3`.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 3 && lower.len() == n && upper.len() == n && rhs.len() == n);
    let alpha = upper[n - 1]; // row n−1, column 0
    let beta = lower[0]; // row 0, column n−1
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = thomas(lower, &b, upper, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(lower, &b, upper, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Plain tridiagonal solve; `lower[0]` and `upper[n−1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    x[0] = rhs[0] / piv;
    for i in 1..n {
        c[i] = upper[i - 1] / piv;
        piv = diag[i] - lower[i] * c[i];
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}

/// `y = A x` for the cyclic tridiagonal `A`.
pub fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| lower[i] * x[(i + n - 1) % n] + diag[i] * x[i] + upper[i] * x[(i + 1) % n])
        .collect()
}
