/// Solve a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` (so `lower[0]` is ignored), `upper[i]`
/// multiplies `x[i+1]` (`upper[n-1]` ignored). `rhs` is overwritten with the
/// solution; `scratch` must have the same length. The matrices built by the
/// PDE stepper are strictly diagonally dominant, so no pivoting is needed.
pub(crate) fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    debug_assert!(n > 0 && lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}
