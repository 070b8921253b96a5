/// Exact signature kernel of two linear segments whose increments have
/// inner product `z`: `sum_k z^k / (k!)^2`, i.e. `I_0(2 sqrt(z))` for
/// `z >= 0` and `J_0(2 sqrt(-z))` for `z < 0`.
///
/// Terms are accumulated until they fall below `1e-16 |sum|` past the peak
/// term. For large negative `z` the alternating series loses digits to
/// cancellation.
pub fn analytic_linear_kernel(z: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 0u64;
    loop {
        k += 1;
        term *= z / (k * k) as f64;
        sum += term;
        if ((k * k) as f64) > z.abs() && term.abs() < 1e-16 * sum.abs() {
            return sum;
        }
        if term == 0.0 {
            return sum;
        }
    }
}

/// Exact solution inside a single data cell with increment `z`, at the
/// fractional position `(s, t)` in `[0, 1]^2`.
pub fn analytic_cell_value(z: f64, s: f64, t: f64) -> f64 {
    analytic_linear_kernel(z * s * t)
}
