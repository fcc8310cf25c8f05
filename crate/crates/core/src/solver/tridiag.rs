/// Solves `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i` in place by the Thomas
/// algorithm. `a[0]` and `c[n-1]` are ignored. `c` and `d` are overwritten;
/// the solution is left in `d`.
///
/// Assumes diagonal dominance, which the viscous systems guarantee.
pub fn solve_in_place(a: &[f64], b: &[f64], c: &mut [f64], d: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    let mut beta = b[0];
    c[0] /= beta;
    d[0] /= beta;
    for i in 1..n {
        beta = b[i] - a[i] * c[i - 1];
        if i < n - 1 {
            c[i] /= beta;
        }
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
}
