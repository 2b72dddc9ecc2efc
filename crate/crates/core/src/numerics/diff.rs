/// Default relative step for central differences; the step for coordinate i
/// is `h * (1 + |x_i|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` at `x`. Errors from `f` propagate.
pub fn finite_diff_gradient<F, E>(mut f: F, x: &[f64], h: Option<f64>) -> Result<Vec<f64>, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let h = h.unwrap_or(DEFAULT_FD_STEP);
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let step = h * (1.0 + x[i].abs());
        probe[i] = x[i] + step;
        let up = f(&probe)?;
        probe[i] = x[i] - step;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}
