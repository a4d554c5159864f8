use super::NumericsError;

/// Central-difference estimate of `∇f` at `x`.
pub fn central_differences<F>(f: F, x: &[f64], epsilon: f64) -> Result<Vec<f64>, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + epsilon;
        let plus = f(&probe);
        probe[i] = orig - epsilon;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(NumericsError::NonFiniteProbe { index: i });
        }
        out.push((plus - minus) / (2.0 * epsilon));
    }
    Ok(out)
}

/// Largest `|analytic_i − central_i| / max(1, |central_i|)` over all
/// coordinates.
pub fn finite_difference_check<F>(
    f: F,
    analytic: &[f64],
    x: &[f64],
    epsilon: f64,
) -> Result<f64, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    if analytic.len() != x.len() {
        return Err(NumericsError::ShapeMismatch {
            op: "finite_difference_check",
            left: vec![analytic.len()],
            right: vec![x.len()],
        });
    }
    let numeric = central_differences(f, x, epsilon)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, c)| (a - c).abs() / c.abs().max(1.0))
        .fold(0.0, f64::max))
}
