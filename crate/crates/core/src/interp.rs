//! Local cubic interpolation on sorted abscissae.

/// Four-point Lagrange cubic interpolation of `(xs, ys)` at `x`.
///
/// `xs` must be strictly increasing. Near the ends the stencil is shifted
/// inward; outside the range the boundary stencil extrapolates.
pub fn cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    if n < 4 {
        // degrade to linear on the nearest segment
        let i = segment(xs, x).min(n - 2);
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] * (1.0 - t) + ys[i + 1] * t;
    }
    let i = segment(xs, x);
    let lo = i.saturating_sub(1).min(n - 4);
    let (x0, x1, x2, x3) = (xs[lo], xs[lo + 1], xs[lo + 2], xs[lo + 3]);
    let (y0, y1, y2, y3) = (ys[lo], ys[lo + 1], ys[lo + 2], ys[lo + 3]);
    let l0 = (x - x1) * (x - x2) * (x - x3) / ((x0 - x1) * (x0 - x2) * (x0 - x3));
    let l1 = (x - x0) * (x - x2) * (x - x3) / ((x1 - x0) * (x1 - x2) * (x1 - x3));
    let l2 = (x - x0) * (x - x1) * (x - x3) / ((x2 - x0) * (x2 - x1) * (x2 - x3));
    let l3 = (x - x0) * (x - x1) * (x - x2) / ((x3 - x0) * (x3 - x1) * (x3 - x2));
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

/// Index `i` with `xs[i] <= x < xs[i+1]`, clamped to `[0, n-2]`.
pub fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_cubics_exactly() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.25 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for &x in &[0.0, 0.05, 1.234, 4.87, 4.9] {
            assert_relative_eq!(cubic(&xs, &ys, x), f(x), max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn smooth_function_fourth_order() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (-x).exp()).collect();
        let err = (cubic(&xs, &ys, 2.512) - (-2.512f64).exp()).abs();
        assert!(err < 1e-7, "err = {err}");
    }
}
