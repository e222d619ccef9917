//! Quadrature helpers: Gauss–Legendre rules and composite Simpson sums.

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes by Newton iteration on `P_n` seeded with the Chebyshev-like
/// approximation; accurate to machine precision for the orders used here.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "need at least a 2-point rule");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess for the i-th positive root
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pd(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_pd(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f by a single rule application.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// ∫_a^b f by `panels` equal panels of this rule.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| self.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &f))
            .sum()
    }
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Simpson on uniformly spaced samples.
///
/// Odd sample counts use pure Simpson; an even count closes the last
/// interval with the 3/8 rule so no accuracy cliff appears when callers
/// hand over grids of either parity.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3, "need at least 3 samples");
    if n % 2 == 1 {
        let mut s = values[0] + values[n - 1];
        for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * h / 3.0
    } else {
        // Simpson on the first n-4 intervals + 3/8 on the last three.
        let head = &values[..n - 3];
        let mut s = simpson_uniform(head, h);
        s += 3.0 * h / 8.0 * (values[n - 4] + 3.0 * values[n - 3] + 3.0 * values[n - 2] + values[n - 1]);
        s
    }
}

/// Cumulative integral on uniform samples (trapezoid with 4th-order end
/// correction is overkill here; plain trapezoid suffices for diagnostics).
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is the highest exactly integrated by 8 points
        let exact = 2.0 / 15.0; // ∫_{-1}^{1} x^14 dx
        assert_relative_eq!(gl.integrate(-1.0, 1.0, |x| x.powi(14)), exact, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_odd_order() {
        let gl = GaussLegendre::new(7);
        assert_relative_eq!(gl.integrate(0.0, std::f64::consts::PI, f64::sin), 2.0, max_relative = 1e-10);
    }

    #[test]
    fn simpson_both_parities() {
        let h = 0.01;
        for n in [101usize, 100] {
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
            let exact = ((n - 1) as f64 * h).exp() - 1.0;
            assert_relative_eq!(simpson_uniform(&vals, h), exact, max_relative = 1e-9);
        }
    }
}
