//! Double-ring bump configurations and the approximate solution `W_{r,t}`.
//!
//! The `2m` bump centers sit on two horizontal `m`-gons of a sphere of
//! radius `r`:
//!
//! ```text
//!   x̄_i = r(√(1−t²) cos(2(i−1)π/m), √(1−t²) sin(2(i−1)π/m),  t)
//!   x̲_i = r(√(1−t²) cos(2(i−1)π/m), √(1−t²) sin(2(i−1)π/m), −t)
//! ```

use crate::error::Error;
use crate::groundstate::{evaluate_profile, GroundState, Profile};
use crate::Result;

/// Double-ring bump configuration.
#[derive(Debug, Clone)]
pub struct BumpConfig {
    pub m: usize,
    pub r: f64,
    pub t: f64,
    pub upper_points: Vec<[f64; 3]>,
    pub lower_points: Vec<[f64; 3]>,
}

/// Build the `2m` bump centers.
pub fn make_config(m: usize, r: f64, t: f64) -> Result<BumpConfig> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("bump count m = {m} < 2")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("ring radius r = {r} must be positive")));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("height parameter t = {t} outside [0, 1)")));
    }
    let rho = (1.0 - t * t).sqrt();
    let mut upper = Vec::with_capacity(m);
    let mut lower = Vec::with_capacity(m);
    for i in 0..m {
        let ang = 2.0 * (i as f64) * std::f64::consts::PI / m as f64;
        let (sin, cos) = ang.sin_cos();
        upper.push([r * rho * cos, r * rho * sin, r * t]);
        lower.push([r * rho * cos, r * rho * sin, -r * t]);
    }
    Ok(BumpConfig { m, r, t, upper_points: upper, lower_points: lower })
}

impl BumpConfig {
    /// All `2m` centers, upper ring first.
    pub fn all_points(&self) -> impl Iterator<Item = &[f64; 3]> {
        self.upper_points.iter().chain(self.lower_points.iter())
    }

    /// Closed-form distance `|x̄₁ − x̄_i|` (1-based `i`).
    pub fn ring_distance(&self, i: usize) -> f64 {
        2.0 * self.r
            * (1.0 - self.t * self.t).sqrt()
            * ((i as f64 - 1.0) * std::f64::consts::PI / self.m as f64).sin()
    }

    /// Closed-form distance `|x̄₁ − x̲_i|` (1-based `i`).
    pub fn cross_distance(&self, i: usize) -> f64 {
        let s = ((i as f64 - 1.0) * std::f64::consts::PI / self.m as f64).sin();
        2.0 * self.r * ((1.0 - self.t * self.t) * s * s + self.t * self.t).sqrt()
    }

    /// Smallest pairwise separation among the `2m` centers.
    pub fn min_separation(&self) -> f64 {
        let ring = self.ring_distance(2);
        let layer = 2.0 * self.r * self.t;
        if self.t == 0.0 {
            ring
        } else {
            ring.min(layer)
        }
    }
}

/// Separation summary of a configuration.
#[derive(Debug, Clone)]
pub struct Separations {
    /// `2r√(1−t²) sin(π/m)`: gap between neighbours on one ring.
    pub ring_gap: f64,
    /// `2rt`: gap between the two rings.
    pub layer_gap: f64,
    /// Sorted distances `|x̄₁ − x̄_i|`, `i = 2..m`.
    pub ring_row: Vec<f64>,
    /// Sorted distances `|x̄₁ − x̲_i|`, `i = 1..m`.
    pub cross_row: Vec<f64>,
}

/// Closed-form first-row separations, sorted ascending.
pub fn separations(config: &BumpConfig) -> Separations {
    let mut ring_row: Vec<f64> = (2..=config.m).map(|i| config.ring_distance(i)).collect();
    let mut cross_row: Vec<f64> = (1..=config.m).map(|i| config.cross_distance(i)).collect();
    ring_row.sort_by(f64::total_cmp);
    cross_row.sort_by(f64::total_cmp);
    Separations {
        ring_gap: config.ring_distance(2),
        layer_gap: 2.0 * config.r * config.t,
        ring_row,
        cross_row,
    }
}

/// Admissible parameter box for `(r, t)` at bump count `m`.
///
/// Centers follow the asymptotic laws
/// `r_c = (A₁/(16qπ²))^{1/(1−q)} (m ln m)^{1/(1−q)}` and
/// `t_c = (ln m)^{−1/2}`; the half-widths scale with `β₀` and `α₀`.
#[derive(Debug, Clone)]
pub struct ParameterBox {
    pub r_lo: f64,
    pub r_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub m: usize,
    pub q: f64,
    pub b: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl ParameterBox {
    pub fn r_center(&self) -> f64 {
        0.5 * (self.r_lo + self.r_hi)
    }
    pub fn t_center(&self) -> f64 {
        0.5 * (self.t_lo + self.t_hi)
    }
    pub fn contains(&self, r: f64, t: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi && t >= self.t_lo && t <= self.t_hi
    }
}

/// The literal `b`-free center law. `b` is accepted (and recorded) because
/// the potential hypothesis carries it, but the center formula follows the
/// written law; see [`admissible_box_b_corrected`] for the variant that
/// scales the `r`-center by `b^{1/(1−q)}`.
pub fn admissible_box(
    m: usize,
    q: f64,
    b: f64,
    a1: f64,
    alpha0: f64,
    beta0: f64,
) -> Result<ParameterBox> {
    build_box(m, q, b, a1, alpha0, beta0, false)
}

/// Variant with the `r`-center scaled by `b^{1/(1−q)}`, off the default path.
pub fn admissible_box_b_corrected(
    m: usize,
    q: f64,
    b: f64,
    a1: f64,
    alpha0: f64,
    beta0: f64,
) -> Result<ParameterBox> {
    build_box(m, q, b, a1, alpha0, beta0, true)
}

fn build_box(
    m: usize,
    q: f64,
    b: f64,
    a1: f64,
    alpha0: f64,
    beta0: f64,
    b_corrected: bool,
) -> Result<ParameterBox> {
    if !(0.5..1.0).contains(&q) {
        return Err(Error::InvalidInput(format!("potential exponent q = {q} outside [1/2, 1)")));
    }
    if m < 3 {
        return Err(Error::InvalidInput(format!("m = {m} < 3")));
    }
    if alpha0 < 0.0 || beta0 < 0.0 {
        return Err(Error::InvalidInput("box half-widths must be nonnegative".into()));
    }
    let ln_m = (m as f64).ln();
    let scale_r = (m as f64 * ln_m).powf(1.0 / (1.0 - q));
    let mut coef = a1 / (16.0 * q * std::f64::consts::PI.powi(2));
    if b_corrected {
        coef *= b;
    }
    let r_center_coef = coef.powf(1.0 / (1.0 - q));
    let t_center = ln_m.powf(-0.5);
    Ok(ParameterBox {
        r_lo: (r_center_coef - beta0) * scale_r,
        r_hi: (r_center_coef + beta0) * scale_r,
        t_lo: (1.0 - alpha0) * t_center,
        t_hi: (1.0 + alpha0) * t_center,
        m,
        q,
        b,
        alpha0,
        beta0,
    })
}

/// Evaluate the approximate solution `W_{r,t}` at a point.
pub fn evaluate_w(config: &BumpConfig, gs: &GroundState, point: [f64; 3]) -> f64 {
    config
        .all_points()
        .map(|c| {
            let d = dist(point, *c);
            evaluate_profile(gs, d, Profile::U)
        })
        .sum()
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::solve_ground_state;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn gs() -> &'static GroundState {
        static GS: OnceLock<GroundState> = OnceLock::new();
        GS.get_or_init(|| solve_ground_state(1e-10, 30.0, 3000).unwrap())
    }

    #[test]
    fn direct_substitution() {
        let c = make_config(4, 10.0, 0.6).unwrap();
        // √(1−0.36) = 0.8
        assert_relative_eq!(c.upper_points[0][0], 8.0, max_relative = 1e-14);
        assert_relative_eq!(c.upper_points[0][2], 6.0, max_relative = 1e-14);
        assert_relative_eq!(c.lower_points[0][2], -6.0, max_relative = 1e-14);
        assert_relative_eq!(dist(c.upper_points[0], c.lower_points[0]), 12.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_height_collapses_rings() {
        let c = make_config(5, 7.0, 0.0).unwrap();
        for (u, l) in c.upper_points.iter().zip(&c.lower_points) {
            assert_eq!(u, l);
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(make_config(1, 10.0, 0.5).is_err());
        assert!(make_config(4, 10.0, 1.0).is_err());
        assert!(make_config(4, -1.0, 0.5).is_err());
    }

    #[test]
    fn closed_form_distances_match_brute_force() {
        let c = make_config(7, 11.0, 0.37).unwrap();
        for i in 2..=7 {
            let brute = dist(c.upper_points[0], c.upper_points[i - 1]);
            assert_relative_eq!(c.ring_distance(i), brute, max_relative = 1e-12);
        }
        for i in 1..=7 {
            let brute = dist(c.upper_points[0], c.lower_points[i - 1]);
            assert_relative_eq!(c.cross_distance(i), brute, max_relative = 1e-12);
        }
    }

    #[test]
    fn all_points_on_sphere() {
        let c = make_config(9, 13.5, 0.44).unwrap();
        for p in c.all_points() {
            let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert_relative_eq!(norm, 13.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn separations_example() {
        let c = make_config(4, 10.0, 0.6).unwrap();
        let s = separations(&c);
        assert_relative_eq!(s.ring_gap, 2.0 * 10.0 * 0.8 * (std::f64::consts::PI / 4.0).sin(), max_relative = 1e-12);
        assert_relative_eq!(s.layer_gap, 12.0, max_relative = 1e-14);
        assert!(s.ring_row.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.cross_row.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn box_centers() {
        // t-center·√(ln m) = 1 exactly
        let (m, q, a1) = (10_000usize, 0.5, 88.0985445);
        let b = admissible_box(m, q, 1.0, a1, 0.1, 0.1).unwrap();
        assert_relative_eq!(b.t_center() * (m as f64).ln().sqrt(), 1.0, max_relative = 1e-14);
        // degenerate zero-width box sits at the asymptotic center
        let b0 = admissible_box(m, q, 1.0, a1, 0.0, 0.0).unwrap();
        assert_eq!(b0.r_lo, b0.r_hi);
        assert_eq!(b0.t_lo, b0.t_hi);
        // closed-form r-center at q = 1/2: (A1/(8π²))²·(m ln m)²
        let lnm = (m as f64).ln();
        let closed = (a1 / (8.0 * std::f64::consts::PI.powi(2))).powi(2) * (m as f64 * lnm).powi(2);
        assert_relative_eq!(b0.r_center(), closed, max_relative = 1e-10);
        assert!(admissible_box(m, 0.3, 1.0, a1, 0.1, 0.1).is_err());
    }

    #[test]
    fn box_separations_diverge_with_m() {
        let a1 = 88.0985445;
        let mut prev_ring = 0.0;
        let mut prev_layer = 0.0;
        for m in [100usize, 1000, 10_000] {
            let bx = admissible_box(m, 0.5, 1.0, a1, 0.0, 0.0).unwrap();
            let c = make_config(m, bx.r_center(), bx.t_center()).unwrap();
            let s = separations(&c);
            assert!(s.ring_gap > prev_ring && s.layer_gap > prev_layer);
            prev_ring = s.ring_gap;
            prev_layer = s.layer_gap;
        }
    }

    #[test]
    fn w_symmetries() {
        let c = make_config(6, 12.0, 0.5).unwrap();
        let gs = gs();
        let p = [3.3, 1.7, -2.1];
        let w0 = evaluate_w(&c, gs, p);
        // even in y₂
        let w1 = evaluate_w(&c, gs, [p[0], -p[1], p[2]]);
        assert!((w0 - w1).abs() <= 1e-14 * w0.max(1.0));
        // rotation by 2π/m about the y₃ axis
        let ang = std::f64::consts::PI / 3.0;
        let q = [p[0] * ang.cos() - p[1] * ang.sin(), p[0] * ang.sin() + p[1] * ang.cos(), p[2]];
        let w2 = evaluate_w(&c, gs, q);
        assert!((w0 - w2).abs() <= 1e-13 * w0.max(1.0), "w0={w0} w2={w2}");
        // positivity and peak-bound at a bump center
        let at_peak = evaluate_w(&c, gs, c.upper_points[0]);
        let u0 = gs.u_at_origin();
        let dmin = c.min_separation();
        let bound = u0 + 2.0 * 6.0 * evaluate_profile(gs, dmin, Profile::U);
        assert!(at_peak >= u0 && at_peak <= bound);
    }
}
