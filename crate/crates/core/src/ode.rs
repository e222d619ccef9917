//! Adaptive embedded Runge–Kutta (Dormand–Prince 5(4)) with dense output.
//!
//! The integrator stores every accepted step as a Hermite knot `(s, y, y')`;
//! trajectories are then evaluated anywhere by cubic Hermite interpolation.
//! Integration direction follows the sign of `s_end - s_start`, so the same
//! code serves the forward shoot and the backward tail relaxation.

/// One accepted step of the solution.
#[derive(Debug, Clone, Copy)]
pub struct Knot<const N: usize> {
    pub s: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Dense trajectory of an IVP solve.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub knots: Vec<Knot<N>>,
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Reached the requested endpoint.
    End,
    /// An event callback requested termination.
    Event,
}

pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_init: 1e-3, h_max: 0.5, max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 4th-order weights of the embedded pair
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/ds = f(s, y)` from `s0` to `s1` (either direction).
///
/// `event` is consulted after every accepted step; returning `true` stops
/// the integration with [`Stop::Event`].
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    s0: f64,
    s1: f64,
    y0: [f64; N],
    opts: &Options,
    mut event: impl FnMut(&Knot<N>) -> bool,
) -> (Trajectory<N>, Stop) {
    let dir = (s1 - s0).signum();
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    let mut h = opts.h_init.min(opts.h_max).min((s1 - s0).abs()).max(1e-14) * dir;

    let mut knots = vec![Knot { s, y, dy: k1 }];
    let mut stop = Stop::End;

    for _ in 0..opts.max_steps {
        if (s1 - s) * dir <= 1e-14 * (1.0 + s.abs()) {
            break;
        }
        if (s + h - s1) * dir > 0.0 {
            h = s1 - s;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                for n in 0..N {
                    ys[n] += h * A[stage][j] * kj[n];
                }
            }
            k[stage] = f(s + C[stage] * h, &ys);
        }
        // 5th-order solution uses row 7 of A (FSAL); stage 6 already computed it
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for n in 0..N {
                y5[n] += h * A[6][j] * kj[n];
            }
        }
        let k7 = f(s + h, &y5);
        // embedded error estimate
        let mut err: f64 = 0.0;
        for n in 0..N {
            let mut y4n = y[n];
            for (j, kj) in k.iter().enumerate().take(6) {
                y4n += h * B4[j] * kj[n];
            }
            y4n += h * B4[6] * k7[n];
            let sc = opts.atol + opts.rtol * y[n].abs().max(y5[n].abs());
            let e = (y5[n] - y4n) / sc;
            err += e * e;
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 {
            s += h;
            y = y5;
            k1 = k7;
            let knot = Knot { s, y, dy: k1 };
            knots.push(knot);
            if event(&knot) {
                stop = Stop::Event;
                break;
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).clamp(-opts.h_max, opts.h_max);
        if h.abs() < 1e-15 * (1.0 + s.abs()) {
            // step collapse: give up advancing, report where we are
            break;
        }
    }
    (Trajectory { knots }, stop)
}

impl<const N: usize> Trajectory<N> {
    pub fn first(&self) -> &Knot<N> {
        &self.knots[0]
    }

    pub fn last(&self) -> &Knot<N> {
        self.knots.last().expect("non-empty trajectory")
    }

    /// Cubic Hermite evaluation of component `comp` at `s`.
    ///
    /// `s` must lie within the span of the trajectory (ascending or
    /// descending); endpoints are clamped.
    pub fn eval(&self, s: f64, comp: usize) -> f64 {
        let (k0, k1, t) = self.bracket(s);
        hermite(k0.s, k0.y[comp], k0.dy[comp], k1.s, k1.y[comp], k1.dy[comp], t)
    }

    /// Derivative of component `comp` at `s` from the Hermite interpolant.
    pub fn eval_deriv(&self, s: f64, comp: usize) -> f64 {
        let (k0, k1, t) = self.bracket(s);
        hermite_deriv(k0.s, k0.y[comp], k0.dy[comp], k1.s, k1.y[comp], k1.dy[comp], t)
    }

    fn bracket(&self, s: f64) -> (&Knot<N>, &Knot<N>, f64) {
        let ascending = self.knots[0].s <= self.last().s;
        let n = self.knots.len();
        let idx = if ascending {
            self.knots.partition_point(|k| k.s < s)
        } else {
            self.knots.partition_point(|k| k.s > s)
        };
        let hi = idx.clamp(1, n - 1);
        let (k0, k1) = (&self.knots[hi - 1], &self.knots[hi]);
        let t = ((s - k0.s) / (k1.s - k0.s)).clamp(0.0, 1.0);
        (k0, k1, t)
    }

    /// Cumulative Hermite integral of component `comp` over all knots,
    /// in knot order. Exact for cubics on each step.
    pub fn cumulative_integral(&self, comp: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.knots.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.knots.windows(2) {
            let h = w[1].s - w[0].s;
            acc += 0.5 * h * (w[0].y[comp] + w[1].y[comp])
                + h * h / 12.0 * (w[0].dy[comp] - w[1].dy[comp]);
            out.push(acc);
        }
        out
    }
}

fn hermite(s0: f64, y0: f64, d0: f64, s1: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let h = s1 - s0;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

fn hermite_deriv(s0: f64, y0: f64, d0: f64, s1: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let h = s1 - s0;
    let t2 = t * t;
    ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * h * d1)
        / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_forward() {
        let (tr, stop) = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            5.0,
            [1.0],
            &Options::default(),
            |_| false,
        );
        assert_eq!(stop, Stop::End);
        assert_relative_eq!(tr.last().y[0], (-5.0f64).exp(), max_relative = 1e-10);
        assert_relative_eq!(tr.eval(2.5, 0), (-2.5f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_backward() {
        // integrate backwards from t=π to 0: y = sin(t)
        let (tr, _) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            std::f64::consts::PI,
            0.0,
            [0.0, -1.0],
            &Options::default(),
            |_| false,
        );
        assert_relative_eq!(tr.last().y[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(tr.eval(std::f64::consts::FRAC_PI_2, 0), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn event_stops_integration() {
        let (tr, stop) = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            10.0,
            [1.0],
            &Options::default(),
            |k| k.y[0] > 7.0,
        );
        assert_eq!(stop, Stop::Event);
        assert!(tr.last().y[0] > 7.0 && tr.last().s < 3.0);
    }

    #[test]
    fn cumulative_integral_matches_closed_form() {
        let (tr, _) = integrate(
            |s, _y: &[f64; 1]| [s.cos()],
            0.0,
            3.0,
            [0.0],
            &Options::default(),
            |_| false,
        );
        // integral of y' = cos: trajectory y equals sin; cumulative integral of y
        // equals 1 - cos at the end.
        let cum = tr.cumulative_integral(0);
        assert_relative_eq!(cum.last().unwrap(), &(1.0 - 3.0f64.cos()), max_relative = 1e-7);
    }
}
