//! Dormand-Prince 5(4) with step-size control and the fourth-order dense
//! output of Hairer, Norsett and Wanner.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-12, atol: 1e-14, h_min: 1e-14, max_steps: 2_000_000 }
    }
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    r: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at `t0 + theta h`, `theta` in [0, 1].
    pub fn at(&self, theta: f64) -> [f64; N] {
        let s = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i] + theta * (self.r[1][i] + s * (self.r[2][i] + theta * (self.r[3][i] + s * self.r[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    StepUnderflow { t: f64, h: f64 },
    TooManySteps { t: f64 },
    NonFinite { t: f64 },
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, a) in terms {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0`, handing every accepted step to
/// `visit`, which returns `false` to stop. Stops at `t_end` otherwise.
pub fn integrate<const N: usize, F, V>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    mut visit: V,
) -> Result<[f64; N], StepError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    V: FnMut(&Step<N>) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = 1e-3 * (t_end - t0).abs().max(1e-6);
    let mut steps = 0;
    while t < t_end {
        if steps >= tol.max_steps {
            return Err(StepError::TooManySteps { t });
        }
        steps += 1;
        h = h.min(t_end - t);
        let k2 = f(t + C[1] * h, &axpy(&y, h, &[(&k1, A2[0])]));
        let k3 = f(t + C[2] * h, &axpy(&y, h, &[(&k1, A3[0]), (&k2, A3[1])]));
        let k4 = f(t + C[3] * h, &axpy(&y, h, &[(&k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]));
        let k5 = f(t + C[4] * h, &axpy(&y, h, &[(&k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])]));
        let k6 = f(
            t + C[5] * h,
            &axpy(&y, h, &[(&k1, A6[0]), (&k2, A6[1]), (&k3, A6[2]), (&k4, A6[3]), (&k5, A6[4])]),
        );
        let y1 = axpy(&y, h, &[(&k1, B[0]), (&k3, B[2]), (&k4, B[3]), (&k5, B[4]), (&k6, B[5])]);
        let k7 = f(t + h, &y1);
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(StepError::NonFinite { t });
        }
        if err <= 1.0 {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y1[i] - y[i];
                let bspl = h * k1[i] - dy;
                r[0][i] = y[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - h * k7[i] - bspl;
                r[4][i] = h
                    * (D[0] * k1[i] + D[2] * k3[i] + D[3] * k4[i] + D[4] * k5[i] + D[5] * k6[i] + D[6] * k7[i]);
            }
            let step = Step { t0: t, h, y0: y, y1, r };
            t += h;
            y = y1;
            k1 = k7;
            if !visit(&step) {
                return Ok(y);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < tol.h_min {
            return Err(StepError::StepUnderflow { t, h });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let tp = 2.0 * std::f64::consts::PI;
        let y = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], tp, &Tolerances::default(), |_| true).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn dense_output_tracks_solution() {
        let mut worst = 0.0f64;
        integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 2.0, &Tolerances { rtol: 1e-10, ..Default::default() }, |s| {
            for th in [0.1, 0.37, 0.5, 0.9] {
                let t = s.t0 + th * s.h;
                worst = worst.max((s.at(th)[0] - t.exp()).abs() / t.exp());
            }
            true
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }
}
