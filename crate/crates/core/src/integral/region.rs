//! Double integrals over the interior of a level curve, for the generic
//! Lotka-Volterra cases and the codimension-four center.
//!
//! The interior is swept by vertical scanlines. For each `x` the two
//! boundary ordinates are located by bracketing and bisection on a function
//! that is positive inside; the outer integral uses the same sine
//! substitution as the oval moments, since the scanline length vanishes like
//! a square root at both ends.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::family::Moment;
use super::quadrature::{integrate, QuadOptions};
use super::IntegralError;
use crate::case::CaseId;
use crate::classifier::lotka_volterra::{lv_exponents, to_f64};

/// A bounded region `{F > 0}` swept by scanlines.
pub trait ScanRegion {
    /// Positive strictly inside.
    fn inside(&self, x: f64, y: f64) -> f64;
    fn x_range(&self) -> Result<(f64, f64), IntegralError>;
    fn y_range(&self, x: f64) -> Result<(f64, f64), IntegralError>;
    fn integrand(&self, x: f64, y: f64) -> f64;
}

/// Bisection on a sign change; `f(a) > 0 >= f(b)` or the reverse.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let pa = f(a) > 0.0;
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Walk `p(1), p(2), ...` away from an inside point until `f` turns
/// nonpositive, then bisect the last step.
fn exit<F: Fn(f64) -> f64, P: Fn(i32) -> f64>(f: F, start: f64, p: P, what: &str) -> Result<f64, IntegralError> {
    let mut prev = start;
    for j in 1..=80 {
        let x = p(j);
        if !x.is_finite() {
            break;
        }
        if f(x) <= 0.0 {
            return Ok(bisect(&f, prev, x));
        }
        prev = x;
    }
    Err(IntegralError::BoundaryNotFound(what.into()))
}

pub fn integrate_region<R: ScanRegion>(r: &R, quad: &QuadOptions) -> Result<Moment, IntegralError> {
    let (xa, xb) = r.x_range()?;
    let m = 0.5 * (xa + xb);
    let w = 0.5 * (xb - xa);
    let failure: RefCell<Option<IntegralError>> = RefCell::new(None);
    let inner_opts = QuadOptions { abs_tol: quad.abs_tol * 1e-2, rel_tol: quad.rel_tol * 1e-2, ..*quad };
    let outer = |th: f64| {
        let (s, c) = th.sin_cos();
        let x = m + w * s;
        match r.y_range(x) {
            Ok((y1, y2)) => {
                let q = integrate(|y| r.integrand(x, y), y1, y2, &inner_opts);
                w * c * q.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let h = std::f64::consts::FRAC_PI_2;
    let res = integrate(outer, -h, h, quad);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !res.converged {
        return Err(IntegralError::NonConvergence { achieved: res.err });
    }
    Ok(Moment { value: res.value, err: res.err })
}

/// Axis-aligned box around the region, from a scan of the boundary with a
/// small safety pad.
pub fn bounding_box<R: ScanRegion>(r: &R) -> Result<((f64, f64), (f64, f64)), IntegralError> {
    let (xa, xb) = r.x_range()?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let n = 2000;
    for i in 1..n {
        let th = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / n as f64;
        let x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * th.sin();
        let (y1, y2) = r.y_range(x)?;
        lo = lo.min(y1);
        hi = hi.max(y2);
    }
    let pad = 0.02 * (hi - lo);
    let xpad = 1e-9 * (xb - xa);
    Ok(((xa - xpad, xb + xpad), (lo - pad, hi + pad)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Plain Monte-Carlo over the bounding box with an indicator of `{F > 0}`.
pub fn monte_carlo<R: ScanRegion>(r: &R, n: usize, seed: u64) -> Result<MonteCarlo, IntegralError> {
    let ((x0, x1), (y0, y1)) = bounding_box(r)?;
    let area = (x1 - x0) * (y1 - y0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = rng.gen_range(x0..x1);
        let y = rng.gen_range(y0..y1);
        let v = if r.inside(x, y) > 0.0 { r.integrand(x, y) * area } else { 0.0 };
        s += v;
        s2 += v * v;
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok(MonteCarlo { mean, std_err: (var / nf).sqrt(), samples: n })
}

/// Which side of the level is the interior of the oval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// First quadrant, interior `{H > t}`.
    Above,
    /// Third quadrant, interior `{H < t}`.
    Below,
}

/// `H = |x|^lambda |y|^mu (1 - x - y)` at level `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LVRegionSpec {
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    pub orientation: Orientation,
}

impl LVRegionSpec {
    pub fn new(lambda: f64, mu: f64, t: f64) -> Result<Self, IntegralError> {
        let orientation = if lambda > 0.0 && mu > 0.0 {
            Orientation::Above
        } else if lambda < 0.0 && mu < 0.0 && lambda + mu + 1.0 > 0.0 {
            Orientation::Below
        } else {
            return Err(IntegralError::Unsupported(format!(
                "exponents ({lambda}, {mu}) are in neither normalized region"
            )));
        };
        let s = LVRegionSpec { lambda, mu, t, orientation };
        let (a, b) = s.interval();
        if !(a < t && t < b) {
            return Err(IntegralError::NoOval { t });
        }
        Ok(s)
    }

    pub fn from_case(case: CaseId, t: f64) -> Result<Self, IntegralError> {
        let (l, m) = Self::case_exponents(case)?;
        Self::new(l, m, t)
    }

    fn case_exponents(case: CaseId) -> Result<(f64, f64), IntegralError> {
        let e = lv_exponents(case).ok_or_else(|| IntegralError::Unsupported(format!("{case} is not lv1..lv5")))?;
        Ok(to_f64(&e))
    }

    /// Center level and level interval of a case, without picking a level.
    pub fn case_levels(case: CaseId) -> Result<(f64, (f64, f64)), IntegralError> {
        let (l, m) = Self::case_exponents(case)?;
        let c = (l + m + 1.0).max(f64::MIN_POSITIVE);
        let hc = LVRegionSpec { lambda: l, mu: m, t: 0.0, orientation: Orientation::Above }.h(l / c, m / c);
        // the orientation only decides which side of the center carries ovals
        let probe = Self::new(l, m, if l > 0.0 { 0.5 * hc } else { 2.0 * hc })?;
        Ok((probe.center_level(), probe.interval()))
    }

    pub fn critical_point(&self) -> (f64, f64) {
        let s = self.lambda + self.mu + 1.0;
        (self.lambda / s, self.mu / s)
    }

    pub fn h(&self, x: f64, y: f64) -> f64 {
        x.abs().powf(self.lambda) * y.abs().powf(self.mu) * (1.0 - x - y)
    }

    pub fn center_level(&self) -> f64 {
        let (x, y) = self.critical_point();
        self.h(x, y)
    }

    /// Levels carrying ovals.
    pub fn interval(&self) -> (f64, f64) {
        let hc = self.center_level();
        match self.orientation {
            Orientation::Above => (0.0, hc),
            Orientation::Below => (hc, f64::INFINITY),
        }
    }

    fn quadrant_ok(&self, x: f64, y: f64) -> bool {
        match self.orientation {
            Orientation::Above => x > 0.0 && y > 0.0 && x + y < 1.0,
            Orientation::Below => x < 0.0 && y < 0.0,
        }
    }

    fn y_star(&self, x: f64) -> f64 {
        self.mu * (1.0 - x) / (self.mu + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LVRegion {
    pub spec: LVRegionSpec,
    pub weights: [f64; 3],
}

impl ScanRegion for LVRegion {
    fn inside(&self, x: f64, y: f64) -> f64 {
        let s = &self.spec;
        if !s.quadrant_ok(x, y) {
            return -1.0;
        }
        let lh = s.lambda * x.abs().ln() + s.mu * y.abs().ln() + (1.0 - x - y).ln();
        let d = lh - s.t.ln();
        match s.orientation {
            Orientation::Above => d,
            Orientation::Below => -d,
        }
    }

    fn x_range(&self) -> Result<(f64, f64), IntegralError> {
        let s = &self.spec;
        let (xc, _) = s.critical_point();
        let g = |x: f64| self.inside(x, s.y_star(x));
        match s.orientation {
            Orientation::Above => Ok((
                exit(g, xc, |j| xc * 0.5f64.powi(j), "left end")?,
                exit(g, xc, |j| 1.0 - (1.0 - xc) * 0.5f64.powi(j), "right end")?,
            )),
            Orientation::Below => Ok((
                exit(g, xc, |j| xc * 2f64.powi(j), "left end")?,
                exit(g, xc, |j| xc * 0.5f64.powi(j), "right end")?,
            )),
        }
    }

    fn y_range(&self, x: f64) -> Result<(f64, f64), IntegralError> {
        let s = &self.spec;
        let ys = s.y_star(x);
        let f = |y: f64| self.inside(x, y);
        if f(ys) <= 0.0 {
            // outer nodes sit strictly inside, so this is a thin sliver
            return Ok((ys, ys));
        }
        match s.orientation {
            Orientation::Above => Ok((
                exit(f, ys, |j| ys * 0.5f64.powi(j), "lower boundary")?,
                exit(f, ys, |j| (1.0 - x) - (1.0 - x - ys) * 0.5f64.powi(j), "upper boundary")?,
            )),
            Orientation::Below => Ok((
                exit(f, ys, |j| ys * 2f64.powi(j), "lower boundary")?,
                exit(f, ys, |j| ys * 0.5f64.powi(j), "upper boundary")?,
            )),
        }
    }

    /// `|x|^(lambda-1) |y|^(mu-1) (mu1 + mu2/x + mu3/y)`, absolute values in
    /// the powers and signed reciprocals.
    fn integrand(&self, x: f64, y: f64) -> f64 {
        let s = &self.spec;
        let [a, b, c] = self.weights;
        x.abs().powf(s.lambda - 1.0) * y.abs().powf(s.mu - 1.0) * (a + b / x + c / y)
    }
}

pub fn lv_generating_i(spec: &LVRegionSpec, mu: [f64; 3], quad: &QuadOptions) -> Result<Moment, IntegralError> {
    integrate_region(&LVRegion { spec: *spec, weights: mu }, quad)
}

/// Maximum of `H` over the open triangle, by nested golden-section search on
/// `ln H` (concave along both coordinate directions there).
pub fn lv_max_h(lambda: f64, mu: f64) -> (f64, f64, f64) {
    let lnh = |x: f64, y: f64| lambda * x.ln() + mu * y.ln() + (1.0 - x - y).ln();
    let best_y = |x: f64| golden(|y| lnh(x, y), 0.0, 1.0 - x);
    let x = golden(|x| lnh(x, best_y(x)), 0.0, 1.0);
    let y = best_y(x);
    (x, y, lnh(x, y).exp())
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// The codimension-four center: `H = x^-3 P(x, y) / (8 (2 - b))` with
/// `P = k/3 y^3 + k y^2 + (1 - x^2) y - x^2 + 1/3`, `k = 4/(2 + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C4Spec {
    pub b: f64,
    pub kappa: f64,
    pub mu: [f64; 4],
    pub t: f64,
}

impl C4Spec {
    pub fn new(b: f64, mu: [f64; 4], t: f64) -> Result<Self, IntegralError> {
        if !(b > -2.0 && b < 2.0) {
            return Err(IntegralError::BadParameter { case: "c4".into(), b: b.to_string(), reason: "needs -2 < b < 2".into() });
        }
        let s = C4Spec { b, kappa: 4.0 / (2.0 + b), mu, t };
        let (tc, ts) = s.interval();
        if !(tc < t && t < ts) {
            return Err(IntegralError::NoOval { t });
        }
        Ok(s)
    }

    /// The tabulated level interval `(t_c, 0)`.
    pub fn interval(&self) -> (f64, f64) {
        (-1.0 / (12.0 * (2.0 - self.b)), 0.0)
    }

    /// Levels whose sublevel component around `(1, 0)` is bounded in these
    /// coordinates. Along `y ~ x / sqrt(k)` the minimum of `H(x, .)` tends
    /// to `t_c / sqrt(k)` as `x -> inf`, so above that level the component
    /// runs off to infinity.
    pub fn bounded_interval(&self) -> (f64, f64) {
        let tc = self.interval().0;
        (tc, tc / self.kappa.sqrt())
    }

    pub fn p(&self, x: f64, y: f64) -> f64 {
        let k = self.kappa;
        k / 3.0 * y * y * y + k * y * y + (1.0 - x * x) * y - x * x + 1.0 / 3.0
    }

    pub fn h(&self, x: f64, y: f64) -> f64 {
        self.p(x, y) / (8.0 * (2.0 - self.b) * x * x * x)
    }

    /// Local minimum (`+`) and maximum (`-`) of `P(x, .)`.
    fn y_crit(&self, x: f64) -> (f64, f64) {
        let r = ((self.kappa - 1.0 + x * x) / self.kappa).sqrt();
        (-1.0 + r, -1.0 - r)
    }
}

impl ScanRegion for C4Spec {
    fn inside(&self, x: f64, y: f64) -> f64 {
        if x <= 0.0 {
            return -1.0;
        }
        8.0 * (2.0 - self.b) * self.t * x * x * x - self.p(x, y)
    }

    fn x_range(&self) -> Result<(f64, f64), IntegralError> {
        if self.t >= self.bounded_interval().1 {
            return Err(IntegralError::BoundaryNotFound(format!(
                "level {} is above t_c/sqrt(kappa) = {}; the sublevel set is unbounded",
                self.t,
                self.bounded_interval().1
            )));
        }
        let g = |x: f64| self.inside(x, self.y_crit(x).0);
        Ok((exit(g, 1.0, |j| 0.5f64.powi(j), "left end")?, exit(g, 1.0, |j| 2f64.powi(j), "right end")?))
    }

    fn y_range(&self, x: f64) -> Result<(f64, f64), IntegralError> {
        let (ym, y_max) = self.y_crit(x);
        let f = |y: f64| self.inside(x, y);
        if f(ym) <= 0.0 {
            return Ok((ym, ym));
        }
        if f(y_max) > 0.0 {
            return Err(IntegralError::BoundaryNotFound("region is not bounded below".into()));
        }
        let lo = bisect(f, ym, y_max);
        let hi = exit(f, ym, |j| ym + 1e-3 * 2f64.powi(j), "upper boundary")?;
        Ok((lo, hi))
    }

    fn integrand(&self, x: f64, y: f64) -> f64 {
        let [a, b, c, d] = self.mu;
        let k = self.kappa;
        (a + b * y + c * y * y * y + d * (k * k * y.powi(4) - x.powi(4))) / x.powi(6)
    }
}

pub fn c4_generating_i(spec: &C4Spec, quad: &QuadOptions) -> Result<Moment, IntegralError> {
    integrate_region(spec, quad)
}

/// Looser defaults for the nested quadrature; the target is `1e-7` absolute.
pub fn region_quad() -> QuadOptions {
    QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 30 }
}
