//! Adaptive Gauss-Legendre quadrature with panel bisection.
//!
//! A panel is accepted when the n-point rule on the whole panel and the sum
//! of the rules on its two halves agree within the panel's share of the
//! tolerance; the sum of those differences is returned as the error
//! estimate.

use std::sync::OnceLock;

/// Nodes per panel.
pub const GL_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_depth: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Fixed n-point rule on [a, b].
pub fn gl_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// The panel rule for `f` and for `|f|`.
fn gl_panel_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (x, w) = rule();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let (mut v, mut m) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let y = wi * f(c + h * xi);
        v += y;
        m += y.abs();
    }
    (v * h, m * h.abs())
}

/// Adaptive integral of `f` over [a, b]. The relative tolerance applies to
/// `int |f|`, so integrals with heavy cancellation still converge.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, err: 0.0, evals: 0, converged: true };
    }
    let total = (b - a).abs();
    let (whole, mass) = gl_panel_abs(&mut f, a, b);
    let mut evals = GL_ORDER;
    // global scale for the relative criterion, refined as panels are accepted
    let mut scale = mass;
    let mut accepted_mass = 0.0;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (l, lm) = gl_panel_abs(&mut f, lo, mid);
        let (r, rm) = gl_panel_abs(&mut f, mid, hi);
        evals += 2 * GL_ORDER;
        let refined = l + r;
        let diff = (refined - est).abs();
        let share = (hi - lo).abs() / total;
        let tol = opts.abs_tol.max(opts.rel_tol * scale) * share;
        if diff <= tol {
            value += refined;
            err += diff;
            accepted_mass += lm + rm;
            scale = scale.max(accepted_mass);
        } else if depth >= opts.max_depth || (mid <= lo.min(hi) || mid >= lo.max(hi)) {
            value += refined;
            err += diff;
            converged = false;
        } else {
            stack.push((mid, hi, r, depth + 1));
            stack.push((lo, mid, l, depth + 1));
        }
    }
    if !value.is_finite() {
        converged = false;
    }
    QuadResult { value, err, evals, converged }
}
