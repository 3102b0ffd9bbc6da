//! One-parameter families of levels `y^2 = 2 D(x, t)` with `D` affine in `t`,
//! their period-annulus intervals, ovals and basic moments.
//!
//! Every family is normalized so that the center sits at `x = 1` at the
//! center level `t_c`, `D(1, t)` grows with `t`, and the annulus is
//! `t_c < t < t_s`. Moments are taken over the full oval (both branches):
//!
//! - `I_k = 2 * int x^k sqrt(2D) dx`
//! - `J_k = 2 * int x^k / sqrt(2D) dx`
//!
//! and the log variants carry an extra factor `ln x`. With this convention
//! `d/dt I_k = sum_j b_j J_{k+j}` where `dD/dt = sum_j b_j x^j`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::quadrature::{integrate, QuadOptions};
use super::IntegralError;
use crate::poly::{
    has_multiple_real_root, isolate_real_roots, rat, rat_to_f64, refine_isolated, refine_root, Rational, RealPoly,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `t + x^2/2 - x^3/3`
    Cubic,
    /// `t + x^3/3 - x^4/4`
    Quartic,
    /// cubic family in `b`, `t x^3` term
    R1,
    /// quartic family in `b`, `t x^3` term
    R3,
    /// quartic family in `b`, constant `t`
    R6,
    /// `-x/3 + x^2/2 + t x^4`, the log case on the r5 line at b = 2
    R5Log,
    /// `-1/6 - x^3/3 + t x^2`
    R10,
    /// `(x - 1/3)^2 + t x^3`
    Rlv2,
    /// `(x - 2)^2 + t x^-2`
    Rlv3,
    /// `(x - 1/2)^2 + t x^4`
    Rlv4,
    /// `t s^3 - (s^2 + 1/3)^2` with `x = s^2`
    Rlv5,
    /// `t s - (s^2 + 3)^2` with `x = s^2`
    Rlv6,
}

impl FamilyKind {
    pub fn needs_b(&self) -> bool {
        matches!(self, FamilyKind::R1 | FamilyKind::R3 | FamilyKind::R6)
    }
}

/// `(a + b t) x^power`
#[derive(Debug, Clone, PartialEq)]
pub struct DTerm {
    pub power: i32,
    pub a: Rational,
    pub b: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusInterval {
    pub t_c: f64,
    /// `f64::INFINITY` when the annulus is unbounded in `t`.
    pub t_s: f64,
}

impl AnnulusInterval {
    pub fn contains(&self, t: f64) -> bool {
        self.t_c < t && t < self.t_s
    }

    /// A point well inside, used as the reference scale.
    pub fn midpoint(&self) -> f64 {
        if self.t_s.is_finite() {
            0.5 * (self.t_c + self.t_s)
        } else {
            self.t_c + 1.0_f64.max(self.t_c.abs())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub kind: FamilyKind,
    pub b: Option<Rational>,
    pub terms: Vec<DTerm>,
    pub annulus: AnnulusInterval,
    /// `t_s` as an exact rational when it is one.
    pub t_s_exact: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub quad: QuadOptions,
    /// Minimum distance to either annulus endpoint.
    pub margin: f64,
    pub allow_near_degenerate: bool,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions { quad: QuadOptions::default(), margin: 1e-6, allow_near_degenerate: false }
    }
}

impl MomentOptions {
    pub fn permissive() -> Self {
        MomentOptions { allow_near_degenerate: true, ..Default::default() }
    }
}

/// Which integrand multiplies `x^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// `y dx`
    Y,
    /// `dx / y`
    InvY,
    /// `ln x * y dx`
    LogY,
    /// `ln x * dx / y`
    LogInvY,
}

impl Kind {
    pub fn is_log(&self) -> bool {
        matches!(self, Kind::LogY | Kind::LogInvY)
    }

    /// The kind produced by differentiating in `t`.
    pub fn derivative(&self) -> Option<Kind> {
        match self {
            Kind::Y => Some(Kind::InvY),
            Kind::LogY => Some(Kind::LogInvY),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub value: f64,
    /// Quadrature error estimate.
    pub err: f64,
}

/// A located oval. `D = x^low * P(x)` and `P = (x - x_lo)(x - x_hi) Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oval {
    pub t: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub low: i32,
    pub p: RealPoly,
    pub q: RealPoly,
}

fn term(power: i32, a: Rational, b: Rational) -> DTerm {
    DTerm { power, a, b }
}

fn c(n: i64, d: i64) -> Rational {
    rat(n, d)
}

fn bad(kind: FamilyKind, b: &Rational, reason: &str) -> IntegralError {
    IntegralError::BadParameter { case: format!("{kind:?}"), b: b.to_string(), reason: reason.into() }
}

impl Family {
    pub fn new(kind: FamilyKind, b: Option<&Rational>) -> Result<Family, IntegralError> {
        use FamilyKind::*;
        let z = Rational::zero;
        let one = Rational::one;
        if kind.needs_b() && b.is_none() {
            return Err(IntegralError::MissingParameter(format!("{kind:?}")));
        }
        let b = if kind.needs_b() { b.cloned() } else { None };
        let (terms, annulus, t_s_exact) = match kind {
            Cubic => (
                vec![term(0, z(), one()), term(2, c(1, 2), z()), term(3, c(-1, 3), z())],
                AnnulusInterval { t_c: -1.0 / 6.0, t_s: 0.0 },
                Some(z()),
            ),
            Quartic => (
                vec![term(0, z(), one()), term(3, c(1, 3), z()), term(4, c(-1, 4), z())],
                AnnulusInterval { t_c: -1.0 / 12.0, t_s: 0.0 },
                Some(z()),
            ),
            R5Log => (
                vec![term(1, c(-1, 3), z()), term(2, c(1, 2), z()), term(4, z(), one())],
                AnnulusInterval { t_c: -1.0 / 6.0, t_s: 0.0 },
                Some(z()),
            ),
            R10 => (
                vec![term(0, c(-1, 6), z()), term(2, z(), one()), term(3, c(-1, 3), z())],
                AnnulusInterval { t_c: 0.5, t_s: f64::INFINITY },
                None,
            ),
            Rlv2 => (
                vec![term(0, c(1, 9), z()), term(1, c(-2, 3), z()), term(2, one(), z()), term(3, z(), one())],
                AnnulusInterval { t_c: -4.0 / 9.0, t_s: 0.0 },
                Some(z()),
            ),
            Rlv3 => (
                vec![term(-2, z(), one()), term(0, c(4, 1), z()), term(1, c(-4, 1), z()), term(2, one(), z())],
                AnnulusInterval { t_c: -1.0, t_s: 0.0 },
                Some(z()),
            ),
            Rlv4 => (
                vec![term(0, c(1, 4), z()), term(1, c(-1, 1), z()), term(2, one(), z()), term(4, z(), one())],
                AnnulusInterval { t_c: -0.25, t_s: 0.0 },
                Some(z()),
            ),
            Rlv5 => (
                vec![term(0, c(-1, 9), z()), term(2, c(-2, 3), z()), term(3, z(), one()), term(4, c(-1, 1), z())],
                AnnulusInterval { t_c: 16.0 / 9.0, t_s: f64::INFINITY },
                None,
            ),
            Rlv6 => (
                vec![term(0, c(-9, 1), z()), term(1, z(), one()), term(2, c(-6, 1), z()), term(4, c(-1, 1), z())],
                AnnulusInterval { t_c: 16.0, t_s: f64::INFINITY },
                None,
            ),
            R1 | R3 | R6 => {
                let b = b.clone().unwrap();
                let s = &b + one();
                if s.is_zero() {
                    return Err(bad(kind, &b, "b = -1 is degenerate"));
                }
                let bf = rat_to_f64(&b);
                let sf = bf + 1.0;
                match kind {
                    R1 => {
                        let terms = vec![
                            term(0, -(c(3, 1) - &b) / (c(6, 1) * &s), z()),
                            term(1, -(&b - one()) / &s, z()),
                            term(2, -(one() - c(3, 1) * &b) / (c(2, 1) * &s), z()),
                            term(3, z(), one()),
                        ];
                        let t_c = -2.0 * bf / (3.0 * sf);
                        let t_s = if b < c(-1, 1) {
                            let num = c(2, 1) * (one() - c(3, 1) * &b) * (one() - c(3, 1) * &b);
                            let den = c(3, 1) * &s * (c(3, 1) - &b) * (c(3, 1) - &b);
                            num / den
                        } else if b >= c(1, 3) {
                            z()
                        } else {
                            return Err(bad(kind, &b, "annulus tabulated only for b < -1 or b >= 1/3"));
                        };
                        (terms, AnnulusInterval { t_c, t_s: rat_to_f64(&t_s) }, Some(t_s))
                    }
                    R3 => {
                        if (&b + c(3, 1)).is_zero() {
                            return Err(bad(kind, &b, "b = -3 is excluded"));
                        }
                        let terms = vec![
                            term(0, -(&b + c(3, 1)) / (c(24, 1) * &s), z()),
                            term(2, -(&b - one()) / (c(4, 1) * &s), z()),
                            term(3, z(), one()),
                            term(4, -(c(3, 1) * &b + one()) / (c(8, 1) * &s), z()),
                        ];
                        let t_c = 2.0 * bf / (3.0 * sf);
                        // the finite branch is continued to its endpoint b = -1/3, where it gives 0
                        let t_s = if b > c(-3, 1) && b <= c(-1, 3) {
                            -2.0 / (3.0 * sf) * (-(3.0 * bf + 1.0) / (bf + 3.0)).sqrt()
                        } else {
                            f64::INFINITY
                        };
                        (terms, AnnulusInterval { t_c, t_s }, None)
                    }
                    _ => {
                        let terms = vec![
                            term(0, z(), one()),
                            term(2, -(one() - c(2, 1) * &b) / (c(2, 1) * &s), z()),
                            term(3, -(&b - one()) / &s, z()),
                            term(4, -(c(2, 1) - &b) / (c(4, 1) * &s), z()),
                        ];
                        let t_c = -bf / (4.0 * sf);
                        let t_s = if b >= c(2, 1) {
                            z()
                        } else if b <= c(1, 2) {
                            let num = (one() - c(2, 1) * &b).pow(3);
                            let den = c(4, 1) * &s * (c(2, 1) - &b).pow(3);
                            num / den
                        } else {
                            return Err(bad(kind, &b, "annulus tabulated only for b <= 1/2 or b >= 2"));
                        };
                        (terms, AnnulusInterval { t_c, t_s: rat_to_f64(&t_s) }, Some(t_s))
                    }
                }
            }
        };
        // coefficients that vanish for special b lower the degree
        let terms = terms.into_iter().filter(|t| !(t.a.is_zero() && t.b.is_zero())).collect();
        Ok(Family { kind, b, terms, annulus, t_s_exact })
    }

    pub fn low_power(&self) -> i32 {
        self.terms.iter().map(|t| t.power).min().unwrap_or(0)
    }

    /// `P(x)` with `D = x^low P`, coefficients evaluated at `t`.
    pub fn poly_at(&self, t: f64) -> RealPoly {
        let low = self.low_power();
        let high = self.terms.iter().map(|t| t.power).max().unwrap_or(0);
        let mut c = vec![0.0; (high - low + 1) as usize];
        for tm in &self.terms {
            c[(tm.power - low) as usize] += rat_to_f64(&tm.a) + rat_to_f64(&tm.b) * t;
        }
        RealPoly::new(c)
    }

    /// Exact `P` at a rational level.
    pub fn poly_at_exact(&self, t: &Rational) -> RealPoly {
        let low = self.low_power();
        let high = self.terms.iter().map(|t| t.power).max().unwrap_or(0);
        let mut c = vec![Rational::zero(); (high - low + 1) as usize];
        for tm in &self.terms {
            c[(tm.power - low) as usize] += &tm.a + &tm.b * t;
        }
        RealPoly::from_rationals(c)
    }

    pub fn eval_d(&self, x: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|tm| (rat_to_f64(&tm.a) + rat_to_f64(&tm.b) * t) * x.powi(tm.power))
            .sum()
    }

    /// `dD/dt = sum b_j x^j` as `(j, b_j)` pairs with nonzero `b_j`.
    pub fn dt_terms(&self) -> Vec<(i32, f64)> {
        self.terms
            .iter()
            .filter(|t| !t.b.is_zero())
            .map(|t| (t.power, rat_to_f64(&t.b)))
            .collect()
    }

    fn check_level(&self, t: f64, opts: &MomentOptions) -> Result<(), IntegralError> {
        if !t.is_finite() {
            return Err(IntegralError::NoOval { t });
        }
        let a = self.annulus;
        let margin = if opts.allow_near_degenerate { 0.0 } else { opts.margin };
        if t <= a.t_c || t >= a.t_s {
            return Err(IntegralError::NoOval { t });
        }
        if t - a.t_c < margin {
            return Err(IntegralError::OvalDegenerate { t, endpoint: a.t_c, margin });
        }
        if a.t_s.is_finite() && a.t_s - t < margin {
            return Err(IntegralError::OvalDegenerate { t, endpoint: a.t_s, margin });
        }
        Ok(())
    }

    /// The oval through the region `D > 0` around `x = 1`.
    pub fn oval(&self, t: f64, opts: &MomentOptions) -> Result<Oval, IntegralError> {
        self.check_level(t, opts)?;
        let p = self.poly_at(t);
        if !(p.eval(1.0) > 0.0) {
            return Err(IntegralError::NoOval { t });
        }
        let r = p.root_bound();
        let roots = isolate_real_roots(&p, -r, r).map_err(|_| IntegralError::NoOval { t })?;
        // brackets may end on critical points such as x = 1 itself, so
        // select by the refined root rather than by the bracket
        let mut located = Vec::with_capacity(roots.len());
        for iv in &roots {
            let x = refine_root(&p, (iv.lo, iv.hi), 0.0).map_err(|_| IntegralError::NoOval { t })?;
            located.push((x, iv.multiple));
        }
        let left = located.iter().filter(|r| r.0 < 1.0).last().copied();
        let right = located.iter().find(|r| r.0 > 1.0).copied();
        let ((x_lo, ml), (x_hi, mr)) = match (left, right) {
            (Some(l), Some(r)) => (l, r),
            _ => return Err(IntegralError::NoOval { t }),
        };
        if ml || mr {
            return Err(IntegralError::OvalDegenerate { t, endpoint: t, margin: 0.0 });
        }
        let q = p.deflate(x_lo).deflate(x_hi);
        if !(q.eval(0.5 * (x_lo + x_hi)) < 0.0) {
            return Err(IntegralError::NoOval { t });
        }
        Ok(Oval { t, x_lo, x_hi, low: self.low_power(), p, q })
    }

    pub fn moment(&self, t: f64, kind: Kind, k: i32, opts: &MomentOptions) -> Result<Moment, IntegralError> {
        let oval = self.oval(t, opts)?;
        oval.combination(&[(1.0, kind, k)], &opts.quad)
    }

    /// Check the tabulated endpoints: a double root at `x = 1` on the center
    /// level, and at `t_s` either a multiple real root of `D` or a vanishing
    /// leading coefficient (the oval escapes to infinity). An infinite `t_s`
    /// is checked by locating ovals at levels up to `t_c + 1e6`.
    pub fn verify_annulus(&self) -> AnnulusCheck {
        let a = self.annulus;
        let pc = self.poly_at(a.t_c);
        let dp = pc.derivative();
        let scale = pc.eval_abs(1.0).max(1.0);
        let center_ok = pc.eval(1.0).abs() <= 1e-12 * scale && dp.eval(1.0).abs() <= 1e-12 * scale;
        let boundary = if let Some(ts) = &self.t_s_exact {
            let ps = self.poly_at_exact(ts);
            let e = ps.exact().unwrap();
            let high = self.terms.iter().map(|t| t.power).max().unwrap_or(0);
            let top: Rational = self.terms.iter().filter(|t| t.power == high).map(|t| &t.a + &t.b * ts).sum();
            if top.is_zero() {
                BoundaryKind::Escape
            } else if has_multiple_real_root(e) {
                BoundaryKind::MultipleRoot
            } else {
                BoundaryKind::Mismatch
            }
        } else if a.t_s.is_finite() {
            if has_multiple_root_f64(&self.poly_at(a.t_s)) {
                BoundaryKind::MultipleRoot
            } else {
                BoundaryKind::Mismatch
            }
        } else {
            let opts = MomentOptions::default();
            let ok = (0..7).all(|e| self.oval(a.t_c + 10f64.powi(e), &opts).is_ok());
            if ok {
                BoundaryKind::Unbounded
            } else {
                BoundaryKind::Mismatch
            }
        };
        AnnulusCheck { center_double_root: center_ok, boundary }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    MultipleRoot,
    Escape,
    Unbounded,
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnnulusCheck {
    pub center_double_root: bool,
    pub boundary: BoundaryKind,
}

impl AnnulusCheck {
    pub fn ok(&self) -> bool {
        self.center_double_root && self.boundary != BoundaryKind::Mismatch
    }
}

/// A real root where `|P'|` is negligible against the coefficient scale.
fn has_multiple_root_f64(p: &RealPoly) -> bool {
    let r = p.root_bound();
    let dp = p.derivative();
    // roots of P' are the candidates; a double root of P is a root of P' where P vanishes
    match isolate_real_roots(&dp, -r, r) {
        Ok(cands) => cands.iter().any(|iv| {
            let x = refine_isolated(&dp, iv, 0.0).unwrap_or(iv.mid());
            p.eval(x).abs() <= 1e-9 * p.eval_abs(x).max(1.0)
        }),
        Err(_) => false,
    }
}

impl Oval {
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// `sum c_i * moment(kind_i, k_i)` in a single quadrature.
    pub fn combination(&self, terms: &[(f64, Kind, i32)], quad: &QuadOptions) -> Result<Moment, IntegralError> {
        for &(_, kind, k) in terms {
            if (k < 0 || kind.is_log() || self.low < 0) && self.x_lo <= 0.0 {
                return Err(IntegralError::Pole { k, x_lo: self.x_lo });
            }
        }
        let m = 0.5 * (self.x_lo + self.x_hi);
        let w = 0.5 * (self.x_hi - self.x_lo);
        let low = self.low;
        let q = &self.q;
        let f = |th: f64| {
            let (s, co) = th.sin_cos();
            let x = m + w * s;
            let g = (-2.0 * x.powi(low) * q.eval(x)).max(0.0);
            let sg = g.sqrt();
            let lx = if terms.iter().any(|t| t.1.is_log()) { x.ln() } else { 0.0 };
            let mut acc = 0.0;
            for &(cf, kind, k) in terms {
                let xk = x.powi(k);
                acc += cf
                    * match kind {
                        Kind::Y => 2.0 * w * w * co * co * xk * sg,
                        Kind::InvY => 2.0 * xk / sg,
                        Kind::LogY => 2.0 * w * w * co * co * xk * sg * lx,
                        Kind::LogInvY => 2.0 * xk * lx / sg,
                    };
            }
            acc
        };
        let h = std::f64::consts::FRAC_PI_2;
        let r = integrate(f, -h, h, quad);
        if !r.converged {
            return Err(IntegralError::NonConvergence { achieved: r.err });
        }
        Ok(Moment { value: r.value, err: r.err })
    }
}

/// Exact `b_j` coefficient check used by tests and callers that need signs.
pub fn dt_is_positive_at_center(f: &Family) -> bool {
    f.terms.iter().map(|t| t.b.clone()).fold(Rational::zero(), |a, b| a + b).is_positive()
}
