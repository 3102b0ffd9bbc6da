//! Univariate polynomials with an optional exact rational mirror, real-root
//! isolation and bracketed refinement.
//!
//! Two isolation strategies are used:
//!
//! * exact mode (a rational mirror is present): Sturm sequence of the
//!   square-free part, bisection with exact rational endpoints, and
//!   multiplicity detection through `gcd(p, p')`;
//! * float mode: the critical points of `p` are isolated recursively so that
//!   `p` is monotone between consecutive ones; a sign change on a monotone
//!   segment brackets exactly one root, and a critical point where `|p|` is
//!   below the evaluation noise floor is reported as a multiple root.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Default absolute bracket width for [`refine_root`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("invalid interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Build a rational from a numerator/denominator pair.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact conversion of a finite double into a rational.
pub fn rat_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn rat_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Serialize a rational as its `p/q` string.
pub fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl RealPoly {
    /// Coefficients in ascending order of degree. Trailing zeros are trimmed.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = RealPoly { coeffs, exact: None };
        p.trim();
        p
    }

    pub fn from_rationals(coeffs: Vec<Rational>) -> Self {
        let mut exact = coeffs;
        while exact.len() > 1 && exact.last().map_or(false, |c| c.is_zero()) {
            exact.pop();
        }
        let coeffs = exact.iter().map(rat_to_f64).collect();
        let mut p = RealPoly { coeffs, exact: Some(exact) };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(e) => e.iter().all(|c| c.is_zero()),
            None => self.coeffs.iter().all(|&c| c == 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Sum of |a_i x^i|; the natural scale for rounding error in `eval`.
    pub fn eval_abs(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        self.exact.as_ref().map(|e| horner(e, x))
    }

    pub fn derivative(&self) -> RealPoly {
        if let Some(e) = &self.exact {
            return RealPoly::from_rationals(rderiv(e));
        }
        if self.coeffs.len() <= 1 {
            return RealPoly::new(vec![0.0]);
        }
        RealPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Divide by `(x - r)`, dropping the remainder.
    pub fn deflate(&self, r: f64) -> RealPoly {
        let n = self.coeffs.len();
        if n <= 1 {
            return RealPoly::new(vec![0.0]);
        }
        let mut out = vec![0.0; n - 1];
        let mut carry = 0.0;
        for i in (1..n).rev() {
            carry = carry * r + self.coeffs[i];
            out[i - 1] = carry;
        }
        RealPoly::new(out)
    }

    /// Cauchy bound on the modulus of every root.
    pub fn root_bound(&self) -> f64 {
        let lead = *self.coeffs.last().unwrap();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
        1.0 + m
    }
}

/// One isolating interval. `lo == hi` when the root was hit exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootInterval {
    pub lo: f64,
    pub hi: f64,
    pub multiple: bool,
}

impl RootInterval {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Isolate the distinct real roots of `p` in `[lo, hi]`.
///
/// Roots sitting exactly on `lo` or `hi` are caught by widening the search
/// interval by a few ulps before isolating.
pub fn isolate_real_roots(p: &RealPoly, lo: f64, hi: f64) -> Result<Vec<RootInterval>, PolyError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(PolyError::InvalidInterval { lo, hi });
    }
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if p.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(PolyError::NonFinite);
    }
    let pad = 8.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    match &p.exact {
        Some(e) => Ok(isolate_exact(e, lo, hi)),
        None => Ok(isolate_float(&p.coeffs, lo, hi)),
    }
}

/// Bisect a sign-changing bracket of `p` down to width `tol`.
pub fn refine_root(p: &RealPoly, bracket: (f64, f64), tol: f64) -> Result<f64, PolyError> {
    let (mut a, mut b) = bracket;
    if !(a <= b) {
        return Err(PolyError::InvalidInterval { lo: a, hi: b });
    }
    let fa = p.eval(a);
    let fb = p.eval(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(PolyError::NoSignChange { lo: a, hi: b });
    }
    let sa = fa.signum();
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Refine an isolated root, including multiple ones: for a flagged root the
/// lowest derivative that changes sign across the bracket is refined instead.
pub fn refine_isolated(p: &RealPoly, iv: &RootInterval, tol: f64) -> Result<f64, PolyError> {
    if iv.lo == iv.hi {
        return Ok(iv.lo);
    }
    if !iv.multiple {
        return refine_root(p, (iv.lo, iv.hi), tol);
    }
    if let Some(e) = &p.exact {
        let g = rgcd(e, &rderiv(e));
        let sf = RealPoly::from_rationals(rdiv(e, &g).0);
        if let Ok(r) = refine_root(&sf, (iv.lo, iv.hi), tol) {
            return Ok(r);
        }
    }
    let mut q = p.clone();
    for _ in 0..p.degree() {
        if let Ok(r) = refine_root(&q, (iv.lo, iv.hi), tol) {
            return Ok(r);
        }
        q = q.derivative();
    }
    Ok(iv.mid())
}

// ---------------------------------------------------------------------------
// exact helpers

fn horner(c: &[Rational], x: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * x + a)
}

fn rtrim(mut c: Vec<Rational>) -> Vec<Rational> {
    while c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
    c
}

fn rderiv(c: &[Rational]) -> Vec<Rational> {
    if c.len() <= 1 {
        return vec![Rational::zero()];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * Rational::from_integer(BigInt::from(i)))
        .collect()
}

/// Polynomial long division; returns (quotient, remainder), both trimmed.
fn rdiv(num: &[Rational], den: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let den = rtrim(den.to_vec());
    let mut rem = rtrim(num.to_vec());
    if den.is_empty() {
        panic!("division by zero polynomial");
    }
    if rem.len() < den.len() {
        return (vec![], rem);
    }
    let lead = den.last().unwrap().clone();
    let mut quot = vec![Rational::zero(); rem.len() - den.len() + 1];
    while rem.len() >= den.len() && !rem.is_empty() {
        let shift = rem.len() - den.len();
        let f = rem.last().unwrap() / &lead;
        for (i, d) in den.iter().enumerate() {
            rem[i + shift] -= &f * d;
        }
        quot[shift] = f;
        rem.pop();
        rem = rtrim(rem);
    }
    (rtrim(quot), rem)
}

fn rgcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut a = rtrim(a.to_vec());
    let mut b = rtrim(b.to_vec());
    while !b.is_empty() {
        let (_, r) = rdiv(&a, &b);
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        a.iter_mut().for_each(|c| *c = &*c / &l);
    }
    a
}

fn sturm_sequence(p: &[Rational]) -> Vec<Vec<Rational>> {
    let mut seq = vec![rtrim(p.to_vec())];
    let d = rtrim(rderiv(p));
    if d.is_empty() {
        return seq;
    }
    seq.push(d);
    loop {
        let n = seq.len();
        let (_, r) = rdiv(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    seq
}

fn sign_variations(seq: &[Vec<Rational>], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in seq {
        let v = horner(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in the half-open interval (a, b].
pub fn sturm_count(p: &[Rational], a: &Rational, b: &Rational) -> usize {
    let p = rtrim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let seq = sturm_sequence(&p);
    sign_variations(&seq, a).saturating_sub(sign_variations(&seq, b))
}

/// Whether an exact polynomial has a real root of multiplicity at least two.
pub fn has_multiple_real_root(p: &[Rational]) -> bool {
    let p = rtrim(p.to_vec());
    if p.len() < 3 {
        return false;
    }
    let g = rgcd(&p, &rderiv(&p));
    if g.len() < 2 {
        return false;
    }
    let lead = g.last().unwrap().clone();
    let bound = g[..g.len() - 1]
        .iter()
        .map(|c| (c / &lead).abs())
        .fold(Rational::one(), |acc, c| acc + c);
    sturm_count(&g, &-bound.clone(), &bound) > 0
}

fn isolate_exact(coeffs: &[Rational], lo: f64, hi: f64) -> Vec<RootInterval> {
    let p = rtrim(coeffs.to_vec());
    if p.len() <= 1 {
        return vec![];
    }
    let g = rgcd(&p, &rderiv(&p));
    let sf = if g.len() > 1 { rdiv(&p, &g).0 } else { p.clone() };
    let seq = sturm_sequence(&sf);
    let a = rat_from_f64(lo).unwrap();
    let b = rat_from_f64(hi).unwrap();
    let mut stack = vec![(a, b)];
    let mut found: Vec<(Rational, Rational)> = Vec::new();
    let two = Rational::from_integer(BigInt::from(2));
    while let Some((a, b)) = stack.pop() {
        let n = sign_variations(&seq, &a).saturating_sub(sign_variations(&seq, &b));
        if n == 0 {
            continue;
        }
        if n == 1 {
            found.push((a, b));
            continue;
        }
        // never split on a root: it would sit on the open end of one half
        let mut m = (&a + &b) / &two;
        let mut k = 3i64;
        while horner(&sf, &m).is_zero() {
            m = &a + (&b - &a) * rat(k - 1, 2 * k);
            k += 1;
        }
        stack.push((a, m.clone()));
        stack.push((m, b));
    }
    let mut out: Vec<RootInterval> = found
        .into_iter()
        .map(|(a, b)| {
            // the Sturm count is over (a, b]; if b is the root itself keep it
            let exact_hit = horner(&sf, &b).is_zero();
            let (lo_r, hi_r) = if exact_hit { (b.clone(), b.clone()) } else { (a, b) };
            let multiple = g.len() > 1 && {
                let probe_lo = &lo_r - Rational::new(BigInt::one(), BigInt::from(1u64 << 52));
                sturm_count(&g, &probe_lo, &hi_r) > 0
            };
            RootInterval {
                lo: outward_down(&lo_r),
                hi: outward_up(&hi_r),
                multiple,
            }
        })
        .collect();
    out.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    out
}

fn outward_down(x: &Rational) -> f64 {
    let f = rat_to_f64(x);
    match rat_from_f64(f) {
        Some(r) if &r > x => next_down(f),
        _ => f,
    }
}

fn outward_up(x: &Rational) -> f64 {
    let f = rat_to_f64(x);
    match rat_from_f64(f) {
        Some(r) if &r < x => next_up(f),
        _ => f,
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

// ---------------------------------------------------------------------------
// float helpers

fn eval_f(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn eval_abs_f(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &a| acc * ax + a.abs())
}

fn trim_f(c: &[f64]) -> Vec<f64> {
    let mut v = c.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    v
}

fn bisect_f(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let sa = eval_f(c, a).signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval_f(c, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Critical points of `c` in (lo, hi), refined to full precision.
fn critical_points(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect();
    let d = trim_f(&d);
    if d.len() <= 1 {
        return vec![];
    }
    isolate_float(&d, lo, hi)
        .into_iter()
        .map(|iv| if iv.lo == iv.hi { iv.lo } else { bisect_f(&d, iv.lo, iv.hi) })
        .collect()
}

fn isolate_float(coeffs: &[f64], lo: f64, hi: f64) -> Vec<RootInterval> {
    let c = trim_f(coeffs);
    if c.len() <= 1 {
        return vec![];
    }
    let crit = critical_points(&c, lo, hi);
    let noise = |x: f64| 64.0 * f64::EPSILON * eval_abs_f(&c, x);
    let mut out = Vec::new();
    // knots: lo, critical points, hi; p is monotone between consecutive knots
    let mut knots = vec![lo];
    knots.extend(crit.iter().copied());
    knots.push(hi);
    let mut doubles = vec![false; knots.len()];
    for (i, &x) in knots.iter().enumerate().skip(1).take(crit.len()) {
        if eval_f(&c, x).abs() <= noise(x) {
            doubles[i] = true;
            let w = 1e-9 * x.abs().max(1.0);
            out.push(RootInterval { lo: x - w, hi: x + w, multiple: true });
        }
    }
    for i in 0..knots.len() - 1 {
        let (a, b) = (knots[i], knots[i + 1]);
        if doubles[i] || doubles[i + 1] {
            continue;
        }
        let (fa, fb) = (eval_f(&c, a), eval_f(&c, b));
        if fa == 0.0 && i == 0 {
            out.push(RootInterval { lo: a, hi: a, multiple: false });
            continue;
        }
        if fb == 0.0 {
            out.push(RootInterval { lo: b, hi: b, multiple: false });
            continue;
        }
        if fa.signum() != fb.signum() && fa != 0.0 {
            out.push(RootInterval { lo: a, hi: b, multiple: false });
        }
    }
    out.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    out.dedup_by(|x, y| x.lo == y.lo && x.hi == y.hi);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(t: Rational) -> RealPoly {
        // x^2/2 - x^3/3 + t
        RealPoly::from_rationals(vec![t, Rational::zero(), rat(1, 2), rat(-1, 3)])
    }

    #[test]
    fn symmetric_pair() {
        let p = RealPoly::new(vec![-1.0, 0.0, 1.0]);
        let r = isolate_real_roots(&p, -2.0, 2.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].contains(-1.0) && r[1].contains(1.0));
        let pe = RealPoly::from_rationals(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        let r = isolate_real_roots(&pe, -2.0, 2.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].contains(-1.0) && r[1].contains(1.0));
    }

    #[test]
    fn center_level_double_root() {
        let p = level(rat(-1, 6));
        let r = isolate_real_roots(&p, -2.0, 2.0).unwrap();
        assert_eq!(r.len(), 2);
        let dbl: Vec<_> = r.iter().filter(|iv| iv.multiple).collect();
        assert_eq!(dbl.len(), 1);
        let x = refine_isolated(&p, dbl[0], 1e-13).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        // float mode sees the same structure
        let pf = RealPoly::new(p.coeffs().to_vec());
        let rf = isolate_real_roots(&pf, -2.0, 2.0).unwrap();
        assert_eq!(rf.len(), 2);
        assert!(rf.iter().any(|iv| iv.multiple && iv.contains(1.0)));
    }

    #[test]
    fn three_roots_match_sign_scan() {
        let p = level(rat(-1, 10));
        let r = isolate_real_roots(&p, -2.0, 3.0).unwrap();
        // brute-force sign scan on 10^6 points
        let n = 1_000_000;
        let mut changes = Vec::new();
        let mut prev = p.eval(-2.0);
        for i in 1..=n {
            let x = -2.0 + 5.0 * i as f64 / n as f64;
            let v = p.eval(x);
            if v.signum() != prev.signum() {
                changes.push(x);
            }
            prev = v;
        }
        assert_eq!(changes.len(), 3);
        assert_eq!(r.len(), 3);
        for (iv, x) in r.iter().zip(&changes) {
            let root = refine_isolated(&p, iv, 1e-13).unwrap();
            assert!((root - x).abs() < 1e-5, "{root} vs {x}");
        }
    }

    #[test]
    fn refine_examples() {
        let p = RealPoly::new(vec![-2.0, 0.0, 1.0]);
        let r = refine_root(&p, (1.0, 2.0), 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let d0 = level(rat(0, 1));
        let r = refine_root(&d0, (1.0, 2.0), 1e-12).unwrap();
        assert!((r - 1.5).abs() < 1e-12);
        assert!(matches!(
            refine_root(&p, (2.0, 3.0), 1e-12),
            Err(PolyError::NoSignChange { .. })
        ));
    }

    #[test]
    fn degenerate_inputs() {
        let z = RealPoly::new(vec![0.0, 0.0]);
        assert_eq!(isolate_real_roots(&z, -1.0, 1.0), Err(PolyError::ZeroPolynomial));
        let p = RealPoly::new(vec![1.0, 1.0]);
        assert!(isolate_real_roots(&p, 1.0, 1.0).is_err());
    }

    #[test]
    fn endpoint_roots_included() {
        let p = RealPoly::from_rationals(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        let r = isolate_real_roots(&p, -1.0, 1.0).unwrap();
        assert_eq!(r.len(), 2);
        let pf = RealPoly::new(vec![-1.0, 0.0, 1.0]);
        let r = isolate_real_roots(&pf, -1.0, 1.0).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn deflation() {
        // (x-1)(x-2)(x+3)
        let p = RealPoly::new(vec![6.0, -7.0, 0.0, 1.0]);
        let q = p.deflate(1.0).deflate(2.0);
        assert_eq!(q.degree(), 1);
        assert!((q.coeffs()[0] - 3.0).abs() < 1e-14);
    }
}
