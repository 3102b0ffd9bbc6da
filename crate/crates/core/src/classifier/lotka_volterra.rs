//! Lotka-Volterra centers `z' = -iz + A z^2 + B zbar^2` and the exponent
//! normal forms of `H = x^lambda y^mu (1 - x - y)`.

use super::reversible::ClassifyError;
use crate::case::CaseId;
use crate::poly::{rat, rat_from_f64, rat_to_f64, ser_rat, Rational};
use num_traits::{Signed, Zero};
use serde::Serialize;

/// Gaussian rational `re + i im`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(GaussRat { re: rat_from_f64(re)?, im: rat_from_f64(im)? })
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn norm2(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn div(&self, o: &Self) -> Self {
        let n = o.norm2();
        let p = self.mul(&o.conj());
        GaussRat { re: p.re / &n, im: p.im / n }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        GaussRat { re: -self.im.clone(), im: self.re.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LVParams {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "label")]
pub enum LVCase {
    /// Reversible genus-one (or conic) cases; `Rlv(k)` in 0..=6.
    #[serde(rename = "rlv")]
    Rlv { case: CaseId },
    /// Generic genus-one cases with the sign of the imaginary part.
    #[serde(rename = "lv")]
    Lv { case: CaseId, branch: Branch },
    /// Reversible (A^3 B real) but not of genus one.
    Reversible,
    NotGenusOne,
}

impl LVCase {
    pub fn label(&self) -> String {
        match self {
            LVCase::Rlv { case } => case.to_string(),
            LVCase::Lv { case, branch } => {
                format!("{case}{}", if *branch == Branch::Plus { "+" } else { "-" })
            }
            LVCase::Reversible => "Reversible".into(),
            LVCase::NotGenusOne => "NotGenusOne".into(),
        }
    }

    /// Image under the coordinate swap `(x, y) -> (y, x)`.
    pub fn swapped(&self) -> LVCase {
        match *self {
            LVCase::Lv { case, branch } => LVCase::Lv {
                case,
                branch: if branch == Branch::Plus { Branch::Minus } else { Branch::Plus },
            },
            other => other,
        }
    }
}

/// Values of `w = A B / conj(A)^2` for the reversible cases.
const RLV_W: [(u8, (i64, i64)); 6] = [(0, (0, 1)), (2, (1, 2)), (3, (3, 1)), (4, (3, 5)), (5, (1, 5)), (6, (-1, 3))];

/// `w = (re + i im)` for lv1, lv2, lv3, lv5 (+ branch).
const LV_W: [(u8, (i64, i64), (i64, i64)); 4] = [
    (1, (-1, 1), (-2, 1)),
    (2, (101, 169), (28, 169)),
    (3, (151, 289), (42, 289)),
    (5, (349, 841), (12, 841)),
];

/// lv4: `w = (783 + 60 sqrt(2) i) / 1681`.
fn lv4_match(w: &GaussRat) -> Option<Branch> {
    if w.re != rat(783, 1681) {
        return None;
    }
    let target = rat(7200, 1681 * 1681);
    if &w.im * &w.im != target {
        return None;
    }
    Some(if w.im.is_positive() { Branch::Plus } else { Branch::Minus })
}

/// Exact classification on Gaussian-rational coefficients.
pub fn classify_lv_exact(a: &GaussRat, b: &GaussRat) -> LVCase {
    if a.is_zero() {
        if b.is_zero() {
            return LVCase::NotGenusOne;
        }
        return LVCase::Rlv { case: CaseId::Rlv(1) };
    }
    let w = a.mul(b).div(&a.conj().mul(&a.conj()));
    if w.im.is_zero() {
        for (k, v) in RLV_W {
            if w.re == rat(v.0, v.1) {
                return LVCase::Rlv { case: CaseId::Rlv(k) };
            }
        }
        return LVCase::Reversible;
    }
    for (k, re, im) in LV_W {
        if w.re == rat(re.0, re.1) {
            let im = rat(im.0, im.1);
            if w.im == im {
                return LVCase::Lv { case: CaseId::Lv(k), branch: Branch::Plus };
            }
            if w.im == -im {
                return LVCase::Lv { case: CaseId::Lv(k), branch: Branch::Minus };
            }
        }
    }
    if let Some(br) = lv4_match(&w) {
        return LVCase::Lv { case: CaseId::Lv(4), branch: br };
    }
    LVCase::NotGenusOne
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LVRecord {
    pub label: String,
    pub condition: String,
    pub residual: f64,
    pub w: (f64, f64),
}

fn lv_targets() -> Vec<(LVCase, (f64, f64), String)> {
    let mut v = Vec::new();
    for (k, w) in RLV_W {
        let x = w.0 as f64 / w.1 as f64;
        v.push((LVCase::Rlv { case: CaseId::Rlv(k) }, (x, 0.0), format!("AB/conj(A)^2 = {}", rat(w.0, w.1))));
    }
    let mut gen = |k: u8, re: f64, im: f64, text: String| {
        for (br, s) in [(Branch::Plus, 1.0), (Branch::Minus, -1.0)] {
            v.push((LVCase::Lv { case: CaseId::Lv(k), branch: br }, (re, s * im), text.clone()));
        }
    };
    for (k, re, im) in LV_W {
        gen(k, re.0 as f64 / re.1 as f64, im.0 as f64 / im.1 as f64, format!("AB/conj(A)^2 = {} +- {} i", rat(re.0, re.1), rat(im.0, im.1)));
    }
    gen(4, 783.0 / 1681.0, 60.0 * 2f64.sqrt() / 1681.0, "AB/conj(A)^2 = (783 +- 60 sqrt2 i)/1681".into());
    v
}

/// Classification of floating coefficients. `tol == 0` classifies the
/// exact binary values of the inputs; otherwise each condition is accepted
/// when `|w - w_k| <= tol * max(1, |w_k|)`.
pub fn classify_lv(p: &LVParams, tol: f64) -> Result<(LVCase, LVRecord), ClassifyError> {
    let vals = [p.a.0, p.a.1, p.b.0, p.b.1];
    if vals.iter().any(|v| !v.is_finite()) || tol < 0.0 {
        return Err(ClassifyError::NonFinite);
    }
    let (ar, ai) = p.a;
    let (br, bi) = p.b;
    let an = ar * ar + ai * ai;
    let w = if an == 0.0 {
        (0.0, 0.0)
    } else {
        // A B conj(conj(A)^2) / |A|^4 = A^3 B / |A|^4
        let (a2r, a2i) = (ar * ar - ai * ai, 2.0 * ar * ai);
        let (a3r, a3i) = (a2r * ar - a2i * ai, a2r * ai + a2i * ar);
        ((a3r * br - a3i * bi) / (an * an), (a3r * bi + a3i * br) / (an * an))
    };
    if tol == 0.0 {
        let a = GaussRat::from_f64(ar, ai).ok_or(ClassifyError::NonFinite)?;
        let b = GaussRat::from_f64(br, bi).ok_or(ClassifyError::NonFinite)?;
        let c = classify_lv_exact(&a, &b);
        let cond = lv_targets()
            .into_iter()
            .find(|t| t.0 == c)
            .map(|t| t.2)
            .unwrap_or_else(|| if c == (LVCase::Rlv { case: CaseId::Rlv(1) }) { "A=0".into() } else { "none".into() });
        return Ok((c, LVRecord { label: c.label(), condition: cond, residual: 0.0, w }));
    }
    let scale_b = (br * br + bi * bi).sqrt().max(1.0);
    if an.sqrt() <= tol * scale_b {
        if (br * br + bi * bi).sqrt() <= tol {
            return Ok((LVCase::NotGenusOne, LVRecord { label: "NotGenusOne".into(), condition: "A=B=0".into(), residual: 0.0, w }));
        }
        let c = LVCase::Rlv { case: CaseId::Rlv(1) };
        return Ok((c, LVRecord { label: c.label(), condition: "A=0".into(), residual: an.sqrt(), w }));
    }
    let hits: Vec<_> = lv_targets()
        .into_iter()
        .filter_map(|(c, t, text)| {
            let r = (w.0 - t.0).hypot(w.1 - t.1);
            (r <= tol * 1f64.max(t.0.hypot(t.1))).then_some((c, text, r))
        })
        .collect();
    match hits.len() {
        0 => {
            let c = if w.1.abs() <= tol * 1f64.max(w.0.abs()) { LVCase::Reversible } else { LVCase::NotGenusOne };
            Ok((c, LVRecord { label: c.label(), condition: "none".into(), residual: 0.0, w }))
        }
        1 => {
            let (c, text, r) = hits.into_iter().next().unwrap();
            Ok((c, LVRecord { label: c.label(), condition: text, residual: r, w }))
        }
        _ => Err(ClassifyError::Ambiguous(hits.iter().map(|h| h.0.label()).collect())),
    }
}

/// Coefficients of the mirrored system under `(x, y) -> (y, x)`:
/// `(A, B) -> (i conj(A), i conj(B))`.
pub fn swap_params(a: &GaussRat, b: &GaussRat) -> (GaussRat, GaussRat) {
    (a.conj().times_i(), b.conj().times_i())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LVExponents {
    #[serde(serialize_with = "ser_rat")]
    pub lambda: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub mu: Rational,
}

impl LVExponents {
    pub fn new(lambda: Rational, mu: Rational) -> Self {
        LVExponents { lambda, mu }
    }

    pub fn region(&self) -> Option<Region> {
        let zero = Rational::zero();
        let one = rat(1, 1);
        let (l, m) = (&self.lambda, &self.mu);
        if *l > zero && *l <= one && *m > zero && *m <= one {
            Some(Region::I)
        } else if *l < zero && *m < zero && (l + m + &one) > zero {
            Some(Region::II)
        } else {
            None
        }
    }

    /// Center `(lambda, mu) / (lambda + mu + 1)`.
    pub fn critical_point(&self) -> (Rational, Rational) {
        let s = &self.lambda + &self.mu + rat(1, 1);
        (&self.lambda / &s, &self.mu / &s)
    }

    pub fn swapped(&self) -> LVExponents {
        LVExponents { lambda: self.mu.clone(), mu: self.lambda.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    I,
    II,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Transform {
    /// Swap the factor in the given slot with the line factor `1-x-y` and
    /// take the `1/e` root, where `e` was that slot's exponent.
    LineSwap { slot: Slot, power: String },
    /// `x = -X/(1-X-Y)`, `y = -Y/(1-X-Y)`, level `t^{-1/(lambda+mu+1)}`.
    Inversion { power: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slot {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalized {
    pub exponents: LVExponents,
    pub region: Region,
    pub transforms: Vec<Transform>,
}

fn center_product(e: &LVExponents) -> Rational {
    &e.lambda * &e.mu * (&e.lambda + &e.mu + rat(1, 1))
}

fn line_swap(e: &LVExponents, slot: Slot) -> (LVExponents, Transform) {
    let one = rat(1, 1);
    let (piv, other) = match slot {
        Slot::X => (&e.lambda, &e.mu),
        Slot::Y => (&e.mu, &e.lambda),
    };
    let moved = &one / piv;
    let kept = other / piv;
    let out = match slot {
        Slot::X => LVExponents::new(moved, kept),
        Slot::Y => LVExponents::new(kept, moved),
    };
    (out, Transform::LineSwap { slot, power: (&one / piv).to_string() })
}

/// Bring exponents to region I (`0 < lambda, mu <= 1`) or region II
/// (`lambda, mu < 0 < lambda + mu + 1`). Already-normal inputs are returned
/// unchanged.
pub fn lv_normalize(e: &LVExponents) -> Result<Normalized, ClassifyError> {
    let cp = center_product(e);
    if cp.is_zero() {
        return Err(ClassifyError::NonAlgebraic);
    }
    if cp.is_negative() {
        return Err(ClassifyError::NotACenter);
    }
    if let Some(region) = e.region() {
        return Ok(Normalized { exponents: e.clone(), region, transforms: vec![] });
    }
    let zero = Rational::zero();
    let (l, m) = (&e.lambda, &e.mu);
    let slot = if *l > zero && *m > zero {
        // the largest exponent among (lambda, mu, 1) exceeds 1
        if l >= m { Slot::X } else { Slot::Y }
    } else if (*l < zero) != (*m < zero) {
        if *l < zero { Slot::X } else { Slot::Y }
    } else {
        // both negative with lambda + mu + 1 < 0 is excluded by the center test
        unreachable!("center product sign already checked")
    };
    let (out, tr) = line_swap(e, slot);
    let region = out.region().expect("one line swap reaches a normal region");
    Ok(Normalized { exponents: out, region, transforms: vec![tr] })
}

/// The birational map between regions II and I.
pub fn lv_inversion(e: &LVExponents) -> Result<(LVExponents, Transform), ClassifyError> {
    let s = &e.lambda + &e.mu + rat(1, 1);
    if s.is_zero() {
        return Err(ClassifyError::NonAlgebraic);
    }
    let out = LVExponents::new(-&e.lambda / &s, -&e.mu / &s);
    Ok((out, Transform::Inversion { power: (-(rat(1, 1) / s)).to_string() }))
}

/// The five generic genus-one exponent pairs, in normal form.
pub fn lv_exponents(case: CaseId) -> Option<LVExponents> {
    let (l, m) = match case {
        CaseId::Lv(1) => ((2, 3), (1, 3)),
        CaseId::Lv(2) => ((-1, 6), (-1, 3)),
        CaseId::Lv(3) => ((-1, 6), (-1, 2)),
        CaseId::Lv(4) => ((-1, 4), (-1, 2)),
        CaseId::Lv(5) => ((-1, 3), (-1, 2)),
        _ => return None,
    };
    Some(LVExponents::new(rat(l.0, l.1), rat(m.0, m.1)))
}

/// The 15 listed exponent pairs (normal form first in each row).
pub fn lv_table() -> [[(Rational, Rational); 3]; 5] {
    let r = |a: i64, b: i64, c: i64, d: i64| (rat(a, b), rat(c, d));
    [
        [r(2, 3, 1, 3), r(3, 2, 1, 2), r(2, 1, 3, 1)],
        [r(-1, 6, -1, 3), r(-6, 1, 2, 1), r(1, 2, -3, 1)],
        [r(-1, 6, -1, 2), r(-6, 1, 3, 1), r(1, 3, -2, 1)],
        [r(-1, 4, -1, 2), r(-4, 1, 2, 1), r(1, 2, -2, 1)],
        [r(-1, 3, -1, 2), r(-3, 1, 3, 2), r(2, 3, -2, 1)],
    ]
}

pub fn to_f64(e: &LVExponents) -> (f64, f64) {
    (rat_to_f64(&e.lambda), rat_to_f64(&e.mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::new(rat(re, 1), rat(im, 1))
    }

    #[test]
    fn tabulated_conditions() {
        assert_eq!(classify_lv_exact(&g(0, 0), &g(1, 0)), LVCase::Rlv { case: CaseId::Rlv(1) });
        let half = GaussRat::new(rat(1, 2), rat(0, 1));
        assert_eq!(classify_lv_exact(&g(1, 0), &half), LVCase::Rlv { case: CaseId::Rlv(2) });
        assert_eq!(
            classify_lv_exact(&g(1, 0), &g(-1, -2)),
            LVCase::Lv { case: CaseId::Lv(1), branch: Branch::Plus }
        );
        assert_eq!(classify_lv_exact(&g(1, 0), &g(0, 0)), LVCase::Rlv { case: CaseId::Rlv(0) });
        assert_eq!(classify_lv_exact(&g(1, 0), &g(7, 0)), LVCase::Reversible);
        assert_eq!(classify_lv_exact(&g(1, 0), &g(7, 1)), LVCase::NotGenusOne);
    }

    #[test]
    fn conditions_hold_for_rotated_a() {
        // AB = w conj(A)^2 with A = 2 + i
        let a = g(2, 1);
        let abar2 = a.conj().mul(&a.conj());
        for (w, want) in [
            (GaussRat::new(rat(3, 5), rat(0, 1)), LVCase::Rlv { case: CaseId::Rlv(4) }),
            (GaussRat::new(rat(101, 169), rat(-28, 169)), LVCase::Lv { case: CaseId::Lv(2), branch: Branch::Minus }),
            (GaussRat::new(rat(349, 841), rat(12, 841)), LVCase::Lv { case: CaseId::Lv(5), branch: Branch::Plus }),
        ] {
            let b = w.mul(&abar2).div(&a);
            assert_eq!(classify_lv_exact(&a, &b), want);
        }
    }

    #[test]
    fn lv4_float() {
        let w = (783.0 / 1681.0, -60.0 * 2f64.sqrt() / 1681.0);
        let (c, r) = classify_lv(&LVParams { a: (1.0, 0.0), b: w }, 1e-9).unwrap();
        assert_eq!(c, LVCase::Lv { case: CaseId::Lv(4), branch: Branch::Minus });
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn swap_flips_branch() {
        let a = g(1, 2);
        let abar2 = a.conj().mul(&a.conj());
        let w = GaussRat::new(rat(151, 289), rat(42, 289));
        let b = w.mul(&abar2).div(&a);
        let c = classify_lv_exact(&a, &b);
        let (a2, b2) = swap_params(&a, &b);
        assert_eq!(classify_lv_exact(&a2, &b2), c.swapped());
        assert_ne!(c, c.swapped());
    }

    #[test]
    fn normalize_examples() {
        let n = lv_normalize(&LVExponents::new(rat(2, 1), rat(3, 1))).unwrap();
        assert_eq!(n.exponents, LVExponents::new(rat(2, 3), rat(1, 3)));
        assert_eq!(n.region, Region::I);
        let e = LVExponents::new(rat(1, 2), rat(1, 2));
        let n = lv_normalize(&e).unwrap();
        assert_eq!(n.exponents, e);
        assert!(n.transforms.is_empty());
        assert_eq!(
            lv_normalize(&LVExponents::new(rat(-1, 2), rat(-1, 2))),
            Err(ClassifyError::NonAlgebraic)
        );
        assert_eq!(
            lv_normalize(&LVExponents::new(rat(-2, 1), rat(-1, 1))),
            Err(ClassifyError::NotACenter)
        );
    }

    #[test]
    fn table_rows_normalize_to_first_entry() {
        for row in lv_table() {
            let want = LVExponents::new(row[0].0.clone(), row[0].1.clone());
            for (l, m) in row.iter() {
                let n = lv_normalize(&LVExponents::new(l.clone(), m.clone())).unwrap();
                assert_eq!(n.exponents, want, "({l},{m})");
            }
        }
    }

    #[test]
    fn inversion_is_involution() {
        let e = LVExponents::new(rat(-1, 6), rat(-1, 3));
        let (f, _) = lv_inversion(&e).unwrap();
        assert_eq!(f, LVExponents::new(rat(1, 3), rat(2, 3)));
        assert_eq!(f.region(), Some(Region::I));
        assert_eq!(lv_inversion(&f).unwrap().0, e);
    }
}
