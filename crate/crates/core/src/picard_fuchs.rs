//! The moment recurrence on an oval and the reduction of arbitrary moments
//! to a finite basis.
//!
//! With `D = sum_j A_j x^j` the identity
//! `int x^(k-1) (x D' + 2k/3 D) y dx = 0` gives
//!
//! `sum_j (3j + 2k) A_j I_{k+j-1} = 0`,
//!
//! which for a quartic `D` is the familiar five-term relation with
//! coefficients `(2k+12)A_4, (2k+9)A_3, (2k+6)A_2, (2k+3)A_1, 2k A_0`
//! (times three). Coefficients are Laurent polynomials in `t`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::case::CaseId;
use crate::integral::catalog::formula;
use crate::integral::family::{Family, Kind, MomentOptions};
use crate::integral::IntegralError;
use crate::poly::{rat, rat_to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfError {
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error("elimination pivot for I_{index} vanishes identically (relation at k = {k})")]
    PivotVanishes { index: i32, k: i32 },
    #[error("pivot {pivot} for I_{index} is not a monomial in t")]
    PivotNotMonomial { index: i32, pivot: String },
}

/// Exact Laurent polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TPoly(pub BTreeMap<i32, Rational>);

impl TPoly {
    pub fn zero() -> Self {
        TPoly(BTreeMap::new())
    }

    pub fn constant(c: Rational) -> Self {
        TPoly::monomial(c, 0)
    }

    pub fn monomial(c: Rational, p: i32) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(p, c);
        }
        TPoly(m)
    }

    /// `a + b t`
    pub fn affine(a: &Rational, b: &Rational) -> Self {
        TPoly::constant(a.clone()).add(&TPoly::monomial(b.clone(), 1))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        let mut m = self.0.clone();
        for (p, c) in &o.0 {
            let e = m.entry(*p).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                m.remove(p);
            }
        }
        TPoly(m)
    }

    pub fn scale(&self, s: &Rational) -> TPoly {
        if s.is_zero() {
            return TPoly::zero();
        }
        TPoly(self.0.iter().map(|(p, c)| (*p, c * s)).collect())
    }

    pub fn mul(&self, o: &TPoly) -> TPoly {
        let mut out = TPoly::zero();
        for (p, c) in &self.0 {
            for (q, d) in &o.0 {
                out = out.add(&TPoly::monomial(c * d, p + q));
            }
        }
        out
    }

    /// Divide by `c t^p`.
    pub fn div_monomial(&self, c: &Rational, p: i32) -> TPoly {
        TPoly(self.0.iter().map(|(q, d)| (q - p, d / c)).collect())
    }

    /// `Some((c, p))` when the polynomial is `c t^p`.
    pub fn as_monomial(&self) -> Option<(Rational, i32)> {
        if self.0.len() == 1 {
            self.0.iter().next().map(|(p, c)| (c.clone(), *p))
        } else {
            None
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().map(|(p, c)| rat_to_f64(c) * t.powi(*p)).sum()
    }

    pub fn has_negative_powers(&self) -> bool {
        self.0.keys().any(|&p| p < 0)
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.0.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match p {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if *p == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for TPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `sum_i coeff_i(t) I_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRelation {
    pub k: i32,
    /// `(moment index, coefficient)`, highest index first.
    pub terms: Vec<(i32, TPoly)>,
}

impl MomentRelation {
    pub fn coeff(&self, index: i32) -> TPoly {
        self.terms.iter().find(|t| t.0 == index).map(|t| t.1.clone()).unwrap_or_default()
    }

    /// Coefficients of `I_{k+3}, I_{k+2}, I_{k+1}, I_k, I_{k-1}` when `D` is a
    /// polynomial of degree at most four.
    pub fn five_slot(&self) -> Option<[TPoly; 5]> {
        if self.terms.iter().any(|t| t.0 > self.k + 3 || t.0 < self.k - 1) {
            return None;
        }
        let k = self.k;
        Some([self.coeff(k + 3), self.coeff(k + 2), self.coeff(k + 1), self.coeff(k), self.coeff(k - 1)])
    }
}

/// Coefficients `A_j(t)` of `D`, keyed by power.
pub fn d_coefficients(f: &Family) -> BTreeMap<i32, TPoly> {
    f.terms.iter().map(|t| (t.power, TPoly::affine(&t.a, &t.b))).collect()
}

/// The recurrence at `k`, scaled by three so that its coefficients are
/// `(3j + 2k) A_j`.
pub fn family_relation_at(f: &Family, k: i32) -> MomentRelation {
    let mut terms: Vec<(i32, TPoly)> = d_coefficients(f)
        .into_iter()
        .map(|(j, a)| (k + j - 1, a.scale(&rat((3 * j + 2 * k) as i64, 1))))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    terms.sort_by(|a, b| b.0.cmp(&a.0));
    MomentRelation { k, terms }
}

pub fn relation_at(case: CaseId, b: Option<&Rational>, k: i32) -> Result<MomentRelation, PfError> {
    Ok(family_relation_at(&formula(case, b)?.family, k))
}

fn low_high(f: &Family) -> (i32, i32) {
    let p: Vec<i32> = f.terms.iter().map(|t| t.power).collect();
    (*p.iter().min().unwrap(), *p.iter().max().unwrap())
}

/// The window `{low-1, ..., high-2}` of consecutive moments every other
/// moment reduces to; for `D` with powers `0..=n` this is `{-1, ..., n-2}`.
pub fn family_basis(f: &Family) -> Vec<i32> {
    let (lo, hi) = low_high(f);
    (lo - 1..=hi - 2).collect()
}

/// `I_n` as a combination over the basis window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub index: i32,
    pub basis: Vec<i32>,
    /// `(basis index, coefficient)`
    pub coeffs: Vec<(i32, TPoly)>,
    /// The combination has negative powers of `t`, so it is singular at `t = 0`.
    pub singular_at_t0: bool,
}

impl Reduction {
    pub fn eval(&self, t: f64, basis_values: &BTreeMap<i32, f64>) -> f64 {
        self.coeffs.iter().map(|(i, c)| c.eval(t) * basis_values[i]).sum()
    }
}

pub fn reduce_in_family(f: &Family, n: i32) -> Result<Reduction, PfError> {
    let basis = family_basis(f);
    let (lo, hi) = low_high(f);
    let (bmin, bmax) = (basis[0], *basis.last().unwrap());
    let mut memo: BTreeMap<i32, BTreeMap<i32, TPoly>> = BTreeMap::new();
    for &i in &basis {
        memo.insert(i, BTreeMap::from([(i, TPoly::constant(Rational::one()))]));
    }
    // walk outward from the window so every step only uses solved indices
    let targets: Vec<i32> = if n > bmax {
        (bmax + 1..=n).collect()
    } else if n < bmin {
        (n..bmin).rev().collect()
    } else {
        vec![]
    };
    for m in targets {
        let (k, up) = if m > bmax { (m - hi + 1, true) } else { (m - lo + 1, false) };
        let rel = family_relation_at(f, k);
        let pivot = rel.coeff(m);
        if pivot.is_zero() {
            return Err(PfError::PivotVanishes { index: m, k });
        }
        let (pc, pp) = pivot
            .as_monomial()
            .ok_or_else(|| PfError::PivotNotMonomial { index: m, pivot: pivot.to_string() })?;
        let mut acc: BTreeMap<i32, TPoly> = BTreeMap::new();
        for (idx, c) in &rel.terms {
            if *idx == m {
                continue;
            }
            debug_assert!(if up { *idx < m } else { *idx > m });
            let factor = c.div_monomial(&pc, pp).scale(&rat(-1, 1));
            for (bi, bc) in &memo[idx] {
                let e = acc.entry(*bi).or_default();
                *e = e.add(&factor.mul(bc));
            }
        }
        acc.retain(|_, c| !c.is_zero());
        memo.insert(m, acc);
    }
    let coeffs: Vec<(i32, TPoly)> = memo[&n].iter().map(|(i, c)| (*i, c.clone())).collect();
    let singular_at_t0 = coeffs.iter().any(|(_, c)| c.has_negative_powers());
    Ok(Reduction { index: n, basis, coeffs, singular_at_t0 })
}

pub fn reduce_moment(case: CaseId, b: Option<&Rational>, n: i32) -> Result<Reduction, PfError> {
    reduce_in_family(&formula(case, b)?.family, n)
}

/// Dimension of the Picard-Fuchs system: 3 for r1, r3/r4 at b = -1/3, r6 at
/// b = 2, r9, r11, r12, r17, r18; 4 for the other tabulated cases.
pub fn pf_dimension(case: CaseId, b: Option<&Rational>) -> usize {
    match case {
        CaseId::R(1) | CaseId::R(9) | CaseId::R(11) | CaseId::R(12) | CaseId::R(17) | CaseId::R(18) => 3,
        CaseId::R(3) | CaseId::R(4) if b == Some(&rat(-1, 3)) => 3,
        CaseId::R(6) if b == Some(&rat(2, 1)) => 3,
        _ => 4,
    }
}

/// Relative residual `|sum c_i I_i| / sum |c_i I_i|` by quadrature.
pub fn relation_residual(f: &Family, rel: &MomentRelation, t: f64, opts: &MomentOptions) -> Result<f64, PfError> {
    let oval = f.oval(t, opts)?;
    let mut sum = 0.0;
    let mut scale = 0.0;
    for (i, c) in &rel.terms {
        let v = c.eval(t) * oval.combination(&[(1.0, Kind::Y, *i)], &opts.quad)?.value;
        sum += v;
        scale += v.abs();
    }
    Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
}

/// Residuals of the three derivative identities at `(t, k)`:
///
/// - `I_k' = int x^k dD/dt / y dx`, with `I_k'` by Richardson-extrapolated
///   central differences at tightened quadrature tolerance
/// - `int x^k D' / y dx = -k I_{k-1}`
/// - `int x^k D / y dx = I_k / 2`
///
/// each relative to the size of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeResiduals {
    pub dt_identity: f64,
    pub dx_identity: f64,
    pub on_curve_identity: f64,
}

impl DerivativeResiduals {
    pub fn max(&self) -> f64 {
        self.dt_identity.max(self.dx_identity).max(self.on_curve_identity)
    }
}

pub fn family_derivative_relations(f: &Family, t: f64, k: i32, opts: &MomentOptions) -> Result<DerivativeResiduals, PfError> {
    let oval = f.oval(t, opts)?;
    let m = |kind, i| oval.combination(&[(1.0, kind, i)], &opts.quad).map(|r| r.value);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);

    // sixth-order Richardson on central differences, with the step a small
    // fraction of the distance to the nearest end (moments blow up there)
    let mut tight = opts.clone();
    tight.quad.rel_tol = tight.quad.rel_tol.min(1e-14);
    tight.quad.abs_tol = 0.0;
    let ik = |s: f64| f.moment(s, Kind::Y, k, &tight).map(|r| r.value);
    let span = f.annulus;
    let room = (t - span.t_c).min(if span.t_s.is_finite() { span.t_s - t } else { f64::INFINITY });
    let h = 0.02 * room.min(1.0 + t.abs());
    let central = |h: f64| -> Result<f64, IntegralError> { Ok((ik(t + h)? - ik(t - h)?) / (2.0 * h)) };
    let (d1, d2, d4) = (central(h)?, central(h / 2.0)?, central(h / 4.0)?);
    let (r1, r2) = ((4.0 * d2 - d1) / 3.0, (4.0 * d4 - d2) / 3.0);
    let fd = (16.0 * r2 - r1) / 15.0;
    let mut dt = 0.0;
    for (j, bj) in f.dt_terms() {
        dt += bj * m(Kind::InvY, k + j)?;
    }

    let mut dx = 0.0;
    let mut dx_scale = 0.0;
    let mut on = 0.0;
    let mut on_scale = 0.0;
    for tm in &f.terms {
        let a = rat_to_f64(&tm.a) + rat_to_f64(&tm.b) * t;
        let v = tm.power as f64 * a * m(Kind::InvY, k + tm.power - 1)?;
        dx += v;
        dx_scale += v.abs();
        let w = a * m(Kind::InvY, k + tm.power)?;
        on += w;
        on_scale += w.abs();
    }
    let lower = if k != 0 { k as f64 * m(Kind::Y, k - 1)? } else { 0.0 };
    let half = 0.5 * m(Kind::Y, k)?;
    Ok(DerivativeResiduals {
        dt_identity: rel(fd, dt),
        dx_identity: (dx + lower).abs() / dx_scale.max(lower.abs()).max(f64::MIN_POSITIVE),
        on_curve_identity: (on - half).abs() / on_scale.max(half.abs()),
    })
}

pub fn derivative_relations(
    case: CaseId,
    b: Option<&Rational>,
    t: f64,
    k: i32,
    opts: &MomentOptions,
) -> Result<DerivativeResiduals, PfError> {
    family_derivative_relations(&formula(case, b)?.family, t, k, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::family::FamilyKind;

    fn r18() -> Family {
        Family::new(FamilyKind::Cubic, None).unwrap()
    }

    #[test]
    fn cubic_relations_match_hand_substitution() {
        let r0 = family_relation_at(&r18(), 0);
        assert_eq!(r0.coeff(2), TPoly::constant(rat(-3, 1)));
        assert_eq!(r0.coeff(1), TPoly::constant(rat(3, 1)));
        assert!(r0.coeff(-1).is_zero() && r0.coeff(0).is_zero());
        let r1 = family_relation_at(&r18(), 1);
        let f = r1.five_slot().unwrap();
        assert!(f[0].is_zero());
        assert_eq!(f[1], TPoly::constant(rat(-11, 3)));
        assert_eq!(f[2], TPoly::constant(rat(4, 1)));
        assert!(f[3].is_zero());
        assert_eq!(f[4], TPoly::monomial(rat(2, 1), 1));
    }

    #[test]
    fn r11_relation_at_zero() {
        let f = Family::new(FamilyKind::R1, Some(&rat(1, 3))).unwrap();
        let r = family_relation_at(&f, 0);
        // 9t I_2 + 3(1/2) I_0 + 0 * A_0 term
        assert_eq!(r.coeff(2), TPoly::monomial(rat(9, 1), 1));
        assert_eq!(r.coeff(0), TPoly::constant(rat(3, 2)));
        assert!(r.coeff(-1).is_zero());
    }

    #[test]
    fn i2_equals_i1_on_cubic_ovals() {
        let red = reduce_in_family(&r18(), 2).unwrap();
        assert_eq!(red.coeffs, vec![(1, TPoly::constant(rat(1, 1)))]);
        let o = MomentOptions::default();
        let a = r18().moment(-0.1, Kind::Y, 2, &o).unwrap().value;
        let b = r18().moment(-0.1, Kind::Y, 1, &o).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn reductions_match_quadrature() {
        let o = MomentOptions::default();
        let fams = [
            (r18(), -0.1),
            (Family::new(FamilyKind::R6, Some(&rat(3, 1))).unwrap(), -0.1),
            (Family::new(FamilyKind::Quartic, None).unwrap(), -0.04),
            (Family::new(FamilyKind::Rlv3, None).unwrap(), -0.5),
            (Family::new(FamilyKind::R5Log, None).unwrap(), -0.1),
        ];
        for (f, t) in fams {
            let oval = f.oval(t, &o).unwrap();
            let basis = family_basis(&f);
            let vals: BTreeMap<i32, f64> = basis
                .iter()
                .map(|&i| (i, oval.combination(&[(1.0, Kind::Y, i)], &o.quad).unwrap().value))
                .collect();
            for n in [-5, -3, 3, 5] {
                let red = reduce_in_family(&f, n).unwrap();
                let direct = oval.combination(&[(1.0, Kind::Y, n)], &o.quad).unwrap().value;
                let v = red.eval(t, &vals);
                assert!((v - direct).abs() <= 1e-9 * direct.abs().max(1e-12), "{:?} n={n}: {v} vs {direct}", f.kind);
            }
        }
    }

    #[test]
    fn dimension_table_agrees_with_basis_width() {
        use crate::integral::catalog::implemented_cases;
        for (case, b) in implemented_cases() {
            if let CaseId::R(k) = case {
                if [0, 5, 10].contains(&k) {
                    continue;
                }
                let f = formula(case, b.as_ref()).unwrap().family;
                assert_eq!(family_basis(&f).len(), pf_dimension(case, b.as_ref()), "{case}");
            }
        }
        for (case, b) in [(CaseId::R(4), rat(-1, 3)), (CaseId::R(3), rat(-1, 3)), (CaseId::R(6), rat(2, 1))] {
            let f = formula(case, Some(&b)).unwrap().family;
            assert_eq!(family_basis(&f).len(), 3);
            assert_eq!(pf_dimension(case, Some(&b)), 3);
        }
        assert_eq!(pf_dimension(CaseId::R(7), None), 4);
        // at b = 3 the constant term of r1 vanishes and the window shrinks further
        let f = formula(CaseId::R(1), Some(&rat(3, 1))).unwrap().family;
        assert_eq!(family_basis(&f), vec![0, 1]);
    }

    #[test]
    fn derivative_identities_hold() {
        let o = MomentOptions::default();
        let f11 = Family::new(FamilyKind::R1, Some(&rat(1, 3))).unwrap();
        for (f, t, k) in [(r18(), -0.1, 1), (f11, -0.1, 2)] {
            let r = family_derivative_relations(&f, t, k, &o).unwrap();
            assert!(r.max() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn display() {
        let p = TPoly::monomial(rat(2, 1), 1).add(&TPoly::constant(rat(-1, 3))).add(&TPoly::monomial(rat(1, 1), -1));
        assert_eq!(p.to_string(), "2*t - 1/3 + t^-1");
    }
}
