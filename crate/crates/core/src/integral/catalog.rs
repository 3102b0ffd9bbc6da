//! Generating functions `I(t)` of the genus-one cases as linear combinations
//! of basic moments, and their derivatives `J(t) = I'(t)`.

use num_traits::Zero;

use super::family::{AnnulusInterval, Family, FamilyKind, Kind, Moment, MomentOptions, Oval};
use super::IntegralError;
use crate::case::CaseId;
use crate::poly::{rat, Rational};

/// `coef * t^tpow * M_{kind,k}(t)` weighted by `mu[mu_index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub mu_index: usize,
    pub coef: f64,
    pub tpow: i32,
    pub kind: Kind,
    pub k: i32,
}

const fn y(mu_index: usize, k: i32) -> Term {
    Term { mu_index, coef: 1.0, tpow: 0, kind: Kind::Y, k }
}

const fn yt(mu_index: usize, k: i32, tpow: i32) -> Term {
    Term { mu_index, coef: 1.0, tpow, kind: Kind::Y, k }
}

const fn scaled(t: Term, coef: f64) -> Term {
    Term { coef, ..t }
}

const fn of_kind(t: Term, kind: Kind) -> Term {
    Term { kind, ..t }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFormula {
    pub case: CaseId,
    pub family: Family,
    pub terms: Vec<Term>,
    /// 3, or 4 when a log term is present.
    pub n_mu: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingSpec {
    pub case: CaseId,
    pub b: Option<Rational>,
    pub mu: Vec<f64>,
}

impl GeneratingSpec {
    pub fn new(case: CaseId, b: Option<Rational>, mu: Vec<f64>) -> Self {
        GeneratingSpec { case, b, mu }
    }
}

fn family(kind: FamilyKind, b: Option<&Rational>) -> Result<Family, IntegralError> {
    Family::new(kind, b)
}

fn unsupported(case: CaseId, why: &str) -> IntegralError {
    IntegralError::Unsupported(format!("{case}: {why}"))
}

/// The family and term list of a case.
pub fn formula(case: CaseId, b: Option<&Rational>) -> Result<CaseFormula, IntegralError> {
    use FamilyKind::*;
    let third = rat(1, 3);
    let (fam, terms): (Family, Vec<Term>) = match case {
        CaseId::R(0) => (family(Cubic, None)?, vec![y(0, 0), yt(1, 0, 1), y(2, 1)]),
        CaseId::R(1) => {
            let b = b.ok_or_else(|| IntegralError::MissingParameter(case.to_string()))?;
            let ok = *b < rat(-1, 1) || *b == third || *b >= rat(3, 1);
            if !ok {
                return Err(IntegralError::BadParameter {
                    case: case.to_string(),
                    b: b.to_string(),
                    reason: "needs b < -1, b = 1/3 or b >= 3".into(),
                });
            }
            (family(R1, Some(b))?, vec![y(0, -4), y(1, -5), y(2, -3)])
        }
        CaseId::R(12) => (family(R1, Some(&third))?, vec![y(0, -4), y(1, -5), y(2, -3)]),
        CaseId::R(11) => (family(R1, Some(&third))?, vec![y(0, -1), y(1, -2), y(2, 0)]),
        CaseId::R(3) => {
            let b = b.ok_or_else(|| IntegralError::MissingParameter(case.to_string()))?;
            (family(R3, Some(b))?, vec![y(0, -4), y(1, -2), y(2, -6)])
        }
        CaseId::R(4) => {
            let b = b.ok_or_else(|| IntegralError::MissingParameter(case.to_string()))?;
            (family(R3, Some(b))?, vec![y(0, -2), y(1, -4), y(2, 0)])
        }
        CaseId::R(5) => {
            let b = b.ok_or_else(|| IntegralError::MissingParameter(case.to_string()))?;
            if *b == rat(1, 2) {
                (family(Quartic, None)?, vec![y(0, 1), y(1, 0), y(2, 2)])
            } else if *b == rat(2, 1) {
                let l = |k| of_kind(y(3, k), Kind::LogY);
                (family(R5Log, None)?, vec![y(0, -5), y(1, -4), y(2, -7), l(-5), scaled(l(-6), -1.0)])
            } else {
                return Err(unsupported(case, "only b = 1/2 and b = 2 are implemented"));
            }
        }
        CaseId::R(6) => {
            let b = b.ok_or_else(|| IntegralError::MissingParameter(case.to_string()))?;
            (family(R6, Some(b))?, vec![y(0, 0), y(1, -1), y(2, 1)])
        }
        CaseId::R(7) | CaseId::R(14) => (family(Quartic, None)?, vec![y(0, -1), y(1, -2), y(2, 0)]),
        CaseId::R(8) => (family(Quartic, None)?, vec![y(0, -1), y(1, -2), yt(2, 1, -1)]),
        CaseId::R(13) => (family(Quartic, None)?, vec![y(0, 0), y(1, -1), yt(2, 2, -1)]),
        CaseId::R(15) => (family(Quartic, None)?, vec![y(0, -3), y(1, -4), y(2, -2)]),
        CaseId::R(16) => (family(Quartic, None)?, vec![y(0, 1), y(1, 0), y(2, 2)]),
        CaseId::R(9) => (family(Cubic, None)?, vec![y(0, 0), y(1, -1), yt(2, 1, -1)]),
        CaseId::R(17) => (family(Cubic, None)?, vec![y(0, -2), y(1, -3), y(2, -1)]),
        CaseId::R(18) => (family(Cubic, None)?, vec![y(0, 0), y(1, -1), y(2, 1)]),
        CaseId::R(10) => {
            let l = |k| of_kind(y(3, k), Kind::LogY);
            (
                family(R10, None)?,
                vec![y(0, -3), y(1, 0), y(2, 3), scaled(l(0), 2.0), scaled(l(-3), -1.0), scaled(l(-6), -1.0)],
            )
        }
        CaseId::Rlv(k @ 2..=6) => {
            let j = |k| of_kind(y(2, k), Kind::InvY);
            let (kind, w, two) = match k {
                2 => (Rlv2, -4, 1.0),
                3 => (Rlv3, 1, 1.0),
                4 => (Rlv4, -5, 1.0),
                5 => (Rlv5, -4, 2.0),
                _ => (Rlv6, -2, 2.0),
            };
            // x^w (mu1 y + mu2 y / x + mu3 (x - 1) / y); in s = sqrt(x) the
            // weights step by two and the (x - 1) factor becomes s^2 - 1
            let terms = if k <= 4 {
                vec![y(0, w), y(1, w - 1), j(w + 1), scaled(j(w), -1.0)]
            } else {
                vec![
                    scaled(y(0, w), two),
                    scaled(y(1, w - 2), two),
                    scaled(j(w + 2), two),
                    scaled(j(w), -two),
                ]
            };
            (family(kind, None)?, terms)
        }
        CaseId::Lv(_) | CaseId::C4 => return Err(unsupported(case, "use the region integral")),
        _ => return Err(unsupported(case, "not a case with a tabulated hyperelliptic form")),
    };
    let n_mu = if terms.iter().any(|t| t.mu_index == 3) { 4 } else { 3 };
    Ok(CaseFormula { case, family: fam, terms, n_mu })
}

pub fn annulus_interval(case: CaseId, b: Option<&Rational>) -> Result<AnnulusInterval, IntegralError> {
    Ok(formula(case, b)?.family.annulus)
}

pub fn oval(case: CaseId, b: Option<&Rational>, t: f64, opts: &MomentOptions) -> Result<Oval, IntegralError> {
    formula(case, b)?.family.oval(t, opts)
}

pub fn moment_i(case: CaseId, b: Option<&Rational>, t: f64, k: i32, opts: &MomentOptions) -> Result<Moment, IntegralError> {
    formula(case, b)?.family.moment(t, Kind::Y, k, opts)
}

pub fn moment_j(case: CaseId, b: Option<&Rational>, t: f64, k: i32, opts: &MomentOptions) -> Result<Moment, IntegralError> {
    formula(case, b)?.family.moment(t, Kind::InvY, k, opts)
}

pub fn moment_log(case: CaseId, b: Option<&Rational>, t: f64, k: i32, opts: &MomentOptions) -> Result<Moment, IntegralError> {
    formula(case, b)?.family.moment(t, Kind::LogY, k, opts)
}

impl CaseFormula {
    pub fn check_mu(&self, mu: &[f64]) -> Result<(), IntegralError> {
        if mu.len() != 3 && mu.len() != 4 {
            return Err(IntegralError::BadWeights(format!("expected 3 or 4 weights, got {}", mu.len())));
        }
        if mu.len() == 4 && self.n_mu == 3 && mu[3] != 0.0 {
            return Err(IntegralError::BadWeights(format!("{} has no log term; mu4 must be absent", self.case)));
        }
        if mu.iter().all(|m| m.is_zero()) {
            return Err(IntegralError::BadWeights("all weights are zero".into()));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(IntegralError::BadWeights("non-finite weight".into()));
        }
        Ok(())
    }

    fn weight(mu: &[f64], i: usize) -> f64 {
        mu.get(i).copied().unwrap_or(0.0)
    }

    /// `I(t)` as a list of `(coefficient, kind, k)` at level `t`.
    pub fn i_combination(&self, mu: &[f64], t: f64) -> Vec<(f64, Kind, i32)> {
        self.terms
            .iter()
            .map(|tm| (Self::weight(mu, tm.mu_index) * tm.coef * t.powi(tm.tpow), tm.kind, tm.k))
            .filter(|c| c.0 != 0.0)
            .collect()
    }

    /// `I'(t)`: product rule on `t^p` and `d/dt M_k = sum_j b_j M'_{k+j}`.
    pub fn j_combination(&self, mu: &[f64], t: f64) -> Result<Vec<(f64, Kind, i32)>, IntegralError> {
        let dt = self.family.dt_terms();
        let mut out = Vec::new();
        for tm in &self.terms {
            let w = Self::weight(mu, tm.mu_index) * tm.coef;
            if w == 0.0 {
                continue;
            }
            if tm.tpow != 0 {
                out.push((w * tm.tpow as f64 * t.powi(tm.tpow - 1), tm.kind, tm.k));
            }
            let dk = tm.kind.derivative().ok_or_else(|| {
                IntegralError::Unsupported(format!(
                    "{}: the derivative of the dx/y term is not a convergent moment; set mu3 = 0",
                    self.case
                ))
            })?;
            for &(j, bj) in &dt {
                out.push((w * t.powi(tm.tpow) * bj, dk, tm.k + j));
            }
        }
        Ok(out)
    }
}

pub fn generating_i(spec: &GeneratingSpec, t: f64, opts: &MomentOptions) -> Result<Moment, IntegralError> {
    let f = formula(spec.case, spec.b.as_ref())?;
    f.check_mu(&spec.mu)?;
    let oval = f.family.oval(t, opts)?;
    oval.combination(&f.i_combination(&spec.mu, t), &opts.quad)
}

pub fn generating_j(spec: &GeneratingSpec, t: f64, opts: &MomentOptions) -> Result<Moment, IntegralError> {
    let f = formula(spec.case, spec.b.as_ref())?;
    f.check_mu(&spec.mu)?;
    let combo = f.j_combination(&spec.mu, t)?;
    let oval = f.family.oval(t, opts)?;
    oval.combination(&combo, &opts.quad)
}

/// Every case with a hyperelliptic generating function, with a sample `b`
/// where one is needed.
pub fn implemented_cases() -> Vec<(CaseId, Option<Rational>)> {
    let mut v: Vec<(CaseId, Option<Rational>)> = [0u8, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18]
        .iter()
        .map(|&k| (CaseId::R(k), None))
        .collect();
    v.push((CaseId::R(1), Some(rat(4, 1))));
    v.push((CaseId::R(3), Some(rat(-2, 1))));
    v.push((CaseId::R(4), Some(rat(1, 1))));
    v.push((CaseId::R(5), Some(rat(1, 2))));
    v.push((CaseId::R(5), Some(rat(2, 1))));
    v.push((CaseId::R(6), Some(rat(3, 1))));
    for k in 2..=6 {
        v.push((CaseId::Rlv(k), None));
    }
    v
}
