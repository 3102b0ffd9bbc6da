//! Direct simulation of the perturbed cubic Hamiltonian flow
//!
//! `x' = y`, `y' = x - x^2 + eps (mu1 + mu2/x + mu3 x) y`
//!
//! whose energy `H = y^2/2 - x^2/2 + x^3/3` changes over one loop by
//! `eps * I(t) + O(eps^2)`, with `I` the generating function of r18.
//! Limit cycles of the simulation are compared with the zeros of `I`.

pub mod dopri;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::case::CaseId;
use crate::integral::catalog::{generating_i, GeneratingSpec};
use crate::integral::family::{Family, FamilyKind, Kind, MomentOptions};
use crate::integral::IntegralError;
use crate::zero_lab::{count_zeros, Which, ZeroError, ZeroOptions};
use dopri::{StepError, Tolerances};

pub const T_CENTER: f64 = -1.0 / 6.0;
pub const T_LOOP: f64 = 0.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("epsilon = {0} is outside [0, 1e-2]")]
    BadEpsilon(f64),
    #[error("trajectory left the domain at time {time} (state {state:?})")]
    Escape { time: f64, state: [f64; 2], tail: Vec<[f64; 2]> },
    #[error("no return to the section within {limit} time units from level {t}")]
    NoReturn { t: f64, limit: f64 },
    #[error("integrator failed: {0:?}")]
    Integrator(StepError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
}

pub fn energy(s: &[f64; 2]) -> f64 {
    let (x, y) = (s[0], s[1]);
    0.5 * y * y - 0.5 * x * x + x * x * x / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbedField {
    pub mu: [f64; 3],
    pub epsilon: f64,
}

impl PerturbedField {
    pub fn new(mu: [f64; 3], epsilon: f64) -> Result<Self, OdeError> {
        if !(0.0..=1e-2).contains(&epsilon) {
            return Err(OdeError::BadEpsilon(epsilon));
        }
        Ok(PerturbedField { mu, epsilon })
    }

    pub fn rhs(&self, s: &[f64; 2]) -> [f64; 2] {
        let (x, y) = (s[0], s[1]);
        let g = (self.mu[0] + self.mu[1] / x + self.mu[2] * x) * y;
        [y, x - x * x + self.epsilon * g]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: Tolerances,
    /// Trajectories with `x` below this are stopped (the field has `1/x`).
    pub barrier: f64,
    pub escape_radius: f64,
    /// Return search gives up after this many unperturbed periods.
    pub period_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: Tolerances::default(), barrier: 1e-3, escape_radius: 1e3, period_factor: 10.0 }
    }
}

const TAIL: usize = 16;

fn escaped(s: &[f64; 2], o: &FlowOptions) -> bool {
    s[0] <= o.barrier || s[0].hypot(s[1]) > o.escape_radius || !s[0].is_finite() || !s[1].is_finite()
}

/// State after `time`.
pub fn flow(field: &PerturbedField, state: [f64; 2], time: f64, opts: &FlowOptions) -> Result<[f64; 2], OdeError> {
    let mut tail: Vec<[f64; 2]> = Vec::new();
    let mut bad: Option<(f64, [f64; 2])> = None;
    let end = dopri::integrate(|_, s| field.rhs(s), 0.0, state, time, &opts.tol, |st| {
        push_tail(&mut tail, st.y1);
        if escaped(&st.y1, opts) {
            bad = Some((st.t1(), st.y1));
            return false;
        }
        true
    })
    .map_err(OdeError::Integrator)?;
    match bad {
        Some((time, state)) => Err(OdeError::Escape { time, state, tail }),
        None => Ok(end),
    }
}

fn push_tail(tail: &mut Vec<[f64; 2]>, s: [f64; 2]) {
    if tail.len() == TAIL {
        tail.remove(0);
    }
    tail.push(s);
}

/// Section point on `y = 0`, `x > 1`, of the unperturbed loop at level `t`.
pub fn section_point(t: f64) -> Result<f64, OdeError> {
    let f = Family::new(FamilyKind::Cubic, None)?;
    Ok(f.oval(t, &MomentOptions::permissive())?.x_hi)
}

/// Period of the unperturbed loop at level `t`.
pub fn period(t: f64) -> Result<f64, OdeError> {
    let f = Family::new(FamilyKind::Cubic, None)?;
    Ok(f.moment(t, Kind::InvY, 0, &MomentOptions::permissive())?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstReturn {
    pub t: f64,
    pub x_start: f64,
    pub state: [f64; 2],
    pub time: f64,
    /// `H(return) - H(start)`
    pub displacement: f64,
}

/// Follows the loop through level `t` once, from the section back to it,
/// crossing downward.
pub fn first_return(field: &PerturbedField, t: f64, opts: &FlowOptions) -> Result<FirstReturn, OdeError> {
    let x0 = section_point(t)?;
    let limit = opts.period_factor * period(t)?;
    let start = [x0, 0.0];
    let h0 = energy(&start);
    let mut tail = Vec::new();
    let mut bad = None;
    let mut hit: Option<(f64, [f64; 2])> = None;
    dopri::integrate(|_, s| field.rhs(s), 0.0, start, limit, &opts.tol, |st| {
        push_tail(&mut tail, st.y1);
        if escaped(&st.y1, opts) {
            bad = Some((st.t1(), st.y1));
            return false;
        }
        if st.y0[1] > 0.0 && st.y1[1] <= 0.0 && st.y1[0] > 1.0 {
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if st.at(m)[1] > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            hit = Some((st.t0 + b * st.h, st.at(b)));
            return false;
        }
        true
    })
    .map_err(OdeError::Integrator)?;
    if let Some((time, state)) = bad {
        return Err(OdeError::Escape { time, state, tail });
    }
    let (time, state) = hit.ok_or(OdeError::NoReturn { t, limit })?;
    Ok(FirstReturn { t, x_start: x0, state, time, displacement: energy(&state) - h0 })
}

pub fn displacement(field: &PerturbedField, t: f64, opts: &FlowOptions) -> Result<f64, OdeError> {
    Ok(first_return(field, t, opts)?.displacement)
}

/// The generating function of r18 at level `t`.
pub fn melnikov_i(mu: [f64; 3], t: f64) -> Result<f64, OdeError> {
    let spec = GeneratingSpec::new(CaseId::R(18), None, mu.to_vec());
    Ok(generating_i(&spec, t, &MomentOptions::default())?.value)
}

/// `n` levels evenly placed inside the annulus, `edge` (a fraction of its
/// width) away from both ends.
pub fn interior_levels(n: usize, edge: f64) -> Vec<f64> {
    let w = T_LOOP - T_CENTER;
    let (lo, hi) = (T_CENTER + edge * w, T_LOOP - edge * w);
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub displacement: f64,
    pub scaled: f64,
    pub melnikov: f64,
    /// `|scaled - sigma * melnikov| / |melnikov|`
    pub rel_diff: f64,
}

pub fn compare(field: &PerturbedField, ts: &[f64], sigma: f64, opts: &FlowOptions) -> Result<Vec<ComparisonRow>, OdeError> {
    ts.par_iter()
        .map(|&t| {
            let d = displacement(field, t, opts)?;
            let i = melnikov_i(field.mu, t)?;
            let scaled = d / field.epsilon;
            Ok(ComparisonRow { t, displacement: d, scaled, melnikov: i, rel_diff: (scaled - sigma * i).abs() / i.abs() })
        })
        .collect()
}

/// The sign relating displacement to `eps * I`, read off where `|I|` is
/// largest on `ts`.
pub fn calibrate_sigma(field: &PerturbedField, ts: &[f64], opts: &FlowOptions) -> Result<f64, OdeError> {
    let mut best = (0.0, ts[0]);
    for &t in ts {
        let i = melnikov_i(field.mu, t)?;
        if i.abs() > best.0 {
            best = (i.abs(), t);
        }
    }
    let i = melnikov_i(field.mu, best.1)?;
    let d = displacement(field, best.1, opts)?;
    Ok(if d * i * field.epsilon >= 0.0 { 1.0 } else { -1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Attracting,
    Repelling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCycleFinding {
    pub t_star: f64,
    pub stability: Stability,
    /// `|displacement| / eps` at `t_star`.
    pub residual: f64,
    pub nearest_i_zero: Option<f64>,
}

impl LimitCycleFinding {
    pub fn gap(&self) -> Option<f64> {
        self.nearest_i_zero.map(|z| (z - self.t_star).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSearch {
    pub flow: FlowOptions,
    pub grid: usize,
    pub edge: f64,
    pub t_tol: f64,
}

impl Default for CycleSearch {
    fn default() -> Self {
        CycleSearch { flow: FlowOptions::default(), grid: 48, edge: 0.01, t_tol: 1e-10 }
    }
}

/// Zeros of the displacement over the annulus, each paired with the
/// nearest zero of `I`.
pub fn locate_limit_cycles(field: &PerturbedField, search: &CycleSearch) -> Result<Vec<LimitCycleFinding>, OdeError> {
    let ts = interior_levels(search.grid, search.edge);
    let ds: Vec<f64> = ts
        .par_iter()
        .map(|&t| displacement(field, t, &search.flow))
        .collect::<Result<_, _>>()?;
    let izeros = count_zeros(CaseId::R(18), None, &field.mu, Which::I, &ZeroOptions::default())?.roots();
    let mut out = Vec::new();
    for i in 0..ts.len() - 1 {
        if ds[i] == 0.0 || ds[i] * ds[i + 1] < 0.0 {
            let t_star = refine(field, ts[i], ds[i], ts[i + 1], ds[i + 1], search)?;
            // energy grows outward, so a cycle is attracting when the
            // displacement falls through zero
            let stability = if ds[i + 1] < ds[i] { Stability::Attracting } else { Stability::Repelling };
            let residual = displacement(field, t_star, &search.flow)?.abs() / field.epsilon.max(f64::MIN_POSITIVE);
            let nearest_i_zero = izeros.iter().copied().min_by(|a, b| (a - t_star).abs().partial_cmp(&(b - t_star).abs()).unwrap());
            out.push(LimitCycleFinding { t_star, stability, residual, nearest_i_zero });
        }
    }
    Ok(out)
}

fn refine(field: &PerturbedField, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, s: &CycleSearch) -> Result<f64, OdeError> {
    if fa == 0.0 {
        return Ok(a);
    }
    let mut side = 0i8;
    for _ in 0..100 {
        if (b - a).abs() <= s.t_tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = displacement(field, c, &s.flow)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    pub epsilons: Vec<f64>,
    /// `max_t |displacement / eps - sigma I(t)|`
    pub max_err: Vec<f64>,
    /// `log(err_i / err_{i+1}) / log(eps_i / eps_{i+1})`
    pub orders: Vec<f64>,
}

pub fn order_study(mu: [f64; 3], epsilons: &[f64], ts: &[f64], sigma: f64, opts: &FlowOptions) -> Result<OrderStudy, OdeError> {
    let mut max_err = Vec::new();
    for &e in epsilons {
        let f = PerturbedField::new(mu, e)?;
        let rows = compare(&f, ts, sigma, opts)?;
        max_err.push(rows.iter().map(|r| (r.scaled - sigma * r.melnikov).abs()).fold(0.0, f64::max));
    }
    let orders = max_err
        .windows(2)
        .zip(epsilons.windows(2))
        .map(|(e, p)| (e[0] / e[1]).ln() / (p[0] / p[1]).ln())
        .collect();
    Ok(OrderStudy { epsilons: epsilons.to_vec(), max_err, orders })
}
