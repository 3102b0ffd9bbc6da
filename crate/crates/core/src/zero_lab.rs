//! Zero counting for generating functions on the annulus interval, seeded
//! sweeps over the weight sphere, and power-law fits of basic moments near
//! the outer boundary.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::case::CaseId;
use crate::integral::catalog::{formula, CaseFormula};
use crate::integral::family::{Kind, MomentOptions};
use crate::integral::IntegralError;
use crate::poly::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error("grid of {0} nodes is too coarse (need at least 256)")]
    GridTooSmall(usize),
    #[error("{skipped} of {total} grid nodes failed to evaluate")]
    TooManySkipped { skipped: usize, total: usize },
    #[error("sweep needs at least 100 samples, got {0}")]
    SweepTooSmall(usize),
    #[error("slope fit needs a finite outer boundary")]
    UnboundedAnnulus,
    #[error("fewer than {0} usable points in the fit window")]
    FitWindow(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    /// The generating function itself; it vanishes at the center level.
    I,
    /// Its derivative in `t`.
    J,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOptions {
    pub grid: usize,
    pub moment: MomentOptions,
    /// Bracket width at which bisection stops.
    pub root_tol: f64,
    /// A sign-preserving local minimum below `double_tol` times the size of
    /// the cancelling terms counts as a double zero.
    pub double_tol: f64,
    pub max_skip_fraction: f64,
    /// Scan length used when the annulus is unbounded above.
    pub unbounded_span: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions {
            grid: 256,
            moment: MomentOptions::default(),
            root_tol: 1e-12,
            double_tol: 1e-9,
            max_skip_fraction: 0.05,
            unbounded_span: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroFlag {
    Simple,
    SuspectedDouble,
    /// `J` vanishes at the center level itself.
    AtCenter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroRecord {
    pub bracket: [f64; 2],
    pub root: f64,
    pub multiplicity: u8,
    pub flag: ZeroFlag,
    /// Second derivative of the quadratic through the minimum, for doubles.
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub case: CaseId,
    pub b: Option<String>,
    pub which: Which,
    pub mu: Vec<f64>,
    pub interval: [f64; 2],
    pub grid: usize,
    pub zeros: Vec<ZeroRecord>,
    /// Zeros counted with multiplicity, center excluded for `I`.
    pub count: usize,
    /// `I` vanishes at the center level by construction.
    pub forced_center_zero: bool,
    pub skipped_nodes: Vec<f64>,
    /// Largest `|value|` over the grid.
    pub scale: f64,
    /// Smallest `|value|` at grid nodes strictly between consecutive roots.
    pub min_abs_between: Vec<f64>,
}

impl ZeroReport {
    pub fn roots(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.root).collect()
    }

    pub fn all_simple(&self) -> bool {
        self.zeros.iter().all(|z| z.flag == ZeroFlag::Simple)
    }
}

/// Unit vector with its first nonzero entry positive; `mu` and `c mu` have
/// the same zeros.
pub fn canonical_mu(mu: &[f64]) -> Vec<f64> {
    let n = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
    if n == 0.0 {
        return mu.to_vec();
    }
    let s = match mu.iter().find(|m| **m != 0.0) {
        Some(m) if *m < 0.0 => -1.0 / n,
        _ => 1.0 / n,
    };
    mu.iter().map(|m| m * s + 0.0).collect()
}

/// Scan nodes on `(lo, hi)`: Chebyshev-distributed, plus geometric
/// sequences toward each end down to distance `dmin`.
fn scan_nodes(lo: f64, hi: f64, n: usize, dmin: f64) -> Vec<f64> {
    let w = hi - lo;
    let mut v: Vec<f64> = (0..n)
        .map(|i| lo + 0.5 * w * (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos()))
        .collect();
    let mut d = 1e-2 * w;
    while d > dmin {
        v.push(lo + d);
        v.push(hi - d);
        d /= 10f64.sqrt();
    }
    v.push(lo + dmin);
    v.push(hi - dmin);
    v.retain(|t| *t >= lo + dmin && *t <= hi - dmin);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + a.abs()));
    v
}

/// Evaluates one generating function family (all weight directions at
/// once) on a fixed grid, so that many weight vectors can be scanned
/// without repeating the quadrature.
#[derive(Debug, Clone)]
pub struct Scanner {
    case: CaseId,
    b: Option<Rational>,
    formula: CaseFormula,
    which: Which,
    opts: ZeroOptions,
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    /// Per node, the value for each unit weight vector.
    table: Vec<Vec<f64>>,
    skipped: Vec<f64>,
    /// `J` at the center level, per unit weight vector.
    center: Option<Vec<f64>>,
}

impl Scanner {
    pub fn new(case: CaseId, b: Option<&Rational>, which: Which, opts: &ZeroOptions) -> Result<Scanner, ZeroError> {
        if opts.grid < 256 {
            return Err(ZeroError::GridTooSmall(opts.grid));
        }
        let formula = formula(case, b)?;
        let ann = formula.family.annulus;
        let lo = ann.t_c;
        let hi = if ann.t_s.is_finite() { ann.t_s } else { lo + opts.unbounded_span * lo.abs().max(1.0) };
        let dmin = (2.0 * opts.moment.margin).max(1e-7 * (hi - lo));
        let units: Vec<Vec<f64>> = (0..formula.n_mu)
            .map(|i| (0..formula.n_mu).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        if which == Which::J {
            for u in &units {
                formula.j_combination(u, 0.5 * (lo + hi))?;
            }
        }
        let mut s = Scanner {
            case,
            b: b.cloned(),
            formula,
            which,
            opts: opts.clone(),
            lo,
            hi,
            nodes: vec![],
            table: vec![],
            skipped: vec![],
            center: None,
        };
        let cand = scan_nodes(lo, hi, opts.grid, dmin);
        let evals: Vec<(f64, Result<Vec<f64>, IntegralError>)> =
            cand.par_iter().map(|&t| (t, s.eval_units(&units, t, &opts.moment))).collect();
        let total = evals.len();
        for (t, r) in evals {
            match r {
                Ok(v) => {
                    s.nodes.push(t);
                    s.table.push(v);
                }
                Err(_) => s.skipped.push(t),
            }
        }
        if s.skipped.len() as f64 > opts.max_skip_fraction * total as f64 {
            return Err(ZeroError::TooManySkipped { skipped: s.skipped.len(), total });
        }
        if which == Which::J {
            // J is analytic at the center level: extrapolate from three levels
            let h = 1e-3 * (hi - lo);
            let near = [h, 2.0 * h, 4.0 * h]
                .iter()
                .map(|d| s.eval_units(&units, lo + d, &opts.moment))
                .collect::<Result<Vec<_>, _>>()?;
            let c = (0..units.len())
                .map(|i| 8.0 / 3.0 * near[0][i] - 2.0 * near[1][i] + near[2][i] / 3.0)
                .collect();
            s.center = Some(c);
        }
        Ok(s)
    }

    fn eval_units(&self, units: &[Vec<f64>], t: f64, mo: &MomentOptions) -> Result<Vec<f64>, IntegralError> {
        let oval = self.formula.family.oval(t, mo)?;
        units
            .iter()
            .map(|u| {
                let combo = match self.which {
                    Which::I => self.formula.i_combination(u, t),
                    Which::J => self.formula.j_combination(u, t)?,
                };
                oval.combination(&combo, &mo.quad).map(|m| m.value)
            })
            .collect()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Grid values for `mu`.
    pub fn values(&self, mu: &[f64]) -> Vec<f64> {
        self.table.iter().map(|row| dot(row, mu)).collect()
    }

    /// Direct evaluation off the grid.
    pub fn eval(&self, mu: &[f64], t: f64) -> Result<f64, IntegralError> {
        let mut mo = self.opts.moment.clone();
        mo.allow_near_degenerate = true;
        let oval = self.formula.family.oval(t, &mo)?;
        let combo = match self.which {
            Which::I => self.formula.i_combination(mu, t),
            Which::J => self.formula.j_combination(mu, t)?,
        };
        Ok(oval.combination(&combo, &mo.quad)?.value)
    }

    /// Illinois-modified regula falsi on a sign-change bracket.
    fn bisect(&self, mu: &[f64], a: f64, fa: f64, b: f64) -> Result<f64, IntegralError> {
        let (mut a, mut fa, mut b) = (a, fa, b);
        let mut fb = self.eval(mu, b)?;
        if fb == 0.0 {
            return Ok(b);
        }
        let tol = self.opts.root_tol * (1.0 + a.abs().max(b.abs()));
        let mut side = 0i8;
        for _ in 0..200 {
            if (b - a).abs() <= tol {
                break;
            }
            let mut c = (a * fb - b * fa) / (fb - fa);
            if !(c > a.min(b) && c < a.max(b)) {
                c = 0.5 * (a + b);
            }
            // keep the step off the ends so the bracket keeps shrinking
            let w = (b - a).abs();
            if (c - a).abs() < 0.25 * tol || (b - c).abs() < 0.25 * tol {
                c = if (c - a).abs() < (b - c).abs() { a + 0.5 * tol.min(w) } else { b - 0.5 * tol.min(w) };
            }
            let fc = self.eval(mu, c)?;
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

    pub fn report(&self, mu: &[f64]) -> Result<ZeroReport, ZeroError> {
        self.formula.check_mu(mu)?;
        let mut ts = self.nodes.clone();
        let mut vs = self.values(mu);
        let mut zeros = Vec::new();
        if let Some(c) = &self.center {
            let v0 = dot(c, mu);
            if v0.abs() <= self.opts.double_tol * mass(c, mu) {
                zeros.push(ZeroRecord {
                    bracket: [self.lo, self.lo],
                    root: self.lo,
                    multiplicity: 1,
                    flag: ZeroFlag::AtCenter,
                    curvature: None,
                });
            } else {
                ts.insert(0, self.lo);
                vs.insert(0, v0);
            }
        }
        let scale = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = ts.len();
        let mut i = 0;
        while i + 1 < n {
            let (a, b, fa, fb) = (ts[i], ts[i + 1], vs[i], vs[i + 1]);
            if fa == 0.0 {
                zeros.push(simple([a, a], a));
            } else if fa * fb < 0.0 {
                let r = self.bisect(mu, a, fa, b)?;
                zeros.push(simple([a, b], r));
            } else if i > 0 && is_dip(vs[i - 1], fa, fb) {
                let local = self.term_mass(mu, a);
                if fa.abs() < 1e-3 * local {
                    self.probe_dip(mu, (ts[i - 1], vs[i - 1]), (a, fa), (b, fb), local, &mut zeros)?;
                }
            }
            i += 1;
        }
        zeros.sort_by(|x, y| x.root.partial_cmp(&y.root).unwrap());
        let count = zeros.iter().map(|z| z.multiplicity as usize).sum();
        let roots: Vec<f64> = zeros.iter().map(|z| z.root).collect();
        let min_abs_between = roots
            .windows(2)
            .map(|w| {
                ts.iter()
                    .zip(&vs)
                    .filter(|(t, _)| **t > w[0] && **t < w[1])
                    .fold(f64::INFINITY, |m, (_, v)| m.min(v.abs()))
            })
            .collect();
        Ok(ZeroReport {
            case: self.case,
            b: self.b.as_ref().map(|b| b.to_string()),
            which: self.which,
            mu: mu.to_vec(),
            interval: [self.lo, self.hi],
            grid: self.opts.grid,
            zeros,
            count,
            forced_center_zero: self.which == Which::I,
            skipped_nodes: self.skipped.clone(),
            scale,
            min_abs_between,
        })
    }

    /// `sum |mu_i u_i(t)|` at grid node `t`: the size of the terms whose
    /// cancellation produces a zero.
    fn term_mass(&self, mu: &[f64], t: f64) -> f64 {
        match self.nodes.iter().position(|x| *x == t) {
            Some(i) => mass(&self.table[i], mu),
            None => self.center.as_ref().map(|c| mass(c, mu)).unwrap_or(0.0),
        }
    }

    /// Golden-section search of `|f|` around a sign-preserving dip. A sign
    /// change found on the way means two nearby simple zeros.
    fn probe_dip(
        &self,
        mu: &[f64],
        l: (f64, f64),
        c: (f64, f64),
        r: (f64, f64),
        scale: f64,
        out: &mut Vec<ZeroRecord>,
    ) -> Result<(), IntegralError> {
        let sgn = c.1.signum();
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (l.0, r.0);
        let mut best = c;
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.eval(mu, x1)?;
        let mut f2 = self.eval(mu, x2)?;
        for _ in 0..60 {
            for (x, f) in [(x1, f1), (x2, f2)] {
                if f.signum() != sgn && f != 0.0 {
                    let r1 = self.bisect(mu, l.0, l.1, x)?;
                    let r2 = self.bisect(mu, x, f, r.0)?;
                    out.push(simple([l.0, x], r1));
                    out.push(simple([x, r.0], r2));
                    return Ok(());
                }
                if f.abs() < best.1.abs() {
                    best = (x, f);
                }
            }
            if b - a < self.opts.root_tol * (1.0 + a.abs()) {
                break;
            }
            if f1.abs() < f2.abs() {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.eval(mu, x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.eval(mu, x2)?;
            }
        }
        if best.1.abs() < self.opts.double_tol * scale {
            let h = (r.0 - l.0) * 1e-3;
            let fm = self.eval(mu, best.0 - h)?;
            let fp = self.eval(mu, best.0 + h)?;
            out.push(ZeroRecord {
                bracket: [l.0, r.0],
                root: best.0,
                multiplicity: 2,
                flag: ZeroFlag::SuspectedDouble,
                curvature: Some((fp - 2.0 * best.1 + fm) / (h * h)),
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], mu: &[f64]) -> f64 {
    a.iter().zip(mu).map(|(x, m)| x * m).sum()
}

fn mass(a: &[f64], mu: &[f64]) -> f64 {
    a.iter().zip(mu).map(|(x, m)| (x * m).abs()).sum()
}

fn simple(bracket: [f64; 2], root: f64) -> ZeroRecord {
    ZeroRecord { bracket, root, multiplicity: 1, flag: ZeroFlag::Simple, curvature: None }
}

fn is_dip(prev: f64, cur: f64, next: f64) -> bool {
    prev * cur > 0.0 && cur * next > 0.0 && cur.abs() <= prev.abs() && cur.abs() <= next.abs()
}

pub fn count_zeros(
    case: CaseId,
    b: Option<&Rational>,
    mu: &[f64],
    which: Which,
    opts: &ZeroOptions,
) -> Result<ZeroReport, ZeroError> {
    Scanner::new(case, b, which, opts)?.report(mu)
}

/// A weight vector whose generating function vanishes at two prescribed
/// levels: the cross product of the unit-weight values there.
pub fn witness_through(
    case: CaseId,
    b: Option<&Rational>,
    which: Which,
    levels: [f64; 2],
    opts: &MomentOptions,
) -> Result<Vec<f64>, ZeroError> {
    let f = formula(case, b)?;
    if f.n_mu != 3 {
        return Err(IntegralError::BadWeights(format!("{case} has {} weights; a two-level witness needs 3", f.n_mu)).into());
    }
    let units = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut rows = [[0.0; 3]; 2];
    for (r, &t) in rows.iter_mut().zip(&levels) {
        let oval = f.family.oval(t, opts)?;
        for (j, u) in units.iter().enumerate() {
            let combo = match which {
                Which::I => f.i_combination(u, t),
                Which::J => f.j_combination(u, t)?,
            };
            r[j] = oval.combination(&combo, &opts.quad)?.value;
        }
    }
    let [u, v] = rows;
    Ok(canonical_mu(&[u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]))
}

/// Weight vector of sweep item `index`: a normalized Gaussian vector from
/// a generator seeded with `seed ^ index`, in canonical form.
pub fn sample_mu(seed: u64, index: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if v.iter().any(|x: &f64| x.abs() > 1e-12) {
            return canonical_mu(&v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub index: usize,
    pub mu: Vec<f64>,
    pub j_report: ZeroReport,
    pub i_report: ZeroReport,
    /// Smallest gap between the zeros of `I` and the interval ends, relative
    /// to the interval width.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub case: CaseId,
    pub b: Option<String>,
    pub seed: u64,
    pub n: usize,
    pub grid: usize,
    /// Largest zero count of `J`.
    pub max_count: usize,
    pub argmax_mu: Vec<f64>,
    /// Zero count of `J` -> number of samples.
    pub histogram: BTreeMap<usize, usize>,
    /// Interior zero count of `I` -> number of samples.
    pub i_histogram: BTreeMap<usize, usize>,
    /// A weight vector where `J` has two simple zeros, preferring one where
    /// `I` also has two interior zeros, as far apart as possible.
    pub witness: Option<Witness>,
    /// Set when no two-zero witness turned up.
    pub open_flag: Option<String>,
    pub suspected_doubles: usize,
}

pub fn sweep_mu(case: CaseId, b: Option<&Rational>, n: usize, seed: u64, opts: &ZeroOptions) -> Result<SweepSummary, ZeroError> {
    if n < 100 {
        return Err(ZeroError::SweepTooSmall(n));
    }
    let sj = Scanner::new(case, b, Which::J, opts)?;
    let si = Scanner::new(case, b, Which::I, opts)?;
    let dim = sj.formula.n_mu;
    let items: Vec<(usize, ZeroReport, ZeroReport)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mu = sample_mu(seed, i as u64, dim);
            Ok((i, sj.report(&mu)?, si.report(&mu)?))
        })
        .collect::<Result<_, ZeroError>>()?;

    let mut histogram = BTreeMap::new();
    let mut i_histogram = BTreeMap::new();
    let mut max_count = 0;
    let mut argmax_mu = vec![];
    let mut witness: Option<Witness> = None;
    let mut suspected_doubles = 0;
    let (lo, hi) = si.interval();
    for (i, rj, ri) in &items {
        *histogram.entry(rj.count).or_insert(0) += 1;
        *i_histogram.entry(ri.count).or_insert(0) += 1;
        suspected_doubles += rj.zeros.iter().filter(|z| z.flag == ZeroFlag::SuspectedDouble).count();
        if rj.count > max_count || argmax_mu.is_empty() {
            max_count = rj.count;
            argmax_mu = rj.mu.clone();
        }
        if rj.count == 2 && rj.all_simple() {
            let separation = if ri.count == 2 && ri.all_simple() {
                let mut pts = vec![lo];
                pts.extend(ri.roots());
                pts.push(hi);
                pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min) / (hi - lo)
            } else {
                0.0
            };
            let better = match &witness {
                None => true,
                Some(w) => separation > w.separation,
            };
            if better {
                witness = Some(Witness { index: *i, mu: rj.mu.clone(), j_report: rj.clone(), i_report: ri.clone(), separation });
            }
        }
    }
    let open_flag = witness.is_none().then(|| format!("no weight vector with two simple zeros among {n} samples"));
    Ok(SweepSummary {
        case,
        b: b.map(|b| b.to_string()),
        seed,
        n,
        grid: opts.grid,
        max_count,
        argmax_mu,
        histogram,
        i_histogram,
        witness,
        open_flag,
        suspected_doubles,
    })
}

/// Expected behavior of `J_k` as the level approaches the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Law {
    /// `|J_k| ~ dist^p`
    Power(f64),
    /// `J_k ~ c log(dist)`
    Log,
    /// `J_k` tends to a finite limit.
    Bounded(Option<f64>),
}

/// `2 (3/2)^k B(k, 1/2)`: the value of `J_k`, `k >= 1`, on the homoclinic
/// loop of the cubic family.
pub fn cubic_loop_limit(k: i32) -> f64 {
    assert!(k >= 1);
    let mut beta = 2.0;
    for j in 1..k {
        beta *= j as f64 / (j as f64 + 0.5);
    }
    2.0 * 1.5f64.powi(k) * beta
}

pub fn predicted_law(case: CaseId, k: i32) -> Option<Law> {
    match case {
        CaseId::R(18) => Some(match k {
            ..=-1 => Law::Power(-0.5),
            0 => Law::Log,
            _ => Law::Bounded(Some(cubic_loop_limit(k))),
        }),
        CaseId::R(11) => Some(Law::Power(-(k as f64 / 2.0 + 0.25))),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub case: CaseId,
    pub k: i32,
    /// Distances to the outer boundary.
    pub window: [f64; 2],
    /// `(distance, J_k)`
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub law: Option<Law>,
    /// `J_k` at the smallest distance.
    pub limit_estimate: f64,
    /// Spread of `J_k / ln(dist)` over the smallest decade, relative to its mean.
    pub log_ratio_spread: f64,
    pub dropped: Vec<f64>,
}

pub fn slope_fit(
    case: CaseId,
    b: Option<&Rational>,
    k: i32,
    window: (f64, f64),
    points: usize,
    opts: &MomentOptions,
) -> Result<SlopeFit, ZeroError> {
    let f = formula(case, b)?;
    let ts = f.family.annulus.t_s;
    if !ts.is_finite() {
        return Err(ZeroError::UnboundedAnnulus);
    }
    let (d0, d1) = window;
    let mut pts = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..points {
        let d = d0 * (d1 / d0).powf(i as f64 / (points - 1) as f64);
        match f.family.moment(ts - d, Kind::InvY, k, opts) {
            Ok(m) => pts.push((d, m.value)),
            Err(_) => dropped.push(d),
        }
    }
    if pts.len() < 3 {
        return Err(ZeroError::FitWindow(3));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    let dmin = pts[0].0;
    let ratios: Vec<f64> = pts.iter().filter(|p| p.0 <= 10.0 * dmin * (1.0 + 1e-12)).map(|p| p.1 / p.0.ln()).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().fold(f64::NEG_INFINITY, |m, r| m.max(*r)) - ratios.iter().fold(f64::INFINITY, |m, r| m.min(*r));
    Ok(SlopeFit {
        case,
        k,
        window: [d0, d1],
        limit_estimate: pts[0].1,
        points: pts,
        slope,
        intercept,
        residual,
        law: predicted_law(case, k),
        log_ratio_spread: spread / mean.abs(),
        dropped,
    })
}

/// Slope, intercept and rms residual of the line through `(xs, ys)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const R18: CaseId = CaseId::R(18);

    #[test]
    fn j0_has_no_zeros() {
        let r = count_zeros(R18, None, &[1.0, 0.0, 0.0], Which::J, &ZeroOptions::default()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.skipped_nodes.is_empty());
    }

    #[test]
    fn zeros_do_not_depend_on_scale() {
        let s = Scanner::new(R18, None, Which::J, &ZeroOptions::default()).unwrap();
        let mu = [0.3, -0.05, -0.4];
        let base = s.report(&mu).unwrap();
        for c in [3.7, -3.7] {
            let m: Vec<f64> = mu.iter().map(|x| c * x).collect();
            let r = s.report(&m).unwrap();
            assert_eq!(r.count, base.count);
            for (a, b) in r.roots().iter().zip(base.roots()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_level_witness() {
        let o = ZeroOptions::default();
        let mu = witness_through(R18, None, Which::I, [-0.12, -0.05], &o.moment).unwrap();
        let r = count_zeros(R18, None, &mu, Which::I, &o).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.roots()[0] + 0.12).abs() < 1e-9 && (r.roots()[1] + 0.05).abs() < 1e-9);
        // Rolle: J has a zero in each gap between -1/6, -0.12 and -0.05
        let j = count_zeros(R18, None, &mu, Which::J, &o).unwrap();
        assert_eq!(j.count, 2);
        assert!(j.roots()[0] < -0.12 && j.roots()[1] > -0.12 && j.roots()[1] < -0.05);
    }

    #[test]
    fn canonical_form() {
        let c = canonical_mu(&[0.0, -3.0, 4.0]);
        assert_eq!(c[0].to_bits(), 0.0f64.to_bits());
        assert!((c[1] - 0.6).abs() < 1e-15 && (c[2] + 0.8).abs() < 1e-15);
        assert_eq!(sample_mu(42, 7, 3), sample_mu(42, 7, 3));
        assert_ne!(sample_mu(42, 7, 3), sample_mu(42, 8, 3));
    }

    #[test]
    fn grid_floor() {
        let o = ZeroOptions { grid: 100, ..Default::default() };
        assert_eq!(count_zeros(R18, None, &[1.0, 0.0, 0.0], Which::J, &o), Err(ZeroError::GridTooSmall(100)));
    }

    #[test]
    fn nodes_cluster_at_both_ends() {
        let v = scan_nodes(-1.0 / 6.0, 0.0, 256, 2e-6);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v[0] - (-1.0 / 6.0) < 3e-6);
        assert!(-v[v.len() - 1] < 3e-6);
    }

    #[test]
    fn limits_of_the_cubic_loop() {
        assert!((cubic_loop_limit(1) - 6.0).abs() < 1e-15);
        assert!((cubic_loop_limit(2) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_exact_line() {
        let (s, c, r) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15 && r < 1e-15);
    }
}
