//! One function per subcommand: settings in, result and checks out.

use anyhow::{anyhow, bail, Context, Result};
use melnikov::case::CaseId;
use melnikov::classifier::lotka_volterra::{classify_lv_exact, GaussRat};
use melnikov::classifier::reversible::{classify_record, parse_rational, ReversibleParams};
use melnikov::integral::catalog::{formula, moment_i, moment_j};
use melnikov::integral::region::region_quad;
use melnikov::integral::{
    c4_generating_i, generating_i, generating_j, lv_generating_i, C4Spec, GeneratingSpec, LVRegionSpec, MomentOptions,
    QuadOptions,
};
use melnikov::monodromy::{check_identities, matrices, Fibration};
use melnikov::ode::dopri::Tolerances;
use melnikov::ode::{
    calibrate_sigma, compare, interior_levels, locate_limit_cycles, order_study, CycleSearch, FlowOptions,
    PerturbedField,
};
use melnikov::picard_fuchs::{family_basis, family_derivative_relations, family_relation_at, pf_dimension, relation_residual};
use melnikov::poly::Rational;
use melnikov::zero_lab::{count_zeros, predicted_law, slope_fit, sweep_mu, witness_through, Law, Which, ZeroOptions};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::report::{Check, Outcome};

pub fn moment_options(s: &Settings) -> MomentOptions {
    MomentOptions {
        quad: QuadOptions { abs_tol: s.tol("quad_abs"), rel_tol: s.tol("quad_rel"), ..QuadOptions::default() },
        margin: s.tol("margin"),
        ..MomentOptions::default()
    }
}

fn zero_options(s: &Settings) -> Result<ZeroOptions> {
    Ok(ZeroOptions {
        grid: s.usize("grid")?,
        moment: moment_options(s),
        root_tol: s.tol("root"),
        double_tol: s.tol("double"),
        ..ZeroOptions::default()
    })
}

fn flow_options(s: &Settings) -> FlowOptions {
    FlowOptions {
        tol: Tolerances { rtol: s.tol("ode_rtol"), atol: s.tol("ode_atol"), ..Tolerances::default() },
        ..FlowOptions::default()
    }
}

fn case_arg(s: &Settings) -> Result<CaseId> {
    Ok(s.require("case")?.parse::<CaseId>()?)
}

fn rational(s: &str, what: &str) -> Result<Rational> {
    parse_rational(s).ok_or_else(|| anyhow!("malformed rational for {what}: '{s}'"))
}

fn b_arg(s: &Settings) -> Result<Option<Rational>> {
    s.get("b").map(|v| rational(v, "--b")).transpose()
}

fn mu3(mu: &[f64]) -> Result<[f64; 3]> {
    mu.try_into().map_err(|_| anyhow!("this command takes exactly 3 weights, got {}", mu.len()))
}

/// `re+im i` with exact rational parts: `1/2-3i`, `-2`, `i`, `0+0i`.
pub fn parse_gauss(s: &str) -> Result<GaussRat> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || anyhow!("malformed complex rational '{s}'");
    let Some(body) = t.strip_suffix('i') else {
        return Ok(GaussRat::new(rational(&t, s)?, Rational::from_integer(0.into())));
    };
    let split = body.rfind(['+', '-']).filter(|&i| i > 0);
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x.strip_prefix('+').unwrap_or(x),
    };
    let re = parse_rational(re).ok_or_else(bad)?;
    let im = parse_rational(im).ok_or_else(bad)?;
    Ok(GaussRat::new(re, im))
}

pub fn classify(s: &Settings) -> Result<Outcome> {
    if s.flag("lv") {
        let a = parse_gauss(s.require("A")?)?;
        let b = parse_gauss(s.require("B")?)?;
        let case = classify_lv_exact(&a, &b);
        // the coordinate swap must map the verdict to its mirror image
        let (sa, sb) = melnikov::classifier::lotka_volterra::swap_params(&a, &b);
        let swapped = classify_lv_exact(&sa, &sb);
        let check = Check::new("swap_symmetry", swapped == case.swapped(), format!("swapped verdict {}", swapped.label()));
        let result = json!({"label": case.label(), "verdict": case, "A": s.require("A")?, "B": s.require("B")?});
        return Ok(Outcome { result, checks: vec![check] });
    }
    let a = rational(s.require("a")?, "--a")?;
    let b = rational(s.require("b")?, "--b")?;
    let (_, rec) = classify_record(&ReversibleParams::new(a, b));
    let check = Check::new("genus_consistent", rec.consistent, rec.condition.clone());
    Ok(Outcome { result: serde_json::to_value(&rec)?, checks: vec![check] })
}

fn moment_json(value: f64, err: f64) -> Value {
    json!({"value": value, "err": err})
}

fn accuracy_check(name: &str, value: f64, err: f64, rel: f64) -> Check {
    let ok = value.is_finite() && err.is_finite() && err <= rel * value.abs().max(f64::MIN_POSITIVE);
    Check::new(name, ok, format!("err {err:.2e} vs {rel:e} * |{value:.6e}|"))
}

pub fn integrate(s: &Settings) -> Result<Outcome> {
    let case = case_arg(s)?;
    let t = s.f64("t")?;
    let mu = s.list("mu")?.ok_or_else(|| anyhow!("missing --mu"))?;
    let rel = s.tol("report");
    let mut checks = Vec::new();
    let result = match case {
        CaseId::Lv(_) => {
            let spec = LVRegionSpec::from_case(case, t)?;
            let v = lv_generating_i(&spec, mu3(&mu)?, &quad_for_regions(s))?;
            checks.push(accuracy_check("i_accuracy", v.value, v.err, rel));
            json!({"case": case, "t": t, "mu": mu, "center_level": spec.center_level(), "i": moment_json(v.value, v.err)})
        }
        CaseId::C4 => {
            let b: f64 = s.parsed("b")?.unwrap_or(0.0);
            let w: [f64; 4] = mu.as_slice().try_into().map_err(|_| anyhow!("c4 takes 4 weights, got {}", mu.len()))?;
            let spec = C4Spec::new(b, w, t)?;
            let v = c4_generating_i(&spec, &quad_for_regions(s))?;
            checks.push(accuracy_check("i_accuracy", v.value, v.err, rel));
            json!({"case": case, "t": t, "b": b, "mu": mu, "bounded_interval": spec.bounded_interval(), "i": moment_json(v.value, v.err)})
        }
        _ => {
            let b = b_arg(s)?;
            let o = moment_options(s);
            let f = formula(case, b.as_ref())?;
            f.check_mu(&mu)?;
            let spec = GeneratingSpec::new(case, b.clone(), mu.clone());
            let i = generating_i(&spec, t, &o)?;
            let j = generating_j(&spec, t, &o)?;
            checks.push(accuracy_check("i_accuracy", i.value, i.err, rel));
            checks.push(accuracy_check("j_accuracy", j.value, j.err, rel));
            let ks: Vec<i32> = match s.get("k") {
                Some(v) => v.split(',').map(|x| x.trim().parse().map_err(|_| anyhow!("--k: '{x}'"))).collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let mut moments = Vec::new();
            for k in ks {
                let mi = moment_i(case, b.as_ref(), t, k, &o)?;
                let mj = moment_j(case, b.as_ref(), t, k, &o)?;
                moments.push(json!({"k": k, "i": moment_json(mi.value, mi.err), "j": moment_json(mj.value, mj.err)}));
            }
            json!({
                "case": case, "b": b.map(|x| x.to_string()), "t": t, "mu": mu,
                "annulus": f.family.annulus,
                "i": moment_json(i.value, i.err), "j": moment_json(j.value, j.err),
                "moments": moments,
            })
        }
    };
    Ok(Outcome { result, checks })
}

fn quad_for_regions(s: &Settings) -> QuadOptions {
    let d = region_quad();
    QuadOptions { rel_tol: d.rel_tol.max(s.tol("quad_rel")), ..d }
}

pub fn pf_check(s: &Settings) -> Result<Outcome> {
    let case = case_arg(s)?;
    let b = b_arg(s)?;
    let o = moment_options(s);
    let fam = formula(case, b.as_ref())?.family;
    let points = s.usize("points")?;
    let (k0, k1): (i32, i32) = (s.parsed("kmin")?.unwrap_or(-3), s.parsed("kmax")?.unwrap_or(6));
    let (tc, ts) = (fam.annulus.t_c, fam.annulus.t_s);
    let hi = if ts.is_finite() { ts } else { tc + s.f64("span")? };
    let ts_grid: Vec<f64> = (0..points).map(|i| tc + (hi - tc) * (0.1 + 0.8 * i as f64 / (points.max(2) - 1) as f64)).collect();
    let relations: Vec<_> = (k0..=k1).map(|k| family_relation_at(&fam, k)).collect();
    let mut rows = Vec::new();
    let (mut worst_rec, mut worst_der) = (0.0f64, 0.0f64);
    for &t in &ts_grid {
        let mut rec = 0.0f64;
        let mut der = 0.0f64;
        for (rel, k) in relations.iter().zip(k0..) {
            rec = rec.max(relation_residual(&fam, rel, t, &o)?);
            der = der.max(family_derivative_relations(&fam, t, k, &o)?.max());
        }
        worst_rec = worst_rec.max(rec);
        worst_der = worst_der.max(der);
        rows.push(json!({"t": t, "recurrence": rec, "derivative": der}));
    }
    let (tr, td) = (s.tol("relation"), s.tol("derivative"));
    let checks = vec![
        Check::new("recurrence_residual", worst_rec <= tr, format!("max {worst_rec:.2e} (tol {tr:e})")),
        Check::new("derivative_residual", worst_der <= td, format!("max {worst_der:.2e} (tol {td:e})")),
    ];
    let result = json!({
        "case": case, "b": b.as_ref().map(|x| x.to_string()),
        "dimension": pf_dimension(case, b.as_ref()),
        "basis": family_basis(&fam),
        "relations": relations,
        "residuals": rows,
    });
    Ok(Outcome { result, checks })
}

fn which_arg(s: &Settings) -> Result<Which> {
    match s.require("which")?.to_ascii_lowercase().as_str() {
        "i" => Ok(Which::I),
        "j" => Ok(Which::J),
        w => bail!("--which must be i or j, got '{w}'"),
    }
}

/// Known sharp bound on zeros of `J`, for the cases where one is proved.
fn known_bound(case: CaseId) -> Option<usize> {
    matches!(case, CaseId::R(11) | CaseId::R(18)).then_some(2)
}

pub fn zeros(s: &Settings) -> Result<Outcome> {
    let case = case_arg(s)?;
    let b = b_arg(s)?;
    let mu = s.list("mu")?.ok_or_else(|| anyhow!("missing --mu"))?;
    formula(case, b.as_ref())?.check_mu(&mu)?;
    let which = which_arg(s)?;
    let rep = count_zeros(case, b.as_ref(), &mu, which, &zero_options(s)?)?;
    let mut checks = Vec::new();
    let roots = rep.roots();
    let inside = roots.iter().all(|&r| rep.interval[0] <= r && r <= rep.interval[1]);
    let sorted = roots.windows(2).all(|w| w[0] < w[1]);
    checks.push(Check::new("roots_inside_interval", inside, format!("{roots:?} in {:?}", rep.interval)));
    checks.push(Check::new("roots_ordered", sorted, ""));
    if let (Some(n), Which::J) = (known_bound(case), which) {
        checks.push(Check::new("zero_bound", rep.count <= n, format!("{} zeros, bound {n}", rep.count)));
    }
    Ok(Outcome { result: serde_json::to_value(&rep)?, checks })
}

pub fn sweep(s: &Settings) -> Result<Outcome> {
    let case = case_arg(s)?;
    let b = b_arg(s)?;
    let n = s.usize("n")?;
    let seed = s.seed()?.context("missing --seed")?;
    let sum = sweep_mu(case, b.as_ref(), n, seed, &zero_options(s)?)?;
    let total: usize = sum.histogram.values().sum();
    let mut checks = vec![Check::new("histogram_total", total == n, format!("{total} of {n} samples counted"))];
    if let Some(bound) = known_bound(case) {
        checks.push(Check::new("zero_bound", sum.max_count <= bound, format!("max count {}, bound {bound}", sum.max_count)));
    }
    if let Some(w) = &sum.witness {
        checks.push(Check::new("witness_simple", w.j_report.all_simple(), format!("zeros {:?}", w.j_report.roots())));
    }
    Ok(Outcome { result: serde_json::to_value(&sum)?, checks })
}

pub fn asympt(s: &Settings) -> Result<Outcome> {
    let case = case_arg(s)?;
    let b = b_arg(s)?;
    let o = moment_options(s);
    let window = s.list("window")?.unwrap();
    let [d0, d1] = window.as_slice() else { bail!("--window takes two distances") };
    let ks: Vec<i32> = match s.get("k") {
        Some(v) => v.split(',').map(|x| x.trim().parse().map_err(|_| anyhow!("--k: '{x}'"))).collect::<Result<_>>()?,
        None => match case {
            CaseId::R(18) => vec![-1, 0, 1],
            _ => vec![1, 2, 3],
        },
    };
    let points = s.usize("points")?;
    let (ts, tl, tsp) = (s.tol("slope"), s.tol("limit"), s.tol("log_spread"));
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for k in ks {
        let fit = slope_fit(case, b.as_ref(), k, (*d0, *d1), points, &o)?;
        match predicted_law(case, k) {
            Some(Law::Power(p)) => checks.push(Check::new(
                format!("slope_k{k}"),
                (fit.slope - p).abs() <= ts,
                format!("slope {:.4} vs {p} (tol {ts})", fit.slope),
            )),
            Some(Law::Bounded(Some(l))) => checks.push(Check::new(
                format!("limit_k{k}"),
                (fit.limit_estimate - l).abs() <= tl,
                format!("{:.6} vs {l} (tol {tl:e})", fit.limit_estimate),
            )),
            Some(Law::Log) => checks.push(Check::new(
                format!("log_ratio_k{k}"),
                fit.log_ratio_spread <= tsp,
                format!("spread {:.2}% over the smallest decade (tol {}%)", 100.0 * fit.log_ratio_spread, 100.0 * tsp),
            )),
            _ => {}
        }
        fits.push(fit);
    }
    Ok(Outcome { result: json!({"case": case, "b": b.map(|x| x.to_string()), "fits": fits}), checks })
}

pub fn monodromy(s: &Settings) -> Result<Outcome> {
    let fibs = match s.get("fibration") {
        Some(name) => vec![Fibration::parse(name).ok_or_else(|| anyhow!("unknown fibration '{name}'"))?],
        None => vec![Fibration::Cubic, Fibration::Quartic],
    };
    let mut checks = Vec::new();
    let mut data = Vec::new();
    for f in fibs {
        let d = matrices(f);
        for c in check_identities(&d) {
            checks.push(Check::new(format!("{}.{}", f.name(), c.name), c.pass, c.detail));
        }
        data.push(json!({"name": f.name(), "matrices": d}));
    }
    Ok(Outcome { result: json!({"fibrations": data}), checks })
}

pub fn crosscheck(s: &Settings) -> Result<Outcome> {
    let o = moment_options(s);
    let mu = match s.list("mu")? {
        Some(m) => mu3(&m)?,
        None => {
            let lv = s.list("witness_levels")?.unwrap();
            let [a, b] = lv.as_slice() else { bail!("--witness-levels takes two levels") };
            mu3(&witness_through(CaseId::R(18), None, Which::I, [*a, *b], &o)?)?
        }
    };
    let eps = s.f64("epsilon")?;
    let fo = flow_options(s);
    let field = PerturbedField::new(mu, eps)?;
    let ts = interior_levels(s.usize("levels")?, 0.01);
    let sigma = calibrate_sigma(&field, &ts, &fo)?;
    let rows = compare(&field, &ts, sigma, &fo)?;
    let search = CycleSearch { flow: fo, grid: s.usize("grid")?, ..CycleSearch::default() };
    let cycles = locate_limit_cycles(&field, &search)?;
    let izeros = count_zeros(CaseId::R(18), None, &mu, Which::I, &ZeroOptions { moment: o, ..ZeroOptions::default() })?;
    let epsilons = s.list("order_epsilons")?.unwrap();
    let study = order_study(mu, &epsilons, &ts, sigma, &fo)?;

    let (tg, tr) = (s.tol("cycle_gap"), s.tol("melnikov_rel"));
    // relative agreement is meaningless next to a zero of I
    let scale = rows.iter().map(|r| r.melnikov.abs()).fold(0.0, f64::max);
    let worst_rel = rows.iter().filter(|r| r.melnikov.abs() >= 0.05 * scale).map(|r| r.rel_diff).fold(0.0, f64::max);
    let worst_gap = cycles.iter().map(|c| c.gap().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let min_order = study.orders.iter().copied().fold(f64::INFINITY, f64::min);
    let alternate = cycles.windows(2).all(|w| w[0].stability != w[1].stability);
    let checks = vec![
        Check::new("cycle_count", cycles.len() == izeros.count, format!("{} cycles, {} zeros of I", cycles.len(), izeros.count)),
        Check::new("cycle_gap", worst_gap <= tg, format!("max gap {worst_gap:.2e} (tol {tg:e})")),
        Check::new("displacement_matches_i", worst_rel <= tr, format!("max rel diff {worst_rel:.2e} (tol {tr})")),
        Check::new("first_order", min_order >= 0.9, format!("orders {:?}", study.orders)),
        Check::new("stability_alternates", alternate, ""),
    ];
    let result = json!({
        "mu": mu, "epsilon": eps, "sigma": sigma,
        "i_zeros": izeros.roots(), "cycles": cycles, "comparison": rows, "order_study": study,
    });
    Ok(Outcome { result, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_rationals() {
        let g = |s: &str| parse_gauss(s).unwrap();
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        assert_eq!(g("0+0i"), GaussRat::new(r(0, 1), r(0, 1)));
        assert_eq!(g("1/2-3/4i"), GaussRat::new(r(1, 2), r(-3, 4)));
        assert_eq!(g("-2"), GaussRat::new(r(-2, 1), r(0, 1)));
        assert_eq!(g("i"), GaussRat::new(r(0, 1), r(1, 1)));
        assert_eq!(g("-i"), GaussRat::new(r(0, 1), r(-1, 1)));
        assert_eq!(g("3 - i"), GaussRat::new(r(3, 1), r(-1, 1)));
        assert!(parse_gauss("1/0+i").is_err());
        assert!(parse_gauss("x").is_err());
    }
}
