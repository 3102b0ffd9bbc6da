//! Acceptance harness: one PASS/FAIL line per criterion. Tolerances are
//! fixed here and printed alongside each verdict. A failing criterion is
//! reported, not hidden; set `MELNIKOV_STRICT_ACCEPTANCE=1` to also turn it
//! into a nonzero exit.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use melnikov::case::CaseId;
use melnikov::classifier::diophantine::{closed_form_solutions, solve_genus_diophantine};
use melnikov::classifier::reversible::{line_point, point_of};
use melnikov::classifier::{classify_reversible, ReversibleCase, ReversibleParams};
use melnikov::integral::catalog::{formula, generating_i, generating_j, implemented_cases, GeneratingSpec};
use melnikov::integral::region::{
    c4_generating_i, lv_generating_i, lv_max_h, monte_carlo, region_quad, C4Spec, LVRegion, LVRegionSpec,
};
use melnikov::integral::MomentOptions;
use melnikov::monodromy::check_all;
use melnikov::ode::{
    calibrate_sigma, compare, interior_levels, locate_limit_cycles, order_study, CycleSearch, FlowOptions,
    PerturbedField,
};
use melnikov::picard_fuchs::{family_derivative_relations, family_relation_at, relation_residual};
use melnikov::poly::{rat, Rational};
use melnikov::zero_lab::{count_zeros, sample_mu, slope_fit, sweep_mu, witness_through, Law, Which, ZeroOptions};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn archive_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// The classification table as published: point cases and line families `a = s b + o`.
const POINT_TABLE: [(u8, (i64, i64), (i64, i64)); 17] = [
    (0, (-1, 1), (-1, 1)),
    (7, (5, 2), (-1, 2)),
    (8, (-7, 2), (-1, 2)),
    (9, (-8, 1), (-2, 1)),
    (10, (4, 1), (-2, 1)),
    (11, (-17, 1), (-5, 1)),
    (12, (7, 1), (-5, 1)),
    (13, (-7, 1), (-5, 3)),
    (14, (11, 3), (-5, 3)),
    (15, (-23, 1), (-7, 1)),
    (16, (9, 1), (-7, 1)),
    (17, (13, 1), (5, 1)),
    (18, (-3, 1), (5, 1)),
    (19, (-11, 1), (-3, 1)),
    (20, (5, 1), (-3, 1)),
    (21, (2, 1), (0, 1)),
    (22, (-2, 1), (0, 1)),
];
const LINE_TABLE: [(u8, (i64, i64), (i64, i64)); 6] =
    [(1, (2, 1), (1, 1)), (2, (0, 1), (-1, 1)), (3, (5, 1), (4, 1)), (4, (-3, 1), (-4, 1)), (5, (5, 3), (2, 3)), (6, (1, 3), (-2, 3))];
const LINE_SAMPLES: [(i64, i64); 5] = [(13, 17), (-19, 23), (29, 31), (-37, 41), (43, 47)];

fn c1_classification() -> Verdict {
    let mut bad = Vec::new();
    let mut n = 0;
    for (k, a, b) in POINT_TABLE {
        let p = ReversibleParams::new(rat(a.0, a.1), rat(b.0, b.1));
        n += 1;
        let got = classify_reversible(&p);
        if got != (ReversibleCase::Case { case: CaseId::R(k) }) {
            bad.push(format!("r{k}: {got:?}"));
        }
        if k != 0 && point_of(CaseId::R(k)) != Some(p) {
            bad.push(format!("r{k}: coordinates differ"));
        }
    }
    for (k, s, o) in LINE_TABLE {
        for bs in LINE_SAMPLES {
            let b = rat(bs.0, bs.1);
            let a = rat(s.0, s.1) * &b + rat(o.0, o.1);
            let p = ReversibleParams::new(a, b.clone());
            n += 1;
            let got = classify_reversible(&p);
            if got != (ReversibleCase::Case { case: CaseId::R(k) }) {
                bad.push(format!("r{k} at b={b}: {got:?}"));
            }
            if line_point(CaseId::R(k), b) != Some(p) {
                bad.push(format!("r{k}: line parametrization differs"));
            }
        }
    }
    // the excluded point b = -3 of r3 and r4
    for k in [3u8, 4] {
        if line_point(CaseId::R(k), rat(-3, 1)).is_some() {
            bad.push(format!("r{k}: b=-3 not excluded"));
        }
    }
    verdict(bad.is_empty(), format!("{n} parameter points, mismatches: {bad:?}"))
}

fn c2_diophantine() -> Verdict {
    let sol = solve_genus_diophantine(300);
    let mut brute = Vec::new();
    for p in 1u64..=300 {
        for q in p + 1..=300 {
            for r in q + 1..=300 {
                let g = gcd(gcd(p, q), r);
                if (p + r) % q == 0 && (q + r) % p == 0 && (p + q) % r == 0 && g == 1 {
                    brute.push((p, q, r));
                }
            }
        }
    }
    let closed = closed_form_solutions();
    let pass = sol.triples == vec![(1, 2, 3)] && brute == sol.triples && closed == vec![(5, 2, 1)];
    verdict(pass, format!("solver {:?}, brute force {:?}, closed form {:?}", sol.triples, brute, closed))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn c3_picard_fuchs() -> Verdict {
    let o = MomentOptions::default();
    let cases: [(CaseId, Option<Rational>); 4] =
        [(CaseId::R(18), None), (CaseId::R(11), None), (CaseId::R(6), Some(rat(3, 1))), (CaseId::R(7), None)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (case, b) in cases {
        let fam = formula(case, b.as_ref()).unwrap().family;
        let (tc, ts) = (fam.annulus.t_c, fam.annulus.t_s);
        let (mut rec, mut der) = (0.0f64, 0.0f64);
        for i in 0..10 {
            let t = tc + (ts - tc) * (0.1 + 0.8 * i as f64 / 9.0);
            for k in -3..=6 {
                match (relation_residual(&fam, &family_relation_at(&fam, k), t, &o), family_derivative_relations(&fam, t, k, &o)) {
                    (Ok(r), Ok(d)) => {
                        rec = rec.max(r);
                        der = der.max(d.max());
                    }
                    (r, d) => {
                        pass = false;
                        parts.push(format!("{case} t={t} k={k}: {:?} {:?}", r.err(), d.err()));
                    }
                }
            }
        }
        pass &= rec <= 1e-9 && der <= 1e-8;
        parts.push(format!("{case}: recurrence {rec:.1e}, derivative identities {der:.1e}"));
    }
    verdict(pass, format!("tol 1e-9 / 1e-8; {}", parts.join("; ")))
}

fn c4_derivative_contract() -> Verdict {
    let o = MomentOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for case in [CaseId::R(18), CaseId::R(11)] {
        let ann = formula(case, None).unwrap().family.annulus;
        let w = ann.t_s - ann.t_c;
        let (mut worst_fine, mut worst_order, mut worst_rich) = (0.0f64, f64::INFINITY, 0.0f64);
        for j in 0..5u64 {
            let mu = sample_mu(42, j, 3);
            let spec = GeneratingSpec::new(case, None, mu);
            let ts: Vec<f64> = (0..10).map(|i| ann.t_c + w * (0.15 + 0.7 * i as f64 / 9.0)).collect();
            let scale = ts.iter().map(|&t| generating_j(&spec, t, &o).unwrap().value.abs()).fold(0.0, f64::max);
            for &t in &ts {
                let jv = generating_j(&spec, t, &o).unwrap().value;
                let fd = |h: f64| (generating_i(&spec, t + h, &o).unwrap().value - generating_i(&spec, t - h, &o).unwrap().value) / (2.0 * h);
                let err = |h: f64| (fd(h) - jv).abs() / scale;
                let (e2, e3, e4) = (err(1e-2), err(1e-3), err(1e-4));
                worst_fine = worst_fine.max(e4);
                // not gated: removing the h^2 term shows what remains is truncation
                worst_rich = worst_rich.max(((4.0 * fd(5e-4) - fd(1e-3)) / 3.0 - jv).abs() / scale);
                worst_order = worst_order.min((e2 / e3).log10());
            }
        }
        pass &= worst_fine <= 1e-6 && worst_order >= 1.8;
        parts.push(format!(
            "{case}: max rel err at h=1e-4 {worst_fine:.1e}, min observed order (1e-2 to 1e-3) {worst_order:.2}, Richardson at h=1e-3 {worst_rich:.1e}"
        ));
    }
    verdict(pass, format!("tol 1e-6, order >= 1.8; {}", parts.join("; ")))
}

fn c5_zero_bound() -> Verdict {
    let o = ZeroOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for case in [CaseId::R(18), CaseId::R(11)] {
        match sweep_mu(case, None, 2000, 42, &o) {
            Ok(s) => {
                let witness_ok = s.witness.as_ref().map_or(false, |w| w.j_report.count == 2 && w.j_report.all_simple());
                if let Some(w) = &s.witness {
                    let path = archive_dir().join(format!("witness_{case}.json"));
                    std::fs::write(&path, serde_json::to_string_pretty(w).unwrap()).unwrap();
                }
                pass &= s.max_count == 2 && witness_ok;
                parts.push(format!(
                    "{case}: max {} histogram {:?} witness {:?}",
                    s.max_count,
                    s.histogram,
                    s.witness.as_ref().map(|w| (w.mu.clone(), w.j_report.roots()))
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{case}: {e}"));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn c6_asymptotics() -> Verdict {
    let o = MomentOptions::default();
    let win = (1e-5, 1e-2);
    let fit = |case, k| slope_fit(case, None, k, win, 31, &o).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    let a = fit(CaseId::R(18), -1);
    let ok = (a.slope + 0.5).abs() <= 0.05;
    pass &= ok;
    parts.push(format!("r18 J_-1 slope {:.4} [{}]", a.slope, if ok { "ok" } else { "off" }));
    let b = fit(CaseId::R(18), 1);
    let ok = (b.limit_estimate - 6.0).abs() <= 1e-3;
    pass &= ok;
    parts.push(format!("r18 J_1 -> {:.6} [{}]", b.limit_estimate, if ok { "ok" } else { "off" }));
    let c = fit(CaseId::R(18), 0);
    let ok = c.log_ratio_spread <= 0.05;
    pass &= ok;
    parts.push(format!(
        "r18 J_0/ln|t| spread over last decade {:.2}% [{}]",
        100.0 * c.log_ratio_spread,
        if ok { "ok" } else { "off" }
    ));
    for k in 1..=3 {
        let f = fit(CaseId::R(11), k);
        let Some(Law::Power(p)) = f.law else { unreachable!() };
        let ok = (f.slope - p).abs() <= 0.05;
        pass &= ok;
        parts.push(format!("r11 J_{k} slope {:.4} vs {p} [{}]", f.slope, if ok { "ok" } else { "off" }));
    }
    verdict(pass, format!("|t| in [1e-5, 1e-2]; {}", parts.join("; ")))
}

fn c7_monodromy() -> Verdict {
    let mut failed = Vec::new();
    let mut n = 0;
    for (fib, checks) in check_all() {
        for c in checks {
            n += 1;
            if !c.pass {
                failed.push(format!("{}:{} ({})", fib.name(), c.name, c.detail));
            }
        }
    }
    verdict(failed.is_empty(), format!("{n} integer checks, failed: {failed:?}"))
}

fn c8_ode() -> Verdict {
    let o = MomentOptions::default();
    // I vanishes at two prescribed levels, hence exactly twice inside
    let mu = witness_through(CaseId::R(18), None, Which::I, [-0.12, -0.05], &o).unwrap();
    let izeros = count_zeros(CaseId::R(18), None, &mu, Which::I, &ZeroOptions::default()).unwrap();
    std::fs::write(archive_dir().join("witness_r18_two_cycles.json"), serde_json::to_string_pretty(&izeros).unwrap()).unwrap();
    let mu = [mu[0], mu[1], mu[2]];
    let field = PerturbedField::new(mu, 1e-3).unwrap();
    let fo = FlowOptions::default();
    let ts = interior_levels(10, 0.01);
    let sigma = calibrate_sigma(&field, &ts, &fo).unwrap();
    let rows = compare(&field, &ts, sigma, &fo).unwrap();
    let worst_rel = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let cycles = locate_limit_cycles(&field, &CycleSearch::default()).unwrap();
    let worst_gap = cycles.iter().map(|c| c.gap().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let study = order_study(mu, &[1e-2, 1e-3, 1e-4], &ts, sigma, &fo).unwrap();
    let min_order = study.orders.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = izeros.count == 2 && cycles.len() == 2 && worst_gap <= 5e-3 && worst_rel <= 0.1 && min_order >= 0.9;
    verdict(
        pass,
        format!(
            "mu {mu:?}, sigma {sigma}; {} cycles at {:?}, max gap {worst_gap:.1e} (tol 5e-3); max rel diff {worst_rel:.1e} (tol 0.1); orders {:?} (need >= 0.9)",
            cycles.len(),
            cycles.iter().map(|c| c.t_star).collect::<Vec<_>>(),
            study.orders
        ),
    )
}

fn c9_lv() -> Verdict {
    let (x, y, h) = lv_max_h(2.0 / 3.0, 1.0 / 3.0);
    let target = 432f64.powf(-1.0 / 3.0);
    let mut pass = (h - target).abs() <= 1e-9 && (x - 1.0 / 3.0).abs() <= 1e-6 && (y - 1.0 / 6.0).abs() <= 1e-6;
    let mut parts = vec![format!("max H {h:.15} at ({x:.9}, {y:.9})")];
    let triples = [(CaseId::Lv(1), 0.05, [1.0, 0.0, 0.0]), (CaseId::Lv(1), 0.1, [1.0, 0.5, -0.3]), (CaseId::Lv(4), 3.2, [1.0, 0.2, 0.1])];
    for (i, (case, t, mu)) in triples.into_iter().enumerate() {
        let spec = LVRegionSpec::from_case(case, t).unwrap();
        let v = lv_generating_i(&spec, mu, &region_quad()).unwrap();
        let mc = monte_carlo(&LVRegion { spec, weights: mu }, 1_000_000, 100 + i as u64).unwrap();
        let z = (v.value - mc.mean).abs() / mc.std_err;
        pass &= z <= 3.0;
        parts.push(format!("{case} t={t}: quad {:.6e} vs MC {:.6e} +- {:.1e} ({z:.2} SE)", v.value, mc.mean, mc.std_err));
    }
    verdict(pass, parts.join("; "))
}

fn c10_shrinking() -> Verdict {
    let near = MomentOptions::permissive();
    let o = MomentOptions::default();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (case, b) in implemented_cases() {
        let f = formula(case, b.as_ref()).unwrap();
        let mu = vec![1.0; f.n_mu];
        let spec = GeneratingSpec::new(case, b.clone(), mu);
        let ann = f.family.annulus;
        let r = generating_i(&spec, ann.t_c + 1e-6, &near)
            .and_then(|a| generating_i(&spec, ann.midpoint(), &o).map(|m| a.value.abs() / m.value.abs()));
        n += 1;
        match r {
            Ok(q) => {
                worst = worst.max(q);
                if q >= 1e-4 {
                    bad.push(format!("{case}: {q:.1e}"));
                }
            }
            Err(e) => bad.push(format!("{case}: {e}")),
        }
    }
    let q = region_quad();
    for k in 1..=5u8 {
        let case = CaseId::Lv(k);
        let (tc, (lo, hi)) = LVRegionSpec::case_levels(case).unwrap();
        // center at the lower end: levels grow outward, up to infinity
        let (t_near, t_mid) = if tc == lo { (tc + 1e-6, 2.0 * tc) } else { (tc - 1e-6, 0.5 * (lo + hi)) };
        let a = lv_generating_i(&LVRegionSpec::from_case(case, t_near).unwrap(), [1.0; 3], &q);
        let m = lv_generating_i(&LVRegionSpec::from_case(case, t_mid).unwrap(), [1.0; 3], &q);
        n += 1;
        match (a, m) {
            (Ok(a), Ok(m)) => {
                let r = a.value.abs() / m.value.abs();
                worst = worst.max(r);
                if r >= 1e-4 {
                    bad.push(format!("{case}: {r:.1e}"));
                }
            }
            (a, m) => bad.push(format!("{case}: {:?} {:?}", a.err(), m.err())),
        }
    }
    let c4 = C4Spec::new(0.0, [1.0; 4], -1.0 / 24.0 + 1e-6).and_then(|near| {
        let (lo, hi) = near.bounded_interval();
        let mid = C4Spec::new(0.0, [1.0; 4], 0.5 * (lo + hi))?;
        Ok(c4_generating_i(&near, &q)?.value.abs() / c4_generating_i(&mid, &q)?.value.abs())
    });
    n += 1;
    match c4 {
        Ok(r) => {
            worst = worst.max(r);
            if r >= 1e-4 {
                bad.push(format!("c4: {r:.1e}"));
            }
        }
        Err(e) => bad.push(format!("c4: {e}")),
    }
    verdict(bad.is_empty(), format!("{n} generating functions, worst ratio {worst:.1e} (tol 1e-4), failures {bad:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, Option<Duration>); 10] = [
        ("1 classification table", c1_classification, Some(Duration::from_secs(1))),
        ("2 diophantine uniqueness", c2_diophantine, Some(Duration::from_secs(5))),
        ("3 picard-fuchs residuals", c3_picard_fuchs, Some(Duration::from_secs(30))),
        ("4 derivative contract", c4_derivative_contract, None),
        ("5 chebyshev bound sweep", c5_zero_bound, Some(Duration::from_secs(180))),
        ("6 asymptotic exponents", c6_asymptotics, None),
        ("7 monodromy identities", c7_monodromy, Some(Duration::from_secs(1))),
        ("8 ode cross-check", c8_ode, Some(Duration::from_secs(300))),
        ("9 lv endpoint and region quadrature", c9_lv, None),
        ("10 shrinking-cycle law", c10_shrinking, None),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let v = run();
        let el = start.elapsed();
        let in_time = budget.map_or(true, |b| el <= b);
        let pass = v.pass && in_time;
        if !pass {
            failures += 1;
        }
        let timing = match budget {
            Some(b) => format!("{:.2}s of {}s", el.as_secs_f64(), b.as_secs()),
            None => format!("{:.2}s", el.as_secs_f64()),
        };
        println!("{} [{name}] ({timing}) {}", if pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} of 10 criteria pass", 10 - failures);
    if failures > 0 && std::env::var("MELNIKOV_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
