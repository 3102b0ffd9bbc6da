//! Randomized invariants.

use melnikov::case::CaseId;
use melnikov::classifier::{classify_reversible, ReversibleCase, ReversibleParams};
use melnikov::integral::catalog::{formula, generating_i, GeneratingSpec};
use melnikov::integral::MomentOptions;
use melnikov::picard_fuchs::{reduce_in_family, TPoly};
use melnikov::poly::{has_multiple_real_root, isolate_real_roots, rat, RealPoly, Rational};
use melnikov::zero_lab::canonical_mu;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn from_roots(roots: &[i64]) -> Vec<Rational> {
    // ascending coefficients of prod (x - r/4)
    let mut c = vec![rat(1, 1)];
    for &r in roots {
        let r = rat(r, 4);
        let mut n = vec![rat(0, 1); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            n[i + 1] += a;
            n[i] -= a * &r;
        }
        c = n;
    }
    c
}

fn tpoly() -> impl Strategy<Value = TPoly> {
    prop::collection::btree_map(-3i32..4, (-9i64..10, 1i64..5), 0..4).prop_map(|m| {
        let mut map = BTreeMap::new();
        for (p, (n, d)) in m {
            if n != 0 {
                map.insert(p, rat(n, d));
            }
        }
        TPoly(map)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isolation_counts_distinct_roots(mut roots in prop::collection::vec(-40i64..40, 1..6)) {
        roots.sort();
        roots.dedup();
        let p = RealPoly::from_rationals(from_roots(&roots));
        let iv = isolate_real_roots(&p, -11.0, 11.0).unwrap();
        prop_assert_eq!(iv.len(), roots.len());
        for (i, r) in iv.iter().zip(&roots) {
            prop_assert!(i.lo <= *r as f64 / 4.0 && *r as f64 / 4.0 <= i.hi);
        }
    }

    #[test]
    fn repeated_roots_are_detected(roots in prop::collection::vec(-20i64..20, 1..4), twice in 0usize..3) {
        let mut rs = roots.clone();
        let distinct = { let mut d = roots.clone(); d.sort(); d.dedup(); d.len() == roots.len() };
        prop_assert!(!has_multiple_real_root(&from_roots(&rs)) || !distinct);
        rs.push(roots[twice % roots.len()]);
        prop_assert!(has_multiple_real_root(&from_roots(&rs)));
    }

    #[test]
    fn laurent_arithmetic(a in tpoly(), b in tpoly(), c in tpoly(), t in 0.2f64..3.0) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        let lhs = a.mul(&b).eval(t);
        let rhs = a.eval(t) * b.eval(t);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn canonical_weights_are_scale_free(m in prop::collection::vec(-5.0f64..5.0, 3), c in prop_oneof![-4.0f64..-0.1, 0.1f64..4.0]) {
        prop_assume!(m.iter().any(|x| x.abs() > 1e-3));
        let scaled: Vec<f64> = m.iter().map(|x| c * x).collect();
        let (u, v) = (canonical_mu(&m), canonical_mu(&scaled));
        for (x, y) in u.iter().zip(&v) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_points_have_higher_genus(a in -60i64..60, b in -60i64..60, d in 2i64..9) {
        let (a, b) = (rat(a, d), rat(b, d + 1));
        let p = ReversibleParams::new(a.clone(), b.clone());
        let got = classify_reversible(&p);
        // off every listed line and point, nothing is of genus one
        let on_line = [(rat(2,1), rat(1,1)), (rat(0,1), rat(-1,1)), (rat(5,1), rat(4,1)), (rat(-3,1), rat(-4,1)), (rat(5,3), rat(2,3)), (rat(1,3), rat(-2,3))]
            .iter().any(|(s, o)| a == s * &b + o);
        if !on_line {
            if let ReversibleCase::Case { case: CaseId::R(k) } = got {
                prop_assert!(k == 0 || k >= 7, "line case {} off its line", k);
            }
        }
    }
}

/// Reductions evaluated numerically agree with direct quadrature.
#[test]
fn reductions_against_quadrature_random() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let o = MomentOptions::default();
    let cases = [(CaseId::R(18), None), (CaseId::R(11), None), (CaseId::R(6), Some(rat(3, 1))), (CaseId::R(7), None), (CaseId::R(3), Some(rat(-2, 1)))];
    for _ in 0..20 {
        let (case, b) = &cases[rng.gen_range(0..cases.len())];
        let f = formula(*case, b.as_ref()).unwrap().family;
        let (tc, ts) = (f.annulus.t_c, f.annulus.t_s);
        let t = tc + (ts - tc) * rng.gen_range(0.1..0.9);
        let n = rng.gen_range(-6..8);
        let red = reduce_in_family(&f, n).unwrap();
        let oval = f.oval(t, &o).unwrap();
        let mv = |k: i32| oval.combination(&[(1.0, melnikov::integral::Kind::Y, k)], &o.quad).unwrap().value;
        let vals: BTreeMap<i32, f64> = red.basis.iter().map(|&k| (k, mv(k))).collect();
        let direct = mv(n);
        let v = red.eval(t, &vals);
        assert!((v - direct).abs() <= 1e-8 * direct.abs(), "{case} n={n} t={t}: {v} vs {direct}");
    }
}

/// `I` is linear in the weights.
#[test]
fn generating_function_linearity() {
    let o = MomentOptions::default();
    let s = |mu: Vec<f64>| generating_i(&GeneratingSpec::new(CaseId::R(17), None, mu), -0.1, &o).unwrap().value;
    let a = s(vec![1.0, 2.0, -1.0]);
    let b = s(vec![0.5, 0.0, 3.0]);
    let ab = s(vec![1.5, 2.0, 2.0]);
    assert!((a + b - ab).abs() < 1e-12 * (a.abs() + b.abs()));
}
