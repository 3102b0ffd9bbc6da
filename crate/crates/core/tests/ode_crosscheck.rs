use melnikov::integral::MomentOptions;
use melnikov::ode::{
    displacement, first_return, locate_limit_cycles, melnikov_i, CycleSearch, FlowOptions, PerturbedField, Stability,
};
use melnikov::case::CaseId;
use melnikov::zero_lab::{count_zeros, sample_mu, witness_through, Which, ZeroOptions};

fn cycles(mu: [f64; 3], eps: f64) -> Vec<melnikov::ode::LimitCycleFinding> {
    let f = PerturbedField::new(mu, eps).unwrap();
    locate_limit_cycles(&f, &CycleSearch::default()).unwrap()
}

fn interior_i_zeros(mu: [f64; 3]) -> usize {
    count_zeros(CaseId::R(18), None, &mu, Which::I, &ZeroOptions::default()).unwrap().count
}

#[test]
fn unperturbed_flow_conserves_energy() {
    let f = PerturbedField::new([1.0, 0.0, 0.0], 0.0).unwrap();
    let ret = first_return(&f, -0.1, &FlowOptions::default()).unwrap();
    assert!(ret.displacement.abs() < 1e-10, "{}", ret.displacement);
}

#[test]
fn rejects_large_epsilon() {
    assert!(PerturbedField::new([1.0, 0.0, 0.0], 0.5).is_err());
}

#[test]
fn displacement_sign_follows_the_integral() {
    let mu = [0.4, -0.3, 0.6];
    let f = PerturbedField::new(mu, 1e-3).unwrap();
    for t in [-0.15, -0.1, -0.05, -0.02] {
        let d = displacement(&f, t, &FlowOptions::default()).unwrap();
        let i = melnikov_i(mu, t).unwrap();
        if i.abs() > 1e-4 {
            assert_eq!(d.signum(), i.signum(), "t={t}: {d} vs {i}");
        }
    }
}

#[test]
fn pure_period_weight_has_no_cycles() {
    assert!(cycles([1.0, 0.0, 0.0], 1e-3).is_empty());
}

#[test]
fn cycle_counts_match_integral_zero_counts() {
    let two = witness_through(CaseId::R(18), None, Which::I, [-0.12, -0.05], &MomentOptions::default()).unwrap();
    // first seeded weight whose I has one interior zero, well inside
    let one = (0..64)
        .map(|i| sample_mu(3, i, 3))
        .find(|m| {
            let rep = count_zeros(CaseId::R(18), None, m, Which::I, &ZeroOptions::default()).unwrap();
            rep.count == 1 && rep.roots().iter().all(|z| *z > -0.16 && *z < -0.005)
        })
        .unwrap();
    for mu in [[1.0, 0.0, 0.0], [one[0], one[1], one[2]], [two[0], two[1], two[2]]] {
        let found = cycles(mu, 1e-3);
        assert_eq!(found.len(), interior_i_zeros(mu), "{mu:?}");
        for c in &found {
            assert!(c.gap().unwrap() < 1e-4, "{c:?}");
        }
        // neighbouring cycles alternate in stability
        for w in found.windows(2) {
            assert_ne!(w[0].stability, w[1].stability);
        }
        if let Some(c) = found.first() {
            assert!(matches!(c.stability, Stability::Attracting | Stability::Repelling));
        }
    }
}
