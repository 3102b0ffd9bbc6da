//! Triples `p < q < r` for which `x^p y^q (1-x-y)^r = t` is elliptic:
//! `q | p+r`, `p | q+r`, `r | p+q`, `gcd(p,q,r) = 1`.

use num_integer::Integer;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiophantineSolution {
    pub triples: Vec<(u64, u64, u64)>,
    /// Solutions of `alpha beta gamma = 2 + alpha + beta + gamma`,
    /// `alpha > beta > gamma >= 1`.
    pub closed_form: Vec<(u64, u64, u64)>,
}

fn admissible(p: u64, q: u64, r: u64) -> bool {
    (p + r) % q == 0 && (q + r) % p == 0 && (p + q) % r == 0 && p.gcd(&q).gcd(&r) == 1
}

/// Since `r > q > p`, `r | p+q < 2r` forces `r = p+q`; only pairs are scanned.
pub fn solve_genus_diophantine(bound: u64) -> DiophantineSolution {
    let mut triples = Vec::new();
    for p in 1..=bound {
        for q in p + 1..=bound {
            let r = p + q;
            if r > bound {
                break;
            }
            if admissible(p, q, r) {
                triples.push((p, q, r));
            }
        }
    }
    DiophantineSolution { triples, closed_form: closed_form_solutions() }
}

/// `gamma = 1` gives `(alpha-1)(beta-1) = 4`; `gamma >= 2` forces
/// `alpha beta gamma >= 2 alpha beta > 2 + alpha + beta + gamma` once
/// `beta >= 3`, so a bounded scan is exhaustive.
pub fn closed_form_solutions() -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for gamma in 1..=6u64 {
        for beta in gamma + 1..=8 {
            for alpha in beta + 1..=32 {
                if alpha * beta * gamma == 2 + alpha + beta + gamma {
                    out.push((alpha, beta, gamma));
                }
            }
        }
    }
    out
}

/// `(p/r, q/r) = ((gamma+1)/(alpha+1), (gamma+1)/(beta+1))`.
pub fn ratios(abg: (u64, u64, u64)) -> ((u64, u64), (u64, u64)) {
    let (a, b, g) = abg;
    let red = |n: u64, d: u64| {
        let k = n.gcd(&d);
        (n / k, d / k)
    };
    (red(g + 1, a + 1), red(g + 1, b + 1))
}
