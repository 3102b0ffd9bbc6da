//! Integer monodromy matrices of the two elliptic fibrations and checks of
//! the identities they are stated to satisfy.
//!
//! Matrices act on cycle coordinates: column `j` holds the image of the
//! `j`-th basis cycle. The row convention (transpose) is tried whenever a
//! product identity fails under the column one, and the outcome of both is
//! reported.

use serde::Serialize;

pub type IMat = Vec<Vec<i64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fibration {
    /// `t = y^2/2 - x^2/2 + x^3/3` on the curve punctured at `x = 0`;
    /// basis (alpha, delta, gamma).
    Cubic,
    /// `t = (y^2/2 + 1/3 - x/2) / x^3`; basis (delta, gamma).
    Quartic,
}

impl Fibration {
    pub fn name(&self) -> &'static str {
        match self {
            Fibration::Cubic => "fib_5_3",
            Fibration::Quartic => "fib_5_4",
        }
    }

    pub fn parse(s: &str) -> Option<Fibration> {
        match s {
            "fib_5_3" | "cubic" => Some(Fibration::Cubic),
            "fib_5_4" | "quartic" => Some(Fibration::Quartic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonodromyData {
    pub fibration: Fibration,
    pub basis: Vec<&'static str>,
    pub m0: IMat,
    pub m1: IMat,
    pub minf: IMat,
    /// Kodaira types of the fibers over 0, -1/6 and infinity, when known.
    pub fiber_types: Vec<&'static str>,
}

pub fn matrices(f: Fibration) -> MonodromyData {
    match f {
        Fibration::Cubic => MonodromyData {
            fibration: f,
            basis: vec!["alpha", "delta", "gamma"],
            m0: vec![vec![-1, 1, 0], vec![0, 1, 0], vec![0, -1, 1]],
            m1: vec![vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]],
            minf: vec![vec![-1, 1, 1], vec![0, 0, 1], vec![0, -1, 1]],
            fiber_types: vec![],
        },
        Fibration::Quartic => MonodromyData {
            fibration: f,
            basis: vec!["delta", "gamma"],
            m0: vec![vec![0, -1], vec![1, 0]],
            m1: vec![vec![1, -1], vec![0, 1]],
            minf: vec![vec![-1, -1], vec![1, 0]],
            fiber_types: vec!["III", "I1", "IV*"],
        },
    }
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

pub fn transpose(a: &IMat) -> IMat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_sub(a: &IMat, b: &IMat) -> IMat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn mat_pow(a: &IMat, e: u32) -> IMat {
    (0..e).fold(identity(a.len()), |acc, _| mat_mul(&acc, a))
}

pub fn trace(a: &IMat) -> i64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Determinant by cofactor expansion (dimension <= 3 here).
pub fn det(a: &IMat) -> i64 {
    match a.len() {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        n => (0..n)
            .map(|j| {
                let minor: IMat = a[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * a[0][j] * det(&minor)
            })
            .sum(),
    }
}

/// Characteristic polynomial coefficients, ascending, for 2x2 and 3x3.
pub fn char_poly(a: &IMat) -> Vec<i64> {
    match a.len() {
        2 => vec![det(a), -trace(a), 1],
        3 => {
            let m2 = mat_mul(a, a);
            let e2 = (trace(a) * trace(a) - trace(&m2)) / 2;
            vec![-det(a), e2, -trace(a), 1]
        }
        _ => unimplemented!("only small matrices occur"),
    }
}

fn column(a: &IMat, j: usize) -> Vec<i64> {
    a.iter().map(|r| r[j]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> IdentityCheck {
    IdentityCheck { name: name.into(), pass, detail }
}

fn fmt(a: &IMat) -> String {
    format!("{a:?}")
}

/// `Minf = M1 M0`, trying the column convention and then the row one.
fn product_check(d: &MonodromyData) -> IdentityCheck {
    let col = mat_mul(&d.m1, &d.m0);
    if col == d.minf {
        return check("minf_eq_m1_m0", true, "column convention".into());
    }
    // row convention: the printed matrices are transposes of the actions,
    // so l1 o l0 is printed as (M1^T M0^T)^T = M0 M1
    let row = mat_mul(&d.m0, &d.m1);
    if row == d.minf {
        return check("minf_eq_m1_m0", true, "row convention".into());
    }
    let diff: Vec<String> = (0..col.len())
        .flat_map(|i| (0..col.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| col[i][j] != d.minf[i][j])
        .map(|(i, j)| format!("({},{}): printed {} vs product {}", i + 1, j + 1, d.minf[i][j], col[i][j]))
        .collect();
    check(
        "minf_eq_m1_m0",
        false,
        format!(
            "column convention M1*M0 = {}; row convention M0*M1 = {}; printed Minf = {}; column-convention mismatches: {}",
            fmt(&col),
            fmt(&row),
            fmt(&d.minf),
            diff.join(", ")
        ),
    )
}

pub fn check_identities(d: &MonodromyData) -> Vec<IdentityCheck> {
    let n = d.m0.len();
    let id = identity(n);
    let mut out = vec![product_check(d)];
    let u = mat_sub(&d.m1, &id);
    let u2 = mat_mul(&u, &u);
    out.push(check(
        "m1_unipotent",
        u2.iter().flatten().all(|&v| v == 0),
        format!("(M1-I)^2 = {}", fmt(&u2)),
    ));
    out.push(check("trace_m1", trace(&d.m1) == n as i64, format!("Tr M1 = {}", trace(&d.m1))));
    match d.fibration {
        Fibration::Cubic => {
            let c0 = column(&d.m0, 0);
            out.push(check("l0_alpha_eq_minus_alpha", c0 == vec![-1, 0, 0], format!("M0 alpha = {c0:?}")));
            out.push(check("det_m0", det(&d.m0) == -1, format!("det M0 = {}", det(&d.m0))));
        }
        Fibration::Quartic => {
            out.push(check("trace_m0", trace(&d.m0) == 0, format!("Tr M0 = {}", trace(&d.m0))));
            out.push(check("det_m0", det(&d.m0) == 1, format!("det M0 = {}", det(&d.m0))));
            out.push(check("trace_minf", trace(&d.minf) == -1, format!("Tr Minf = {}", trace(&d.minf))));
            let p4 = mat_pow(&d.m0, 4);
            out.push(check("m0_pow4_eq_id", p4 == id, format!("M0^4 = {}", fmt(&p4))));
            // eigenvalues are +-i exactly when the characteristic polynomial is x^2 + 1
            let cp = char_poly(&d.m0);
            out.push(check("m0_eigenvalues_pm_i", cp == vec![1, 0, 1], format!("char poly (ascending) = {cp:?}")));
            let c0 = column(&d.m0, 0);
            out.push(check("l0_delta_eq_gamma", c0 == vec![0, 1], format!("M0 delta = {c0:?}")));
            let d1 = column(&d.m1, 0);
            out.push(check("l1_delta_eq_delta", d1 == vec![1, 0], format!("M1 delta = {d1:?}")));
        }
    }
    out
}

/// All checks for both fibrations.
pub fn check_all() -> Vec<(Fibration, Vec<IdentityCheck>)> {
    [Fibration::Cubic, Fibration::Quartic]
        .into_iter()
        .map(|f| (f, check_identities(&matrices(f))))
        .collect()
}
