//! Closed-form solutions of the equation and the reductions they come from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{q, qr, Exponent, Expr, JetVar, Symbol, Var, Q};
use crate::jet::EquationSystem;
use crate::solution::{Domain, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogId {
    Trivial,
    DkpPartial,
    Hierarchy,
    ExpFamily,
    Sl2Family,
    Sl2Degenerate,
}

impl CatalogId {
    pub const ALL: [CatalogId; 6] = [
        CatalogId::Trivial,
        CatalogId::DkpPartial,
        CatalogId::Hierarchy,
        CatalogId::ExpFamily,
        CatalogId::Sl2Family,
        CatalogId::Sl2Degenerate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogId::Trivial => "trivial",
            CatalogId::DkpPartial => "dkp-partial",
            CatalogId::Hierarchy => "hierarchy",
            CatalogId::ExpFamily => "exp-family",
            CatalogId::Sl2Family => "sl2-family",
            CatalogId::Sl2Degenerate => "sl2-degenerate",
        }
    }

    /// Number of function-of-`t` parameters taken.
    pub fn arity(self) -> usize {
        match self {
            CatalogId::Trivial => 0,
            CatalogId::DkpPartial => 1,
            CatalogId::Hierarchy => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCatalogId(s.to_string()))
    }
}

fn ey(k: i64) -> Expr {
    Expr::exp_atom(Var::Y, Exponent::from(k))
}

fn ypow(n: i64, d: i64) -> Expr {
    Expr::base_pow(Var::Y, Exponent::new(n, d))
}

/// Default potential for the hierarchy entry.
pub fn default_potential() -> Expr {
    (Expr::x() * Expr::x()).scale(&qr(1, 2)) + ey(-1)
}

/// Build a catalog solution. Missing parameters default to formal functions
/// `f(t)`, `h(t)` (or the default potential for `hierarchy`).
pub fn catalog(id: CatalogId, params: &[Expr]) -> Result<Solution> {
    if params.len() > id.arity() {
        return Err(Error::InvalidArgument(format!(
            "{id} takes at most {} parameters",
            id.arity()
        )));
    }
    for p in params {
        if p.has_jets() || (id != CatalogId::Hierarchy && !p.depends_on_t_only()) {
            return Err(Error::InvalidArgument(format!(
                "parameter `{p}` must be a function of t"
            )));
        }
    }
    let param = |i: usize, name: &str| {
        params
            .get(i)
            .cloned()
            .unwrap_or_else(|| Expr::func(name, 0))
    };
    let tag = if params.is_empty() {
        id.name().to_string()
    } else {
        format!(
            "{id}({})",
            params
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        )
    };
    let (x, y) = (Expr::x(), Expr::y());
    let (u, v, domain) = match id {
        CatalogId::Trivial => (Expr::zero(), Expr::zero(), Domain::everywhere()),
        CatalogId::DkpPartial => {
            let h = param(0, "h");
            (
                Expr::zero(),
                y.powi(4).unwrap().scale(&qr(1, 12)) + &x * &y + h,
                Domain::everywhere(),
            )
        }
        CatalogId::Hierarchy => {
            let w = params.first().cloned().unwrap_or_else(default_potential);
            let report = hierarchy_check(&w)?;
            if !report.potential_ok {
                return Err(Error::HierarchyCheckFailed(format!(
                    "F = {} is not a function of t",
                    report.f
                )));
            }
            (
                w.partial_var(Var::X),
                -w.partial_var(Var::Y),
                Domain::everywhere(),
            )
        }
        CatalogId::ExpFamily => {
            let (f, h) = (param(0, "f"), param(1, "h"));
            (&x + ey(1), f + h * ey(-1), Domain::everywhere())
        }
        CatalogId::Sl2Family => {
            let (f, h) = (param(0, "f"), param(1, "h"));
            let u = ypow(2, 3) - (&x * ypow(-1, 1)).scale(&qr(10, 3));
            let v = (&x * ypow(-1, 3)).scale(&qr(2, 5)) - (&x * &x * ypow(-2, 1)).scale(&qr(7, 3))
                + ypow(4, 3).scale(&qr(21, 25))
                + (f * ypow(1, 3) + h) * &y * &y;
            (u, v, Domain::y_positive())
        }
        CatalogId::Sl2Degenerate => {
            let (f, h) = (param(0, "f"), param(1, "h"));
            let u = -(&x * ypow(-1, 1)).scale(&qr(10, 3));
            let v = -(&x * &x * ypow(-2, 1)).scale(&qr(7, 3)) + (f * ypow(1, 3) + h) * &y * &y;
            (u, v, Domain::y_positive())
        }
    };
    Solution::new(u, v, domain, tag)
}

/// Left-hand side `w_tx + w_x w_xy - w_y w_xx - w_yy`.
pub fn hierarchy_lhs(w: &Expr) -> Expr {
    let d = |e: &Expr, v: Var| e.partial_var(v);
    let (wx, wy) = (d(w, Var::X), d(w, Var::Y));
    d(&wx, Var::T) + &wx * d(&wx, Var::Y) - &wy * d(&wx, Var::X) - d(&wy, Var::Y)
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub f: String,
    /// `F_1 - ∂_x F` on `(u, v) = (w_x, -w_y)`.
    pub f1_residual: String,
    /// `F_2 + ∂_y F`.
    pub f2_residual: String,
    pub derivatives_match: bool,
    /// `F` depends on `t` alone.
    pub potential_ok: bool,
}

pub fn hierarchy_check(w: &Expr) -> Result<HierarchyReport> {
    let f = hierarchy_lhs(w);
    let s = Solution::unchecked(
        w.partial_var(Var::X),
        -w.partial_var(Var::Y),
        Domain::everywhere(),
        "potential",
    )?;
    let (r1, r2) = s.ms_residuals()?;
    let e1 = r1 - f.partial_var(Var::X);
    let e2 = r2 + f.partial_var(Var::Y);
    Ok(HierarchyReport {
        f: f.to_string(),
        derivatives_match: e1.is_zero() && e2.is_zero(),
        f1_residual: e1.to_string(),
        f2_residual: e2.to_string(),
        potential_ok: f.depends_on_t_only(),
    })
}

/// `v_tx + v_x² + v v_xx - v_yy` as a jet expression.
pub fn dkp_lhs() -> Expr {
    let v = Expr::v(0, 0, 0);
    Expr::v(1, 1, 0) + Expr::v(0, 1, 0) * Expr::v(0, 1, 0) + v * Expr::v(0, 2, 0) - Expr::v(0, 0, 2)
}

/// `F_2` restricted to `u ≡ 0` minus the dKP left-hand side.
pub fn dkp_reduction_residual() -> Expr {
    let f2 = EquationSystem::shared().f2();
    let zero_u = f2
        .symbols()
        .into_iter()
        .filter(|s| matches!(s, Symbol::Jet(j) if j.dep == crate::expr::Dep::U))
        .map(|s| (s, Expr::zero()))
        .collect();
    f2.substitute(&zero_u).expect("polynomial substitution") - dkp_lhs()
}

/// dKP residual of `v` on a solution with `u ≡ 0`.
pub fn dkp_residual(s: &Solution) -> Result<Expr> {
    if !s.u.is_zero() {
        return Err(Error::InvalidArgument("dKP reduction needs u = 0".into()));
    }
    s.substitute_jets(&dkp_lhs())
}

/// The `u_x ≡ 0` branch: the section lies on the singular locus.
pub fn in_ux_branch(s: &Solution) -> bool {
    s.jet(JetVar::u(0, 1, 0)).is_zero()
}

/// Exact invariant constants claimed for the `sl2` family.
pub fn sl2_constants() -> [(&'static str, Q); 7] {
    [
        ("I1", qr(-3, 25)),
        ("I2", qr(21, 100)),
        ("I3", qr(-147, 500)),
        ("K1", q(1)),
        ("K2", q(0)),
        ("K3", qr(9, 50)),
        ("K4", qr(-9, 500)),
    ]
}

/// Consistency of the claimed constants among themselves: residuals of the two
/// identities with `∇_j(I_2) = 0`, and the determinant of the Killing form of
/// the Lie algebra with the structure constants of `[∇_i, ∇_j]`.
#[derive(Clone, Debug, Serialize)]
pub struct Sl2Consistency {
    pub identity_residuals: [String; 2],
    pub killing_det: String,
    /// Signature `(positive, negative)` of the Killing form.
    pub killing_signature: (usize, usize),
    /// `Δ` of the expressions of `K_i` through `I_i`; zero means those
    /// expressions are indeterminate.
    pub delta: String,
}

pub fn sl2_consistency() -> Sl2Consistency {
    let c: BTreeMap<&str, Q> = sl2_constants().into_iter().collect();
    let (i1, i2, i3) = (&c["I1"], &c["I2"], &c["I3"]);
    let (k1, k2, k3, k4) = (&c["K1"], &c["K2"], &c["K3"], &c["K4"]);
    let r1 = i1 - ((k2 + k3) * qr(1, 2) - i2 * k1);
    let r3 = i3 - ((k2 + k3 * q(3) + k4 * q(2)) * qr(1, 4) + i2 * (k2 - k1 - q(1)));
    // [n_a, n_b] = Σ_c s[a][b][c] n_c
    let zero = || [q(0), q(0), q(0)];
    let mut s: [[[Q; 3]; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    let rel = [
        ((0, 1), [q(0), q(-1), q(0)]),
        ((0, 2), [-k3.clone(), k1 - k2 * q(2), k1.clone()]),
        ((1, 2), [k4.clone(), k3.clone(), k2.clone()]),
    ];
    for ((a, b), v) in rel {
        for k in 0..3 {
            s[a][b][k] = v[k].clone();
            s[b][a][k] = -v[k].clone();
        }
    }
    // B(a, b) = tr(ad a ∘ ad b), (ad a)[k][j] = s[a][j][k]
    let kill: Vec<Vec<Q>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|b| {
                    let mut tr = q(0);
                    for k in 0..3 {
                        for j in 0..3 {
                            tr += &s[a][j][k] * &s[b][k][j];
                        }
                    }
                    tr
                })
                .collect()
        })
        .collect();
    let m: crate::linalg::Mat3 =
        std::array::from_fn(|i| std::array::from_fn(|j| Expr::constant(kill[i][j].clone())));
    let det = crate::linalg::det3(&m);
    let delta = i1 * i2 * (i1 - q(1)) + i2 * (i2 + i3) + i3 * (i2 + i3 - i1);
    Sl2Consistency {
        identity_residuals: [r1.to_string(), r3.to_string()],
        killing_det: det.to_string(),
        killing_signature: sylvester_signature(&kill),
        delta: delta.to_string(),
    }
}

/// Inertia of a symmetric rational matrix via symmetric Gaussian elimination.
fn sylvester_signature(m: &[Vec<Q>]) -> (usize, usize) {
    let mut a = m.to_vec();
    let n = a.len();
    let (mut pos, mut neg) = (0, 0);
    for i in 0..n {
        if a[i][i] == q(0) {
            if let Some(j) = (i + 1..n).find(|&j| a[j][j] != q(0)) {
                a.swap(i, j);
                for row in a.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| a[i][j] != q(0)) {
                // replace e_i by e_i + e_j
                for k in 0..n {
                    let v = a[j][k].clone();
                    a[i][k] += v;
                }
                for k in 0..n {
                    let v = a[k][j].clone();
                    a[k][i] += v;
                }
            }
        }
        let p = a[i][i].clone();
        if p == q(0) {
            continue;
        }
        if p > q(0) {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in i + 1..n {
            let f = &a[r][i] / &p;
            for k in i..n {
                let v = &f * &a[i][k];
                a[r][k] -= v;
            }
        }
        for r in i + 1..n {
            a[i][r] = q(0);
            a[r][i] = q(0);
        }
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_entries_solve_the_equation() {
        for id in CatalogId::ALL {
            catalog(id, &[]).unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }

    #[test]
    fn exp_family_with_zero_parameters() {
        let s = catalog(CatalogId::ExpFamily, &[Expr::zero(), Expr::zero()]).unwrap();
        assert_eq!(s.u, Expr::x() + ey(1));
        assert!(s.v.is_zero());
    }

    #[test]
    fn dkp_reduction() {
        assert!(dkp_reduction_residual().is_zero());
        let s = catalog(CatalogId::DkpPartial, &[]).unwrap();
        assert!(dkp_residual(&s).unwrap().is_zero());
        assert!(in_ux_branch(&s));
    }

    #[test]
    fn hierarchy_reduction() {
        let r = hierarchy_check(&default_potential()).unwrap();
        assert!(r.derivatives_match, "{r:?}");
        assert!(r.potential_ok);
        let any = Expr::x() * Expr::y() * Expr::y() + Expr::t() * Expr::x().powi(3).unwrap();
        assert!(hierarchy_check(&any).unwrap().derivatives_match);
        assert!(matches!(
            catalog(CatalogId::Hierarchy, &[any]),
            Err(Error::HierarchyCheckFailed(_))
        ));
    }

    #[test]
    fn sl2_constants_are_consistent() {
        let c = sl2_consistency();
        assert_eq!(c.identity_residuals, ["0".to_string(), "0".to_string()]);
        assert_ne!(c.killing_det, "0");
        assert_eq!(c.killing_signature, (2, 1));
        assert_eq!(c.delta, "0");
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(
            "sl3-family".parse::<CatalogId>(),
            Err(Error::UnknownCatalogId(_))
        ));
    }
}
