//! Jet coordinates, total derivatives and the modified Manakov-Santini system.
//!
//! Principal coordinates are the `u_σ`, `v_σ` whose multi-index contains both
//! a `t` and an `x`; they are eliminated on the equation. Everything else is
//! internal.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{binom, q, qr, Dep, Expr, JetVar, MultiIndex, Poly, Symbol, Var, Q};

pub const DEFAULT_ORDER_CAP: u32 = 4;

/// Image of a symbol under the total derivative `D_v` (no order check).
pub(crate) fn total_image(sym: Symbol, v: Var) -> Option<Poly> {
    match sym {
        Symbol::Base(w) if w == v => Some(Poly::one()),
        Symbol::Func(name, k) if v == Var::T => Some(Poly::var(Symbol::Func(name, k + 1))),
        Symbol::Jet(j) => Some(Poly::var(Symbol::Jet(j.derive(v)))),
        _ => None,
    }
}

/// `D_v e` without any order bookkeeping.
pub fn total_derivative_raw(e: &Expr, v: Var) -> Expr {
    e.derive(&mut |s| total_image(s, v))
}

/// `D_σ e` without order bookkeeping.
pub fn total_derivative_multi_raw(e: &Expr, sigma: MultiIndex) -> Expr {
    let mut out = e.clone();
    for v in Var::ALL {
        for _ in 0..sigma.count(v) {
            out = total_derivative_raw(&out, v);
        }
    }
    out
}

/// The modified Manakov-Santini system together with its prolongation data.
///
/// The reduced forms of principal coordinates are memoized behind a mutex;
/// results do not depend on the cache state.
pub struct EquationSystem {
    f1: Expr,
    f2: Expr,
    r_u: Expr,
    r_v: Expr,
    order_cap: u32,
    memo: Mutex<HashMap<JetVar, Expr>>,
}

impl std::fmt::Debug for EquationSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EquationSystem")
            .field("order_cap", &self.order_cap)
            .finish()
    }
}

impl Default for EquationSystem {
    fn default() -> Self {
        EquationSystem::new(DEFAULT_ORDER_CAP)
    }
}

impl EquationSystem {
    /// Orders above the default grow expressions quickly; use with care.
    pub fn new(order_cap: u32) -> Self {
        let (u, v) = (Expr::u(0, 0, 0), Expr::v(0, 0, 0));
        let d = |e: &Expr, w: Var| total_derivative_raw(e, w);
        let f1 = d(
            &(Expr::u(1, 0, 0) + &u * Expr::u(0, 0, 1) + &v * Expr::u(0, 1, 0)),
            Var::X,
        ) - d(&Expr::u(0, 0, 1), Var::Y);
        let f2 = d(
            &(Expr::v(1, 0, 0) + &v * Expr::v(0, 1, 0) - &u * Expr::v(0, 0, 1)),
            Var::X,
        ) - d(
            &(Expr::v(0, 0, 1) - (&u * Expr::v(0, 1, 0)).scale(&q(2))),
            Var::Y,
        );
        let r_u = Expr::u(1, 1, 0) - &f1;
        let r_v = Expr::v(1, 1, 0) - &f2;
        debug_assert!(!r_u.symbols().iter().any(is_principal));
        EquationSystem {
            f1,
            f2,
            r_u,
            r_v,
            order_cap,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide instance with the default order cap.
    pub fn shared() -> &'static EquationSystem {
        static SHARED: OnceLock<EquationSystem> = OnceLock::new();
        SHARED.get_or_init(EquationSystem::default)
    }

    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    pub fn f1(&self) -> &Expr {
        &self.f1
    }

    pub fn f2(&self) -> &Expr {
        &self.f2
    }

    /// `(R_u, R_v)` with `u_tx = R_u`, `v_tx = R_v` on the equation.
    pub fn principal_solve(&self) -> (Expr, Expr) {
        (self.r_u.clone(), self.r_v.clone())
    }

    /// `D_v e`, refusing inputs whose order would leave the cap.
    pub fn total_derivative(&self, e: &Expr, v: Var) -> Result<Expr> {
        let order = e.jet_order();
        if order + 1 > self.order_cap {
            return Err(Error::OrderCapExceeded {
                order: order + 1,
                cap: self.order_cap,
            });
        }
        Ok(total_derivative_raw(e, v))
    }

    pub fn total_derivative_multi(&self, e: &Expr, sigma: MultiIndex) -> Result<Expr> {
        let order = e.jet_order() + sigma.order();
        if order > self.order_cap && sigma.order() > 0 {
            return Err(Error::OrderCapExceeded {
                order,
                cap: self.order_cap,
            });
        }
        Ok(total_derivative_multi_raw(e, sigma))
    }

    /// Reduced form of a principal coordinate: free of principal coordinates.
    pub fn principal_value(&self, j: JetVar) -> Result<Expr> {
        debug_assert!(j.is_principal());
        if j.order() > self.order_cap {
            return Err(Error::OrderCapExceeded {
                order: j.order(),
                cap: self.order_cap,
            });
        }
        if let Some(e) = self.memo.lock().expect("memo lock").get(&j) {
            return Ok(e.clone());
        }
        let sigma = j.index;
        let value = if sigma == MultiIndex::new(1, 1, 0) {
            match j.dep {
                Dep::U => self.r_u.clone(),
                Dep::V => self.r_v.clone(),
            }
        } else {
            // parent choice lowers the t-count or keeps it zero, so recursion terminates
            let dir = if sigma.t >= 2 {
                Var::T
            } else if sigma.x >= 2 {
                Var::X
            } else {
                Var::Y
            };
            let parent = JetVar::new(j.dep, sigma.without(dir).expect("direction present"));
            let p = self.principal_value(parent)?;
            self.reduce_unchecked(&total_derivative_raw(&p, dir))?
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(j, value.clone());
        Ok(value)
    }

    fn reduce_unchecked(&self, e: &Expr) -> Result<Expr> {
        let principal: Vec<Symbol> = e.symbols().into_iter().filter(is_principal).collect();
        if principal.is_empty() {
            return Ok(e.clone());
        }
        let mut bindings = BTreeMap::new();
        for s in principal {
            bindings.insert(s, self.principal_value(s.as_jet().expect("jet"))?);
        }
        e.substitute(&bindings)
    }

    /// Restrict `e` to the equation manifold `MS_k`.
    pub fn reduce(&self, e: &Expr, k: u32) -> Result<Expr> {
        if k > self.order_cap {
            return Err(Error::OrderCapExceeded {
                order: k,
                cap: self.order_cap,
            });
        }
        let order = e.jet_order();
        if order > k {
            return Err(Error::OrderCapExceeded { order, cap: k });
        }
        self.reduce_unchecked(e)
    }
}

pub fn is_principal(s: &Symbol) -> bool {
    matches!(s, Symbol::Jet(j) if j.is_principal())
}

/// `(dim J^k, dim MS_k, internal coordinates per dependent variable)`.
pub fn dims(k: u32) -> (u64, u64, u64) {
    let kk = k as u64;
    let j = 3 + 2 * binom(kk + 3, 3);
    let ms = match k {
        0 => 5,
        1 => 11,
        _ => 3 + 2 * (kk + 1) * (kk + 1),
    };
    (j, ms, (kk + 1) * (kk + 1))
}

/// Internal jet coordinates of order at most `k`, `u` before `v`.
pub fn internal_coordinates(k: u32) -> Vec<JetVar> {
    let mut out = Vec::new();
    for dep in Dep::ALL {
        for m in MultiIndex::up_to(k) {
            if !m.is_principal() {
                out.push(JetVar::new(dep, m));
            }
        }
    }
    out
}

/// A point of `MS_k`: base point plus values of the internal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    pub base: [Q; 3],
    pub order: u32,
    values: BTreeMap<JetVar, Q>,
}

impl JetPoint {
    /// All internal coordinates of order `<= k` set to zero, at the origin.
    pub fn zero(k: u32) -> Self {
        JetPoint {
            base: [q(0), q(0), q(0)],
            order: k,
            values: internal_coordinates(k)
                .into_iter()
                .map(|j| (j, q(0)))
                .collect(),
        }
    }

    /// Build from explicit assignments; unspecified internal coordinates are 0.
    /// Assigning a principal coordinate is an error.
    pub fn from_assignments(
        k: u32,
        base: [Q; 3],
        values: impl IntoIterator<Item = (JetVar, Q)>,
    ) -> Result<Self> {
        let mut p = JetPoint::zero(k);
        p.base = base;
        for (j, v) in values {
            if j.is_principal() {
                return Err(Error::PointNotOnEquation(format!(
                    "{j} is a principal coordinate"
                )));
            }
            if j.order() > k {
                return Err(Error::OrderCapExceeded {
                    order: j.order(),
                    cap: k,
                });
            }
            p.values.insert(j, v);
        }
        Ok(p)
    }

    /// Random small rationals for every internal coordinate.
    pub fn random(k: u32, rng: &mut impl Rng) -> Self {
        let mut p = JetPoint::zero(k);
        for c in p.base.iter_mut() {
            *c = random_rational(rng);
        }
        for v in p.values.values_mut() {
            *v = random_rational(rng);
        }
        p
    }

    pub fn set(&mut self, j: JetVar, v: Q) -> Result<()> {
        if j.is_principal() {
            return Err(Error::PointNotOnEquation(format!(
                "{j} is a principal coordinate"
            )));
        }
        if j.order() > self.order {
            return Err(Error::OrderCapExceeded {
                order: j.order(),
                cap: self.order,
            });
        }
        self.values.insert(j, v);
        Ok(())
    }

    pub fn get(&self, j: JetVar) -> Option<&Q> {
        self.values.get(&j)
    }

    pub fn internal_values(&self) -> &BTreeMap<JetVar, Q> {
        &self.values
    }

    /// Symbol lookup for evaluating principal-free expressions.
    pub fn lookup(&self, s: Symbol) -> Option<Q> {
        match s {
            Symbol::Base(v) => Some(self.base[v.index()].clone()),
            Symbol::Jet(j) => self.values.get(&j).cloned(),
            _ => None,
        }
    }

    /// Evaluate an expression after reducing it on the equation.
    pub fn eval(&self, sys: &EquationSystem, e: &Expr) -> Result<Q> {
        let r = sys.reduce_unchecked(e)?;
        let n = r.eval(&|s| self.lookup(s))?;
        Ok(n.value().clone())
    }
}

/// A rational `n/d` with `|n| <= 9`, `1 <= d <= 4`.
pub fn random_rational(rng: &mut impl Rng) -> Q {
    qr(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}
