//! Closed-form sections `(u, v)` of `E -> M`, optionally given through a chart.

use std::collections::BTreeMap;

use num_traits::Signed;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, MultiIndex, Number, Symbol, Var, Q};
use crate::jet::{random_rational, EquationSystem};
use crate::linalg::{inverse3, Mat3};

/// A parametrization `x̄ = Φ(x)` of the base: the section is given in the
/// source coordinates `x` while derivatives are taken in `x̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    /// `t̄, x̄, ȳ` as expressions in the source `t, x, y`.
    pub map: [Expr; 3],
    /// `inv_jac[i][a] = ∂x^i / ∂x̄^a`.
    pub inv_jac: Mat3,
}

impl Chart {
    pub fn new(map: [Expr; 3]) -> Result<Self> {
        let jac: Mat3 = std::array::from_fn(|a| {
            std::array::from_fn(|i| map[a].partial_var(Var::from_index(i)))
        });
        let inv = inverse3(&jac)
            .map_err(|_| Error::NonInvertibleElement("point map has singular Jacobian".into()))?;
        Ok(Chart { map, inv_jac: inv })
    }
}

/// Positivity constraints (in source coordinates) describing the domain.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Domain {
    pub positive: Vec<Expr>,
    pub note: String,
}

impl Domain {
    pub fn everywhere() -> Self {
        Domain {
            positive: Vec::new(),
            note: "R^3".into(),
        }
    }

    pub fn y_positive() -> Self {
        Domain {
            positive: vec![Expr::y()],
            note: "y > 0".into(),
        }
    }

    pub fn contains(&self, pt: &[Q; 3]) -> Result<bool> {
        for p in &self.positive {
            let v = p.eval(&|s| base_lookup(pt, s))?;
            if !v.value().is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn base_lookup(pt: &[Q; 3], s: Symbol) -> Option<Q> {
    match s {
        Symbol::Base(v) => Some(pt[v.index()].clone()),
        _ => None,
    }
}

/// Highest derivative of a formal function bound by [`Solution::random_formal`].
pub const FORMAL_ORDER: u8 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub u: Expr,
    pub v: Expr,
    pub chart: Option<Chart>,
    pub domain: Domain,
    pub provenance: String,
}

impl Solution {
    /// Build and verify that the section satisfies the equation.
    pub fn new(u: Expr, v: Expr, domain: Domain, provenance: impl Into<String>) -> Result<Self> {
        let s = Solution::unchecked(u, v, domain, provenance)?;
        s.verify()?;
        Ok(s)
    }

    /// Build without the equation check (for negative controls).
    pub fn unchecked(
        u: Expr,
        v: Expr,
        domain: Domain,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        for e in [&u, &v] {
            if e.has_jets() {
                return Err(Error::InvalidArgument(format!(
                    "section component `{e}` involves jet variables"
                )));
            }
        }
        Ok(Solution {
            u,
            v,
            chart: None,
            domain,
            provenance: provenance.into(),
        })
    }

    /// Derivative along the coordinate `a` of the (possibly charted) base.
    pub fn d(&self, e: &Expr, a: Var) -> Expr {
        match &self.chart {
            None => e.partial_var(a),
            Some(c) => {
                let mut out = Expr::zero();
                for i in 0..3 {
                    let w = &c.inv_jac[i][a.index()];
                    if !w.is_zero() {
                        out = out + w * e.partial_var(Var::from_index(i));
                    }
                }
                out
            }
        }
    }

    /// The jet coordinate `j` evaluated on the section.
    pub fn jet(&self, j: JetVar) -> Expr {
        let mut e = match j.dep {
            crate::expr::Dep::U => self.u.clone(),
            crate::expr::Dep::V => self.v.clone(),
        };
        for v in Var::ALL {
            for _ in 0..j.index.count(v) {
                e = self.d(&e, v);
            }
        }
        e
    }

    /// Replace jet symbols by their values on the section and base symbols by
    /// the chart (when present).
    pub fn substitute_jets(&self, e: &Expr) -> Result<Expr> {
        let mut bindings = BTreeMap::new();
        for s in e.symbols() {
            match s {
                Symbol::Jet(j) => {
                    bindings.insert(s, self.jet(j));
                }
                Symbol::Base(v) => {
                    if let Some(c) = &self.chart {
                        bindings.insert(s, c.map[v.index()].clone());
                    }
                }
                Symbol::Exp(v) => {
                    if let Some(c) = &self.chart {
                        bindings.insert(Symbol::Base(v), c.map[v.index()].clone());
                    }
                }
                Symbol::Func(..) => {}
            }
        }
        if bindings.is_empty() {
            return Ok(e.clone());
        }
        e.substitute(&bindings)
    }

    /// `(F1, F2)` evaluated on the section.
    pub fn ms_residuals(&self) -> Result<(Expr, Expr)> {
        let sys = EquationSystem::shared();
        Ok((
            self.substitute_jets(sys.f1())?,
            self.substitute_jets(sys.f2())?,
        ))
    }

    pub fn verify(&self) -> Result<()> {
        let (r1, r2) = self.ms_residuals()?;
        if r1.is_zero() && r2.is_zero() {
            Ok(())
        } else {
            Err(Error::NotASolution(format!("F1 = {r1}, F2 = {r2}")))
        }
    }

    /// Base point in the coordinates in which the section is written.
    pub fn image_point(&self, pt: &[Q; 3]) -> Result<[Q; 3]> {
        match &self.chart {
            None => Ok(pt.clone()),
            Some(c) => {
                let mut out = pt.clone();
                for (o, m) in out.iter_mut().zip(&c.map) {
                    *o = m.eval(&|s| base_lookup(pt, s))?.value().clone();
                }
                Ok(out)
            }
        }
    }

    /// Evaluate an expression (already free of jets) at a source point.
    pub fn eval_at(&self, e: &Expr, pt: &[Q; 3], formal: &BTreeMap<Symbol, Q>) -> Result<Number> {
        if !self.domain.contains(pt)? {
            return Err(Error::DomainViolation(format!(
                "({}, {}, {}) outside {}",
                pt[0], pt[1], pt[2], self.domain.note
            )));
        }
        e.eval(&|s| match s {
            Symbol::Base(v) => Some(pt[v.index()].clone()),
            _ => formal.get(&s).cloned(),
        })
    }

    /// Substitute the section's jets into `e` and evaluate at `pt`.
    pub fn eval_jet_expr(
        &self,
        e: &Expr,
        pt: &[Q; 3],
        formal: &BTreeMap<Symbol, Q>,
    ) -> Result<Number> {
        let s = self.substitute_jets(e)?;
        self.eval_at(&s, pt, formal)
    }

    /// Jet of order `k` at a point, as exact or approximate values.
    pub fn jet_values(
        &self,
        k: u32,
        pt: &[Q; 3],
        formal: &BTreeMap<Symbol, Q>,
    ) -> Result<BTreeMap<JetVar, Number>> {
        let mut out = BTreeMap::new();
        for dep in crate::expr::Dep::ALL {
            for m in MultiIndex::up_to(k) {
                let j = JetVar::new(dep, m);
                out.insert(j, self.eval_at(&self.jet(j), pt, formal)?);
            }
        }
        Ok(out)
    }

    /// Names of the formal functions of `t` in the section.
    pub fn formal_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for e in [&self.u, &self.v] {
            for s in e.symbols() {
                if let Symbol::Func(n, _) = s {
                    if !names.iter().any(|m| m == n.as_str()) {
                        names.push(n.as_str().to_string());
                    }
                }
            }
        }
        names
    }

    /// Random values for the formal functions and their first derivatives.
    pub fn random_formal(&self, rng: &mut impl Rng) -> BTreeMap<Symbol, Q> {
        let mut out = BTreeMap::new();
        for n in self.formal_names() {
            for k in 0..=FORMAL_ORDER {
                out.insert(Symbol::func(&n, k), random_rational(rng));
            }
        }
        out
    }

    /// Random rational points inside the domain.
    pub fn random_points(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<[Q; 3]>> {
        let mut out = Vec::with_capacity(n);
        let mut tries = 0;
        while out.len() < n {
            tries += 1;
            if tries > 100 * n + 100 {
                return Err(Error::DomainViolation(format!(
                    "no sample points found in {}",
                    self.domain.note
                )));
            }
            let pt = [
                random_rational(rng),
                random_rational(rng),
                random_rational(rng),
            ];
            if self.domain.contains(&pt)? {
                out.push(pt);
            }
        }
        Ok(out)
    }

    /// Replace formal functions by closed forms in `t`.
    pub fn with_functions(&self, closed: &BTreeMap<String, Expr>) -> Result<Solution> {
        let resolve = |e: &Expr| resolve_functions(e, closed);
        let mut s = self.clone();
        s.u = resolve(&self.u)?;
        s.v = resolve(&self.v)?;
        if let Some(c) = &mut s.chart {
            for m in c.map.iter_mut() {
                *m = resolve(m)?;
            }
            for row in c.inv_jac.iter_mut() {
                for x in row.iter_mut() {
                    *x = resolve(x)?;
                }
            }
        }
        Ok(s)
    }
}

/// Substitute `name^{(k)}(t) -> d^k/dt^k closed[name]`.
pub fn resolve_functions(e: &Expr, closed: &BTreeMap<String, Expr>) -> Result<Expr> {
    let mut bindings = BTreeMap::new();
    for s in e.symbols() {
        if let Symbol::Func(name, k) = s {
            if let Some(c) = closed.get(name.as_str()) {
                let mut d = c.clone();
                for _ in 0..k {
                    d = d.partial_var(Var::T);
                }
                bindings.insert(s, d);
            }
        }
    }
    if bindings.is_empty() {
        Ok(e.clone())
    } else {
        e.substitute(&bindings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{q, Exponent};

    #[test]
    fn exponential_solution_is_verified() {
        let u = Expr::x() + Expr::exp_atom(Var::Y, Exponent::from(1));
        let s = Solution::new(u, Expr::zero(), Domain::everywhere(), "test").unwrap();
        assert_eq!(
            s.jet(JetVar::u(0, 0, 2)),
            Expr::exp_atom(Var::Y, Exponent::from(1))
        );
    }

    #[test]
    fn non_solution_is_rejected() {
        let r = Solution::new(
            Expr::x(),
            Expr::x() * Expr::x(),
            Domain::everywhere(),
            "bad",
        );
        assert!(matches!(r, Err(Error::NotASolution(_))));
    }

    #[test]
    fn resolving_functions() {
        let e = Expr::func("f", 1) * Expr::y();
        let mut closed = BTreeMap::new();
        closed.insert("f".to_string(), Expr::t() * Expr::t());
        assert_eq!(
            resolve_functions(&e, &closed).unwrap(),
            Expr::t().scale(&q(2)) * Expr::y()
        );
    }
}
