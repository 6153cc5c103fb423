//! Exact symbolic kernel.
//!
//! An [`Expr`] is a rational function `num / den` over [`Symbol`]s in
//! canonical form:
//!
//! * `num` and `den` have non-negative exponents and `gcd(num, den) = 1`;
//! * `den` is monic with respect to the lexicographic monomial order;
//! * zero is `0 / 1`.
//!
//! Equality of expressions is equality of canonical forms, so `is_zero` is an
//! exact test. Base symbols `t, x, y` and exponential atoms may carry rational
//! exponents; jet coordinates and formal functions carry integer exponents.

mod eval;
mod gcd;
pub mod poly;
mod print;
pub mod symbol;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use eval::{
    exp_approx, nth_root_approx, precision_bits, set_precision_bits, Number, DEFAULT_PRECISION_BITS,
};
pub use gcd::poly_gcd;
pub use poly::{q, qr, Exponent, Monomial, Poly, Q};
pub use symbol::{binom, Dep, FnName, JetVar, MultiIndex, Symbol, Var};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
struct Parts {
    num: Poly,
    den: Poly,
}

/// Canonical exact rational expression. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Expr(Arc<Parts>);

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn constant(c: Q) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(q(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::constant(qr(n, d))
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::from_poly(Poly::var(s))
    }

    pub fn var(v: Var) -> Self {
        Expr::symbol(Symbol::Base(v))
    }

    pub fn t() -> Self {
        Expr::var(Var::T)
    }

    pub fn x() -> Self {
        Expr::var(Var::X)
    }

    pub fn y() -> Self {
        Expr::var(Var::Y)
    }

    pub fn jet(j: JetVar) -> Self {
        Expr::symbol(Symbol::Jet(j))
    }

    /// Shorthand `u_{t^a x^b y^c}`.
    pub fn u(a: u8, b: u8, c: u8) -> Self {
        Expr::jet(JetVar::u(a, b, c))
    }

    pub fn v(a: u8, b: u8, c: u8) -> Self {
        Expr::jet(JetVar::v(a, b, c))
    }

    /// Formal function `name^{(order)}(t)`.
    pub fn func(name: &str, order: u8) -> Self {
        Expr::symbol(Symbol::func(name, order))
    }

    /// `e^{k v}` for rational `k`.
    pub fn exp_atom(v: Var, k: Exponent) -> Self {
        Expr::from_poly(Poly::term(Monomial::pow(Symbol::Exp(v), k), Q::one()))
    }

    /// `v^k` for a base variable and rational `k`.
    pub fn base_pow(v: Var, k: Exponent) -> Self {
        Expr::from_monomial(Monomial::pow(Symbol::Base(v), k), Q::one())
    }

    /// A single (possibly Laurent) monomial times a coefficient.
    pub fn from_monomial(m: Monomial, c: Q) -> Self {
        let (pos, neg) = m.split_signs();
        Expr(Arc::new(Parts {
            num: Poly::term(pos, c),
            den: Poly::term(neg, Q::one()),
        }))
    }

    /// A polynomial, possibly with negative exponents.
    pub fn from_poly(p: Poly) -> Self {
        if p.has_nonpolynomial_exponents() {
            return Expr::from_parts(p, Poly::one()).expect("nonzero denominator");
        }
        Expr(Arc::new(Parts {
            num: p,
            den: Poly::one(),
        }))
    }

    /// Canonicalize `num / den`.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        let mn = num.monomial_content();
        let md = den.monomial_content();
        let mut n1 = num.mul_monomial(&Monomial::one().div(&mn));
        let mut d1 = den.mul_monomial(&Monomial::one().div(&md));
        let (pos, neg) = mn.div(&md).split_signs();
        if !d1.is_constant() && !n1.is_constant() {
            let g = poly_gcd(&n1, &d1);
            if !g.is_one() {
                n1 = n1.div_exact(&g).expect("gcd divides numerator");
                d1 = d1.div_exact(&g).expect("gcd divides denominator");
            }
        }
        let mut num = n1.mul_monomial(&pos);
        let mut den = d1.mul_monomial(&neg);
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(Expr(Arc::new(Parts { num, den })))
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom(&self) -> &Poly {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_one() && self.0.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.0.den.is_one() {
            self.0.num.constant_value()
        } else {
            None
        }
    }

    /// Number of terms in numerator plus denominator; a size measure.
    pub fn size(&self) -> usize {
        self.0.num.len() + self.0.den.len()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut s = self.0.num.symbols();
        s.extend(self.0.den.symbols());
        s.sort();
        s.dedup();
        s
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.num.contains(s) || self.0.den.contains(s)
    }

    /// Highest jet order present (0 when no jet symbol occurs).
    pub fn jet_order(&self) -> u32 {
        self.symbols()
            .into_iter()
            .filter_map(Symbol::jet_order)
            .max()
            .unwrap_or(0)
    }

    pub fn has_jets(&self) -> bool {
        self.symbols().iter().any(|s| matches!(s, Symbol::Jet(_)))
    }

    /// Depends on `t` (and formal functions / `exp(t)`) only.
    pub fn depends_on_t_only(&self) -> bool {
        self.symbols().iter().all(|s| {
            matches!(
                s,
                Symbol::Base(Var::T) | Symbol::Exp(Var::T) | Symbol::Func(..)
            )
        })
    }

    pub fn checked_add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        if a.den == b.den {
            return Expr::from_parts(a.num.add(&b.num), a.den.clone()).expect("nonzero");
        }
        if let (Some((ma, _)), Some((mb, _))) = (a.den.as_term(), b.den.as_term()) {
            // monic monomial denominators: lcm is the componentwise max
            let l = ma.mul(mb).div(&ma.gcd(mb));
            let fa = l.div(ma);
            let fb = l.div(mb);
            let num = a.num.mul_monomial(&fa).add(&b.num.mul_monomial(&fb));
            return Expr::from_parts(num, Poly::term(l, Q::one())).expect("nonzero");
        }
        let g = poly_gcd(&a.den, &b.den);
        let da = a.den.div_exact(&g).expect("gcd divides");
        let db = b.den.div_exact(&g).expect("gcd divides");
        let num = a.num.mul(&db).add(&b.num.mul(&da));
        Expr::from_parts(num, da.mul(&b.den)).expect("nonzero")
    }

    pub fn checked_mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let (a, b) = (&self.0, &other.0);
        if a.den.is_one() && b.den.is_one() {
            return Expr::from_poly(a.num.mul(&b.num));
        }
        Expr::from_parts(a.num.mul(&b.num), a.den.mul(&b.den)).expect("nonzero")
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (a, b) = (&self.0, &other.0);
        Expr::from_parts(a.num.mul(&b.den), a.den.mul(&b.num))
    }

    pub fn recip(&self) -> Result<Expr> {
        Expr::one().checked_div(self)
    }

    pub fn scale(&self, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr(Arc::new(Parts {
            num: self.0.num.scale(c),
            den: self.0.den.clone(),
        }))
    }

    pub fn powi(&self, n: i64) -> Result<Expr> {
        if n == 0 {
            return Ok(Expr::one());
        }
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let n = n as u32;
        let (a, _) = (&self.0, ());
        Ok(Expr(Arc::new(Parts {
            num: a.num.pow(n),
            den: a.den.pow(n),
        })))
    }

    /// Rational power. Integer exponents work on any expression; fractional
    /// exponents only on a monomial in symbols admitting them, with a
    /// coefficient whose root is rational.
    pub fn pow(&self, k: Exponent) -> Result<Expr> {
        if k.is_integer() {
            return self.powi(*k.numer());
        }
        let (nm, nc) = self
            .0
            .num
            .as_term()
            .ok_or_else(|| Error::NonRepresentable(format!("({self})^({k})")))?;
        let (dm, dc) = self.0.den.as_term().expect("monic denominator");
        let m = nm.div(dm);
        if !m.factors().iter().all(|(s, _)| s.allows_fractional()) {
            return Err(Error::NonRepresentable(format!(
                "({self})^({k}): fractional power of jet or formal symbol"
            )));
        }
        let c = nc / dc;
        let root = rational_power(&c, k)
            .ok_or_else(|| Error::NonRepresentable(format!("({c})^({k}) is irrational")))?;
        Ok(Expr::from_monomial(m.powi(k), root))
    }

    /// Apply a derivation given images of the symbols (see [`Poly::derive`]).
    pub fn derive(&self, image: &mut dyn FnMut(Symbol) -> Option<Poly>) -> Expr {
        let (n, d) = (&self.0.num, &self.0.den);
        let dn = n.derive(image);
        if d.is_constant() {
            return Expr::from_parts(dn, d.clone()).expect("nonzero");
        }
        let dd = d.derive(image);
        if dd.is_zero() {
            return Expr::from_parts(dn, d.clone()).expect("nonzero");
        }
        let num = dn.mul(d).sub(&n.mul(&dd));
        Expr::from_parts(num, d.mul(d)).expect("nonzero")
    }

    /// Partial derivative with respect to a symbol. `t`-derivatives act on
    /// formal functions (`f -> f'`) and on `exp(t)` atoms; `exp` atoms of the
    /// differentiated base variable follow `d/dv e^{kv} = k e^{kv}`.
    pub fn partial(&self, s: Symbol) -> Expr {
        self.derive(&mut |sym| partial_image(sym, s))
    }

    pub fn partial_var(&self, v: Var) -> Expr {
        self.partial(Symbol::Base(v))
    }

    /// Simultaneous substitution `s -> bindings[s]`, then canonicalize.
    ///
    /// Binding `Base(v)` also rewrites `exp(k v)` atoms, which requires the
    /// image to be a rational multiple of a single base variable.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
        let n = substitute_poly(&self.0.num, bindings)?;
        let d = substitute_poly(&self.0.den, bindings)?;
        if d.is_zero() {
            return Err(Error::SubstitutionZeroDenominator);
        }
        n.checked_div(&d)
            .map_err(|_| Error::SubstitutionZeroDenominator)
    }

    pub fn substitute_one(&self, s: Symbol, value: &Expr) -> Result<Expr> {
        let mut b = BTreeMap::new();
        b.insert(s, value.clone());
        self.substitute(&b)
    }

    /// Exact (or high-precision) value at a point.
    pub fn eval(&self, lookup: &dyn Fn(Symbol) -> Option<Q>) -> Result<Number> {
        eval::eval_expr(self, lookup)
    }

    /// Canonical text form, parseable by the expression DSL.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// `c^k` if rational.
pub fn rational_power(c: &Q, k: Exponent) -> Option<Q> {
    let p = *k.numer();
    let r = *k.denom();
    if c.is_zero() {
        return (p > 0).then(Q::zero);
    }
    if c.is_negative() && r % 2 == 0 {
        return None;
    }
    let base = if p >= 0 { c.clone() } else { c.recip() };
    let powed = num_traits::pow(base, p.unsigned_abs() as usize);
    let n = exact_root(powed.numer(), r as u32)?;
    let d = exact_root(powed.denom(), r as u32)?;
    Some(Q::new(n, d))
}

fn exact_root(n: &BigInt, r: u32) -> Option<BigInt> {
    if r == 1 {
        return Some(n.clone());
    }
    let root = if n.is_negative() {
        -(-n).nth_root(r)
    } else {
        n.nth_root(r)
    };
    (num_traits::pow(root.clone(), r as usize) == *n).then_some(root)
}

fn partial_image(sym: Symbol, wrt: Symbol) -> Option<Poly> {
    if sym == wrt {
        return Some(Poly::one());
    }
    match (sym, wrt) {
        (Symbol::Func(name, k), Symbol::Base(Var::T)) => Some(Poly::var(Symbol::Func(name, k + 1))),
        _ => None,
    }
}

fn substitute_poly(p: &Poly, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
    let mut power_cache: BTreeMap<(Symbol, Exponent), Expr> = BTreeMap::new();
    // group terms by the denominator of their value to avoid repeated gcds
    let mut groups: Vec<(Poly, Poly)> = Vec::new();
    for (m, c) in p.terms() {
        let mut rest = Vec::new();
        let mut value = Expr::constant(c.clone());
        for &(s, e) in m.factors() {
            let image = match s {
                Symbol::Exp(v) => match bindings.get(&Symbol::Base(v)) {
                    Some(img) => Some(exp_of_image(img, e)?),
                    None => None,
                },
                _ => match bindings.get(&s) {
                    Some(img) => {
                        let key = (s, e);
                        if let Some(v) = power_cache.get(&key) {
                            Some(v.clone())
                        } else {
                            let pw = img.pow(e).map_err(|err| match err {
                                Error::DivisionByZero => Error::SubstitutionZeroDenominator,
                                other => other,
                            })?;
                            power_cache.insert(key, pw.clone());
                            Some(pw)
                        }
                    }
                    None => None,
                },
            };
            match image {
                Some(img) => value = value.checked_mul(&img),
                None => rest.push((s, e)),
            }
        }
        if value.is_zero() {
            continue;
        }
        let value = value.checked_mul(&Expr::from_monomial(Monomial::from_factors(rest), Q::one()));
        match groups.iter_mut().find(|(d, _)| *d == value.0.den) {
            Some((_, n)) => n.add_assign(&value.0.num),
            None => groups.push((value.0.den.clone(), value.0.num.clone())),
        }
    }
    let mut total = Expr::zero();
    for (d, n) in groups {
        total = total.checked_add(&Expr::from_parts(n, d)?);
    }
    Ok(total)
}

fn exp_of_image(img: &Expr, e: Exponent) -> Result<Expr> {
    if img.is_zero() {
        return Ok(Expr::one());
    }
    if let (Some((m, c)), true) = (img.numer().as_term(), img.is_polynomial()) {
        if let [(Symbol::Base(w), k)] = m.factors() {
            if k.is_one() {
                let kc = c * Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
                let kk = Exponent::new(
                    kc.numer()
                        .to_i64()
                        .ok_or_else(|| Error::NonRepresentable("exp coefficient".into()))?,
                    kc.denom()
                        .to_i64()
                        .ok_or_else(|| Error::NonRepresentable("exp coefficient".into()))?,
                );
                return Ok(Expr::exp_atom(*w, kk));
            }
        }
    }
    Err(Error::NonRepresentable(format!("exp({e}*({img}))")))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::fmt_expr(self, f)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $imp(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $imp(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $imp(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $imp(self, &rhs)
            }
        }
    };
}

fn add_impl(a: &Expr, b: &Expr) -> Expr {
    a.checked_add(b)
}
fn sub_impl(a: &Expr, b: &Expr) -> Expr {
    a.checked_add(&-b)
}
fn mul_impl(a: &Expr, b: &Expr) -> Expr {
    a.checked_mul(b)
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);

impl std::ops::Div<&Expr> for &Expr {
    type Output = Expr;
    /// Panics on division by the zero expression; use [`Expr::checked_div`]
    /// when the divisor may vanish.
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs)
            .expect("division by the zero expression")
    }
}

impl std::ops::Div<Expr> for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(Parts {
            num: self.0.num.neg(),
            den: self.0.den.clone(),
        }))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation() {
        let e = (Expr::u(0, 1, 0) + Expr::v(0, 1, 0)) - Expr::v(0, 1, 0);
        assert_eq!(e, Expr::u(0, 1, 0));
    }

    #[test]
    fn factor_cancellation() {
        let ux = Expr::u(0, 1, 0);
        let uxy = Expr::u(0, 1, 1);
        let e = (&ux * &ux - &uxy * &uxy)
            .checked_div(&(&ux - &uxy))
            .unwrap();
        assert_eq!(e, ux + uxy);
    }

    #[test]
    fn exponent_addition() {
        let a = Expr::base_pow(Var::Y, Exponent::new(2, 3));
        let b = Expr::base_pow(Var::Y, Exponent::new(1, 3));
        assert_eq!(a * b, Expr::y());
    }

    #[test]
    fn division_by_zero_is_error() {
        assert_eq!(
            Expr::one().checked_div(&Expr::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn partial_examples() {
        let e = Expr::u(0, 1, 0) * Expr::v(0, 0, 0);
        assert_eq!(e.partial(Symbol::Jet(JetVar::v(0, 0, 0))), Expr::u(0, 1, 0));
        let a = Expr::func("a", 0) * Expr::x();
        assert_eq!(a.partial_var(Var::T), Expr::func("a", 1) * Expr::x());
        let y23 = Expr::base_pow(Var::Y, Exponent::new(2, 3));
        assert_eq!(
            y23.partial_var(Var::Y),
            Expr::base_pow(Var::Y, Exponent::new(-1, 3)).scale(&qr(2, 3))
        );
        let ey = Expr::exp_atom(Var::Y, Exponent::new(-2, 1));
        assert_eq!(ey.partial_var(Var::Y), ey.scale(&q(-2)));
        assert!(Expr::func("a", 0).partial_var(Var::X).is_zero());
    }

    #[test]
    fn substitution_examples() {
        let ux = Symbol::Jet(JetVar::u(0, 1, 0));
        let e = Expr::symbol(ux).powi(2).unwrap();
        let r = e.substitute_one(ux, &(Expr::one() + Expr::y())).unwrap();
        assert_eq!(
            r,
            Expr::one() + Expr::y().scale(&q(2)) + Expr::y() * Expr::y()
        );
        let inv = Expr::symbol(ux).recip().unwrap();
        assert_eq!(
            inv.substitute_one(ux, &Expr::zero()),
            Err(Error::SubstitutionZeroDenominator)
        );
    }

    #[test]
    fn fractional_power_of_sum_is_rejected() {
        let e = Expr::y() + Expr::one();
        assert!(matches!(
            e.pow(Exponent::new(1, 2)),
            Err(Error::NonRepresentable(_))
        ));
        let m = Expr::y().scale(&q(4));
        assert_eq!(
            m.pow(Exponent::new(1, 2)).unwrap(),
            Expr::base_pow(Var::Y, Exponent::new(1, 2)).scale(&q(2))
        );
    }

    #[test]
    fn denominators_are_monic() {
        let e = Expr::one()
            .checked_div(&(Expr::x().scale(&q(3)) + Expr::one()))
            .unwrap();
        assert!(e.denom().leading().unwrap().1.is_one());
    }
}
