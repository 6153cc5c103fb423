//! Sparse multivariate (Laurent–Puiseux) polynomials with exact rational
//! coefficients.
//!
//! Monomials carry rational exponents; callers enforce the exponent policy
//! (integer exponents for jet and formal symbols). Terms are kept in a
//! `BTreeMap` under the lexicographic monomial order induced by `Symbol`'s
//! ordering, so iteration order is deterministic and the last entry is the
//! leading term.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::symbol::Symbol;

pub type Q = BigRational;
pub type Exponent = Rational64;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Power product of symbols with nonzero rational exponents, sorted by symbol.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Symbol, Exponent); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Self::pow(s, Exponent::one())
    }

    pub fn pow(s: Symbol, e: Exponent) -> Self {
        let mut m = SmallVec::new();
        if !e.is_zero() {
            m.push((s, e));
        }
        Monomial(m)
    }

    pub fn from_factors(mut f: Vec<(Symbol, Exponent)>) -> Self {
        f.sort_by_key(|a| a.0);
        let mut out: SmallVec<[(Symbol, Exponent); 4]> = SmallVec::new();
        for (s, e) in f {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 += e,
                _ => out.push((s, e)),
            }
        }
        out.retain(|p| !p.1.is_zero());
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, Exponent)] {
        &self.0
    }

    pub fn exponent(&self, s: Symbol) -> Exponent {
        self.0
            .binary_search_by(|p| p.0.cmp(&s))
            .map(|i| self.0[i].1)
            .unwrap_or_else(|_| Exponent::zero())
    }

    fn combine(&self, other: &Monomial, sign: i64) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0, b[j].1 * sign));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1 * sign;
                    if !e.is_zero() {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for p in &b[j..] {
            out.push((p.0, p.1 * sign));
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.combine(other, -1)
    }

    pub fn powi(&self, n: Exponent) -> Monomial {
        if n.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(s, e)| (s, e * n)).collect())
    }

    /// Every exponent non-negative.
    pub fn is_polynomial(&self) -> bool {
        self.0.iter().all(|p| p.1 >= Exponent::zero())
    }

    /// `other` divides `self` with a non-negative quotient.
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        other.0.iter().all(|&(s, e)| self.exponent(s) >= e)
    }

    /// Componentwise minimum of exponents (absent symbols count as zero).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for &(s, e) in &self.0 {
            let m = e.min(other.exponent(s));
            if !m.is_zero() {
                out.push((s, m));
            }
        }
        for &(s, e) in &other.0 {
            if self.exponent(s).is_zero() && e < Exponent::zero() {
                out.push((s, e));
            }
        }
        Monomial::from_factors(out)
    }

    /// Split into the parts with positive and with negative exponents
    /// (the latter returned with flipped sign).
    pub fn split_signs(&self) -> (Monomial, Monomial) {
        let mut pos = SmallVec::new();
        let mut neg = SmallVec::new();
        for &(s, e) in &self.0 {
            if e > Exponent::zero() {
                pos.push((s, e));
            } else {
                neg.push((s, -e));
            }
        }
        (Monomial(pos), Monomial(neg))
    }

    pub fn without(&self, s: Symbol) -> Monomial {
        Monomial(self.0.iter().copied().filter(|p| p.0 != s).collect())
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|p| p.0)
    }
}

impl Ord for Monomial {
    /// Lexicographic order with the smallest `Symbol` most significant.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(p), None) => return p.1.cmp(&Exponent::zero()),
                (None, Some(p)) => return Exponent::zero().cmp(&p.1),
                (Some(p), Some(r)) => match p.0.cmp(&r.0) {
                    Ordering::Less => return p.1.cmp(&Exponent::zero()),
                    Ordering::Greater => return Exponent::zero().cmp(&r.1),
                    Ordering::Equal => {
                        let c = p.1.cmp(&r.1);
                        if c != Ordering::Equal {
                            return c;
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial: monomial -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(s: Symbol) -> Self {
        Self::term(Monomial::var(s), Q::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Q)> {
        self.terms.into_iter()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
            || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn constant_value(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    /// The single term, if this is a monomial times a coefficient.
    pub fn as_term(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some((m, c)) = other.as_term() {
            return self.mul_term(m, c);
        }
        if let Some((m, c)) = self.as_term() {
            return other.mul_term(m, c);
        }
        let mut acc: std::collections::HashMap<Monomial, Q> =
            std::collections::HashMap::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(v) => *v += c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Componentwise minimum exponent over all terms (absent symbols count as zero).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.terms.keys().flat_map(|m| m.symbols()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|m| !m.exponent(s).is_zero())
    }

    pub fn has_nonpolynomial_exponents(&self) -> bool {
        self.terms.keys().any(|m| !m.is_polynomial())
    }

    /// Least common denominator of the coefficients, as a positive integer.
    pub fn coeff_denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of the coefficient numerators after clearing denominators.
    pub fn integer_content(&self) -> Q {
        let l = self.coeff_denominator_lcm();
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = (c * Q::from_integer(l.clone())).to_integer();
            g = g.gcd(&n);
        }
        if g.is_zero() {
            return Q::one();
        }
        Q::new(g, l)
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => Poly::zero(),
        }
    }

    /// Apply a derivation given the images of symbols. `image(s)` returns the
    /// derivative of the symbol `s` (for `Exp(v)` the image of `Base(v)` is
    /// used through the chain rule, so `image` is never asked for `Exp`).
    pub fn derive(&self, image: &mut dyn FnMut(Symbol) -> Option<Poly>) -> Poly {
        let mut cache: BTreeMap<Symbol, Option<Poly>> = BTreeMap::new();
        let mut lookup =
            |s: Symbol| -> Option<Poly> { cache.entry(s).or_insert_with(|| image(s)).clone() };
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for &(s, e) in m.factors() {
                match s {
                    Symbol::Exp(v) => {
                        if let Some(dv) = lookup(Symbol::Base(v)) {
                            let coef =
                                c * Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
                            out.add_assign(&dv.mul_term(m, &coef));
                        }
                    }
                    _ => {
                        if let Some(ds) = lookup(s) {
                            if ds.is_zero() {
                                continue;
                            }
                            let coef =
                                c * Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
                            let reduced = m.div(&Monomial::var(s));
                            out.add_assign(&ds.mul_term(&reduced, &coef));
                        }
                    }
                }
            }
        }
        out
    }

    /// Highest exponent of `s` (zero if absent).
    pub fn degree_in(&self, s: Symbol) -> Exponent {
        self.terms
            .keys()
            .map(|m| m.exponent(s))
            .max()
            .unwrap_or_else(Exponent::zero)
    }

    /// Coefficients with respect to `s`: exponent -> polynomial in the other symbols.
    pub fn coefficients_in(&self, s: Symbol) -> BTreeMap<Exponent, Poly> {
        let mut out: BTreeMap<Exponent, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            out.entry(e).or_default().add_term(m.without(s), c.clone());
        }
        out
    }

    /// Exact division, `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some((m, c)) = divisor.as_term() {
            let q = self.mul_term(&Monomial::one().div(m), &c.recip());
            return q.terms.keys().all(Monomial::is_polynomial).then_some(q);
        }
        let (lm, lc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !rm.divisible_by(&lm) {
                return None;
            }
            let tm = rm.div(&lm);
            let tc = &rc / &lc;
            rem = rem.sub(&divisor.mul_term(&tm, &tc));
            quot.add_term(tm, tc);
        }
        Some(quot)
    }

    pub fn map_exponents(&self, f: impl Fn(Symbol, Exponent) -> Exponent) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            (
                Monomial::from_factors(m.factors().iter().map(|&(s, e)| (s, f(s, e))).collect()),
                c.clone(),
            )
        }))
    }

    /// Sign of the leading coefficient.
    pub fn leading_sign(&self) -> i32 {
        match self.leading() {
            Some((_, c)) if c.is_negative() => -1,
            Some(_) => 1,
            None => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::symbol::JetVar;

    fn ux() -> Poly {
        Poly::var(Symbol::Jet(JetVar::u(0, 1, 0)))
    }

    #[test]
    fn lex_order_is_multiplicative() {
        let a = Monomial::from_factors(vec![(Symbol::T, Exponent::from(2))]);
        let b = Monomial::from_factors(vec![(Symbol::X, Exponent::from(5))]);
        let c = Monomial::from_factors(vec![(Symbol::Y, Exponent::new(1, 3))]);
        assert!(a > b);
        assert!(a.mul(&c) > b.mul(&c));
        assert!(Monomial::one() < c);
    }

    #[test]
    fn exact_division() {
        let p = ux().mul(&ux()).sub(&Poly::one());
        let d = ux().sub(&Poly::one());
        let qt = p.div_exact(&d).unwrap();
        assert_eq!(qt, ux().add(&Poly::one()));
        assert!(ux().div_exact(&d).is_none());
    }

    #[test]
    fn monomial_content_min() {
        let y = Symbol::Y;
        let p = Poly::term(Monomial::pow(y, Exponent::new(2, 3)), q(1))
            .add(&Poly::term(Monomial::pow(y, Exponent::new(-1, 3)), q(2)));
        assert_eq!(p.monomial_content(), Monomial::pow(y, Exponent::new(-1, 3)));
    }
}
