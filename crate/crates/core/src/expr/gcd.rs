//! Multivariate polynomial gcd over Q.
//!
//! Recursive primitive PRS: content/primitive decomposition with respect to a
//! main symbol, pseudo-remainders for the primitive parts. Fractional exponents
//! are handled by rescaling each symbol to integer exponents first (a symbol
//! `y` with exponents in `(1/L) Z` is treated as the variable `y^(1/L)`).

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use super::poly::{Exponent, Monomial, Poly};
use super::symbol::Symbol;

/// Monic gcd of two polynomials with non-negative exponents.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut scale: BTreeMap<Symbol, i64> = BTreeMap::new();
    for p in [a, b] {
        for (m, _) in p.terms() {
            for &(s, e) in m.factors() {
                let l = scale.entry(s).or_insert(1);
                *l = l.lcm(e.denom());
            }
        }
    }
    let fractional = scale.values().any(|&l| l != 1);
    if !fractional {
        return gcd_rec(a, b).monic();
    }
    let up = |p: &Poly| p.map_exponents(|s, e| e * Exponent::from(scale[&s]));
    let g = gcd_rec(&up(a), &up(b));
    g.map_exponents(|s, e| e / Exponent::from(scale[&s]))
        .monic()
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let gm = ma.gcd(&mb);
    let a = a.mul_monomial(&Monomial::one().div(&ma));
    let b = b.mul_monomial(&Monomial::one().div(&mb));
    let gm_poly = Poly::term(gm, num_rational::BigRational::one());
    if a.is_constant() || b.is_constant() {
        return gm_poly;
    }
    let sa = a.symbols();
    let sb = b.symbols();
    if let Some(&s) = sa.iter().find(|s| !sb.contains(s)) {
        return gcd_rec(&content_in(&a, s), &b).mul(&gm_poly).monic();
    }
    if let Some(&s) = sb.iter().find(|s| !sa.contains(s)) {
        return gcd_rec(&a, &content_in(&b, s)).mul(&gm_poly).monic();
    }
    // main symbol: smallest combined degree keeps the PRS short
    let s = *sa
        .iter()
        .min_by_key(|&&s| a.degree_in(s).max(b.degree_in(s)))
        .expect("non-constant polynomial has a symbol");
    let ca = content_in(&a, s);
    let cb = content_in(&b, s);
    let c = gcd_rec(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(pa, pb, s);
    g.mul(&c).mul(&gm_poly).monic()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `s`.
fn content_in(p: &Poly, s: Symbol) -> Poly {
    let mut g = Poly::zero();
    for (_, c) in p.coefficients_in(s) {
        g = if g.is_zero() {
            c.monic()
        } else {
            gcd_rec(&g, &c)
        };
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn primitive_part(p: &Poly, s: Symbol) -> Poly {
    let c = content_in(p, s);
    p.div_exact(&c).expect("content divides").monic()
}

fn leading_coeff(p: &Poly, s: Symbol) -> (Exponent, Poly) {
    p.coefficients_in(s)
        .into_iter()
        .next_back()
        .expect("nonzero polynomial")
}

fn pseudo_rem(a: &Poly, b: &Poly, s: Symbol) -> Poly {
    let (db, lcb) = leading_coeff(b, s);
    let mut r = a.clone();
    while !r.is_zero() {
        let (dr, lcr) = leading_coeff(&r, s);
        if dr < db {
            break;
        }
        let shift = Monomial::pow(s, dr - db);
        r = r.mul(&lcb).sub(&b.mul(&lcr).mul_monomial(&shift));
    }
    r
}

fn primitive_prs(a: Poly, b: Poly, s: Symbol) -> Poly {
    let (mut a, mut b) = if a.degree_in(s) >= b.degree_in(s) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = pseudo_rem(&a, &b, s);
        if r.is_zero() {
            return primitive_part(&b, s);
        }
        if r.degree_in(s).is_zero() {
            return Poly::one();
        }
        a = b;
        b = primitive_part(&r, s);
    }
}
