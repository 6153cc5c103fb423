use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::poly::{Exponent, Monomial, Poly, Q};
use super::symbol::Symbol;
use super::Expr;

fn fmt_factor(out: &mut String, s: Symbol, e: Exponent) {
    match s {
        Symbol::Exp(v) => {
            if e.is_one() {
                let _ = write!(out, "exp({v})");
            } else {
                let _ = write!(out, "exp({e}*{v})");
            }
        }
        _ => {
            let _ = write!(out, "{s}");
            if e.is_one() {
            } else if e.is_integer() && e.numer() > &0 {
                let _ = write!(out, "^{e}");
            } else {
                let _ = write!(out, "^({e})");
            }
        }
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut out = String::new();
    for (i, &(s, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        fmt_factor(&mut out, s, e);
    }
    out
}

/// Terms in descending monomial order.
pub(super) fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a: Q = c.abs();
        if m.is_one() {
            let _ = write!(out, "{a}");
        } else if a.is_one() {
            out.push_str(&fmt_monomial(m));
        } else {
            let _ = write!(out, "{a}*{}", fmt_monomial(m));
        }
    }
    out
}

pub(super) fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let n = fmt_poly(e.numer());
    if e.denom().is_one() {
        return f.write_str(&n);
    }
    let d = fmt_poly(e.denom());
    let wrap = |s: String, p: &Poly, den: bool| {
        if p.len() == 1 && !s.starts_with('-') && !s.contains('/') && !(den && s.contains('*')) {
            s
        } else {
            format!("({s})")
        }
    };
    write!(
        f,
        "{}/{}",
        wrap(n, e.numer(), false),
        wrap(d, e.denom(), true)
    )
}
