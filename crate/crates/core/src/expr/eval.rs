//! Point evaluation.
//!
//! Values stay exact rationals until an irrational atom (a non-rational root
//! or a non-trivial exponential) is met; from then on they are dyadic
//! approximations carried at [`precision_bits`] significant bits.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Exponent, Poly, Q};
use super::symbol::Symbol;
use super::{rational_power, Expr};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 160;
pub const MIN_PRECISION_BITS: u32 = 64;

static BITS: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_BITS);

/// Significant bits kept by approximate evaluation.
pub fn precision_bits() -> u32 {
    BITS.load(Ordering::Relaxed)
}

/// Set the working precision for approximate evaluation (process-wide).
pub fn set_precision_bits(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION_BITS {
        return Err(Error::InvalidArgument(format!(
            "precision must be at least {MIN_PRECISION_BITS} bits"
        )));
    }
    BITS.store(bits, Ordering::Relaxed);
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Q),
    Approx(Q),
}

impl Number {
    pub fn value(&self) -> &Q {
        match self {
            Number::Exact(q) | Number::Approx(q) => q,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64().unwrap_or(f64::NAN)
    }

    /// Exact zero, or an approximation within `2^-(bits/2)` at the working precision of zero
    /// relative to `scale`.
    pub fn is_zero_rel(&self, scale: &Q) -> bool {
        match self {
            Number::Exact(q) => q.is_zero(),
            Number::Approx(q) => {
                let tol = Q::new(BigInt::one(), BigInt::one() << (precision_bits() / 2));
                q.abs() <= tol * (Q::one() + scale.abs())
            }
        }
    }

    fn combine(a: &Number, b: &Number, v: Q) -> Number {
        if a.is_exact() && b.is_exact() {
            Number::Exact(v)
        } else {
            Number::Approx(round(&v, precision_bits()))
        }
    }

    pub fn add(&self, o: &Number) -> Number {
        Number::combine(self, o, self.value() + o.value())
    }

    pub fn sub(&self, o: &Number) -> Number {
        Number::combine(self, o, self.value() - o.value())
    }

    pub fn mul(&self, o: &Number) -> Number {
        Number::combine(self, o, self.value() * o.value())
    }

    pub fn div(&self, o: &Number) -> Result<Number> {
        if o.value().is_zero() {
            return Err(Error::PoleAtPoint);
        }
        Ok(Number::combine(self, o, self.value() / o.value()))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) => write!(f, "{q}"),
            Number::Approx(q) => write!(f, "~{}", decimal(q, 30)),
        }
    }
}

/// Decimal rendering with `digits` fractional digits.
pub fn decimal(q: &Q, digits: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale + a.denom() / 2) / a.denom();
    let int = &scaled / &scale;
    let frac = &scaled % &scale;
    let mut s = format!(
        "{}{}.{:0>width$}",
        if neg { "-" } else { "" },
        int,
        frac,
        width = digits
    );
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

/// Round to `bits` significant binary digits.
pub fn round(v: &Q, bits: u32) -> Q {
    if v.is_zero() {
        return Q::zero();
    }
    let m = v.numer().bits() as i64 - v.denom().bits() as i64;
    let shift = bits as i64 - m;
    let (n, d) = if shift >= 0 {
        (v.numer() << shift as usize, v.denom().clone())
    } else {
        (v.numer().clone(), v.denom() << (-shift) as usize)
    };
    let r = round_div(&n, &d);
    if shift >= 0 {
        Q::new(r, BigInt::one() << shift as usize)
    } else {
        Q::from_integer(r << (-shift) as usize)
    }
}

fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let q = (n * &two + d) / (d * &two);
    if n.is_negative() {
        -((-n * &two + d) / (d * &two))
    } else {
        q
    }
}

/// `e^x` to about [`precision_bits`] bits.
pub fn exp_approx(x: &Q) -> Q {
    let work = precision_bits() + 40;
    if x.is_zero() {
        return Q::one();
    }
    // halve until |x| < 2^-8, Taylor-expand, square back
    let mut k = 0u32;
    let mut r = x.clone();
    let limit = Q::new(BigInt::one(), BigInt::from(256));
    while r.abs() >= limit {
        r /= Q::from_integer(BigInt::from(2));
        k += 1;
    }
    let eps = Q::new(BigInt::one(), BigInt::one() << work as usize);
    let mut sum = Q::one();
    let mut term = Q::one();
    let mut n = 1i64;
    loop {
        term = round(&(term * &r / Q::from_integer(BigInt::from(n))), work);
        if term.abs() < eps {
            break;
        }
        sum += &term;
        n += 1;
    }
    let mut v = round(&sum, work);
    for _ in 0..k {
        v = round(&(&v * &v), work);
    }
    round(&v, precision_bits())
}

/// Real `r`-th root of `c`, to about [`precision_bits`] bits.
pub fn nth_root_approx(c: &Q, r: u32) -> Q {
    if c.is_negative() {
        return -nth_root_approx(&-c, r);
    }
    if c.is_zero() {
        return Q::zero();
    }
    let p = precision_bits() as usize + 2 * c.denom().bits() as usize + 8;
    let n = (c.numer() * num_traits::pow(c.denom().clone(), (r - 1) as usize)) << (r as usize * p);
    let root = n.nth_root(r);
    round(&Q::new(root, c.denom() << p), precision_bits())
}

fn pow_number(base: &Number, e: Exponent) -> Result<Number> {
    let b = base.value();
    if e.is_integer() {
        let n = *e.numer();
        if n < 0 && b.is_zero() {
            return Err(Error::PoleAtPoint);
        }
        let v = if n >= 0 {
            num_traits::pow(b.clone(), n as usize)
        } else {
            num_traits::pow(b.recip(), (-n) as usize)
        };
        return Ok(match base {
            Number::Exact(_) => Number::Exact(v),
            Number::Approx(_) => Number::Approx(round(&v, precision_bits())),
        });
    }
    if b.is_negative() && e.denom() % 2 == 0 {
        return Err(Error::NegativeBaseFractionalPower);
    }
    if b.is_zero() {
        return if *e.numer() > 0 {
            Ok(Number::Exact(Q::zero()))
        } else {
            Err(Error::PoleAtPoint)
        };
    }
    if let Number::Exact(q) = base {
        if let Some(v) = rational_power(q, e) {
            return Ok(Number::Exact(v));
        }
    }
    let root = nth_root_approx(b, *e.denom() as u32);
    pow_number(&Number::Approx(root), Exponent::from(*e.numer()))
}

fn eval_poly(p: &Poly, lookup: &dyn Fn(Symbol) -> Option<Q>) -> Result<Number> {
    let mut total = Number::Exact(Q::zero());
    for (m, c) in p.terms() {
        let mut t = Number::Exact(c.clone());
        for &(s, e) in m.factors() {
            let f = match s {
                Symbol::Exp(v) => {
                    let b = lookup(Symbol::Base(v)).ok_or(Error::UnboundSymbol(Symbol::Base(v)))?;
                    let arg = b * Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
                    if arg.is_zero() {
                        Number::Exact(Q::one())
                    } else {
                        Number::Approx(exp_approx(&arg))
                    }
                }
                _ => {
                    let b = lookup(s).ok_or(Error::UnboundSymbol(s))?;
                    pow_number(&Number::Exact(b), e)?
                }
            };
            t = t.mul(&f);
        }
        total = total.add(&t);
    }
    Ok(total)
}

pub(super) fn eval_expr(e: &Expr, lookup: &dyn Fn(Symbol) -> Option<Q>) -> Result<Number> {
    let n = eval_poly(e.numer(), lookup)?;
    let d = eval_poly(e.denom(), lookup)?;
    if d.value().is_zero() {
        return Err(Error::PoleAtPoint);
    }
    n.div(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{q, qr, Var};

    #[test]
    fn exp_one() {
        let e = exp_approx(&q(1));
        let s = decimal(&e, 30);
        assert!(s.starts_with("2.71828182845904523536028747135"), "{s}");
    }

    #[test]
    fn roots() {
        let r = nth_root_approx(&q(2), 2);
        assert!(decimal(&r, 40).starts_with("1.414213562373095048801688724209698"));
        let c = nth_root_approx(&qr(-27, 8), 3);
        assert!((c.to_f64().unwrap() + 1.5).abs() < 1e-15);
    }

    #[test]
    fn exact_stays_exact() {
        let e = Expr::base_pow(Var::Y, Exponent::new(2, 3)) * Expr::x();
        let v = e
            .eval(&|s| match s {
                Symbol::Base(Var::X) => Some(q(3)),
                Symbol::Base(Var::Y) => Some(q(8)),
                _ => None,
            })
            .unwrap();
        assert_eq!(v, Number::Exact(q(12)));
    }

    #[test]
    fn evaluation_errors() {
        let inv = Expr::x().recip().unwrap();
        assert_eq!(inv.eval(&|_| Some(q(0))), Err(Error::PoleAtPoint));
        let root = Expr::base_pow(Var::Y, Exponent::new(1, 2));
        assert_eq!(
            root.eval(&|_| Some(q(-1))),
            Err(Error::NegativeBaseFractionalPower)
        );
        assert_eq!(
            Expr::u(0, 1, 0).eval(&|_| None),
            Err(Error::UnboundSymbol(Symbol::Jet(crate::expr::JetVar::u(
                0, 1, 0
            ))))
        );
    }
}
