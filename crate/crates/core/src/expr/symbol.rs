//! Symbols of the expression universe: base coordinates, exponential atoms,
//! jet coordinates and formal functions of `t`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A base coordinate of `M = R^3(t, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    T,
    X,
    Y,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::T, Var::X, Var::Y];

    pub fn index(self) -> usize {
        match self {
            Var::T => 0,
            Var::X => 1,
            Var::Y => 2,
        }
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn name(self) -> char {
        match self {
            Var::T => 't',
            Var::X => 'x',
            Var::Y => 'y',
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Dependent variable of the bundle `E -> M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dep {
    U,
    V,
}

impl Dep {
    pub const ALL: [Dep; 2] = [Dep::U, Dep::V];

    pub fn name(self) -> char {
        match self {
            Dep::U => 'u',
            Dep::V => 'v',
        }
    }
}

/// Symmetric derivative multi-index: counts of `t`, `x` and `y` derivatives.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct MultiIndex {
    pub t: u8,
    pub x: u8,
    pub y: u8,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { t: 0, x: 0, y: 0 };

    pub const fn new(t: u8, x: u8, y: u8) -> Self {
        MultiIndex { t, x, y }
    }

    pub fn order(self) -> u32 {
        self.t as u32 + self.x as u32 + self.y as u32
    }

    pub fn count(self, v: Var) -> u8 {
        match v {
            Var::T => self.t,
            Var::X => self.x,
            Var::Y => self.y,
        }
    }

    pub fn with(self, v: Var) -> Self {
        let mut m = self;
        match v {
            Var::T => m.t += 1,
            Var::X => m.x += 1,
            Var::Y => m.y += 1,
        }
        m
    }

    pub fn without(self, v: Var) -> Option<Self> {
        let mut m = self;
        let slot = match v {
            Var::T => &mut m.t,
            Var::X => &mut m.x,
            Var::Y => &mut m.y,
        };
        if *slot == 0 {
            return None;
        }
        *slot -= 1;
        Some(m)
    }

    pub fn plus(self, other: MultiIndex) -> Self {
        MultiIndex::new(self.t + other.t, self.x + other.x, self.y + other.y)
    }

    pub fn minus(self, other: MultiIndex) -> Option<Self> {
        Some(MultiIndex::new(
            self.t.checked_sub(other.t)?,
            self.x.checked_sub(other.x)?,
            self.y.checked_sub(other.y)?,
        ))
    }

    /// Principal multi-indices contain at least one `t` and at least one `x`.
    pub fn is_principal(self) -> bool {
        self.t > 0 && self.x > 0
    }

    /// All multi-indices of order at most `k`, ordered by order then lexicographically.
    pub fn up_to(k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for n in 0..=k {
            out.extend(Self::of_order(n));
        }
        out
    }

    pub fn of_order(n: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for t in (0..=n).rev() {
            for x in (0..=n - t).rev() {
                let y = n - t - x;
                out.push(MultiIndex::new(t as u8, x as u8, y as u8));
            }
        }
        out
    }

    /// Sub-indices `tau <= self`, including zero and `self`.
    pub fn sub_indices(self) -> impl Iterator<Item = MultiIndex> {
        (0..=self.t).flat_map(move |t| {
            (0..=self.x).flat_map(move |x| (0..=self.y).map(move |y| MultiIndex::new(t, x, y)))
        })
    }

    /// Product of binomial coefficients `C(self, tau)`.
    pub fn binomial(self, tau: MultiIndex) -> u64 {
        binom(self.t as u64, tau.t as u64)
            * binom(self.x as u64, tau.x as u64)
            * binom(self.y as u64, tau.y as u64)
    }

    /// Letters in `t`, `x`, `y` order with repetition, e.g. `txx`.
    pub fn letters(self) -> String {
        let mut s = String::new();
        for v in Var::ALL {
            for _ in 0..self.count(v) {
                s.push(v.name());
            }
        }
        s
    }
}

pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// A jet coordinate `u_sigma` or `v_sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JetVar {
    pub dep: Dep,
    pub index: MultiIndex,
}

impl JetVar {
    pub const fn new(dep: Dep, index: MultiIndex) -> Self {
        JetVar { dep, index }
    }

    pub const fn u(t: u8, x: u8, y: u8) -> Self {
        JetVar::new(Dep::U, MultiIndex::new(t, x, y))
    }

    pub const fn v(t: u8, x: u8, y: u8) -> Self {
        JetVar::new(Dep::V, MultiIndex::new(t, x, y))
    }

    pub fn order(self) -> u32 {
        self.index.order()
    }

    pub fn is_principal(self) -> bool {
        self.index.is_principal()
    }

    pub fn derive(self, v: Var) -> JetVar {
        JetVar::new(self.dep, self.index.with(v))
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == MultiIndex::ZERO {
            write!(f, "{}", self.dep.name())
        } else {
            write!(f, "{}_{}", self.dep.name(), self.index.letters())
        }
    }
}

/// Inline name of a formal function of `t`; at most 15 ASCII bytes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnName {
    bytes: [u8; 15],
    len: u8,
}

impl FnName {
    pub fn new(name: &str) -> Option<Self> {
        let b = name.as_bytes();
        if b.is_empty()
            || b.len() > 15
            || !b[0].is_ascii_alphabetic()
            || !b.iter().all(|c| c.is_ascii_alphanumeric())
        {
            return None;
        }
        let mut bytes = [0u8; 15];
        bytes[..b.len()].copy_from_slice(b);
        Some(FnName {
            bytes,
            len: b.len() as u8,
        })
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes[..self.len as usize]).expect("ascii name")
    }
}

impl fmt::Debug for FnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for FnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A variable of the expression universe.
///
/// `Exp(v)` stands for `e^v`; a power `Exp(v)^q` is `e^{q v}`. Formal functions
/// carry their derivative order and depend on `t` only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Base(Var),
    Exp(Var),
    Jet(JetVar),
    Func(FnName, u8),
}

impl Symbol {
    pub const T: Symbol = Symbol::Base(Var::T);
    pub const X: Symbol = Symbol::Base(Var::X);
    pub const Y: Symbol = Symbol::Base(Var::Y);

    pub fn func(name: &str, order: u8) -> Symbol {
        Symbol::Func(FnName::new(name).expect("valid function name"), order)
    }

    /// Whether rational (non-integer) exponents are admissible for this symbol.
    pub fn allows_fractional(self) -> bool {
        matches!(self, Symbol::Base(_) | Symbol::Exp(_))
    }

    pub fn as_jet(self) -> Option<JetVar> {
        match self {
            Symbol::Jet(j) => Some(j),
            _ => None,
        }
    }

    pub fn jet_order(self) -> Option<u32> {
        self.as_jet().map(JetVar::order)
    }
}

impl From<JetVar> for Symbol {
    fn from(j: JetVar) -> Self {
        Symbol::Jet(j)
    }
}

impl From<Var> for Symbol {
    fn from(v: Var) -> Self {
        Symbol::Base(v)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Base(v) => write!(f, "{v}"),
            Symbol::Exp(v) => write!(f, "exp({v})"),
            Symbol::Jet(j) => write!(f, "{j}"),
            Symbol::Func(name, order) => {
                write!(f, "{name}")?;
                for _ in 0..*order {
                    f.write_str("'")?;
                }
                f.write_str("(t)")
            }
        }
    }
}
