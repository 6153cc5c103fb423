//! Text syntax for expressions and solutions.
//!
//! Expressions use `+ - * / ^`, parentheses, rational and decimal literals,
//! the base coordinates `t, x, y`, exponential atoms `exp(c*y)` / `exp(c*t)`,
//! formal functions `f(t)`, `f'(t)`, `f''(t)`, and (where allowed) jet
//! coordinates `u, v, u_x, v_txy, ...`. Fractional powers apply to monomials
//! only, e.g. `y^(2/3)`.
//!
//! A solution is a list of statements separated by `;` or newlines:
//!
//! ```text
//! u = y^(2/3) - 10/3*x*y^(-1)
//! v = 2/5*x*y^(-1/3) - 7/3*x^2*y^(-2) + 21/25*y^(4/3)
//! domain y > 0
//! ```
//!
//! A catalog entry can stand in for a solution: `exp-family(1, t)`.

use num_bigint::BigInt;

use crate::catalog::{catalog, CatalogId};
use crate::error::{Error, Result};
use crate::expr::{Dep, Exponent, Expr, JetVar, MultiIndex, Var, Q};
use crate::solution::{Domain, Solution};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Prime,
    Op(char),
    Sep,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            })
        };
        if c == '\n' {
            push(&mut out, Tok::Sep);
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            push(
                &mut out,
                Tok::Num(decimal(&s).ok_or_else(|| syntax(l0, c0, format!("bad number `{s}`")))?),
            );
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            // catalog ids contain dashes
            while i + 1 < chars.len()
                && chars[i] == '-'
                && chars[i + 1].is_ascii_alphabetic()
                && is_catalog_prefix(&chars[start..i])
            {
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let tok = match c {
            '\'' => Tok::Prime,
            ';' => Tok::Sep,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | '=' | ',' | '>' | ':' => Tok::Op(c),
            _ => return Err(syntax(l0, c0, format!("unexpected character `{c}`"))),
        };
        push(&mut out, tok);
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

fn is_catalog_prefix(chars: &[char]) -> bool {
    let s: String = chars.iter().collect();
    CatalogId::ALL
        .iter()
        .any(|c| c.name().starts_with(&format!("{s}-")))
}

fn decimal(s: &str) -> Option<Q> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() {
        return None;
    } else {
        digits.parse().ok()?
    };
    Some(Q::new(n, BigInt::from(10).pow(frac.len() as u32)))
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_jets: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn skip_seps(&mut self) {
        while *self.peek() == Tok::Sep {
            self.next();
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if *self.peek() == Tok::Op('/') {
                let (l, c) = self.here();
                self.next();
                let d = self.unary()?;
                acc = acc
                    .checked_div(&d)
                    .map_err(|_| syntax(l, c, "division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let (l, c) = self.here();
        self.next();
        let k = self.exponent()?;
        base.pow(k).map_err(|e| syntax(l, c, e.to_string()))
    }

    fn exponent(&mut self) -> Result<Exponent> {
        let neg = self.eat('-');
        let (l, c) = self.here();
        let e = match self.next() {
            Tok::Num(n) => n,
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                e.as_constant()
                    .ok_or_else(|| syntax(l, c, "exponent must be a rational constant"))?
            }
            _ => return Err(syntax(l, c, "expected an exponent")),
        };
        let e = if neg { -e } else { e };
        let conv = |b: &BigInt| i64::try_from(b).map_err(|_| syntax(l, c, "exponent too large"));
        Ok(Exponent::new(conv(e.numer())?, conv(e.denom())?))
    }

    fn atom(&mut self) -> Result<Expr> {
        let (l, c) = self.here();
        match self.next() {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(&name, l, c),
            Tok::Eof | Tok::Sep => Err(syntax(l, c, "unexpected end of expression")),
            t => Err(syntax(l, c, format!("unexpected `{}`", tok_text(&t)))),
        }
    }

    fn identifier(&mut self, name: &str, l: usize, c: usize) -> Result<Expr> {
        match name {
            "t" => return Ok(Expr::t()),
            "x" => return Ok(Expr::x()),
            "y" => return Ok(Expr::y()),
            "exp" => {
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                return exp_of(&arg).ok_or_else(|| {
                    syntax(l, c, format!("exp argument `{arg}` must be c*t or c*y"))
                });
            }
            _ => {}
        }
        if let Some(j) = parse_jet(name) {
            if !self.allow_jets {
                return Err(syntax(
                    l,
                    c,
                    format!("jet variable `{name}` is not allowed in a solution"),
                ));
            }
            return Ok(Expr::jet(j));
        }
        let mut order = 0u8;
        while *self.peek() == Tok::Prime {
            self.next();
            order += 1;
        }
        if *self.peek() == Tok::Op('(') {
            self.next();
            let (la, ca) = self.here();
            if self.next() != Tok::Ident("t".into()) {
                return Err(syntax(
                    la,
                    ca,
                    format!("formal function `{name}` takes the argument t"),
                ));
            }
            self.expect(')')?;
            if crate::expr::FnName::new(name).is_none() {
                return Err(syntax(l, c, format!("invalid function name `{name}`")));
            }
            return Ok(Expr::func(name, order));
        }
        Err(Error::UnknownIdentifier(format!(
            "`{name}` at line {l}, column {c}"
        )))
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Prime => "'".into(),
        Tok::Op(c) => c.to_string(),
        Tok::Sep => ";".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// `exp(c*v)` for `arg = c*v` with `v ∈ {t, y}`.
fn exp_of(arg: &Expr) -> Option<Expr> {
    if arg.is_zero() {
        return Some(Expr::one());
    }
    for v in [Var::T, Var::Y] {
        let c = arg.partial_var(v);
        if let Some(k) = c.as_constant() {
            if (arg - Expr::var(v).scale(&k)).is_zero() {
                let conv = |b: &BigInt| i64::try_from(b).ok();
                return Some(Expr::exp_atom(
                    v,
                    Exponent::new(conv(k.numer())?, conv(k.denom())?),
                ));
            }
        }
    }
    None
}

fn parse_jet(name: &str) -> Option<JetVar> {
    let (dep, rest) = match name.split_at(1) {
        ("u", r) => (Dep::U, r),
        ("v", r) => (Dep::V, r),
        _ => return None,
    };
    if rest.is_empty() {
        return Some(JetVar::new(dep, MultiIndex::ZERO));
    }
    let letters = rest.strip_prefix('_')?;
    if letters.is_empty() {
        return None;
    }
    let mut m = MultiIndex::ZERO;
    let chars: Vec<char> = letters.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let v = match chars[i] {
            't' => Var::T,
            'x' => Var::X,
            'y' => Var::Y,
            _ => return None,
        };
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let count: u32 = if start == i {
            1
        } else {
            chars[start..i].iter().collect::<String>().parse().ok()?
        };
        for _ in 0..count {
            m = m.with(v);
        }
    }
    Some(JetVar::new(dep, m))
}

fn finish(p: &mut Parser) -> Result<()> {
    p.skip_seps();
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("unexpected `{}`", tok_text(p.peek()))));
    }
    Ok(())
}

/// Parse an expression in `t, x, y` and formal functions.
pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_with(text, false)
}

/// Parse an expression that may involve jet coordinates.
pub fn parse_jet_expr(text: &str) -> Result<Expr> {
    parse_with(text, true)
}

fn parse_with(text: &str, allow_jets: bool) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        allow_jets,
    };
    p.skip_seps();
    let e = p.expr()?;
    finish(&mut p)?;
    Ok(e)
}

/// Parse a solution (or a catalog reference) and verify the equation.
pub fn parse_solution(text: &str) -> Result<Solution> {
    let sol = parse_solution_unchecked(text)?;
    sol.verify()?;
    Ok(sol)
}

/// Parse without checking the equation.
pub fn parse_solution_unchecked(text: &str) -> Result<Solution> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        allow_jets: false,
    };
    p.skip_seps();
    if let Tok::Ident(name) = p.peek().clone() {
        if let Ok(id) = name.parse::<CatalogId>() {
            p.next();
            let mut params = Vec::new();
            if p.eat('(') && !p.eat(')') {
                loop {
                    params.push(p.expr()?);
                    if p.eat(')') {
                        break;
                    }
                    p.expect(',')?;
                }
            }
            finish(&mut p)?;
            return catalog(id, &params);
        }
    }
    let (mut u, mut v) = (None, None);
    let mut domain = Domain::everywhere();
    let mut notes = Vec::new();
    while *p.peek() != Tok::Eof {
        let (l, c) = p.here();
        match p.next() {
            Tok::Ident(name) if name == "u" || name == "v" => {
                p.expect('=')?;
                let e = p.expr()?;
                let slot = if name == "u" { &mut u } else { &mut v };
                if slot.is_some() {
                    return Err(syntax(l, c, format!("`{name}` assigned twice")));
                }
                *slot = Some(e);
            }
            Tok::Ident(name) if name == "domain" => {
                p.eat(':');
                loop {
                    let (la, ca) = p.here();
                    let lhs = p.expr()?;
                    p.expect('>')?;
                    let rhs = p.expr()?;
                    let d = &lhs - &rhs;
                    if d.has_jets() {
                        return Err(syntax(la, ca, "domain constraints involve t, x, y only"));
                    }
                    notes.push(format!("{lhs} > {rhs}"));
                    domain.positive.push(d);
                    if !p.eat(',') {
                        break;
                    }
                }
            }
            Tok::Ident(name) => {
                return Err(Error::UnknownIdentifier(format!(
                    "`{name}` at line {l}, column {c}"
                )))
            }
            t => {
                return Err(syntax(
                    l,
                    c,
                    format!(
                        "expected `u =`, `v =` or `domain`, found `{}`",
                        tok_text(&t)
                    ),
                ))
            }
        }
        match p.peek() {
            Tok::Sep => p.skip_seps(),
            Tok::Eof => {}
            t => return Err(p.err(format!("unexpected `{}`", tok_text(t)))),
        }
    }
    if !notes.is_empty() {
        domain.note = notes.join(", ");
    }
    let (l, c) = p.here();
    let u = u.ok_or_else(|| syntax(l, c, "missing `u = ...`"))?;
    let v = v.ok_or_else(|| syntax(l, c, "missing `v = ...`"))?;
    Solution::unchecked(u, v, domain, "dsl")
}

/// Text of a solution that parses back to the same section.
pub fn print_solution(s: &Solution) -> String {
    let mut out = format!("u = {}\nv = {}\n", s.u, s.v);
    if !s.domain.positive.is_empty() {
        let c: Vec<String> = s
            .domain
            .positive
            .iter()
            .map(|e| format!("{e} > 0"))
            .collect();
        out.push_str(&format!("domain {}\n", c.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{q, qr};

    #[test]
    fn exponential_solution() {
        let s = parse_solution("u = x + exp(y); v = 0").unwrap();
        assert_eq!(s.u, Expr::x() + Expr::exp_atom(Var::Y, Exponent::from(1)));
        let c = catalog(CatalogId::ExpFamily, &[Expr::zero(), Expr::zero()]).unwrap();
        assert_eq!((s.u, s.v), (c.u, c.v));
    }

    #[test]
    fn fractional_powers() {
        let text = "u = y^(2/3) - (10/3)*x*y^(-1)\nv = 2/5*x*y^(-1/3) - 7/3*x^2*y^(-2) + 21/25*y^(4/3)\ndomain y > 0";
        let s = parse_solution(text).unwrap();
        let c = catalog(CatalogId::Sl2Family, &[Expr::zero(), Expr::zero()]).unwrap();
        assert_eq!(s.u, c.u);
        assert_eq!(s.v, c.v);
        assert!(!s.domain.contains(&[q(0), q(0), q(-1)]).unwrap());
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_solution("u = ; v = 0") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            r => panic!("{r:?}"),
        }
        match parse_solution("u = x\nv = x +* y") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            r => panic!("{r:?}"),
        }
        assert!(matches!(
            parse_expr("x + z"),
            Err(Error::UnknownIdentifier(_))
        ));
        assert!(matches!(
            parse_solution("u = u_x; v = 0"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn jets_and_functions() {
        let e = parse_jet_expr("(u_xy + v_xx)/u_x^2").unwrap();
        assert_eq!(e, crate::invariants::invariant(1));
        assert_eq!(parse_jet_expr("u_t3x2").unwrap(), Expr::u(3, 2, 0));
        assert_eq!(parse_jet_expr("v_xyx").unwrap(), Expr::v(0, 2, 1));
        assert_eq!(
            parse_expr("f''(t)*y").unwrap(),
            Expr::func("f", 2) * Expr::y()
        );
        assert_eq!(parse_expr("0.25*x").unwrap(), Expr::x().scale(&qr(1, 4)));
    }

    #[test]
    fn catalog_references() {
        let s = parse_solution("exp-family(1, t)").unwrap();
        assert_eq!(
            s.v,
            Expr::one() + Expr::t() * Expr::exp_atom(Var::Y, Exponent::from(-1))
        );
        assert!(matches!(
            parse_solution("sl2-family(1, 2, 3)"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        for id in CatalogId::ALL {
            let s = catalog(id, &[]).unwrap();
            let back = parse_solution(&print_solution(&s)).unwrap();
            assert_eq!((&back.u, &back.v), (&s.u, &s.v), "{id}");
        }
        for i in 1..=3 {
            let e = crate::invariants::invariant(i);
            assert_eq!(parse_jet_expr(&e.to_string()).unwrap(), e);
        }
    }
}
