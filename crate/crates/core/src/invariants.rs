//! Differential invariants of the symmetry pseudogroup on the equation:
//! the second-order invariants, the invariant derivations, their structure
//! coefficients, the invariant coframe, and the counting of invariants.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{q, qr, Expr, JetVar, Symbol, Var, Q};
use crate::fields::{U, V};
use crate::jet::{internal_coordinates, total_derivative_raw, EquationSystem, JetPoint};
use crate::linalg::{det3, inverse3, mat_mul3, rank, Mat3};
use crate::symmetry::{shape_metric, Family};

fn j(t: u8, x: u8, y: u8) -> Expr {
    Expr::u(t, x, y)
}

fn jv(t: u8, x: u8, y: u8) -> Expr {
    Expr::v(t, x, y)
}

fn sys() -> &'static EquationSystem {
    EquationSystem::shared()
}

/// `I_1, I_2, I_3`.
pub fn invariant(i: usize) -> Expr {
    let (ux, uxx, uxy, uyy) = (j(0, 1, 0), j(0, 2, 0), j(0, 1, 1), j(0, 0, 2));
    let (vx, vxx, vxy) = (jv(0, 1, 0), jv(0, 2, 0), jv(0, 1, 1));
    let ux2 = &ux * &ux;
    let ux4 = &ux2 * &ux2;
    match i {
        1 => (&uxy + &vxx) / ux2,
        2 => (&ux2 * &uxy + &ux * &uxx * &vx + &uxx * &uyy - &uxy * &uxy) / ux4,
        3 => (&ux2 * &vxx - &ux * &uxx * &vx + &uxx * &vxy - &uxy * &vxx) / ux4,
        _ => panic!("invariant index {i} out of range 1..=3"),
    }
}

/// A horizontal operator `c_t D_t + c_x D_x + c_y D_y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub coeffs: [Expr; 3],
}

impl Derivation {
    /// Apply and restrict to the equation.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        let order = e
            .jet_order()
            .max(self.coeffs.iter().map(Expr::jet_order).max().unwrap_or(0));
        let k = order + 1;
        if k > sys().order_cap() {
            return Err(Error::OrderCapExceeded {
                order: k,
                cap: sys().order_cap(),
            });
        }
        let mut out = Expr::zero();
        for (c, v) in self.coeffs.iter().zip(Var::ALL) {
            if !c.is_zero() {
                out = out + c * total_derivative_raw(e, v);
            }
        }
        sys().reduce(&out, k)
    }

    /// Commutator in the operator representation, coefficients reduced.
    pub fn commutator(&self, o: &Derivation) -> Result<Derivation> {
        let mut coeffs: [Expr; 3] = Default::default();
        for (a, c) in coeffs.iter_mut().enumerate() {
            *c = self.apply(&o.coeffs[a])? - o.apply(&self.coeffs[a])?;
        }
        Ok(Derivation { coeffs })
    }

    pub fn combination(terms: &[(Expr, &Derivation)]) -> Derivation {
        let mut coeffs: [Expr; 3] = Default::default();
        for (w, d) in terms {
            for a in 0..3 {
                coeffs[a] = &coeffs[a] + w * &d.coeffs[a];
            }
        }
        Derivation { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }
}

/// `∇_1, ∇_2, ∇_3`.
pub fn nabla(i: usize) -> Derivation {
    let (u, v) = (Expr::symbol(U), Expr::symbol(V));
    let (ux, uy, uxx, uxy, uyy) = (j(0, 1, 0), j(0, 0, 1), j(0, 2, 0), j(0, 1, 1), j(0, 0, 2));
    let z = Expr::zero;
    let coeffs = match i {
        1 => [z(), &ux / &uxx, z()],
        2 => [z(), uxy.clone() / (&uxx * &ux), -(Expr::one() / ux.clone())],
        3 => {
            let ux3 = &ux * &ux * &ux;
            let vux = &v * &ux;
            let cx = total_derivative_raw(&vux, Var::X) + &uyy;
            let cy = total_derivative_raw(&(&u * &ux - uy.scale(&q(2))), Var::X);
            [&uxx / &ux3, cx / ux3.clone(), cy / ux3]
        }
        _ => panic!("derivation index {i} out of range 1..=3"),
    };
    Derivation { coeffs }
}

pub fn apply_derivation(i: usize, e: &Expr) -> Result<Expr> {
    nabla(i).apply(e)
}

/// `K_1 .. K_4`.
pub fn structure_k(i: usize) -> Result<Expr> {
    let (ux, uy, uxx, uxy, uyy, uxxx, uxxy) = (
        j(0, 1, 0),
        j(0, 0, 1),
        j(0, 2, 0),
        j(0, 1, 1),
        j(0, 0, 2),
        j(0, 3, 0),
        j(0, 2, 1),
    );
    let n2 = nabla(2);
    let ux2 = &ux * &ux;
    let k2 = (&uxy * &uxxx - &uxx * &uxxy) / (&ux * &uxx * &uxx);
    Ok(match i {
        1 => &ux * &uxxx / (&uxx * &uxx) - Expr::int(3),
        2 => k2,
        3 => {
            &k2 * (Expr::one() - (&uxy / &ux2).scale(&q(2)))
                - (uxx.clone() / (&ux2 * &ux)).scale(&q(2)) * n2.apply(&uy)?
                + (Expr::int(2) / ux2.clone()) * n2.apply(&uxy)?
        }
        4 => {
            let a = &uxx * n2.apply(&(uyy.scale(&q(2)) - &ux * &uy))?;
            let b = n2.apply(&(&uxy / &uxx))? * &uxx * (uxy.scale(&q(2)) - &ux2);
            let c = n2.apply(&(&uxy * &uxy))?;
            (a - b - c) / (&ux2 * &ux2)
        }
        _ => panic!("structure coefficient index {i} out of range 1..=4"),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: String,
    pub ok: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: &Expr) -> Self {
        Check {
            name: name.into(),
            residual: residual.to_string(),
            ok: residual.is_zero(),
        }
    }
}

/// The three commutation relations, each as a residual operator.
pub fn verify_derivation_commutators() -> Result<Vec<Check>> {
    let n: Vec<Derivation> = (1..=3).map(nabla).collect();
    let k: Vec<Expr> = (1..=4).map(structure_k).collect::<Result<_>>()?;
    let rel = [
        (
            "[n1,n2] + n2",
            (0, 1),
            Derivation::combination(&[(Expr::int(-1), &n[1])]),
        ),
        (
            "[n1,n3] - (-K3 n1 + (K1 - 2K2) n2 + K1 n3)",
            (0, 2),
            Derivation::combination(&[
                (-&k[2], &n[0]),
                (&k[0] - k[1].scale(&q(2)), &n[1]),
                (k[0].clone(), &n[2]),
            ]),
        ),
        (
            "[n2,n3] - (K4 n1 + K3 n2 + K2 n3)",
            (1, 2),
            Derivation::combination(&[
                (k[3].clone(), &n[0]),
                (k[2].clone(), &n[1]),
                (k[1].clone(), &n[2]),
            ]),
        ),
    ];
    let mut out = Vec::new();
    for (name, (a, b), rhs) in rel {
        let c = n[a].commutator(&n[b])?;
        let mut res = Expr::zero();
        let mut parts = Vec::new();
        for i in 0..3 {
            let r = sys().reduce(&(&c.coeffs[i] - &rhs.coeffs[i]), 3)?;
            if !r.is_zero() {
                res = r.clone();
            }
            parts.push(r);
        }
        let mut chk = Check::new(name, &res);
        if !chk.ok {
            chk.residual = parts
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ; ");
        }
        out.push(chk);
    }
    Ok(out)
}

/// The identities expressing `I_1` and `I_3` through `I_2` and the `K_i`.
pub fn verify_identities() -> Result<Vec<Check>> {
    let k: Vec<Expr> = (1..=4).map(structure_k).collect::<Result<_>>()?;
    let (i1, i2, i3) = (invariant(1), invariant(2), invariant(3));
    let n1i2 = apply_derivation(1, &i2)?;
    let n2i2 = apply_derivation(2, &i2)?;
    let r1 = &i1 - (&n1i2 + (&k[1] + &k[2]).scale(&qr(1, 2)) - &i2 * &k[0]);
    let r3 = &i3
        - (&n1i2 - &n2i2
            + (&k[1] + k[2].scale(&q(3)) + k[3].scale(&q(2))).scale(&qr(1, 4))
            + &i2 * (&k[1] - &k[0] - Expr::one()));
    Ok(vec![
        Check::new("I1 = n1(I2) + (K2+K3)/2 - I2 K1", &sys().reduce(&r1, 3)?),
        Check::new(
            "I3 = (n1-n2)(I2) + (K2+3K3+2K4)/4 + I2 (K2-K1-1)",
            &sys().reduce(&r3, 3)?,
        ),
    ])
}

/// Composition oracle: at `θ`, `[∇_a, ∇_b](e)` computed by applying the
/// derivations one after the other, against the stated combination applied
/// to `e`. Returns the three pairs of values.
pub fn commutator_spot_check(theta: &JetPoint, e: &Expr) -> Result<Vec<(Q, Q)>> {
    let n: Vec<Derivation> = (1..=3).map(nabla).collect();
    let k: Vec<Expr> = (1..=4).map(structure_k).collect::<Result<_>>()?;
    let ne: Vec<Expr> = n.iter().map(|d| d.apply(e)).collect::<Result<_>>()?;
    let comp =
        |a: usize, b: usize| -> Result<Expr> { Ok(n[a].apply(&ne[b])? - n[b].apply(&ne[a])?) };
    let rhs = [
        -ne[1].clone(),
        -(&k[2] * &ne[0]) + (&k[0] - k[1].scale(&q(2))) * &ne[1] + &k[0] * &ne[2],
        &k[3] * &ne[0] + &k[2] * &ne[1] + &k[1] * &ne[2],
    ];
    let mut out = Vec::new();
    for (i, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        out.push((
            theta.eval(sys(), &comp(a, b)?)?,
            theta.eval(sys(), &rhs[i])?,
        ));
    }
    Ok(out)
}

/// Both sides of the two identities evaluated at `θ`.
pub fn identity_spot_check(theta: &JetPoint) -> Result<[(Q, Q); 2]> {
    let k: Vec<Q> = (1..=4)
        .map(|i| theta.eval(sys(), &structure_k(i)?))
        .collect::<Result<_>>()?;
    let i2 = invariant(2);
    let val = |e: &Expr| theta.eval(sys(), e);
    let (n1, n2) = (
        val(&apply_derivation(1, &i2)?)?,
        val(&apply_derivation(2, &i2)?)?,
    );
    let i2v = val(&i2)?;
    let half = qr(1, 2);
    let quarter = qr(1, 4);
    let r1 = &n1 + (&k[1] + &k[2]) * &half - &i2v * &k[0];
    let r3 = &n1 - &n2
        + (&k[1] + q(3) * &k[2] + q(2) * &k[3]) * &quarter
        + &i2v * (&k[1] - &k[0] - q(1));
    Ok([(val(&invariant(1))?, r1), (val(&invariant(3))?, r3)])
}

/// Reduced Lie derivative of `e` along each family with a formal parameter.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub residuals: Vec<(Family, Expr)>,
}

impl InvarianceReport {
    pub fn is_invariant(&self) -> bool {
        self.residuals.iter().all(|(_, r)| r.is_zero())
    }

    pub fn witness(&self) -> Option<&(Family, Expr)> {
        self.residuals.iter().find(|(_, r)| !r.is_zero())
    }
}

pub fn verify_invariance(e: &Expr, k: u32) -> Result<InvarianceReport> {
    let f = Expr::func("f", 0);
    let mut residuals = Vec::new();
    for fam in Family::ALL {
        let l = fam.generator(&f).lie_derivative(e, k)?;
        residuals.push((fam, sys().reduce(&l, k)?));
    }
    Ok(InvarianceReport { residuals })
}

/// The twelve basic invariants `I_1, I_2, I_3, ∇_j(I_i)` (in the order
/// `I_11, I_12, I_13, I_21, ...`).
pub fn basic_invariants() -> Result<Vec<(String, Expr)>> {
    let mut out: Vec<(String, Expr)> = (1..=3).map(|i| (format!("I{i}"), invariant(i))).collect();
    for i in 1..=3 {
        for jj in 1..=3 {
            out.push((format!("I{i}{jj}"), apply_derivation(jj, &invariant(i))?));
        }
    }
    Ok(out)
}

/// Exact rank of `∂ z_a / ∂ (internal jets of order ≤ 3)` at `θ`.
pub fn jacobian_rank(zs: &[Expr], theta: &JetPoint) -> Result<usize> {
    let coords = internal_coordinates(3);
    let mut rows = Vec::new();
    for z in zs {
        let mut row = Vec::new();
        for c in &coords {
            let d = z.partial(Symbol::Jet(*c));
            row.push(theta.eval(sys(), &d)?);
        }
        rows.push(row);
    }
    Ok(rank(&rows))
}

/// A random point of `MS_k` off the singular locus `u_x u_xx = 0`.
pub fn random_regular_point(k: u32, rng: &mut impl Rng) -> JetPoint {
    loop {
        let p = JetPoint::random(k, rng);
        let nonzero = |jv: JetVar| p.get(jv).is_some_and(|v| *v != q(0));
        if nonzero(JetVar::u(0, 1, 0)) && (k < 2 || nonzero(JetVar::u(0, 2, 0))) {
            return p;
        }
    }
}

/// Coframe data: `G'_{ij} = u_x² g(∇_i, ∇_j)` and `ω(∇_i)` with and without
/// the conformal adjustment `ω + 2 d̂u_x / u_x`.
#[derive(Clone, Debug)]
pub struct Coframe {
    pub g_prime: Mat3,
    pub omega_adjusted: [Expr; 3],
    pub omega_plain: [Expr; 3],
    /// Determinant of the matrix of derivation coefficients.
    pub frame_det: Expr,
    /// `α^1 ∧ α^2 ∧ α^3` coefficient of `dt ∧ dx ∧ dy`.
    pub coframe_det: Expr,
    /// `α(∇)` computed from the inverse matrix; equals the identity.
    pub duality: Mat3,
}

pub fn coframe_rewrite() -> Result<Coframe> {
    let (u, v) = (Expr::symbol(U), Expr::symbol(V));
    let g = shape_metric(&u, &v);
    let n: Vec<Derivation> = (1..=3).map(nabla).collect();
    let ux = j(0, 1, 0);
    let ux2 = &ux * &ux;
    let mut g_prime: Mat3 = Default::default();
    for a in 0..3 {
        for b in 0..3 {
            let mut s = Expr::zero();
            for p in 0..3 {
                for r in 0..3 {
                    if !g[p][r].is_zero() {
                        s = s + &n[a].coeffs[p] * &g[p][r] * &n[b].coeffs[r];
                    }
                }
            }
            g_prime[a][b] = sys().reduce(&(&ux2 * s), 2)?;
        }
    }
    let omega = [
        &u * &ux + j(0, 0, 1).scale(&q(2)) + jv(0, 1, 0).scale(&q(4)),
        Expr::zero(),
        -ux.clone(),
    ];
    let mut omega_plain: [Expr; 3] = Default::default();
    let mut omega_adjusted: [Expr; 3] = Default::default();
    for i in 0..3 {
        let plain: Expr = (0..3).map(|a| &n[i].coeffs[a] * &omega[a]).sum();
        let plain = sys().reduce(&plain, 2)?;
        let adj = &plain + (n[i].apply(&ux)? / ux.clone()).scale(&q(2));
        omega_plain[i] = plain;
        omega_adjusted[i] = sys().reduce(&adj, 2)?;
    }
    let c: Mat3 = std::array::from_fn(|i| n[i].coeffs.clone());
    let frame_det = det3(&c);
    let alpha = inverse3(&c)?;
    let coframe_det = det3(&alpha);
    let duality = mat_mul3(&c, &alpha);
    Ok(Coframe {
        g_prime,
        omega_adjusted,
        omega_plain,
        frame_det,
        coframe_det,
        duality,
    })
}

/// The expected `G'` matrix.
pub fn expected_g_prime() -> Mat3 {
    let i2 = invariant(2);
    let z = Expr::zero;
    [
        [z(), z(), Expr::int(2)],
        [z(), Expr::int(-1), Expr::int(1)],
        [Expr::int(2), Expr::int(1), i2.scale(&q(4)) - Expr::one()],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    /// Weyl structures.
    Weyl,
    /// General Einstein-Weyl structures.
    EwGeneral,
    /// The modified Manakov-Santini system under its symmetry pseudogroup.
    Ms,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRecord {
    pub series: Series,
    pub k: u32,
    pub s_k: i64,
    pub h_k: i64,
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    crate::expr::binom(n as u64, k as u64) as i64
}

/// Number of invariants of pure order `k`.
pub fn h(series: Series, k: u32) -> i64 {
    let k = k as i64;
    match (series, k) {
        (_, 0 | 1) => 0,
        (Series::Weyl, 2) => 9 * binom(4, 2) - 4 * binom(5, 2) - 1,
        (Series::Weyl, _) => (5 * k * k + 7 * k - 6) / 2,
        (Series::EwGeneral, 2) => h(Series::Weyl, 2) - 5,
        (Series::EwGeneral, _) => 3 * (2 * k - 1),
        (Series::Ms, 2) => 3,
        (Series::Ms, _) => 4 * k - 3,
    }
}

/// Cross-check of the closed formulas from the dimension counts they come from.
pub fn h_from_dimensions(series: Series, k: u32) -> i64 {
    let ki = k as i64;
    match series {
        Series::Weyl if k > 2 => 9 * binom(ki + 2, 2) - 4 * binom(ki + 3, 2),
        Series::EwGeneral if k > 2 => h_from_dimensions(Series::Weyl, k) - 5 * binom(ki, 2),
        Series::Ms if k >= 2 => s_ms_from_orbits(k) - s_ms_from_orbits(k - 1),
        _ => h(series, k),
    }
}

/// `dim MS_k - dim O_k` with the orbit dimensions `5, 11, 5k + 8`.
fn s_ms_from_orbits(k: u32) -> i64 {
    let (_, ms, _) = crate::jet::dims(k);
    let orbit = match k {
        0 => 5,
        1 => 11,
        _ => 5 * k as i64 + 8,
    };
    ms as i64 - orbit
}

pub fn counting(series: Series, k: u32) -> CountRecord {
    let s_k = (0..=k).map(|i| h(series, i)).sum();
    CountRecord {
        series,
        k,
        s_k,
        h_k: h(series, k),
    }
}

/// Coefficients of the printed generating function, to order `n` inclusive.
pub fn poincare_series(series: Series, n: usize) -> Vec<i64> {
    // numerator coefficients and the power of (1 - z) in the denominator
    let (num, pow): (Vec<i64>, u32) = match series {
        Series::Weyl => (vec![0, 0, 13, -9, 0, 1], 3),
        Series::EwGeneral => (vec![0, 0, 8, -1, -1], 2),
        Series::Ms => (vec![0, 0, 3, 3, -2], 2),
    };
    // 1/(1-z)^p = Σ C(m+p-1, p-1) z^m
    (0..=n)
        .map(|m| {
            num.iter()
                .enumerate()
                .filter(|(i, _)| *i <= m)
                .map(|(i, c)| c * binom((m - i) as i64 + pow as i64 - 1, pow as i64 - 1))
                .sum()
        })
        .collect()
}

/// `s_k` for the equation from the orbit dimensions (`2k² - k - 3` for `k ≥ 2`).
pub fn s_ms(k: u32) -> i64 {
    s_ms_from_orbits(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn printed_substitution_example() {
        let mut b = std::collections::BTreeMap::new();
        b.insert(Symbol::Jet(JetVar::u(0, 1, 1)), Expr::one());
        b.insert(Symbol::Jet(JetVar::v(0, 2, 0)), Expr::one());
        b.insert(Symbol::Jet(JetVar::u(0, 1, 0)), Expr::one());
        assert_eq!(invariant(1).substitute(&b).unwrap(), Expr::int(2));
    }

    #[test]
    fn derivation_examples() {
        assert_eq!(apply_derivation(1, &j(0, 1, 0)).unwrap(), j(0, 1, 0));
        let expected = (j(0, 1, 1) / j(0, 2, 0) * j(0, 1, 0) - j(0, 0, 1)) / j(0, 1, 0);
        assert_eq!(apply_derivation(2, &Expr::symbol(U)).unwrap(), expected);
    }

    #[test]
    fn second_order_invariants_are_invariant() {
        for i in 1..=3 {
            assert!(
                verify_invariance(&invariant(i), 2).unwrap().is_invariant(),
                "I{i}"
            );
        }
    }

    #[test]
    fn ux_is_only_relative() {
        let r = verify_invariance(&j(0, 1, 0), 1).unwrap();
        let (_, w) = r.witness().unwrap();
        assert!(w.checked_div(&j(0, 1, 0)).unwrap().jet_order() == 0);
    }

    #[test]
    fn k_spot_values() {
        let k1 = structure_k(1).unwrap();
        let v = k1
            .eval(&|s| match s {
                Symbol::Jet(jv) if jv == JetVar::u(0, 1, 0) => Some(q(1)),
                Symbol::Jet(jv) if jv == JetVar::u(0, 3, 0) => Some(q(3)),
                Symbol::Jet(jv) if jv == JetVar::u(0, 2, 0) => Some(q(1)),
                _ => Some(q(0)),
            })
            .unwrap();
        assert_eq!(v.value(), &q(0));
    }

    #[test]
    fn counting_formulas() {
        assert_eq!(counting(Series::Ms, 2).h_k, 3);
        assert_eq!(counting(Series::EwGeneral, 2).h_k, 8);
        assert_eq!(counting(Series::Weyl, 4).h_k, 51);
        assert_eq!(counting(Series::Weyl, 2).h_k, 13);
        for k in 2..=6 {
            let r = counting(Series::Ms, k);
            let kk = k as i64;
            assert_eq!(r.s_k, 2 * kk * kk - kk - 3);
            assert_eq!(r.s_k, s_ms(k));
        }
        for s in [Series::Weyl, Series::EwGeneral, Series::Ms] {
            let series = poincare_series(s, 8);
            for k in 0..=8 {
                assert_eq!(series[k], h(s, k as u32), "{s:?} k={k}");
                assert_eq!(
                    h_from_dimensions(s, k as u32),
                    h(s, k as u32),
                    "{s:?} k={k}"
                );
            }
        }
    }

    #[test]
    fn jacobian_of_second_order_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_regular_point(3, &mut rng);
        let zs: Vec<Expr> = (1..=3).map(invariant).collect();
        assert_eq!(jacobian_rank(&zs, &p).unwrap(), 3);
    }

    #[test]
    fn spot_checks_at_a_random_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_regular_point(4, &mut rng);
        for (a, b) in commutator_spot_check(&p, &Expr::u(0, 1, 0)).unwrap() {
            assert_eq!(a, b);
        }
        for (a, b) in identity_spot_check(&p).unwrap() {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn derivations_need_regular_points() {
        let _ = qr(1, 2);
        assert!(nabla(1).coeffs[1]
            .denom()
            .contains(Symbol::Jet(JetVar::u(0, 2, 0))));
    }
}
