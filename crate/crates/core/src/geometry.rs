//! Weyl structures `(g, ω)` in the normal form attached to a solution, their
//! Weyl connection and curvature, and the Einstein-Weyl check.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{q, qr, Expr, JetVar, Number, Symbol, Var, Q};
use crate::linalg::{det3, inverse3, Mat3};
use crate::solution::Solution;

pub type Tensor3 = [[[Expr; 3]; 3]; 3];

fn zero3() -> Tensor3 {
    Default::default()
}

/// The metric `g` and one-form `ω` of a solution.
#[derive(Clone, Debug)]
pub struct WeylPair {
    pub g: Mat3,
    pub omega: [Expr; 3],
    solution: Solution,
}

impl WeylPair {
    /// `g = 4 dt dx + 2u dt dy - (u² + 4v) dt² - dy²`,
    /// `ω = (u u_x + 2u_y + 4v_x) dt - u_x dy`.
    pub fn build(s: &Solution) -> WeylPair {
        let (u, v) = (&s.u, &s.v);
        let z = Expr::zero;
        let g = [
            [-(u * u + v.scale(&q(4))), Expr::int(2), u.clone()],
            [Expr::int(2), z(), z()],
            [u.clone(), z(), Expr::int(-1)],
        ];
        let ux = s.jet(JetVar::u(0, 1, 0));
        let omega = [
            u * &ux
                + s.jet(JetVar::u(0, 0, 1)).scale(&q(2))
                + s.jet(JetVar::v(0, 1, 0)).scale(&q(4)),
            z(),
            -ux,
        ];
        WeylPair {
            g,
            omega,
            solution: s.clone(),
        }
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    fn d(&self, e: &Expr, i: usize) -> Expr {
        self.solution.d(e, Var::from_index(i))
    }

    pub fn g_inv(&self) -> Result<Mat3> {
        inverse3(&self.g)
    }

    /// `ω^♯`.
    pub fn omega_sharp(&self) -> Result<[Expr; 3]> {
        let gi = self.g_inv()?;
        Ok(std::array::from_fn(|k| {
            (0..3).map(|l| &gi[k][l] * &self.omega[l]).sum()
        }))
    }

    /// `(dω)_{ab} = ½(∂_a ω_b - ∂_b ω_a)`.
    pub fn d_omega(&self) -> Mat3 {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                (self.d(&self.omega[b], a) - self.d(&self.omega[a], b)).scale(&qr(1, 2))
            })
        })
    }
}

/// A symmetric affine connection, `gamma[k][i][j] = Γ^k_{ij}`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub gamma: Tensor3,
    pub levi_civita: Tensor3,
    pair: WeylPair,
}

/// Sign in front of `½(ω_i δ_j^k + ω_j δ_i^k - g_ij ω^k)`; `-1` yields
/// `∇g = ω ⊗ g`.
pub const CORRECTION_SIGN: i64 = -1;

impl Connection {
    pub fn weyl(p: &WeylPair) -> Result<Connection> {
        Connection::weyl_with_sign(p, CORRECTION_SIGN)
    }

    /// Weyl connection with the given sign of the correction term.
    pub fn weyl_with_sign(p: &WeylPair, sign: i64) -> Result<Connection> {
        let gi = p.g_inv()?;
        let dg: Tensor3 = std::array::from_fn(|l| {
            std::array::from_fn(|i| std::array::from_fn(|j| p.d(&p.g[i][j], l)))
        });
        let mut lc = zero3();
        for k in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    let mut s = Expr::zero();
                    for l in 0..3 {
                        if gi[k][l].is_zero() {
                            continue;
                        }
                        let c = &dg[i][j][l] + &dg[j][i][l] - &dg[l][i][j];
                        if !c.is_zero() {
                            s = s + &gi[k][l] * c;
                        }
                    }
                    lc[k][i][j] = s.scale(&qr(1, 2));
                    lc[k][j][i] = lc[k][i][j].clone();
                }
            }
        }
        let sharp = p.omega_sharp()?;
        let half = Q::new((sign).into(), 2.into());
        let mut gamma = lc.clone();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut c = -(&p.g[i][j] * &sharp[k]);
                    if j == k {
                        c = c + &p.omega[i];
                    }
                    if i == k {
                        c = c + &p.omega[j];
                    }
                    gamma[k][i][j] = &gamma[k][i][j] + c.scale(&half);
                }
            }
        }
        Ok(Connection {
            gamma,
            levi_civita: lc,
            pair: p.clone(),
        })
    }

    pub fn pair(&self) -> &WeylPair {
        &self.pair
    }

    /// `(∇_k g)_{ij} - ω_k g_{ij}`, indexed `[k][i][j]`.
    pub fn compatibility_residual(&self) -> Tensor3 {
        let (g, w, gm) = (&self.pair.g, &self.pair.omega, &self.gamma);
        std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut r = self.pair.d(&g[i][j], k) - &w[k] * &g[i][j];
                    for l in 0..3 {
                        r = r - &gm[l][k][i] * &g[l][j] - &gm[l][k][j] * &g[i][l];
                    }
                    r
                })
            })
        })
    }

    /// `R(∂_a, ∂_b)∂_c = R^l_{cab} ∂_l`, stored as `riemann[l][c][a][b]`.
    pub fn riemann(&self) -> Vec<Vec<Vec<Vec<Expr>>>> {
        let gm = &self.gamma;
        (0..3)
            .into_par_iter()
            .map(|l| {
                (0..3)
                    .map(|c| {
                        (0..3)
                            .map(|a| {
                                (0..3)
                                    .map(|b| {
                                        if a == b {
                                            return Expr::zero();
                                        }
                                        let mut r = self.pair.d(&gm[l][b][c], a)
                                            - self.pair.d(&gm[l][a][c], b);
                                        for m in 0..3 {
                                            r = r + &gm[m][b][c] * &gm[l][a][m]
                                                - &gm[m][a][c] * &gm[l][b][m];
                                        }
                                        r
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `Ric(X, Y) = tr(Z ↦ R(Z, X) Y)`.
    pub fn ricci(&self) -> Mat3 {
        let r = self.riemann();
        std::array::from_fn(|x| {
            std::array::from_fn(|y| (0..3).map(|z| r[z][y][z][x].clone()).sum())
        })
    }
}

pub fn symmetric_part(m: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (&m[i][j] + &m[j][i]).scale(&qr(1, 2))))
}

pub fn skew_part(m: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (&m[i][j] - &m[j][i]).scale(&qr(1, 2))))
}

/// `Λ = ⅓ g^{ij} Ric^sym_{ij}`.
pub fn lambda(p: &WeylPair, ric_sym: &Mat3) -> Result<Expr> {
    let gi = p.g_inv()?;
    let mut s = Expr::zero();
    for i in 0..3 {
        for j in 0..3 {
            s = s + &gi[i][j] * &ric_sym[i][j];
        }
    }
    Ok(s.scale(&qr(1, 3)))
}

/// Symbolic curvature data of a solution.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub pair: WeylPair,
    pub compatibility: Tensor3,
    pub ricci: Mat3,
    pub skew_residual: Mat3,
    pub lambda: Expr,
    pub ew_residual: Mat3,
}

impl Curvature {
    pub fn compute(s: &Solution) -> Result<Curvature> {
        Curvature::compute_with_sign(s, CORRECTION_SIGN)
    }

    pub fn compute_with_sign(s: &Solution, sign: i64) -> Result<Curvature> {
        let pair = WeylPair::build(s);
        let conn = Connection::weyl_with_sign(&pair, sign)?;
        let compatibility = conn.compatibility_residual();
        let ricci = conn.ricci();
        let dw = pair.d_omega();
        let skew = skew_part(&ricci);
        let skew_residual = std::array::from_fn(|i| {
            std::array::from_fn(|j| &skew[i][j] - dw[i][j].scale(&qr(3, 2)))
        });
        let sym = symmetric_part(&ricci);
        let lambda = lambda(&pair, &sym)?;
        let ew_residual =
            std::array::from_fn(|i| std::array::from_fn(|j| &sym[i][j] - &lambda * &pair.g[i][j]));
        Ok(Curvature {
            pair,
            compatibility,
            ricci,
            skew_residual,
            lambda,
            ew_residual,
        })
    }

    pub fn compatibility_is_zero(&self) -> bool {
        self.compatibility
            .iter()
            .flatten()
            .flatten()
            .all(Expr::is_zero)
    }

    pub fn skew_is_zero(&self) -> bool {
        self.skew_residual.iter().flatten().all(Expr::is_zero)
    }

    pub fn ew_is_zero(&self) -> bool {
        self.ew_residual.iter().flatten().all(Expr::is_zero)
    }
}

fn frob(m: &[Number]) -> f64 {
    m.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct EwSample {
    pub point: [String; 3],
    pub lambda: String,
    pub ew_residual: f64,
    pub skew_residual: f64,
    pub compatibility_residual: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EwReport {
    pub provenance: String,
    pub ms_residuals: [String; 2],
    pub compatibility_exact_zero: bool,
    pub skew_exact_zero: bool,
    pub ew_exact_zero: bool,
    pub lambda: String,
    /// `Λ` evaluated at each sample point.
    pub lambda_samples: Vec<String>,
    pub samples: Vec<EwSample>,
    pub ew_residual_max: f64,
    pub skew_residual_max: f64,
    pub compatibility_residual_max: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Relative residual `‖A - B‖ / (‖A‖ + ‖B‖ + 1)` of evaluated matrices.
fn relative(a: &[Number], b: &[Number]) -> f64 {
    let diff: Vec<Number> = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
    frob(&diff) / (frob(a) + frob(b) + 1.0)
}

/// Einstein-Weyl check: symbolic residuals, then evaluation at the points.
pub fn check_ew(
    s: &Solution,
    pts: &[[Q; 3]],
    formal: &BTreeMap<Symbol, Q>,
    tol: f64,
) -> Result<EwReport> {
    check_ew_with_sign(s, pts, formal, tol, CORRECTION_SIGN)
}

pub fn check_ew_with_sign(
    s: &Solution,
    pts: &[[Q; 3]],
    formal: &BTreeMap<Symbol, Q>,
    tol: f64,
    sign: i64,
) -> Result<EwReport> {
    let (r1, r2) = s.ms_residuals()?;
    let c = Curvature::compute_with_sign(s, sign)?;
    let sym = symmetric_part(&c.ricci);
    let skew = skew_part(&c.ricci);
    let dw = c.pair.d_omega();
    let det_g = det3(&c.pair.g);
    let samples = pts
        .par_iter()
        .map(|pt| -> Result<EwSample> {
            let ev = |e: &Expr| s.eval_at(e, pt, formal);
            let evm = |m: &Mat3| -> Result<Vec<Number>> { m.iter().flatten().map(ev).collect() };
            let g = evm(&c.pair.g)?;
            if ev(&det_g)?.is_zero_rel(&q(1)) {
                return Err(Error::DegenerateMetricAtPoint(
                    pt.clone().map(|x| x.to_string()),
                ));
            }
            let lam = ev(&c.lambda)?;
            let lg: Vec<Number> = g.iter().map(|x| x.mul(&lam)).collect();
            let rs = evm(&sym)?;
            let sk = evm(&skew)?;
            let dw32: Vec<Number> = evm(&dw)?
                .iter()
                .map(|x| x.mul(&Number::Exact(qr(3, 2))))
                .collect();
            let cmp: Vec<Number> = c
                .compatibility
                .iter()
                .flatten()
                .flatten()
                .map(ev)
                .collect::<Result<_>>()?;
            let exact = rs.iter().chain(&lg).all(Number::is_exact);
            Ok(EwSample {
                point: pt.clone().map(|x| x.to_string()),
                lambda: lam.to_string(),
                ew_residual: relative(&rs, &lg),
                skew_residual: relative(&sk, &dw32),
                compatibility_residual: frob(&cmp) / (frob(&g) + 1.0),
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&EwSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let ew_residual_max = max(|x| x.ew_residual);
    let skew_residual_max = max(|x| x.skew_residual);
    let compatibility_residual_max = max(|x| x.compatibility_residual);
    let (ce, se, ee) = (c.compatibility_is_zero(), c.skew_is_zero(), c.ew_is_zero());
    let ok = |exact: bool, m: f64| exact || m <= tol;
    let pass = r1.is_zero()
        && r2.is_zero()
        && ok(ce, compatibility_residual_max)
        && ok(se, skew_residual_max)
        && ok(ee, ew_residual_max);
    Ok(EwReport {
        provenance: s.provenance.clone(),
        ms_residuals: [r1.to_string(), r2.to_string()],
        compatibility_exact_zero: ce,
        skew_exact_zero: se,
        ew_exact_zero: ee,
        lambda: c.lambda.to_string(),
        lambda_samples: samples.iter().map(|x| x.lambda.clone()).collect(),
        samples,
        ew_residual_max,
        skew_residual_max,
        compatibility_residual_max,
        tol,
        pass,
    })
}

/// Orthonormal-type frame at a point built from `dω`.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalFrame {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub e3: [f64; 3],
    /// `J² = sign · id` on `Π²`.
    pub j_squared_sign: i8,
    /// `g(e_3, e_2)` in the normalized representative.
    pub g32: f64,
    /// Conformal factor `λ` with `‖dω‖²_{λg} = ±1`.
    pub conformal_factor: f64,
}

type V3 = [f64; 3];
type M3 = [[f64; 3]; 3];

fn mv(m: &M3, v: &V3) -> V3 {
    std::array::from_fn(|i| (0..3).map(|j| m[i][j] * v[j]).sum())
}

fn form(m: &M3, a: &V3, b: &V3) -> f64 {
    (0..3).map(|i| a[i] * mv(m, b)[i]).sum()
}

fn inv(m: &M3) -> Option<M3> {
    let d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if d == 0.0 {
        return None;
    }
    let c = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let k: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let minor = m[r[0]][k[0]] * m[r[1]][k[1]] - m[r[0]][k[1]] * m[r[1]][k[0]];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    };
    Some(std::array::from_fn(|i| {
        std::array::from_fn(|j| c(j, i) / d)
    }))
}

const FRAME_EPS: f64 = 1e-12;

/// The frame `e_1 ∈ Ker dω` with `ω(e_1) = 1`, `e_2` the projection of `ω^♯`
/// to `Π² = (L¹)^⊥` along `L¹`, and `e_3 = J e_2` with `J = g^{-1} dω`, all
/// in the representative with `‖dω‖² = ±1`.
pub fn canonical_frame(
    p: &WeylPair,
    pt: &[Q; 3],
    formal: &BTreeMap<Symbol, Q>,
) -> Result<CanonicalFrame> {
    let s = p.solution();
    let ev = |e: &Expr| -> Result<f64> { Ok(s.eval_at(e, pt, formal)?.to_f64()) };
    let evm = |m: &Mat3| -> Result<M3> {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = ev(&m[i][j])?;
            }
        }
        Ok(out)
    };
    let dw_sym = p.d_omega();
    let gi_sym = p.g_inv()?;
    let g = evm(&p.g)?;
    let gi = evm(&gi_sym)?;
    let f = evm(&dw_sym)?;
    if f.iter().flatten().all(|x| x.abs() < FRAME_EPS) {
        return Err(Error::FrameDegenerate("dω vanishes at the point".into()));
    }
    // ‖dω‖² = ½ F_ab F^ab as a function, for the conformal change of ω
    let mut norm = Expr::zero();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let w = &gi_sym[a][c] * &gi_sym[b][d];
                    if !w.is_zero() && !dw_sym[a][b].is_zero() && !dw_sym[c][d].is_zero() {
                        norm = norm + w * &dw_sym[a][b] * &dw_sym[c][d];
                    }
                }
            }
        }
    }
    let norm = norm.scale(&qr(1, 2));
    let n = ev(&norm)?;
    if n.abs() < FRAME_EPS {
        return Err(Error::FrameDegenerate("dω is null".into()));
    }
    // g ↦ λg with λ = |N|^{1/2}, ω ↦ ω + d ln λ = ω + dN / (2N)
    let lam = n.abs().sqrt();
    let mut omega = [0.0; 3];
    for a in 0..3 {
        omega[a] = ev(&p.omega[a])? + ev(&p.d(&norm, a))? / (2.0 * n);
    }
    let gl: M3 = g.map(|r| r.map(|x| x * lam));
    let gli: M3 = gi.map(|r| r.map(|x| x / lam));
    let mut e1 = [f[1][2], -f[0][2], f[0][1]];
    let l1 = form(&gl, &e1, &e1);
    if l1.abs() < FRAME_EPS * (1.0 + e1.iter().map(|x| x * x).sum::<f64>()) {
        return Err(Error::FrameDegenerate("Ker dω is null".into()));
    }
    let w1: f64 = (0..3).map(|i| omega[i] * e1[i]).sum();
    if w1.abs() < FRAME_EPS {
        return Err(Error::FrameDegenerate("ω vanishes on Ker dω".into()));
    }
    e1 = e1.map(|x| x / w1);
    let sharp = mv(&gli, &omega);
    let c = form(&gl, &sharp, &e1) / form(&gl, &e1, &e1);
    let e2: V3 = std::array::from_fn(|i| sharp[i] - c * e1[i]);
    let j: M3 =
        std::array::from_fn(|a| std::array::from_fn(|b| (0..3).map(|c| gli[a][c] * f[c][b]).sum()));
    let e3 = mv(&j, &e2);
    let jj = mv(&j, &e3);
    let scale = e2.iter().map(|x| x * x).sum::<f64>().sqrt().max(FRAME_EPS);
    let sign = if (0..3).all(|i| (jj[i] + e2[i]).abs() < 1e-8 * scale) {
        -1
    } else if (0..3).all(|i| (jj[i] - e2[i]).abs() < 1e-8 * scale) {
        1
    } else {
        0
    };
    let _ = inv(&g).ok_or(Error::DegenerateMetricAtPoint(
        pt.clone().map(|x| x.to_string()),
    ))?;
    Ok(CanonicalFrame {
        e1,
        e2,
        e3,
        j_squared_sign: sign,
        g32: form(&gl, &e3, &e2),
        conformal_factor: lam,
    })
}

/// Signature of `g` at a point as `(positive, negative)` counts.
pub fn signature_at(
    p: &WeylPair,
    pt: &[Q; 3],
    formal: &BTreeMap<Symbol, Q>,
) -> Result<(usize, usize)> {
    let s = p.solution();
    // leading principal minors up to a permutation putting g_xx last
    let perm = [2usize, 0, 1];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for jj in 0..3 {
            m[i][jj] = s.eval_at(&p.g[perm[i]][perm[jj]], pt, formal)?.to_f64();
        }
    }
    let eig = sym_eigenvalues(&m);
    Ok((
        eig.iter().filter(|&&x| x > 0.0).count(),
        eig.iter().filter(|&&x| x < 0.0).count(),
    ))
}

fn sym_eigenvalues(m: &M3) -> [f64; 3] {
    // Jacobi rotations
    let mut a = *m;
    for _ in 0..100 {
        let (mut p, mut r, mut big) = (0, 1, 0.0);
        for i in 0..3 {
            for jj in i + 1..3 {
                if a[i][jj].abs() > big {
                    big = a[i][jj].abs();
                    p = i;
                    r = jj;
                }
            }
        }
        if big < 1e-14 {
            break;
        }
        let theta = 0.5 * (2.0 * a[p][r]).atan2(a[r][r] - a[p][p]);
        let (c, s) = (theta.cos(), theta.sin());
        let mut b = a;
        for k in 0..3 {
            b[k][p] = c * a[k][p] - s * a[k][r];
            b[k][r] = s * a[k][p] + c * a[k][r];
        }
        let mut d = b;
        for k in 0..3 {
            d[p][k] = c * b[p][k] - s * b[r][k];
            d[r][k] = s * b[p][k] + c * b[r][k];
        }
        a = d;
    }
    [a[0][0], a[1][1], a[2][2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Exponent;
    use crate::solution::Domain;

    fn exp_y(k: i64) -> Expr {
        Expr::exp_atom(Var::Y, Exponent::from(k))
    }

    fn exp_solution() -> Solution {
        let u = Expr::x() + exp_y(1);
        let v = Expr::func("f", 0) + Expr::func("h", 0) * exp_y(-1);
        Solution::new(u, v, Domain::everywhere(), "exp").unwrap()
    }

    #[test]
    fn pair_of_trivial_solution() {
        let s = Solution::new(Expr::zero(), Expr::zero(), Domain::everywhere(), "0").unwrap();
        let p = WeylPair::build(&s);
        assert_eq!(p.g[0][0], Expr::zero());
        assert_eq!(p.g[0][1], Expr::int(2));
        assert_eq!(p.g[2][2], Expr::int(-1));
        assert!(p.omega.iter().all(Expr::is_zero));
        let c = Connection::weyl(&p).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(Expr::is_zero));
        assert!(c.ricci().iter().flatten().all(Expr::is_zero));
    }

    #[test]
    fn omega_of_exponential_solution() {
        let s = Solution::new(
            Expr::x() + exp_y(1),
            Expr::zero(),
            Domain::everywhere(),
            "e",
        )
        .unwrap();
        let p = WeylPair::build(&s);
        assert_eq!(p.omega[0], Expr::x() + exp_y(1) + exp_y(1).scale(&q(2)));
        assert_eq!(p.omega[2], Expr::int(-1));
    }

    #[test]
    fn exponential_family_is_einstein_weyl() {
        let c = Curvature::compute(&exp_solution()).unwrap();
        assert!(c.compatibility_is_zero());
        assert!(c.skew_is_zero(), "{:?}", c.skew_residual);
        assert!(c.ew_is_zero());
        assert_eq!(c.lambda, Expr::rational(1, 8));
    }

    #[test]
    fn printed_sign_breaks_compatibility() {
        let c = Curvature::compute_with_sign(&exp_solution(), 1).unwrap();
        assert!(!c.compatibility_is_zero());
    }

    #[test]
    fn non_solution_fails_ew() {
        let s = Solution::unchecked(
            Expr::x(),
            Expr::x() * Expr::x(),
            Domain::everywhere(),
            "bad",
        )
        .unwrap();
        let pts = [[q(1), q(2), q(3)], [qr(1, 2), q(-1), q(2)]];
        let r = check_ew(&s, &pts, &BTreeMap::new(), 1e-9).unwrap();
        assert!(!r.pass);
        assert!(r.ew_residual_max > 1e-9 || r.skew_residual_max > 1e-9);
    }

    #[test]
    fn frame_of_exponential_solution() {
        let s = exp_solution();
        let p = WeylPair::build(&s);
        let mut formal = BTreeMap::new();
        for (name, val) in [("f", 1), ("h", 1)] {
            for k in 0..3 {
                formal.insert(Symbol::func(name, k), q(if k == 0 { val } else { 0 }));
            }
        }
        let fr = canonical_frame(&p, &[q(0), q(1), qr(1, 3)], &formal).unwrap();
        assert!(fr.j_squared_sign != 0);
        assert!(fr.g32.abs() < 1e-9);
        let z = Solution::new(Expr::zero(), Expr::zero(), Domain::everywhere(), "0").unwrap();
        let e = canonical_frame(&WeylPair::build(&z), &[q(0), q(0), q(0)], &BTreeMap::new());
        assert!(matches!(e, Err(Error::FrameDegenerate(_))));
    }

    #[test]
    fn lorentzian_signature() {
        let z = Solution::new(Expr::zero(), Expr::zero(), Domain::everywhere(), "0").unwrap();
        let (pos, neg) =
            signature_at(&WeylPair::build(&z), &[q(0), q(0), q(0)], &BTreeMap::new()).unwrap();
        assert_eq!(pos + neg, 3);
        assert!(pos == 1 || neg == 1);
    }
}
