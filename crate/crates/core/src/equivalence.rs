//! Signatures of sections: the twelve basic invariants sampled along a
//! solution, I-regularity, and comparison of signature clouds.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{precision_bits, q, Expr, JetVar, Number, Symbol, Var, Q};
use crate::invariants::{basic_invariants, invariant};
use crate::jet::{EquationSystem, JetPoint};
use crate::linalg::rank;
use crate::solution::Solution;

/// Names and reduced expressions of `I_1, I_2, I_3, I_11, ..., I_33`.
pub fn signature_invariants() -> &'static [(String, Expr)] {
    static CELL: OnceLock<Vec<(String, Expr)>> = OnceLock::new();
    CELL.get_or_init(|| basic_invariants().expect("basic invariants within the order cap"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Precision {
    Exact,
    Float { bits: u32 },
}

impl Precision {
    fn join(self, o: Precision) -> Precision {
        match (self, o) {
            (Precision::Exact, p) | (p, Precision::Exact) => p,
            (Precision::Float { bits: a }, Precision::Float { bits: b }) => {
                Precision::Float { bits: a.min(b) }
            }
        }
    }
}

/// Sampled 12-vectors; `None` marks an invariant undefined at the point
/// (a derivation with `u_xx = 0` in its denominator).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureCloud {
    pub points: Vec<[String; 3]>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Exact values as rational strings where available.
    pub exact: Vec<Vec<Option<String>>>,
    pub precision: Precision,
    pub solution_provenance: String,
    pub names: Vec<String>,
}

/// Deterministic low-discrepancy sampler on a box.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub n: usize,
    pub seed: u64,
    pub lo: Q,
    pub hi: Q,
    /// Give up after this many candidates per requested point.
    pub max_tries_per_point: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            n: 64,
            seed: 0,
            lo: q(-2),
            hi: q(2),
            max_tries_per_point: 20,
        }
    }
}

fn van_der_corput(mut i: u64, base: u64) -> Q {
    let mut out = Q::zero();
    let mut denom = base;
    while i > 0 {
        out += Q::new(((i % base) as i64).into(), (denom as i64).into());
        i /= base;
        denom *= base;
    }
    out
}

impl Sampler {
    /// Halton points with bases 2, 3, 5 starting at an offset fixed by the seed.
    pub fn candidates(&self) -> impl Iterator<Item = [Q; 3]> + '_ {
        let start = 1 + self.seed.wrapping_mul(7919) % 100_003;
        let width = &self.hi - &self.lo;
        (start..).map(move |i| [2u64, 3, 5].map(|b| &self.lo + &width * van_der_corput(i, b)))
    }
}

/// The section's jets needed by the signature, as symbolic functions.
struct JetTable {
    jets: BTreeMap<JetVar, Expr>,
}

impl JetTable {
    fn new(s: &Solution) -> JetTable {
        let mut needed = std::collections::BTreeSet::new();
        for (_, e) in signature_invariants() {
            for sym in e.symbols() {
                if let Symbol::Jet(j) = sym {
                    needed.insert(j);
                }
            }
        }
        let jets = needed.into_par_iter().map(|j| (j, s.jet(j))).collect();
        JetTable { jets }
    }

    fn values(
        &self,
        s: &Solution,
        pt: &[Q; 3],
        formal: &BTreeMap<Symbol, Q>,
    ) -> Result<BTreeMap<JetVar, Number>> {
        self.jets
            .iter()
            .map(|(j, e)| Ok((*j, s.eval_at(e, pt, formal)?)))
            .collect()
    }
}

fn eval_on(e: &Expr, jets: &BTreeMap<JetVar, Number>) -> Result<Number> {
    let approx = e
        .symbols()
        .iter()
        .any(|s| matches!(s, Symbol::Jet(j) if jets.get(j).is_some_and(|n| !n.is_exact())));
    let v = e.eval(&|s| match s {
        Symbol::Jet(j) => jets.get(&j).map(|n| n.value().clone()),
        _ => None,
    })?;
    Ok(if approx {
        Number::Approx(v.value().clone())
    } else {
        v
    })
}

fn ux_is_identically_zero(s: &Solution) -> bool {
    s.jet(JetVar::u(0, 1, 0)).is_zero()
}

const SINGULAR_BRANCH: &str =
    "u_x ≡ 0 on the section: it lies in the singular locus (relative invariant u_x = 0); such sections reduce to u = 0 and the dKP equation";

/// Sample the signature of a solution.
pub fn signature(
    s: &Solution,
    sampler: &Sampler,
    formal: &BTreeMap<Symbol, Q>,
) -> Result<SignatureCloud> {
    if ux_is_identically_zero(s) {
        return Err(Error::AllSamplesSingular(SINGULAR_BRANCH.into()));
    }
    let table = JetTable::new(s);
    let ux = JetVar::u(0, 1, 0);
    let mut pts = Vec::new();
    let max_tries = sampler.max_tries_per_point * sampler.n.max(1);
    for (tries, pt) in sampler.candidates().enumerate() {
        if pts.len() == sampler.n || tries >= max_tries {
            break;
        }
        if !s.domain.contains(&pt)? {
            continue;
        }
        let Ok(v) = s.eval_at(&table.jets[&ux], &pt, formal) else {
            continue;
        };
        if v.is_zero_rel(&q(1)) {
            continue;
        }
        pts.push(pt);
    }
    if pts.is_empty() {
        return Err(Error::AllSamplesSingular(format!(
            "no admissible sample point for {}",
            s.provenance
        )));
    }
    let rows = signature_values_with(&table, s, &pts, formal)?;
    let rows: Vec<(Vec<Option<Number>>, [String; 3])> = rows
        .into_iter()
        .zip(&pts)
        .map(|(r, pt)| (r, pt.clone().map(|x| x.to_string())))
        .collect();
    let mut precision = Precision::Exact;
    let mut values = Vec::new();
    let mut exact = Vec::new();
    let mut points = Vec::new();
    for (row, pt) in rows {
        for n in row.iter().flatten() {
            if !n.is_exact() {
                precision = precision.join(Precision::Float {
                    bits: precision_bits(),
                });
            }
        }
        values.push(row.iter().map(|n| n.as_ref().map(Number::to_f64)).collect());
        exact.push(
            row.iter()
                .map(|n| {
                    n.as_ref()
                        .filter(|n| n.is_exact())
                        .map(|n| n.value().to_string())
                })
                .collect(),
        );
        points.push(pt);
    }
    Ok(SignatureCloud {
        points,
        values,
        exact,
        precision,
        solution_provenance: s.provenance.clone(),
        names: signature_invariants()
            .iter()
            .map(|(n, _)| n.clone())
            .collect(),
    })
}

/// The 12-vectors at the given points; `None` where an invariant has a pole.
pub fn signature_values(
    s: &Solution,
    pts: &[[Q; 3]],
    formal: &BTreeMap<Symbol, Q>,
) -> Result<Vec<Vec<Option<Number>>>> {
    signature_values_with(&JetTable::new(s), s, pts, formal)
}

fn signature_values_with(
    table: &JetTable,
    s: &Solution,
    pts: &[[Q; 3]],
    formal: &BTreeMap<Symbol, Q>,
) -> Result<Vec<Vec<Option<Number>>>> {
    pts.par_iter()
        .map(|pt| -> Result<_> {
            let jets = table.values(s, pt, formal)?;
            signature_invariants()
                .iter()
                .map(|(_, e)| match eval_on(e, &jets) {
                    Ok(n) => Ok(Some(n)),
                    Err(Error::PoleAtPoint) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect()
        })
        .collect()
}

/// `det (D_j I_i)` on the section at `pt` is nonzero.
pub fn i_regular(s: &Solution, pt: &[Q; 3], formal: &BTreeMap<Symbol, Q>) -> Result<bool> {
    let ux = s.eval_at(&s.jet(JetVar::u(0, 1, 0)), pt, formal)?;
    if ux.is_zero_rel(&q(1)) {
        return Err(Error::SingularLocus(format!(
            "u_x = 0 at ({}, {}, {})",
            pt[0], pt[1], pt[2]
        )));
    }
    let mut m = Vec::new();
    for i in 1..=3 {
        let on = s
            .substitute_jets(&invariant(i))
            .map_err(|_| Error::SingularLocus("u_x ≡ 0".into()))?;
        let row = Var::ALL
            .iter()
            .map(|&v| s.eval_at(&s.d(&on, v), pt, formal))
            .collect::<Result<Vec<_>>>()?;
        m.push(row);
    }
    let det = det_numbers(&m);
    let scale = m
        .iter()
        .flatten()
        .map(|n| n.value().clone())
        .fold(q(1), |a, b| if b.abs() > a { b.abs() } else { a });
    Ok(!det.is_zero_rel(&(&scale * &scale * &scale)))
}

fn det_numbers(m: &[Vec<Number>]) -> Number {
    let p =
        |a: usize, b: usize, c: usize, d: usize| m[1][a].mul(&m[2][b]).sub(&m[1][c].mul(&m[2][d]));
    m[0][0]
        .mul(&p(1, 2, 2, 1))
        .sub(&m[0][1].mul(&p(0, 2, 2, 0)))
        .add(&m[0][2].mul(&p(0, 1, 1, 0)))
}

/// Rank of `d(z ∘ s)` at a point, over the invariants defined there.
pub fn signature_rank(s: &Solution, pt: &[Q; 3], formal: &BTreeMap<Symbol, Q>) -> Result<usize> {
    let mut rows = Vec::new();
    for (_, e) in signature_invariants() {
        let Ok(on) = s.substitute_jets(e) else {
            continue;
        };
        let row: Result<Vec<f64>> = Var::ALL
            .iter()
            .map(|&v| Ok(s.eval_at(&s.d(&on, v), pt, formal)?.to_f64()))
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(Error::PoleAtPoint) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(numeric_rank(&rows, 1e-9))
}

/// Rank of the horizontal differentials `D_j(I_i)` at a jet of the equation:
/// the signature rank of a generic solution through `θ`.
pub fn jet_signature_rank(theta: &JetPoint) -> Result<usize> {
    let sys = EquationSystem::shared();
    let mut rows = Vec::new();
    for i in 1..=3 {
        let row = Var::ALL
            .iter()
            .map(|&v| theta.eval(sys, &sys.total_derivative(&invariant(i), v)?))
            .collect::<Result<Vec<Q>>>()?;
        rows.push(row);
    }
    Ok(rank(&rows))
}

fn numeric_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())) else {
            break;
        };
        if m[p][c].abs() <= tol * scale {
            continue;
        }
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] / m[r][c];
                for j in c..ncols {
                    m[i][j] -= f * m[r][j];
                }
            }
        }
        r += 1;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Distinct,
    Inconclusive,
    EquivalentEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub hausdorff: f64,
    pub threshold: f64,
    /// Invariants defined at every point of both clouds.
    pub coordinates: Vec<String>,
    pub notes: Vec<String>,
}

/// Minimum number of points per cloud for a definite verdict.
pub const MIN_POINTS: usize = 4;

fn is_constant(c: &SignatureCloud, cols: &[usize]) -> bool {
    let first = &c.values[0];
    c.values.iter().all(|r| {
        cols.iter().all(|&i| {
            (r[i].unwrap() - first[i].unwrap()).abs() <= 1e-12 * (1.0 + first[i].unwrap().abs())
        })
    })
}

/// Two-sided tolerance matching of clouds on their common coordinates.
pub fn compare(a: &SignatureCloud, b: &SignatureCloud, tol: f64) -> Result<Comparison> {
    if let (Precision::Float { bits: x }, Precision::Float { bits: y }) = (a.precision, b.precision)
    {
        if x != y {
            return Err(Error::PrecisionMismatch);
        }
    }
    if a.values.is_empty() || b.values.is_empty() {
        return Err(Error::InvalidArgument("empty signature cloud".into()));
    }
    let width = a.values[0].len().min(b.values[0].len());
    let cols: Vec<usize> = (0..width)
        .filter(|&i| {
            a.values
                .iter()
                .chain(&b.values)
                .all(|r| r.get(i).is_some_and(Option::is_some))
        })
        .collect();
    let names = a.names.iter().chain(&b.names).cloned().collect::<Vec<_>>();
    let coordinates = cols
        .iter()
        .map(|&i| {
            names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("z{}", i + 1))
        })
        .collect();
    let mut notes =
        vec!["coincidence is tested by two-sided tolerance matching of finite samples".to_string()];
    if cols.len() < width {
        notes.push(format!(
            "{} of {} invariants are undefined on at least one cloud and were skipped",
            width - cols.len(),
            width
        ));
    }
    if cols.is_empty() {
        notes.push("no common defined invariants".into());
        return Ok(Comparison {
            verdict: Verdict::Inconclusive,
            hausdorff: f64::INFINITY,
            threshold: 0.0,
            coordinates,
            notes,
        });
    }
    let dist = |x: &[Option<f64>], y: &[Option<f64>]| {
        cols.iter()
            .map(|&i| (x[i].unwrap() - y[i].unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let one_sided = |p: &SignatureCloud, r: &SignatureCloud| {
        p.values
            .iter()
            .map(|x| {
                r.values
                    .iter()
                    .map(|y| dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let hausdorff = one_sided(a, b).max(one_sided(b, a));
    let scale = a
        .values
        .iter()
        .chain(&b.values)
        .flat_map(|r| cols.iter().map(move |&i| r[i].unwrap().abs()))
        .fold(0.0, f64::max);
    let threshold = tol * (1.0 + scale);
    if is_constant(a, &cols) && is_constant(b, &cols) {
        notes.push("both signatures are constant: the sections are not I-regular, so matching is evidence only for the constant vectors".into());
    }
    let verdict = if hausdorff > threshold {
        Verdict::Distinct
    } else if a.values.len() < MIN_POINTS || b.values.len() < MIN_POINTS {
        notes.push(format!("fewer than {MIN_POINTS} points in a cloud"));
        Verdict::Inconclusive
    } else {
        Verdict::EquivalentEvidence
    };
    Ok(Comparison {
        verdict,
        hausdorff,
        threshold,
        coordinates,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog, CatalogId};
    use crate::expr::qr;
    use rand::SeedableRng;

    fn small() -> Sampler {
        Sampler {
            n: 6,
            ..Sampler::default()
        }
    }

    #[test]
    fn generic_solutions_are_i_regular() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = crate::invariants::random_regular_point(3, &mut rng);
        assert_eq!(jet_signature_rank(&p).unwrap(), 3);
    }

    #[test]
    fn halton_points_are_in_the_box() {
        let s = Sampler::default();
        for p in s.candidates().take(50) {
            for c in p {
                assert!(c >= q(-2) && c <= q(2));
            }
        }
        assert_eq!(van_der_corput(3, 2), qr(3, 4));
    }

    #[test]
    fn trivial_solution_is_singular() {
        let s = catalog(CatalogId::Trivial, &[]).unwrap();
        assert!(matches!(
            signature(&s, &small(), &BTreeMap::new()),
            Err(Error::AllSamplesSingular(_))
        ));
    }

    #[test]
    fn sl2_constants_in_the_cloud() {
        let s = catalog(CatalogId::Sl2Family, &[Expr::zero(), Expr::zero()]).unwrap();
        let c = signature(&s, &small(), &BTreeMap::new()).unwrap();
        for row in &c.values {
            assert!((row[0].unwrap() + 0.12).abs() < 1e-12);
            assert!((row[1].unwrap() - 0.21).abs() < 1e-12);
            assert!((row[2].unwrap() + 0.294).abs() < 1e-12);
        }
    }

    #[test]
    fn verdicts() {
        let e = catalog(CatalogId::ExpFamily, &[Expr::zero(), Expr::zero()]).unwrap();
        let s = catalog(CatalogId::Sl2Family, &[Expr::zero(), Expr::zero()]).unwrap();
        let ce = signature(&e, &small(), &BTreeMap::new()).unwrap();
        let cs = signature(&s, &small(), &BTreeMap::new()).unwrap();
        assert_eq!(
            compare(&ce, &ce, 0.0).unwrap().verdict,
            Verdict::EquivalentEvidence
        );
        assert_eq!(compare(&ce, &cs, 1e-9).unwrap().verdict, Verdict::Distinct);
        assert_eq!(compare(&cs, &ce, 1e-9).unwrap().verdict, Verdict::Distinct);
    }

    #[test]
    fn numeric_rank_examples() {
        assert_eq!(numeric_rank(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-9), 1);
        assert_eq!(numeric_rank(&[vec![1.0, 0.0], vec![0.0, 1e-3]], 1e-9), 2);
    }
}
