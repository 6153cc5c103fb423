//! The full verification run: every check grouped in named suites, with a
//! deterministic JSON summary.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{catalog, sl2_consistency, sl2_constants, CatalogId};
use crate::equivalence::{
    compare, jet_signature_rank, signature, signature_values, Sampler, Verdict,
};
use crate::error::{Error, Result};
use crate::expr::{q, Expr, Var};
use crate::fields::{PointField, U};
use crate::geometry::{check_ew, check_ew_with_sign, CORRECTION_SIGN};
use crate::invariants::{
    apply_derivation, basic_invariants, coframe_rewrite, commutator_spot_check, counting,
    expected_g_prime, h, h_from_dimensions, identity_spot_check, invariant, jacobian_rank,
    poincare_series, random_regular_point, s_ms, structure_k, verify_derivation_commutators,
    verify_identities, verify_invariance, Series,
};
use crate::jet::JetPoint;
use crate::solution::Solution;
use crate::symmetry::{
    apply_pseudogroup, check_symmetry, grading_check, induction_point, lift_shape_field,
    orbit_dimension, reflect, spanning_set, verify_commutation_table, Family, PseudogroupElement,
    Reflection, ShapeField,
};

/// Tolerance for checks evaluated in floating point.
pub const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Table,
    Symmetry,
    Lift,
    Orbits,
    Invariance,
    Commutators,
    Coframe,
    Counts,
    Geometry,
    Equivalence,
    Mutation,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Table,
        Suite::Symmetry,
        Suite::Lift,
        Suite::Orbits,
        Suite::Invariance,
        Suite::Commutators,
        Suite::Coframe,
        Suite::Counts,
        Suite::Geometry,
        Suite::Equivalence,
        Suite::Mutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Table => "table",
            Suite::Symmetry => "symmetry",
            Suite::Lift => "lift",
            Suite::Orbits => "orbits",
            Suite::Invariance => "invariance",
            Suite::Commutators => "commutators",
            Suite::Coframe => "coframe",
            Suite::Counts => "counts",
            Suite::Geometry => "geometry",
            Suite::Equivalence => "equivalence",
            Suite::Mutation => "mutation",
        }
    }

    pub fn run(self, seed: u64) -> Vec<NamedCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(self as u64));
        let res = match self {
            Suite::Table => table(),
            Suite::Symmetry => symmetry(&mut rng),
            Suite::Lift => lift(),
            Suite::Orbits => orbits(&mut rng),
            Suite::Invariance => invariance(&mut rng),
            Suite::Commutators => commutators(&mut rng),
            Suite::Coframe => coframe(),
            Suite::Counts => Ok(counts()),
            Suite::Geometry => geometry(&mut rng, CORRECTION_SIGN),
            Suite::Equivalence => equivalence(&mut rng),
            Suite::Mutation => mutation(&mut rng),
        };
        let mut out = res.unwrap_or_else(|e| vec![NamedCheck::fail("error", e.to_string())]);
        for c in &mut out {
            c.name = format!("{}/{}", self.name(), c.name);
        }
        out
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub ok: bool,
    /// Residual or value supporting the verdict.
    pub detail: String,
}

impl NamedCheck {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        NamedCheck {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        NamedCheck::new(name, false, detail)
    }

    fn zero(name: impl Into<String>, residual: &Expr) -> Self {
        NamedCheck::new(name, residual.is_zero(), residual.to_string())
    }

    fn eq<T: PartialEq + fmt::Display>(name: impl Into<String>, got: T, want: T) -> Self {
        NamedCheck::new(name, got == want, format!("{got} (expected {want})"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub passed: usize,
    pub failed: usize,
    pub ok: bool,
    pub checks: Vec<NamedCheck>,
}

/// Run the selected suites (all when `only` is empty). Suites run
/// concurrently; checks are ordered by name.
pub fn verify_all(only: &[Suite], seed: u64) -> Summary {
    let mut suites: Vec<Suite> = if only.is_empty() {
        Suite::ALL.to_vec()
    } else {
        only.to_vec()
    };
    suites.sort();
    suites.dedup();
    let mut checks: Vec<NamedCheck> = suites.par_iter().flat_map(|s| s.run(seed)).collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let failed = checks.iter().filter(|c| !c.ok).count();
    Summary {
        seed,
        suites,
        passed: checks.len() - failed,
        failed,
        ok: failed == 0,
        checks,
    }
}

fn formal(name: &str) -> Expr {
    Expr::func(name, 0)
}

fn table() -> Result<Vec<NamedCheck>> {
    Ok(verify_commutation_table()
        .into_iter()
        .map(|c| NamedCheck::new(format!("X{},X{}", c.row, c.col), c.ok, c.residual))
        .collect())
}

fn symmetry(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mut out = Vec::new();
    for fam in Family::ALL {
        let r = check_symmetry(&fam.generator(&formal("f")))?;
        out.push(NamedCheck::new(
            format!("{fam}(f)"),
            r.is_symmetry(),
            format!("{} ; {}", r.residuals.0, r.residuals.1),
        ));
    }
    let g = grading_check();
    out.push(NamedCheck::new(
        "grading",
        g.ok(),
        format!("perfect={} graded={}", g.perfect, g.graded),
    ));
    let x = PointField::new([
        Expr::zero(),
        Expr::symbol(U),
        Expr::zero(),
        Expr::zero(),
        Expr::zero(),
    ])?;
    let r = check_symmetry(&x)?;
    out.push(NamedCheck::new(
        "u*d_x-rejected",
        !r.is_symmetry(),
        format!("{} ; {}", r.residuals.0, r.residuals.1),
    ));
    let s = catalog(CatalogId::ExpFamily, &[])?;
    for i in 0..3 {
        let p = PseudogroupElement::random(rng);
        let ok = apply_pseudogroup(&p, &s)?.verify();
        out.push(NamedCheck::new(
            format!("pseudogroup-{i}-preserves-equation"),
            ok.is_ok(),
            err_detail(ok),
        ));
    }
    for id in CatalogId::ALL {
        let s = catalog(id, &[])?;
        for r in [Reflection::Txy, Reflection::Yu] {
            let ok = reflect(r, &s)?.verify();
            out.push(NamedCheck::new(
                format!("reflection-{r:?}-{id}").to_lowercase(),
                ok.is_ok(),
                err_detail(ok),
            ));
        }
    }
    Ok(out)
}

fn err_detail(r: Result<()>) -> String {
    match r {
        Ok(()) => "0".into(),
        Err(e) => e.to_string(),
    }
}

fn lift() -> Result<Vec<NamedCheck>> {
    let mut out = Vec::new();
    for fam in Family::ALL {
        let l = lift_shape_field(&ShapeField::single(fam, formal("f")))?;
        let diff = l.field.sub(&fam.generator(&formal("f")));
        out.push(NamedCheck::new(
            format!("{fam}"),
            diff.is_zero(),
            diff.to_string(),
        ));
        let omega_ok = l.omega_residual.iter().all(Expr::is_zero);
        out.push(NamedCheck::new(
            format!("{fam}-omega"),
            omega_ok,
            l.omega_residual
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ; "),
        ));
    }
    let (a, b, c, d, e) = (
        formal("a"),
        formal("b"),
        formal("c"),
        formal("d"),
        formal("e"),
    );
    let l = lift_shape_field(&ShapeField::new(a, b, c, d.scale(&q(2)), e.clone()))?;
    let want = (e + d.partial_var(Var::T)).scale(&q(2));
    out.push(NamedCheck::zero("general-chi", &(&l.chi - &want)));
    let r = check_symmetry(&l.field)?;
    out.push(NamedCheck::new(
        "general-lift-is-symmetry",
        r.is_symmetry(),
        format!("{} ; {}", r.residuals.0, r.residuals.1),
    ));
    Ok(out)
}

fn orbits(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mut out = vec![
        NamedCheck::eq("k=0", orbit_dimension(0, &JetPoint::random(0, rng))?, 5),
        NamedCheck::eq("k=1", orbit_dimension(1, &JetPoint::random(1, rng))?, 11),
    ];
    for k in 2..=4 {
        out.push(NamedCheck::eq(
            format!("k={k}"),
            orbit_dimension(k, &induction_point(k))?,
            5 * k as usize + 8,
        ));
    }
    let generic = orbit_dimension(2, &JetPoint::random(2, rng))?;
    let special = orbit_dimension(2, &induction_point(2))?;
    let bound = spanning_set(2).len();
    out.push(NamedCheck::new(
        "k=2-semicontinuity",
        generic >= special && generic <= bound,
        format!("random {generic}, induction point {special}, |V_2| = {bound}"),
    ));
    Ok(out)
}

fn invariance(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mut items: Vec<(String, Expr, u32)> = (1..=3)
        .map(|i| (format!("I{i}"), invariant(i), 2))
        .collect();
    for i in 1..=4 {
        items.push((format!("K{i}"), structure_k(i)?, 3));
    }
    for i in 1..=3 {
        for j in 1..=3 {
            items.push((format!("I{i}{j}"), apply_derivation(j, &invariant(i))?, 3));
        }
    }
    let mut out: Vec<NamedCheck> = items
        .par_iter()
        .map(|(name, e, k)| {
            let r = verify_invariance(e, *k)?;
            let detail = r
                .witness()
                .map(|(f, e)| format!("{f}: {e}"))
                .unwrap_or_else(|| "0".into());
            Ok(NamedCheck::new(name.clone(), r.is_invariant(), detail))
        })
        .collect::<Result<_>>()?;
    let zs: Vec<Expr> = basic_invariants()?.into_iter().map(|(_, e)| e).collect();
    out.push(NamedCheck::eq(
        "rank-12",
        jacobian_rank(&zs, &random_regular_point(3, rng))?,
        12,
    ));
    Ok(out)
}

fn commutators(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mut out: Vec<NamedCheck> = verify_derivation_commutators()?
        .into_iter()
        .chain(verify_identities()?)
        .map(|c| NamedCheck::new(c.name, c.ok, c.residual))
        .collect();
    let p = random_regular_point(4, rng);
    for (i, (a, b)) in commutator_spot_check(&p, &Expr::u(0, 1, 0))?
        .into_iter()
        .enumerate()
    {
        out.push(NamedCheck::eq(format!("spot-commutator-{}", i + 1), a, b));
    }
    for (i, (a, b)) in identity_spot_check(&p)?.into_iter().enumerate() {
        out.push(NamedCheck::eq(format!("spot-identity-{}", i + 1), a, b));
    }
    Ok(out)
}

fn coframe() -> Result<Vec<NamedCheck>> {
    let cf = coframe_rewrite()?;
    let want = expected_g_prime();
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            out.push(NamedCheck::zero(
                format!("G'[{}][{}]", i + 1, j + 1),
                &(&cf.g_prime[i][j] - &want[i][j]),
            ));
        }
    }
    let ux = Expr::u(0, 1, 0);
    let ux3 = &ux * &ux * &ux;
    out.push(NamedCheck::zero("coframe-det", &(&cf.coframe_det + &ux3)));
    out.push(NamedCheck::zero(
        "frame-det",
        &(&cf.frame_det + Expr::one() / ux3),
    ));
    let id_ok = (0..3).all(|i| (0..3).all(|j| cf.duality[i][j] == Expr::int((i == j) as i64)));
    out.push(NamedCheck::new(
        "duality",
        id_ok,
        if id_ok {
            "identity"
        } else {
            "not the identity"
        },
    ));
    Ok(out)
}

fn counts() -> Vec<NamedCheck> {
    let mut out = Vec::new();
    for k in 2..=6u32 {
        let ki = k as i64;
        let r = counting(Series::Ms, k);
        out.push(NamedCheck::eq(
            format!("ms-s{k}"),
            r.s_k,
            2 * ki * ki - ki - 3,
        ));
        out.push(NamedCheck::eq(
            format!("ms-s{k}-orbits"),
            s_ms(k),
            2 * ki * ki - ki - 3,
        ));
        if k > 2 {
            out.push(NamedCheck::eq(format!("ms-h{k}"), r.h_k, 4 * ki - 3));
        }
        for series in [Series::Weyl, Series::EwGeneral, Series::Ms] {
            out.push(NamedCheck::eq(
                format!("{}-h{k}-dimensions", series_name(series)),
                h_from_dimensions(series, k),
                h(series, k),
            ));
        }
    }
    for (series, want) in [(Series::Weyl, 13), (Series::EwGeneral, 8), (Series::Ms, 3)] {
        out.push(NamedCheck::eq(
            format!("{}-h2", series_name(series)),
            h(series, 2),
            want,
        ));
        let got = poincare_series(series, 8);
        let direct: Vec<i64> = (0..=8).map(|k| h(series, k)).collect();
        out.push(NamedCheck::new(
            format!("{}-series", series_name(series)),
            got == direct,
            format!("{got:?} vs {direct:?}"),
        ));
    }
    out
}

fn series_name(s: Series) -> &'static str {
    match s {
        Series::Weyl => "weyl",
        Series::EwGeneral => "ew-general",
        Series::Ms => "ms",
    }
}

fn geometry(rng: &mut ChaCha8Rng, sign: i64) -> Result<Vec<NamedCheck>> {
    let mut out = Vec::new();
    for id in CatalogId::ALL {
        let s = catalog(id, &[])?;
        let pts = s.random_points(20, rng)?;
        let formal = s.random_formal(rng);
        let r = check_ew_with_sign(&s, &pts, &formal, FLOAT_TOL, sign)?;
        let ms_ok = r.ms_residuals.iter().all(|x| x == "0");
        out.push(NamedCheck::new(
            format!("{id}/equation"),
            ms_ok,
            r.ms_residuals.join(" ; "),
        ));
        out.push(NamedCheck::new(
            format!("{id}/compatibility"),
            r.compatibility_exact_zero || r.compatibility_residual_max <= FLOAT_TOL,
            format!(
                "exact={} max={:.3e}",
                r.compatibility_exact_zero, r.compatibility_residual_max
            ),
        ));
        out.push(NamedCheck::new(
            format!("{id}/ricci-skew"),
            r.skew_exact_zero || r.skew_residual_max <= FLOAT_TOL,
            format!(
                "exact={} max={:.3e}",
                r.skew_exact_zero, r.skew_residual_max
            ),
        ));
        out.push(NamedCheck::new(
            format!("{id}/einstein-weyl"),
            r.ew_exact_zero || r.ew_residual_max <= FLOAT_TOL,
            format!(
                "exact={} max={:.3e} lambda={}",
                r.ew_exact_zero, r.ew_residual_max, r.lambda
            ),
        ));
    }
    if sign == CORRECTION_SIGN {
        let bogus = Solution::unchecked(
            Expr::x() * Expr::x() * Expr::y(),
            Expr::zero(),
            Default::default(),
            "x^2*y",
        )?;
        let rejected = bogus.verify();
        out.push(NamedCheck::new(
            "non-solution-rejected",
            rejected.is_err(),
            err_detail(rejected),
        ));
        out.extend(sl2_constant_checks()?);
    }
    Ok(out)
}

/// The invariants of the `sl2` family against the claimed constants.
pub fn sl2_constant_checks() -> Result<Vec<NamedCheck>> {
    let s = catalog(CatalogId::Sl2Family, &[])?;
    let mut out = Vec::new();
    for (name, want) in sl2_constants() {
        let i: usize = name[1..].parse().expect("index");
        let e = if name.starts_with('I') {
            invariant(i)
        } else {
            structure_k(i)?
        };
        let check = match s.substitute_jets(&e) {
            Ok(v) => match v.as_constant() {
                Some(c) => NamedCheck::eq(format!("sl2-family/{name}"), c, want),
                None => {
                    NamedCheck::fail(format!("sl2-family/{name}"), format!("not constant: {v}"))
                }
            },
            Err(err) => {
                let uxx = s.substitute_jets(&Expr::u(0, 2, 0))?;
                NamedCheck::fail(
                    format!("sl2-family/{name}"),
                    format!("undefined on the section ({err}); u_xx = {uxx}"),
                )
            }
        };
        out.push(check);
    }
    let c = sl2_consistency();
    out.push(NamedCheck::new(
        "sl2-family/constants-satisfy-identities",
        c.identity_residuals.iter().all(|r| r == "0"),
        c.identity_residuals.join(" ; "),
    ));
    out.push(NamedCheck::new(
        "sl2-family/structure-algebra-is-sl2",
        c.killing_det != "0" && c.killing_signature == (2, 1),
        format!(
            "Killing det {}, signature {:?}",
            c.killing_det, c.killing_signature
        ),
    ));
    Ok(out)
}

fn equivalence(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mut out = Vec::new();
    for id in [
        CatalogId::Hierarchy,
        CatalogId::ExpFamily,
        CatalogId::Sl2Family,
        CatalogId::Sl2Degenerate,
    ] {
        let s = catalog(id, &[])?;
        let formal = s.random_formal(rng);
        let (mut worst, mut compared, mut pattern_ok) = (0.0f64, 0usize, true);
        for _ in 0..10 {
            let p = PseudogroupElement::random(rng);
            let t = apply_pseudogroup(&p, &s)?;
            let pts = t.random_points(3, rng)?;
            let a = signature_values(&s, &pts, &formal)?;
            let b = signature_values(&t, &pts, &formal)?;
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                match (x, y) {
                    (Some(x), Some(y)) => {
                        let d = (x.to_f64() - y.to_f64()).abs() / (1.0 + x.to_f64().abs());
                        worst = worst.max(d);
                        compared += 1;
                    }
                    (None, None) => {}
                    _ => pattern_ok = false,
                }
            }
        }
        out.push(NamedCheck::new(
            format!("{id}/invariant-under-pseudogroup"),
            pattern_ok && compared > 0 && worst <= FLOAT_TOL,
            format!("{compared} values, worst relative difference {worst:.3e}"),
        ));
    }
    let sampler = Sampler {
        n: 16,
        seed: rng_seed(rng),
        ..Sampler::default()
    };
    let cloud = |id: CatalogId, rng: &mut ChaCha8Rng| -> Result<_> {
        let s = catalog(id, &[])?;
        let f = s.random_formal(rng);
        signature(&s, &sampler, &f)
    };
    let a = cloud(CatalogId::Sl2Family, rng)?;
    let b = cloud(CatalogId::ExpFamily, rng)?;
    let c = compare(&a, &b, FLOAT_TOL)?;
    out.push(NamedCheck::new(
        "sl2-vs-exp-distinct",
        c.verdict == Verdict::Distinct,
        format!("{:?} hausdorff={:.3e}", c.verdict, c.hausdorff),
    ));
    let theta = random_regular_point(3, rng);
    out.push(NamedCheck::eq(
        "generic-solution-signature-rank",
        jet_signature_rank(&theta)?,
        3,
    ));
    for id in [CatalogId::Trivial, CatalogId::DkpPartial] {
        let s = catalog(id, &[])?;
        let r = signature(&s, &sampler, &BTreeMap::new());
        let ok = matches!(&r, Err(Error::AllSamplesSingular(m)) if m.contains("u_x"));
        let detail = match r {
            Ok(_) => "signature computed".to_string(),
            Err(e) => e.to_string(),
        };
        out.push(NamedCheck::new(format!("{id}/singular-branch"), ok, detail));
    }
    Ok(out)
}

fn rng_seed(rng: &mut ChaCha8Rng) -> u64 {
    use rand::Rng;
    rng.gen_range(0..1_000_000)
}

/// The geometry suite rerun with the opposite correction sign must fail.
fn mutation(rng: &mut ChaCha8Rng) -> Result<Vec<NamedCheck>> {
    let mutated = geometry(rng, -CORRECTION_SIGN)?;
    let failing: Vec<&str> = mutated
        .iter()
        .filter(|c| !c.ok)
        .map(|c| c.name.as_str())
        .collect();
    let skew_fails = failing
        .iter()
        .any(|n| n.ends_with("ricci-skew") || n.ends_with("compatibility"));
    Ok(vec![NamedCheck::new(
        "sign-flip-detected",
        skew_fails,
        format!(
            "{} of {} geometry checks fail: {}",
            failing.len(),
            mutated.len(),
            failing.join(", ")
        ),
    )])
}

/// Einstein-Weyl check of a solution at `n` random points (used by the CLI).
pub fn check_solution(
    s: &Solution,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<crate::geometry::EwReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = s.random_points(n, &mut rng)?;
    let formal = s.random_formal(&mut rng);
    check_ew(s, &pts, &formal, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_sorted_and_deterministic() {
        let a = verify_all(&[Suite::Counts, Suite::Coframe], 3);
        let b = verify_all(&[Suite::Coframe, Suite::Counts], 3);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.checks.windows(2).all(|w| w[0].name <= w[1].name));
        assert!(
            a.ok,
            "{:?}",
            a.checks.iter().filter(|c| !c.ok).collect::<Vec<_>>()
        );
    }

    #[test]
    fn only_filters_suites() {
        let s = verify_all(&[Suite::Table], 0);
        assert_eq!(s.checks.len(), 25);
        assert!(s.checks.iter().all(|c| c.name.starts_with("table/")));
    }

    #[test]
    fn sl2_invariants_and_structure_coefficients() {
        let checks = sl2_constant_checks().unwrap();
        for c in &checks {
            let is_i = !c.name.contains("/K");
            assert_eq!(c.ok, is_i, "{c:?}");
        }
    }
}
