//! Acceptance run: one line per criterion, then a single verdict.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ewjet::catalog::{catalog, CatalogId};
use ewjet::equivalence::{compare, signature, signature_values, Sampler, Verdict};
use ewjet::error::Error;
use ewjet::expr::{q, qr, Expr, Var, Q};
use ewjet::geometry::{check_ew_with_sign, EwReport, CORRECTION_SIGN};
use ewjet::invariants::{
    apply_derivation, basic_invariants, coframe_rewrite, h, invariant, jacobian_rank,
    poincare_series, random_regular_point, structure_k, verify_derivation_commutators,
    verify_identities, verify_invariance, Series,
};
use ewjet::jet::JetPoint;
use ewjet::symmetry::{
    apply_pseudogroup, check_symmetry, grading_check, induction_point, lift_shape_field,
    orbit_dimension, verify_commutation_table, Family, PseudogroupElement, ShapeField,
};

const TOL: f64 = 1e-9;
const TABLE_LIMIT: Duration = Duration::from_secs(30);
const ORBIT_K4_LIMIT: Duration = Duration::from_secs(120);
const SEED: u64 = 20_240_611;
const POINTS: usize = 20;
const PSEUDOGROUP_ELEMENTS: usize = 10;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            detail: detail.into(),
        }
    }
}

/// Collects sub-check failures for one criterion.
#[derive(Default)]
struct Tally {
    total: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn outcome(self, extra: &str) -> Outcome {
        let passed = self.total - self.failures.len();
        let mut detail = format!("{passed}/{} sub-checks", self.total);
        if !extra.is_empty() {
            detail.push_str(", ");
            detail.push_str(extra);
        }
        if !self.failures.is_empty() {
            detail.push_str("; failing: ");
            detail.push_str(&self.failures.join(" | "));
        }
        Outcome::new(self.failures.is_empty() && self.total > 0, detail)
    }
}

fn formal(name: &str) -> Expr {
    Expr::func(name, 0)
}

fn rng(offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED + offset)
}

fn table() -> Outcome {
    let start = Instant::now();
    let cells = verify_commutation_table();
    let elapsed = start.elapsed();
    let mut t = Tally::default();
    t.check(cells.len() == 25, || format!("{} cells", cells.len()));
    for c in &cells {
        t.check(c.ok && c.residual == "0", || {
            format!("[X{},X{}] residual {}", c.row, c.col, c.residual)
        });
    }
    t.check(elapsed < TABLE_LIMIT, || format!("took {elapsed:.1?}"));
    t.outcome(&format!("{elapsed:.2?} (limit {TABLE_LIMIT:?})"))
}

fn symmetry() -> Outcome {
    let mut t = Tally::default();
    for fam in Family::ALL {
        match check_symmetry(&fam.generator(&formal("f"))) {
            Ok(r) => t.check(r.is_symmetry(), || {
                format!("{fam}(f): {} ; {}", r.residuals.0, r.residuals.1)
            }),
            Err(e) => t.check(false, || format!("{fam}(f): {e}")),
        }
    }
    let g = grading_check();
    t.check(g.ok(), || {
        format!("grading perfect={} graded={}", g.perfect, g.graded)
    });
    t.outcome("")
}

fn lift() -> Outcome {
    let mut t = Tally::default();
    for fam in Family::ALL {
        match lift_shape_field(&ShapeField::single(fam, formal("f"))) {
            Ok(l) => {
                let diff = l.field.sub(&fam.generator(&formal("f")));
                t.check(diff.is_zero(), || {
                    format!("{fam}: lift minus generator = {diff}")
                });
            }
            Err(e) => t.check(false, || format!("{fam}: {e}")),
        }
    }
    let (a, b, c, d, e) = (
        formal("a"),
        formal("b"),
        formal("c"),
        formal("d"),
        formal("e"),
    );
    match lift_shape_field(&ShapeField::new(a, b, c, d.scale(&q(2)), e.clone())) {
        Ok(l) => {
            let want = (e + d.partial_var(Var::T)).scale(&q(2));
            let r = &l.chi - &want;
            t.check(r.is_zero(), || format!("chi residual {r}"));
        }
        Err(err) => t.check(false, || format!("general lift: {err}")),
    }
    t.outcome("")
}

fn orbits() -> Outcome {
    let mut t = Tally::default();
    let mut r = rng(4);
    let cases: [(u32, JetPoint, usize); 4] = [
        (1, JetPoint::random(1, &mut r), 11),
        (2, induction_point(2), 18),
        (3, induction_point(3), 23),
        (4, induction_point(4), 28),
    ];
    let mut k4 = Duration::ZERO;
    let mut dims = Vec::new();
    for (k, theta, want) in cases {
        let start = Instant::now();
        let got = orbit_dimension(k, &theta);
        if k == 4 {
            k4 = start.elapsed();
        }
        match got {
            Ok(d) => {
                dims.push(format!("k={k}: {d}"));
                t.check(d == want, || format!("k={k}: {d}, expected {want}"));
            }
            Err(e) => t.check(false, || format!("k={k}: {e}")),
        }
    }
    t.check(k4 < ORBIT_K4_LIMIT, || format!("k=4 took {k4:.1?}"));
    t.outcome(&format!(
        "{}, k=4 in {k4:.2?} (limit {ORBIT_K4_LIMIT:?})",
        dims.join(", ")
    ))
}

fn invariance() -> Outcome {
    let mut t = Tally::default();
    let mut items: Vec<(String, Result<Expr, Error>, u32)> = (1..=3)
        .map(|i| (format!("I{i}"), Ok(invariant(i)), 2))
        .collect();
    for i in 1..=4 {
        items.push((format!("K{i}"), structure_k(i), 3));
    }
    for i in 1..=3 {
        for j in 1..=3 {
            items.push((
                format!("nabla{j}(I{i})"),
                apply_derivation(j, &invariant(i)),
                3,
            ));
        }
    }
    for (name, e, k) in items {
        match e.and_then(|e| verify_invariance(&e, k)) {
            Ok(r) => {
                t.check(r.residuals.len() == 5, || {
                    format!("{name}: {} families", r.residuals.len())
                });
                for (fam, res) in &r.residuals {
                    t.check(res.is_zero(), || format!("{name} under {fam}: {res}"));
                }
            }
            Err(err) => t.check(false, || format!("{name}: {err}")),
        }
    }
    let rank = basic_invariants()
        .and_then(|b| {
            let zs: Vec<Expr> = b.into_iter().map(|(_, e)| e).collect();
            jacobian_rank(&zs, &random_regular_point(3, &mut rng(5)))
        })
        .map_err(|e| e.to_string());
    t.check(rank == Ok(12), || format!("Jacobian rank {rank:?}"));
    t.outcome(&format!(
        "rank {}",
        rank.map(|r| r.to_string()).unwrap_or_else(|e| e)
    ))
}

fn commutators() -> Outcome {
    let mut t = Tally::default();
    match verify_derivation_commutators() {
        Ok(cs) => {
            t.check(cs.len() == 3, || {
                format!("{} commutator relations", cs.len())
            });
            for c in cs {
                t.check(c.ok && c.residual == "0", || {
                    format!("{}: {}", c.name, c.residual)
                });
            }
        }
        Err(e) => t.check(false, || format!("commutators: {e}")),
    }
    match verify_identities() {
        Ok(cs) => {
            t.check(cs.len() == 2, || format!("{} identities", cs.len()));
            for c in cs {
                t.check(c.ok && c.residual == "0", || {
                    format!("{}: {}", c.name, c.residual)
                });
            }
        }
        Err(e) => t.check(false, || format!("identities: {e}")),
    }
    t.outcome("")
}

fn coframe() -> Outcome {
    let mut t = Tally::default();
    let cf = match coframe_rewrite() {
        Ok(cf) => cf,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let i2 = invariant(2);
    let int = Expr::int;
    let want = [
        [int(0), int(0), int(2)],
        [int(0), int(-1), int(1)],
        [int(2), int(1), i2.scale(&q(4)) - int(1)],
    ];
    for (i, (row, want_row)) in cf.g_prime.iter().zip(&want).enumerate() {
        for (j, (g, w)) in row.iter().zip(want_row).enumerate() {
            let r = g - w;
            t.check(r.is_zero(), || {
                format!("G'[{}][{}] off by {r}", i + 1, j + 1)
            });
        }
    }
    let ux = Expr::u(0, 1, 0);
    let r = &cf.coframe_det + &(&ux * &ux * &ux);
    t.check(r.is_zero(), || {
        format!("coframe determinant plus u_x^3 = {r}")
    });
    t.outcome("")
}

/// Coefficients of `num(z) / (1 - z)^pow` by repeated partial sums.
fn expand(num: &[i64], pow: u32, order: usize) -> Vec<i64> {
    let mut c: Vec<i64> = (0..=order)
        .map(|i| num.get(i).copied().unwrap_or(0))
        .collect();
    for _ in 0..pow {
        for i in 1..c.len() {
            c[i] += c[i - 1];
        }
    }
    c
}

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn counts() -> Outcome {
    let mut t = Tally::default();
    for k in 2..=6i64 {
        let s: i64 = (0..=k as u32).map(|i| h(Series::Ms, i)).sum();
        t.check(s == 2 * k * k - k - 3, || format!("ms s_{k} = {s}"));
        if k > 2 {
            let hk = h(Series::Ms, k as u32);
            t.check(hk == 4 * k - 3, || format!("ms h_{k} = {hk}"));
            let weyl = h(Series::Weyl, k as u32);
            t.check(2 * weyl == 5 * k * k + 7 * k - 6, || {
                format!("weyl h_{k} = {weyl}")
            });
            t.check(weyl == 9 * binom(k + 2, 2) - 4 * binom(k + 3, 2), || {
                format!("weyl h_{k} from dimensions")
            });
            let ew = h(Series::EwGeneral, k as u32);
            t.check(ew == 3 * (2 * k - 1), || format!("ew-general h_{k} = {ew}"));
            t.check(ew == weyl - 5 * binom(k, 2), || {
                format!("ew-general h_{k} from dimensions")
            });
        }
    }
    for (series, h2) in [(Series::Weyl, 13), (Series::EwGeneral, 8), (Series::Ms, 3)] {
        t.check(h(series, 2) == h2, || {
            format!("{series:?} h_2 = {}", h(series, 2))
        });
    }
    let printed: [(Series, &[i64], u32); 3] = [
        (Series::Weyl, &[0, 0, 13, -9, 0, 1], 3),
        (Series::EwGeneral, &[0, 0, 8, -1, -1], 2),
        (Series::Ms, &[0, 0, 3, 3, -2], 2),
    ];
    for (series, num, pow) in printed {
        let want = expand(num, pow, 8);
        let direct: Vec<i64> = (0..=8).map(|k| h(series, k)).collect();
        let lib = poincare_series(series, 8);
        t.check(direct == want, || {
            format!("{series:?}: h_k {direct:?} vs printed {want:?}")
        });
        t.check(lib == want, || {
            format!("{series:?}: series {lib:?} vs printed {want:?}")
        });
    }
    t.outcome("")
}

/// Fractional-power families are checked in floating point; the rest exactly.
fn exact_expected(id: CatalogId) -> bool {
    !matches!(id, CatalogId::Sl2Family | CatalogId::Sl2Degenerate)
}

fn ew_reports(sign: i64) -> Vec<(CatalogId, Result<EwReport, Error>)> {
    let mut r = rng(9);
    CatalogId::ALL
        .into_iter()
        .map(|id| {
            let rep = catalog(id, &[]).and_then(|s| {
                let pts = s.random_points(POINTS, &mut r)?;
                let formal = s.random_formal(&mut r);
                check_ew_with_sign(&s, &pts, &formal, TOL, sign)
            });
            (id, rep)
        })
        .collect()
}

fn geometry_tally(sign: i64) -> Tally {
    let mut t = Tally::default();
    for (id, rep) in ew_reports(sign) {
        let rep = match rep {
            Ok(rep) => rep,
            Err(e) => {
                t.check(false, || format!("{id}: {e}"));
                continue;
            }
        };
        t.check(rep.ms_residuals.iter().all(|r| r == "0"), || {
            format!("{id} equation residual {:?}", rep.ms_residuals)
        });
        let close = |exact: bool, max: f64| exact || (!exact_expected(id) && max <= TOL);
        t.check(
            close(rep.compatibility_exact_zero, rep.compatibility_residual_max),
            || format!("{id} compatibility {:.3e}", rep.compatibility_residual_max),
        );
        t.check(close(rep.skew_exact_zero, rep.skew_residual_max), || {
            format!("{id} Ric^skew - (3/2)d omega {:.3e}", rep.skew_residual_max)
        });
        t.check(close(rep.ew_exact_zero, rep.ew_residual_max), || {
            format!("{id} Einstein-Weyl {:.3e}", rep.ew_residual_max)
        });
    }
    t
}

fn geometry() -> Outcome {
    let mut t = geometry_tally(CORRECTION_SIGN);
    let claimed: [(&str, Q); 7] = [
        ("I1", qr(-3, 25)),
        ("I2", qr(21, 100)),
        ("I3", qr(-147, 500)),
        ("K1", q(1)),
        ("K2", q(0)),
        ("K3", qr(9, 50)),
        ("K4", qr(-9, 500)),
    ];
    let s = catalog(CatalogId::Sl2Family, &[]).expect("sl2 family");
    for (name, want) in claimed {
        let i: usize = name[1..].parse().unwrap();
        let e = if name.starts_with('I') {
            Ok(invariant(i))
        } else {
            structure_k(i)
        };
        match e.and_then(|e| s.substitute_jets(&e)) {
            Ok(v) => t.check(v.as_constant() == Some(want.clone()), || {
                format!("sl2 {name} = {v}, expected {want}")
            }),
            Err(err) => {
                let uxx = s
                    .substitute_jets(&Expr::u(0, 2, 0))
                    .map(|e| e.to_string())
                    .unwrap_or_default();
                t.check(false, || {
                    format!("sl2 {name} undefined on the section ({err}; u_xx = {uxx})")
                })
            }
        }
    }
    t.outcome("")
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

fn equivalence() -> Outcome {
    let mut t = Tally::default();
    let mut r = rng(10);
    for id in CatalogId::ALL {
        let res = (|| -> Result<(usize, f64, bool), Error> {
            let s = catalog(id, &[])?;
            let formal = s.random_formal(&mut r);
            let (mut compared, mut worst, mut pattern) = (0usize, 0.0f64, true);
            for _ in 0..PSEUDOGROUP_ELEMENTS {
                let g = PseudogroupElement::random(&mut r);
                let moved = apply_pseudogroup(&g, &s)?;
                let pts = moved.random_points(3, &mut r)?;
                let a = signature_values(&s, &pts, &formal)?;
                let b = signature_values(&moved, &pts, &formal)?;
                for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                    match (x, y) {
                        (Some(x), Some(y)) => {
                            worst = worst.max(relative(x.to_f64(), y.to_f64()));
                            compared += 1;
                        }
                        (None, None) => {}
                        _ => pattern = false,
                    }
                }
            }
            Ok((compared, worst, pattern))
        })();
        match res {
            Ok((compared, worst, pattern)) => t.check(pattern && worst <= TOL, || {
                format!("{id}: {compared} values, worst {worst:.3e}, pattern {pattern}")
            }),
            Err(e) => t.check(false, || format!("{id}: {e}")),
        }
    }
    let sampler = Sampler {
        n: 16,
        seed: SEED,
        ..Sampler::default()
    };
    let cloud = |id: CatalogId, r: &mut ChaCha8Rng| {
        let s = catalog(id, &[])?;
        let f = s.random_formal(r);
        signature(&s, &sampler, &f)
    };
    let verdict = cloud(CatalogId::Sl2Family, &mut r)
        .and_then(|a| Ok((a, cloud(CatalogId::ExpFamily, &mut r)?)))
        .and_then(|(a, b)| compare(&a, &b, TOL));
    match verdict {
        Ok(c) => t.check(c.verdict == Verdict::Distinct, || {
            format!("sl2 vs exp: {:?}", c.verdict)
        }),
        Err(e) => t.check(false, || format!("sl2 vs exp: {e}")),
    }
    let trivial =
        catalog(CatalogId::Trivial, &[]).and_then(|s| signature(&s, &sampler, &BTreeMap::new()));
    let singular = matches!(&trivial, Err(Error::AllSamplesSingular(m)) if m.contains("u_x"));
    t.check(singular, || {
        format!("trivial solution: {:?}", trivial.as_ref().err())
    });
    t.outcome("")
}

fn mutation() -> Outcome {
    let t = geometry_tally(-CORRECTION_SIGN);
    let failing = t.failures.len();
    Outcome::new(
        failing > 0,
        format!(
            "flipped correction sign: {failing} of {} geometry sub-checks fail",
            t.total
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("commutation table", table),
        ("symmetry algebra", symmetry),
        ("shape-field lift", lift),
        ("orbit dimensions", orbits),
        ("invariance", invariance),
        ("commutators and identities", commutators),
        ("canonical coframe", coframe),
        ("counting", counts),
        ("geometry", geometry),
        ("equivalence", equivalence),
        ("mutation sanity", mutation),
    ];
    let mut failed = Vec::new();
    for (n, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {:>2} {} {name}: {}",
            n + 1,
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.ok {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
