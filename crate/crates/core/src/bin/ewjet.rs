use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ewjet::dsl::{parse_expr, parse_jet_expr, parse_solution, print_solution};
use ewjet::equivalence::{compare, signature, Sampler, SignatureCloud};
use ewjet::error::{EXIT_CHECK_FAILED, EXIT_USAGE};
use ewjet::expr::{set_precision_bits, Symbol, Var, Q};
use ewjet::fields::PointField;
use ewjet::invariants::{
    basic_invariants, coframe_rewrite, counting, expected_g_prime, invariant, poincare_series,
    structure_k, verify_derivation_commutators, verify_identities, verify_invariance, Series,
};
use ewjet::jet::{dims, EquationSystem, JetPoint};
use ewjet::report::{check_solution, verify_all, Suite};
use ewjet::solution::Solution;
use ewjet::symmetry::{
    apply_pseudogroup, apply_pseudogroup_flat, check_symmetry, grading_check, induction_point,
    orbit_dimension, reflect, reflect_flat, verify_commutation_table, Family, PseudogroupElement,
    Reflection,
};
use ewjet::{Error, Expr, Result};

const EXIT_CODES: &str = "\
Exit codes:
   0  success, every check passed
   1  a check failed
   2  command-line usage error
   3  syntax error in an expression or solution
   4  unknown identifier or catalog id
   5  input is not a solution of the system
   6  singular locus (u_x = 0 or u_xx = 0) or degenerate frame
   7  degenerate metric
   8  pole, domain violation or fractional power of a negative base
   9  jet order or point outside the equation manifold
  10  non-invertible pseudogroup element or inconsistent lift
  11  expression not representable (zero denominator, unbound symbol)
  12  signature clouds with different precision classes
  13  invalid argument
  14  I/O error

Environment:
  EWJET_PRECISION_BITS  default working precision for approximate evaluation";

/// Exact jet calculus for 3D Einstein-Weyl structures in Manakov-Santini normal form.
#[derive(Parser)]
#[command(name = "ewjet", version, after_help = EXIT_CODES)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for random points and formal-function values.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Significant bits for approximate evaluation.
    #[arg(long, global = true, env = "EWJET_PRECISION_BITS")]
    precision: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of J^k, the equation manifold and the equation's symbol.
    Dims { k: u32 },
    /// Reduce a jet expression on the equation.
    Reduce {
        expr: String,
        /// Jet order of the result (defaults to the order cap).
        #[arg(long)]
        order: Option<u32>,
    },
    /// Verify the 25 cells of the commutation table.
    VerifyTable,
    /// Check whether a point field is a symmetry.
    CheckSymmetry(FieldArgs),
    /// Check the grading of the symmetry algebra.
    Grading,
    /// Dimension of the orbit through a point of the equation manifold.
    OrbitDim {
        k: u32,
        #[arg(long, value_enum, default_value_t = PointKind::Random)]
        point: PointKind,
    },
    /// Differential invariants.
    Invariants {
        #[command(subcommand)]
        action: InvariantsAction,
    },
    /// Lie derivatives of a jet expression along all five families.
    VerifyInvariance {
        expr: String,
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Commutation relations of the invariant derivations.
    VerifyCommutators,
    /// The identities relating I1, I3 to I2 and the structure coefficients.
    VerifyIdentities,
    /// Metric and 1-form in the invariant coframe.
    Coframe,
    /// Numbers of independent invariants by order.
    Counts {
        #[arg(long, value_enum)]
        series: Series,
        /// Highest order listed.
        #[arg(long, default_value_t = 8)]
        max: u32,
    },
    /// Einstein-Weyl check of a solution.
    CheckSolution {
        #[command(flatten)]
        solution: SolutionArg,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Apply a pseudogroup element or a reflection to a solution.
    Transform(TransformArgs),
    /// Sample the signature of a solution.
    Signature {
        #[command(flatten)]
        solution: SolutionArg,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Write the cloud as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the cloud as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare two signature clouds.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run every check.
    VerifyAll {
        /// Restrict to these suites.
        #[arg(long, value_enum, value_delimiter = ',')]
        only: Vec<Suite>,
    },
}

#[derive(Subcommand)]
enum InvariantsAction {
    /// List I1..I3, K1..K4 and the twelve basic invariants.
    List,
    /// Evaluate an invariant (by name) or a jet expression at a point.
    Eval {
        /// `I1`, `K3`, `I21`, ... or a jet expression.
        expr: String,
        /// Assignments such as `u_x=1, u_xx=2, y=1/2`; others are zero.
        #[arg(long, default_value = "")]
        at: String,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// One of the five families, with `--param`.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5), conflicts_with = "field")]
    family: Option<u8>,
    /// Function of t for `--family`.
    #[arg(long, default_value = "f(t)")]
    param: String,
    /// Components `T; X; Y; U; V` of a point field.
    #[arg(long)]
    field: Option<String>,
}

#[derive(Args)]
struct SolutionArg {
    /// Solution text or catalog reference, e.g. `exp-family(1, t)`.
    #[arg(required_unless_present = "file")]
    solution: Option<String>,
    /// Read the solution from a file.
    #[arg(long, conflicts_with = "solution")]
    file: Option<PathBuf>,
}

impl SolutionArg {
    fn load(&self) -> Result<Solution> {
        let text = match (&self.solution, &self.file) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => std::fs::read_to_string(p)?,
            (None, None) => return Err(Error::InvalidArgument("no solution given".into())),
        };
        parse_solution(&text)
    }
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    solution: SolutionArg,
    /// Apply a reflection instead of a connected element.
    #[arg(long, value_enum)]
    reflect: Option<Reflection>,
    /// Draw a random connected element from the seed.
    #[arg(long, conflicts_with = "reflect")]
    random: bool,
    /// Time change D(t) (with --sigma = sqrt(D')).
    #[arg(long, default_value = "t")]
    d: String,
    #[arg(long, default_value = "1")]
    sigma: String,
    #[arg(long, default_value = "0")]
    a: String,
    #[arg(long, default_value = "0")]
    b: String,
    #[arg(long, default_value = "0")]
    c: String,
    #[arg(long, default_value = "1")]
    e: String,
    /// Keep the chart representation instead of solving for the new coordinates.
    #[arg(long)]
    charted: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointKind {
    Random,
    /// `u_x = u_xx = 1`, everything else zero.
    Induction,
}

/// Result of a command: JSON payload and whether all checks in it passed.
struct Outcome {
    value: Value,
    ok: bool,
}

impl Outcome {
    fn info(value: Value) -> Self {
        Outcome { value, ok: true }
    }

    fn check(value: Value, ok: bool) -> Self {
        Outcome { value, ok }
    }
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(bits) = cli.precision {
        if let Err(e) = set_precision_bits(bits) {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    }
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&out.value).expect("serializable")
                ));
            } else {
                let mut text = String::new();
                render(&out.value, 0, &mut text);
                emit(&text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            if cli.json {
                emit(&format!(
                    "{}\n",
                    json!({ "error": e.to_string(), "exit_code": e.exit_code() })
                ));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn checks_value<T: serde::Serialize>(items: &[T]) -> Value {
    serde_json::to_value(items).expect("serializable")
}

fn run(cli: &Cli) -> Result<Outcome> {
    let sys = EquationSystem::shared();
    Ok(match &cli.command {
        Command::Dims { k } => {
            let (j, ms, sym) = dims(*k);
            Outcome::info(json!({ "k": k, "jet_space": j, "equation": ms, "symbol": sym }))
        }
        Command::Reduce { expr, order } => {
            let e = parse_jet_expr(expr)?;
            let r = sys.reduce(&e, order.unwrap_or(sys.order_cap()))?;
            Outcome::info(json!({ "input": e.to_string(), "reduced": r.to_string() }))
        }
        Command::VerifyTable => {
            let cells = verify_commutation_table();
            let ok = cells.iter().all(|c| c.ok);
            Outcome::check(json!({ "ok": ok, "cells": checks_value(&cells) }), ok)
        }
        Command::CheckSymmetry(f) => {
            let field = field_from(f)?;
            let r = check_symmetry(&field)?;
            let ok = r.is_symmetry();
            Outcome::check(
                json!({
                    "field": field.to_string(),
                    "symmetry": ok,
                    "residuals": [r.residuals.0.to_string(), r.residuals.1.to_string()],
                }),
                ok,
            )
        }
        Command::Grading => {
            let g = grading_check();
            Outcome::check(serde_json::to_value(&g)?, g.ok())
        }
        Command::OrbitDim { k, point } => {
            let p = match point {
                PointKind::Random => JetPoint::random(*k, &mut rng(cli.seed)),
                PointKind::Induction => induction_point(*k),
            };
            let d = orbit_dimension(*k, &p)?;
            Outcome::info(json!({ "k": k, "dimension": d, "point": point_value(&p) }))
        }
        Command::Invariants { action } => match action {
            InvariantsAction::List => {
                let mut m = serde_json::Map::new();
                for i in 1..=3 {
                    m.insert(format!("I{i}"), invariant(i).to_string().into());
                }
                for i in 1..=4 {
                    m.insert(format!("K{i}"), structure_k(i)?.to_string().into());
                }
                for (name, e) in basic_invariants()?.into_iter().skip(3) {
                    m.insert(name, e.to_string().into());
                }
                Outcome::info(Value::Object(m))
            }
            InvariantsAction::Eval { expr, at } => {
                let e = named_invariant(expr)?;
                let p = parse_point(at, &e)?;
                let v = p.eval(sys, &e)?;
                Outcome::info(
                    json!({ "expr": e.to_string(), "point": point_value(&p), "value": v.to_string() }),
                )
            }
        },
        Command::VerifyInvariance { expr, order } => {
            let e = named_invariant(expr)?;
            let r = verify_invariance(&e, *order)?;
            let res: BTreeMap<String, String> = r
                .residuals
                .iter()
                .map(|(f, e)| (f.to_string(), e.to_string()))
                .collect();
            Outcome::check(
                json!({ "expr": e.to_string(), "invariant": r.is_invariant(), "residuals": res }),
                r.is_invariant(),
            )
        }
        Command::VerifyCommutators => {
            let c = verify_derivation_commutators()?;
            let ok = c.iter().all(|c| c.ok);
            Outcome::check(json!({ "ok": ok, "checks": checks_value(&c) }), ok)
        }
        Command::VerifyIdentities => {
            let c = verify_identities()?;
            let ok = c.iter().all(|c| c.ok);
            Outcome::check(json!({ "ok": ok, "checks": checks_value(&c) }), ok)
        }
        Command::Coframe => {
            let cf = coframe_rewrite()?;
            let want = expected_g_prime();
            let ok = (0..3).all(|i| (0..3).all(|j| cf.g_prime[i][j] == want[i][j]));
            let mat = |m: &ewjet::linalg::Mat3| -> Value {
                m.iter()
                    .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
                    .into()
            };
            let vec3 = |v: &[Expr; 3]| -> Value {
                v.iter().map(ToString::to_string).collect::<Vec<_>>().into()
            };
            Outcome::check(
                json!({
                    "g_prime": mat(&cf.g_prime),
                    "g_prime_matches": ok,
                    "omega": vec3(&cf.omega_plain),
                    "omega_adjusted": vec3(&cf.omega_adjusted),
                    "frame_det": cf.frame_det.to_string(),
                    "coframe_det": cf.coframe_det.to_string(),
                }),
                ok,
            )
        }
        Command::Counts { series, max } => {
            let records: Vec<_> = (0..=*max).map(|k| counting(*series, k)).collect();
            let pz = poincare_series(*series, *max as usize);
            Outcome::info(json!({ "records": checks_value(&records), "poincare_series": pz }))
        }
        Command::CheckSolution {
            solution,
            points,
            tol,
        } => {
            let s = solution.load()?;
            let r = check_solution(&s, *points, *tol, cli.seed)?;
            Outcome::check(serde_json::to_value(&r)?, r.pass)
        }
        Command::Transform(t) => transform(t, cli.seed)?,
        Command::Signature {
            solution,
            n,
            out,
            csv,
        } => {
            let s = solution.load()?;
            let formal = s.random_formal(&mut rng(cli.seed));
            let sampler = Sampler {
                n: *n,
                seed: cli.seed,
                ..Sampler::default()
            };
            let cloud = signature(&s, &sampler, &formal)?;
            if let Some(p) = out {
                std::fs::write(p, serde_json::to_string_pretty(&cloud)?)?;
            }
            if let Some(p) = csv {
                std::fs::write(p, cloud_csv(&cloud))?;
            }
            Outcome::info(serde_json::to_value(&cloud)?)
        }
        Command::Compare { a, b, tol } => {
            let load = |p: &PathBuf| -> Result<SignatureCloud> {
                Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?)
            };
            let c = compare(&load(a)?, &load(b)?, *tol)?;
            Outcome::info(serde_json::to_value(&c)?)
        }
        Command::VerifyAll { only } => {
            let s = verify_all(only, cli.seed);
            let ok = s.ok;
            Outcome::check(serde_json::to_value(&s)?, ok)
        }
    })
}

fn field_from(f: &FieldArgs) -> Result<PointField> {
    if let Some(text) = &f.field {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != 5 {
            return Err(Error::InvalidArgument(
                "a field has five components `T; X; Y; U; V`".into(),
            ));
        }
        let mut c: [Expr; 5] = Default::default();
        for (slot, p) in c.iter_mut().zip(parts) {
            *slot = parse_jet_expr(p)?;
        }
        return PointField::new(c);
    }
    let fam = Family::from_number(f.family.unwrap_or(1) as usize).expect("range checked");
    let p = parse_expr(&f.param)?;
    if !p.depends_on_t_only() {
        return Err(Error::InvalidArgument(format!(
            "`{p}` is not a function of t"
        )));
    }
    Ok(fam.generator(&p))
}

/// `I1`, `K2`, `I31` by name, otherwise a jet expression.
fn named_invariant(text: &str) -> Result<Expr> {
    let t = text.trim();
    let idx = |s: &str| s.parse::<usize>().ok();
    if let Some(rest) = t.strip_prefix('K') {
        if let Some(i @ 1..=4) = idx(rest) {
            return structure_k(i);
        }
    }
    if let Some(rest) = t.strip_prefix('I') {
        if let Some((_, e)) = basic_invariants()?.into_iter().find(|(n, _)| n == t) {
            return Ok(e);
        }
        if idx(rest).is_some() {
            return Err(Error::UnknownIdentifier(t.to_string()));
        }
    }
    parse_jet_expr(t)
}

fn parse_point(text: &str, e: &Expr) -> Result<JetPoint> {
    let k = e
        .symbols()
        .iter()
        .filter_map(|s| s.as_jet())
        .map(|j| j.order())
        .max()
        .unwrap_or(0);
    let mut base = [
        Q::from_integer(0.into()),
        Q::from_integer(0.into()),
        Q::from_integer(0.into()),
    ];
    let mut values = Vec::new();
    let mut order = k;
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (lhs, rhs) = item.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("expected `name=value`, found `{item}`"))
        })?;
        let value = parse_expr(rhs)?
            .as_constant()
            .ok_or_else(|| Error::InvalidArgument(format!("`{rhs}` is not a rational constant")))?;
        match parse_jet_expr(lhs)?
            .symbols()
            .into_iter()
            .collect::<Vec<_>>()
            .as_slice()
        {
            [Symbol::Base(v)] => base[v.index()] = value,
            [Symbol::Jet(j)] => {
                order = order.max(j.order());
                values.push((*j, value));
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "`{lhs}` is not a coordinate"
                )))
            }
        }
    }
    JetPoint::from_assignments(order, base, values)
}

fn point_value(p: &JetPoint) -> Value {
    let mut m = serde_json::Map::new();
    for v in Var::ALL {
        m.insert(v.to_string(), p.base[v.index()].to_string().into());
    }
    for (j, q) in p.internal_values() {
        if !num_is_zero(q) {
            m.insert(j.to_string(), q.to_string().into());
        }
    }
    Value::Object(m)
}

fn num_is_zero(q: &Q) -> bool {
    *q == Q::from_integer(0.into())
}

fn transform(t: &TransformArgs, seed: u64) -> Result<Outcome> {
    let s = t.solution.load()?;
    let out = if let Some(r) = t.reflect {
        if t.charted {
            reflect(r, &s)?
        } else {
            reflect_flat(r, &s).or_else(|_| reflect(r, &s))?
        }
    } else {
        let p = if t.random {
            PseudogroupElement::random(&mut rng(seed))
        } else {
            let f = |x: &str| parse_expr(x);
            PseudogroupElement::new(
                f(&t.d)?,
                f(&t.sigma)?,
                f(&t.a)?,
                f(&t.b)?,
                f(&t.c)?,
                f(&t.e)?,
            )?
        };
        if t.charted {
            apply_pseudogroup(&p, &s)?
        } else {
            apply_pseudogroup_flat(&p, &s).or_else(|_| apply_pseudogroup(&p, &s))?
        }
    };
    let verified = out.verify().is_ok();
    let chart = out
        .chart
        .as_ref()
        .map(|c| c.map.iter().map(ToString::to_string).collect::<Vec<_>>());
    Ok(Outcome::check(
        json!({
            "provenance": out.provenance,
            "solution": print_solution(&out),
            "representation": if chart.is_some() { "chart: components in source coordinates" } else { "graph" },
            "chart": chart,
            "solves_equation": verified,
        }),
        verified,
    ))
}

fn cloud_csv(c: &SignatureCloud) -> String {
    let mut out = format!("t,x,y,{}\n", c.names.join(","));
    for (pt, row) in c.points.iter().zip(&c.values) {
        let vals: Vec<String> = row
            .iter()
            .map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default())
            .collect();
        out.push_str(&format!("{},{}\n", pt.join(","), vals.join(",")));
    }
    out
}

/// Plain-text rendering of a JSON payload.
fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if x.is_object()
                    || (x.is_array()
                        && x.as_array()
                            .is_some_and(|a| a.iter().any(|e| e.is_object())))
                {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render(x, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", scalar(x)));
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if let Some(m) = x.as_object() {
                    let line: Vec<String> = m
                        .iter()
                        .map(|(k, y)| format!("{k}={}", scalar(y)))
                        .collect();
                    out.push_str(&format!("{pad}- {}\n", line.join("  ")));
                } else {
                    out.push_str(&format!("{pad}- {}\n", scalar(x)));
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
