use ewjet::dsl::{parse_expr, parse_jet_expr};
use ewjet::equivalence::{compare, Precision, SignatureCloud, Verdict};
use ewjet::expr::{Exponent, Expr, JetVar, Symbol, Var, Q};
use ewjet::fields::PointField;
use ewjet::jet::{dims, internal_coordinates, total_derivative_raw, EquationSystem, JetPoint};
use ewjet::symmetry::Family;
use num_bigint::BigInt;
use proptest::prelude::*;

fn qv(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn leaf(allow_jets: bool) -> BoxedStrategy<Expr> {
    let mut atoms = vec![
        Expr::t(),
        Expr::x(),
        Expr::y(),
        Expr::func("f", 0),
        Expr::exp_atom(Var::Y, Exponent::from(1)),
    ];
    if allow_jets {
        atoms.extend([
            Expr::u(0, 0, 0),
            Expr::u(0, 1, 0),
            Expr::v(0, 0, 1),
            Expr::u(0, 1, 1),
            Expr::v(0, 2, 0),
        ]);
    }
    prop_oneof![
        (-5i64..=5, 1i64..=3).prop_map(|(n, d)| Expr::rational(n, d)),
        proptest::sample::select(atoms),
    ]
    .boxed()
}

fn expr_with(allow_jets: bool, division: bool) -> BoxedStrategy<Expr> {
    leaf(allow_jets)
        .prop_recursive(3, 12, 2, move |inner| {
            let base = prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            ];
            if division {
                prop_oneof![
                    3 => base,
                    1 => (inner.clone(), inner).prop_map(|(a, b)| a / (Expr::one() + &b * &b)),
                ]
                .boxed()
            } else {
                base.boxed()
            }
        })
        .boxed()
}

fn poly_expr() -> BoxedStrategy<Expr> {
    expr_with(true, false)
}

fn rational_expr() -> BoxedStrategy<Expr> {
    expr_with(true, true)
}

fn base_expr() -> BoxedStrategy<Expr> {
    expr_with(false, true)
}

/// Expressions in `t`, `x`, `y` and the jets of `u`, `v` only.
fn jet_expr() -> BoxedStrategy<Expr> {
    let atoms = vec![
        Expr::t(),
        Expr::x(),
        Expr::y(),
        Expr::u(0, 0, 0),
        Expr::u(0, 1, 0),
        Expr::v(0, 0, 1),
        Expr::u(0, 0, 2),
        Expr::v(0, 1, 0),
    ];
    prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        proptest::sample::select(atoms)
    ]
    .prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner).prop_map(|(a, b)| a * b),
        ]
    })
    .boxed()
}

fn time_param() -> impl Strategy<Value = Expr> {
    (-3i64..=3, -3i64..=3, -2i64..=2).prop_map(|(a, b, c)| {
        Expr::int(a) + Expr::t() * Expr::int(b) + Expr::t() * Expr::t() * Expr::int(c)
    })
}

fn family_field() -> impl Strategy<Value = PointField> {
    (1usize..=5, time_param()).prop_map(|(i, p)| Family::from_number(i).unwrap().generator(&p))
}

fn lookup_table(seed: &[i64]) -> impl Fn(Symbol) -> Option<Q> + '_ {
    move |s: Symbol| {
        let h = format!("{s:?}")
            .bytes()
            .fold(0usize, |a, b| a.wrapping_mul(31).wrapping_add(b as usize));
        let n = seed[h % seed.len()];
        Some(qv(n, 1 + (h % 3) as i64))
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in poly_expr(), b in poly_expr(), c in poly_expr()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms_with_division(a in rational_expr(), b in rational_expr()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        let d = Expr::one() + &b * &b;
        prop_assert_eq!(&(&a / &d) * &d, a);
    }

    #[test]
    fn canonical_form_is_idempotent(a in rational_expr()) {
        let again = Expr::from_parts(a.numer().clone(), a.denom().clone()).unwrap();
        prop_assert_eq!(again, a);
    }

    #[test]
    fn partials_commute(a in rational_expr()) {
        let syms = [Symbol::T, Symbol::X, Symbol::Y, Symbol::Jet(JetVar::u(0, 1, 0)), Symbol::func("f", 0)];
        for s1 in syms {
            for s2 in syms {
                prop_assert_eq!(a.partial(s1).partial(s2), a.partial(s2).partial(s1));
            }
        }
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in rational_expr(), b in rational_expr(), seed in proptest::collection::vec(-7i64..=7, 5)) {
        let look = lookup_table(&seed);
        let (Ok(ea), Ok(eb)) = (a.eval(&look), b.eval(&look)) else { return Ok(()) };
        let sum = (&a + &b).eval(&look).unwrap();
        let prod = (&a * &b).eval(&look).unwrap();
        prop_assert!(sum.sub(&ea.add(&eb)).is_zero_rel(&Q::from_integer(1.into())));
        prop_assert!(prod.sub(&ea.mul(&eb)).is_zero_rel(&Q::from_integer(1.into())));
    }

    #[test]
    fn dsl_round_trip(a in base_expr()) {
        prop_assert_eq!(parse_expr(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn dsl_round_trip_with_jets(a in rational_expr()) {
        prop_assert_eq!(parse_jet_expr(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn fractional_powers_round_trip(n in -5i64..=5, d in 1i64..=4, c in -3i64..=3) {
        let e = Expr::base_pow(Var::Y, Exponent::new(n, d)).scale(&qv(c, 1)) + Expr::x();
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn total_derivatives_commute(a in jet_expr()) {
        for v in Var::ALL {
            for w in Var::ALL {
                let vw = total_derivative_raw(&total_derivative_raw(&a, v), w);
                let wv = total_derivative_raw(&total_derivative_raw(&a, w), v);
                prop_assert_eq!(vw, wv);
            }
        }
    }

    #[test]
    fn reduction_is_a_ring_homomorphism(a in jet_expr(), b in jet_expr()) {
        let sys = EquationSystem::shared();
        let (ra, rb) = (sys.reduce(&a, 3).unwrap(), sys.reduce(&b, 3).unwrap());
        prop_assert_eq!(sys.reduce(&(&a * &b), 3).unwrap(), sys.reduce(&(&ra * &rb), 3).unwrap());
        prop_assert_eq!(sys.reduce(&(&a + &b), 3).unwrap(), &ra + &rb);
    }

    #[test]
    fn reduction_commutes_with_total_derivatives(a in jet_expr()) {
        let sys = EquationSystem::shared();
        for v in Var::ALL {
            let direct = sys.reduce(&total_derivative_raw(&a, v), 3).unwrap();
            let via = sys.reduce(&total_derivative_raw(&sys.reduce(&a, 3).unwrap(), v), 3).unwrap();
            prop_assert_eq!(direct, via);
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(x in family_field(), y in family_field(), z in family_field()) {
        prop_assert!(x.bracket(&y).add(&y.bracket(&x)).is_zero());
        let j = x.bracket(&y.bracket(&z)).add(&y.bracket(&z.bracket(&x))).add(&z.bracket(&x.bracket(&y)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn prolongation_is_a_lie_algebra_morphism(x in family_field(), y in family_field()) {
        let k = 2;
        let (px, py, pxy) = (x.prolong(k), y.prolong(k), x.bracket(&y).prolong(k));
        let mut coords: Vec<Expr> = Var::ALL.iter().map(|&v| Expr::var(v)).collect();
        for order in 0..=k {
            for j in internal_coordinates(order) {
                coords.push(Expr::jet(j));
            }
        }
        coords.push(Expr::u(1, 1, 0));
        for c in coords {
            let lhs = pxy.apply(&c).unwrap();
            let rhs = px.apply(&py.apply(&c).unwrap()).unwrap() - py.apply(&px.apply(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs, "on {}", c);
        }
    }

    #[test]
    fn generating_section_determines_the_vertical_part(x in family_field(), a in time_param(), b in time_param()) {
        let c = x.coeffs();
        let other = PointField::new([c[0].clone(), c[1].clone(), c[2].clone(), &c[3] + &a, &c[4] + &b]).unwrap();
        let (s1, s2) = (x.generating_section(), other.generating_section());
        prop_assert_eq!(s1.phi_u == s2.phi_u && s1.phi_v == s2.phi_v, a.is_zero() && b.is_zero());
    }
}

#[test]
fn internal_coordinate_count() {
    for k in 0..=6u32 {
        let per_dep = (0..=k)
            .flat_map(|a| (0..=k - a).flat_map(move |b| (0..=k - a - b).map(move |c| (a, b, c))))
            .filter(|(a, b, _)| a * b == 0)
            .count() as u64;
        assert_eq!(per_dep, ((k + 1) * (k + 1)) as u64);
        let (_, ms, _) = dims(k);
        assert_eq!(ms - 3, 2 * per_dep);
        if k <= 4 {
            assert_eq!(internal_coordinates(k).len() as u64, 2 * per_dep);
        }
    }
}

#[test]
fn jet_point_rejects_principal_coordinates() {
    assert!(
        JetPoint::from_assignments(2, Default::default(), [(JetVar::u(1, 1, 0), qv(1, 1))])
            .is_err()
    );
}

fn cloud(rows: Vec<Vec<f64>>) -> SignatureCloud {
    SignatureCloud {
        points: rows
            .iter()
            .map(|_| ["0".to_string(), "0".to_string(), "0".to_string()])
            .collect(),
        exact: rows
            .iter()
            .map(|r| r.iter().map(|_| None).collect())
            .collect(),
        values: rows
            .into_iter()
            .map(|r| r.into_iter().map(Some).collect())
            .collect(),
        precision: Precision::Float { bits: 160 },
        solution_provenance: "synthetic".into(),
        names: vec!["z1".into(), "z2".into(), "z3".into()],
    }
}

fn cloud_strategy() -> impl Strategy<Value = SignatureCloud> {
    proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 1..8).prop_map(cloud)
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Distinct => 0,
        Verdict::Inconclusive => 1,
        Verdict::EquivalentEvidence => 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn comparison_is_symmetric(a in cloud_strategy(), b in cloud_strategy(), tol in 1e-6f64..1.0) {
        let (ab, ba) = (compare(&a, &b, tol).unwrap(), compare(&b, &a, tol).unwrap());
        prop_assert_eq!(ab.verdict, ba.verdict);
        prop_assert_eq!(ab.hausdorff, ba.hausdorff);
    }

    #[test]
    fn larger_tolerance_never_moves_back(a in cloud_strategy(), b in cloud_strategy(), t1 in 1e-6f64..1.0, f in 1.0f64..100.0) {
        let v1 = compare(&a, &b, t1).unwrap().verdict;
        let v2 = compare(&a, &b, t1 * f).unwrap().verdict;
        prop_assert!(rank(v2) >= rank(v1), "{:?} -> {:?}", v1, v2);
    }
}

#[test]
fn comparing_against_itself() {
    let a = cloud(vec![
        vec![0.0, 1.0, 2.0],
        vec![1.0, 1.0, 1.0],
        vec![0.5, 0.0, 1.0],
        vec![2.0, 1.0, 0.0],
    ]);
    assert_eq!(
        compare(&a, &a, 1e-9).unwrap().verdict,
        Verdict::EquivalentEvidence
    );
}
