use ewjet::catalog::{catalog, CatalogId};
use ewjet::dsl::print_solution;
use ewjet::expr::Expr;
use ewjet::symmetry::{
    apply_pseudogroup, apply_pseudogroup_flat, reflect, reflect_flat, PseudogroupElement,
    Reflection,
};

fn main() -> ewjet::Result<()> {
    let s = catalog(CatalogId::ExpFamily, &[Expr::zero(), Expr::zero()])?;
    print!("source:\n{}", print_solution(&s));

    // x -> x + t with E = 1, D = t
    let p = PseudogroupElement::new(
        Expr::t(),
        Expr::one(),
        Expr::t(),
        Expr::zero(),
        Expr::zero(),
        Expr::one(),
    )?;
    let flat = apply_pseudogroup_flat(&p, &s)?;
    print!("translated:\n{}", print_solution(&flat));
    println!("solves the equation: {}", flat.verify().is_ok());

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
    let q = PseudogroupElement::random(&mut rng);
    let charted = apply_pseudogroup(&q, &s)?;
    let map = &charted.chart.as_ref().expect("charted").map;
    println!(
        "random element, new coordinates ({}, {}, {})",
        map[0], map[1], map[2]
    );
    println!("solves the equation: {}", charted.verify().is_ok());

    for r in [Reflection::Txy, Reflection::Yu] {
        let out = reflect_flat(r, &s).or_else(|_| reflect(r, &s))?;
        print!("{r:?}:\n{}", print_solution(&out));
        println!("solves the equation: {}", out.verify().is_ok());
    }
    Ok(())
}
