use ewjet::dsl::{parse_jet_expr, parse_solution, print_solution};
use ewjet::jet::EquationSystem;

fn main() -> ewjet::Result<()> {
    let text = "u = y^(2/3) - 10/3*x*y^(-1)
v = 2/5*x*y^(-1/3) - 7/3*x^2*y^(-2) + 21/25*y^(4/3) + (f(t)*y^(1/3) + h(t))*y^2
domain y > 0";
    let s = parse_solution(text)?;
    let printed = print_solution(&s);
    print!("{printed}");
    let again = parse_solution(&printed)?;
    println!("round trip: {}", again.u == s.u && again.v == s.v);

    for bad in ["u = ; v = 0", "u = x + z; v = 0", "u = x^2*y; v = 0"] {
        println!("{bad:<20} -> {}", parse_solution(bad).unwrap_err());
    }

    let e = parse_jet_expr("u_t3x2 + u_tx")?;
    println!(
        "{e}; u_tx reduces to {}",
        EquationSystem::shared().reduce(&parse_jet_expr("u_tx")?, 2)?
    );
    Ok(())
}
