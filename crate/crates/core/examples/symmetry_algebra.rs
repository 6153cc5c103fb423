use ewjet::expr::Expr;
use ewjet::symmetry::{
    check_symmetry, grading_check, lift_shape_field, verify_commutation_table, Family, ShapeField,
};

fn main() -> ewjet::Result<()> {
    let f = Expr::func("f", 0);
    for fam in Family::ALL {
        let g = fam.generator(&f);
        println!("{fam}(f) = {g}");
        println!("  symmetry: {}", check_symmetry(&g)?.is_symmetry());
        let lift = lift_shape_field(&ShapeField::single(fam, f.clone()))?;
        println!(
            "  lift of the base part matches: {}, chi = {}",
            lift.field == g,
            lift.chi
        );
    }
    let cells = verify_commutation_table();
    for c in &cells {
        println!("[X{}, X{}] = {}", c.row, c.col, c.bracket);
    }
    println!(
        "table cells verified: {}/{}",
        cells.iter().filter(|c| c.ok).count(),
        cells.len()
    );
    println!("grading: {}", grading_check().ok());
    Ok(())
}
