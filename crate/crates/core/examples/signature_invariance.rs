use std::time::Instant;

use ewjet::catalog::{catalog, CatalogId};
use ewjet::equivalence::signature_values;
use ewjet::symmetry::{apply_pseudogroup, PseudogroupElement};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ewjet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for id in [
        CatalogId::Hierarchy,
        CatalogId::ExpFamily,
        CatalogId::Sl2Family,
        CatalogId::Sl2Degenerate,
    ] {
        let start = Instant::now();
        let s = catalog(id, &[])?;
        let formal = s.random_formal(&mut rng);
        let mut worst = 0.0f64;
        let mut compared = 0;
        for _ in 0..10 {
            let p = PseudogroupElement::random(&mut rng);
            let t = apply_pseudogroup(&p, &s)?;
            let pts: Vec<_> = t.random_points(3, &mut rng)?;
            let a = signature_values(&s, &pts, &formal)?;
            let b = signature_values(&t, &pts, &formal)?;
            for (ra, rb) in a.iter().zip(&b) {
                for (x, y) in ra.iter().zip(rb) {
                    match (x, y) {
                        (Some(x), Some(y)) => {
                            let d = (x.to_f64() - y.to_f64()).abs() / (1.0 + x.to_f64().abs());
                            worst = worst.max(d);
                            compared += 1;
                        }
                        (None, None) => {}
                        _ => worst = f64::INFINITY,
                    }
                }
            }
        }
        println!(
            "{:<15} compared {compared:>4} values, worst relative difference {worst:.1e}  [{:?}]",
            id.name(),
            start.elapsed()
        );
    }
    Ok(())
}
