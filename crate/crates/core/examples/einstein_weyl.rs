use std::time::Instant;

use ewjet::catalog::{catalog, CatalogId};
use ewjet::geometry::check_ew;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ewjet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for id in CatalogId::ALL {
        let start = Instant::now();
        let s = catalog(id, &[])?;
        let pts = s.random_points(20, &mut rng)?;
        let formal = s.random_formal(&mut rng);
        let r = check_ew(&s, &pts, &formal, 1e-9)?;
        println!(
            "{:<15} pass={} exact(∇g, skew, EW)=({}, {}, {}) max residual {:.1e}  Λ = {}  [{:?}]",
            id.name(),
            r.pass,
            r.compatibility_exact_zero,
            r.skew_exact_zero,
            r.ew_exact_zero,
            r.ew_residual_max,
            r.lambda,
            start.elapsed()
        );
    }
    Ok(())
}
