use ewjet::catalog::{catalog, CatalogId};
use ewjet::geometry::{canonical_frame, signature_at, WeylPair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ewjet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for id in CatalogId::ALL {
        let s = catalog(id, &[])?;
        let formal = s.random_formal(&mut rng);
        let pair = WeylPair::build(&s);
        let pt = s.random_points(1, &mut rng)?.remove(0);
        let sig = signature_at(&pair, &pt, &formal)?;
        match canonical_frame(&pair, &pt, &formal) {
            Ok(f) => println!(
                "{id}: signature {sig:?}, J² sign {}, e1 = {:?}, g(e3,e2) = {:.4}",
                f.j_squared_sign, f.e1, f.g32
            ),
            Err(e) => println!("{id}: signature {sig:?}, {e}"),
        }
    }
    Ok(())
}
