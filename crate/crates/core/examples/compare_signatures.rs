use ewjet::catalog::{catalog, CatalogId};
use ewjet::equivalence::{compare, signature, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ewjet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sampler = Sampler {
        n: 16,
        ..Sampler::default()
    };
    let mut clouds = Vec::new();
    for id in [
        CatalogId::ExpFamily,
        CatalogId::Sl2Family,
        CatalogId::Sl2Degenerate,
    ] {
        let s = catalog(id, &[])?;
        let cloud = signature(&s, &sampler, &s.random_formal(&mut rng))?;
        println!(
            "{id}: {} points, first row {:?}",
            cloud.points.len(),
            cloud.values[0]
        );
        clouds.push((id, cloud));
    }
    for (i, (a, ca)) in clouds.iter().enumerate() {
        for (b, cb) in &clouds[i..] {
            let c = compare(ca, cb, 1e-9)?;
            println!(
                "{a} vs {b}: {:?} (hausdorff {:.3e})",
                c.verdict, c.hausdorff
            );
        }
    }
    let trivial = catalog(CatalogId::Trivial, &[])?;
    println!(
        "trivial: {}",
        signature(&trivial, &sampler, &Default::default()).unwrap_err()
    );
    Ok(())
}
