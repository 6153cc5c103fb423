use std::time::Instant;

use ewjet::invariants::{
    basic_invariants, coframe_rewrite, expected_g_prime, jacobian_rank, random_regular_point,
    structure_k, verify_derivation_commutators, verify_identities,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ewjet::Result<()> {
    let start = Instant::now();
    for i in 1..=4 {
        println!("K{i} = {}", structure_k(i)?);
    }
    for c in verify_derivation_commutators()? {
        println!(
            "{:<50} {}",
            c.name,
            if c.ok { "ok".to_string() } else { c.residual }
        );
    }
    for c in verify_identities()? {
        println!(
            "{:<50} {}",
            c.name,
            if c.ok { "ok".to_string() } else { c.residual }
        );
    }
    let cf = coframe_rewrite()?;
    let expected = expected_g_prime();
    for (i, (row, want)) in cf.g_prime.iter().zip(&expected).enumerate() {
        for (j, (g, w)) in row.iter().zip(want).enumerate() {
            println!("G'[{i}][{j}] = {g}  (diff {})", g - w);
        }
    }
    for i in 0..3 {
        println!(
            "omega(n{}) = {}  adjusted {}",
            i + 1,
            cf.omega_plain[i],
            cf.omega_adjusted[i]
        );
    }
    println!("det of frame = {}", cf.frame_det);
    println!("det of coframe = {}", cf.coframe_det);
    let zs: Vec<_> = basic_invariants()?.into_iter().map(|(_, e)| e).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_regular_point(3, &mut rng);
    println!(
        "rank of the twelve basic invariants: {}",
        jacobian_rank(&zs, &p)?
    );
    println!("elapsed {:?}", start.elapsed());
    Ok(())
}
