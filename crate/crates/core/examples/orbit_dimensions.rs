use ewjet::symmetry::{induction_point, orbit_dimension};

fn main() {
    for k in 2..=4 {
        let start = std::time::Instant::now();
        let d = orbit_dimension(k, &induction_point(k)).expect("orbit dimension");
        println!(
            "k = {k}: dim O_k = {d} (5k+8 = {}), {:.2?}",
            5 * k + 8,
            start.elapsed()
        );
    }
}
