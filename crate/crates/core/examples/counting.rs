use ewjet::invariants::{counting, h_from_dimensions, poincare_series, Series};
use ewjet::jet::dims;

fn main() {
    for k in 0..=5 {
        let (j, ms, sym) = dims(k);
        println!("k = {k}: dim J^k = {j}, dim MS_k = {ms}, symbol {sym}");
    }
    for series in [Series::Weyl, Series::EwGeneral, Series::Ms] {
        println!("{series:?}");
        for k in 0..=6 {
            let r = counting(series, k);
            println!(
                "  k = {k}: s_k = {:>3}, h_k = {:>3} (from dimensions {})",
                r.s_k,
                r.h_k,
                h_from_dimensions(series, k)
            );
        }
        println!("  P(z) = {:?}", poincare_series(series, 8));
    }
}
