use ewjet::report::{verify_all, Suite};

fn main() {
    let only: Vec<Suite> = std::env::args()
        .skip(1)
        .filter_map(|a| <Suite as clap::ValueEnum>::from_str(&a, true).ok())
        .collect();
    let summary = verify_all(&only, 0);
    for c in &summary.checks {
        println!(
            "{} {:<55} {}",
            if c.ok { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!("{} passed, {} failed", summary.passed, summary.failed);
}
