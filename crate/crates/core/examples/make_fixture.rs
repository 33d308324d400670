//! Generate a synthetic household dataset in the UCI text layout, so the
//! CLI pipeline can be exercised without downloading the real data.
//!
//! Usage: cargo run -p tlou-core --example make_fixture -- [PATH] [DAYS] [SEED]

use tlou_core::synthetic::{household_csv, SyntheticDataSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "household_fixture.csv".into());
    let days: usize = args.next().map(|d| d.parse().expect("DAYS must be a number")).unwrap_or(60);
    let seed: u64 = args.next().map(|s| s.parse().expect("SEED must be a number")).unwrap_or(7);
    let spec = SyntheticDataSpec { days, seed, ..Default::default() };
    let text = household_csv(&spec);
    std::fs::write(&path, &text).expect("cannot write fixture");
    println!("wrote {} days of synthetic readings to {path}", spec.days);
}
