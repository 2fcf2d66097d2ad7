//! V/E against 1 - delta for prime elements in sup-norm boxes of half-width
//! X^delta. Pass a field and X, e.g. `cargo run --release --example
//! variance_profile -- D=2 1000`.

use sinf::stats::variance_profile;
use sinf::{FieldSpec, Result, Sampler};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let field: FieldSpec = args.next().as_deref().unwrap_or("D=-1").parse()?;
    let x: i64 = args.next().map_or(300, |s| s.parse().expect("X must be an integer"));
    let deltas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();

    let profile = variance_profile(&field, x, &deltas, Sampler::Exhaustive)?;
    println!("{field}, X = {x}, r_K = {:.9}, grid extent {}", profile.residue, profile.grid_extent);
    println!("{:>5} {:>9} {:>12} {:>12} {:>7} {:>7}", "delta", "H", "E", "V", "V/E", "1-d");
    for r in &profile.rows {
        println!(
            "{:>5.1} {:>9.3} {:>12.3} {:>12.3} {:>7.3} {:>7.1}",
            r.delta, r.height, r.e, r.v, r.ratio, r.target
        );
    }

    let jitter = Sampler::StratifiedJitter { q: 2, seed: 0 };
    let j = variance_profile(&field, x, &[0.5], jitter)?;
    println!("jittered centers at delta 0.5: E = {:.3}, V/E = {:.3}", j.rows[0].e, j.rows[0].ratio);
    Ok(())
}
