//! Prefix-count grid of prime elements: box queries, a saved grid, and a
//! brute-force cross-check.

use sinf::primes::{build_grid, is_prime_element};
use sinf::{FieldSpec, PrefixGrid, Result};

fn main() -> Result<()> {
    let field: FieldSpec = "D=-1".parse()?;
    let grid = build_grid(&field, 60)?;
    println!("{field}: {} prime elements with sup-norm <= 60", grid.total_count());

    for (center, h) in [((0.0, 0.0), 1.5), ((10.5, 3.0), 7.0), ((30.0, -20.0), 10.0)] {
        let count = grid.count_primes_box(center, h)?;
        let weight = grid.log_weight_box(center, h)?;
        let mut brute = 0;
        for k1 in (center.0 - h).ceil() as i64..=(center.0 + h).floor() as i64 {
            for k2 in (center.1 - h).ceil() as i64..=(center.1 + h).floor() as i64 {
                brute += u64::from(is_prime_element(&field.element(k1, k2)));
            }
        }
        println!("  box {center:?} H={h}: {count} primes (brute force {brute}), sum 1/log|N| = {weight:.3}");
    }

    let path = std::env::temp_dir().join("sinf-example-grid.bin");
    grid.save(&path)?;
    let back = PrefixGrid::load(&path)?;
    println!("saved and reloaded {}: totals equal = {}", path.display(), back.total_count() == grid.total_count());
    std::fs::remove_file(&path)?;
    Ok(())
}
