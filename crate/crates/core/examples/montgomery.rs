//! The integer case: sum_{h<=H} (S(h) - 1)(1 - h/H) grows like -log(H)/2.

use sinf::arith::ls_slope;
use sinf::singular::{montgomery_table, singular_series_rational};
use sinf::Result;

fn main() -> Result<()> {
    let s2 = singular_series_rational(2, 10_000_000)?;
    println!("twin-prime constant 2C = S(2) = {:.9} (tail {:.1e})", s2.value, s2.tail_bound);

    let heights: Vec<u64> = (4..=16).map(|k| 1u64 << k).collect();
    let sums = montgomery_table(&heights, 1_000_000)?;
    for (h, s) in heights.iter().zip(&sums) {
        println!("H={h:<6} sum={s:>9.5} sum + log(H)/2 = {:.5}", s + 0.5 * (*h as f64).ln());
    }
    let fit: Vec<(f64, f64)> = heights
        .iter()
        .zip(&sums)
        .filter(|(h, _)| **h >= 1024)
        .map(|(h, s)| ((*h as f64).ln(), *s))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    println!("slope over H >= 1024: {:.4}", ls_slope(&x, &y));
    Ok(())
}
