//! Truncated singular series S(eta) in Z[i]: a few shifts, the effect of
//! the cutoff, and a sieved box agreeing with per-shift products.

use sinf::{FieldSpec, Result, SingularSeries};

fn main() -> Result<()> {
    let field: FieldSpec = "D=-1".parse()?;
    for cutoff in [10_000u64, 1_000_000] {
        let series = SingularSeries::new(&field, cutoff)?;
        println!("P = {cutoff}");
        for (k1, k2) in [(1, 0), (1, 1), (2, 0), (3, 3), (5, 5), (6, 0), (3, 2)] {
            let v = series.eval(&field.element(k1, k2))?;
            println!("  S({k1}+{k2}i) = {:.9}  (tail {:.1e})", v.value, v.tail_bound);
        }
    }

    let series = SingularSeries::new(&field, 1000)?;
    let sieved = series.sieve_box(10)?;
    let mut mismatches = 0;
    for k1 in -10..=10 {
        for k2 in -10..=10 {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let direct = series.eval(&field.element(k1, k2))?.value;
            mismatches += usize::from(sieved.get(k1, k2) != Some(direct));
        }
    }
    println!("sieved 21x21 box vs per-shift products: {mismatches} mismatches");
    Ok(())
}
