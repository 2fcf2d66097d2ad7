//! How rational primes decompose in a few quadratic fields.

use sinf::ideals::{enumerate_prime_ideals, root_meaning, split_prime};
use sinf::{FieldSpec, Result};

fn main() -> Result<()> {
    for d in [-1, -3, -5, 2, 5] {
        let field = FieldSpec::quadratic(d)?;
        println!("{field} (d_K = {}), roots mean {}", field.discriminant(), root_meaning(&field));
        for p in [2u64, 3, 5, 7, 11, 13] {
            let ideals = split_prime(p, &field)?;
            let desc: Vec<String> = ideals
                .iter()
                .map(|q| format!("N={} root={:?}", q.norm(), q.root()))
                .collect();
            println!("  p={p:<3} {:?}: {}", ideals[0].split_type(), desc.join(", "));
        }
        let small = enumerate_prime_ideals(&field, 100);
        println!("  {} prime ideals of norm <= 100", small.len());
    }
    Ok(())
}
