//! Primes in short intervals of the integers: V_N against (1 - delta) E_N,
//! and the von Mangoldt variance against H (log X - log H).

use sinf::stats::{prime_power_constant, z_baseline};
use sinf::Result;

fn main() -> Result<()> {
    let x = 100_000;
    println!("{:>5} {:>5} {:>9} {:>10} {:>12} {:>8} {:>8} {:>7}", "delta", "H", "E", "V_N", "V_Lambda", "V_N/.", "V_L/.", "gap");
    for k in 2..=8 {
        let r = z_baseline(x, k as f64 / 10.0)?;
        println!(
            "{:>5.1} {:>5} {:>9.3} {:>10.3} {:>12.3} {:>8.3} {:>8.3} {:>7.3}",
            r.delta, r.height, r.e, r.v_prime, r.v_lambda, r.ratio_prime, r.ratio_lambda, r.relative_gap
        );
    }
    let c = prime_power_constant(x, 316)?;
    println!("max over x <= {x} of prime-power correction / (H x^(-1/2)) at H=316: {c:.3}");
    Ok(())
}
