//! Smoothed sums of S(eta) - 1 over Z[i] against -w(0) r_K log H^2, for the
//! disc and square autocorrelations, with the slope of the sum in log H.

use sinf::arith::ls_slope;
use sinf::singular::{residue_rk, SingularSeries};
use sinf::{FieldSpec, Result, TestFunction};

fn main() -> Result<()> {
    let field: FieldSpec = "D=-1".parse()?;
    let heights = [16.0, 32.0, 64.0, 128.0, 256.0];
    let residue = residue_rk(&field, 1e-10)?.value;
    // every factor with N p below the largest shift norm is kept
    let cutoff = 1_100_000;
    let sieved = SingularSeries::new(&field, cutoff)?.sieve_box(512)?;
    for w in [TestFunction::disc(), TestFunction::square()] {
        println!("{} weight, w(0) = {:.6}", w.kind().name(), w.value_at_zero());
        let mut sums = vec![];
        for &h in &heights {
            let s = sieved.smoothed_sum(&w, h, residue)?;
            println!("  H={h:<5} sum={:>10.4} target={:>10.4} ratio={:.4}", s.sum, s.target, s.ratio());
            sums.push(s.sum);
        }
        let logs: Vec<f64> = heights.iter().map(|h| h.ln()).collect();
        println!(
            "  slope {:.4} vs -2 w(0) r_K = {:.4}",
            ls_slope(&logs, &sums),
            -2.0 * w.value_at_zero() * residue
        );
    }
    Ok(())
}
