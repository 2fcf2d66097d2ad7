//! The autocorrelation weights: values, normalizations and Fourier decay.

use sinf::smoothing::fourier_probe;
use sinf::{Result, TestFunction};

fn main() -> Result<()> {
    for w in [TestFunction::square(), TestFunction::disc(), TestFunction::triangle()] {
        println!(
            "{}: w(0) = {:.6}, w^(0) = {:.6}, support radius {}",
            w.kind().name(),
            w.value_at_zero(),
            w.fourier_at_zero(),
            w.support_radius()
        );
        if w.dimension() == 2 {
            for t in [0.0, 0.5, 1.0, 1.5, 2.0] {
                print!("  w({t},0)={:.4}", w.eval2(t, 0.0));
            }
            println!();
            for xi in [2.3, 4.7, 9.1] {
                let probe = fourier_probe(&w, &[xi, 0.0], 1e-6)?;
                println!("  w^({xi},0) = {:.3e}, |w^| |xi|^3 = {:.4}", probe.value, probe.decay_statistic);
            }
        } else {
            for t in [0.0, 0.25, 0.5, 1.0] {
                print!("  w({t})={:.4}", w.eval1(t));
            }
            println!();
        }
    }
    Ok(())
}
