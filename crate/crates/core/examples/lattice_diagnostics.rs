//! Dual lattices and smoothed lattice-point counts of squarefree ideals.

use sinf::ideals::{
    dual_lattice_count, dual_minimum_scaled, enumerate_squarefree_ideals, ideal_lattice,
    ideal_smoothed_count, smoothed_count_threshold,
};
use sinf::{FieldSpec, Result, TestFunction};

fn main() -> Result<()> {
    for spec in ["D=-1", "D=2", "D=-5"] {
        let field: FieldSpec = spec.parse()?;
        let ideals = enumerate_squarefree_ideals(&field, 60);
        let c = ideals
            .iter()
            .map(|q| dual_minimum_scaled(&ideal_lattice(q)))
            .fold(f64::INFINITY, f64::min);
        println!("{field}: min over N(a) <= 60 of N(a) lambda_1(dual)^2 = {c:.4}");
        for q in ideals.iter().filter(|q| [5, 9, 10, 25, 50].contains(&q.norm())) {
            let lattice = ideal_lattice(q);
            let r = (c / q.norm() as f64).sqrt();
            println!(
                "  N={:<3} det={:<3} dual points with |y| < {r:.4}: {}, with |y| <= 1: {}",
                q.norm(),
                lattice.det(),
                dual_lattice_count(&lattice, r * 0.999)?,
                dual_lattice_count(&lattice, 1.0)?
            );
        }
    }

    let field: FieldSpec = "D=-1".parse()?;
    let w = TestFunction::square();
    let h = 50.0;
    let threshold = smoothed_count_threshold(&field, &w, h);
    println!("Z[i], square weight, H = {h}: only eta = 0 survives once N(a) >= {threshold}");
    for q in enumerate_squarefree_ideals(&field, 30) {
        let count = ideal_smoothed_count(&q, &w, h)?;
        let predicted = h * h * w.fourier_at_zero() / q.norm() as f64;
        println!("  N={:<3} sum w(eta/H) = {count:>10.3}  H^2 w^(0)/N = {predicted:>10.3}", q.norm());
    }
    Ok(())
}
