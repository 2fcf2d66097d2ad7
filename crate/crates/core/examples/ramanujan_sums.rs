//! Ramanujan sums over squarefree ideals of Z[i]: the product formula, the
//! divisor-sum definition, and the condensation identity
//! `sum over q | c of c_q(eta) = N c` if `eta in c`, else 0.

use sinf::ideals::{
    condensation_sum, enumerate_squarefree_ideals, ideal_lattice, ramanujan_sum,
    ramanujan_sum_by_definition,
};
use sinf::{FieldSpec, Result};

fn main() -> Result<()> {
    let field: FieldSpec = "D=-1".parse()?;
    let ideals = enumerate_squarefree_ideals(&field, 30);
    let shifts = [(1, 0), (1, 1), (2, 0), (3, 1), (5, 0), (4, 3)];
    print!("{:>8} {:>4} {:>3}", "q", "N", "mu");
    for (k1, k2) in shifts {
        print!(" {:>8}", format!("{k1}+{k2}i"));
    }
    println!();
    for q in &ideals {
        print!("{:>8} {:>4} {:>3}", sinf::cli::ideal_label(q), q.norm(), q.mu());
        for (k1, k2) in shifts {
            let eta = field.element(k1, k2);
            let v = ramanujan_sum(q, &eta);
            assert_eq!(v, ramanujan_sum_by_definition(q, &eta));
            print!(" {v:>8}");
        }
        println!();
    }

    let mut checked = 0;
    for c in &ideals {
        let lattice = ideal_lattice(c);
        for k1 in -10..=10 {
            for k2 in -10..=10 {
                let want = if lattice.contains(k1, k2) { c.norm() as i64 } else { 0 };
                assert_eq!(condensation_sum(c, &field.element(k1, k2)), want);
                checked += 1;
            }
        }
    }
    println!("condensation identity holds at {checked} (ideal, shift) pairs");
    Ok(())
}
