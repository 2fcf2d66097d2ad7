//! Residue of the Dedekind zeta function at s = 1, with its error bound,
//! next to the class-number formula where h = 1.

use std::f64::consts::PI;

use sinf::singular::residue_rk;
use sinf::{FieldSpec, Result};

fn main() -> Result<()> {
    let known = [
        ("D=-1", Some(PI / 4.0)),
        ("D=-3,half", Some(PI / (3.0 * 3f64.sqrt()))),
        ("D=2", Some((1.0 + 2f64.sqrt()).ln() / 2f64.sqrt())),
        ("D=5,half", Some(2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln() / 5f64.sqrt())),
        ("D=-5", None),
        ("D=10", None),
        ("D=-163,half", None),
    ];
    println!("{:<12} {:>16} {:>10} {:>16}", "field", "residue", "bound", "closed form");
    for (spec, closed) in known {
        let field: FieldSpec = spec.parse()?;
        let r = residue_rk(&field, 1e-10)?;
        let closed = closed.map_or("-".to_string(), |c| format!("{c:.12}"));
        println!("{spec:<12} {:>16.12} {:>10.1e} {closed:>16}", r.value, r.error_bound);
    }
    Ok(())
}
