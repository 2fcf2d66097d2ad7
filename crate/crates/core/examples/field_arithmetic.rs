//! Elements of Z[i] and of the ring of integers of Q(sqrt 5): products,
//! norms, conjugates, exact division and units.

use sinf::{FieldSpec, Result};

fn main() -> Result<()> {
    let gauss: FieldSpec = "D=-1".parse()?;
    let a = gauss.element(3, 2);
    let b = gauss.element(1, -1);
    let ab = a.mul(&b)?;
    println!("{gauss}: {:?} * {:?} = {:?}", a.coords(), b.coords(), ab.coords());
    println!("  N(a) = {}, N(b) = {}, N(ab) = {}", a.norm()?, b.norm()?, ab.norm()?);
    println!("  ab / b = {:?}", ab.divide_exact(&b)?.map(|q| q.coords()));
    println!("  conj(a) = {:?}", a.conjugate()?.coords());

    let golden: FieldSpec = "D=5,half".parse()?;
    let (t, n) = golden.min_poly();
    println!("{golden}: w^2 = {t} w + {n}, discriminant {}", golden.discriminant());
    let phi = golden.element(0, 1);
    let mut power = golden.one();
    for k in 1..=6 {
        power = power.mul(&phi)?;
        println!("  w^{k} = {:?}, norm {}, unit {}", power.coords(), power.norm()?, power.is_unit()?);
    }
    println!("  sup-norm bound: |N(alpha)| <= {} * sup^2", golden.norm_form_bound());
    Ok(())
}
