//! A free circle action on S¹: equivariant cohomology is that of a point.

use twistcart::cartan::{equivariant_cohomology, twisted_cohomology, CartanComplex, Twisting};
use twistcart::corpus::torus_model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = torus_model("s1_free", 1, 1, &[(0, 0, 1)])?;
    for cap in [2, 4, 6] {
        let c = CartanComplex::build(&model, 1, cap)?;
        let h = equivariant_cohomology(&c)?;
        let t = twisted_cohomology(&c, &Twisting::zero())?;
        println!("D = {cap}: graded {:?}, parity ({}, {})", h.dims, t.even, t.odd);
    }
    Ok(())
}
