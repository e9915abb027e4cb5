//! Twisted cohomology of T³ with a trivial circle action and `η = θ1θ2θ3`.

use twistcart::cartan::{equivariant_cohomology, twisted_cohomology, CartanComplex, EquivariantForm, Twisting};
use twistcart::corpus::torus_model;
use twistcart::linalg::Rational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = torus_model("t3_trivial", 3, 1, &[])?;
    let c = CartanComplex::build(&model, 1, 4)?;
    let graded = equivariant_cohomology(&c)?;
    println!("untwisted H_G by degree: {:?}", graded.dims);

    let vol = model.terms(&[(Rational::from(1), vec!["t1".into(), "t2".into(), "t3".into()])])?;
    let eta = Twisting::from_form(&model, &EquivariantForm::from_model(&vol, vec![0]))?;
    let t = twisted_cohomology(&c, &eta)?;
    println!("twisted by the volume form: even {}, odd {}", t.even, t.odd);
    Ok(())
}
