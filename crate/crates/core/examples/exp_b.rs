//! `exp(b)` intertwines `d_G + η` and `d_G + η + d_G b`, so twisted
//! cohomology depends only on the class of `η`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistcart::cartan::{conjugation_identity, random_closed_form, random_form, twisted_cohomology, CartanComplex, Twisting};
use twistcart::corpus::torus_model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = torus_model("t3_rotation", 3, 1, &[(0, 0, 1)])?;
    let c = CartanComplex::build(&model, 1, 3)?;
    let eta = random_closed_form(&c, 3, &mut rng)?;
    let eta = Twisting::from_form(&model, &c.from_vec(&c.to_vec(&eta)))?;
    let b = random_form(&c, 2, &mut rng);
    println!("conjugation identity holds: {}", conjugation_identity(&c, &eta, &b)?);

    let shifted = Twisting::from_form(&model, &c.from_vec(&c.to_vec(&eta.total().add(&b.d_g(&model)))))?;
    let (h1, h2) = (twisted_cohomology(&c, &eta)?, twisted_cohomology(&c, &shifted)?);
    println!("dims for η: ({}, {}); for η + d_G b: ({}, {})", h1.even, h1.odd, h2.even, h2.odd);
    Ok(())
}
