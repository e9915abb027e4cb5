//! The weight-k representation ℂ of U(1): the Thom class restricts to the
//! Euler class `k x`, and multiplication by it is injective on `H_G(pt)`.

use twistcart::cartan::{relative_cohomology_graded, six_term_check, Twisting};
use twistcart::corpus::{euler_diagram, euler_injectivity, weight_rep_pair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in 1..=3 {
        let diagram = euler_diagram(k, 4)?;
        let inj = euler_injectivity(k, 4)?;
        let pair = weight_rep_pair(k, 4)?;
        let rel = relative_cohomology_graded(&pair)?;
        let six = six_term_check(&pair, &Twisting::zero(), 3)?;
        println!(
            "k = {k}: diagram commutes {}, Euler multiplication injective {} (rank {}/{}), relative dims {:?}, six-term exact {}",
            diagram.commutes, inj.injective, inj.image_rank, inj.source_dim, rel.dims(), six.exact
        );
    }
    Ok(())
}
