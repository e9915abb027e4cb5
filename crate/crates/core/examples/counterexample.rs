//! Trivial U(1) on S¹ twisted by `θ⊗x`: the L sequence does not collapse at E₁
//! although every differential of the F sequence from page one vanishes.

use twistcart::cartan::twisted_cohomology;
use twistcart::corpus::counterexample;
use twistcart::spectral::{make_filtration, pages, FiltrationKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (c, eta) = counterexample(4)?;
    for kind in [FiltrationKind::L, FiltrationKind::F] {
        let seq = pages(&make_filtration(&c, &eta, kind)?, 3)?;
        println!("{kind:?} filtration, window {}", seq.window);
        for page in &seq.pages {
            println!("  E{}: {:?}  d ranks {:?}", page.r, page.dims(), page.differential_ranks);
        }
        println!("  collapses at E{}", seq.collapse_page);
    }
    let t = twisted_cohomology(&c, &eta)?;
    println!("H(Q_D; d_G + η): even {}, odd {}", t.even, t.odd);
    Ok(())
}
