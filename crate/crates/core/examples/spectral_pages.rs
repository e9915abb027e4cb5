//! Pages of both spectral sequences on every shipped pair, with the
//! convergence and filtration-inclusion checks.

use twistcart::corpus::Corpus;
use twistcart::spectral::{cofinality, convergence_check, make_filtration, pages, FiltrationKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load_default()?;
    for p in corpus.pairs() {
        let (c, eta) = corpus.pair(p)?;
        println!("{} + {} (D = {})", p.model, p.eta, p.poly_cap);
        for kind in [FiltrationKind::F, FiltrationKind::L] {
            let f = make_filtration(&c, &eta, kind)?;
            let seq = pages(&f, 3)?;
            let conv = convergence_check(&c, &eta, &f)?;
            println!(
                "  {kind:?}: E∞ {:?}, twisted {:?}, collapse page {}, consistent {}",
                conv.e_infinity, conv.twisted, seq.collapse_page, seq.consistent
            );
        }
        let cof = cofinality(&c, &eta)?;
        println!("  inclusions: stated {}, reversed {}", cof.stated_holds, cof.reversed_holds);
    }
    Ok(())
}
