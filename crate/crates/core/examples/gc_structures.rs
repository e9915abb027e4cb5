//! Pointwise generalized complex structures: axioms, `+i`-eigenspaces,
//! B-field shears, generalized Kähler pairs, moment maps and the H-twisted bracket.

use twistcart::corpus::{bracket_example, gc_point_examples};
use twistcart::gc::{
    courant_bracket_const, extract_bihermitian, gk_check, gk_from_triple, i_eigenspace, is_gc, moment_residual,
    poisson_bivector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = gc_point_examples()?;
    for (name, j) in &ex.structures {
        let l = i_eigenspace(j)?;
        println!(
            "{name}: axioms {}, eigenspace dim {} (isotropic and transverse: {}), Poisson bivector rank {}",
            is_gc(j.matrix()).ok,
            l.dim(),
            l.is_maximal_isotropic() && l.is_transverse(),
            twistcart::dg::dense_rank(&poisson_bivector(j)),
        );
    }
    for (name, t) in &ex.triples {
        let (j1, j2) = gk_from_triple(t)?;
        let chk = gk_check(&j1, &j2)?;
        println!("{name}: generalized Kähler {}, recovered triple matches {}", chk.ok(), extract_bihermitian(&j1, &j2)? == *t);
    }
    for (name, h) in &ex.hamiltonian {
        let res = moment_residual(h)?;
        println!("{name}: moment condition {}, Poisson relation {}", res.iter().all(|r| r.condition_holds()), res.iter().all(|r| r.poisson_holds()));
    }
    let (h, x, y) = bracket_example();
    let br = courant_bracket_const(&x, &y, &h)?;
    println!("[∂1, ∂2]_H = {}", br.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
    Ok(())
}
