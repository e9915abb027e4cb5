//! Real parts of pseudo-holomorphic functions on grids: the real Cauchy-Riemann
//! residual shrinks like `h²`, the second-order operator has symbol `2I` for
//! the standard structure, and interior extrema never beat the boundary.

use twistcart::elliptic::{
    converges_second_order, elliptic_coefficients, halving_ratios, max_principle_check, rc_residual, ChartGrid, Sample,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for sample in [Sample::Z3, Sample::Exp, Sample::WarpedZ2] {
        let residuals: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&m| {
                let grid = ChartGrid::cube(2, 1.0, m)?;
                Ok(rc_residual(&sample.j_field(&grid), &sample.pair(&grid))?.max)
            })
            .collect::<Result<_, Box<dyn std::error::Error>>>()?;
        println!(
            "{}: finest residual {:.3e}, halving ratios {:.2?}, second order {}",
            sample.name(),
            residuals[residuals.len() - 1],
            halving_ratios(&residuals),
            converges_second_order(&residuals)
        );
        let grid = ChartGrid::cube(2, 1.0, 32)?;
        let co = elliptic_coefficients(&sample.j_field(&grid))?;
        let f = sample.pair(&grid).f;
        let mp = max_principle_check(&grid, &f, &[0, 0], 32.0, 1e-9)?;
        println!(
            "  a at center {:?}, interior sup {:.4} vs boundary {:.4}, pass {}",
            co.a[grid.index(&[0, 0]).unwrap()],
            mp.sup_interior,
            mp.sup_boundary,
            mp.pass
        );
    }
    Ok(())
}
