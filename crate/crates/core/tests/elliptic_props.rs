use proptest::prelude::*;
use twistcart::elliptic::{
    converges_second_order, elliptic_coefficients, halving_ratios, is_positive_definite, leading_minors,
    max_principle_check, AlmostComplexField, ChartGrid, GridData, Sample,
};

/// `S J₀ S⁻¹` for a 2×2 invertible `S`, as a row-major block.
fn conjugated_j(s: [f64; 4]) -> Option<Vec<f64>> {
    let det = s[0] * s[3] - s[1] * s[2];
    if det.abs() < 0.2 {
        return None;
    }
    let inv = [s[3] / det, -s[1] / det, -s[2] / det, s[0] / det];
    let j0 = [0.0, -1.0, 1.0, 0.0];
    let mul = |a: &[f64], b: &[f64]| vec![a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]];
    Some(mul(&mul(&s, &j0), &inv))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn principal_symbol_is_positive_definite(s in proptest::array::uniform4(-2.0f64..2.0)) {
        let Some(j) = conjugated_j(s) else { return Ok(()) };
        let grid = ChartGrid::cube(2, 1.0, 4).unwrap();
        let field = AlmostComplexField::from_fn(&grid, |_| j.clone());
        field.validate(1e-9).unwrap();
        let coeffs = elliptic_coefficients(&field).unwrap();
        for a in &coeffs.a {
            prop_assert!(is_positive_definite(a, 2), "{a:?}");
            prop_assert!(leading_minors(a, 2).iter().all(|m| *m > 0.0));
        }
        // constant J has no first-order part
        for b in coeffs.b.iter().flatten() {
            prop_assert!(b.iter().all(|x| x.abs() < 1e-9));
        }
    }

    #[test]
    fn grid_index_round_trip(dim in 1usize..=3, m in 2i64..=5, pick in any::<prop::sample::Index>()) {
        let grid = ChartGrid::cube(dim, 1.0, m).unwrap();
        let idx = pick.index(grid.len());
        prop_assert_eq!(grid.index(&grid.multi(idx)), Some(idx));
    }

    #[test]
    fn affine_functions_meet_extrema_on_the_boundary(c in proptest::array::uniform3(-3.0f64..3.0)) {
        let grid = ChartGrid::cube(2, 1.0, 8).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|i| { let x = grid.coords(i); c[0] + c[1] * x[0] + c[2] * x[1] }).collect();
        let r = max_principle_check(&grid, &f, &[0, 0], 8.0, 1e-12).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }
}

#[test]
fn grid_file_round_trip() {
    let grid = ChartGrid::cube(2, 1.0, 6).unwrap();
    let data = GridData::from_sample(Sample::Exp, &grid);
    let mut bytes = Vec::new();
    data.write(&mut bytes).unwrap();
    let back = GridData::read(&bytes[..]).unwrap();
    assert_eq!(back, data);
}

#[test]
fn halving_detects_second_order() {
    let r: Vec<f64> = (0..4).map(|k| 0.3 * 0.25f64.powi(k)).collect();
    assert!(halving_ratios(&r).iter().all(|x| (x - 4.0).abs() < 1e-9));
    assert!(converges_second_order(&r));
    assert!(!converges_second_order(&[0.3, 0.15, 0.075]));
}
