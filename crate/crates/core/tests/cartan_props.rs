mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistcart::cartan::{
    conjugation_identity, random_closed_form, random_form, twisted_cohomology, CartanComplex, CartanError,
    EquivariantForm, Twisting,
};
use twistcart::corpus::torus_model;
use twistcart::linalg::Rational;

fn rotation_complex(n: usize, cap: u32) -> CartanComplex {
    let m = torus_model("rot", n, 1, &[(0, 0, 1)]).unwrap();
    CartanComplex::build(&m, 1, cap).unwrap()
}

/// Degree-3 terms `θ_S x^k` on a trivial circle action: `|S| = 3, k = 0` or `|S| = 1, k = 1`.
fn eta_terms(n: u32) -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    let cands: Vec<(u32, u32)> = (0..1u32 << n)
        .filter_map(|m| match m.count_ones() {
            3 => Some((m, 0)),
            1 => Some((m, 1)),
            _ => None,
        })
        .collect();
    proptest::collection::vec((proptest::sample::select(cands), -3i64..=3), 0..4)
        .prop_map(|v| v.into_iter().map(|((m, k), c)| (m, k, c)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twisted_operator_squares_to_zero(seed in any::<u64>(), n in 1usize..=3, cap in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rotation_complex(n, cap);
        let eta = random_closed_form(&c, 3, &mut rng).unwrap();
        let eta = c.from_vec(&c.to_vec(&eta));
        let d = c.twisted_operator(&eta);
        prop_assert!(d.mul(&d).is_zero());
    }

    #[test]
    fn exp_b_conjugates_twistings(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rotation_complex(n, 2);
        let eta = random_closed_form(&c, 3, &mut rng).unwrap();
        let eta = Twisting::from_form(c.model(), &c.from_vec(&c.to_vec(&eta))).unwrap();
        let b = random_form(&c, 2, &mut rng);
        prop_assert!(conjugation_identity(&c, &eta, &b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trivial_torus_matches_oracle(
        (n, terms) in (1u32..=3).prop_flat_map(|n| (Just(n), eta_terms(n))),
        cap in 2u32..=4,
    ) {
        let model = torus_model("triv", n as usize, 1, &[]).unwrap();
        let c = CartanComplex::build(&model, 1, cap).unwrap();
        let mut eta = EquivariantForm::zero();
        let mut oracle_eta = Vec::new();
        for &(mask, k, coef) in &terms {
            let mono: Vec<String> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| format!("t{}", i + 1)).collect();
            let v = model.terms(&[(Rational::from(coef), mono)]).unwrap();
            eta = eta.add(&EquivariantForm::from_model(&v, vec![k]));
            oracle_eta.push((mask, k, common::q(coef, 1)));
        }
        let eta = Twisting::from_form(&model, &eta).unwrap();
        match twisted_cohomology(&c, &eta) {
            Ok(t) => prop_assert_eq!((t.even, t.odd), common::trivial_torus_twisted(n, cap, &oracle_eta)),
            Err(CartanError::UnstableWindow { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
