use proptest::prelude::*;

use susy_core::chains::{Chain, ChainSigns};
use susy_core::current::simplex_heat_integral;
use susy_core::dsl::{chain_to_json, parse_chain_exact};
use susy_core::{GaussRational, IndexSet, Mode, Mono};

fn mono(box_: i64) -> impl Strategy<Value = Mono> {
    (-box_..=box_, -box_..=box_, 0u8..4, any::<bool>()).prop_map(|(a, b, idx, dbl)| Mono { mode: Mode::from_slice(&[a, b]).unwrap(), idx: IndexSet(idx), dbl })
}

fn coeff() -> impl Strategy<Value = GaussRational> {
    (-5i64..=5, 1i64..=4, -5i64..=5, 1i64..=4).prop_map(|(a, b, c, d)| GaussRational::from_parts((a, b), (c, d)))
}

fn chain() -> impl Strategy<Value = Chain<GaussRational>> {
    prop::collection::vec((prop::collection::vec(mono(3), 1..=4), coeff()), 1..=4).prop_map(|ws| {
        let mut c = Chain::zero(2);
        for (w, k) in ws {
            c.add_word(&w, k);
        }
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // modes outside the exhaustively checked box
    #[test]
    fn differentials_square_to_zero(c in chain()) {
        let signs = ChainSigns::default();
        prop_assert!(c.total_differential(&signs).total_differential(&signs).is_zero());
        prop_assert!(c.hochschild_b().hochschild_b().is_zero());
        prop_assert!(c.connes_b().connes_b().is_zero());
        prop_assert!(c.dga_tensor().dga_tensor().is_zero());
        prop_assert!(c.hochschild_b().connes_b().add(&c.connes_b().hochschild_b()).is_zero());
    }

    #[test]
    fn chain_json_round_trip(c in chain()) {
        prop_assert!(parse_chain_exact(&chain_to_json(&c)).unwrap() == c);
    }

    #[test]
    fn differential_is_linear(a in chain(), b in chain(), k in coeff()) {
        let signs = ChainSigns::default();
        let lhs = a.scale(&k).add(&b).total_differential(&signs);
        let rhs = a.total_differential(&signs).scale(&k).add(&b.total_differential(&signs));
        prop_assert!(lhs == rhs);
    }

    #[test]
    fn simplex_integral_symmetric_and_bounded(mut a in prop::collection::vec(0.0f64..60.0, 1..=5), rot in 0usize..5) {
        let v = simplex_heat_integral(&a).unwrap();
        let m = a.len() - 1;
        let fact: f64 = (1..=m).map(|j| j as f64).product();
        let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = a.iter().cloned().fold(0.0, f64::max);
        prop_assert!(v <= (-lo).exp() / fact * (1.0 + 1e-12));
        prop_assert!(v >= (-hi).exp() / fact * (1.0 - 1e-12));
        let r = rot % a.len();
        a.rotate_left(r);
        let w = simplex_heat_integral(&a).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * v);
    }
}
