mod support;

use csbb_core::bindings::json::json_signature;
use csbb_core::term::{check_term, decode_term, encode_term, read_pretty, term_equals, ArgType, Signature, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::gen::{adt, random_loose_term, random_term, tree_signature};
use support::oracle::brute_well_typed;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample(seed: u64, depth: i32) -> (Signature, ArgType, Term) {
    let mut r = rng(seed);
    if seed.is_multiple_of(3) {
        let sig = (**json_signature()).clone();
        let t = random_term(&sig, &adt("JSON"), &mut r, depth);
        (sig, adt("JSON"), t)
    } else {
        let sig = tree_signature();
        let t = random_term(&sig, &adt("Tree"), &mut r, depth);
        (sig, adt("Tree"), t)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn generated_terms_are_well_typed(seed in any::<u64>()) {
        let (sig, ty, t) = sample(seed, 4);
        prop_assert_eq!(check_term(&sig, &t, &ty), vec![]);
    }

    #[test]
    fn wire_round_trip(seed in any::<u64>()) {
        let (_, _, t) = sample(seed, 4);
        let back = decode_term(&encode_term(&t)).unwrap();
        prop_assert!(term_equals(&back, &t), "{} vs {}", back, t);
    }

    #[test]
    fn wire_encoding_is_injective(a in any::<u64>(), b in any::<u64>()) {
        // Shallow terms collide often enough to exercise the equal case.
        let (_, _, s) = sample(a % 64, 1);
        let (_, _, t) = sample(b % 64, 1);
        prop_assert_eq!(encode_term(&s) == encode_term(&t), term_equals(&s, &t));
    }

    #[test]
    fn pretty_round_trip(seed in any::<u64>()) {
        let (sig, ty, t) = sample(seed, 4);
        let back = read_pretty(&sig, &t.to_string(), &ty).unwrap();
        prop_assert!(term_equals(&back, &t));
    }

    #[test]
    fn term_equals_is_an_equivalence(a in 0u64..12, b in 0u64..12, c in 0u64..12) {
        let (_, _, x) = sample(a, 1);
        let (_, _, y) = sample(b, 1);
        let (_, _, z) = sample(c, 1);
        prop_assert!(term_equals(&x, &x.clone()));
        prop_assert_eq!(term_equals(&x, &y), term_equals(&y, &x));
        if term_equals(&x, &y) && term_equals(&y, &z) {
            prop_assert!(term_equals(&x, &z));
        }
    }

    #[test]
    fn check_term_agrees_with_brute_force(seed in any::<u64>()) {
        let sig = tree_signature();
        let mut r = rng(seed);
        let t = if seed % 4 == 0 {
            random_term(&sig, &adt("Tree"), &mut r, 4)
        } else {
            random_loose_term(&sig, &mut r, 4)
        };
        for ty in [adt("Tree"), adt("Color"), ArgType::list(adt("Tree")), ArgType::maybe(adt("Tree"))] {
            prop_assert_eq!(check_term(&sig, &t, &ty).is_empty(), brute_well_typed(&sig, &t, &ty), "{} at {}", t, ty);
        }
    }
}
