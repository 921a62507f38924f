use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qbc_core::codes::{dot_and_xor, partition, BitString, LinearCode};
use qbc_core::protocol::{bob_verify, run_honest, Transcript};
use qbc_core::quantum::{
    density_of, distinguish_probability, helstrom_probability, measure, rotated_basis, Basis, PureState,
};
use qbc_core::rng::seeded;

fn code_strategy() -> impl Strategy<Value = LinearCode> {
    (2usize..=10).prop_flat_map(|n| {
        prop::collection::vec(1u32..(1 << n), 1..=n).prop_filter_map("rank deficient", move |rows| {
            LinearCode::new(n, rows.into_iter().map(|m| BitString::from_mask(m, n)).collect()).ok()
        })
    })
}

fn qubit_strategy() -> impl Strategy<Value = PureState> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("near zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| PureState::normalized(vec![Complex64::new(a[0], a[1]), Complex64::new(a[2], a[3])]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn codewords_closed_under_xor(code in code_strategy()) {
        let words = code.codewords();
        prop_assert_eq!(words.len(), 1 << code.k());
        for a in &words {
            for b in &words {
                prop_assert!(code.contains(&a.xor(b).unwrap()));
            }
        }
    }

    #[test]
    fn splitting_key_halves_the_code(code in code_strategy(), r_seed in any::<u32>()) {
        let n = code.n();
        let r = BitString::from_mask(r_seed & ((1 << n) - 1), n);
        if let Ok(p) = partition(&code, &r) {
            prop_assert_eq!(p.side_len(0), p.side_len(1));
            for bit in 0..2u8 {
                for c in p.side(bit) {
                    prop_assert_eq!(dot_and_xor(&c, &r).unwrap(), bit);
                }
            }
        }
    }

    #[test]
    fn measurement_preserves_normalization(state in qubit_strategy(), theta in 0.0f64..PI, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        for basis in [Basis::Z, Basis::X, rotated_basis(theta)] {
            let probs = basis.probabilities(&state).unwrap();
            prop_assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
            let (_, post) = measure(&state, &basis, &mut rng).unwrap();
            prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distinguish_probability_is_a_probability(theta in -10.0f64..10.0) {
        let p = distinguish_probability(theta);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - distinguish_probability(theta + PI)).abs() < 1e-12);
    }

    #[test]
    fn helstrom_matches_pure_state_overlap(a in qubit_strategy(), b in qubit_strategy()) {
        let overlap = a.inner(&b).unwrap().norm_sqr();
        let oracle = 0.5 + 0.5 * (1.0 - overlap).max(0.0).sqrt();
        let got = helstrom_probability(&density_of(&a).unwrap(), &density_of(&b).unwrap()).unwrap();
        prop_assert!((got - oracle).abs() < 1e-9, "{} vs {}", got, oracle);
    }

    #[test]
    fn transcript_json_round_trip(seed in any::<u64>(), bit in 0u8..2) {
        let code = LinearCode::hamming74();
        let t = run_honest(&code, bit, 1, &mut seeded(seed)).unwrap().remove(0);
        let back = Transcript::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert!(bob_verify(&back, &code).unwrap().is_accept());
    }
}
