//! Randomized invariants across topology, bounds, scheme and simulator.

use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timdof::bounds::{analyze, AnalyzeOptions};
use timdof::cycles::verify_completed_cycle;
use timdof::graphs::GraphBundle;
use timdof::scheme::{build_four_ninths_scheme, build_half_scheme, validate_scheme_structure};
use timdof::simulator::{encode, Message, SimConfig};
use timdof::topology::{emit_topology, parse_topology, NetworkTopology};

fn topology(users: usize, p: f64, seed: u64) -> NetworkTopology {
    NetworkTopology::random(users, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn text_round_trip(users in 1usize..=9, p in 0.0f64..0.6, seed in any::<u64>()) {
        let t = topology(users, p, seed);
        prop_assert_eq!(parse_topology(&emit_topology(&t)).unwrap(), t);
    }

    #[test]
    fn bounds_in_range_with_verified_certificates(users in 3usize..=10, p in 0.05f64..0.5, seed in any::<u64>()) {
        let t = topology(users, p, seed);
        let r = analyze(&t, &AnalyzeOptions::default());
        match (r.theorem1_bound, &r.certificate) {
            (Some(b), Some(c)) => {
                prop_assert!(Ratio::new(4, 9) <= b && b < Ratio::new(1, 2));
                prop_assert!(verify_completed_cycle(&r.bundle, c).ok());
                prop_assert!(!r.half_dof.c2_ok);
            }
            (None, None) => prop_assert!(r.half_dof.c2_ok),
            _ => prop_assert!(false, "bound and certificate must come together"),
        }
    }

    #[test]
    fn built_schemes_validate(users in 2usize..=9, p in 0.05f64..0.5, seed in any::<u64>()) {
        let t = topology(users, p, seed);
        let b = GraphBundle::build(&t);
        for scheme in [build_half_scheme(&b), build_four_ninths_scheme(&b)].into_iter().flatten() {
            prop_assert!(validate_scheme_structure(&scheme, &t).unwrap().all_pass());
        }
        if !b.internal_conflicts.is_empty() {
            prop_assert!(build_half_scheme(&b).is_err());
            prop_assert!(build_four_ninths_scheme(&b).is_err());
        }
    }

    #[test]
    fn encoder_stays_in_alphabet(
        users in 2usize..=9,
        p in 0.05f64..0.5,
        seed in any::<u64>(),
        pbar in 2u64..=1_000_000,
        qc in 1u64..=8,
    ) {
        let t = topology(users, p, seed);
        let b = GraphBundle::build(&t);
        let Ok(scheme) = build_four_ninths_scheme(&b).or_else(|_| build_half_scheme(&b)) else {
            return Ok(());
        };
        let config = SimConfig::new(pbar, qc, 1, seed);
        prop_assume!(config.validate().is_ok());
        let messages: Vec<Message> = (0..users as u64)
            .map(|i| Message {
                private: (seed.wrapping_add(i * 7919)) % config.private_alphabet(),
                common: (seed >> 7).wrapping_add(i) % qc,
            })
            .collect();
        for row in encode(&scheme, &messages, config.common_spacing()) {
            prop_assert_eq!(row.len(), scheme.slots);
            prop_assert!(row.iter().all(|&x| x <= pbar));
        }
    }
}
