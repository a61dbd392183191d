use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use exit_tail::bounds::{exit_tail_on_grid, tmain_bound, TmainOptions};
use exit_tail::dynperc::{brute_force_pivotal, crosses, Connectivity, Lattice, LatticeKind, LatticeSpec};
use exit_tail::dynperc::pivotal::pivotal_bits;
use exit_tail::spectral::{
    decorrelation_curve, generator_spectrum, pairwise_correlation, projection_product_bound, projection_product_norm,
    variance_decay, EvalMode,
};
use exit_tail::textio::{chain_to_text, parse_chain};
use exit_tail::verify::ROUNDING;
use exit_tail::walks::carne_varopoulos_sweep;
use exit_tail::{ensemble, EventSet, MarkovOperator, ReversibleChain};

fn chain_and_event(seed: u64, n: usize) -> Option<(ReversibleChain, EventSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = ensemble::random_chain(&mut rng, n, 0.4);
    let event = ensemble::random_event(&mut rng, chain.pi(), 0.05, 0.9)?;
    Some((chain, event))
}

fn kind() -> impl Strategy<Value = LatticeKind> {
    prop_oneof![Just(LatticeKind::TriSite), Just(LatticeKind::Z2Bond)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_is_a_semigroup(seed in any::<u64>(), n in 2usize..9, a in 0u64..12, b in 0u64..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = ensemble::random_chain(&mut rng, n, 0.4);
        let f = ensemble::random_unit_ball(&mut rng, chain.pi());
        let once = chain.propagate(&f, a + b).unwrap();
        let twice = chain.propagate(&chain.propagate(&f, a).unwrap(), b).unwrap();
        for (x, y) in once.iter().zip(&twice) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn variance_decay_is_correlation_at_double_time(seed in any::<u64>(), n in 2usize..9, s in 0u64..20) {
        if let Some((chain, event)) = chain_and_event(seed, n) {
            let v = variance_decay(&chain, &event, s).unwrap();
            let c = pairwise_correlation(&chain, &event, 2 * s).unwrap();
            prop_assert!((v - c).abs() <= 1e-10, "{v} vs {c}");
        }
    }

    #[test]
    fn exit_tail_is_nonincreasing_and_below_the_bound(seed in any::<u64>(), n in 2usize..9) {
        if let Some((chain, event)) = chain_and_event(seed, n) {
            let grid: Vec<u64> = (1..=30).collect();
            let tail = exit_tail_on_grid(&chain, &event, &grid).unwrap();
            prop_assert!(tail.values.windows(2).all(|w| w[1] <= w[0] + ROUNDING));
            let curve = decorrelation_curve(&chain, &event, 60, EvalMode::Envelope).unwrap();
            for (&t, &v) in tail.times.iter().zip(&tail.values) {
                let b = tmain_bound(event.mass(), &curve, t as f64, &TmainOptions::default()).unwrap();
                prop_assert!(v <= b.bound + ROUNDING, "t={t}: {v} > {}", b.bound);
            }
        }
    }

    #[test]
    fn projection_norm_below_bound(seed in any::<u64>(), n in 2usize..10, t in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let generator = ensemble::random_generator(&mut rng, n, 0.4);
        let delta = generator_spectrum(&generator).gap();
        let c1 = ensemble::random_event(&mut rng, generator.pi(), 0.0, 1.0);
        let c2 = ensemble::random_event(&mut rng, generator.pi(), 0.0, 1.0);
        if let (Some(c1), Some(c2)) = (c1, c2) {
            let norm = projection_product_norm(&generator, &c1, &c2, t).unwrap();
            prop_assert!(norm <= projection_product_bound(c1.mass(), c2.mass(), delta, t) + ROUNDING);
        }
    }

    #[test]
    fn heat_kernel_bound_on_random_chains(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = ensemble::random_chain(&mut rng, n, 0.2);
        prop_assert_eq!(carne_varopoulos_sweep(&chain, 20).violations, 0);
    }

    #[test]
    fn chain_text_round_trips(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = ensemble::random_chain(&mut rng, n, 0.5);
        let text = chain_to_text(&chain);
        let back = parse_chain(&text).unwrap();
        prop_assert_eq!(chain_to_text(&back), text);
    }

    #[test]
    fn maintained_connectivity_matches_fresh_search(
        kind in kind(),
        n in 2usize..9,
        ball in any::<bool>(),
        start in any::<u64>(),
        flips in prop::collection::vec(any::<prop::sample::Index>(), 1..200),
    ) {
        let spec = if ball { LatticeSpec::ball(kind, n) } else { LatticeSpec::crossing(kind, n) };
        let lattice = Lattice::new(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(start);
        let mut bits: Vec<bool> = (0..lattice.bits()).map(|_| rand::Rng::random(&mut rng)).collect();
        let mut oracle = Connectivity::new(lattice.primal(), &bits);
        for flip in flips {
            let bit = flip.index(bits.len());
            bits[bit] = !bits[bit];
            oracle.update(lattice.primal(), &bits, bit);
            prop_assert_eq!(oracle.connected(), crosses(lattice.primal(), &bits));
        }
    }

    #[test]
    fn pivotal_bits_match_brute_force(kind in kind(), n in 2usize..8, seed in any::<u64>()) {
        let lattice = Lattice::new(LatticeSpec::crossing(kind, n)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<bool> = (0..lattice.bits()).map(|_| rand::Rng::random(&mut rng)).collect();
        let mut fast = pivotal_bits(&lattice, &bits).unwrap();
        fast.sort_unstable();
        prop_assert_eq!(fast, brute_force_pivotal(&lattice, &bits));
    }
}
