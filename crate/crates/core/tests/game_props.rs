use cog_core::game::{cog_from_cardinal, induce_nfg, vote_population, vote_population_unmerged};
use cog_core::rules::{argmax_set, Rule};
use cog_core::strategy::for_each_profile;
use cog_core::{CardinalGame, MixedStrategy, PreferenceGame};
use proptest::prelude::*;

fn arb_game() -> impl Strategy<Value = CardinalGame> {
    prop::collection::vec(2usize..=3, 2..=3).prop_flat_map(|counts| {
        let size: usize = counts.iter().product();
        let n = counts.len();
        prop::collection::vec(prop::collection::vec(-3i32..=3, size), n).prop_map(move |p| {
            let payoffs = p
                .into_iter()
                .map(|v| v.into_iter().map(f64::from).collect())
                .collect();
            CardinalGame::new(counts.clone(), payoffs).unwrap()
        })
    })
}

fn arb_mixed(m: usize) -> impl Strategy<Value = MixedStrategy> {
    prop::collection::vec(0u32..=20, m).prop_map(move |w| {
        if w.iter().all(|&v| v == 0) {
            MixedStrategy::uniform(m)
        } else {
            MixedStrategy::normalized(w.into_iter().map(f64::from).collect()).unwrap()
        }
    })
}

fn arb_game_and_others() -> impl Strategy<Value = (CardinalGame, Vec<MixedStrategy>)> {
    arb_game().prop_flat_map(|g| {
        let counts: Vec<usize> = g.action_counts()[1..].to_vec();
        let others: Vec<_> = counts.into_iter().map(arb_mixed).collect();
        (Just(g), others)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn populations_sum_to_one((g, others) in arb_game_and_others()) {
        let cog = cog_from_cardinal(&g);
        let pop = vote_population(&cog, 0, &others).unwrap();
        prop_assert!((pop.total_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ordinal_reduction_ignores_affine_rescaling(g in arb_game(), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let h = g.map_payoffs(|_, v| scale * v + shift);
        prop_assert_eq!(cog_from_cardinal(&g), cog_from_cardinal(&h));
    }

    #[test]
    fn rank_scores_preserve_slice_argmax(g in arb_game()) {
        let cog = cog_from_cardinal(&g);
        let counts = g.action_counts().to_vec();
        // Per-player scores: distinct payoff ranks, best first.
        let scoring: Vec<Vec<f64>> = counts.iter().map(|&m| (0..m).rev().map(|k| k as f64).collect()).collect();
        let induced = induce_nfg(&cog, &scoring).unwrap();
        for i in 0..counts.len() {
            let ctx_counts = cog.context_counts(i);
            for_each_profile(&ctx_counts, |ctx| {
                assert_eq!(argmax_set(&g.slice(i, ctx)), argmax_set(&induced.slice(i, ctx)));
            });
        }
    }

    #[test]
    fn merging_never_changes_a_winner_set((g, others) in arb_game_and_others()) {
        let cog = cog_from_cardinal(&g);
        let raw = vote_population_unmerged(&cog, 0, &others).unwrap();
        let merged = raw.merged();
        for rule in [Rule::Borda, Rule::Plurality, Rule::Veto, Rule::Copeland, Rule::MaximalLottery] {
            let a = rule.apply(&raw).unwrap().canonical();
            let b = rule.apply(&merged).unwrap().canonical();
            prop_assert!(a.l1_distance(&b) < 1e-9, "{rule}: {a:?} vs {b:?}");
        }
    }
}
