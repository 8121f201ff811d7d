mod common;

use cog_core::rules::Rule;
use cog_core::solvers::{
    fictitious_play, ftrl_solve, iterate_diffs, lle_solve, Averaging, LleConfig, Schedule, SolverConfig,
};
use cog_core::{cog_from_cardinal, score_cog, CardinalGame, StrategyProfile};
use proptest::prelude::*;

fn arb_2x2() -> impl Strategy<Value = CardinalGame> {
    prop::collection::vec(prop::collection::vec(-3i32..=3, 4), 2).prop_map(|p| {
        let payoffs = p
            .into_iter()
            .map(|v| v.into_iter().map(f64::from).collect())
            .collect();
        CardinalGame::new(vec![2, 2], payoffs).unwrap()
    })
}

/// Classical fictitious play written out directly: every round each player
/// best-responds (uniform over payoff ties) to the average of the initial
/// uniform strategy and all earlier rounds.
fn reference_fp(g: &CardinalGame, rounds: usize) -> Vec<StrategyProfile> {
    let mut sums = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
    let mut played = 1.0;
    let mut out_sums = vec![vec![0.0; 2], vec![0.0; 2]];
    let mut out = Vec::new();
    for t in 1..=rounds {
        let avg = StrategyProfile::from_vecs(sums.iter().map(|s| s.iter().map(|v| v / played).collect()).collect())
            .unwrap();
        let mut next = Vec::new();
        for i in 0..2 {
            let u = g.expected_payoffs(i, &avg);
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // Ties are judged as the rule does: equal at 12 significant digits.
            let win: Vec<bool> = u.iter().map(|&v| (v - best).abs() <= 1e-12 * best.abs().max(1.0)).collect();
            let k = win.iter().filter(|&&w| w).count() as f64;
            next.push(win.iter().map(|&w| if w { 1.0 / k } else { 0.0 }).collect::<Vec<f64>>());
        }
        for i in 0..2 {
            for a in 0..2 {
                sums[i][a] += next[i][a];
                out_sums[i][a] += next[i][a];
            }
        }
        played += 1.0;
        out.push(
            StrategyProfile::from_vecs(out_sums.iter().map(|s| s.iter().map(|v| v / t as f64).collect()).collect())
                .unwrap(),
        );
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unregularized_score_ftrl_is_fictitious_play(g in arb_2x2()) {
        let config = SolverConfig::homogeneous(Rule::Score, 2, 30)
            .with_q(0.0)
            .with_schedule(Schedule::Constant(0.0));
        let ftrl = ftrl_solve(&score_cog(&g), &config).unwrap();
        let fp = fictitious_play(&g, &config).unwrap();
        prop_assert_eq!(&ftrl, &fp);
        let reference = reference_fp(&g, 30);
        for (a, b) in ftrl.profiles.iter().zip(&reference) {
            prop_assert!(a.l1_distance(b) < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn trajectories_stay_on_the_simplex(g in arb_2x2(), seed in any::<u64>()) {
        let config = SolverConfig::homogeneous(Rule::MaximalLottery, 2, 20).with_samples(16).with_seed(seed);
        let traj = ftrl_solve(&cog_from_cardinal(&g), &config).unwrap();
        for x in traj.best_responses.iter().chain(&traj.profiles) {
            for s in x.strategies() {
                let sum: f64 = s.probs().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                prop_assert!(s.probs().iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn logit_fixed_point_scales_with_temperature(g in arb_2x2(), c in 0.1f64..10.0) {
        let base = LleConfig { t0: 5.0, min_temperature: 0.5, steps: 8, ..LleConfig::default() };
        let scaled = LleConfig { t0: 5.0 * c, min_temperature: 0.5 * c, ..base.clone() };
        let x = lle_solve(&g, &base).unwrap();
        let y = lle_solve(&g.map_payoffs(|_, v| c * v), &scaled).unwrap();
        prop_assert!(x.l1_distance(&y) < 1e-6, "{x:?} vs {y:?}");
    }
}

#[test]
fn identical_seeds_identical_trajectories() {
    let g = cog_from_cardinal(&common::rps());
    let config = SolverConfig::homogeneous(Rule::Borda, 2, 40).with_samples(32).with_seed(77);
    assert_eq!(ftrl_solve(&g, &config).unwrap(), ftrl_solve(&g, &config).unwrap());
    let other = ftrl_solve(&g, &config.clone().with_seed(78)).unwrap();
    assert_ne!(ftrl_solve(&g, &config).unwrap(), other);
}

#[test]
fn borda_ftrl_on_chicken_stays_symmetric_near_half() {
    let g = cog_from_cardinal(&common::chicken());
    let config = SolverConfig::homogeneous(Rule::Borda, 2, 400).with_seed(3);
    let traj = ftrl_solve(&g, &config).unwrap();
    let avg = traj.output(Averaging::Uniform);
    assert_eq!(avg.player(0), avg.player(1));
    assert!((avg.player(0)[0] - 0.5).abs() < 0.05, "{avg:?}");
    let diffs = iterate_diffs(&traj);
    assert!(*diffs.last().unwrap() < 0.02);
}

#[test]
fn score_ftrl_on_chicken_approaches_two_thirds() {
    let g = score_cog(&common::chicken());
    let config = SolverConfig::homogeneous(Rule::Score, 2, 2000).with_q(0.0).with_seed(1);
    let traj = ftrl_solve(&g, &config).unwrap();
    let swerve = traj.average().player(0)[0];
    assert!((swerve - 2.0 / 3.0).abs() < 0.03, "swerve {swerve}");
}
