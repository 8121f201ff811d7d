#![allow(dead_code)]

use cog_core::br::{regularized_best_response, RegularizationParams};
use cog_core::metrics::fsd_dominates;
use cog_core::preference::PreferenceRelation;
use cog_core::rules::{margin_matrix, maximal_lottery_from_margins, Rule};
use cog_core::{cog_from_cardinal, Ballot, CardinalGame, ContextOrdinalGame, MixedStrategy, PreferenceGame, VotePopulation};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

pub const RANKING_RULES: [Rule; 5] = [
    Rule::Borda,
    Rule::Plurality,
    Rule::Veto,
    Rule::Copeland,
    Rule::MaximalLottery,
];

/// Rock, paper, scissors; actions in that order.
pub fn rps() -> CardinalGame {
    let a = vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0],
    ];
    let b = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    CardinalGame::bimatrix(a, b).unwrap()
}

/// Chicken with action 0 = swerve, 1 = straight.
pub fn chicken() -> CardinalGame {
    CardinalGame::bimatrix(
        vec![vec![0.75, 0.5], vec![1.0, 0.0]],
        vec![vec![0.75, 1.0], vec![0.5, 0.0]],
    )
    .unwrap()
}

/// Three agents against two tasks; the task player prefers whichever task
/// the chosen agent is worse at.
pub fn agents_vs_tasks() -> ContextOrdinalGame {
    ContextOrdinalGame::from_fn(vec![3, 2], |player, ctx| {
        let order: &[usize] = match (player, ctx[0]) {
            (0, 0) => &[0, 2, 1],
            (0, _) => &[1, 0, 2],
            (1, 1) => &[0, 1],
            _ => &[1, 0],
        };
        PreferenceRelation::from_order(order).unwrap()
    })
    .unwrap()
}

/// Its deviation matrix: rows are profiles AX, AY, BX, BY, CX, CY; columns
/// are the action weights of A, B, C, X, Y.
pub const AGENTS_VS_TASKS_A: [[f64; 5]; 6] = [
    [0.0, 2.0, 1.0, 0.0, -1.0],
    [0.0, -1.0, 1.0, 1.0, 0.0],
    [-2.0, 0.0, -1.0, 0.0, 1.0],
    [1.0, 0.0, 2.0, -1.0, 0.0],
    [-1.0, 1.0, 0.0, 0.0, -1.0],
    [-1.0, -2.0, 0.0, 1.0, 0.0],
];

/// Rankings with ties: higher value is better.
pub fn arb_ranking(m: usize) -> impl Strategy<Value = PreferenceRelation> {
    prop::collection::vec(0u8..4, m)
        .prop_map(|v| PreferenceRelation::from_values(&v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>()))
}

pub fn weights(raw: &[u32]) -> Vec<f64> {
    let total: u32 = raw.iter().sum();
    raw.iter().map(|&w| f64::from(w) / f64::from(total)).collect()
}

/// At most 4 candidates, at most 5 ballots, positive weights.
pub fn arb_rankings() -> impl Strategy<Value = (usize, Vec<(f64, PreferenceRelation)>)> {
    (2usize..=4).prop_flat_map(|m| {
        prop::collection::vec((1u32..=10, arb_ranking(m)), 1..=5).prop_map(move |v| {
            let w = weights(&v.iter().map(|e| e.0).collect::<Vec<_>>());
            (m, w.into_iter().zip(v.into_iter().map(|e| e.1)).collect())
        })
    })
}

pub fn ranking_population(m: usize, ballots: &[(f64, PreferenceRelation)]) -> VotePopulation {
    VotePopulation::new(
        m,
        ballots.iter().map(|(w, r)| (*w, Ballot::Ranking(r.clone()))).collect(),
    )
    .unwrap()
}

/// A two-player game whose first player, against the ballot-weight mixture,
/// casts exactly `ballots`.
pub fn population_game(m: usize, ballots: &[(f64, PreferenceRelation)]) -> (ContextOrdinalGame, MixedStrategy) {
    let n = ballots.len();
    let g = ContextOrdinalGame::from_fn(vec![m, n], |i, ctx| {
        if i == 0 {
            ballots[ctx[0]].1.clone()
        } else {
            PreferenceRelation::indifferent(n)
        }
    })
    .unwrap();
    let w = MixedStrategy::new(ballots.iter().map(|b| b.0).collect()).unwrap();
    (g, w)
}

/// Lotteries on the simplex grid with step `1 / k`.
pub fn simplex_grid(m: usize, k: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, k: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if m == 1 {
            cur.push(left as f64 / k as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v as f64 / k as f64);
            rec(m - 1, left - v, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force search for a lottery that strictly dominates `x`: the grid
/// plus every single-pair mass transfer out of `x`.
pub fn find_dominator(game: &ContextOrdinalGame, others: &MixedStrategy, x: &MixedStrategy) -> Option<Vec<f64>> {
    let m = x.len();
    let mut candidates = simplex_grid(m, 8);
    for from in 0..m {
        for to in 0..m {
            if from != to && x[from] > 0.0 {
                let mut y = x.probs().to_vec();
                y[to] += y[from];
                y[from] = 0.0;
                candidates.push(y);
            }
        }
    }
    let others = std::slice::from_ref(others);
    candidates.into_iter().find(|y| {
        let y = MixedStrategy::normalized(y.clone()).unwrap();
        fsd_dominates(game, 0, others, &y, x).unwrap()
    })
}

pub fn check_skew_symmetry(m: usize, ballots: &[(f64, PreferenceRelation)]) -> Check {
    let mm = margin_matrix(&ranking_population(m, ballots)).unwrap();
    for a in 0..m {
        prop_assert_eq!(mm.get(a, a), 0.0);
        for b in 0..m {
            prop_assert!((mm.get(a, b) + mm.get(b, a)).abs() <= 1e-9);
        }
    }
    Ok(())
}

pub fn check_maximal_lottery(m: usize, ballots: &[(f64, PreferenceRelation)]) -> Check {
    let mm = margin_matrix(&ranking_population(m, ballots)).unwrap();
    let x = maximal_lottery_from_margins(&mm).unwrap();
    let mx = mm.apply(x.probs());
    prop_assert!(mx.iter().all(|&v| v <= 1e-7), "Mx = {mx:?}");
    let xmx: f64 = x.probs().iter().zip(&mx).map(|(a, b)| a * b).sum();
    prop_assert!(xmx.abs() <= 1e-9);
    if let Some(c) = mm.condorcet_winner() {
        prop_assert!((x[c] - 1.0).abs() <= 1e-9, "Condorcet winner {c} gets {x:?}");
    }
    Ok(())
}

pub fn check_pareto(m: usize, ballots: &[(f64, PreferenceRelation)]) -> Check {
    let pop = ranking_population(m, ballots);
    for a in 0..m {
        for b in 0..m {
            if a == b || !ballots.iter().all(|(_, r)| r.prefers(a, b)) {
                continue;
            }
            for rule in [Rule::Borda, Rule::Copeland] {
                prop_assert!(!rule.apply(&pop).unwrap().winners().contains(&b), "{rule}");
            }
            let ml = Rule::MaximalLottery.apply(&pop).unwrap().canonical();
            prop_assert!(ml[b] <= ml[a] + 1e-9);
        }
    }
    Ok(())
}

pub fn check_sd_efficiency(m: usize, ballots: &[(f64, PreferenceRelation)]) -> Check {
    let pop = ranking_population(m, ballots);
    let (game, others) = population_game(m, ballots);
    for rule in [Rule::Borda, Rule::MaximalLottery] {
        let x = rule.apply(&pop).unwrap().canonical();
        let dominator = find_dominator(&game, &others, &x);
        prop_assert!(dominator.is_none(), "{rule}: {x:?} dominated by {dominator:?}");
    }
    Ok(())
}

/// Splitting every ballot into two copies never changes any rule's output.
pub fn check_merge_invariance(m: usize, ballots: &[(f64, PreferenceRelation)]) -> Check {
    let mut split = Vec::new();
    for (w, r) in ballots {
        split.push((w * 0.25, Ballot::Ranking(r.clone())));
        split.push((w * 0.75, Ballot::Ranking(r.clone())));
    }
    let split = VotePopulation::new(m, split).unwrap();
    let merged = split.merged();
    for rule in &RANKING_RULES {
        let a = rule.apply(&split).unwrap().canonical();
        let b = rule.apply(&merged).unwrap().canonical();
        prop_assert!(a.l1_distance(&b) < 1e-9, "{rule}: {a:?} vs {b:?}");
    }
    Ok(())
}

pub fn arb_cog(max_actions: usize) -> impl Strategy<Value = ContextOrdinalGame> {
    (2usize..=max_actions, 2usize..=max_actions).prop_flat_map(|(m0, m1)| {
        prop::collection::vec(prop::collection::vec(-2i32..=2, m0 * m1), 2).prop_map(move |p| {
            let payoffs = p
                .into_iter()
                .map(|v| v.into_iter().map(f64::from).collect())
                .collect();
            cog_from_cardinal(&CardinalGame::new(vec![m0, m1], payoffs).unwrap())
        })
    })
}

pub fn random_mixed(rng: &mut impl Rng, m: usize) -> MixedStrategy {
    MixedStrategy::normalized((0..m).map(|_| rng.random::<f64>() + 1e-3).collect()).unwrap()
}

#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
    pub rule: usize,
    pub use_mu: bool,
}

pub fn arb_fuzz_case() -> impl Strategy<Value = FuzzCase> {
    (0.0f64..=1.0, 0.0f64..2.0, 1usize..64, any::<u64>(), 0..RANKING_RULES.len(), any::<bool>()).prop_map(
        |(p, q, samples, seed, rule, use_mu)| FuzzCase {
            p,
            q,
            samples,
            seed,
            rule,
            use_mu,
        },
    )
}

/// The regularized response is a lottery for every parameter combination.
pub fn check_simplex(g: &ContextOrdinalGame, case: &FuzzCase) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let counts = g.action_counts().to_vec();
    let others = [random_mixed(&mut rng, counts[1])];
    let mut params = RegularizationParams::new(case.p, case.q, case.samples, case.seed);
    if case.use_mu {
        params = params.with_mu(random_mixed(&mut rng, counts[0]));
    }
    let x = regularized_best_response(g, 0, &others, &RANKING_RULES[case.rule], &params).unwrap();
    prop_assert_eq!(x.len(), counts[0]);
    let sum: f64 = x.probs().iter().sum();
    prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    prop_assert!(x.probs().iter().all(|&v| v >= 0.0 && v.is_finite()), "{x:?}");
    Ok(())
}

/// Checks `|RBR(x) - RBR(x')|_1 <= L |x - x'|_1 + 4 / sqrt(M)` on `pairs`
/// random 2x2 games with `q = 0.1`, where `L` comes from a coarse step of
/// the same game, and returns the largest `L` seen. Shrinking the step must
/// never move the response by more than the bound allows.
pub fn continuity_constant(rule: &Rule, pairs: u64, samples: usize, seed: u64) -> Result<f64, String> {
    let noise = 4.0 / (samples as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for pair in 0..pairs {
        let payoffs = (0..2)
            .map(|_| (0..4).map(|_| f64::from(rng.random_range(-2i32..=2))).collect())
            .collect();
        let g = cog_from_cardinal(&CardinalGame::new(vec![2, 2], payoffs).unwrap());
        let params = RegularizationParams::new(0.0, 0.1, samples, pair);
        let rbr = |y: f64| {
            let others = [MixedStrategy::new(vec![y, 1.0 - y]).unwrap()];
            regularized_best_response(&g, 0, &others, rule, &params).unwrap()
        };
        let y = rng.random_range(0.05..0.9);
        let base = rbr(y);
        let coarse = 0.05;
        let l = base.l1_distance(&rbr(y + coarse)) / (2.0 * coarse);
        worst = worst.max(l);
        for k in 1..=4 {
            let delta = coarse * 10f64.powi(-k);
            let d = base.l1_distance(&rbr(y + delta));
            if d > l.max(1.0) * 2.0 * delta + noise {
                return Err(format!("{rule} pair {pair}: step {delta} moved the response by {d}"));
            }
        }
    }
    Ok(worst)
}
