//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line, then exits non-zero if any
//! criterion failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cog_core::br::{best_response, regularized_best_response, RegularizationParams};
use cog_core::election::{
    solve_election, table1, table2, verify_recorded_election, ElectionAction, PARTICIPANTS,
};
use cog_core::experiments::{ingest_performance_csv, landscape, LandscapeMetric, TaskBallots};
use cog_core::game::vote_population;
use cog_core::metrics::{
    classical_exploitability, distortion_bounds, emd_exploitability, hindsight_winrate_at, shapley_breakdown,
    verify_ne, CorollaryForm, DistortionInputs, Witness,
};
use cog_core::rules::{borda_vector, positional_scores, Rule};
use cog_core::solvers::{ftrl_solve, iterate_diffs, LleConfig, SolverConfig};
use cog_core::structure::{harmonic_check, preference_graph, response_graph, sink_components, ArcMode};
use cog_core::{borda_scoring, cog_from_cardinal, induce_nfg, score_cog, MixedStrategy, StrategyProfile};
use common::*;
use proptest::test_runner::{Config, TestRunner};
use std::sync::atomic::{AtomicUsize, Ordering};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fig1_borda() -> Outcome {
    let cog = cog_from_cardinal(&rps());
    let x = MixedStrategy::new(vec![0.25, 0.30, 0.45]).unwrap();
    let pop = vote_population(&cog, 0, std::slice::from_ref(&x)).unwrap();
    let scores = positional_scores(&pop, &borda_vector(3)).unwrap();
    let br = best_response(&cog, 0, &[x], &Rule::Borda).unwrap();
    let expected = [1.15, 0.80, 1.05];
    let err = scores.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-12, || format!("scores {scores:?}"))?;
    ensure(br.winners() == [0], || format!("winners {:?}", br.winners()))?;
    Ok(format!("scores {scores:?}, winners {{rock}}"))
}

fn chicken_equilibria() -> Outcome {
    let g = chicken();
    let cog = cog_from_cardinal(&g);
    let half = StrategyProfile::uniform(&[2, 2]);
    for rule in [Rule::Borda, Rule::MaximalLottery] {
        let rep = verify_ne(&cog, std::slice::from_ref(&rule), &half, 0.0).unwrap();
        ensure(rep.all_pass() && rep.players.iter().all(|p| p.epsilon == 0.0), || {
            format!("{rule} rejects (1/2, 1/2): {rep:?}")
        })?;
    }
    let ne = StrategyProfile::from_vecs(vec![vec![2.0 / 3.0, 1.0 / 3.0]; 2]).unwrap();
    let scored = score_cog(&g);
    let emd = emd_exploitability(&scored, &[Rule::Score], &ne, &RegularizationParams::none()).unwrap().max;
    let classical = classical_exploitability(&g, &ne).unwrap().max;
    ensure(emd <= 1e-9 && classical <= 1e-9, || format!("score eps {emd}, classical {classical}"))?;
    let params = RegularizationParams::new(0.0, 0.1, 100, 17);
    let grid = |rule: Rule| {
        landscape(&cog, &LandscapeMetric::Emd { rules: vec![rule], params: params.clone() }, 101).unwrap()
    };
    let (ml, borda) = (grid(Rule::MaximalLottery), grid(Rule::Borda));
    let diff = ml.iter().zip(&borda).map(|(a, b)| (a.eps - b.eps).abs()).fold(0.0, f64::max);
    ensure(ml.len() == 101 * 101 && diff <= 1e-9, || format!("landscape max diff {diff}"))?;
    Ok(format!("score eps {emd:.1e} at 2/3, ML/Borda landscape max diff {diff:.1e}"))
}

fn shapley_golden() -> Outcome {
    let cog = cog_from_cardinal(&chicken());
    let s = shapley_breakdown(&cog, &Rule::Borda, &StrategyProfile::uniform(&[2, 2]), 0, 1).unwrap();
    ensure(s == vec![vec![-0.25, 0.75], vec![0.75, -0.25]], || format!("{s:?}"))?;
    Ok(format!("{s:?}"))
}

fn election_verdicts() -> Outcome {
    let ok = verify_recorded_election(&table2(), &Rule::MaximalLottery).unwrap();
    ensure(ok.all_pass(), || format!("second record deviators {:?}", ok.deviators()))?;
    let bad = verify_recorded_election(&table1(), &Rule::MaximalLottery).unwrap();
    let koala = 1;
    ensure(bad.deviators() == [koala], || format!("first record deviators {:?}", bad.deviators()))?;
    let recorded = table1().action_array()[koala].wtl;
    let witness = match bad.players[koala].witness {
        Some(Witness::Action(a)) => ElectionAction::from_index(koala, a).unwrap(),
        ref w => return Err(format!("witness {w:?}")),
    };
    ensure(witness.wtl < recorded, || format!("witness wtl {} vs recorded {recorded}", witness.wtl))?;
    Ok(format!("all pass / Koala deviates to wtl {} (recorded {recorded})", witness.wtl))
}

fn election_lle() -> Outcome {
    let sol = solve_election(&table2(), &LleConfig::default(), 10_000, 0).map_err(|e| e.to_string())?;
    let names = &table2().names;
    let freq: Vec<String> = (0..PARTICIPANTS)
        .map(|p| format!("{} {:.4}", names[p], sol.winner_frequencies[p]))
        .collect();
    let bear = sol.winner_frequencies[0];
    ensure(bear > 0.95, || format!("Bear elected with frequency {bear}; {}", freq.join(", ")))?;
    Ok(freq.join(", "))
}

fn structure() -> Outcome {
    let cog = agents_vs_tasks();
    let nfg = induce_nfg(&cog, &borda_scoring(&[3, 2])).unwrap();
    let rep = harmonic_check(&nfg);
    let printed: Vec<Vec<f64>> = AGENTS_VS_TASKS_A.iter().map(|r| r.to_vec()).collect();
    ensure(rep.deviation_matrix == printed, || format!("A = {:?}", rep.deviation_matrix))?;
    ensure(rep.nullspace_dim == 0 && !rep.is_harmonic, || format!("{rep:?}"))?;
    for graph in [response_graph(&nfg, ArcMode::WithTies), preference_graph(&cog, ArcMode::WithTies)] {
        let s = sink_components(&graph);
        let sinks: Vec<_> = s.sinks().collect();
        ensure(sinks.len() == 1 && sinks[0].nodes == (0..6).collect::<Vec<_>>(), || {
            format!("sinks {sinks:?}")
        })?;
    }
    Ok("A reproduced, rank 5, not harmonic, one sink with all 6 profiles".into())
}

fn regularization() -> Outcome {
    let cog = cog_from_cardinal(&rps());
    let m = 10_000;
    let others = [MixedStrategy::new(vec![0.25, 0.30, 0.45]).unwrap()];
    let mu = MixedStrategy::new(vec![0.6, 0.3, 0.1]).unwrap();
    let mut c1 = 0.0f64;
    for rule in &RANKING_RULES {
        let params = RegularizationParams::new(1.0, 0.1, m, 5).with_mu(mu.clone());
        let x = regularized_best_response(&cog, 0, &others, rule, &params).unwrap();
        let dev = x.probs().iter().zip(mu.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        c1 = c1.max(dev);
        // Single-valued: the same inputs always give the same lottery.
        let again = regularized_best_response(&cog, 0, &others, rule, &params).unwrap();
        ensure(again == x, || format!("{rule}: repeated call differs"))?;
    }
    ensure(c1 <= 3.0 / (m as f64).sqrt(), || format!("p = 1 deviates from mu by {c1}"))?;
    for rule in &RANKING_RULES {
        let canonical = best_response(&cog, 0, &others, rule).unwrap().canonical();
        let r = regularized_best_response(&cog, 0, &others, rule, &RegularizationParams::none()).unwrap();
        ensure(r == canonical, || format!("{rule}: p = q = 0 gives {r:?}, canonical {canonical:?}"))?;
    }
    let mut ls = Vec::new();
    for rule in [Rule::Borda, Rule::MaximalLottery] {
        ls.push(format!("{rule} L {:.2}", continuity_constant(&rule, 50, m, 2024)?));
    }
    Ok(format!("C1 max dev {c1:.4}, C2 exact, {}", ls.join(", ")))
}

fn learning() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.csv");
    std::fs::write(&path, "1,0\n0,1\n").unwrap();
    let grades = 4;
    let ingested = ingest_performance_csv(&path, grades, TaskBallots::Ranking).unwrap();
    let g = &ingested.game;
    let rules = vec![Rule::Sgf(grades), Rule::Borda];
    let config = SolverConfig::new(rules.clone(), 500).with_seed(8);
    let traj = ftrl_solve(g, &config).unwrap();
    let diffs = iterate_diffs(&traj);
    let last_diff = *diffs.last().unwrap();
    ensure(last_diff < 0.01, || format!("iterate diff {last_diff}"))?;
    let p0 = RegularizationParams::new(0.0, 0.1, 500, 3);
    let mut hind = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        hind.push(hindsight_winrate_at(&traj, g, i, rule, &p0, &[500]).unwrap()[0]);
    }
    ensure(hind.iter().all(|&w| w <= 0.55), || format!("hindsight winrates {hind:?}"))?;
    let eps = emd_exploitability(g, &rules, traj.average(), &RegularizationParams::new(0.0, 0.1, 1000, 5))
        .unwrap()
        .max;
    ensure(eps <= 0.05, || format!("EMD exploitability of the average {eps}"))?;
    Ok(format!("diff {last_diff:.4}, hindsight {hind:.3?}, EMD {eps:.4}"))
}

// A fresh runner per suite: a runner that already finished stops immediately.
fn runner() -> TestRunner {
    TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() })
}

fn property_suites() -> Outcome {
    let suites: [(&str, fn(usize, &[(f64, cog_core::PreferenceRelation)]) -> Check); 5] = [
        ("skew symmetry", check_skew_symmetry),
        ("maximal lottery", check_maximal_lottery),
        ("SD-efficiency", check_sd_efficiency),
        ("Pareto", check_pareto),
        ("merge invariance", check_merge_invariance),
    ];
    let cases = AtomicUsize::new(0);
    for (name, f) in suites {
        runner()
            .run(&arb_rankings(), |(m, b)| {
                cases.fetch_add(1, Ordering::Relaxed);
                f(m, &b)
            })
            .map_err(|e| format!("{name}: {e}"))?;
    }
    runner()
        .run(&(arb_cog(3), arb_fuzz_case()), |(g, case)| {
            cases.fetch_add(1, Ordering::Relaxed);
            check_simplex(&g, &case)
        })
        .map_err(|e| format!("simplex fuzzing: {e}"))?;
    let n = cases.into_inner();
    ensure(n >= 6 * 200, || format!("only {n} cases ran"))?;
    Ok(format!("6 suites, {n} cases, zero failures"))
}

fn bounds() -> Outcome {
    let calc = |s: Vec<f64>, d_plus: f64, p: f64, t: usize, form| {
        distortion_bounds(&DistortionInputs { s, d_plus, p, num_co_profiles: 4, t, form }).unwrap()
    };
    for form in [CorollaryForm::MainText, CorollaryForm::Appendix] {
        for t in 1..=1000 {
            let b = calc(vec![1.0, 1.0], 0.0, 0.0, t, form);
            let want = (t as f64 + 1.0) / (2.0 * t as f64);
            ensure((b.wfp_eps - want).abs() <= 1e-15, || format!("T = {t}: {}", b.wfp_eps))?;
            ensure(b.reg_extra == 0.0, || format!("reg_extra {}", b.reg_extra))?;
        }
        // Non-increasing in T while d+ <= 1 (always, in the appendix form).
        let falls_to = if form == CorollaryForm::MainText { 1.0 } else { 4.0 };
        for d in [0.0, 0.2, 0.5, 1.0, 2.0, 4.0].into_iter().filter(|&d| d <= falls_to) {
            for t in 1..200 {
                let (a, b) = (calc(vec![1.0, 1.0], d, 0.1, t, form), calc(vec![1.0, 1.0], d, 0.1, t + 1, form));
                ensure(b.wfp_eps <= a.wfp_eps + 1e-15, || format!("not decreasing in T at d+ {d}, T {t}"))?;
                let c = calc(vec![1.0, 1.0], d + 0.1, 0.1, t, form);
                ensure(c.wfp_eps >= a.wfp_eps, || format!("not increasing in d+ at {d}"))?;
            }
        }
        for k in 0..20 {
            let (p, q) = (0.05 * k as f64, 0.05 * (k + 1) as f64);
            ensure(calc(vec![1.0, 2.0], 0.1, q, 10, form).reg_extra >= calc(vec![1.0, 2.0], 0.1, p, 10, form).reg_extra, || {
                format!("reg_extra not increasing in p at {p}")
            })?;
        }
    }
    Ok("wfp_eps = (T+1)/(2T) for T <= 1000, reg_extra(0) = 0, grids monotone".into())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("RPS Borda response", Duration::from_millis(1), fig1_borda),
        ("Chicken equilibria", Duration::from_secs(10), chicken_equilibria),
        ("Shapley breakdown", Duration::from_secs(1), shapley_golden),
        ("election verdicts", Duration::from_secs(30), election_verdicts),
        ("election logit equilibrium", Duration::from_secs(600), election_lle),
        ("response-graph structure", Duration::from_secs(1), structure),
        ("regularization desiderata", Duration::from_secs(60), regularization),
        ("learning on a performance matrix", Duration::from_secs(60), learning),
        ("property suites", Duration::from_secs(300), property_suites),
        ("bound calculator", Duration::from_secs(1), bounds),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.into_iter().enumerate() {
        let id = k + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(msg) => println!("criterion {id:>2} [{name}]: PASS in {elapsed:.2?}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id:>2} [{name}]: FAIL in {elapsed:.2?}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
