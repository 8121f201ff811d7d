use std::path::Path;

use cog_core::br::RegularizationParams;
use cog_core::election::{
    load_elections_csv, solve_election, verify_recorded_election, ElectionAction, ElectionRecord, NUM_ACTIONS,
    PARTICIPANTS,
};
use cog_core::experiments::{
    grid, ingest_performance_csv, landscape, rbr_sweep, LandscapeMetric, TaskBallots,
};
use cog_core::io::{cog_to_json, fmt_f64, load_game, load_profile, GameSpec, Table};
use cog_core::metrics::{
    classical_exploitability, distortion_bounds, emd_exploitability, hindsight_winrate, margin_of_victory,
    rule_for, shapley_breakdown, verify_ne, CorollaryForm, DistortionInputs, Witness,
};
use cog_core::rules::Rule;
use cog_core::solvers::{fictitious_play, ftrl_solve, iterate_diffs, LleConfig, Schedule, SolverConfig};
use cog_core::structure::{harmonic_check, preference_graph, response_graph, sink_components, ArcMode};
use cog_core::{score_cog, CogError, ContextOrdinalGame, MixedStrategy, PreferenceGame, Result, StrategyProfile};
use serde_json::{json, Value};

use crate::output::{emit, json_bytes, Output};
use crate::{
    AnalyzeArgs, Cli, Command, ElectionCommand, ElectionSolveArgs, Format, GraphKind, IngestArgs, LandscapeArgs,
    LandscapeKind, LearnArgs, Metric, MetricsArgs, RbrSweepArgs, RegArgs, SolveArgs, TaskBallotArg, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    let out = match &cli.command {
        Command::Solve(a) => solve(a, cli.seed)?,
        Command::Verify(a) => verify(a)?,
        Command::Metrics(a) => metrics(a, cli.seed)?,
        Command::Landscape(a) => landscape_cmd(a, cli.seed)?,
        Command::RbrSweep(a) => rbr_sweep_cmd(a, cli.seed)?,
        Command::Election(ElectionCommand::Verify { csv, rule }) => election_verify(csv, rule, cli.format)?,
        Command::Election(ElectionCommand::Solve(a)) => election_solve(a, cli.seed, cli.format)?,
        Command::Analyze(a) => analyze(a, cli.format)?,
        Command::Ingest(a) => ingest(a)?,
    };
    emit(out, cli.format, cli.out.as_deref())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CogError::validation(format!("cannot parse {what} `{}`", v.trim())))
        })
        .collect()
}

fn parse_rules(s: &str) -> Result<Vec<Rule>> {
    s.split(',').map(str::parse).collect()
}

fn parse_mu(s: &str) -> Result<MixedStrategy> {
    MixedStrategy::normalized(parse_list(s, "probability")?)
}

/// Score ballots need the cardinal payoffs; every other rule reads rankings.
fn preference_view(spec: &GameSpec, rules: &[Rule]) -> ContextOrdinalGame {
    match spec {
        GameSpec::Payoffs(g) if rules.iter().all(|r| *r == Rule::Score) => score_cog(g),
        _ => spec.to_cog(),
    }
}

fn reg_params(a: &RegArgs, seed: u64) -> Result<RegularizationParams> {
    let mut params = RegularizationParams::new(a.p, a.q, a.samples, seed);
    if let Some(mu) = &a.mu {
        params = params.with_mu(parse_mu(mu)?);
    }
    Ok(params)
}

fn profile_header(counts: &[usize]) -> Vec<String> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| (0..m).map(move |a| format!("p{i}_a{a}")))
        .collect()
}

fn profile_cells(x: &StrategyProfile) -> Vec<String> {
    x.strategies()
        .iter()
        .flat_map(|s| s.probs().iter().map(|&v| fmt_f64(v)))
        .collect()
}

fn learn_config(a: &LearnArgs, num_players: usize, seed: u64) -> Result<SolverConfig> {
    let mut rules = parse_rules(&a.rule)?;
    if rules.len() == 1 {
        rules = vec![rules[0].clone(); num_players];
    }
    let mut config = SolverConfig::new(rules, a.iters)
        .with_q(a.q)
        .with_samples(a.samples)
        .with_seed(seed)
        .with_schedule(a.schedule.parse::<Schedule>()?);
    if let Some(mu) = &a.mu {
        let per_player: Vec<&str> = mu.split(';').collect();
        if per_player.len() != num_players {
            return Err(CogError::validation(format!(
                "--mu lists {} players, the game has {num_players}",
                per_player.len()
            )));
        }
        config.mu = per_player.into_iter().map(|s| parse_mu(s).map(Some)).collect::<Result<_>>()?;
    }
    Ok(config)
}

fn learn(game: &ContextOrdinalGame, a: &LearnArgs, seed: u64) -> Result<cog_core::solvers::Trajectory> {
    let config = learn_config(a, game.num_players(), seed)?;
    if a.fp {
        fictitious_play(game, &config)
    } else {
        ftrl_solve(game, &config)
    }
}

fn solve(a: &SolveArgs, seed: u64) -> Result<Output> {
    let spec = load_game(&a.game.game)?;
    let rules = parse_rules(&a.learn.rule)?;
    let game = preference_view(&spec, &rules);
    let traj = learn(&game, &a.learn, seed)?;
    let diffs = iterate_diffs(&traj);
    let mut header = vec!["round".to_string()];
    header.extend(profile_header(game.action_counts()));
    header.push("iterate_diff".into());
    let mut table = Table::new(header);
    let rows = if a.last_iterate { &traj.best_responses } else { &traj.profiles };
    for (t, x) in rows.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(profile_cells(x));
        row.push(if t == 0 { String::new() } else { fmt_f64(diffs[t - 1]) });
        table.push(row);
    }
    Ok(Output::Table(table))
}

fn witness_cell(w: &Option<Witness>) -> String {
    match w {
        None => String::new(),
        Some(Witness::Action(a)) => a.to_string(),
        Some(Witness::Lottery(l)) => l.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" "),
    }
}

fn verify(a: &VerifyArgs) -> Result<Output> {
    let spec = load_game(&a.game.game)?;
    let rules = parse_rules(&a.rule)?;
    let game = preference_view(&spec, &rules);
    let x = load_profile(&a.profile)?;
    let report = verify_ne(&game, &rules, &x, a.tol)?;
    let mut table = Table::new(["player", "rule", "in_best_response", "epsilon", "witness"]);
    for (i, p) in report.players.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            rule_for(&rules, i).to_string(),
            p.in_best_response.to_string(),
            fmt_f64(p.epsilon),
            witness_cell(&p.witness),
        ]);
    }
    Ok(Output::Table(table))
}

fn need<'a, T>(v: &'a Option<T>, flag: &str, metric: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| CogError::validation(format!("--metric {metric} needs {flag}")))
}

fn metrics(a: &MetricsArgs, seed: u64) -> Result<Output> {
    if a.metric == Metric::Bounds {
        return bounds(a);
    }
    let name = format!("{:?}", a.metric).to_lowercase();
    let spec = load_game(need(&a.game, "--game", &name)?)?;
    let rules = parse_rules(&a.rule)?;
    let game = preference_view(&spec, &rules);
    let n = game.num_players();
    match a.metric {
        Metric::Eps => {
            let GameSpec::Payoffs(nfg) = &spec else {
                return Err(CogError::validation("--metric eps needs a game with payoffs"));
            };
            let x = load_profile(need(&a.profile, "--profile", &name)?)?;
            let e = classical_exploitability(nfg, &x)?;
            Ok(Output::Table(player_table("eps", &e.per_player, e.max)))
        }
        Metric::Emd => {
            let x = load_profile(need(&a.profile, "--profile", &name)?)?;
            let ps = match &a.p_sweep {
                Some(s) => parse_list(s, "p")?,
                None => vec![a.reg.p],
            };
            let mut header = vec!["p".to_string()];
            header.extend((0..n).map(|i| format!("emd_p{i}")));
            header.push("max".into());
            let mut table = Table::new(header);
            for p in ps {
                let params = reg_params(&RegArgs { p, ..a.reg.clone() }, seed)?;
                let e = emd_exploitability(&game, &rules, &x, &params)?;
                let mut row = vec![p];
                row.extend(&e.per_player);
                row.push(e.max);
                table.push_numbers(&row);
            }
            Ok(Output::Table(table))
        }
        Metric::Mov => {
            let x = load_profile(need(&a.profile, "--profile", &name)?)?;
            let v = (0..n)
                .map(|i| margin_of_victory(&game, rule_for(&rules, i), i, &x))
                .collect::<Result<Vec<_>>>()?;
            let max = v.iter().copied().fold(0.0, f64::max);
            Ok(Output::Table(player_table("margin_of_victory", &v, max)))
        }
        Metric::Hindsight => {
            let run = LearnArgs {
                rule: a.rule.clone(),
                iters: a.iters,
                q: a.reg.q,
                samples: a.reg.samples,
                schedule: a.schedule.clone(),
                mu: None,
                fp: false,
            };
            let traj = learn(&game, &run, seed)?;
            let params = reg_params(&a.reg, seed)?;
            let per_player = (0..n)
                .map(|i| hindsight_winrate(&traj, &game, i, rule_for(&rules, i), &params))
                .collect::<Result<Vec<_>>>()?;
            let mut header = vec!["round".to_string()];
            header.extend((0..n).map(|i| format!("winrate_p{i}")));
            let mut table = Table::new(header);
            for t in 0..traj.rounds() {
                let mut row = vec![(t + 1) as f64];
                row.extend(per_player.iter().map(|w| w[t]));
                let mut cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                cells[0] = (t + 1).to_string();
                table.push(cells);
            }
            Ok(Output::Table(table))
        }
        Metric::Shapley => {
            let x = load_profile(need(&a.profile, "--profile", &name)?)?;
            let rule = rule_for(&rules, a.i);
            let s = shapley_breakdown(&game, rule, &x, a.i, a.j)?;
            let mj = game.action_counts()[a.j];
            let mut header = vec![format!("p{}_action", a.i)];
            header.extend((0..mj).map(|b| format!("p{}_a{b}", a.j)));
            let mut table = Table::new(header);
            for (ai, row) in s.iter().enumerate() {
                let mut cells = vec![ai.to_string()];
                cells.extend(row.iter().map(|&v| fmt_f64(v)));
                table.push(cells);
            }
            Ok(Output::Table(table))
        }
        Metric::Bounds => unreachable!("handled above"),
    }
}

fn player_table(column: &str, values: &[f64], max: f64) -> Table {
    let mut table = Table::new(["player", column]);
    for (i, &v) in values.iter().enumerate() {
        table.push(vec![i.to_string(), fmt_f64(v)]);
    }
    table.push(vec!["max".into(), fmt_f64(max)]);
    table
}

fn bounds(a: &MetricsArgs) -> Result<Output> {
    let s: Vec<f64> = parse_list(need(&a.s, "--s", "bounds")?, "payoff sum")?;
    let ps = match &a.p_sweep {
        Some(v) => parse_list(v, "p")?,
        None => vec![a.reg.p],
    };
    let mut table = Table::new([
        "form",
        "p",
        "kappa_plus",
        "d_bar_plus",
        "kappa_mult",
        "reg_extra",
        "d_bar_plus_regularized",
        "wfp_eps",
        "fp_remark_bound",
    ]);
    for p in ps {
        for form in [CorollaryForm::MainText, CorollaryForm::Appendix] {
            let b = distortion_bounds(&DistortionInputs {
                s: s.clone(),
                d_plus: a.d_plus,
                p,
                num_co_profiles: a.co_profiles,
                t: a.t,
                form,
            })?;
            let mut row = vec![if form == CorollaryForm::MainText { "main_text" } else { "appendix" }.to_string()];
            row.extend(
                [p, b.kappa_plus, b.d_bar_plus, b.kappa_mult, b.reg_extra, b.d_bar_plus_regularized, b.wfp_eps, b.fp_remark_bound]
                    .iter()
                    .map(|&v| fmt_f64(v)),
            );
            table.push(row);
        }
    }
    Ok(Output::Table(table))
}

fn landscape_cmd(a: &LandscapeArgs, seed: u64) -> Result<Output> {
    let spec = load_game(&a.game.game)?;
    let rules = parse_rules(&a.rule)?;
    let game = preference_view(&spec, &rules);
    let metric = match a.metric {
        LandscapeKind::Classical => match &spec {
            GameSpec::Payoffs(g) => LandscapeMetric::Classical(g.clone()),
            GameSpec::Preferences(_) => {
                return Err(CogError::validation("classical landscapes need a game with payoffs"))
            }
        },
        LandscapeKind::Emd => LandscapeMetric::Emd {
            rules,
            params: reg_params(&a.reg, seed)?,
        },
    };
    let cells = landscape(&game, &metric, a.grid)?;
    let mut table = Table::new(["x1", "x2", "eps"]);
    for c in cells {
        table.push_numbers(&[c.x1, c.x2, c.eps]);
    }
    Ok(Output::Table(table))
}

fn rbr_sweep_cmd(a: &RbrSweepArgs, seed: u64) -> Result<Output> {
    let spec = load_game(&a.game.game)?;
    let rule: Rule = a.rule.parse()?;
    let game = preference_view(&spec, std::slice::from_ref(&rule));
    let counts = game.action_counts().to_vec();
    if a.player >= counts.len() {
        return Err(CogError::validation(format!("no player {}", a.player)));
    }
    let x = match &a.profile {
        Some(p) => load_profile(p)?,
        None => StrategyProfile::uniform(&counts),
    };
    x.check_dims(&counts)?;
    let ps = match &a.p_values {
        Some(s) => parse_list(s, "p")?,
        None => grid(21),
    };
    let mut base = RegularizationParams::new(0.0, a.q, a.samples, seed);
    if let Some(mu) = &a.mu {
        base = base.with_mu(parse_mu(mu)?);
    }
    let rows = rbr_sweep(&game, a.player, &x.others(a.player), &rule, &ps, &base)?;
    let mut header = vec!["p".to_string()];
    header.extend((0..counts[a.player]).map(|k| format!("a{k}")));
    let mut table = Table::new(header);
    for (p, s) in rows {
        let mut row = vec![p];
        row.extend(s.probs());
        table.push_numbers(&row);
    }
    Ok(Output::Table(table))
}

fn describe_action(record: &ElectionRecord, player: usize, action: usize) -> Result<(u8, String)> {
    let e = ElectionAction::from_index(player, action)?;
    let vote = e.vote.iter().map(|&k| record.names[k].as_str()).collect::<Vec<_>>().join(">");
    Ok((e.wtl, vote))
}

fn election_verify(csv: &Path, rule: &str, format: Format) -> Result<Output> {
    let rule: Rule = rule.parse()?;
    let records = load_elections_csv(csv)?;
    let mut table = Table::new([
        "election_id",
        "participant",
        "in_best_response",
        "epsilon",
        "witness_wtl",
        "witness_vote",
    ]);
    let mut docs = Vec::new();
    for r in &records {
        let report = verify_recorded_election(r, &rule)?;
        let mut players = Vec::new();
        for (i, p) in report.players.iter().enumerate() {
            let witness = match &p.witness {
                Some(Witness::Action(a)) => Some(describe_action(r, i, *a)?),
                _ => None,
            };
            table.push(vec![
                r.id.clone(),
                r.names[i].clone(),
                p.in_best_response.to_string(),
                fmt_f64(p.epsilon),
                witness.as_ref().map_or(String::new(), |w| w.0.to_string()),
                witness.as_ref().map_or(String::new(), |w| w.1.clone()),
            ]);
            players.push(json!({
                "participant": r.names[i],
                "in_best_response": p.in_best_response,
                "epsilon": p.epsilon,
                "witness": witness.map(|(wtl, vote)| json!({ "wtl": wtl, "vote": vote })),
            }));
        }
        docs.push(json!({
            "election_id": r.id,
            "rule": rule.to_string(),
            "all_pass": report.all_pass(),
            "players": players,
        }));
    }
    Ok(match format {
        Format::Csv => Output::Table(table),
        Format::Json => Output::Json(Value::Array(docs)),
    })
}

fn election_solve(a: &ElectionSolveArgs, seed: u64, format: Format) -> Result<Output> {
    let records = load_elections_csv(&a.csv)?;
    let record = match &a.election {
        Some(id) => records
            .iter()
            .find(|r| &r.id == id)
            .ok_or_else(|| CogError::validation(format!("no election {id:?} in {}", a.csv.display())))?,
        None => records
            .first()
            .ok_or_else(|| CogError::validation(format!("{} holds no elections", a.csv.display())))?,
    };
    let config = LleConfig {
        t0: a.t0,
        min_temperature: a.min_temperature,
        steps: a.steps,
        damping: a.damping,
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let sol = solve_election(record, &config, a.simulations, seed)?;
    let mut winners = Table::new(["election_id", "participant", "frequency"]);
    for (i, &f) in sol.winner_frequencies.iter().enumerate() {
        winners.push(vec![record.id.clone(), record.names[i].clone(), fmt_f64(f)]);
    }
    let mut profile = Table::new(["election_id", "participant", "action", "wtl", "vote", "probability"]);
    for i in 0..PARTICIPANTS {
        for (k, &p) in sol.profile.player(i).probs().iter().enumerate().take(NUM_ACTIONS) {
            let (wtl, vote) = describe_action(record, i, k)?;
            profile.push(vec![
                record.id.clone(),
                record.names[i].clone(),
                k.to_string(),
                wtl.to_string(),
                vote,
                fmt_f64(p),
            ]);
        }
    }
    if format == Format::Json {
        return Ok(Output::Json(json!({
            "election_id": record.id,
            "profile": profile.to_json(),
            "winner_frequencies": winners.to_json(),
            "num_simulations": sol.num_simulations,
        })));
    }
    match &a.winners {
        Some(p) => std::fs::write(p, winners.to_csv_string())?,
        None => eprint!("{}", winners.to_csv_string()),
    }
    Ok(Output::Table(profile))
}

fn analyze(a: &AnalyzeArgs, format: Format) -> Result<Output> {
    let spec = load_game(&a.game.game)?;
    let mode = if a.strict { ArcMode::StrictOnly } else { ArcMode::WithTies };
    let kind = a.graph.unwrap_or(match spec {
        GameSpec::Payoffs(_) => GraphKind::Payoff,
        GameSpec::Preferences(_) => GraphKind::Preference,
    });
    let graph = match (kind, &spec) {
        (GraphKind::Payoff, GameSpec::Payoffs(g)) => response_graph(g, mode),
        (GraphKind::Payoff, GameSpec::Preferences(_)) => {
            return Err(CogError::validation("payoff graphs need a game with payoffs"))
        }
        (GraphKind::Preference, _) => preference_graph(&spec.to_cog(), mode),
    };
    let sinks = sink_components(&graph);
    let label = |node: usize| {
        graph
            .profile(node)
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("-")
    };
    let mut edges = Table::new(["from", "to", "player", "weight", "from_profile", "to_profile"]);
    for arc in &graph.arcs {
        edges.push(vec![
            arc.from.to_string(),
            arc.to.to_string(),
            arc.player.to_string(),
            arc.weight.map_or(String::new(), fmt_f64),
            label(arc.from),
            label(arc.to),
        ]);
    }
    let harmonic = match &spec {
        GameSpec::Payoffs(g) => serde_json::to_value(harmonic_check(g))?,
        GameSpec::Preferences(_) => Value::Null,
    };
    let report = json!({
        "graph": match kind { GraphKind::Payoff => "payoff", GraphKind::Preference => "preference" },
        "mode": mode,
        "num_nodes": graph.num_nodes(),
        "num_arcs": graph.arcs.len(),
        "harmonic": harmonic,
        "components": sinks.components,
        "num_sinks": sinks.sinks().count(),
    });
    match format {
        Format::Json => Ok(Output::Json(json!({ "edges": edges.to_json(), "report": report }))),
        Format::Csv => {
            if let Some(p) = &a.report {
                std::fs::write(p, json_bytes(&report))?;
            }
            Ok(Output::Table(edges))
        }
    }
}

fn ingest(a: &IngestArgs) -> Result<Output> {
    let ballots = match a.task_ballots {
        TaskBallotArg::Ranking => TaskBallots::Ranking,
        TaskBallotArg::Grades => TaskBallots::Grades,
    };
    let perf = ingest_performance_csv(&a.csv, a.grades, ballots)?;
    let mut doc = cog_to_json(&perf.game);
    doc["agents"] = json!(perf.agents);
    doc["tasks"] = json!(perf.tasks);
    Ok(Output::Json(doc))
}
