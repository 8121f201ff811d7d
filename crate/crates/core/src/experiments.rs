//! Performance-matrix ingestion, exploitability landscapes and
//! regularization sweeps.

use std::path::Path;

use rayon::prelude::*;

use crate::br::{regularized_best_response, RegularizationParams};
use crate::error::{CogError, Result};
use crate::game::{CardinalGame, ContextOrdinalGame, PreferenceGame};
use crate::metrics::{classical_exploitability, emd_exploitability};
use crate::population::Ballot;
use crate::preference::PreferenceRelation;
use crate::rules::{grade_by_quantiles, Rule};
use crate::strategy::{MixedStrategy, StrategyProfile};

/// How the task player expresses its (adversarial) preferences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskBallots {
    /// Tasks ranked by ascending agent score.
    Ranking,
    /// Tasks graded by quantiles of the negated agent scores.
    Grades,
}

/// An agents-by-tasks score matrix read as a two-player game: player 0 picks
/// an agent, player 1 picks a task.
#[derive(Debug, Clone)]
pub struct PerformanceGame {
    pub agents: Vec<String>,
    pub tasks: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub game: ContextOrdinalGame,
}

/// The agent player grades agents per task by score quantiles; the task
/// player prefers tasks on which the chosen agent scores lower.
pub fn performance_game(
    scores: Vec<Vec<f64>>,
    num_grades: usize,
    task_ballots: TaskBallots,
) -> Result<ContextOrdinalGame> {
    let n_agents = scores.len();
    if n_agents == 0 {
        return Err(CogError::validation("performance matrix has no rows"));
    }
    let n_tasks = scores[0].len();
    if n_tasks == 0 || scores.iter().any(|r| r.len() != n_tasks) {
        return Err(CogError::validation("performance matrix rows must have equal, non-zero length"));
    }
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CogError::validation("performance matrix has non-finite entries"));
    }
    let mut agent_votes = Vec::with_capacity(n_tasks);
    for t in 0..n_tasks {
        let column: Vec<f64> = scores.iter().map(|r| r[t]).collect();
        let grades = grade_by_quantiles(&column, num_grades)?;
        agent_votes.push(vec![(
            1.0,
            Ballot::Grades {
                grades,
                levels: num_grades,
            },
        )]);
    }
    let mut task_votes = Vec::with_capacity(n_agents);
    for row in &scores {
        let ballot = match task_ballots {
            TaskBallots::Ranking => Ballot::Ranking(PreferenceRelation::from_values_ascending(row)),
            TaskBallots::Grades => {
                let neg: Vec<f64> = row.iter().map(|v| -v).collect();
                Ballot::Grades {
                    grades: grade_by_quantiles(&neg, num_grades)?,
                    levels: num_grades,
                }
            }
        };
        task_votes.push(vec![(1.0, ballot)]);
    }
    ContextOrdinalGame::new(vec![n_agents, n_tasks], vec![agent_votes, task_votes])
}

/// Reads a numeric CSV. A first row with a non-numeric cell past the first
/// column is a header of task names; a non-numeric first column holds agent
/// names.
pub fn read_performance_csv(text: &str, source: &str) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((k + 1, rec.iter().map(String::from).collect()));
    }
    if records.is_empty() {
        return Err(CogError::Parse {
            path: source.into(),
            line: 1,
            message: "empty performance matrix".into(),
        });
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok();
    let has_header = records[0].1.iter().skip(1).any(|c| !numeric(c))
        || (records[0].1.len() == 1 && !numeric(&records[0].1[0]) && records.len() > 1 && records[1].1.len() == 1);
    let body = if has_header { &records[1..] } else { &records[..] };
    let labelled = body.iter().any(|(_, r)| !r.is_empty() && !numeric(&r[0]));
    let skip = usize::from(labelled);
    let mut agents = Vec::new();
    let mut scores = Vec::new();
    let width = body.first().map_or(0, |(_, r)| r.len());
    for (line, r) in body {
        if r.len() != width {
            return Err(CogError::Parse {
                path: source.into(),
                line: *line,
                message: format!("row has {} cells, expected {width}", r.len()),
            });
        }
        agents.push(if labelled { r[0].clone() } else { format!("agent{}", agents.len()) });
        let row = r[skip..]
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| CogError::Parse {
                    path: source.into(),
                    line: *line,
                    message: format!("non-numeric cell {c:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        scores.push(row);
    }
    let n_tasks = width - skip;
    let tasks = if has_header {
        records[0].1.iter().skip(records[0].1.len() - n_tasks).cloned().collect()
    } else {
        (0..n_tasks).map(|t| format!("task{t}")).collect()
    };
    Ok((agents, tasks, scores))
}

pub fn ingest_performance_csv(
    path: impl AsRef<Path>,
    num_grades: usize,
    task_ballots: TaskBallots,
) -> Result<PerformanceGame> {
    let path = path.as_ref();
    let text = crate::io::read_text(path)?;
    let (agents, tasks, scores) = read_performance_csv(&text, &path.display().to_string())?;
    let game = performance_game(scores.clone(), num_grades, task_ballots)?;
    Ok(PerformanceGame {
        agents,
        tasks,
        scores,
        game,
    })
}

/// Which exploitability a landscape cell reports.
#[derive(Clone, Debug)]
pub enum LandscapeMetric {
    Classical(CardinalGame),
    Emd { rules: Vec<Rule>, params: RegularizationParams },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeCell {
    /// Probability of each player's first action.
    pub x1: f64,
    pub x2: f64,
    pub eps: f64,
}

/// Grid coordinates: `k / (n - 1)`, or the single point 1/2.
pub fn grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Max-over-players exploitability on a `grid_n x grid_n` grid of 2x2
/// profiles, row-major in `x1`.
pub fn landscape<G: PreferenceGame + ?Sized>(
    game: &G,
    metric: &LandscapeMetric,
    grid_n: usize,
) -> Result<Vec<LandscapeCell>> {
    if game.action_counts() != [2, 2] {
        return Err(CogError::validation("landscapes need a 2x2 game"));
    }
    if let LandscapeMetric::Classical(nfg) = metric {
        if nfg.action_counts() != [2, 2] {
            return Err(CogError::validation("landscapes need a 2x2 game"));
        }
    }
    let g = grid(grid_n);
    let points: Vec<(f64, f64)> = g.iter().flat_map(|&a| g.iter().map(move |&b| (a, b))).collect();
    points
        .par_iter()
        .map(|&(x1, x2)| {
            let x = StrategyProfile::from_vecs(vec![vec![x1, 1.0 - x1], vec![x2, 1.0 - x2]])?;
            let eps = match metric {
                LandscapeMetric::Classical(nfg) => classical_exploitability(nfg, &x)?.max,
                LandscapeMetric::Emd { rules, params } => emd_exploitability(game, rules, &x, params)?.max,
            };
            Ok(LandscapeCell { x1, x2, eps })
        })
        .collect()
}

/// Regularized best response of `player` for each `p`.
pub fn rbr_sweep<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
    rule: &Rule,
    p_values: &[f64],
    base: &RegularizationParams,
) -> Result<Vec<(f64, MixedStrategy)>> {
    p_values
        .iter()
        .map(|&p| {
            let params = RegularizationParams { p, ..base.clone() };
            Ok((p, regularized_best_response(game, player, others, rule, &params)?))
        })
        .collect()
}
