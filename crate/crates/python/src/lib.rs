//! Python bindings: `import cogpy`.
//!
//! Profiles are lists of per-player probability lists; rules are the string
//! ids accepted by the CLI (`borda`, `maximal_lottery`, `sgf:4`, ...).

use cog_core::br::{best_response, regularized_best_response, RegularizationParams};
use cog_core::election::{load_elections_csv, solve_election, verify_recorded_election};
use cog_core::io::{cog_to_json, parse_game, GameSpec};
use cog_core::metrics::{
    classical_exploitability, distortion_bounds, emd_exploitability, hindsight_winrate, margin_of_victory,
    shapley_breakdown, verify_ne, CorollaryForm, DistortionInputs,
};
use cog_core::rules::Rule;
use cog_core::solvers::{fictitious_play, ftrl_solve, iterate_diffs, LleConfig, Schedule, SolverConfig, Trajectory};
use cog_core::structure::{harmonic_check, preference_graph, response_graph, sink_components, ArcMode};
use cog_core::{
    Ballot, CardinalGame, CogError, ContextOrdinalGame, MixedStrategy, PreferenceGame, PreferenceRelation,
    StrategyProfile, VotePopulation,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

create_exception!(cogpy, NonConvergenceError, PyRuntimeError);

fn py_err(e: CogError) -> PyErr {
    match e {
        CogError::NonConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for cog_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let out = PyList::empty(py);
            for item in items {
                out.append(to_py(py, item)?)?;
            }
            out.into_any()
        }
        Value::Object(map) => {
            let out = PyDict::new(py);
            for (k, item) in map {
                out.set_item(k, to_py(py, item)?)?;
            }
            out.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn rule(id: &str) -> PyResult<Rule> {
    id.parse().py()
}

fn rules(ids: Vec<String>) -> PyResult<Vec<Rule>> {
    ids.iter().map(|s| rule(s)).collect()
}

fn profile(x: Vec<Vec<f64>>) -> PyResult<StrategyProfile> {
    StrategyProfile::from_vecs(x).py()
}

fn strategies(x: Vec<Vec<f64>>) -> PyResult<Vec<MixedStrategy>> {
    x.into_iter().map(|s| MixedStrategy::new(s).py()).collect()
}

fn to_lists(x: &StrategyProfile) -> Vec<Vec<f64>> {
    x.strategies().iter().map(|s| s.probs().to_vec()).collect()
}

fn reg(p: f64, q: f64, samples: usize, seed: u64, mu: Option<Vec<f64>>) -> PyResult<RegularizationParams> {
    let mut params = RegularizationParams::new(p, q, samples, seed);
    if let Some(mu) = mu {
        params = params.with_mu(MixedStrategy::normalized(mu).py()?);
    }
    Ok(params)
}

/// A context-ordinal game, optionally carrying the cardinal payoffs it was
/// built from.
#[pyclass(module = "cogpy", frozen)]
pub struct Game {
    cog: ContextOrdinalGame,
    payoffs: Option<CardinalGame>,
}

impl Game {
    fn from_spec(spec: GameSpec) -> Self {
        let cog = spec.to_cog();
        let payoffs = match spec {
            GameSpec::Payoffs(g) => Some(g),
            GameSpec::Preferences(_) => None,
        };
        Self { cog, payoffs }
    }

    fn nfg(&self) -> PyResult<&CardinalGame> {
        self.payoffs
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("this game has no cardinal payoffs"))
    }
}

#[pymethods]
impl Game {
    /// Parses the JSON game format (`preferences` or `payoffs`).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self::from_spec(parse_game(text).py()?))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self::from_spec(cog_core::io::load_game(path).py()?))
    }

    /// Two-player game from row and column payoff matrices.
    #[staticmethod]
    fn bimatrix(row: Vec<Vec<f64>>, col: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self::from_spec(GameSpec::Payoffs(CardinalGame::bimatrix(row, col).py()?)))
    }

    #[getter]
    fn action_counts(&self) -> Vec<usize> {
        self.cog.action_counts().to_vec()
    }

    #[getter]
    fn num_players(&self) -> usize {
        self.cog.num_players()
    }

    fn to_json(&self) -> String {
        cog_to_json(&self.cog).to_string()
    }

    /// Canonical social-choice best response of `player` to the co-player
    /// strategies `others`.
    fn best_response(&self, player: usize, others: Vec<Vec<f64>>, rule_id: &str) -> PyResult<Vec<f64>> {
        let br = best_response(&self.cog, player, &strategies(others)?, &rule(rule_id)?).py()?;
        Ok(br.canonical().into_vec())
    }

    #[pyo3(signature = (player, others, rule_id, p=0.0, q=0.1, samples=100, seed=0, mu=None))]
    #[allow(clippy::too_many_arguments)]
    fn regularized_best_response(
        &self,
        player: usize,
        others: Vec<Vec<f64>>,
        rule_id: &str,
        p: f64,
        q: f64,
        samples: usize,
        seed: u64,
        mu: Option<Vec<f64>>,
    ) -> PyResult<Vec<f64>> {
        let params = reg(p, q, samples, seed, mu)?;
        let r = regularized_best_response(&self.cog, player, &strategies(others)?, &rule(rule_id)?, &params).py()?;
        Ok(r.into_vec())
    }

    /// Per-player verdicts: `in_best_response`, `epsilon`, `witness`.
    #[pyo3(signature = (x, rule_ids, tol=1e-9))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        x: Vec<Vec<f64>>,
        rule_ids: Vec<String>,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let report = verify_ne(&self.cog, &rules(rule_ids)?, &profile(x)?, tol).py()?;
        serialize(py, &report.players)
    }

    #[pyo3(signature = (x, rule_ids, p=0.0, q=0.0, samples=1, seed=0))]
    fn emd_exploitability(
        &self,
        x: Vec<Vec<f64>>,
        rule_ids: Vec<String>,
        p: f64,
        q: f64,
        samples: usize,
        seed: u64,
    ) -> PyResult<Vec<f64>> {
        let params = reg(p, q, samples, seed, None)?;
        Ok(emd_exploitability(&self.cog, &rules(rule_ids)?, &profile(x)?, &params).py()?.per_player)
    }

    fn classical_exploitability(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(classical_exploitability(self.nfg()?, &profile(x)?).py()?.per_player)
    }

    fn margin_of_victory(&self, rule_id: &str, player: usize, x: Vec<Vec<f64>>) -> PyResult<f64> {
        margin_of_victory(&self.cog, &rule(rule_id)?, player, &profile(x)?).py()
    }

    fn shapley(&self, rule_id: &str, x: Vec<Vec<f64>>, i: usize, j: usize) -> PyResult<Vec<Vec<f64>>> {
        shapley_breakdown(&self.cog, &rule(rule_id)?, &profile(x)?, i, j).py()
    }

    /// Regularized FTRL; `fp=True` runs unregularized fictitious play.
    #[pyo3(signature = (rule_ids, iters, q=0.1, samples=100, seed=0, schedule="one_over_t", fp=false))]
    #[allow(clippy::too_many_arguments)]
    fn ftrl(
        &self,
        rule_ids: Vec<String>,
        iters: usize,
        q: f64,
        samples: usize,
        seed: u64,
        schedule: &str,
        fp: bool,
    ) -> PyResult<Run> {
        let mut rs = rules(rule_ids)?;
        if rs.len() == 1 {
            rs = vec![rs[0].clone(); self.cog.num_players()];
        }
        let config = SolverConfig::new(rs, iters)
            .with_q(q)
            .with_samples(samples)
            .with_seed(seed)
            .with_schedule(schedule.parse::<Schedule>().py()?);
        let traj = if fp { fictitious_play(&self.cog, &config) } else { ftrl_solve(&self.cog, &config) }.py()?;
        Ok(Run { traj })
    }

    /// Response graph summary: arcs, harmonic report (cardinal games only)
    /// and strongly connected components with sink flags.
    #[pyo3(signature = (strict=false))]
    fn analyze<'py>(&self, py: Python<'py>, strict: bool) -> PyResult<Bound<'py, PyAny>> {
        let mode = if strict { ArcMode::StrictOnly } else { ArcMode::WithTies };
        let graph = match &self.payoffs {
            Some(g) => response_graph(g, mode),
            None => preference_graph(&self.cog, mode),
        };
        let sinks = sink_components(&graph);
        let out = PyDict::new(py);
        out.set_item("arcs", serialize(py, &graph.arcs)?)?;
        out.set_item("components", serialize(py, &sinks.components)?)?;
        if let Some(g) = &self.payoffs {
            out.set_item("harmonic", serialize(py, &harmonic_check(g))?)?;
        }
        Ok(out.into_any())
    }
}

/// A learning trajectory.
#[pyclass(module = "cogpy", frozen)]
pub struct Run {
    traj: Trajectory,
}

#[pymethods]
impl Run {
    fn __len__(&self) -> usize {
        self.traj.rounds()
    }

    /// Uniform average of all rounds.
    fn average(&self) -> Vec<Vec<f64>> {
        to_lists(self.traj.average())
    }

    fn last_iterate(&self) -> Vec<Vec<f64>> {
        to_lists(self.traj.last_iterate())
    }

    /// Running averages, one profile per round.
    fn profiles(&self) -> Vec<Vec<Vec<f64>>> {
        self.traj.profiles.iter().map(to_lists).collect()
    }

    fn iterate_diffs(&self) -> Vec<f64> {
        iterate_diffs(&self.traj)
    }

    #[pyo3(signature = (game, player, rule_id, p=0.0, q=0.1, samples=100, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn hindsight_winrate(
        &self,
        game: &Game,
        player: usize,
        rule_id: &str,
        p: f64,
        q: f64,
        samples: usize,
        seed: u64,
    ) -> PyResult<Vec<f64>> {
        let params = reg(p, q, samples, seed, None)?;
        hindsight_winrate(&self.traj, &game.cog, player, &rule(rule_id)?, &params).py()
    }
}

/// Canonical outcome of `rule_id` on weighted rankings; each ballot is
/// `(weight, order)` with the most preferred candidate first.
#[pyfunction]
fn social_choice(candidates: usize, ballots: Vec<(f64, Vec<usize>)>, rule_id: &str) -> PyResult<Vec<f64>> {
    let entries = ballots
        .into_iter()
        .map(|(w, order)| Ok((w, Ballot::Ranking(PreferenceRelation::from_order(&order).py()?))))
        .collect::<PyResult<Vec<_>>>()?;
    let pop = VotePopulation::new(candidates, entries).py()?;
    Ok(rule(rule_id)?.apply(&pop).py()?.canonical().into_vec())
}

/// Both restatements of the fictitious-play distortion bound.
#[pyfunction]
#[pyo3(signature = (s, d_plus, p, num_co_profiles, t, appendix=false))]
fn bounds<'py>(
    py: Python<'py>,
    s: Vec<f64>,
    d_plus: f64,
    p: f64,
    num_co_profiles: usize,
    t: usize,
    appendix: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let form = if appendix { CorollaryForm::Appendix } else { CorollaryForm::MainText };
    let b = distortion_bounds(&DistortionInputs { s, d_plus, p, num_co_profiles, t, form }).py()?;
    serialize(py, &b)
}

/// Verdicts on each recorded election in a CSV file.
#[pyfunction]
#[pyo3(signature = (path, rule_id="maximal_lottery"))]
fn election_verify<'py>(py: Python<'py>, path: &str, rule_id: &str) -> PyResult<Bound<'py, PyAny>> {
    let rule = rule(rule_id)?;
    let out = PyList::empty(py);
    for r in load_elections_csv(path).py()? {
        let report = verify_recorded_election(&r, &rule).py()?;
        let d = PyDict::new(py);
        d.set_item("election_id", &r.id)?;
        d.set_item("names", &r.names)?;
        d.set_item("all_pass", report.all_pass())?;
        d.set_item("players", serialize(py, &report.players)?)?;
        out.append(d)?;
    }
    Ok(out.into_any())
}

/// Logit equilibrium of one election's Borda game and simulated winner
/// frequencies. Releases the interpreter while solving.
#[pyfunction]
#[pyo3(signature = (path, t0=10.0, min_temperature=0.1, steps=50, simulations=10_000, seed=0))]
fn election_solve(
    py: Python<'_>,
    path: &str,
    t0: f64,
    min_temperature: f64,
    steps: usize,
    simulations: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let record = load_elections_csv(path)
        .py()?
        .into_iter()
        .next()
        .ok_or_else(|| PyValueError::new_err("no elections in file"))?;
    let config = LleConfig { t0, min_temperature, steps, ..LleConfig::default() };
    let sol = py.detach(|| solve_election(&record, &config, simulations, seed)).py()?;
    Ok((to_lists(&sol.profile), sol.winner_frequencies))
}

#[pymodule]
fn cogpy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(social_choice, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(election_verify, m)?)?;
    m.add_function(wrap_pyfunction!(election_solve, m)?)?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    Ok(())
}
