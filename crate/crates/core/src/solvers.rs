//! Equilibrium learning: regularized FTRL, fictitious play, and the logit
//! homotopy on normal-form games.

use crate::br::{regularized_best_response, RegularizationParams};
use crate::error::{CogError, Result};
use crate::game::{NormalFormGame, PreferenceGame};
use crate::rules::Rule;
use crate::strategy::{MixedStrategy, StrategyProfile};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    LastIterate,
    Uniform,
}

/// Replacement probability per round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `p_t = 1 / (t + 1)`.
    OneOverT,
    Constant(f64),
}

impl Schedule {
    pub fn p(&self, t: usize) -> f64 {
        match self {
            Schedule::OneOverT => 1.0 / (t as f64 + 1.0),
            Schedule::Constant(p) => *p,
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = CogError;
    fn from_str(s: &str) -> Result<Self> {
        if s == "one_over_t" {
            return Ok(Schedule::OneOverT);
        }
        match s.strip_prefix("constant:").map(str::parse::<f64>) {
            Some(Ok(p)) if (0.0..=1.0).contains(&p) => Ok(Schedule::Constant(p)),
            _ => Err(CogError::validation(format!("unknown schedule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// One rule per player.
    pub rules: Vec<Rule>,
    pub iters: usize,
    pub q: f64,
    /// Initial strategy and usurper distribution per player; `None` is uniform.
    pub mu: Vec<Option<MixedStrategy>>,
    pub num_samples: usize,
    pub seed: u64,
    pub averaging: Averaging,
    pub schedule: Schedule,
}

impl SolverConfig {
    pub fn new(rules: Vec<Rule>, iters: usize) -> Self {
        let n = rules.len();
        Self {
            rules,
            iters,
            q: 0.1,
            mu: vec![None; n],
            num_samples: 100,
            seed: 0,
            averaging: Averaging::Uniform,
            schedule: Schedule::OneOverT,
        }
    }

    /// The same rule for every player.
    pub fn homogeneous(rule: Rule, num_players: usize, iters: usize) -> Self {
        Self::new(vec![rule; num_players], iters)
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_samples(mut self, m: usize) -> Self {
        self.num_samples = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    fn validate(&self, action_counts: &[usize]) -> Result<()> {
        if self.iters == 0 {
            return Err(CogError::validation("need at least one round"));
        }
        if self.rules.len() != action_counts.len() || self.mu.len() != action_counts.len() {
            return Err(CogError::validation(format!(
                "config lists {} rules and {} mu entries for {} players",
                self.rules.len(),
                self.mu.len(),
                action_counts.len()
            )));
        }
        for (mu, &m) in self.mu.iter().zip(action_counts) {
            if let Some(mu) = mu {
                if mu.len() != m {
                    return Err(CogError::validation("mu dimension mismatch"));
                }
            }
        }
        Ok(())
    }

    fn initial(&self, action_counts: &[usize]) -> StrategyProfile {
        StrategyProfile::new(
            self.mu
                .iter()
                .zip(action_counts)
                .map(|(mu, &m)| mu.clone().unwrap_or_else(|| MixedStrategy::uniform(m)))
                .collect(),
        )
    }
}

/// Per-round play of a learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sampled best responses played in rounds `1..=T`.
    pub best_responses: Vec<StrategyProfile>,
    /// Uniform average of `best_responses[..=t]`.
    pub profiles: Vec<StrategyProfile>,
}

impl Trajectory {
    pub fn rounds(&self) -> usize {
        self.best_responses.len()
    }

    pub fn average(&self) -> &StrategyProfile {
        self.profiles.last().expect("trajectory has at least one round")
    }

    pub fn last_iterate(&self) -> &StrategyProfile {
        self.best_responses.last().expect("trajectory has at least one round")
    }

    pub fn output(&self, mode: Averaging) -> &StrategyProfile {
        match mode {
            Averaging::Uniform => self.average(),
            Averaging::LastIterate => self.last_iterate(),
        }
    }

    /// Strategies of `player` in every round.
    pub fn player_iterates(&self, player: usize) -> Vec<MixedStrategy> {
        self.best_responses
            .iter()
            .map(|p| p.player(player).clone())
            .collect()
    }
}

/// All players share one random stream per round, so symmetric games keep
/// symmetric trajectories.
fn round_seed(seed: u64, t: usize) -> u64 {
    seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct RunningAverage {
    sums: Vec<Vec<f64>>,
    count: usize,
}

impl RunningAverage {
    fn new(action_counts: &[usize]) -> Self {
        Self {
            sums: action_counts.iter().map(|&m| vec![0.0; m]).collect(),
            count: 0,
        }
    }

    fn push(&mut self, x: &StrategyProfile) {
        for (s, x) in self.sums.iter_mut().zip(x.strategies()) {
            for (a, v) in s.iter_mut().zip(x.probs()) {
                *a += v;
            }
        }
        self.count += 1;
    }

    fn get(&self) -> StrategyProfile {
        let n = self.count as f64;
        StrategyProfile::new(
            self.sums
                .iter()
                .map(|s| {
                    MixedStrategy::normalized(s.iter().map(|v| v / n).collect())
                        .expect("average of simplex points")
                })
                .collect(),
        )
    }
}

fn learn<G: PreferenceGame + ?Sized>(
    game: &G,
    config: &SolverConfig,
    regularize: bool,
) -> Result<Trajectory> {
    let counts = game.action_counts().to_vec();
    config.validate(&counts)?;
    let n = counts.len();
    let x0 = config.initial(&counts);
    // Opponent state averages x_0, ..., x_{t-1}; the output averages x_1, ..., x_t.
    let mut state = RunningAverage::new(&counts);
    state.push(&x0);
    let mut output = RunningAverage::new(&counts);
    let mut traj = Trajectory {
        best_responses: Vec::with_capacity(config.iters),
        profiles: Vec::with_capacity(config.iters),
    };
    for t in 1..=config.iters {
        let avg = state.get();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let params = if regularize {
                RegularizationParams {
                    p: config.schedule.p(t),
                    q: config.q,
                    mu: Some(x0.player(i).clone()),
                    num_samples: config.num_samples,
                    seed: round_seed(config.seed, t),
                }
            } else {
                RegularizationParams::none()
            };
            next.push(regularized_best_response(
                game,
                i,
                &avg.others(i),
                &config.rules[i],
                &params,
            )?);
        }
        let x = StrategyProfile::new(next);
        state.push(&x);
        output.push(&x);
        traj.profiles.push(output.get());
        traj.best_responses.push(x);
    }
    Ok(traj)
}

/// Each round every player plays the regularized best response, with
/// `p_t` from the schedule, to the running average of co-player play
/// (starting from `mu`).
pub fn ftrl_solve<G: PreferenceGame + ?Sized>(game: &G, config: &SolverConfig) -> Result<Trajectory> {
    learn(game, config, true)
}

/// As [`ftrl_solve`] with the unregularized canonical best response.
pub fn fictitious_play<G: PreferenceGame + ?Sized>(
    game: &G,
    config: &SolverConfig,
) -> Result<Trajectory> {
    learn(game, config, false)
}

/// Summed per-player L1 distance between consecutive averaged profiles.
pub fn iterate_diffs(traj: &Trajectory) -> Vec<f64> {
    traj.profiles
        .windows(2)
        .map(|w| w[1].l1_distance(&w[0]))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LleConfig {
    pub t0: f64,
    pub min_temperature: f64,
    pub steps: usize,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LleConfig {
    fn default() -> Self {
        Self {
            t0: 10.0,
            min_temperature: 0.1,
            steps: 50,
            damping: 0.5,
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

impl LleConfig {
    pub fn temperatures(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min_temperature];
        }
        let ratio = (self.min_temperature / self.t0).powf(1.0 / (self.steps - 1) as f64);
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.min_temperature
                } else {
                    self.t0 * ratio.powi(k as i32)
                }
            })
            .collect()
    }
}

pub(crate) fn softmax(u: &[f64], tau: f64) -> Vec<f64> {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = u.iter().map(|v| ((v - max) / tau).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Logit responses `softmax(u_i(., x_{-i}) / tau)` for every player.
fn logit_step<G: NormalFormGame + ?Sized>(game: &G, x: &StrategyProfile, tau: f64) -> Vec<Vec<f64>> {
    (0..game.action_counts().len())
        .map(|i| softmax(&game.expected_payoffs(i, x), tau))
        .collect()
}

/// Anneals the logit fixed point `x_i = softmax(u_i(., x_{-i}) / tau)` along
/// the geometric temperature schedule, warm-starting each temperature from the
/// previous one.
pub fn lle_solve<G: NormalFormGame + ?Sized>(game: &G, config: &LleConfig) -> Result<StrategyProfile> {
    lle_trace(game, config).map(|mut v| v.pop().expect("at least one temperature").1)
}

fn max_gap(x: &[Vec<f64>], target: &[Vec<f64>]) -> f64 {
    x.iter()
        .flatten()
        .zip(target.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Newton direction for `F(x) = x - softmax(U(x) / tau)`, or `None` when the
/// game has no sensitivities or the Jacobian is singular.
fn newton_direction<G: NormalFormGame + ?Sized>(
    game: &G,
    profile: &StrategyProfile,
    x: &[Vec<f64>],
    target: &[Vec<f64>],
    tau: f64,
) -> Option<Vec<Vec<f64>>> {
    let counts = game.action_counts();
    let offsets: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &m| {
            let o = *acc;
            *acc += m;
            Some(o)
        })
        .collect();
    let n: usize = counts.iter().sum();
    let mut jac = DMatrix::<f64>::identity(n, n);
    for (i, s) in target.iter().enumerate() {
        for j in (0..counts.len()).filter(|&j| j != i) {
            let sens = game.payoff_sensitivities(i, j, profile)?;
            let mj = counts[j];
            // (diag s - s s^T) / tau applied to the sensitivity block.
            for b in 0..mj {
                let mean: f64 = s.iter().enumerate().map(|(a, &p)| p * sens[a * mj + b]).sum();
                for (a, &p) in s.iter().enumerate() {
                    jac[(offsets[i] + a, offsets[j] + b)] -= p * (sens[a * mj + b] - mean) / tau;
                }
            }
        }
    }
    let rhs = DVector::from_iterator(n, x.iter().flatten().zip(target.iter().flatten()).map(|(a, b)| b - a));
    let d = jac.lu().solve(&rhs)?;
    if !d.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(counts.iter().zip(&offsets).map(|(&m, &o)| d.as_slice()[o..o + m].to_vec()).collect())
}

/// The fixed point reached at every temperature of the schedule. Each
/// iteration first tries a Newton step with backtracking on the residual and
/// falls back to a damped step `x <- (1 - d) x + d softmax(...)`; the damping
/// halves when the residual grows and recovers towards the configured value
/// after progress.
pub fn lle_trace<G: NormalFormGame + ?Sized>(
    game: &G,
    config: &LleConfig,
) -> Result<Vec<(f64, StrategyProfile)>> {
    if !(config.t0 > 0.0 && config.min_temperature > 0.0) {
        return Err(CogError::validation("temperatures must be positive"));
    }
    if !(config.damping > 0.0 && config.damping <= 1.0) {
        return Err(CogError::validation("damping must lie in (0, 1]"));
    }
    let counts = game.action_counts().to_vec();
    if counts.len() < 2 {
        return Err(CogError::validation("logit homotopy needs at least two players"));
    }
    let mut x: Vec<Vec<f64>> = counts.iter().map(|&m| vec![1.0 / m as f64; m]).collect();
    let mut out = Vec::new();
    for tau in config.temperatures() {
        let mut damping = config.damping;
        let mut last = f64::INFINITY;
        let mut profile = to_profile(&x);
        let mut target = logit_step(game, &profile, tau);
        let mut residual = max_gap(&x, &target);
        for _ in 0..config.max_iter {
            if residual <= config.tol {
                break;
            }
            if let Some(d) = newton_direction(game, &profile, &x, &target, tau) {
                let mut t = 1.0;
                let mut accepted = false;
                while t >= 1.0 / 64.0 {
                    let trial: Vec<Vec<f64>> = x
                        .iter()
                        .zip(&d)
                        .map(|(xi, di)| xi.iter().zip(di).map(|(a, b)| a + t * b).collect())
                        .collect();
                    if trial.iter().flatten().all(|&v| v > 0.0) {
                        let trial: Vec<Vec<f64>> = trial
                            .into_iter()
                            .map(|v| {
                                let s: f64 = v.iter().sum();
                                v.into_iter().map(|a| a / s).collect()
                            })
                            .collect();
                        let p = to_profile(&trial);
                        let tg = logit_step(game, &p, tau);
                        let r = max_gap(&trial, &tg);
                        if r < (1.0 - 1e-4 * t) * residual {
                            (x, profile, target, residual) = (trial, p, tg, r);
                            accepted = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if accepted {
                    last = residual;
                    continue;
                }
            }
            if residual > last {
                damping = (damping * 0.5).max(1e-4);
            } else {
                damping = (damping * 1.25).min(config.damping);
            }
            last = residual;
            for (xi, ti) in x.iter_mut().zip(&target) {
                for (a, b) in xi.iter_mut().zip(ti) {
                    *a = (1.0 - damping) * *a + damping * b;
                }
                let s: f64 = xi.iter().sum();
                xi.iter_mut().for_each(|v| *v /= s);
            }
            profile = to_profile(&x);
            target = logit_step(game, &profile, tau);
            residual = max_gap(&x, &target);
        }
        if residual > config.tol {
            return Err(CogError::NonConvergence {
                what: format!("logit fixed point at temperature {tau}"),
                residual,
            });
        }
        out.push((tau, profile));
    }
    Ok(out)
}

fn to_profile(x: &[Vec<f64>]) -> StrategyProfile {
    StrategyProfile::new(
        x.iter()
            .map(|v| MixedStrategy::normalized(v.clone()).expect("softmax output"))
            .collect(),
    )
}
