//! Social-choice best responses and their regularized Monte Carlo form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{CogError, Result};
use crate::game::{accumulate_margins, check_others, PreferenceGame};
use crate::population::{Ballot, BallotKind, VotePopulation};
use crate::preference::PreferenceRelation;
use crate::rules::{argmax_set, BestResponseSet, MarginMatrix, Rule};
use crate::strategy::{for_each_profile, product_weights, MixedStrategy};

/// Parameters of the regularized best response.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationParams {
    /// Probability each context's ballot is replaced by the usurper ballot.
    pub p: f64,
    /// Dirichlet smoothing scale; `0` skips the Dirichlet draw.
    pub q: f64,
    /// Usurper distribution; `None` is uniform.
    pub mu: Option<MixedStrategy>,
    pub num_samples: usize,
    pub seed: u64,
}

impl RegularizationParams {
    pub fn new(p: f64, q: f64, num_samples: usize, seed: u64) -> Self {
        Self {
            p,
            q,
            mu: None,
            num_samples,
            seed,
        }
    }

    /// `p = 0`, `q = 0`: the unregularized canonical best response.
    pub fn none() -> Self {
        Self::new(0.0, 0.0, 1, 0)
    }

    pub fn with_mu(mut self, mu: MixedStrategy) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(CogError::validation(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.q >= 0.0) || !self.q.is_finite() {
            return Err(CogError::validation(format!("q = {} must be >= 0", self.q)));
        }
        if self.num_samples == 0 {
            return Err(CogError::validation("need at least one sample"));
        }
        if let Some(mu) = &self.mu {
            if mu.len() != m {
                return Err(CogError::validation(format!(
                    "mu has {} entries, expected {m}",
                    mu.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.p == 0.0 && self.q == 0.0
    }

    pub fn mu_for(&self, m: usize) -> MixedStrategy {
        self.mu.clone().unwrap_or_else(|| MixedStrategy::uniform(m))
    }
}

/// Sufficient statistic of one context's vote for a given rule.
#[derive(Debug, Clone)]
pub(crate) enum Tally {
    /// Per-candidate score added linearly (positional or score voting).
    Linear(Vec<f64>),
    /// Row-major margin matrix.
    Margins(Vec<f64>),
    /// The raw ballot lottery.
    Ballots(Vec<(f64, Ballot)>),
}

/// A weighted list of context tallies for one player and rule.
#[derive(Debug, Clone)]
pub(crate) struct Electorate {
    pub m: usize,
    pub rule: Rule,
    pub contexts: Vec<(f64, Tally)>,
    pub kind: BallotKind,
    levels: usize,
}

impl Electorate {
    fn tally_of(rule: &Rule, m: usize, vote: &[(f64, Ballot)]) -> Tally {
        if let Some(scores) = rule.scoring_vector(m) {
            let mut v = vec![0.0; m];
            for (w, b) in vote {
                for (o, s) in v.iter_mut().zip(b.ranking().positional_scores(&scores)) {
                    *o += w * s;
                }
            }
            Tally::Linear(v)
        } else if *rule == Rule::Score {
            let mut v = vec![0.0; m];
            for (w, b) in vote {
                if let Ballot::Scores(s) = b {
                    for (o, x) in v.iter_mut().zip(s) {
                        *o += w * x;
                    }
                }
            }
            Tally::Linear(v)
        } else if rule.uses_margins() {
            let mut mm = vec![0.0; m * m];
            for (w, b) in vote {
                accumulate_margins(&mut mm, m, &b.ranking(), *w);
            }
            Tally::Margins(mm)
        } else {
            Tally::Ballots(vote.to_vec())
        }
    }

    /// Builds from a list of (weight, ballot lottery) contexts.
    pub fn from_votes(
        rule: &Rule,
        m: usize,
        contexts: impl IntoIterator<Item = (f64, Vec<(f64, Ballot)>)>,
    ) -> Result<Self> {
        let mut kind = None;
        let mut levels = 2;
        let mut out = Vec::new();
        for (w, vote) in contexts {
            for (_, b) in &vote {
                check_kind(rule, b.kind())?;
                kind.get_or_insert(b.kind());
                if let Ballot::Grades { levels: l, .. } = b {
                    levels = *l;
                }
            }
            out.push((w, Self::tally_of(rule, m, &vote)));
        }
        Ok(Self {
            m,
            rule: rule.clone(),
            contexts: out,
            kind: kind.unwrap_or(rule.ballot_kind()),
            levels,
        })
    }

    /// Contexts of `player` against `others`. Zero-weight contexts are kept
    /// when `all_contexts` is set.
    pub fn from_game<G: PreferenceGame + ?Sized>(
        game: &G,
        player: usize,
        others: &[MixedStrategy],
        rule: &Rule,
        all_contexts: bool,
    ) -> Result<Self> {
        check_others(game, player, others)?;
        let weights = product_weights(others);
        Self::from_context_weights(game, player, rule, &weights, all_contexts)
    }

    /// Contexts weighted by an explicit (possibly correlated) distribution
    /// over co-player profiles in row-major order.
    pub fn from_context_weights<G: PreferenceGame + ?Sized>(
        game: &G,
        player: usize,
        rule: &Rule,
        weights: &[f64],
        all_contexts: bool,
    ) -> Result<Self> {
        if player >= game.num_players() {
            return Err(CogError::validation(format!("no player {player}")));
        }
        let m = game.action_counts()[player];
        let kind = game.ballot_kind(player);
        check_kind(rule, kind)?;
        let counts = game.context_counts(player);
        if weights.len() != counts.iter().product::<usize>() {
            return Err(CogError::validation("context weights do not match co-player profiles"));
        }
        let mut contexts = Vec::new();
        let mut levels = 2;
        let mut c = 0;
        for_each_profile(&counts, |ctx| {
            let w = weights[c];
            c += 1;
            if w <= 0.0 && !all_contexts {
                return;
            }
            let tally = if let Some(scores) = rule.scoring_vector(m) {
                Tally::Linear(game.context_positional(player, ctx, &scores))
            } else if rule.uses_margins() {
                Tally::Margins(game.context_margins(player, ctx))
            } else {
                let vote = game.context_vote(player, ctx);
                if let Some((_, Ballot::Grades { levels: l, .. })) = vote.first() {
                    levels = *l;
                }
                Self::tally_of(rule, m, &vote)
            };
            contexts.push((w, tally));
        });
        Ok(Self {
            m,
            rule: rule.clone(),
            contexts,
            kind,
            levels,
        })
    }

    fn usurper(&self, top: usize) -> Tally {
        let ballot = match self.kind {
            BallotKind::Ranking => Ballot::Ranking(PreferenceRelation::usurper(self.m, top)),
            BallotKind::Scores => {
                let mut s = vec![0.0; self.m];
                s[top] = 1.0;
                Ballot::Scores(s)
            }
            BallotKind::Grades => {
                let mut g = vec![0; self.m];
                g[top] = self.levels - 1;
                Ballot::Grades {
                    grades: g,
                    levels: self.levels,
                }
            }
        };
        Self::tally_of(&self.rule, self.m, &[(1.0, ballot)])
    }

    /// Applies the rule to `sum_c weights[c] * tally(c)`; `replaced[c]`
    /// swaps in `usurper`.
    fn vote(
        &self,
        weights: &[f64],
        replaced: Option<(&[bool], &Tally)>,
    ) -> Result<BestResponseSet> {
        let m = self.m;
        let pick = |c: usize| -> &Tally {
            match replaced {
                Some((bits, u)) if bits[c] => u,
                _ => &self.contexts[c].1,
            }
        };
        let total: f64 = weights.iter().sum();
        match &self.contexts.first().map(|c| &c.1) {
            None => Err(CogError::validation("no contexts to vote in")),
            Some(Tally::Linear(_)) => {
                let mut acc = vec![0.0; m];
                for (c, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    if let Tally::Linear(v) = pick(c) {
                        for (a, x) in acc.iter_mut().zip(v) {
                            *a += w * x;
                        }
                    }
                }
                Ok(BestResponseSet::support_set(m, argmax_set(&acc)))
            }
            Some(Tally::Margins(_)) => {
                let mut acc = vec![0.0; m * m];
                for (c, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    if let Tally::Margins(v) = pick(c) {
                        for (a, x) in acc.iter_mut().zip(v) {
                            *a += w * x;
                        }
                    }
                }
                // Antisymmetrize to remove rounding drift.
                for a in 0..m {
                    acc[a * m + a] = 0.0;
                    for b in (a + 1)..m {
                        let v = 0.5 * (acc[a * m + b] - acc[b * m + a]) / total;
                        acc[a * m + b] = v;
                        acc[b * m + a] = -v;
                    }
                }
                self.rule
                    .apply_margins(&MarginMatrix::from_row_major(m, acc)?)
            }
            Some(Tally::Ballots(_)) => {
                let mut entries = Vec::new();
                for (c, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    if let Tally::Ballots(v) = pick(c) {
                        for (p, b) in v {
                            entries.push((w * p / total, b.clone()));
                        }
                    }
                }
                let pop = VotePopulation::new_unchecked(m, entries).merged();
                self.rule.apply(&pop)
            }
        }
    }

    pub fn best_response(&self) -> Result<BestResponseSet> {
        let w: Vec<f64> = self.contexts.iter().map(|c| c.0).collect();
        self.vote(&w, None)
    }

    /// Monte Carlo average of canonical sampled best responses.
    pub fn regularized(&self, params: &RegularizationParams) -> Result<MixedStrategy> {
        params.validate(self.m)?;
        if params.is_deterministic() {
            return Ok(self.best_response()?.canonical());
        }
        let mu = params.mu_for(self.m);
        let base: Vec<f64> = self.contexts.iter().map(|c| c.0).collect();
        let alpha: Vec<f64> = base.iter().map(|&x| 1.0 + x / params.q.max(f64::MIN_POSITIVE)).collect();
        let usurpers: Vec<Tally> = (0..self.m).map(|u| self.usurper(u)).collect();
        let sample = |s: usize| -> Result<Vec<f64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(s as u64);
            let weights = if params.q > 0.0 {
                dirichlet(&mut rng, &alpha)
            } else {
                base.clone()
            };
            let u = categorical(&mut rng, mu.probs());
            let bits: Vec<bool> = (0..base.len())
                .map(|_| params.p > 0.0 && rng.random::<f64>() < params.p)
                .collect();
            Ok(self
                .vote(&weights, Some((&bits, &usurpers[u])))?
                .canonical()
                .into_vec())
        };
        let draws: Vec<Result<Vec<f64>>> = if params.num_samples >= 16 {
            (0..params.num_samples).into_par_iter().map(sample).collect()
        } else {
            (0..params.num_samples).map(sample).collect()
        };
        let mut acc = vec![0.0; self.m];
        for d in draws {
            for (a, v) in acc.iter_mut().zip(d?) {
                *a += v;
            }
        }
        MixedStrategy::normalized(acc)
    }
}

fn check_kind(rule: &Rule, kind: BallotKind) -> Result<()> {
    if kind != rule.ballot_kind() {
        return Err(CogError::IncompatibleBallot {
            rule: rule.to_string(),
            ballot: kind.name(),
        });
    }
    Ok(())
}

pub(crate) fn dirichlet(rng: &mut impl Rng, alpha: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("alpha > 0").sample(rng))
        .collect();
    let sum: f64 = g.iter().sum();
    if sum > 0.0 {
        g.iter_mut().for_each(|v| *v /= sum);
    } else {
        let k = g.len() as f64;
        g.iter_mut().for_each(|v| *v = 1.0 / k);
    }
    g
}

pub(crate) fn categorical(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// The rule applied to the vote population `player` faces against `others`.
pub fn best_response<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
    rule: &Rule,
) -> Result<BestResponseSet> {
    Electorate::from_game(game, player, others, rule, false)?.best_response()
}

/// Monte Carlo regularized best response: Dirichlet-perturbed co-player
/// profile, usurper replacement with probability `p`, averaged canonical
/// outputs.
pub fn regularized_best_response<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
    rule: &Rule,
    params: &RegularizationParams,
) -> Result<MixedStrategy> {
    let all = params.q > 0.0;
    Electorate::from_game(game, player, others, rule, all)?.regularized(params)
}

/// Default cap on enumerated joint outcome draws.
pub const EXPANSION_CAP: usize = 1_000_000;
/// Sample count of the Monte Carlo fallback.
pub const EXPANSION_SAMPLES: usize = 100_000;

/// Result of expanding independent per-action outcome lotteries into a
/// lottery over rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticVotes {
    /// Weights sum to the requested total weight.
    pub ballots: Vec<(f64, Ballot)>,
    /// `Some(n)` when the product space exceeded the cap and `n` samples were
    /// drawn instead.
    pub monte_carlo_samples: Option<usize>,
}

/// Independent outcome draws per own action, ranked by `pref` over outcomes.
/// Actions whose realized outcomes tie share a tier.
pub fn stochastic_vote_population(
    outcome_lotteries: &[Vec<f64>],
    pref: &PreferenceRelation,
    weight: f64,
) -> Result<VotePopulation> {
    let sv = stochastic_votes(outcome_lotteries, pref, weight, EXPANSION_CAP, 0)?;
    Ok(VotePopulation::new_unchecked(outcome_lotteries.len(), sv.ballots))
}

pub fn stochastic_votes(
    outcome_lotteries: &[Vec<f64>],
    pref: &PreferenceRelation,
    weight: f64,
    cap: usize,
    seed: u64,
) -> Result<StochasticVotes> {
    let m = outcome_lotteries.len();
    if m == 0 {
        return Err(CogError::validation("no actions to rank"));
    }
    if !(weight >= 0.0 && weight <= 1.0 + 1e-12) {
        return Err(CogError::validation(format!("weight {weight} outside [0, 1]")));
    }
    let k = pref.num_actions();
    let mut supports: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    for (a, l) in outcome_lotteries.iter().enumerate() {
        if l.len() != k {
            return Err(CogError::validation(format!(
                "action {a} lottery over {} outcomes, preference over {k}",
                l.len()
            )));
        }
        MixedStrategy::new(l.clone())?;
        supports.push(
            l.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(o, &p)| (o, p))
                .collect(),
        );
    }
    // Values are negated tiers so that from_values ranks better outcomes first.
    let rank_of = |draw: &[usize]| -> PreferenceRelation {
        let v: Vec<f64> = draw.iter().map(|&o| -(pref.tier_of(o) as f64)).collect();
        PreferenceRelation::from_values(&v)
    };
    let size = supports
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
        .unwrap_or(usize::MAX);
    let mut out: Vec<(f64, Ballot)> = Vec::new();
    let mut mc = None;
    if size <= cap {
        let counts: Vec<usize> = supports.iter().map(Vec::len).collect();
        let mut draw = vec![0; m];
        for_each_profile(&counts, |idx| {
            let mut p = weight;
            for (a, &j) in idx.iter().enumerate() {
                draw[a] = supports[a][j].0;
                p *= supports[a][j].1;
            }
            out.push((p, Ballot::Ranking(rank_of(&draw))));
        });
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = weight / EXPANSION_SAMPLES as f64;
        let mut draw = vec![0; m];
        for _ in 0..EXPANSION_SAMPLES {
            for (a, l) in outcome_lotteries.iter().enumerate() {
                draw[a] = categorical(&mut rng, l);
            }
            out.push((w, Ballot::Ranking(rank_of(&draw))));
        }
        mc = Some(EXPANSION_SAMPLES);
    }
    let merged = VotePopulation::new_unchecked(m, out).merged();
    Ok(StochasticVotes {
        ballots: merged.entries().to_vec(),
        monte_carlo_samples: mc,
    })
}
