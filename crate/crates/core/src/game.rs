//! Game representations: cardinal normal-form games, context-ordinal games,
//! and the conversions between them.

use std::borrow::Cow;

use crate::error::{CogError, Result};
use crate::population::{Ballot, BallotKind, VotePopulation};
use crate::preference::PreferenceRelation;
use crate::strategy::{flat_index, for_each_profile, MixedStrategy, StrategyProfile, SIMPLEX_TOL};

/// A lottery over ballots: player `i`'s vote in one co-player context.
pub type ContextVote = Vec<(f64, Ballot)>;

/// Anything that yields, for each player and co-player pure profile, a vote
/// over that player's own actions.
///
/// Contexts are co-player action tuples in player order with the player
/// itself removed.
pub trait PreferenceGame: Sync {
    fn action_counts(&self) -> &[usize];

    fn context_vote(&self, player: usize, context: &[usize]) -> Cow<'_, [(f64, Ballot)]>;

    fn num_players(&self) -> usize {
        self.action_counts().len()
    }

    fn context_counts(&self, player: usize) -> Vec<usize> {
        self.action_counts()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != player)
            .map(|(_, &m)| m)
            .collect()
    }

    fn num_contexts(&self, player: usize) -> usize {
        self.context_counts(player).iter().product()
    }

    /// Row-major `m x m` matrix of `P(a > b) - P(b > a)` for this context.
    fn context_margins(&self, player: usize, context: &[usize]) -> Vec<f64> {
        let m = self.action_counts()[player];
        let mut out = vec![0.0; m * m];
        for (w, ballot) in self.context_vote(player, context).iter() {
            accumulate_margins(&mut out, m, &ballot.ranking(), *w);
        }
        out
    }

    /// Expected positional score of each action under `scores` (tied slots
    /// averaged).
    fn context_positional(&self, player: usize, context: &[usize], scores: &[f64]) -> Vec<f64> {
        let m = self.action_counts()[player];
        let mut out = vec![0.0; m];
        for (w, ballot) in self.context_vote(player, context).iter() {
            for (o, s) in out.iter_mut().zip(ballot.ranking().positional_scores(scores)) {
                *o += w * s;
            }
        }
        out
    }

    /// The ballot kind player `player` votes with.
    fn ballot_kind(&self, player: usize) -> BallotKind {
        let first = vec![0; self.num_players() - 1];
        self.context_vote(player, &first)[0].1.kind()
    }
}

pub(crate) fn accumulate_margins(out: &mut [f64], m: usize, pref: &PreferenceRelation, w: f64) {
    for a in 0..m {
        for b in (a + 1)..m {
            let s = match pref.compare(a, b) {
                std::cmp::Ordering::Greater => w,
                std::cmp::Ordering::Less => -w,
                std::cmp::Ordering::Equal => 0.0,
            };
            out[a * m + b] += s;
            out[b * m + a] -= s;
        }
    }
}

/// Calls `f(context, weight)` for every co-player profile with positive
/// product weight, in row-major order.
pub fn for_each_weighted_context(
    counts: &[usize],
    others: &[MixedStrategy],
    mut f: impl FnMut(&[usize], f64),
) {
    for_each_profile(counts, |ctx| {
        let w: f64 = ctx.iter().zip(others).map(|(&a, s)| s[a]).product();
        if w > 0.0 {
            f(ctx, w);
        }
    });
}

pub(crate) fn check_others<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
) -> Result<()> {
    if player >= game.num_players() {
        return Err(CogError::validation(format!("no player {player}")));
    }
    let counts = game.context_counts(player);
    if others.len() != counts.len() {
        return Err(CogError::validation(format!(
            "expected {} co-player strategies, got {}",
            counts.len(),
            others.len()
        )));
    }
    for (s, &m) in others.iter().zip(&counts) {
        if s.len() != m {
            return Err(CogError::validation(format!(
                "co-player strategy has {} entries, expected {m}",
                s.len()
            )));
        }
    }
    Ok(())
}

/// The population of votes player `player` casts when co-players play the
/// independent mixture `others`. Identical ballots are merged.
pub fn vote_population<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
) -> Result<VotePopulation> {
    Ok(vote_population_unmerged(game, player, others)?.merged())
}

/// As [`vote_population`] but with one entry per (context, ballot) pair.
pub fn vote_population_unmerged<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
) -> Result<VotePopulation> {
    check_others(game, player, others)?;
    let counts = game.context_counts(player);
    let mut entries = Vec::new();
    for_each_weighted_context(&counts, others, |ctx, w| {
        for (p, ballot) in game.context_vote(player, ctx).iter() {
            if *p > 0.0 {
                entries.push((w * p, ballot.clone()));
            }
        }
    });
    VotePopulation::new(game.action_counts()[player], entries)
}

/// Removes player `i` from a joint profile.
pub fn context_of(profile: &[usize], player: usize) -> Vec<usize> {
    profile
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != player)
        .map(|(_, &a)| a)
        .collect()
}

/// Re-inserts player `i`'s action into a context.
pub(crate) fn joint_of(context: &[usize], player: usize, action: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(context.len() + 1);
    v.extend_from_slice(&context[..player]);
    v.push(action);
    v.extend_from_slice(&context[player..]);
    v
}

/// A finite normal-form game with one payoff tensor per player, stored flat
/// in row-major joint-profile order.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalGame {
    action_counts: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl CardinalGame {
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if action_counts.is_empty() || action_counts.iter().any(|&m| m == 0) {
            return Err(CogError::validation("every player needs at least one action"));
        }
        if payoffs.len() != action_counts.len() {
            return Err(CogError::validation(format!(
                "{} payoff tensors for {} players",
                payoffs.len(),
                action_counts.len()
            )));
        }
        let size: usize = action_counts.iter().product();
        for (i, p) in payoffs.iter().enumerate() {
            if p.len() != size {
                return Err(CogError::validation(format!(
                    "player {i} payoff tensor has {} entries, expected {size}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(CogError::validation(format!("player {i} has non-finite payoffs")));
            }
        }
        Ok(Self {
            action_counts,
            payoffs,
        })
    }

    /// Two-player game from row-player and column-player matrices.
    pub fn bimatrix(row: Vec<Vec<f64>>, col: Vec<Vec<f64>>) -> Result<Self> {
        let m = row.len();
        let n = row.first().map_or(0, Vec::len);
        if col.len() != m || row.iter().chain(&col).any(|r| r.len() != n) {
            return Err(CogError::validation("bimatrix payoffs must share one rectangular shape"));
        }
        Self::new(
            vec![m, n],
            vec![row.concat(), col.concat()],
        )
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn payoff_tensor(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        self.payoffs[player][flat_index(&self.action_counts, profile)]
    }

    /// `U_i(., context)` over player `i`'s own actions.
    pub fn slice(&self, player: usize, context: &[usize]) -> Vec<f64> {
        (0..self.action_counts[player])
            .map(|a| self.payoff(player, &joint_of(context, player, a)))
            .collect()
    }

    /// `u_i(a, x_{-i})` for every own action `a`.
    pub fn expected_payoffs(&self, player: usize, profile: &StrategyProfile) -> Vec<f64> {
        contract_except(
            &self.payoffs[player],
            &self.action_counts,
            profile.strategies(),
            player,
        )
    }

    pub fn expected_payoff(&self, player: usize, profile: &StrategyProfile) -> f64 {
        self.expected_payoffs(player, profile)
            .iter()
            .zip(profile.player(player).probs())
            .map(|(u, p)| u * p)
            .sum()
    }

    /// Applies `f` to every payoff of every player.
    pub fn map_payoffs(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        Self {
            action_counts: self.action_counts.clone(),
            payoffs: self
                .payoffs
                .iter()
                .enumerate()
                .map(|(i, t)| t.iter().map(|&v| f(i, v)).collect())
                .collect(),
        }
    }
}

/// Contracts a row-major tensor with every strategy except `keep`'s, leaving
/// a vector over `keep`'s actions.
pub fn contract_except(
    tensor: &[f64],
    counts: &[usize],
    strategies: &[MixedStrategy],
    keep: usize,
) -> Vec<f64> {
    contract_keeping(tensor, counts, strategies, &[keep])
}

/// Contracts every axis not listed in `keep`; the result is row-major over the
/// kept axes in their tensor order.
pub fn contract_keeping(
    tensor: &[f64],
    counts: &[usize],
    strategies: &[MixedStrategy],
    keep: &[usize],
) -> Vec<f64> {
    let mut cur: Cow<'_, [f64]> = Cow::Borrowed(tensor);
    let mut dims: Vec<usize> = counts.to_vec();
    // Leading axes first: the contiguous inner block stays long.
    for axis in 0..counts.len() {
        if keep.contains(&axis) {
            continue;
        }
        let m = dims[axis];
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let probs = strategies[axis].probs();
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (a, &p) in probs.iter().enumerate().take(m) {
                if p == 0.0 {
                    continue;
                }
                let src = &cur[(o * m + a) * inner..(o * m + a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += p * s;
                }
            }
        }
        dims[axis] = 1;
        cur = Cow::Owned(out);
    }
    cur.into_owned()
}

/// Anything that can evaluate `u_i(a, x_{-i})` for every own action.
pub trait NormalFormGame: Sync {
    fn action_counts(&self) -> &[usize];
    fn expected_payoffs(&self, player: usize, profile: &StrategyProfile) -> Vec<f64>;
    /// `d u_player(a, x_{-player}) / d x_other(b)` as a row-major
    /// `m_player x m_other` matrix. `None` when the game cannot provide it.
    fn payoff_sensitivities(&self, _player: usize, _other: usize, _profile: &StrategyProfile) -> Option<Vec<f64>> {
        None
    }
}

impl NormalFormGame for CardinalGame {
    fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    fn expected_payoffs(&self, player: usize, profile: &StrategyProfile) -> Vec<f64> {
        CardinalGame::expected_payoffs(self, player, profile)
    }

    fn payoff_sensitivities(&self, player: usize, other: usize, profile: &StrategyProfile) -> Option<Vec<f64>> {
        if player == other {
            return None;
        }
        let flat = contract_keeping(
            &self.payoffs[player],
            &self.action_counts,
            profile.strategies(),
            &[player.min(other), player.max(other)],
        );
        if player < other {
            return Some(flat);
        }
        let (mp, mo) = (self.action_counts[player], self.action_counts[other]);
        Some((0..mp * mo).map(|k| flat[(k % mo) * mp + k / mo]).collect())
    }
}

impl PreferenceGame for CardinalGame {
    fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    /// Score voting with scores equal to payoffs.
    fn context_vote(&self, player: usize, context: &[usize]) -> Cow<'_, [(f64, Ballot)]> {
        Cow::Owned(vec![(1.0, Ballot::Scores(self.slice(player, context)))])
    }
}

/// A context-ordinal game: for each player and co-player pure profile, a
/// (possibly stochastic) vote over the player's own actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextOrdinalGame {
    action_counts: Vec<usize>,
    /// `rho[i][c]` is player `i`'s vote in the row-major co-player context `c`.
    rho: Vec<Vec<ContextVote>>,
}

impl ContextOrdinalGame {
    pub fn new(action_counts: Vec<usize>, rho: Vec<Vec<ContextVote>>) -> Result<Self> {
        if action_counts.is_empty() || action_counts.iter().any(|&m| m == 0) {
            return Err(CogError::validation("every player needs at least one action"));
        }
        if rho.len() != action_counts.len() {
            return Err(CogError::validation("one preference map per player required"));
        }
        for (i, map) in rho.iter().enumerate() {
            let contexts: usize = action_counts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &m)| m)
                .product();
            if map.len() != contexts {
                return Err(CogError::validation(format!(
                    "player {i} has {} contexts, expected {contexts}",
                    map.len()
                )));
            }
            for (c, vote) in map.iter().enumerate() {
                if vote.is_empty() {
                    return Err(CogError::validation(format!(
                        "player {i} context {c} has no preference"
                    )));
                }
                let sum: f64 = vote.iter().map(|(w, _)| w).sum();
                if (sum - 1.0).abs() > SIMPLEX_TOL || vote.iter().any(|(w, _)| *w < 0.0) {
                    return Err(CogError::validation(format!(
                        "player {i} context {c}: preference lottery weights sum to {sum}"
                    )));
                }
                for (_, b) in vote {
                    if b.kind() != map[0][0].1.kind() {
                        return Err(CogError::validation(format!(
                            "player {i} mixes ballot kinds across contexts"
                        )));
                    }
                    if b.num_candidates() != action_counts[i] {
                        return Err(CogError::validation(format!(
                            "player {i} context {c}: ballot over {} actions, expected {}",
                            b.num_candidates(),
                            action_counts[i]
                        )));
                    }
                }
            }
        }
        Ok(Self { action_counts, rho })
    }

    /// Deterministic preferences given by `pref(player, context)`.
    pub fn from_fn(
        action_counts: Vec<usize>,
        mut pref: impl FnMut(usize, &[usize]) -> PreferenceRelation,
    ) -> Result<Self> {
        let n = action_counts.len();
        let mut rho = Vec::with_capacity(n);
        for i in 0..n {
            let counts = context_counts(&action_counts, i);
            let mut map = Vec::new();
            for_each_profile(&counts, |ctx| {
                map.push(vec![(1.0, Ballot::Ranking(pref(i, ctx)))]);
            });
            if counts.is_empty() {
                map.push(vec![(1.0, Ballot::Ranking(pref(i, &[])))]);
            }
            rho.push(map);
        }
        Self::new(action_counts, rho)
    }

    /// Arbitrary ballots given by `vote(player, context)`.
    pub fn from_votes(
        action_counts: Vec<usize>,
        mut vote: impl FnMut(usize, &[usize]) -> ContextVote,
    ) -> Result<Self> {
        let n = action_counts.len();
        let mut rho = Vec::with_capacity(n);
        for i in 0..n {
            let counts = context_counts(&action_counts, i);
            let mut map = Vec::new();
            for_each_profile(&counts, |ctx| map.push(vote(i, ctx)));
            if counts.is_empty() {
                map.push(vote(i, &[]));
            }
            rho.push(map);
        }
        Self::new(action_counts, rho)
    }

    pub fn vote(&self, player: usize, context: &[usize]) -> &ContextVote {
        let counts = context_counts(&self.action_counts, player);
        &self.rho[player][flat_index(&counts, context)]
    }

    /// The preference relation of a deterministic context.
    pub fn preference(&self, player: usize, context: &[usize]) -> Option<PreferenceRelation> {
        match self.vote(player, context).as_slice() {
            [(_, b)] => Some(b.ranking().into_owned()),
            _ => None,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.rho.iter().flatten().all(|v| v.len() == 1)
    }

    /// The single ballot kind used by `player`, if uniform.
    pub fn ballot_kind(&self, player: usize) -> Option<BallotKind> {
        let first = self.rho[player].first()?.first()?.1.kind();
        self.rho[player]
            .iter()
            .flatten()
            .all(|(_, b)| b.kind() == first)
            .then_some(first)
    }
}

pub(crate) fn context_counts(action_counts: &[usize], player: usize) -> Vec<usize> {
    action_counts
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != player)
        .map(|(_, &m)| m)
        .collect()
}

impl PreferenceGame for ContextOrdinalGame {
    fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    fn context_vote(&self, player: usize, context: &[usize]) -> Cow<'_, [(f64, Ballot)]> {
        Cow::Borrowed(self.vote(player, context))
    }
}

/// Ranks every payoff slice `U_i(., a_{-i})` by descending payoff. Payoffs
/// equal to 12 significant digits share a tier.
pub fn cog_from_cardinal(game: &CardinalGame) -> ContextOrdinalGame {
    ContextOrdinalGame::from_fn(game.action_counts.clone(), |i, ctx| {
        PreferenceRelation::from_values(&game.slice(i, ctx))
    })
    .expect("cardinal game dimensions are valid")
}

/// Score-voting form of a cardinal game: each context's ballot carries the
/// payoff slice itself as scores.
pub fn score_cog(game: &CardinalGame) -> ContextOrdinalGame {
    ContextOrdinalGame::from_votes(game.action_counts.clone(), |i, ctx| {
        vec![(1.0, Ballot::Scores(game.slice(i, ctx)))]
    })
    .expect("cardinal game dimensions are valid")
}

/// The normal-form game induced by positional scoring: each slice
/// `U_i(., a_{-i})` is the expected positional score vector of
/// `rho_i(a_{-i})` under `scoring[i]`.
pub fn induce_nfg<G: PreferenceGame + ?Sized>(game: &G, scoring: &[Vec<f64>]) -> Result<CardinalGame> {
    let counts = game.action_counts().to_vec();
    if scoring.len() != counts.len() {
        return Err(CogError::validation("one scoring vector per player required"));
    }
    for (i, s) in scoring.iter().enumerate() {
        if s.len() != counts[i] {
            return Err(CogError::validation(format!(
                "player {i} scoring vector has {} entries, expected {}",
                s.len(),
                counts[i]
            )));
        }
        if s.windows(2).any(|w| w[0] < w[1]) {
            return Err(CogError::validation(format!(
                "player {i} scoring vector must be non-increasing"
            )));
        }
    }
    let size: usize = counts.iter().product();
    let mut payoffs = vec![vec![0.0; size]; counts.len()];
    for (i, tensor) in payoffs.iter_mut().enumerate() {
        let ctx_counts = context_counts(&counts, i);
        for_each_profile(&ctx_counts, |ctx| {
            let u = game.context_positional(i, ctx, &scoring[i]);
            for (a, v) in u.into_iter().enumerate() {
                tensor[flat_index(&counts, &joint_of(ctx, i, a))] = v;
            }
        });
        if ctx_counts.is_empty() {
            let u = game.context_positional(i, &[], &scoring[i]);
            tensor.copy_from_slice(&u);
        }
    }
    CardinalGame::new(counts, payoffs)
}

/// Borda scoring `(m-1, ..., 0)` for each player.
pub fn borda_scoring(action_counts: &[usize]) -> Vec<Vec<f64>> {
    action_counts
        .iter()
        .map(|&m| (0..m).rev().map(|k| k as f64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensitivities_match_finite_differences() {
        let g = CardinalGame::new(
            vec![2, 3, 2],
            (0..3).map(|p| (0..12).map(|k| ((k * 7 + p * 5) % 11) as f64 - 5.0).collect()).collect(),
        )
        .unwrap();
        let x = StrategyProfile::from_vecs(vec![vec![0.3, 0.7], vec![0.2, 0.5, 0.3], vec![0.6, 0.4]]).unwrap();
        for i in 0..3 {
            for j in (0..3).filter(|&j| j != i) {
                let sens = g.payoff_sensitivities(i, j, &x).unwrap();
                let mj = g.action_counts()[j];
                for b in 0..mj {
                    let mut v = vec![0.0; mj];
                    v[b] = 1.0;
                    let mut strategies = x.strategies().to_vec();
                    strategies[j] = MixedStrategy::new(v).unwrap();
                    let pure = g.expected_payoffs(i, &StrategyProfile::new(strategies));
                    for (a, u) in pure.iter().enumerate() {
                        assert!((sens[a * mj + b] - u).abs() < 1e-12);
                    }
                }
            }
        }
    }

    pub(crate) fn chicken() -> CardinalGame {
        // actions: 0 = swerve, 1 = straight
        CardinalGame::bimatrix(
            vec![vec![0.75, 0.5], vec![1.0, 0.0]],
            vec![vec![0.75, 1.0], vec![0.5, 0.0]],
        )
        .unwrap()
    }

    fn rps() -> CardinalGame {
        let a = vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ];
        let b = a
            .iter()
            .map(|r| r.iter().map(|v| -v).collect())
            .collect();
        CardinalGame::bimatrix(a, b).unwrap()
    }

    #[test]
    fn chicken_slices_become_rankings() {
        let cog = cog_from_cardinal(&chicken());
        // opponent swerves: straight > swerve
        assert_eq!(cog.preference(0, &[0]).unwrap().tiers(), &[vec![1], vec![0]]);
        // opponent straight: swerve > straight
        assert_eq!(cog.preference(0, &[1]).unwrap().tiers(), &[vec![0], vec![1]]);
        assert_eq!(cog.preference(1, &[1]).unwrap().tiers(), &[vec![0], vec![1]]);
    }

    #[test]
    fn constant_slice_is_one_tier() {
        let g = CardinalGame::bimatrix(vec![vec![2.0, 2.0]; 2], vec![vec![0.0, 1.0]; 2]).unwrap();
        let cog = cog_from_cardinal(&g);
        assert_eq!(cog.preference(0, &[1]).unwrap(), PreferenceRelation::indifferent(2));
    }

    #[test]
    fn rps_opponent_rock_ballot() {
        let cog = cog_from_cardinal(&rps());
        assert_eq!(
            cog.preference(0, &[0]).unwrap().tiers(),
            &[vec![1], vec![0], vec![2]]
        );
    }

    #[test]
    fn borda_induction_of_rps() {
        let cog = cog_from_cardinal(&rps());
        let nfg = induce_nfg(&cog, &borda_scoring(&[3, 3])).unwrap();
        assert_eq!(nfg.slice(0, &[0]), vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn borda_induction_of_indifference() {
        let cog = ContextOrdinalGame::from_fn(vec![3, 1], |i, _| {
            PreferenceRelation::indifferent(if i == 0 { 3 } else { 1 })
        })
        .unwrap();
        let nfg = induce_nfg(&cog, &borda_scoring(&[3, 1])).unwrap();
        assert_eq!(nfg.slice(0, &[0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn stochastic_preferences_induce_expected_scores() {
        let a = PreferenceRelation::from_order(&[0, 1]).unwrap();
        let b = PreferenceRelation::from_order(&[1, 0]).unwrap();
        let cog = ContextOrdinalGame::from_votes(vec![2, 1], |i, _| {
            if i == 0 {
                vec![(0.25, Ballot::Ranking(a.clone())), (0.75, Ballot::Ranking(b.clone()))]
            } else {
                vec![(1.0, Ballot::Ranking(PreferenceRelation::indifferent(1)))]
            }
        })
        .unwrap();
        let nfg = induce_nfg(&cog, &borda_scoring(&[2, 1])).unwrap();
        assert_eq!(nfg.slice(0, &[0]), vec![0.25, 0.75]);
    }

    #[test]
    fn expected_payoffs_contract_other_axes() {
        let g = chicken();
        let x = StrategyProfile::from_vecs(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let u0 = g.expected_payoffs(0, &x);
        assert!((u0[0] - (0.25 * 0.75 + 0.75 * 0.5)).abs() < 1e-15);
        assert!((u0[1] - 0.25).abs() < 1e-15);
        let u1 = g.expected_payoffs(1, &x);
        assert!((u1[0] - (0.5 * 0.75 + 0.5 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn fig1_population() {
        let cog = cog_from_cardinal(&rps());
        let x = MixedStrategy::new(vec![0.25, 0.30, 0.45]).unwrap();
        let pop = vote_population(&cog, 0, &[x]).unwrap();
        let e = pop.entries();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].0, 0.25);
        assert_eq!(e[0].1.ranking().tiers(), &[vec![1], vec![0], vec![2]]);
        assert_eq!(e[1].1.ranking().tiers(), &[vec![2], vec![1], vec![0]]);
        assert_eq!(e[2].1.ranking().tiers(), &[vec![0], vec![2], vec![1]]);
    }

    #[test]
    fn pure_context_gives_single_ballot() {
        let cog = cog_from_cardinal(&rps());
        let pop = vote_population(&cog, 1, &[MixedStrategy::pure(3, 2)]).unwrap();
        assert_eq!(pop.entries().len(), 1);
        assert_eq!(pop.entries()[0].0, 1.0);
    }

    #[test]
    fn two_uniform_coplayers_give_quarter_weights() {
        let cog = ContextOrdinalGame::from_fn(vec![3, 2, 2], |i, ctx| {
            let m = [3, 2, 2][i];
            let mut order: Vec<usize> = (0..m).collect();
            order.rotate_left((ctx.iter().sum::<usize>()) % m);
            PreferenceRelation::from_order(&order).unwrap()
        })
        .unwrap();
        let u = MixedStrategy::uniform(2);
        let pop = vote_population_unmerged(&cog, 0, &[u.clone(), u]).unwrap();
        assert_eq!(pop.entries().len(), 4);
        assert!(pop.entries().iter().all(|(w, _)| *w == 0.25));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cog = cog_from_cardinal(&rps());
        assert!(vote_population(&cog, 0, &[MixedStrategy::uniform(2)]).is_err());
        assert!(vote_population(&cog, 0, &[]).is_err());
    }
}
