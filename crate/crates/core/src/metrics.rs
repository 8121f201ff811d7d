//! Approximation metrics, equilibrium verification, distortion bounds,
//! Shapley breakdowns and stochastic dominance.

use serde::Serialize;

use crate::br::{Electorate, RegularizationParams};
use crate::error::{CogError, Result};
use crate::game::{context_counts, NormalFormGame, PreferenceGame};
use crate::lp::{Cmp, LinearProgram};
use crate::population::{Ballot, BallotKind};
use crate::preference::PreferenceRelation;
use crate::rules::{BestResponseSet, Rule};
use crate::solvers::Trajectory;
use crate::strategy::{flat_index, for_each_profile, product_weights, MixedStrategy, StrategyProfile};

/// The rule of `player`: one rule per player, or a single rule for all.
pub fn rule_for(rules: &[Rule], player: usize) -> &Rule {
    if rules.len() == 1 {
        &rules[0]
    } else {
        &rules[player]
    }
}

fn check_rules(rules: &[Rule], n: usize) -> Result<()> {
    if rules.len() == 1 || rules.len() == n {
        Ok(())
    } else {
        Err(CogError::validation(format!(
            "{} rules given for {n} players",
            rules.len()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exploitability {
    pub per_player: Vec<f64>,
    pub max: f64,
}

impl Exploitability {
    fn from_vec(per_player: Vec<f64>) -> Self {
        let max = per_player.iter().copied().fold(0.0, f64::max);
        Self { per_player, max }
    }
}

/// `max_z u_i(z, x_{-i}) - u_i(x)` per player.
pub fn classical_exploitability<G: NormalFormGame + ?Sized>(
    game: &G,
    x: &StrategyProfile,
) -> Result<Exploitability> {
    x.check_dims(game.action_counts())?;
    let eps = (0..x.num_players())
        .map(|i| {
            let u = game.expected_payoffs(i, x);
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cur: f64 = u.iter().zip(x.player(i).probs()).map(|(a, b)| a * b).sum();
            (best - cur).max(0.0)
        })
        .collect();
    Ok(Exploitability::from_vec(eps))
}

/// Unit-metric earth mover's distance from each `x_i` to the (regularized)
/// best response against `x_{-i}`.
pub fn emd_exploitability<G: PreferenceGame + ?Sized>(
    game: &G,
    rules: &[Rule],
    x: &StrategyProfile,
    params: &RegularizationParams,
) -> Result<Exploitability> {
    x.check_dims(game.action_counts())?;
    check_rules(rules, x.num_players())?;
    let mut eps = Vec::with_capacity(x.num_players());
    for i in 0..x.num_players() {
        let rule = rule_for(rules, i);
        let v = if params.is_deterministic() {
            crate::br::best_response(game, i, &x.others(i), rule)?.distance(x.player(i))
        } else {
            let mut params = params.clone();
            if params.mu.as_ref().is_some_and(|mu| mu.len() != x.player(i).len()) {
                params.mu = None;
            }
            let r = crate::br::regularized_best_response(game, i, &x.others(i), rule, &params)?;
            0.5 * r.l1_distance(x.player(i))
        };
        eps.push(v);
    }
    Ok(Exploitability::from_vec(eps))
}

/// Why a player's strategy is not a best response.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A winning action the player should move mass to.
    Action(usize),
    /// The explicit best-response lottery.
    Lottery(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerVerdict {
    pub in_best_response: bool,
    pub epsilon: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub players: Vec<PlayerVerdict>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.players.iter().all(|p| p.in_best_response)
    }

    /// Indices of players failing verification.
    pub fn deviators(&self) -> Vec<usize> {
        (0..self.players.len())
            .filter(|&i| !self.players[i].in_best_response)
            .collect()
    }
}

pub(crate) fn verdict(br: &BestResponseSet, x: &MixedStrategy, tol: f64) -> PlayerVerdict {
    let eps = br.distance(x);
    let ok = eps <= tol;
    let witness = (!ok).then(|| match br {
        BestResponseSet::SupportSet { winners, .. } => {
            let outside = winners.iter().copied().find(|&a| x[a] <= tol);
            Witness::Action(outside.unwrap_or(winners[0]))
        }
        BestResponseSet::ExplicitLottery(l) => Witness::Lottery(l.probs().to_vec()),
    });
    PlayerVerdict {
        in_best_response: ok,
        epsilon: eps,
        witness,
    }
}

/// Checks that every player's strategy lies in its social-choice best
/// response to the others.
pub fn verify_ne<G: PreferenceGame + ?Sized>(
    game: &G,
    rules: &[Rule],
    x: &StrategyProfile,
    tol: f64,
) -> Result<VerificationReport> {
    x.check_dims(game.action_counts())?;
    check_rules(rules, x.num_players())?;
    let players = (0..x.num_players())
        .map(|i| {
            let br = crate::br::best_response(game, i, &x.others(i), rule_for(rules, i))?;
            Ok(verdict(&br, x.player(i), tol))
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport { players })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationVerdict {
    pub player: usize,
    pub action: usize,
    pub passes: bool,
    /// Winner set (or lottery support) of the conditional best response.
    pub winners: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatedReport {
    pub entries: Vec<RecommendationVerdict>,
}

impl CorrelatedReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passes)
    }
}

/// Correlated-equilibrium check on an explicit joint distribution (row-major
/// over joint profiles): every recommended action with marginal above `tol`
/// must be a best response to the conditional co-player distribution.
pub fn verify_ce<G: PreferenceGame + ?Sized>(
    game: &G,
    rules: &[Rule],
    joint: &[f64],
    tol: f64,
) -> Result<CorrelatedReport> {
    let counts = game.action_counts().to_vec();
    let n = counts.len();
    check_rules(rules, n)?;
    if joint.len() != counts.iter().product::<usize>() {
        return Err(CogError::validation("joint tensor does not match the game"));
    }
    if joint.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(CogError::validation("joint tensor has negative entries"));
    }
    let total: f64 = joint.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CogError::validation(format!("joint tensor sums to {total}")));
    }
    let mut entries = Vec::new();
    for i in 0..n {
        let ctx_counts = context_counts(&counts, i);
        for a in 0..counts[i] {
            let mut cond = Vec::with_capacity(ctx_counts.iter().product());
            for_each_profile(&ctx_counts, |ctx| {
                let joint_idx = crate::game::joint_of(ctx, i, a);
                cond.push(joint[flat_index(&counts, &joint_idx)]);
            });
            let marginal: f64 = cond.iter().sum();
            if marginal <= tol {
                continue;
            }
            cond.iter_mut().for_each(|v| *v /= marginal);
            let br = Electorate::from_context_weights(game, i, rule_for(rules, i), &cond, false)?
                .best_response()?;
            let passes = match &br {
                BestResponseSet::SupportSet { winners, .. } => winners.contains(&a),
                BestResponseSet::ExplicitLottery(l) => l[a] > tol,
            };
            entries.push(RecommendationVerdict {
                player: i,
                action: a,
                passes,
                winners: br.winners(),
            });
        }
    }
    Ok(CorrelatedReport { entries })
}

/// Rankings-only rule for the two-candidate meta-election.
fn meta_rule(rule: &Rule) -> Rule {
    match rule.ballot_kind() {
        BallotKind::Ranking => rule.clone(),
        _ => Rule::Borda,
    }
}

fn co_player_weights(profile: &StrategyProfile, player: usize) -> Vec<f64> {
    product_weights(&profile.others(player))
}

/// Probability the best fixed strategy in hindsight beats the online play in
/// the two-candidate meta-election (candidate 0 = hindsight), for every
/// prefix `1..=T`.
pub fn hindsight_winrate<G: PreferenceGame + ?Sized>(
    traj: &Trajectory,
    game: &G,
    player: usize,
    rule: &Rule,
    params: &RegularizationParams,
) -> Result<Vec<f64>> {
    let prefixes: Vec<usize> = (1..=traj.rounds()).collect();
    hindsight_winrate_at(traj, game, player, rule, params, &prefixes)
}

/// As [`hindsight_winrate`] evaluated only at the given prefix lengths.
pub fn hindsight_winrate_at<G: PreferenceGame + ?Sized>(
    traj: &Trajectory,
    game: &G,
    player: usize,
    rule: &Rule,
    params: &RegularizationParams,
    prefixes: &[usize],
) -> Result<Vec<f64>> {
    let t_max = traj.rounds();
    if t_max == 0 {
        return Err(CogError::validation("empty trajectory"));
    }
    if player >= game.num_players() {
        return Err(CogError::validation(format!("no player {player}")));
    }
    let m = game.action_counts()[player];
    let ctx_counts = game.context_counts(player);
    let round_weights: Vec<Vec<f64>> = traj
        .best_responses
        .iter()
        .map(|x| co_player_weights(x, player))
        .collect();
    let mut contexts: Vec<Vec<usize>> = Vec::new();
    for_each_profile(&ctx_counts, |c| contexts.push(c.to_vec()));
    let rankings: Vec<Vec<(f64, PreferenceRelation)>> = contexts
        .iter()
        .map(|c| {
            game.context_vote(player, c)
                .iter()
                .map(|(w, b)| (*w, b.ranking().into_owned()))
                .collect()
        })
        .collect();
    let meta = meta_rule(rule);
    let mut meta_params = params.clone();
    meta_params.mu = None;
    let mut out = Vec::with_capacity(prefixes.len());
    for &t in prefixes {
        if t == 0 || t > t_max {
            return Err(CogError::validation(format!("prefix {t} outside 1..={t_max}")));
        }
        let mut pooled = vec![0.0; contexts.len()];
        for w in &round_weights[..t] {
            for (p, v) in pooled.iter_mut().zip(w) {
                *p += v / t as f64;
            }
        }
        let z = Electorate::from_context_weights(game, player, rule, &pooled, false)?
            .best_response()?
            .canonical();
        let mut meta_contexts = Vec::new();
        for (s, w) in round_weights[..t].iter().enumerate() {
            let online = traj.best_responses[s].player(player);
            for (c, &wc) in w.iter().enumerate() {
                if wc == 0.0 && params.q == 0.0 {
                    continue;
                }
                // P(hindsight > online), P(online > hindsight), P(tie).
                let mut probs = [0.0; 3];
                for a in 0..m {
                    if z[a] == 0.0 {
                        continue;
                    }
                    for b in 0..m {
                        let pw = z[a] * online[b];
                        if pw == 0.0 {
                            continue;
                        }
                        for (pb, r) in &rankings[c] {
                            let k = match r.compare(a, b) {
                                std::cmp::Ordering::Greater => 0,
                                std::cmp::Ordering::Less => 1,
                                std::cmp::Ordering::Equal => 2,
                            };
                            probs[k] += pw * pb;
                        }
                    }
                }
                let ballots = [
                    PreferenceRelation::from_order(&[0, 1]).expect("valid"),
                    PreferenceRelation::from_order(&[1, 0]).expect("valid"),
                    PreferenceRelation::indifferent(2),
                ];
                let vote: Vec<(f64, Ballot)> = probs
                    .iter()
                    .zip(ballots)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, b)| (*p, Ballot::Ranking(b)))
                    .collect();
                meta_contexts.push((wc / t as f64, vote));
            }
        }
        let electorate = Electorate::from_votes(&meta, 2, meta_contexts)?;
        out.push(electorate.regularized(&meta_params)?[0]);
    }
    Ok(out)
}

/// All strict rankings of `m` candidates (as position-to-candidate orders).
fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    permute(&mut cur, 0, &mut out);
    out
}

fn permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for j in k..cur.len() {
        cur.swap(k, j);
        permute(cur, k + 1, out);
        cur.swap(k, j);
    }
}

/// Largest candidate count for which margin of victory enumerates synthetic
/// ballots.
pub const MOV_MAX_CANDIDATES: usize = 7;

/// Minimum ballot weight to alter (moved to arbitrary ballots) so every
/// action in the support of `x_i` attains the maximal rule score.
pub fn margin_of_victory<G: PreferenceGame + ?Sized>(
    game: &G,
    rule: &Rule,
    player: usize,
    x: &StrategyProfile,
) -> Result<f64> {
    x.check_dims(game.action_counts())?;
    let m = game.action_counts()[player];
    let electorate = Electorate::from_game(game, player, &x.others(player), rule, false)?;
    let ballot_scores: Vec<(f64, Vec<f64>)> = electorate
        .contexts
        .iter()
        .map(|(w, t)| match t {
            crate::br::Tally::Linear(v) => Ok((*w, v.clone())),
            _ => Err(CogError::UnsupportedRule(rule.to_string())),
        })
        .collect::<Result<_>>()?;
    let synthetic: Vec<Vec<f64>> = if let Some(scores) = rule.scoring_vector(m) {
        if m > MOV_MAX_CANDIDATES {
            return Err(CogError::Unsupported(format!(
                "margin of victory over more than {MOV_MAX_CANDIDATES} candidates"
            )));
        }
        permutations(m)
            .into_iter()
            .map(|order| {
                let mut v = vec![0.0; m];
                for (pos, &c) in order.iter().enumerate() {
                    v[c] = scores[pos];
                }
                v
            })
            .collect()
    } else if *rule == Rule::Score {
        if m > 12 {
            return Err(CogError::Unsupported(
                "margin of victory over more than 12 score candidates".into(),
            ));
        }
        // Synthetic score ballots range over the box spanned by observed scores.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut all_ctx = Vec::new();
        for_each_profile(&game.context_counts(player), |c| all_ctx.push(c.to_vec()));
        for c in &all_ctx {
            for (_, b) in game.context_vote(player, c).iter() {
                if let Ballot::Scores(s) = b {
                    for &v in s {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
        }
        (0..(1usize << m))
            .map(|mask| (0..m).map(|c| if mask >> c & 1 == 1 { hi } else { lo }).collect())
            .collect()
    } else {
        return Err(CogError::UnsupportedRule(rule.to_string()));
    };
    let support = x.player(player).support(1e-12);
    mov_lp(m, &ballot_scores, &synthetic, &support)
}

/// Variables: removed weight `d_k <= w_k` per ballot, added weight `y_r` per
/// synthetic ballot; minimize the removed mass subject to equal totals and
/// every supported action scoring at least every other action.
fn mov_lp(m: usize, ballots: &[(f64, Vec<f64>)], synthetic: &[Vec<f64>], support: &[usize]) -> Result<f64> {
    let nb = ballots.len();
    let ns = synthetic.len();
    let nv = nb + ns;
    let base: Vec<f64> = (0..m)
        .map(|c| ballots.iter().map(|(w, s)| w * s[c]).sum())
        .collect();
    let max = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = crate::rules::TIE_TOL * max.abs().max(1.0);
    if support.iter().all(|&a| base[a] >= max - tol) {
        return Ok(0.0);
    }
    let mut lp = LinearProgram::new(nv);
    let mut obj = vec![0.0; nv];
    obj[..nb].iter_mut().for_each(|v| *v = -1.0);
    lp.maximize(obj);
    for k in 0..nb {
        let mut row = vec![0.0; nv];
        row[k] = 1.0;
        lp.constraint(row, Cmp::Le, ballots[k].0);
    }
    let mut balance = vec![0.0; nv];
    balance[..nb].iter_mut().for_each(|v| *v = 1.0);
    balance[nb..].iter_mut().for_each(|v| *v = -1.0);
    lp.constraint(balance, Cmp::Eq, 0.0);
    for &a in support {
        for b in 0..m {
            if b == a {
                continue;
            }
            // base[a] - base[b] - sum d_k (s_k[a] - s_k[b]) + sum y_r (t_r[a] - t_r[b]) >= 0
            let mut row = vec![0.0; nv];
            for (k, (_, s)) in ballots.iter().enumerate() {
                row[k] = -(s[a] - s[b]);
            }
            for (r, t) in synthetic.iter().enumerate() {
                row[nb + r] = t[a] - t[b];
            }
            lp.constraint(row, Cmp::Ge, base[b] - base[a]);
        }
    }
    match lp.solve().optimal() {
        Some((_, v)) => Ok((-v).max(0.0)),
        None => Err(CogError::NonConvergence {
            what: "margin of victory".into(),
            residual: f64::NAN,
        }),
    }
}

/// Which restatement of the fictitious-play bound drives `wfp_eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryForm {
    /// `(T+1)/(2T) + (T-1)/(2T) * dbar`.
    MainText,
    /// `(T+1)/(2T) + dbar / 2`.
    Appendix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionInputs {
    /// Per-context payoff sums.
    pub s: Vec<f64>,
    pub d_plus: f64,
    pub p: f64,
    pub num_co_profiles: usize,
    pub t: usize,
    pub form: CorollaryForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionBounds {
    pub kappa_plus: f64,
    pub d_bar_plus: f64,
    pub kappa_mult: f64,
    pub reg_extra: f64,
    /// `dbar` with the regularization penalty added to the rule's distortion.
    pub d_bar_plus_regularized: f64,
    pub wfp_eps: f64,
    pub form: CorollaryForm,
    /// `1 - min s / (4 max s)`.
    pub fp_remark_bound: f64,
}

pub fn distortion_bounds(inp: &DistortionInputs) -> Result<DistortionBounds> {
    if inp.s.is_empty() {
        return Err(CogError::validation("payoff-sum set is empty"));
    }
    let min = inp.s.iter().copied().fold(f64::INFINITY, f64::min);
    let max = inp.s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0) {
        return Err(CogError::validation("payoff sums must be positive"));
    }
    if !(inp.d_plus >= 0.0) {
        return Err(CogError::validation("base distortion must be non-negative"));
    }
    if !(0.0..=1.0).contains(&inp.p) {
        return Err(CogError::validation("p outside [0, 1]"));
    }
    if inp.t == 0 {
        return Err(CogError::validation("T must be positive"));
    }
    let kappa_plus = max - min;
    let d_bar_plus = kappa_plus + min * inp.d_plus;
    let reg_extra = 1.0 - (1.0 - inp.p).powf(inp.num_co_profiles as f64);
    let t = inp.t as f64;
    let head = (t + 1.0) / (2.0 * t);
    let wfp_eps = match inp.form {
        CorollaryForm::MainText => head + (t - 1.0) / (2.0 * t) * d_bar_plus,
        CorollaryForm::Appendix => head + 0.5 * d_bar_plus,
    };
    Ok(DistortionBounds {
        kappa_plus,
        d_bar_plus,
        kappa_mult: max / min,
        reg_extra,
        d_bar_plus_regularized: kappa_plus + min * (inp.d_plus + reg_extra),
        wfp_eps,
        form: inp.form,
        fp_remark_bound: 1.0 - 0.25 * min / max,
    })
}

/// Shapley attribution of player `i`'s canonical best-response mass to the
/// co-player `j`'s actions: `result[a_i][a_j]`. Coalitions renormalize `x_j`
/// to their actions; empty or zero-mass coalitions are worth 0.
pub fn shapley_breakdown<G: PreferenceGame + ?Sized>(
    game: &G,
    rule: &Rule,
    x: &StrategyProfile,
    i: usize,
    j: usize,
) -> Result<Vec<Vec<f64>>> {
    if game.num_players() != 2 {
        return Err(CogError::Unsupported(
            "shapley breakdown is defined for two-player games".into(),
        ));
    }
    if i == j || i > 1 || j > 1 {
        return Err(CogError::validation("need two distinct players"));
    }
    x.check_dims(game.action_counts())?;
    let mi = game.action_counts()[i];
    let mj = game.action_counts()[j];
    if mj > 16 {
        return Err(CogError::Unsupported("more than 16 co-player actions".into()));
    }
    let xj = x.player(j).probs();
    let value = |mask: usize| -> Result<Vec<f64>> {
        let w: Vec<f64> = (0..mj)
            .map(|a| if mask >> a & 1 == 1 { xj[a] } else { 0.0 })
            .collect();
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Ok(vec![0.0; mi]);
        }
        let s = MixedStrategy::normalized(w)?;
        Ok(crate::br::best_response(game, i, &[s], rule)?.canonical().into_vec())
    };
    let values: Vec<Vec<f64>> = (0..(1usize << mj)).map(value).collect::<Result<_>>()?;
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let mut out = vec![vec![0.0; mj]; mi];
    for aj in 0..mj {
        for mask in 0..(1usize << mj) {
            if mask >> aj & 1 == 1 {
                continue;
            }
            let k = mask.count_ones() as usize;
            let coef = fact(k) * fact(mj - k - 1) / fact(mj);
            let with = &values[mask | 1 << aj];
            let without = &values[mask];
            for ai in 0..mi {
                out[ai][aj] += coef * (with[ai] - without[ai]);
            }
        }
    }
    Ok(out)
}

/// Strict first-order stochastic dominance of `x` over `y` for `player`:
/// in every positive-weight context, `x` puts at least as much mass as `y`
/// on every upper set of the preference, strictly more somewhere.
pub fn fsd_dominates<G: PreferenceGame + ?Sized>(
    game: &G,
    player: usize,
    others: &[MixedStrategy],
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> Result<bool> {
    crate::game::check_others(game, player, others)?;
    let m = game.action_counts()[player];
    if x.len() != m || y.len() != m {
        return Err(CogError::validation("strategy dimension mismatch"));
    }
    const TOL: f64 = 1e-12;
    let mut strict = false;
    let mut ok = true;
    crate::game::for_each_weighted_context(&game.context_counts(player), others, |ctx, _| {
        let vote = game.context_vote(player, ctx);
        for (_, b) in vote.iter() {
            let r = b.ranking();
            let (mut cx, mut cy) = (0.0, 0.0);
            for tier in r.tiers() {
                for &a in tier {
                    cx += x[a];
                    cy += y[a];
                }
                if cx < cy - TOL {
                    ok = false;
                }
                if cx > cy + TOL {
                    strict = true;
                }
            }
        }
    });
    Ok(ok && strict)
}
