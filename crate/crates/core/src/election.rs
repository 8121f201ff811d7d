//! The Lost-at-Sea runoff election as a four-player context-ordinal game.
//!
//! Each participant picks a willingness-to-lead (`wtl`, 0..=10) and a strict
//! ranking of the other three. The two highest `wtl` values (ties broken
//! uniformly) become candidates; the two non-candidates each back whichever
//! candidate they rank higher, and a split vote is a fair coin.

use std::borrow::Cow;
use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::br::{categorical, stochastic_votes, Electorate, EXPANSION_CAP};
use crate::error::{CogError, Result};
use crate::game::{CardinalGame, PreferenceGame};
use crate::metrics::{PlayerVerdict, VerificationReport, Witness};
use crate::population::{Ballot, BallotKind};
use crate::preference::PreferenceRelation;
use crate::rules::{BestResponseSet, Rule};
use crate::solvers::{lle_solve, LleConfig};
use crate::strategy::{for_each_profile, MixedStrategy, StrategyProfile};

pub const PARTICIPANTS: usize = 4;
pub const MAX_WTL: u8 = 10;
pub const VOTE_ORDERS: usize = 6;
pub const NUM_ACTIONS: usize = (MAX_WTL as usize + 1) * VOTE_ORDERS;

/// Probability of each participant being elected.
pub type OutcomeLottery = [f64; PARTICIPANTS];

/// Lexicographic permutations of three slots.
const PERMS: [[usize; 3]; VOTE_ORDERS] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn others_of(player: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for p in 0..PARTICIPANTS {
        if p != player {
            out[k] = p;
            k += 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ElectionAction {
    pub wtl: u8,
    /// The other three participants, most preferred first.
    pub vote: [usize; 3],
}

impl ElectionAction {
    pub fn new(player: usize, wtl: u8, vote: [usize; 3]) -> Result<Self> {
        let a = Self { wtl, vote };
        a.validate(player)?;
        Ok(a)
    }

    fn validate(&self, player: usize) -> Result<()> {
        if self.wtl > MAX_WTL {
            return Err(CogError::validation(format!("wtl {} outside 0..=10", self.wtl)));
        }
        let mut sorted = self.vote;
        sorted.sort_unstable();
        if sorted != others_of(player) {
            return Err(CogError::validation(format!(
                "vote {:?} of participant {player} must rank exactly the other three",
                self.vote
            )));
        }
        Ok(())
    }

    /// `wtl * 6 + lexicographic index of the vote order`.
    pub fn index(&self, player: usize) -> usize {
        let others = others_of(player);
        let slots = self
            .vote
            .map(|p| others.iter().position(|&o| o == p).expect("validated vote"));
        let perm = PERMS.iter().position(|q| *q == slots).expect("validated vote");
        self.wtl as usize * VOTE_ORDERS + perm
    }

    pub fn from_index(player: usize, index: usize) -> Result<Self> {
        if index >= NUM_ACTIONS {
            return Err(CogError::validation(format!("action index {index} outside 0..66")));
        }
        let others = others_of(player);
        let slots = PERMS[index % VOTE_ORDERS];
        Ok(Self {
            wtl: (index / VOTE_ORDERS) as u8,
            vote: slots.map(|s| others[s]),
        })
    }
}

/// Candidate pairs with probabilities under uniform tie-breaking of `wtl`.
fn candidate_pairs(wtl: [u8; PARTICIPANTS]) -> Vec<((usize, usize), f64)> {
    let mut order: [usize; PARTICIPANTS] = [0, 1, 2, 3];
    order.sort_by(|&a, &b| wtl[b].cmp(&wtl[a]));
    let top = wtl[order[0]];
    let block = |v: u8| -> Vec<usize> { (0..PARTICIPANTS).filter(|&p| wtl[p] == v).collect() };
    let first = block(top);
    if first.len() >= 2 {
        // Uniform order within the block: every pair of it is equally likely.
        let k = first.len();
        let p = 2.0 / (k * (k - 1)) as f64;
        let mut out = Vec::new();
        for x in 0..k {
            for y in (x + 1)..k {
                out.push(((first[x], first[y]), p));
            }
        }
        out
    } else {
        let second = block(wtl[order[1]]);
        let p = 1.0 / second.len() as f64;
        second.into_iter().map(|s| ((first[0], s), p)).collect()
    }
}

fn runoff(actions: &[ElectionAction; PARTICIPANTS], c1: usize, c2: usize, p: f64, out: &mut OutcomeLottery) {
    let mut for_c1 = 0;
    for v in 0..PARTICIPANTS {
        if v == c1 || v == c2 {
            continue;
        }
        let vote = &actions[v].vote;
        let r1 = vote.iter().position(|&x| x == c1).expect("valid vote");
        let r2 = vote.iter().position(|&x| x == c2).expect("valid vote");
        if r1 < r2 {
            for_c1 += 1;
        }
    }
    match for_c1 {
        2 => out[c1] += p,
        0 => out[c2] += p,
        _ => {
            out[c1] += 0.5 * p;
            out[c2] += 0.5 * p;
        }
    }
}

/// Exact distribution of the elected participant.
pub fn outcome_distribution(actions: &[ElectionAction; PARTICIPANTS]) -> OutcomeLottery {
    let mut out = [0.0; PARTICIPANTS];
    for ((c1, c2), p) in candidate_pairs(actions.map(|a| a.wtl)) {
        runoff(actions, c1, c2, p, &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElectionRecord {
    pub id: String,
    pub names: Vec<String>,
    pub actions: Vec<ElectionAction>,
    /// Per participant: all four participants, most preferred first.
    pub prefs: Vec<[usize; PARTICIPANTS]>,
}

impl ElectionRecord {
    pub fn new(
        id: impl Into<String>,
        names: Vec<String>,
        actions: Vec<ElectionAction>,
        prefs: Vec<[usize; PARTICIPANTS]>,
    ) -> Result<Self> {
        if names.len() != PARTICIPANTS || actions.len() != PARTICIPANTS || prefs.len() != PARTICIPANTS {
            return Err(CogError::validation("an election has exactly four participants"));
        }
        for (i, a) in actions.iter().enumerate() {
            a.validate(i)?;
        }
        for p in &prefs {
            let mut s = *p;
            s.sort_unstable();
            if s != [0, 1, 2, 3] {
                return Err(CogError::validation(format!("pref {p:?} is not a permutation")));
            }
        }
        Ok(Self {
            id: id.into(),
            names,
            actions,
            prefs,
        })
    }

    pub fn action_array(&self) -> [ElectionAction; PARTICIPANTS] {
        [self.actions[0], self.actions[1], self.actions[2], self.actions[3]]
    }

    /// The recorded pure profile of action indices.
    pub fn profile(&self) -> Vec<usize> {
        self.actions.iter().enumerate().map(|(i, a)| a.index(i)).collect()
    }

    pub fn pure_profile(&self) -> StrategyProfile {
        StrategyProfile::new(
            self.profile()
                .into_iter()
                .map(|a| MixedStrategy::pure(NUM_ACTIONS, a))
                .collect(),
        )
    }

    pub fn game(&self) -> ElectionGame {
        election_cog(self)
    }
}

/// The election COG: participants rank their own actions by `pref` over the
/// (stochastic) elected participant each action produces.
#[derive(Clone, Debug)]
pub struct ElectionGame {
    counts: Vec<usize>,
    prefs: Vec<PreferenceRelation>,
    /// `better[i][o][o']`: 1 when `i` prefers `o` to `o'`, 0.5 on ties.
    better: Vec<[[f64; PARTICIPANTS]; PARTICIPANTS]>,
}

pub fn election_cog(record: &ElectionRecord) -> ElectionGame {
    ElectionGame::new(
        record
            .prefs
            .iter()
            .map(|p| PreferenceRelation::from_order(p).expect("validated pref"))
            .collect(),
    )
}

impl ElectionGame {
    /// Preferences over the elected participant, one per participant; ties
    /// are allowed.
    pub fn new(prefs: Vec<PreferenceRelation>) -> Self {
        assert_eq!(prefs.len(), PARTICIPANTS);
        let better = prefs
            .iter()
            .map(|p| {
                let mut s = [[0.0; PARTICIPANTS]; PARTICIPANTS];
                for (o, row) in s.iter_mut().enumerate() {
                    for (o2, v) in row.iter_mut().enumerate() {
                        *v = match p.compare(o, o2) {
                            std::cmp::Ordering::Greater => 1.0,
                            std::cmp::Ordering::Equal => 0.5,
                            std::cmp::Ordering::Less => 0.0,
                        };
                    }
                }
                s
            })
            .collect();
        Self {
            counts: vec![NUM_ACTIONS; PARTICIPANTS],
            prefs,
            better,
        }
    }

    pub fn preference(&self, player: usize) -> &PreferenceRelation {
        &self.prefs[player]
    }

    fn joint(player: usize, own: usize, context: &[usize]) -> [ElectionAction; PARTICIPANTS] {
        let mut out = [ElectionAction { wtl: 0, vote: [0; 3] }; PARTICIPANTS];
        let mut k = 0;
        for (p, slot) in out.iter_mut().enumerate() {
            let idx = if p == player {
                own
            } else {
                k += 1;
                context[k - 1]
            };
            *slot = ElectionAction::from_index(p, idx).expect("index in range");
        }
        out
    }

    /// Outcome lottery of each own action in a context.
    pub fn context_lotteries(&self, player: usize, context: &[usize]) -> Vec<OutcomeLottery> {
        (0..NUM_ACTIONS)
            .map(|a| outcome_distribution(&Self::joint(player, a, context)))
            .collect()
    }

    fn pairwise(&self, player: usize, l: &OutcomeLottery, r: &OutcomeLottery) -> f64 {
        let s = &self.better[player];
        let mut v = 0.0;
        for o in 0..PARTICIPANTS {
            for o2 in 0..PARTICIPANTS {
                v += l[o] * r[o2] * s[o][o2];
            }
        }
        v
    }

    /// Expected Borda score of every action: with independent outcomes,
    /// `E[score(a)] = sum_{b != a} P(a > b) + P(a ~ b) / 2 = L_a S T - 1/2`.
    fn expected_borda(&self, player: usize, lotteries: &[OutcomeLottery]) -> Vec<f64> {
        let mut total = [0.0; PARTICIPANTS];
        for l in lotteries {
            for (t, v) in total.iter_mut().zip(l) {
                *t += v;
            }
        }
        lotteries
            .iter()
            .map(|l| self.pairwise(player, l, &total) - 0.5)
            .collect()
    }

    /// The Borda-induced normal-form game over all `66^4` profiles.
    pub fn borda_nfg(&self) -> CardinalGame {
        let n = PARTICIPANTS;
        let total: usize = NUM_ACTIONS.pow(n as u32);
        let decoded: Vec<Vec<ElectionAction>> = (0..n)
            .map(|p| {
                (0..NUM_ACTIONS)
                    .map(|a| ElectionAction::from_index(p, a).expect("index in range"))
                    .collect()
            })
            .collect();
        // Distinct lotteries are few; store an index per profile.
        let mut table: Vec<OutcomeLottery> = Vec::new();
        let mut lookup: HashMap<[u64; PARTICIPANTS], u16> = HashMap::new();
        let mut ids = vec![0u16; total];
        let mut flat = 0;
        for_each_profile(&self.counts, |prof| {
            let acts = [
                decoded[0][prof[0]],
                decoded[1][prof[1]],
                decoded[2][prof[2]],
                decoded[3][prof[3]],
            ];
            let l = outcome_distribution(&acts);
            let key = l.map(f64::to_bits);
            let id = *lookup.entry(key).or_insert_with(|| {
                table.push(l);
                (table.len() - 1) as u16
            });
            ids[flat] = id;
            flat += 1;
        });
        let mut payoffs = Vec::with_capacity(n);
        for i in 0..n {
            let stride = NUM_ACTIONS.pow((n - 1 - i) as u32);
            let block = stride * NUM_ACTIONS;
            let mut u = vec![0.0; total];
            let s = &self.better[i];
            for start in (0..total).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    let mut t = [0.0; PARTICIPANTS];
                    for a in 0..NUM_ACTIONS {
                        let l = &table[ids[base + a * stride] as usize];
                        for (tv, lv) in t.iter_mut().zip(l) {
                            *tv += lv;
                        }
                    }
                    let mut st = [0.0; PARTICIPANTS];
                    for o in 0..PARTICIPANTS {
                        st[o] = (0..PARTICIPANTS).map(|o2| s[o][o2] * t[o2]).sum();
                    }
                    for a in 0..NUM_ACTIONS {
                        let idx = base + a * stride;
                        let l = &table[ids[idx] as usize];
                        u[idx] = (0..PARTICIPANTS).map(|o| l[o] * st[o]).sum::<f64>() - 0.5;
                    }
                }
            }
            payoffs.push(u);
        }
        CardinalGame::new(self.counts.clone(), payoffs).expect("consistent dimensions")
    }

    fn context_seed(player: usize, context: &[usize]) -> u64 {
        context
            .iter()
            .fold(player as u64 + 1, |h, &c| h.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c as u64 + 1))
    }
}

fn is_affine_in_position(scores: &[f64]) -> Option<(f64, f64)> {
    let m = scores.len();
    if m < 2 {
        return None;
    }
    let slope = scores[m - 2] - scores[m - 1];
    let offset = scores[m - 1];
    let tol = 1e-12 * scores.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    scores
        .iter()
        .enumerate()
        .all(|(k, &s)| (s - (offset + slope * (m - 1 - k) as f64)).abs() <= tol)
        .then_some((offset, slope))
}

impl PreferenceGame for ElectionGame {
    fn action_counts(&self) -> &[usize] {
        &self.counts
    }

    fn context_vote(&self, player: usize, context: &[usize]) -> Cow<'_, [(f64, Ballot)]> {
        let lotteries: Vec<Vec<f64>> = self
            .context_lotteries(player, context)
            .into_iter()
            .map(|l| l.to_vec())
            .collect();
        let sv = stochastic_votes(
            &lotteries,
            &self.prefs[player],
            1.0,
            EXPANSION_CAP,
            Self::context_seed(player, context),
        )
        .expect("valid outcome lotteries");
        Cow::Owned(sv.ballots)
    }

    fn ballot_kind(&self, _player: usize) -> BallotKind {
        BallotKind::Ranking
    }

    fn context_margins(&self, player: usize, context: &[usize]) -> Vec<f64> {
        let lot = self.context_lotteries(player, context);
        let m = NUM_ACTIONS;
        let mut out = vec![0.0; m * m];
        for a in 0..m {
            for b in (a + 1)..m {
                // P(a > b) - P(b > a) = 2 * (P(a > b) + P(a ~ b) / 2) - 1
                let v = 2.0 * self.pairwise(player, &lot[a], &lot[b]) - 1.0;
                out[a * m + b] = v;
                out[b * m + a] = -v;
            }
        }
        out
    }

    fn context_positional(&self, player: usize, context: &[usize], scores: &[f64]) -> Vec<f64> {
        match is_affine_in_position(scores) {
            Some((offset, slope)) => {
                let lot = self.context_lotteries(player, context);
                self.expected_borda(player, &lot)
                    .into_iter()
                    .map(|b| offset + slope * b)
                    .collect()
            }
            None => {
                let mut out = vec![0.0; NUM_ACTIONS];
                for (w, ballot) in self.context_vote(player, context).iter() {
                    for (o, s) in out.iter_mut().zip(ballot.ranking().positional_scores(scores)) {
                        *o += w * s;
                    }
                }
                out
            }
        }
    }
}

/// Checks each recorded action against the player's best response to the
/// others' recorded actions. Under lottery rules a recorded action passes
/// when it lies in the lottery's support.
pub fn verify_recorded_election(record: &ElectionRecord, rule: &Rule) -> Result<VerificationReport> {
    let game = election_cog(record);
    let profile = record.profile();
    let mut players = Vec::with_capacity(PARTICIPANTS);
    for i in 0..PARTICIPANTS {
        let context = crate::game::context_of(&profile, i);
        let others: Vec<MixedStrategy> = context.iter().map(|&a| MixedStrategy::pure(NUM_ACTIONS, a)).collect();
        let br = Electorate::from_game(&game, i, &others, rule, false)?.best_response()?;
        let own = profile[i];
        let (ok, eps) = match &br {
            BestResponseSet::SupportSet { winners, .. } => {
                (winners.contains(&own), br.distance(&MixedStrategy::pure(NUM_ACTIONS, own)))
            }
            BestResponseSet::ExplicitLottery(l) => (l[own] > crate::strategy::SIMPLEX_TOL, 1.0 - l[own]),
        };
        let witness = (!ok).then(|| {
            let winners = br.winners();
            // The most likely winning action, lowest index on ties.
            let best = match &br {
                BestResponseSet::ExplicitLottery(l) => winners
                    .iter()
                    .copied()
                    .fold(winners[0], |b, a| if l[a] > l[b] + 1e-12 { a } else { b }),
                _ => winners[0],
            };
            Witness::Action(best)
        });
        players.push(PlayerVerdict {
            in_best_response: ok,
            epsilon: eps,
            witness,
        });
    }
    Ok(VerificationReport { players })
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    election_id: String,
    participant: String,
    wtl: i64,
    vote_rank1: String,
    vote_rank2: String,
    vote_rank3: String,
    pref_rank1: String,
    pref_rank2: String,
    pref_rank3: String,
    pref_rank4: String,
}

/// Records grouped by `election_id` in order of first appearance.
pub fn load_elections_csv(path: impl AsRef<Path>) -> Result<Vec<ElectionRecord>> {
    let path = path.as_ref();
    let text = crate::io::read_text(path)?;
    read_elections(text.as_bytes(), &path.display().to_string())
}

pub fn read_elections(reader: impl std::io::Read, source: &str) -> Result<Vec<ElectionRecord>> {
    let parse_err = |line: u64, message: String| CogError::Parse {
        path: source.to_string(),
        line: line as usize,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut groups: Vec<(String, Vec<(u64, Row)>)> = Vec::new();
    for res in rdr.deserialize::<Row>() {
        let row = res.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        // Data rows start on line 2.
        let line = groups.iter().map(|g| g.1.len() as u64).sum::<u64>() + 2;
        match groups.iter_mut().find(|g| g.0 == row.election_id) {
            Some(g) => g.1.push((line, row)),
            None => groups.push((row.election_id.clone(), vec![(line, row)])),
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (id, rows) in groups {
        let first_line = rows[0].0;
        if rows.len() != PARTICIPANTS {
            return Err(parse_err(
                first_line,
                format!("election {id} has {} participants, expected 4", rows.len()),
            ));
        }
        let names: Vec<String> = rows.iter().map(|r| r.1.participant.clone()).collect();
        let lookup = |line: u64, name: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| parse_err(line, format!("unknown participant {name:?} in election {id}")))
        };
        let mut actions = Vec::new();
        let mut prefs = Vec::new();
        for (i, (line, r)) in rows.iter().enumerate() {
            if !(0..=MAX_WTL as i64).contains(&r.wtl) {
                return Err(parse_err(*line, format!("wtl {} outside 0..=10", r.wtl)));
            }
            let vote = [
                lookup(*line, &r.vote_rank1)?,
                lookup(*line, &r.vote_rank2)?,
                lookup(*line, &r.vote_rank3)?,
            ];
            let action = ElectionAction::new(i, r.wtl as u8, vote)
                .map_err(|e| parse_err(*line, e.to_string()))?;
            let pref = [
                lookup(*line, &r.pref_rank1)?,
                lookup(*line, &r.pref_rank2)?,
                lookup(*line, &r.pref_rank3)?,
                lookup(*line, &r.pref_rank4)?,
            ];
            let mut s = pref;
            s.sort_unstable();
            if s != [0, 1, 2, 3] {
                return Err(parse_err(*line, "pref is not a permutation of the participants".into()));
            }
            actions.push(action);
            prefs.push(pref);
        }
        out.push(
            ElectionRecord::new(id, names, actions, prefs)
                .map_err(|e| parse_err(first_line, e.to_string()))?,
        );
    }
    Ok(out)
}

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");

pub fn table1() -> ElectionRecord {
    read_elections(TABLE1_CSV.as_bytes(), "table1.csv").expect("bundled data")[0].clone()
}

pub fn table2() -> ElectionRecord {
    read_elections(TABLE2_CSV.as_bytes(), "table2.csv").expect("bundled data")[0].clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct ElectionSolution {
    pub profile: StrategyProfile,
    pub winner_frequencies: Vec<f64>,
    pub num_simulations: usize,
}

/// Samples pure profiles from `x` and one winner per profile.
pub fn simulate_elections(x: &StrategyProfile, num: usize, seed: u64) -> Result<Vec<f64>> {
    x.check_dims(&[NUM_ACTIONS; PARTICIPANTS])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; PARTICIPANTS];
    for _ in 0..num {
        let mut acts = [ElectionAction { wtl: 0, vote: [0; 3] }; PARTICIPANTS];
        for (p, a) in acts.iter_mut().enumerate() {
            *a = ElectionAction::from_index(p, categorical(&mut rng, x.player(p).probs()))?;
        }
        let lot = outcome_distribution(&acts);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut winner = PARTICIPANTS - 1;
        for (o, &p) in lot.iter().enumerate() {
            acc += p;
            if u < acc {
                winner = o;
                break;
            }
        }
        counts[winner] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / num.max(1) as f64).collect())
}

/// Limiting logit equilibrium of the Borda-induced game, then simulated
/// winner frequencies under it.
pub fn solve_election(
    record: &ElectionRecord,
    config: &LleConfig,
    num_simulations: usize,
    seed: u64,
) -> Result<ElectionSolution> {
    let nfg = election_cog(record).borda_nfg();
    let profile = lle_solve(&nfg, config)?;
    drop(nfg);
    let winner_frequencies = simulate_elections(&profile, num_simulations, seed)?;
    Ok(ElectionSolution {
        profile,
        winner_frequencies,
        num_simulations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(p: usize, wtl: u8, vote: [usize; 3]) -> ElectionAction {
        ElectionAction::new(p, wtl, vote).unwrap()
    }

    #[test]
    fn index_round_trip() {
        for p in 0..PARTICIPANTS {
            for a in 0..NUM_ACTIONS {
                let e = ElectionAction::from_index(p, a).unwrap();
                assert_eq!(e.index(p), a);
            }
        }
    }

    #[test]
    fn three_way_top_tie() {
        let pairs = candidate_pairs([7, 7, 7, 1]);
        assert_eq!(pairs.len(), 3);
        for (_, p) in pairs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_candidates_of_table_two() {
        let r = table2();
        let pairs = candidate_pairs(r.action_array().map(|a| a.wtl));
        assert_eq!(pairs, vec![((1, 3), 1.0)]);
        assert_eq!(outcome_distribution(&r.action_array()), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn candidate_vote_is_ignored() {
        let base = [act(0, 9, [1, 2, 3]), act(1, 8, [0, 2, 3]), act(2, 1, [0, 1, 3]), act(3, 0, [1, 0, 2])];
        let mut flipped = base;
        flipped[0] = act(0, 9, [3, 2, 1]);
        assert_eq!(outcome_distribution(&base), outcome_distribution(&flipped));
        // Voters 2 and 3 split: coin flip.
        assert_eq!(outcome_distribution(&base), [0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn closed_form_borda_matches_pairwise_oracle() {
        let r = table1();
        let g = election_cog(&r);
        let scores = crate::rules::borda_vector(NUM_ACTIONS);
        let prof = r.profile();
        let mut exact_contexts = 0;
        for i in 0..PARTICIPANTS {
            let ctx: Vec<usize> = (0..PARTICIPANTS).filter(|&k| k != i).map(|k| prof[k]).collect();
            let fast = g.context_positional(i, &ctx, &scores);
            let lot = g.context_lotteries(i, &ctx);
            let pref = g.preference(i);
            for a in 0..NUM_ACTIONS {
                let mut oracle = 0.0;
                for b in (0..NUM_ACTIONS).filter(|&b| b != a) {
                    for o in 0..PARTICIPANTS {
                        for o2 in 0..PARTICIPANTS {
                            let w = lot[a][o] * lot[b][o2];
                            oracle += match pref.compare(o, o2) {
                                std::cmp::Ordering::Greater => w,
                                std::cmp::Ordering::Equal => 0.5 * w,
                                std::cmp::Ordering::Less => 0.0,
                            };
                        }
                    }
                }
                assert!((fast[a] - oracle).abs() < 1e-9, "{} vs {oracle}", fast[a]);
            }
            let lotteries: Vec<Vec<f64>> = lot.iter().map(|l| l.to_vec()).collect();
            let sv = stochastic_votes(&lotteries, pref, 1.0, EXPANSION_CAP, 0).unwrap();
            if sv.monte_carlo_samples.is_none() {
                exact_contexts += 1;
                let mut slow = vec![0.0; NUM_ACTIONS];
                for (w, b) in &sv.ballots {
                    for (o, s) in slow.iter_mut().zip(b.ranking().positional_scores(&scores)) {
                        *o += w * s;
                    }
                }
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
            }
        }
        assert!(exact_contexts >= 1);
    }

    #[test]
    fn bundled_tables_parse() {
        let t1 = table1();
        assert_eq!(t1.names, ["Pig", "Koala", "Chicken", "Lion"]);
        assert_eq!(t1.actions[1].wtl, 9);
        let t2 = table2();
        assert_eq!(t2.names, ["Bear", "Rabbit", "Dog", "Frog"]);
        assert!(read_elections("election_id,participant,wtl,vote_rank1,vote_rank2,vote_rank3,pref_rank1,pref_rank2,pref_rank3,pref_rank4\n".as_bytes(), "empty").unwrap().is_empty());
    }
}
