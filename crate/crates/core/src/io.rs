//! JSON game and profile files, and CSV tables with round-tripping floats.

use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{CogError, Result};
use crate::game::{context_counts, CardinalGame, ContextOrdinalGame, ContextVote};
use crate::population::Ballot;
use crate::preference::PreferenceRelation;
use crate::strategy::{flat_index, for_each_profile, StrategyProfile};

/// A game file holds either context preferences or cardinal payoffs.
#[derive(Debug, Clone)]
pub enum GameSpec {
    Preferences(ContextOrdinalGame),
    Payoffs(CardinalGame),
}

impl GameSpec {
    pub fn action_counts(&self) -> &[usize] {
        match self {
            GameSpec::Preferences(g) => crate::game::PreferenceGame::action_counts(g),
            GameSpec::Payoffs(g) => g.action_counts(),
        }
    }

    /// Preference view; cardinal payoffs are ranked per slice.
    pub fn to_cog(&self) -> ContextOrdinalGame {
        match self {
            GameSpec::Preferences(g) => g.clone(),
            GameSpec::Payoffs(g) => crate::game::cog_from_cardinal(g),
        }
    }
}

/// Reads a whole file; I/O errors name the path.
pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

pub fn load_game(path: impl AsRef<Path>) -> Result<GameSpec> {
    parse_game(&read_text(path.as_ref())?)
}

fn bad(msg: impl Into<String>) -> CogError {
    CogError::validation(msg)
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("{what} must be a non-negative integer")))
}

fn as_usize_vec(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array")))?
        .iter()
        .map(|x| as_usize(x, what))
        .collect()
}

fn as_f64_vec(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| bad(format!("{what} must hold numbers"))))
        .collect()
}

/// Auto-detects `"preferences"` versus `"payoffs"`.
pub fn parse_game(text: &str) -> Result<GameSpec> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("preferences").is_some() {
        parse_preferences(&v).map(GameSpec::Preferences)
    } else if v.get("payoffs").is_some() {
        parse_payoffs(&v).map(GameSpec::Payoffs)
    } else {
        Err(bad("game file needs a `preferences` or `payoffs` field"))
    }
}

fn parse_ballot(v: &Value, m: usize) -> Result<Ballot> {
    if let Some(t) = v.get("tiers") {
        let tiers = t
            .as_array()
            .ok_or_else(|| bad("tiers must be an array of arrays"))?
            .iter()
            .map(|tier| as_usize_vec(tier, "tier"))
            .collect::<Result<Vec<_>>>()?;
        let p = PreferenceRelation::from_tiers(tiers)?;
        if p.num_actions() != m {
            return Err(bad(format!("tiers cover {} actions, expected {m}", p.num_actions())));
        }
        Ok(Ballot::Ranking(p))
    } else if let Some(s) = v.get("scores") {
        Ok(Ballot::Scores(as_f64_vec(s, "scores")?))
    } else if let Some(g) = v.get("grades") {
        let levels = v
            .get("levels")
            .ok_or_else(|| bad("grades need `levels`"))
            .and_then(|l| as_usize(l, "levels"))?;
        Ok(Ballot::Grades {
            grades: as_usize_vec(g, "grades")?,
            levels,
        })
    } else {
        Err(bad("preference entry needs tiers, scores, grades or lottery"))
    }
}

fn parse_preferences(v: &Value) -> Result<ContextOrdinalGame> {
    let counts = as_usize_vec(
        v.get("actions").ok_or_else(|| bad("missing `actions`"))?,
        "actions",
    )?;
    if let Some(n) = v.get("players") {
        if as_usize(n, "players")? != counts.len() {
            return Err(bad("`players` disagrees with `actions`"));
        }
    }
    let n = counts.len();
    let mut rho: Vec<Vec<Option<ContextVote>>> = (0..n)
        .map(|i| vec![None; context_counts(&counts, i).iter().product()])
        .collect();
    let entries = v["preferences"]
        .as_array()
        .ok_or_else(|| bad("`preferences` must be an array"))?;
    for (k, e) in entries.iter().enumerate() {
        let player = as_usize(e.get("player").ok_or_else(|| bad(format!("entry {k}: missing player")))?, "player")?;
        if player >= n {
            return Err(bad(format!("entry {k}: no player {player}")));
        }
        let ctx_counts = context_counts(&counts, player);
        let context = match e.get("context") {
            Some(c) => as_usize_vec(c, "context")?,
            None => Vec::new(),
        };
        if context.len() != ctx_counts.len() || context.iter().zip(&ctx_counts).any(|(a, m)| a >= m) {
            return Err(bad(format!("entry {k}: invalid context {context:?}")));
        }
        let m = counts[player];
        let vote: ContextVote = if let Some(l) = e.get("lottery") {
            l.as_array()
                .ok_or_else(|| bad("lottery must be an array"))?
                .iter()
                .map(|item| {
                    let w = item
                        .get("weight")
                        .and_then(Value::as_f64)
                        .ok_or_else(|| bad("lottery items need a numeric weight"))?;
                    Ok((w, parse_ballot(item, m)?))
                })
                .collect::<Result<_>>()?
        } else {
            vec![(1.0, parse_ballot(e, m)?)]
        };
        let slot = &mut rho[player][flat_index(&ctx_counts, &context)];
        if slot.is_some() {
            return Err(bad(format!("entry {k}: duplicate context {context:?} for player {player}")));
        }
        *slot = Some(vote);
    }
    let mut full = Vec::with_capacity(n);
    for (i, map) in rho.into_iter().enumerate() {
        let mut out = Vec::with_capacity(map.len());
        for (c, vote) in map.into_iter().enumerate() {
            out.push(vote.ok_or_else(|| bad(format!("player {i} is missing context {c}")))?);
        }
        full.push(out);
    }
    ContextOrdinalGame::new(counts, full)
}

fn flatten_nested(v: &Value, shape: &mut Vec<usize>, depth: usize, out: &mut Vec<f64>) -> Result<()> {
    match v {
        Value::Array(items) => {
            if shape.len() == depth {
                shape.push(items.len());
            } else if shape[depth] != items.len() {
                return Err(bad("ragged payoff array"));
            }
            for item in items {
                flatten_nested(item, shape, depth + 1, out)?;
            }
            Ok(())
        }
        Value::Number(x) => {
            if depth != shape.len() {
                return Err(bad("ragged payoff array"));
            }
            out.push(x.as_f64().ok_or_else(|| bad("payoff is not a finite number"))?);
            Ok(())
        }
        _ => Err(bad("payoffs must be numbers")),
    }
}

/// `payoffs[i]` is player `i`'s tensor, nested by player axis or flat
/// row-major when `actions` is given.
fn parse_payoffs(v: &Value) -> Result<CardinalGame> {
    let per_player = v["payoffs"]
        .as_array()
        .ok_or_else(|| bad("`payoffs` must be an array with one tensor per player"))?;
    let declared = match v.get("actions") {
        Some(a) => Some(as_usize_vec(a, "actions")?),
        None => None,
    };
    let mut counts: Option<Vec<usize>> = declared.clone();
    let mut tensors = Vec::with_capacity(per_player.len());
    for t in per_player {
        let mut shape = Vec::new();
        let mut flat = Vec::new();
        flatten_nested(t, &mut shape, 0, &mut flat)?;
        let shape = match (&declared, shape.len()) {
            (Some(d), 1) if d.len() > 1 => d.clone(),
            _ => shape,
        };
        match &counts {
            Some(c) if *c != shape => return Err(bad(format!("payoff shape {shape:?} disagrees with {c:?}"))),
            None => counts = Some(shape),
            _ => {}
        }
        tensors.push(flat);
    }
    let counts = counts.ok_or_else(|| bad("no payoff tensors"))?;
    if counts.len() != tensors.len() {
        return Err(bad(format!(
            "{} payoff tensors for a {}-player shape",
            tensors.len(),
            counts.len()
        )));
    }
    CardinalGame::new(counts, tensors)
}

fn nest(flat: &[f64], shape: &[usize]) -> Value {
    if shape.len() <= 1 {
        return json!(flat);
    }
    let inner: usize = shape[1..].iter().product();
    Value::Array(
        (0..shape[0])
            .map(|k| nest(&flat[k * inner..(k + 1) * inner], &shape[1..]))
            .collect(),
    )
}

pub fn cardinal_to_json(game: &CardinalGame) -> Value {
    json!({
        "players": game.num_players(),
        "actions": game.action_counts(),
        "payoffs": (0..game.num_players())
            .map(|i| nest(game.payoff_tensor(i), game.action_counts()))
            .collect::<Vec<_>>(),
    })
}

fn ballot_json(b: &Ballot) -> Value {
    match b {
        Ballot::Ranking(p) => json!({ "tiers": p.tiers() }),
        Ballot::Scores(s) => json!({ "scores": s }),
        Ballot::Grades { grades, levels } => json!({ "grades": grades, "levels": levels }),
    }
}

pub fn cog_to_json(game: &ContextOrdinalGame) -> Value {
    let counts = crate::game::PreferenceGame::action_counts(game).to_vec();
    let mut prefs = Vec::new();
    for i in 0..counts.len() {
        for_each_profile(&context_counts(&counts, i), |ctx| {
            let vote = game.vote(i, ctx);
            let mut entry = if let [(_, b)] = vote.as_slice() {
                ballot_json(b)
            } else {
                json!({
                    "lottery": vote
                        .iter()
                        .map(|(w, b)| {
                            let mut o = ballot_json(b);
                            o["weight"] = json!(w);
                            o
                        })
                        .collect::<Vec<_>>()
                })
            };
            entry["player"] = json!(i);
            entry["context"] = json!(ctx);
            prefs.push(entry);
        });
    }
    json!({ "players": counts.len(), "actions": counts, "preferences": prefs })
}

/// Accepts `[[...], ...]` or `{"strategies": [[...], ...]}`.
pub fn parse_profile(text: &str) -> Result<StrategyProfile> {
    let v: Value = serde_json::from_str(text)?;
    let arr = match &v {
        Value::Array(_) => &v,
        Value::Object(o) => o
            .get("strategies")
            .or_else(|| o.get("profile"))
            .ok_or_else(|| bad("profile object needs `strategies`"))?,
        _ => return Err(bad("profile must be an array of strategies")),
    };
    let probs = arr
        .as_array()
        .ok_or_else(|| bad("profile must be an array of strategies"))?
        .iter()
        .map(|s| as_f64_vec(s, "strategy"))
        .collect::<Result<Vec<_>>>()?;
    StrategyProfile::from_vecs(probs)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<StrategyProfile> {
    parse_profile(&read_text(path.as_ref())?)
}

pub fn profile_to_json(x: &StrategyProfile) -> Value {
    json!({
        "strategies": x.strategies().iter().map(|s| s.probs().to_vec()).collect::<Vec<_>>()
    })
}

/// 17 significant digits: parsing the text recovers the exact bits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A header plus rows of text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    /// JSON array of objects. Integer, float and boolean cells become typed
    /// values and empty cells become `null`.
    pub fn to_json(&self) -> Value {
        let cell = |c: &String| -> Value {
            if c.is_empty() {
                Value::Null
            } else if let Ok(i) = c.parse::<i64>() {
                json!(i)
            } else if let Some(x) = c.parse::<f64>().ok().filter(|x| x.is_finite()) {
                json!(x)
            } else if let Ok(b) = c.parse::<bool>() {
                json!(b)
            } else {
                Value::String(c.clone())
            }
        };
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.header.iter().zip(r).map(|(h, c)| (h.clone(), cell(c))).collect()))
                .collect(),
        )
    }

    /// Parses a numeric column.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("no column {name}")))?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| bad(format!("{name}: {e}"))))
            .collect()
    }
}
