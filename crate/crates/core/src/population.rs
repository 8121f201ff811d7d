//! Ballots and weighted vote populations.

use std::borrow::Cow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{CogError, Result};
use crate::preference::PreferenceRelation;
use crate::strategy::SIMPLEX_TOL;

/// One vote over `m` candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ballot {
    Ranking(PreferenceRelation),
    Scores(Vec<f64>),
    /// Grade index per candidate on the scale `0..levels` (higher is better).
    Grades { grades: Vec<usize>, levels: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallotKind {
    Ranking,
    Scores,
    Grades,
}

impl BallotKind {
    pub fn name(self) -> &'static str {
        match self {
            BallotKind::Ranking => "ranking",
            BallotKind::Scores => "score",
            BallotKind::Grades => "grade",
        }
    }
}

#[derive(Hash, PartialEq, Eq)]
enum BallotKey {
    Ranking(PreferenceRelation),
    Scores(Vec<u64>),
    Grades(Vec<usize>, usize),
}

impl Ballot {
    pub fn kind(&self) -> BallotKind {
        match self {
            Ballot::Ranking(_) => BallotKind::Ranking,
            Ballot::Scores(_) => BallotKind::Scores,
            Ballot::Grades { .. } => BallotKind::Grades,
        }
    }

    pub fn num_candidates(&self) -> usize {
        match self {
            Ballot::Ranking(p) => p.num_actions(),
            Ballot::Scores(s) => s.len(),
            Ballot::Grades { grades, .. } => grades.len(),
        }
    }

    /// The weak order this ballot expresses. Scores tie after rounding to
    /// 12 significant digits.
    pub fn ranking(&self) -> Cow<'_, PreferenceRelation> {
        match self {
            Ballot::Ranking(p) => Cow::Borrowed(p),
            Ballot::Scores(s) => Cow::Owned(PreferenceRelation::from_values(s)),
            Ballot::Grades { grades, .. } => {
                let v: Vec<f64> = grades.iter().map(|&g| g as f64).collect();
                Cow::Owned(PreferenceRelation::from_values(&v))
            }
        }
    }

    /// A ballot of the same kind putting `top` strictly first and every other
    /// candidate tied below.
    pub fn usurper_like(&self, top: usize) -> Ballot {
        let m = self.num_candidates();
        match self {
            Ballot::Ranking(_) => Ballot::Ranking(PreferenceRelation::usurper(m, top)),
            Ballot::Scores(_) => {
                let mut s = vec![0.0; m];
                s[top] = 1.0;
                Ballot::Scores(s)
            }
            Ballot::Grades { levels, .. } => {
                let mut g = vec![0; m];
                g[top] = levels - 1;
                Ballot::Grades {
                    grades: g,
                    levels: *levels,
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Ballot::Ranking(_) => Ok(()),
            Ballot::Scores(s) => {
                if s.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(CogError::validation("non-finite score in ballot"))
                }
            }
            Ballot::Grades { grades, levels } => {
                if *levels < 2 {
                    return Err(CogError::validation("grade scale needs at least 2 levels"));
                }
                match grades.iter().find(|&&g| g >= *levels) {
                    Some(g) => Err(CogError::validation(format!(
                        "grade {g} outside scale 0..{levels}"
                    ))),
                    None => Ok(()),
                }
            }
        }
    }

    fn key(&self) -> BallotKey {
        match self {
            Ballot::Ranking(p) => BallotKey::Ranking(p.clone()),
            Ballot::Scores(s) => BallotKey::Scores(s.iter().map(|v| v.to_bits()).collect()),
            Ballot::Grades { grades, levels } => BallotKey::Grades(grades.clone(), *levels),
        }
    }
}

/// A finitely supported lottery over ballots of one kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotePopulation {
    candidates: usize,
    entries: Vec<(f64, Ballot)>,
}

impl VotePopulation {
    pub fn new(candidates: usize, entries: Vec<(f64, Ballot)>) -> Result<Self> {
        if candidates == 0 {
            return Err(CogError::validation("population over zero candidates"));
        }
        let mut sum = 0.0;
        let mut kind = None;
        for (w, b) in &entries {
            if !w.is_finite() || *w < 0.0 {
                return Err(CogError::validation(format!("invalid ballot weight {w}")));
            }
            if b.num_candidates() != candidates {
                return Err(CogError::validation(format!(
                    "ballot over {} candidates in a population over {candidates}",
                    b.num_candidates()
                )));
            }
            b.validate()?;
            match kind {
                None => kind = Some(b.kind()),
                Some(k) if k != b.kind() => {
                    return Err(CogError::validation("population mixes ballot kinds"))
                }
                _ => {}
            }
            sum += w;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(CogError::validation(format!(
                "ballot weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            candidates,
            entries,
        })
    }

    pub(crate) fn new_unchecked(candidates: usize, entries: Vec<(f64, Ballot)>) -> Self {
        Self {
            candidates,
            entries,
        }
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn entries(&self) -> &[(f64, Ballot)] {
        &self.entries
    }

    pub fn kind(&self) -> Option<BallotKind> {
        self.entries.first().map(|(_, b)| b.kind())
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(w, _)| w).sum()
    }

    /// Sums the weights of identical ballots and drops zero-weight entries.
    /// First-occurrence order is kept.
    pub fn merged(&self) -> Self {
        let mut index: HashMap<BallotKey, usize> = HashMap::new();
        let mut out: Vec<(f64, Ballot)> = Vec::new();
        for (w, b) in &self.entries {
            if *w == 0.0 {
                continue;
            }
            match index.entry(b.key()) {
                std::collections::hash_map::Entry::Occupied(e) => out[*e.get()].0 += w,
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(out.len());
                    out.push((*w, b.clone()));
                }
            }
        }
        Self {
            candidates: self.candidates,
            entries: out,
        }
    }

    /// The same population with every ballot converted to its ranking.
    pub fn as_rankings(&self) -> Self {
        Self {
            candidates: self.candidates,
            entries: self
                .entries
                .iter()
                .map(|(w, b)| (*w, Ballot::Ranking(b.ranking().into_owned())))
                .collect(),
        }
    }
}
