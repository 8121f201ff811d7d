//! Total weak orders over a player's actions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{CogError, Result};

/// A total weak order over actions `0..m`, stored as indifference tiers from
/// most to least preferred.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct PreferenceRelation {
    tiers: Vec<Vec<usize>>,
    #[serde(skip)]
    tier_of: Vec<usize>,
}

impl PreferenceRelation {
    /// Builds a relation from tiers. Tiers must be non-empty, disjoint and
    /// jointly cover `0..m` where `m` is the total number of listed actions.
    pub fn from_tiers(tiers: Vec<Vec<usize>>) -> Result<Self> {
        let m: usize = tiers.iter().map(Vec::len).sum();
        let mut tier_of = vec![usize::MAX; m];
        let mut tiers = tiers;
        for (t, tier) in tiers.iter_mut().enumerate() {
            if tier.is_empty() {
                return Err(CogError::validation(format!("tier {t} is empty")));
            }
            tier.sort_unstable();
            for &a in tier.iter() {
                if a >= m {
                    return Err(CogError::validation(format!(
                        "action {a} outside 0..{m} (gap in tiers)"
                    )));
                }
                if tier_of[a] != usize::MAX {
                    return Err(CogError::validation(format!(
                        "action {a} appears in more than one tier"
                    )));
                }
                tier_of[a] = t;
            }
        }
        Ok(Self { tiers, tier_of })
    }

    /// Strict order, best first.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        Self::from_tiers(order.iter().map(|&a| vec![a]).collect())
    }

    /// Total indifference over `m` actions.
    pub fn indifferent(m: usize) -> Self {
        assert!(m > 0, "preference over zero actions");
        Self {
            tiers: vec![(0..m).collect()],
            tier_of: vec![0; m],
        }
    }

    /// `top` strictly first, every other action tied below it.
    pub fn usurper(m: usize, top: usize) -> Self {
        assert!(top < m);
        if m == 1 {
            return Self::indifferent(1);
        }
        let rest: Vec<usize> = (0..m).filter(|&a| a != top).collect();
        let mut tier_of = vec![1; m];
        tier_of[top] = 0;
        Self {
            tiers: vec![vec![top], rest],
            tier_of,
        }
    }

    /// Ranks actions by descending value. Values equal after rounding to
    /// 12 significant digits share a tier.
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        let keys: Vec<f64> = values.iter().map(|&v| round_sig12(v)).collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
        let mut tiers: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NAN;
        for a in order {
            if tiers.is_empty() || keys[a] != last {
                tiers.push(vec![a]);
                last = keys[a];
            } else {
                tiers.last_mut().unwrap().push(a);
            }
        }
        Self::from_tiers(tiers).expect("tiers built from a permutation")
    }

    /// Ranks actions by ascending value (lower is better).
    pub fn from_values_ascending(values: &[f64]) -> Self {
        let negated: Vec<f64> = values.iter().map(|v| -v).collect();
        Self::from_values(&negated)
    }

    pub fn num_actions(&self) -> usize {
        self.tier_of.len()
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    /// Tier index of `action` (0 = most preferred).
    pub fn tier_of(&self, action: usize) -> usize {
        self.tier_of[action]
    }

    /// `Greater` when `a` is strictly preferred to `b`.
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        self.tier_of[b].cmp(&self.tier_of[a])
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.compare(a, b) == Ordering::Greater
    }

    pub fn top_tier(&self) -> &[usize] {
        &self.tiers[0]
    }

    pub fn is_strict(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }

    /// Per-action positional score. A tier spanning slots `p..p+k` receives the
    /// mean of `scores[p..p+k]`.
    pub fn positional_scores(&self, scores: &[f64]) -> Vec<f64> {
        assert_eq!(scores.len(), self.num_actions());
        let mut out = vec![0.0; self.num_actions()];
        let mut slot = 0;
        for tier in &self.tiers {
            let span = &scores[slot..slot + tier.len()];
            let mean = span.iter().sum::<f64>() / tier.len() as f64;
            for &a in tier {
                out[a] = mean;
            }
            slot += tier.len();
        }
        out
    }

    /// Renames actions: action `a` becomes `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let tiers = self
            .tiers
            .iter()
            .map(|t| t.iter().map(|&a| perm[a]).collect())
            .collect();
        Self::from_tiers(tiers).expect("permutation preserves validity")
    }
}

impl TryFrom<Vec<Vec<usize>>> for PreferenceRelation {
    type Error = CogError;
    fn try_from(tiers: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_tiers(tiers)
    }
}

impl From<PreferenceRelation> for Vec<Vec<usize>> {
    fn from(p: PreferenceRelation) -> Self {
        p.tiers
    }
}

/// Rounds to 12 significant decimal digits.
pub(crate) fn round_sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}
