use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{CogError, Result};

pub const SIMPLEX_TOL: f64 = 1e-9;

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(CogError::validation("empty mixed strategy"));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(CogError::validation(format!(
                "mixed strategy has invalid entry {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(CogError::validation(format!(
                "mixed strategy sums to {sum}, expected 1"
            )));
        }
        Ok(Self(probs))
    }

    /// Normalizes a non-negative vector with positive sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(CogError::validation(
                "cannot normalize weights: need non-negative entries with positive sum",
            ));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn pure(m: usize, action: usize) -> Self {
        let mut v = vec![0.0; m];
        v[action] = 1.0;
        Self(v)
    }

    /// Uniform over `support`.
    pub fn uniform_on(m: usize, support: &[usize]) -> Self {
        let mut v = vec![0.0; m];
        let w = 1.0 / support.len() as f64;
        for &a in support {
            v[a] = w;
        }
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&a| self.0[a] > tol).collect()
    }

    pub fn l1_distance(&self, other: &MixedStrategy) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

impl Index<usize> for MixedStrategy {
    type Output = f64;
    fn index(&self, a: usize) -> &f64 {
        &self.0[a]
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = CogError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile(pub Vec<MixedStrategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        Self(strategies)
    }

    pub fn from_vecs(probs: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self(
            probs
                .into_iter()
                .map(MixedStrategy::new)
                .collect::<Result<_>>()?,
        ))
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        Self(action_counts.iter().map(|&m| MixedStrategy::uniform(m)).collect())
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    pub fn player(&self, i: usize) -> &MixedStrategy {
        &self.0[i]
    }

    /// The co-player strategies of `i`, in player order.
    pub fn others(&self, i: usize) -> Vec<MixedStrategy> {
        self.0
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, s)| s.clone())
            .collect()
    }

    pub fn check_dims(&self, action_counts: &[usize]) -> Result<()> {
        if self.0.len() != action_counts.len() {
            return Err(CogError::validation(format!(
                "profile has {} strategies for {} players",
                self.0.len(),
                action_counts.len()
            )));
        }
        for (i, (s, &m)) in self.0.iter().zip(action_counts).enumerate() {
            if s.len() != m {
                return Err(CogError::validation(format!(
                    "player {i} strategy has {} entries, expected {m}",
                    s.len()
                )));
            }
        }
        Ok(())
    }

    pub fn l1_distance(&self, other: &StrategyProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.l1_distance(b))
            .sum()
    }

    /// Uniform average of several profiles with equal dimensions.
    pub fn average<'a>(profiles: impl IntoIterator<Item = &'a StrategyProfile>) -> Self {
        let mut acc: Vec<Vec<f64>> = Vec::new();
        let mut n = 0usize;
        for p in profiles {
            if acc.is_empty() {
                acc = p.0.iter().map(|s| vec![0.0; s.len()]).collect();
            }
            for (a, s) in acc.iter_mut().zip(&p.0) {
                for (x, y) in a.iter_mut().zip(s.probs()) {
                    *x += y;
                }
            }
            n += 1;
        }
        assert!(n > 0, "average of zero profiles");
        Self(
            acc.into_iter()
                .map(|v| MixedStrategy(v.into_iter().map(|x| x / n as f64).collect()))
                .collect(),
        )
    }
}

/// Iterates joint pure profiles of `counts` in row-major order (first index
/// most significant).
pub fn for_each_profile(counts: &[usize], mut f: impl FnMut(&[usize])) {
    if counts.iter().any(|&m| m == 0) {
        return;
    }
    let mut cur = vec![0usize; counts.len()];
    loop {
        f(&cur);
        let mut k = counts.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < counts[k] {
                break;
            }
            cur[k] = 0;
        }
    }
}

/// Row-major flat index of a joint profile.
pub fn flat_index(counts: &[usize], profile: &[usize]) -> usize {
    profile
        .iter()
        .zip(counts)
        .fold(0, |acc, (&a, &m)| acc * m + a)
}

/// Product weights of independent strategies over joint profiles, row-major.
pub fn product_weights(strategies: &[MixedStrategy]) -> Vec<f64> {
    let mut w = vec![1.0];
    for s in strategies {
        let mut next = Vec::with_capacity(w.len() * s.len());
        for &base in &w {
            for &p in s.probs() {
                next.push(base * p);
            }
        }
        w = next;
    }
    w
}
