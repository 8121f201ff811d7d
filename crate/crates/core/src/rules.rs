//! Voting rules mapping vote populations to best-response sets.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{CogError, Result};
use crate::lp::{Cmp, LinearProgram};
use crate::population::{Ballot, BallotKind, VotePopulation};
use crate::strategy::MixedStrategy;

/// Relative tolerance for score ties in winner sets.
pub const TIE_TOL: f64 = 1e-9;

/// Output of a voting rule: either every lottery supported on a winner set,
/// or one explicit lottery.
#[derive(Debug, Clone, PartialEq)]
pub enum BestResponseSet {
    SupportSet { candidates: usize, winners: Vec<usize> },
    ExplicitLottery(MixedStrategy),
}

impl BestResponseSet {
    pub fn support_set(candidates: usize, mut winners: Vec<usize>) -> Self {
        assert!(!winners.is_empty(), "winner set must be non-empty");
        winners.sort_unstable();
        winners.dedup();
        BestResponseSet::SupportSet {
            candidates,
            winners,
        }
    }

    pub fn num_candidates(&self) -> usize {
        match self {
            BestResponseSet::SupportSet { candidates, .. } => *candidates,
            BestResponseSet::ExplicitLottery(x) => x.len(),
        }
    }

    /// Uniform over the winner set, or the lottery itself.
    pub fn canonical(&self) -> MixedStrategy {
        match self {
            BestResponseSet::SupportSet {
                candidates,
                winners,
            } => MixedStrategy::uniform_on(*candidates, winners),
            BestResponseSet::ExplicitLottery(x) => x.clone(),
        }
    }

    /// The winner set, or the lottery's support (mass above `1e-9`).
    pub fn winners(&self) -> Vec<usize> {
        match self {
            BestResponseSet::SupportSet { winners, .. } => winners.clone(),
            BestResponseSet::ExplicitLottery(x) => x.support(1e-9),
        }
    }

    /// Unit-metric earth mover's distance from `x` to the set: mass outside
    /// the winner set, or half the L1 distance to the lottery.
    pub fn distance(&self, x: &MixedStrategy) -> f64 {
        match self {
            BestResponseSet::SupportSet { winners, .. } => {
                let inside: f64 = winners.iter().map(|&a| x[a]).sum();
                (1.0 - inside).max(0.0)
            }
            BestResponseSet::ExplicitLottery(l) => 0.5 * l.l1_distance(x),
        }
    }
}

/// Skew-symmetric matrix of net pairwise win frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginMatrix {
    m: usize,
    data: Vec<f64>,
}

impl MarginMatrix {
    /// Wraps a row-major `m x m` matrix. Skew-symmetry is checked to `1e-9`.
    pub fn from_row_major(m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * m {
            return Err(CogError::validation("margin matrix must be square"));
        }
        for a in 0..m {
            for b in 0..m {
                if (data[a * m + b] + data[b * m + a]).abs() > 1e-9 {
                    return Err(CogError::validation(format!(
                        "margin matrix not skew-symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self { m, data })
    }

    pub fn from_population(pop: &VotePopulation) -> Result<Self> {
        require_kind(pop, BallotKind::Ranking, "margin_matrix")?;
        let m = pop.candidates();
        let mut data = vec![0.0; m * m];
        for (w, b) in pop.entries() {
            crate::game::accumulate_margins(&mut data, m, &b.ranking(), *w);
        }
        Ok(Self { m, data })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.m + b]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.m..(a + 1) * self.m]
    }

    /// `(Mx)_a` for every `a`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|a| self.row(a).iter().zip(x).map(|(v, p)| v * p).sum())
            .collect()
    }

    /// A candidate beating every other in pairwise majority.
    pub fn condorcet_winner(&self) -> Option<usize> {
        (0..self.m).find(|&a| (0..self.m).all(|b| b == a || self.get(a, b) > 1e-12))
    }
}

fn require_kind(pop: &VotePopulation, kind: BallotKind, rule: &str) -> Result<()> {
    match pop.kind() {
        Some(k) if k != kind => Err(CogError::IncompatibleBallot {
            rule: rule.to_string(),
            ballot: k.name(),
        }),
        _ => Ok(()),
    }
}

/// Candidates whose score is within the relative tie tolerance of the best.
pub fn argmax_set(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * best.abs().max(1.0);
    (0..scores.len())
        .filter(|&a| scores[a] >= best - tol)
        .collect()
}

/// Weighted positional score totals.
pub fn positional_scores(pop: &VotePopulation, scores: &[f64]) -> Result<Vec<f64>> {
    require_kind(pop, BallotKind::Ranking, "positional")?;
    check_scoring(scores, pop.candidates())?;
    let mut out = vec![0.0; pop.candidates()];
    for (w, b) in pop.entries() {
        for (o, s) in out.iter_mut().zip(b.ranking().positional_scores(scores)) {
            *o += w * s;
        }
    }
    Ok(out)
}

fn check_scoring(scores: &[f64], m: usize) -> Result<()> {
    if scores.len() != m {
        return Err(CogError::validation(format!(
            "scoring vector has {} entries for {m} candidates",
            scores.len()
        )));
    }
    if scores.windows(2).any(|w| w[0] < w[1]) {
        return Err(CogError::validation("scoring vector must be non-increasing"));
    }
    Ok(())
}

pub fn positional_winners(pop: &VotePopulation, scores: &[f64]) -> Result<BestResponseSet> {
    let totals = positional_scores(pop, scores)?;
    Ok(BestResponseSet::support_set(
        pop.candidates(),
        argmax_set(&totals),
    ))
}

pub fn borda_vector(m: usize) -> Vec<f64> {
    (0..m).rev().map(|k| k as f64).collect()
}

pub fn plurality_vector(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[0] = 1.0;
    v
}

pub fn veto_vector(m: usize) -> Vec<f64> {
    let mut v = vec![1.0; m];
    v[m - 1] = 0.0;
    v
}

/// Weight-averaged score vectors.
pub fn score_totals(pop: &VotePopulation) -> Result<Vec<f64>> {
    require_kind(pop, BallotKind::Scores, "score")?;
    let mut out = vec![0.0; pop.candidates()];
    for (w, b) in pop.entries() {
        if let Ballot::Scores(s) = b {
            for (o, v) in out.iter_mut().zip(s) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

pub fn score_winners(pop: &VotePopulation) -> Result<BestResponseSet> {
    let totals = score_totals(pop)?;
    Ok(BestResponseSet::support_set(
        pop.candidates(),
        argmax_set(&totals),
    ))
}

pub fn margin_matrix(pop: &VotePopulation) -> Result<MarginMatrix> {
    MarginMatrix::from_population(pop)
}

/// Wins minus losses over the sign of the margin matrix.
pub fn copeland_scores(mm: &MarginMatrix) -> Vec<f64> {
    let m = mm.size();
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let v = mm.get(a, b);
                    if v > 1e-12 {
                        1.0
                    } else if v < -1e-12 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

pub fn copeland_from_margins(mm: &MarginMatrix) -> BestResponseSet {
    BestResponseSet::support_set(mm.size(), argmax_set(&copeland_scores(mm)))
}

pub fn copeland_winners(pop: &VotePopulation) -> Result<BestResponseSet> {
    Ok(copeland_from_margins(&margin_matrix(pop)?))
}

pub fn maximal_lottery(pop: &VotePopulation) -> Result<BestResponseSet> {
    Ok(BestResponseSet::ExplicitLottery(maximal_lottery_from_margins(
        &margin_matrix(pop)?,
    )?))
}

/// The maximum-entropy optimal strategy of the symmetric zero-sum game on
/// `mm`: `x` in the simplex with `Mx <= 0`.
pub fn maximal_lottery_from_margins(mm: &MarginMatrix) -> Result<MixedStrategy> {
    let m = mm.size();
    if let Some(a) = mm.condorcet_winner() {
        return Ok(MixedStrategy::pure(m, a));
    }
    // Clones: identical margin rows. Max entropy splits a clone group evenly.
    let mut group_of = vec![usize::MAX; m];
    let mut reps: Vec<usize> = Vec::new();
    let mut sizes: Vec<f64> = Vec::new();
    for a in 0..m {
        if group_of[a] != usize::MAX {
            continue;
        }
        group_of[a] = reps.len();
        for b in (a + 1)..m {
            if group_of[b] == usize::MAX
                && mm.row(a).iter().zip(mm.row(b)).all(|(x, y)| (x - y).abs() <= 1e-12)
            {
                group_of[b] = reps.len();
            }
        }
        sizes.push((0..m).filter(|&b| group_of[b] == reps.len()).count() as f64);
        reps.push(a);
    }
    let k = reps.len();
    let reduced: Vec<f64> = reps
        .iter()
        .flat_map(|&a| reps.iter().map(move |&b| (a, b)))
        .map(|(a, b)| mm.get(a, b))
        .collect();
    let y = max_entropy_optimal(k, &reduced, &sizes)?;
    let x: Vec<f64> = (0..m).map(|a| y[group_of[a]] / sizes[group_of[a]]).collect();
    let x = MixedStrategy::normalized(x)?;
    let worst = mm.apply(x.probs()).into_iter().fold(f64::NEG_INFINITY, f64::max);
    if worst > 1e-7 {
        return Err(CogError::NonConvergence {
            what: "maximal lottery".into(),
            residual: worst,
        });
    }
    Ok(x)
}

fn optimal_lp(k: usize, mat: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::new(k);
    lp.constraint(vec![1.0; k], Cmp::Eq, 1.0);
    for a in 0..k {
        lp.constraint(mat[a * k..(a + 1) * k].to_vec(), Cmp::Le, 0.0);
    }
    lp
}

/// Maximizes `sum_g -y_g ln(y_g / size_g)` over optimal strategies `y` of the
/// symmetric game `mat` (`k x k`, row-major).
fn max_entropy_optimal(k: usize, mat: &[f64], sizes: &[f64]) -> Result<Vec<f64>> {
    const SUPPORT_TOL: f64 = 1e-9;
    let base = optimal_lp(k, mat);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let (x0, _) = base.solve().optimal().ok_or(CogError::NonConvergence {
        what: "maximal lottery feasibility".into(),
        residual: f64::NAN,
    })?;
    let mut in_ess: Vec<bool> = x0.iter().map(|&v| v > SUPPORT_TOL).collect();
    found.push(x0);
    // Grow the essential set until no optimal strategy has mass outside it.
    loop {
        let outside: Vec<f64> = in_ess.iter().map(|&e| if e { 0.0 } else { 1.0 }).collect();
        if outside.iter().all(|&v| v == 0.0) {
            break;
        }
        let mut lp = base.clone();
        lp.maximize(outside);
        let (x, v) = lp.solve().optimal().ok_or(CogError::NonConvergence {
            what: "maximal lottery essential set".into(),
            residual: f64::NAN,
        })?;
        if v <= SUPPORT_TOL {
            break;
        }
        for (e, &xv) in in_ess.iter_mut().zip(&x) {
            *e |= xv > SUPPORT_TOL;
        }
        found.push(x);
    }
    let ess: Vec<usize> = (0..k).filter(|&a| in_ess[a]).collect();
    let outside: Vec<usize> = (0..k).filter(|&a| !in_ess[a]).collect();
    // An optimal strategy making each outside row as slack as possible; their
    // average is strictly feasible wherever the face allows it.
    for &a in &outside {
        let mut lp = base.clone();
        lp.maximize(mat[a * k..(a + 1) * k].iter().map(|v| -v).collect());
        if let Some((x, _)) = lp.solve().optimal() {
            found.push(x);
        }
    }
    let n = ess.len();
    let mut y0 = vec![0.0; n];
    for x in &found {
        for (j, &a) in ess.iter().enumerate() {
            y0[j] += x[a] / found.len() as f64;
        }
    }
    let y = if n == 1 {
        vec![1.0]
    } else {
        let restricted = |a: usize| -> Vec<f64> { ess.iter().map(|&c| mat[a * k + c]).collect() };
        // Outside rows slack at y0 stay as barrier terms; rows tight at y0 are
        // tight on the whole face and join the equalities.
        let mut eq_rows: Vec<Vec<f64>> = vec![vec![1.0; n]];
        eq_rows.extend(ess.iter().map(|&a| restricted(a)));
        let mut ineq: Vec<Vec<f64>> = Vec::new();
        for &a in &outside {
            let r = restricted(a);
            let slack: f64 = r.iter().zip(&y0).map(|(u, v)| u * v).sum();
            if slack < -1e-12 {
                ineq.push(r);
            } else {
                eq_rows.push(r);
            }
        }
        let a = DMatrix::from_fn(eq_rows.len(), n, |r, c| eq_rows[r][c]);
        let basis = nullspace(&a);
        let s: Vec<f64> = ess.iter().map(|&a| sizes[a]).collect();
        newton_entropy(&y0, &s, basis, &ineq)
    };
    let mut out = vec![0.0; k];
    for (j, &a) in ess.iter().enumerate() {
        out[a] = y[j].max(0.0);
    }
    Ok(out)
}

/// Orthonormal basis (as columns) of the nullspace of `a`.
pub(crate) fn nullspace(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    // Pad rows so the SVD exposes all n right singular vectors.
    let mut padded = DMatrix::<f64>::zeros(a.nrows().max(n), n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = 1e-10 * smax.max(1.0) * n as f64;
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Maximizes `sum -y ln(y / s)` along `y0 + N z` subject to `r . y <= 0`
/// for every row of `ineq`, by Newton steps on a log barrier whose weight
/// shrinks to zero. `y0` must be strictly feasible.
fn newton_entropy(y0: &[f64], s: &[f64], basis: DMatrix<f64>, ineq: &[Vec<f64>]) -> Vec<f64> {
    let n = y0.len();
    let d = basis.ncols();
    let mut y = DVector::from_column_slice(y0);
    if d == 0 {
        return y.iter().copied().collect();
    }
    let rows: Vec<DVector<f64>> = ineq.iter().map(|r| DVector::from_column_slice(r)).collect();
    let feasible = |y: &DVector<f64>| y.iter().all(|&v| v > 0.0) && rows.iter().all(|r| r.dot(y) < 0.0);
    let objective = |y: &DVector<f64>, mu: f64| -> f64 {
        let entropy: f64 = y
            .iter()
            .zip(s)
            .map(|(&v, &k)| -v * (v / k).ln())
            .sum();
        entropy + mu * rows.iter().map(|r| (-r.dot(y)).ln()).sum::<f64>()
    };
    let barrier_weights: Vec<f64> = if rows.is_empty() {
        vec![0.0]
    } else {
        (1..=7).map(|e| 10f64.powi(-2 * e)).collect()
    };
    for mu in barrier_weights {
        for _ in 0..200 {
            let mut grad_y = DVector::from_iterator(n, y.iter().zip(s).map(|(&v, &k)| -(v / k).ln() - 1.0));
            // Negated Hessian in y: diag(1 / y) + mu sum r r^T / (r . y)^2.
            let mut hy = DMatrix::<f64>::from_diagonal(&y.map(|v| 1.0 / v));
            for r in &rows {
                let ry = r.dot(&y);
                grad_y += r * (mu / ry);
                hy += (r * r.transpose()) * (mu / (ry * ry));
            }
            let g = basis.transpose() * &grad_y;
            if g.norm() < 1e-13 {
                break;
            }
            let h = basis.transpose() * &hy * &basis;
            let Some(chol) = h.cholesky() else { break };
            let dz = chol.solve(&g);
            let dy = &basis * &dz;
            let decrement = g.dot(&dz);
            let f0 = objective(&y, mu);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let cand = &y + &dy * t;
                if feasible(&cand) && objective(&cand, mu) >= f0 + 0.25 * t * decrement {
                    y = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || decrement < 1e-24 {
                break;
            }
        }
    }
    let sum: f64 = y.iter().sum();
    y.iter().map(|v| v / sum).collect()
}

/// Bins values into `num_grades` grades at the empirical `k / num_grades`
/// quantiles; bins are right-closed. All-equal values get the top grade.
pub fn grade_by_quantiles(values: &[f64], num_grades: usize) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(CogError::validation("cannot grade an empty vector"));
    }
    if num_grades < 2 {
        return Err(CogError::validation("need at least 2 grades"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CogError::validation("cannot grade non-finite values"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(vec![num_grades - 1; values.len()]);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Lower empirical quantile: smallest v with F(v) >= t.
    let edges: Vec<f64> = (1..num_grades)
        .map(|k| {
            let idx = (k * n).div_ceil(num_grades).max(1) - 1;
            sorted[idx]
        })
        .collect();
    Ok(values
        .iter()
        .map(|&v| edges.iter().filter(|&&e| v > e).count())
        .collect())
}

/// Per-candidate grade distribution: `dist[c][g]` is the weight giving `c`
/// grade `g`.
fn grade_distributions(pop: &VotePopulation) -> Result<(usize, Vec<Vec<f64>>)> {
    require_kind(pop, BallotKind::Grades, "sgf")?;
    let m = pop.candidates();
    let levels = pop
        .entries()
        .iter()
        .map(|(_, b)| match b {
            Ballot::Grades { levels, .. } => *levels,
            _ => 0,
        })
        .max()
        .unwrap_or(2);
    let mut dist = vec![vec![0.0; levels]; m];
    for (w, b) in pop.entries() {
        if let Ballot::Grades { grades, .. } = b {
            for (c, &g) in grades.iter().enumerate() {
                dist[c][g] += w;
            }
        }
    }
    Ok((levels, dist))
}

/// Lower quantile of a grade distribution at level `t`.
fn grade_quantile(dist: &[f64], t: f64) -> usize {
    let mut acc = 0.0;
    for (g, &w) in dist.iter().enumerate() {
        acc += w;
        if acc >= t - 1e-12 {
            return g;
        }
    }
    dist.len() - 1
}

/// Majority-judgment comparison with lower medians. Removing median votes one
/// at a time reads the quantile function outward from `1/2`, lower side first.
fn majority_judgment_cmp(a: &[f64], b: &[f64]) -> Ordering {
    let o = grade_quantile(a, 0.5).cmp(&grade_quantile(b, 0.5));
    if o != Ordering::Equal {
        return o;
    }
    let mut dists: Vec<f64> = Vec::new();
    for dist in [a, b] {
        let mut acc = 0.0;
        for &w in dist {
            acc += w;
            dists.push((acc - 0.5).abs());
        }
    }
    dists.push(0.0);
    dists.push(0.5);
    dists.sort_by(f64::total_cmp);
    dists.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    for w in dists.windows(2) {
        let e = 0.5 * (w[0] + w[1]);
        if e >= 0.5 {
            break;
        }
        for t in [0.5 - e, 0.5 + e] {
            let o = grade_quantile(a, t).cmp(&grade_quantile(b, t));
            if o != Ordering::Equal {
                return o;
            }
        }
    }
    Ordering::Equal
}

pub fn sgf_winners(pop: &VotePopulation) -> Result<BestResponseSet> {
    let (_, dist) = grade_distributions(pop)?;
    let m = dist.len();
    let mut best = vec![0usize];
    for c in 1..m {
        match majority_judgment_cmp(&dist[c], &dist[best[0]]) {
            Ordering::Greater => best = vec![c],
            Ordering::Equal => best.push(c),
            Ordering::Less => {}
        }
    }
    Ok(BestResponseSet::support_set(m, best))
}

/// A voting rule selectable by string id.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Borda,
    Plurality,
    Veto,
    Score,
    Copeland,
    MaximalLottery,
    Sgf(usize),
}

impl Rule {
    pub fn ballot_kind(&self) -> BallotKind {
        match self {
            Rule::Score => BallotKind::Scores,
            Rule::Sgf(_) => BallotKind::Grades,
            _ => BallotKind::Ranking,
        }
    }

    /// Positional scoring vector for `m` candidates, if positional.
    pub fn scoring_vector(&self, m: usize) -> Option<Vec<f64>> {
        match self {
            Rule::Borda => Some(borda_vector(m)),
            Rule::Plurality => Some(plurality_vector(m)),
            Rule::Veto => Some(veto_vector(m)),
            _ => None,
        }
    }

    /// Whether the rule depends on the population only through its margin
    /// matrix.
    pub fn uses_margins(&self) -> bool {
        matches!(self, Rule::Copeland | Rule::MaximalLottery)
    }

    pub fn apply(&self, pop: &VotePopulation) -> Result<BestResponseSet> {
        match pop.kind() {
            Some(k) if k != self.ballot_kind() => {
                return Err(CogError::IncompatibleBallot {
                    rule: self.to_string(),
                    ballot: k.name(),
                })
            }
            None => {
                return Err(CogError::validation("cannot vote on an empty population"));
            }
            _ => {}
        }
        match self {
            Rule::Borda | Rule::Plurality | Rule::Veto => {
                positional_winners(pop, &self.scoring_vector(pop.candidates()).unwrap())
            }
            Rule::Score => score_winners(pop),
            Rule::Copeland => copeland_winners(pop),
            Rule::MaximalLottery => maximal_lottery(pop),
            Rule::Sgf(n) => {
                for (_, b) in pop.entries() {
                    if let Ballot::Grades { levels, .. } = b {
                        if levels != n {
                            return Err(CogError::validation(format!(
                                "rule sgf:{n} applied to a {levels}-grade ballot"
                            )));
                        }
                    }
                }
                sgf_winners(pop)
            }
        }
    }

    /// Applies a margin-based rule to an aggregated margin matrix.
    pub fn apply_margins(&self, mm: &MarginMatrix) -> Result<BestResponseSet> {
        match self {
            Rule::Copeland => Ok(copeland_from_margins(mm)),
            Rule::MaximalLottery => Ok(BestResponseSet::ExplicitLottery(
                maximal_lottery_from_margins(mm)?,
            )),
            _ => Err(CogError::UnsupportedRule(self.to_string())),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Borda => write!(f, "borda"),
            Rule::Plurality => write!(f, "plurality"),
            Rule::Veto => write!(f, "veto"),
            Rule::Score => write!(f, "score"),
            Rule::Copeland => write!(f, "copeland"),
            Rule::MaximalLottery => write!(f, "maximal_lottery"),
            Rule::Sgf(n) => write!(f, "sgf:{n}"),
        }
    }
}

impl FromStr for Rule {
    type Err = CogError;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "borda" => Rule::Borda,
            "plurality" => Rule::Plurality,
            "veto" => Rule::Veto,
            "score" => Rule::Score,
            "copeland" => Rule::Copeland,
            "maximal_lottery" | "ml" => Rule::MaximalLottery,
            _ => match s.strip_prefix("sgf:").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 2 => Rule::Sgf(n),
                _ => return Err(CogError::UnknownRule(s.to_string())),
            },
        })
    }
}
