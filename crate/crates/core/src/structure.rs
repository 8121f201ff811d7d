//! Response graphs, the harmonic check and sink-component analysis.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::game::{CardinalGame, PreferenceGame};
use crate::lp::{Cmp, LinearProgram};
use crate::strategy::{flat_index, for_each_profile};

/// Whether zero-weight (indifferent) deviations become arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcMode {
    WithTies,
    StrictOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub player: usize,
    /// Payoff gain of the deviation; `None` for purely ordinal arcs.
    pub weight: Option<f64>,
}

/// Nodes are joint pure profiles in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseGraph {
    pub action_counts: Vec<usize>,
    pub arcs: Vec<Arc>,
}

impl ResponseGraph {
    pub fn num_nodes(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn profile(&self, node: usize) -> Vec<usize> {
        let mut rem = node;
        let mut out = vec![0; self.action_counts.len()];
        for k in (0..out.len()).rev() {
            out[k] = rem % self.action_counts[k];
            rem /= self.action_counts[k];
        }
        out
    }

    pub fn node(&self, profile: &[usize]) -> usize {
        flat_index(&self.action_counts, profile)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for a in &self.arcs {
            adj[a.from].push(a.to);
        }
        adj
    }
}

fn build_graph(
    counts: &[usize],
    mut gain: impl FnMut(usize, &[usize], &[usize]) -> Option<(bool, Option<f64>)>,
) -> ResponseGraph {
    let mut arcs = Vec::new();
    for_each_profile(counts, |from| {
        let f = flat_index(counts, from);
        let mut to = from.to_vec();
        for i in 0..counts.len() {
            for b in 0..counts[i] {
                if b == from[i] {
                    continue;
                }
                to[i] = b;
                if let Some((true, weight)) = gain(i, from, &to) {
                    arcs.push(Arc {
                        from: f,
                        to: flat_index(counts, &to),
                        player: i,
                        weight,
                    });
                }
            }
            to[i] = from[i];
        }
    });
    ResponseGraph {
        action_counts: counts.to_vec(),
        arcs,
    }
}

/// Weighted response graph: every unilateral deviation that weakly (or, in
/// strict mode, strictly) improves the deviator's payoff.
pub fn response_graph(game: &CardinalGame, mode: ArcMode) -> ResponseGraph {
    build_graph(game.action_counts(), |i, from, to| {
        let w = game.payoff(i, to) - game.payoff(i, from);
        let keep = match mode {
            ArcMode::WithTies => w >= 0.0,
            ArcMode::StrictOnly => w > 0.0,
        };
        Some((keep, Some(w)))
    })
}

/// Unweighted response graph read from context preferences: a deviation is
/// an arc when the deviator's pairwise margin in that context favours it.
pub fn preference_graph<G: PreferenceGame + ?Sized>(game: &G, mode: ArcMode) -> ResponseGraph {
    let counts = game.action_counts().to_vec();
    let n = counts.len();
    let mut cache: Vec<std::collections::HashMap<Vec<usize>, Vec<f64>>> =
        vec![Default::default(); n];
    build_graph(&counts, |i, from, to| {
        let ctx: Vec<usize> = (0..n).filter(|&k| k != i).map(|k| from[k]).collect();
        let m = counts[i];
        let margins = cache[i]
            .entry(ctx.clone())
            .or_insert_with(|| game.context_margins(i, &ctx));
        let d = margins[to[i] * m + from[i]];
        let keep = match mode {
            ArcMode::WithTies => d >= -1e-12,
            ArcMode::StrictOnly => d > 1e-12,
        };
        Some((keep, None))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicReport {
    pub is_harmonic: bool,
    /// Rows per joint profile, columns per (player, action).
    pub deviation_matrix: Vec<Vec<f64>>,
    pub nullspace_dim: usize,
    /// Strictly positive weights solving the flow condition, when harmonic.
    pub weights: Option<Vec<f64>>,
}

/// Entry `[a][(i, b)] = u_i(a) - u_i(b, a_{-i})`.
pub fn deviation_matrix(game: &CardinalGame) -> Vec<Vec<f64>> {
    let counts = game.action_counts();
    let cols: usize = counts.iter().sum();
    let mut rows = Vec::new();
    for_each_profile(counts, |a| {
        let mut row = vec![0.0; cols];
        let mut dev = a.to_vec();
        let mut c = 0;
        for i in 0..counts.len() {
            let u = game.payoff(i, a);
            for b in 0..counts[i] {
                dev[i] = b;
                row[c] = u - game.payoff(i, &dev);
                c += 1;
            }
            dev[i] = a[i];
        }
        rows.push(row);
    });
    rows
}

/// Harmonic iff some `beta >= 1` (equivalently, strictly positive up to
/// scale) satisfies `A beta = 0`.
pub fn harmonic_check(game: &CardinalGame) -> HarmonicReport {
    let a = deviation_matrix(game);
    let nr = a.len();
    let nc = a.first().map_or(0, Vec::len);
    let mat = DMatrix::from_fn(nr, nc, |r, c| a[r][c]);
    let nullspace_dim = crate::rules::nullspace(&mat).ncols();
    let weights = if nullspace_dim == 0 {
        None
    } else {
        // beta = 1 + y, y >= 0:  A y = -A 1.
        let mut lp = LinearProgram::new(nc);
        for row in &a {
            let rhs: f64 = -row.iter().sum::<f64>();
            lp.constraint(row.clone(), Cmp::Eq, rhs);
        }
        lp.solve()
            .optimal()
            .map(|(y, _)| y.into_iter().map(|v| v + 1.0).collect())
    };
    HarmonicReport {
        is_harmonic: weights.is_some(),
        deviation_matrix: a,
        nullspace_dim,
        weights,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub is_sink: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinkAnalysis {
    pub components: Vec<Component>,
    /// Elementary steps taken; bounded by a constant times nodes plus arcs.
    pub operations: usize,
}

impl SinkAnalysis {
    pub fn sinks(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_sink)
    }
}

/// Strongly connected components (Kosaraju) with sink flags. Components are
/// listed in topological order of the condensation; nodes are sorted.
pub fn sink_components(graph: &ResponseGraph) -> SinkAnalysis {
    let n = graph.num_nodes();
    let adj = graph.adjacency();
    let mut radj = vec![Vec::new(); n];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            radj[v].push(u);
        }
    }
    let mut ops = 0usize;
    // First pass: finishing order on the forward graph.
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for s in 0..n {
        ops += 1;
        if visited[s] {
            continue;
        }
        visited[s] = true;
        stack.push((s, 0));
        while let Some((u, k)) = stack.last_mut() {
            ops += 1;
            if let Some(&v) = adj[*u].get(*k) {
                *k += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(*u);
                stack.pop();
            }
        }
    }
    // Second pass on the reversed graph in decreasing finishing time.
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut dfs = Vec::new();
    for &s in order.iter().rev() {
        ops += 1;
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        dfs.push(s);
        while let Some(u) = dfs.pop() {
            for &v in &radj[u] {
                ops += 1;
                if comp[v] == usize::MAX {
                    comp[v] = count;
                    dfs.push(v);
                }
            }
        }
        count += 1;
    }
    let mut components: Vec<Component> = (0..count)
        .map(|_| Component {
            nodes: Vec::new(),
            is_sink: true,
        })
        .collect();
    for u in 0..n {
        ops += 1;
        components[comp[u]].nodes.push(u);
    }
    for a in &graph.arcs {
        ops += 1;
        if comp[a.from] != comp[a.to] {
            components[comp[a.from]].is_sink = false;
        }
    }
    SinkAnalysis {
        components,
        operations: ops,
    }
}
