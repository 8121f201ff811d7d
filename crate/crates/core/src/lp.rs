//! Dense two-phase simplex for the small linear programs used by the
//! maximal-lottery, margin-of-victory and harmonic-positivity computations.

const EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

/// `maximize c.x  s.t.  rows, x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn maximize(&mut self, c: Vec<f64>) -> &mut Self {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, cmp, rhs));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// `m` constraint rows then the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    n_total: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars;
        let mut rows: Vec<(Vec<f64>, Cmp, f64)> = lp.rows.clone();
        for (c, cmp, b) in rows.iter_mut() {
            if *b < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
                *b = -*b;
                *cmp = match *cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
            }
        }
        let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
        let artificial_start = n + n_slack;
        let n_total = artificial_start + n_art;
        let mut t = vec![vec![0.0; n_total + 1]; m + 1];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n, artificial_start);
        for (r, (c, cmp, b)) in rows.iter().enumerate() {
            t[r][..n].copy_from_slice(c);
            t[r][n_total] = *b;
            match cmp {
                Cmp::Le => {
                    t[r][s] = 1.0;
                    basis[r] = s;
                    s += 1;
                }
                Cmp::Ge => {
                    t[r][s] = -1.0;
                    s += 1;
                    t[r][a] = 1.0;
                    basis[r] = a;
                    a += 1;
                }
                Cmp::Eq => {
                    t[r][a] = 1.0;
                    basis[r] = a;
                    a += 1;
                }
            }
        }
        Self {
            t,
            basis,
            n_orig: n,
            n_total,
            artificial_start,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.n_total + 1;
        let p = self.t[r][c];
        for j in 0..w {
            self.t[r][j] /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f.abs() > 0.0 {
                for j in 0..w {
                    row[j] -= f * pivot_row[j];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Sets the objective row to reduced costs of `maximize cost.x`.
    fn load_objective(&mut self, cost: &[f64]) {
        let m = self.m();
        let w = self.n_total + 1;
        let mut obj = vec![0.0; w];
        for (j, &c) in cost.iter().enumerate() {
            obj[j] = -c;
        }
        for r in 0..m {
            let cb = cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] += cb * self.t[r][j];
                }
            }
        }
        self.t[m] = obj;
    }

    /// Bland's rule iterations over columns `< limit`. Returns false when
    /// unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        let m = self.m();
        let rhs = self.n_total;
        let max_iter = 50_000 + 100 * (m + limit);
        for _ in 0..max_iter {
            let Some(c) = (0..limit).find(|&j| self.t[m][j] < -EPS) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.t[r][c];
                if a > EPS {
                    let ratio = self.t[r][rhs] / a;
                    match best {
                        None => best = Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - EPS
                                || (ratio <= bv + EPS && self.basis[r] < self.basis[br])
                            {
                                best = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
        true
    }

    fn run(mut self, objective: &[f64]) -> LpOutcome {
        let m = self.m();
        let rhs = self.n_total;
        if self.artificial_start < self.n_total {
            let mut cost = vec![0.0; self.n_total];
            for c in cost.iter_mut().skip(self.artificial_start) {
                *c = -1.0;
            }
            self.load_objective(&cost);
            self.iterate(self.n_total);
            let infeasibility = -self.t[m][rhs];
            let scale = 1.0 + self.t[..m].iter().map(|r| r[rhs].abs()).fold(0.0, f64::max);
            if infeasibility.abs() > 1e-8 * scale {
                return LpOutcome::Infeasible;
            }
            // Drive artificial variables out of the basis where possible.
            for r in 0..m {
                if self.basis[r] >= self.artificial_start {
                    if let Some(c) =
                        (0..self.artificial_start).find(|&j| self.t[r][j].abs() > 1e-9)
                    {
                        self.pivot(r, c);
                    }
                }
            }
            // Rows whose artificial stayed basic are redundant.
            let keep: Vec<usize> = (0..m)
                .filter(|&r| self.basis[r] < self.artificial_start)
                .collect();
            let mut t: Vec<Vec<f64>> = keep.iter().map(|&r| self.t[r].clone()).collect();
            t.push(self.t[m].clone());
            self.basis = keep.iter().map(|&r| self.basis[r]).collect();
            self.t = t;
            for row in self.t.iter_mut() {
                for v in row[self.artificial_start..self.n_total].iter_mut() {
                    *v = 0.0;
                }
            }
        }
        let mut cost = vec![0.0; self.n_total];
        cost[..self.n_orig].copy_from_slice(objective);
        self.load_objective(&cost);
        if !self.iterate(self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; self.n_orig];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.t[r][rhs].max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![3.0, 5.0])
            .constraint(vec![1.0, 0.0], Cmp::Le, 4.0)
            .constraint(vec![0.0, 2.0], Cmp::Le, 12.0)
            .constraint(vec![3.0, 2.0], Cmp::Le, 18.0);
        let (x, v) = lp.solve().optimal().unwrap();
        assert!((v - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y  s.t. x + y >= 2, x - y = 1
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![-1.0, -1.0])
            .constraint(vec![1.0, 1.0], Cmp::Ge, 2.0)
            .constraint(vec![1.0, -1.0], Cmp::Eq, 1.0);
        let (x, v) = lp.solve().optimal().unwrap();
        assert!((v + 2.0).abs() < 1e-9);
        assert!((x[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![1.0], Cmp::Le, 1.0)
            .constraint(vec![1.0], Cmp::Ge, 2.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]).constraint(vec![1.0], Cmp::Ge, 0.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 0.0])
            .constraint(vec![1.0, 1.0], Cmp::Eq, 1.0)
            .constraint(vec![2.0, 2.0], Cmp::Eq, 2.0);
        let (x, _) = lp.solve().optimal().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rps_game_value_zero() {
        // x in simplex, M x <= 0 for the rock-paper-scissors margin matrix
        let m = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];
        let mut lp = LinearProgram::new(3);
        lp.maximize(vec![0.0; 3]);
        lp.constraint(vec![1.0; 3], Cmp::Eq, 1.0);
        for row in m {
            lp.constraint(row.to_vec(), Cmp::Le, 0.0);
        }
        let (x, _) = lp.solve().optimal().unwrap();
        for v in x {
            assert!((v - 1.0 / 3.0).abs() < 1e-9);
        }
    }
}
