//! Exact two-phase simplex over rationals (dense tableau, Bland's rule).
//!
//! All variables are non-negative. Intended for the small programs that arise
//! in this crate, so no attempt is made at sparsity.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, objective: Rational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        LinearProgram { sense, objective, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds a constraint given as sparse `(variable, coefficient)` terms.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
    nvars: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let nvars = lp.num_vars();
        let m = lp.constraints.len();
        let mut normalized: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
        for c in &lp.constraints {
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs));
            } else {
                normalized.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
            }
        }
        let slacks = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = nvars + slacks;
        let ncols = first_artificial + artificials;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (nvars, first_artificial);
        for (coeffs, rel, rhs) in normalized {
            let mut row = coeffs;
            row.resize(ncols + 1, Rational::zero());
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = Rational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Rational::one();
                    s += 1;
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, ncols, nvars, first_artificial }
    }

    fn pivot(&mut self, obj: &mut [Rational], r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                eliminate(row, &pivot_row, c);
            }
        }
        if !obj[c].is_zero() {
            eliminate(obj, &pivot_row, c);
        }
        self.basis[r] = c;
    }

    /// Maximizes the objective row over columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        loop {
            let Some(c) = (0..limit).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(obj, r, c),
                None => return false,
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> LpOutcome {
        let n = self.ncols;
        if self.first_artificial < n {
            // maximize -(sum of artificials)
            let mut obj = vec![Rational::zero(); n + 1];
            for (i, &b) in self.basis.iter().enumerate() {
                if b >= self.first_artificial {
                    for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                        *o += v;
                    }
                }
            }
            for o in obj.iter_mut().take(n).skip(self.first_artificial) {
                *o = Rational::zero();
            }
            self.optimize(&mut obj, n);
            if obj[n].is_positive() {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(&mut obj, i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        let sign = match lp.sense {
            Sense::Maximize => Rational::one(),
            Sense::Minimize => -Rational::one(),
        };
        let mut obj = vec![Rational::zero(); n + 1];
        for (j, c) in lp.objective.iter().enumerate() {
            obj[j] = &sign * c;
        }
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            if !obj[b].is_zero() {
                let row = self.rows[i].clone();
                eliminate(&mut obj, &row, b);
            }
        }
        if !self.optimize(&mut obj, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.nvars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.nvars {
                x[b] = self.rows[i][n].clone();
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, objective }
    }
}

/// row -= row[c] * pivot_row, where pivot_row[c] == 1.
fn eliminate(row: &mut [Rational], pivot_row: &[Rational], c: usize) {
    let factor = row[c].clone();
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *v -= &factor * p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y ; x <= 4 ; 2y <= 12 ; 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::new(Sense::Maximize, vec![r(3), r(5)]);
        lp.add(vec![r(1), r(0)], Relation::Le, r(4));
        lp.add(vec![r(0), r(2)], Relation::Le, r(12));
        lp.add(vec![r(3), r(2)], Relation::Le, r(18));
        assert_eq!(lp.solve(), LpOutcome::Optimal { x: vec![r(2), r(6)], objective: r(36) });
    }

    #[test]
    fn minimum_with_equalities_and_fractions() {
        // min x + y ; x + 2y = 3 ; 2x + y >= 3  ->  2 at (1, 1)
        let mut lp = LinearProgram::new(Sense::Minimize, vec![r(1), r(1)]);
        lp.add(vec![r(1), r(2)], Relation::Eq, r(3));
        lp.add(vec![r(2), r(1)], Relation::Ge, r(3));
        assert_eq!(lp.solve(), LpOutcome::Optimal { x: vec![r(1), r(1)], objective: r(2) });

        // min y ; 3y >= 1  ->  1/3
        let mut lp = LinearProgram::new(Sense::Minimize, vec![r(1)]);
        lp.add(vec![r(3)], Relation::Ge, r(1));
        match lp.solve() {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, Rational::new(1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![r(1)]);
        lp.add(vec![r(1)], Relation::Le, r(1));
        lp.add(vec![r(1)], Relation::Ge, r(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, vec![r(1), r(0)]);
        lp.add(vec![r(1), r(-1)], Relation::Le, r(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // -x <= -2 means x >= 2; duplicate equality rows are redundant
        let mut lp = LinearProgram::new(Sense::Minimize, vec![r(1), r(1)]);
        lp.add(vec![r(-1), r(0)], Relation::Le, r(-2));
        lp.add(vec![r(1), r(1)], Relation::Eq, r(5));
        lp.add(vec![r(2), r(2)], Relation::Eq, r(10));
        match lp.solve() {
            LpOutcome::Optimal { objective, x } => {
                assert_eq!(objective, r(5));
                assert!(x[0] >= r(2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let q = |n, d| Rational::new(n, d);
        let mut lp = LinearProgram::new(Sense::Maximize, vec![q(3, 4), r(-150), q(1, 50), r(-6)]);
        lp.add(vec![q(1, 4), r(-60), q(-1, 25), r(9)], Relation::Le, r(0));
        lp.add(vec![q(1, 2), r(-90), q(-1, 50), r(3)], Relation::Le, r(0));
        lp.add(vec![r(0), r(0), r(1), r(0)], Relation::Le, r(1));
        match lp.solve() {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, q(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
