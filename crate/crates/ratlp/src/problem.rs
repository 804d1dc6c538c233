use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A sparse row: `(variable index, coefficient)` pairs, no duplicates, no zeros.
pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: Option<String>,
    pub coeffs: SparseRow,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A linear program over non-negative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    var_names: Vec<Option<String>>,
    constraints: Vec<Constraint>,
    objective: SparseRow,
    sense: Sense,
}

fn normalize_row(row: impl IntoIterator<Item = (usize, Rational)>) -> SparseRow {
    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
    for (j, v) in row {
        *acc.entry(j).or_insert_with(Rational::zero) += v;
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            num_vars: 0,
            var_names: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    pub fn with_vars(sense: Sense, num_vars: usize) -> Self {
        let mut lp = Self::new(sense);
        lp.add_vars(num_vars);
        lp
    }

    /// Adds one variable (bounded below by zero) and returns its index.
    pub fn add_var(&mut self, name: Option<String>) -> usize {
        self.num_vars += 1;
        self.var_names.push(name);
        self.num_vars - 1
    }

    pub fn add_vars(&mut self, count: usize) {
        self.num_vars += count;
        self.var_names.resize(self.num_vars, None);
    }

    /// Adds a constraint; repeated indices are summed and zero coefficients dropped.
    ///
    /// Panics if a variable index is out of range.
    pub fn add_constraint(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> usize {
        self.add_named_constraint(None, coeffs, relation, rhs)
    }

    pub fn add_named_constraint(
        &mut self,
        name: Option<String>,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> usize {
        let coeffs = normalize_row(coeffs);
        assert!(
            coeffs.iter().all(|(j, _)| *j < self.num_vars),
            "constraint references an undeclared variable"
        );
        self.constraints.push(Constraint {
            name,
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: impl IntoIterator<Item = (usize, Rational)>) {
        let coeffs = normalize_row(coeffs);
        assert!(
            coeffs.iter().all(|(j, _)| *j < self.num_vars),
            "objective references an undeclared variable"
        );
        self.objective = coeffs;
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &SparseRow {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn var_name(&self, j: usize) -> Option<&str> {
        self.var_names.get(j).and_then(|n| n.as_deref())
    }

    pub fn set_var_name(&mut self, j: usize, name: String) {
        self.var_names[j] = Some(name);
    }

    pub fn nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    /// Evaluates the objective at a sparse point.
    pub fn objective_value(&self, point: &[(usize, Rational)]) -> Rational {
        dot(&self.objective, point)
    }

    /// Exact feasibility check of a sparse point; returns the first violated
    /// constraint index, or `usize::MAX` for a negative coordinate.
    pub fn check_feasible(&self, point: &[(usize, Rational)]) -> Result<(), usize> {
        if point.iter().any(|(_, v)| v.is_negative()) {
            return Err(usize::MAX);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs = dot(&c.coeffs, point);
            let ok = match c.relation {
                Relation::Eq => lhs == c.rhs,
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
            };
            if !ok {
                return Err(i);
            }
        }
        Ok(())
    }
}

/// Dot product of a sparse row with a sparse point (point need not be sorted).
pub fn dot(row: &[(usize, Rational)], point: &[(usize, Rational)]) -> Rational {
    if point.is_empty() || row.is_empty() {
        return Rational::zero();
    }
    let lookup: BTreeMap<usize, &Rational> = point.iter().map(|(j, v)| (*j, v)).collect();
    let mut acc = Rational::zero();
    for (j, a) in row {
        if let Some(v) = lookup.get(j) {
            acc += a * *v;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an exact solve.
///
/// For `Optimal`, `point` attains `value` and satisfies every constraint
/// exactly; `dual` is a dual-feasible multiplier vector (one entry per
/// constraint) with `dual · rhs == value`, which certifies optimality.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub value: Option<Rational>,
    pub point: Vec<(usize, Rational)>,
    pub dual: Vec<Rational>,
    /// Structural variables in the final basis.
    pub basis: Vec<usize>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub float_iterations: usize,
    pub exact_iterations: usize,
    pub rows: usize,
    pub cols: usize,
    pub presolved_rows: usize,
    pub presolved_cols: usize,
}

impl Solution {
    pub(crate) fn status_only(status: Status, stats: SolveStats) -> Self {
        Solution {
            status,
            value: None,
            point: Vec::new(),
            dual: Vec::new(),
            basis: Vec::new(),
            stats,
        }
    }

    pub fn value_of(&self, j: usize) -> Rational {
        self.point
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(Rational::zero)
    }
}
