//! Linear-fractional programs and the Charnes–Cooper transformation.

use num_traits::{One, Signed, Zero};

use crate::problem::{Constraint, LinearProgram, Relation, Sense, SparseRow, Status};
use crate::rational::Rational;
use crate::solve::solve_exact;
use crate::LpError;

/// Optimise `(numerator·x + α) / (denominator·x + β)` over
/// `{x ≥ 0 : constraints, denominator·x + β ≥ floor}` with `floor > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub numerator: SparseRow,
    pub numerator_const: Rational,
    pub denominator: SparseRow,
    pub denominator_const: Rational,
    pub constraints: Vec<Constraint>,
    pub denominator_floor: Rational,
}

impl FractionalProgram {
    /// A ratio of two linear forms over a cone given by homogeneous rows.
    pub fn over_cone(
        num_vars: usize,
        sense: Sense,
        numerator: SparseRow,
        denominator: SparseRow,
        rows: Vec<(SparseRow, Relation)>,
        denominator_floor: Rational,
    ) -> Self {
        FractionalProgram {
            num_vars,
            sense,
            numerator,
            numerator_const: Rational::zero(),
            denominator,
            denominator_const: Rational::zero(),
            constraints: rows
                .into_iter()
                .map(|(coeffs, relation)| Constraint {
                    name: None,
                    coeffs,
                    relation,
                    rhs: Rational::zero(),
                })
                .collect(),
            denominator_floor,
        }
    }

    /// True if the feasible set is a cone (all right-hand sides and constants vanish).
    pub fn is_homogeneous(&self) -> bool {
        self.numerator_const.is_zero()
            && self.denominator_const.is_zero()
            && self.constraints.iter().all(|c| c.rhs.is_zero())
    }
}

/// Maps a solution of the transformed program back to the original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BackMap {
    num_vars: usize,
    /// Index of the scaling variable `t` in the general transform.
    scale_var: Option<usize>,
    floor: Rational,
}

impl BackMap {
    /// Objective values carry over unchanged.
    pub fn value(&self, value: &Rational) -> Rational {
        value.clone()
    }

    /// Recovers a point of the original program from a transformed point.
    pub fn point(&self, y: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        match self.scale_var {
            None => y
                .iter()
                .filter(|(j, _)| *j < self.num_vars)
                .map(|(j, v)| (*j, v * &self.floor))
                .collect(),
            Some(t) => {
                let tv = y
                    .iter()
                    .find(|(j, _)| *j == t)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_else(Rational::zero);
                y.iter()
                    .filter(|(j, _)| *j < self.num_vars)
                    .map(|(j, v)| (*j, v / &tv))
                    .collect()
            }
        }
    }
}

/// Charnes–Cooper transformation. On a cone the result is the slice
/// `{denominator = 1}` with the numerator as objective.
pub fn charnes_cooper(fp: &FractionalProgram) -> Result<(LinearProgram, BackMap), LpError> {
    if fp.denominator.iter().all(|(_, v)| v.is_zero()) && fp.denominator_const.is_zero() {
        return Err(LpError::NoNormalizablePoint);
    }
    if !fp.denominator_floor.is_positive() {
        return Err(LpError::InvalidProgram(
            "denominator floor must be positive".into(),
        ));
    }
    let mut lp = LinearProgram::with_vars(fp.sense, fp.num_vars);
    if fp.is_homogeneous() {
        for c in &fp.constraints {
            lp.add_named_constraint(c.name.clone(), c.coeffs.clone(), c.relation, Rational::zero());
        }
        lp.add_named_constraint(
            Some("slice".into()),
            fp.denominator.clone(),
            Relation::Eq,
            Rational::one(),
        );
        lp.set_objective(fp.numerator.clone());
        let back = BackMap {
            num_vars: fp.num_vars,
            scale_var: None,
            floor: fp.denominator_floor.clone(),
        };
        return Ok((lp, back));
    }
    let t = lp.add_var(Some("t".into()));
    for c in &fp.constraints {
        let mut row = c.coeffs.clone();
        row.push((t, -&c.rhs));
        lp.add_named_constraint(c.name.clone(), row, c.relation, Rational::zero());
    }
    let mut den = fp.denominator.clone();
    den.push((t, fp.denominator_const.clone()));
    lp.add_named_constraint(Some("slice".into()), den.clone(), Relation::Eq, Rational::one());
    // denominator·x + β ≥ floor  becomes  1 ≥ floor·t.
    lp.add_named_constraint(
        Some("floor".into()),
        vec![(t, fp.denominator_floor.clone())],
        Relation::Le,
        Rational::one(),
    );
    let mut obj = fp.numerator.clone();
    obj.push((t, fp.numerator_const.clone()));
    lp.set_objective(obj);
    let back = BackMap {
        num_vars: fp.num_vars,
        scale_var: Some(t),
        floor: fp.denominator_floor.clone(),
    };
    Ok((lp, back))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub status: Status,
    pub value: Option<Rational>,
    pub point: Vec<(usize, Rational)>,
}

/// Solves a fractional program exactly through `charnes_cooper`.
pub fn solve_fractional(fp: &FractionalProgram) -> Result<FractionalSolution, LpError> {
    let (lp, back) = charnes_cooper(fp)?;
    let sol = solve_exact(&lp);
    match sol.status {
        Status::Infeasible => Err(LpError::NoNormalizablePoint),
        Status::Unbounded => Ok(FractionalSolution {
            status: Status::Unbounded,
            value: None,
            point: Vec::new(),
        }),
        Status::Optimal => {
            if let Some(t) = back.scale_var {
                if sol.value_of(t).is_zero() {
                    // Recession direction only; no finite point attains the value.
                    return Err(LpError::NoNormalizablePoint);
                }
            }
            Ok(FractionalSolution {
                status: Status::Optimal,
                value: sol.value.as_ref().map(|v| back.value(v)),
                point: back.point(&sol.point),
            })
        }
    }
}
