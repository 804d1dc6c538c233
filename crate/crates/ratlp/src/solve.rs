use num_traits::{Signed, ToPrimitive, Zero};

use crate::presolve::{presolve, restore_duals, Presolved};
use crate::problem::{dot, LinearProgram, Relation, Sense, Solution, SolveStats, Status};
use crate::rational::Rational;
use crate::simplex::{finish, two_phase, Engine, EngineResult, Outcome, StandardForm, Tolerances};
use crate::LpError;

/// How `solve_exact_with` reaches an exact optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExactMethod {
    /// Solve in floating point, then factor the final basis exactly and
    /// continue with exact pivots until the basis is provably optimal.
    #[default]
    Crossover,
    /// Exact arithmetic from the first pivot.
    PureExact,
}

struct Prepared {
    pre: Presolved,
    sf: StandardForm<Rational>,
    /// Standard-form structural column -> original variable.
    col_map: Vec<usize>,
    /// Standard-form row -> (original row, negated).
    row_map: Vec<(usize, bool)>,
    /// Objective of the equivalent minimisation, per original variable.
    c_min: Vec<Rational>,
}

fn prepare(lp: &LinearProgram) -> Prepared {
    let pre = presolve(lp);
    let n = lp.num_vars();
    let mut c_min = vec![Rational::zero(); n];
    for (j, v) in lp.objective() {
        c_min[*j] = match lp.sense() {
            Sense::Minimize => v.clone(),
            Sense::Maximize => -v,
        };
    }
    let mut new_col = vec![usize::MAX; n];
    let mut col_map = Vec::new();
    for j in 0..n {
        if pre.col_kept[j] {
            new_col[j] = col_map.len();
            col_map.push(j);
        }
    }
    let mut row_map = Vec::new();
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); col_map.len()];
    let mut slacks: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut b = Vec::new();
    for (i, c) in lp.constraints().iter().enumerate() {
        if !pre.row_kept[i] {
            continue;
        }
        let r = row_map.len();
        let negate = c.rhs.is_negative();
        row_map.push((i, negate));
        let sign = |v: Rational| if negate { -v } else { v };
        b.push(sign(c.rhs.clone()));
        for (j, a) in &c.coeffs {
            if pre.col_kept[*j] {
                cols[new_col[*j]].push((r, sign(a.clone())));
            }
        }
        match c.relation {
            Relation::Eq => {}
            Relation::Le => slacks.push(vec![(r, sign(Rational::from_integer(1.into())))]),
            Relation::Ge => slacks.push(vec![(r, sign(Rational::from_integer((-1).into())))]),
        }
    }
    let mut cost: Vec<Rational> = col_map.iter().map(|&j| c_min[j].clone()).collect();
    cost.resize(col_map.len() + slacks.len(), Rational::zero());
    cols.extend(slacks);
    let sf = StandardForm::from_columns(row_map.len(), cols, b, cost);
    Prepared {
        pre,
        sf,
        col_map,
        row_map,
        c_min,
    }
}

fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Solves `lp` exactly, using the floating-point crossover path.
pub fn solve_exact(lp: &LinearProgram) -> Solution {
    solve_exact_with(lp, ExactMethod::Crossover)
}

pub fn solve_exact_with(lp: &LinearProgram, method: ExactMethod) -> Solution {
    let prep = prepare(lp);
    let mut stats = SolveStats {
        rows: lp.num_constraints(),
        cols: lp.num_vars(),
        presolved_rows: prep.sf.m,
        presolved_cols: prep.col_map.len(),
        ..SolveStats::default()
    };
    if prep.pre.infeasible {
        return Solution::status_only(Status::Infeasible, stats);
    }
    let mut result = None;
    if method == ExactMethod::Crossover {
        result = crossover(&prep.sf, &mut stats);
    }
    let result = match result {
        Some(r) => r,
        None => {
            let r = two_phase(&prep.sf, Tolerances::exact())
                .expect("exact simplex cannot fail numerically");
            stats.exact_iterations += r.iterations;
            r
        }
    };
    let sol = assemble(lp, &prep, result, stats);
    if sol.status == Status::Optimal {
        if let Err(msg) = verify_certificate(lp, &sol) {
            panic!("exact solution failed certificate verification: {msg}");
        }
    }
    sol
}

fn crossover(sf: &StandardForm<Rational>, stats: &mut SolveStats) -> Option<EngineResult<Rational>> {
    let sf_f = sf.convert(to_f64);
    let fres = two_phase(&sf_f, Tolerances::float()).ok()?;
    stats.float_iterations = fres.iterations;
    if fres.outcome != Outcome::Optimal {
        return None;
    }
    exact_from_basis(sf, fres.basis, stats)
}

fn exact_from_basis(
    sf: &StandardForm<Rational>,
    basis: Vec<usize>,
    stats: &mut SolveStats,
) -> Option<EngineResult<Rational>> {
    let mut e = Engine::with_basis(sf, Tolerances::exact(), basis).ok()?;
    e.max_iterations = usize::MAX;
    if !e.artificials_at_zero() {
        return None;
    }
    e.pin_artificials();
    if !e.restore_feasibility().ok()? {
        return None;
    }
    let c2 = e.phase2_costs();
    e.set_costs(c2);
    let outcome = e.run().ok()?;
    stats.exact_iterations += e.iterations;
    Some(finish(e, outcome))
}

fn assemble(
    lp: &LinearProgram,
    prep: &Prepared,
    result: EngineResult<Rational>,
    stats: SolveStats,
) -> Solution {
    match result.outcome {
        Outcome::Infeasible => return Solution::status_only(Status::Infeasible, stats),
        Outcome::Unbounded => return Solution::status_only(Status::Unbounded, stats),
        Outcome::Optimal => {}
    }
    let mut point = Vec::new();
    for (k, v) in result.x.iter().enumerate().take(prep.col_map.len()) {
        if !v.is_zero() {
            point.push((prep.col_map[k], v.clone()));
        }
    }
    let mut y = vec![Rational::zero(); lp.num_constraints()];
    for (r, &(i, negated)) in prep.row_map.iter().enumerate() {
        y[i] = if negated { -&result.y[r] } else { result.y[r].clone() };
    }
    restore_duals(lp, &prep.pre, &prep.c_min, &mut y);
    if lp.sense() == Sense::Maximize {
        for v in y.iter_mut() {
            *v = -&*v;
        }
    }
    let basis = result
        .basis
        .iter()
        .filter(|&&j| j < prep.col_map.len())
        .map(|&j| prep.col_map[j])
        .collect();
    let value = lp.objective_value(&point);
    Solution {
        status: Status::Optimal,
        value: Some(value),
        point,
        dual: y,
        basis,
        stats,
    }
}

/// Checks an optimal solution exactly: primal feasibility, the objective
/// value, dual feasibility of `dual`, and equality of both objectives.
pub fn verify_certificate(lp: &LinearProgram, sol: &Solution) -> Result<(), String> {
    let value = sol.value.as_ref().ok_or("no value")?;
    if let Err(i) = lp.check_feasible(&sol.point) {
        return Err(if i == usize::MAX {
            "negative coordinate".into()
        } else {
            format!("constraint {i} violated")
        });
    }
    if &lp.objective_value(&sol.point) != value {
        return Err("objective does not match value".into());
    }
    if sol.dual.len() != lp.num_constraints() {
        return Err("dual has wrong length".into());
    }
    let maximize = lp.sense() == Sense::Maximize;
    for (i, c) in lp.constraints().iter().enumerate() {
        let y = &sol.dual[i];
        // For minimisation: y ≥ 0 on ≥ rows, y ≤ 0 on ≤ rows; reversed for maximisation.
        let bad = match (c.relation, maximize) {
            (Relation::Eq, _) => false,
            (Relation::Ge, false) | (Relation::Le, true) => y.is_negative(),
            (Relation::Le, false) | (Relation::Ge, true) => y.is_positive(),
        };
        if bad {
            return Err(format!("dual sign wrong on row {i}"));
        }
    }
    let mut aty = vec![Rational::zero(); lp.num_vars()];
    for (i, c) in lp.constraints().iter().enumerate() {
        if sol.dual[i].is_zero() {
            continue;
        }
        for (j, a) in &c.coeffs {
            aty[*j] += a * &sol.dual[i];
        }
    }
    let mut cost = vec![Rational::zero(); lp.num_vars()];
    for (j, v) in lp.objective() {
        cost[*j] = v.clone();
    }
    for j in 0..lp.num_vars() {
        let ok = if maximize { aty[j] >= cost[j] } else { aty[j] <= cost[j] };
        if !ok {
            return Err(format!("dual constraint of variable {j} violated"));
        }
    }
    let rhs: Vec<(usize, Rational)> = lp
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.rhs.clone()))
        .collect();
    if &dot(&rhs, &sol.dual.iter().cloned().enumerate().collect::<Vec<_>>()) != value {
        return Err("dual objective differs from primal objective".into());
    }
    Ok(())
}

/// Approximate solution from the floating-point path.
#[derive(Debug, Clone)]
pub struct FloatSolution {
    pub status: Status,
    pub value: Option<f64>,
    pub point: Vec<(usize, f64)>,
    /// Largest constraint violation of `point`, including negativity.
    pub residual: f64,
    pub iterations: usize,
    basis: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Verification {
    /// The floating-point basis is exactly primal and dual feasible.
    Verified(Solution),
    Unverified { reason: String },
}

impl Verification {
    pub fn label(&self) -> &'static str {
        match self {
            Verification::Verified(_) => "verified",
            Verification::Unverified { .. } => "unverified",
        }
    }
}

/// Solves `lp` in floating point; fails if the reported point violates the
/// constraints by more than `tol`.
pub fn solve_float(lp: &LinearProgram, tol: f64) -> Result<FloatSolution, LpError> {
    let prep = prepare(lp);
    if prep.pre.infeasible {
        return Ok(FloatSolution {
            status: Status::Infeasible,
            value: None,
            point: Vec::new(),
            residual: 0.0,
            iterations: 0,
            basis: Vec::new(),
        });
    }
    let sf_f = prep.sf.convert(to_f64);
    let mut tols = Tolerances::float();
    tols.primal = tols.primal.min(tol);
    let res = two_phase(&sf_f, tols).map_err(|_| LpError::NumericallyUnstable {
        residual: f64::INFINITY,
        tol,
    })?;
    let status = match res.outcome {
        Outcome::Optimal => Status::Optimal,
        Outcome::Infeasible => Status::Infeasible,
        Outcome::Unbounded => Status::Unbounded,
    };
    if status != Status::Optimal {
        return Ok(FloatSolution {
            status,
            value: None,
            point: Vec::new(),
            residual: 0.0,
            iterations: res.iterations,
            basis: res.basis,
        });
    }
    let mut point = Vec::new();
    for (k, v) in res.x.iter().enumerate().take(prep.col_map.len()) {
        if *v != 0.0 {
            point.push((prep.col_map[k], *v));
        }
    }
    let residual = float_residual(lp, &point);
    if !(residual <= tol) {
        return Err(LpError::NumericallyUnstable { residual, tol });
    }
    let mut value = 0.0;
    let mut dense = vec![0.0; lp.num_vars()];
    for (j, v) in &point {
        dense[*j] = *v;
    }
    for (j, c) in lp.objective() {
        value += to_f64(c) * dense[*j];
    }
    Ok(FloatSolution {
        status,
        value: Some(value),
        point,
        residual,
        iterations: res.iterations,
        basis: res.basis,
    })
}

fn float_residual(lp: &LinearProgram, point: &[(usize, f64)]) -> f64 {
    let mut dense = vec![0.0; lp.num_vars()];
    let mut worst: f64 = 0.0;
    for (j, v) in point {
        dense[*j] = *v;
        worst = worst.max(-v);
    }
    for c in lp.constraints() {
        let lhs: f64 = c.coeffs.iter().map(|(j, a)| to_f64(a) * dense[*j]).sum();
        let rhs = to_f64(&c.rhs);
        let viol = match c.relation {
            Relation::Eq => (lhs - rhs).abs(),
            Relation::Le => lhs - rhs,
            Relation::Ge => rhs - lhs,
        };
        worst = worst.max(viol);
    }
    worst
}

impl FloatSolution {
    /// Snaps the final basis to exact arithmetic and checks that it is
    /// primal and dual feasible without further pivoting.
    pub fn verify(&self, lp: &LinearProgram) -> Verification {
        let unverified = |reason: &str| Verification::Unverified {
            reason: reason.to_string(),
        };
        if self.status != Status::Optimal {
            return unverified("float solve was not optimal");
        }
        let prep = prepare(lp);
        if prep.pre.infeasible || self.basis.len() != prep.sf.m {
            return unverified("basis does not match the problem");
        }
        let Ok(mut e) = Engine::with_basis(&prep.sf, Tolerances::exact(), self.basis.clone()) else {
            return unverified("basis is singular in exact arithmetic");
        };
        if e.basis != self.basis {
            return unverified("basis is singular in exact arithmetic");
        }
        if !e.artificials_at_zero() || !e.primal_feasible() {
            return unverified("basic solution is infeasible in exact arithmetic");
        }
        e.pin_artificials();
        let c2 = e.phase2_costs();
        e.set_costs(c2);
        if !e.dual_feasible() {
            return unverified("basis is not optimal in exact arithmetic");
        }
        let stats = SolveStats {
            float_iterations: self.iterations,
            rows: lp.num_constraints(),
            cols: lp.num_vars(),
            presolved_rows: prep.sf.m,
            presolved_cols: prep.col_map.len(),
            ..SolveStats::default()
        };
        let sol = assemble(lp, &prep, finish(e, Outcome::Optimal), stats);
        match verify_certificate(lp, &sol) {
            Ok(()) => Verification::Verified(sol),
            Err(msg) => Verification::Unverified { reason: msg },
        }
    }
}
