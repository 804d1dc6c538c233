//! Removal of forcing rows: a row `Σ aⱼxⱼ (=|≤) 0` whose remaining
//! coefficients are all positive fixes every variable in it at zero (and
//! symmetrically for negative coefficients with `=` or `≥`).

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::problem::{LinearProgram, Relation};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    pub row_kept: Vec<bool>,
    pub col_kept: Vec<bool>,
    /// Removed rows in removal order, each with the columns it fixed at zero.
    pub removed: Vec<(usize, Vec<usize>)>,
    pub infeasible: bool,
}

pub(crate) fn presolve(lp: &LinearProgram) -> Presolved {
    let m = lp.num_constraints();
    let n = lp.num_vars();
    let cons = lp.constraints();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in cons.iter().enumerate() {
        for (j, _) in &c.coeffs {
            col_rows[*j].push(i);
        }
    }
    let mut row_kept = vec![true; m];
    let mut col_kept = vec![true; n];
    let mut removed = Vec::new();
    let mut queued = vec![true; m];
    let mut queue: VecDeque<usize> = (0..m).collect();

    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        if !row_kept[i] {
            continue;
        }
        let c = &cons[i];
        let live: Vec<&(usize, Rational)> = c.coeffs.iter().filter(|(j, _)| col_kept[*j]).collect();
        if live.is_empty() {
            let ok = match c.relation {
                Relation::Eq => c.rhs.is_zero(),
                Relation::Le => !c.rhs.is_negative(),
                Relation::Ge => !c.rhs.is_positive(),
            };
            if !ok {
                return Presolved {
                    row_kept,
                    col_kept,
                    removed,
                    infeasible: true,
                };
            }
            row_kept[i] = false;
            removed.push((i, Vec::new()));
            continue;
        }
        if !c.rhs.is_zero() {
            continue;
        }
        let all_pos = live.iter().all(|(_, a)| a.is_positive());
        let all_neg = live.iter().all(|(_, a)| a.is_negative());
        let forcing = match c.relation {
            Relation::Eq => all_pos || all_neg,
            Relation::Le => all_pos,
            Relation::Ge => all_neg,
        };
        if !forcing {
            continue;
        }
        let fixed: Vec<usize> = live.iter().map(|(j, _)| *j).collect();
        row_kept[i] = false;
        for &j in &fixed {
            col_kept[j] = false;
            for &k in &col_rows[j] {
                if row_kept[k] && !queued[k] {
                    queued[k] = true;
                    queue.push_back(k);
                }
            }
        }
        removed.push((i, fixed));
    }
    Presolved {
        row_kept,
        col_kept,
        removed,
        infeasible: false,
    }
}

/// Extends a dual vector of a minimisation problem (zeros on removed rows)
/// to one that is feasible for the fixed columns.
pub(crate) fn restore_duals(lp: &LinearProgram, pre: &Presolved, c_min: &[Rational], y: &mut [Rational]) {
    let cons = lp.constraints();
    let n = lp.num_vars();
    let mut col_entries: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for (i, c) in cons.iter().enumerate() {
        for (j, a) in &c.coeffs {
            col_entries[*j].push((i, a.clone()));
        }
    }
    for (r, fixed) in pre.removed.iter().rev() {
        let r = *r;
        y[r] = Rational::zero();
        if fixed.is_empty() {
            continue;
        }
        let row = &cons[r];
        let mut upper: Option<Rational> = None;
        let mut lower: Option<Rational> = None;
        for &j in fixed {
            let mut s = c_min[j].clone();
            let mut a_r = Rational::zero();
            for (k, a) in &col_entries[j] {
                if *k == r {
                    a_r = a.clone();
                } else if !y[*k].is_zero() {
                    s -= a * &y[*k];
                }
            }
            let bound = s / &a_r;
            if a_r.is_positive() {
                upper = Some(match upper {
                    Some(u) if u < bound => u,
                    _ => bound,
                });
            } else {
                lower = Some(match lower {
                    Some(l) if l > bound => l,
                    _ => bound,
                });
            }
        }
        let zero = Rational::zero();
        y[r] = match (upper, lower, row.relation) {
            (Some(u), None, _) => {
                if u < zero {
                    u
                } else {
                    zero
                }
            }
            (None, Some(l), _) => {
                if l > zero {
                    l
                } else {
                    zero
                }
            }
            _ => unreachable!("forcing rows have coefficients of one sign"),
        };
    }
}
