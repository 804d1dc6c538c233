//! Brute-force oracles for the exact solvers, shared with the workspace
//! acceptance run.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratlp::rational::{int, rat};
use ratlp::{
    solve_exact_with, solve_fractional, verify_certificate, ExactMethod, FractionalProgram, LinearProgram,
    LpError, Rational, Relation, Sense, Status,
};

/// Solves the square system `M z = rhs` by Gaussian elimination; `None` if singular.
fn solve_square(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let k = rhs.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..k {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
    }
    Some((0..k).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Independent rows of `[A | b]`; `None` if the system is inconsistent.
fn independent_rows(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<usize>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut basis: Vec<(Vec<Rational>, Rational, usize)> = Vec::new();
    let mut keep = Vec::new();
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let mut r = row.clone();
        let mut v = rhs.clone();
        for (br, bv, pc) in &basis {
            if !r[*pc].is_zero() {
                let f = &r[*pc] / &br[*pc];
                for c in 0..cols {
                    let t = &f * &br[c];
                    r[c] -= t;
                }
                v -= &f * bv;
            }
        }
        match (0..cols).find(|&c| !r[c].is_zero()) {
            Some(pc) => {
                basis.push((r, v, pc));
                keep.push(i);
            }
            None if !v.is_zero() => return None,
            None => {}
        }
    }
    Some(keep)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            if n - j < k - cur.len() {
                break;
            }
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Best objective over all basic feasible solutions (None = infeasible).
/// Only valid for bounded programs.
pub fn brute_force(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.num_vars();
    let slacks: Vec<usize> = lp
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.relation != Relation::Eq)
        .map(|(i, _)| i)
        .collect();
    let total = n + slacks.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, c) in lp.constraints().iter().enumerate() {
        let mut row = vec![Rational::zero(); total];
        for (j, v) in &c.coeffs {
            row[*j] = v.clone();
        }
        if let Some(s) = slacks.iter().position(|&r| r == i) {
            row[n + s] = match c.relation {
                Relation::Le => int(1),
                _ => int(-1),
            };
        }
        a.push(row);
        b.push(c.rhs.clone());
    }
    let keep = independent_rows(&a, &b)?;
    let a: Vec<Vec<Rational>> = keep.iter().map(|&i| a[i].clone()).collect();
    let b: Vec<Rational> = keep.iter().map(|&i| b[i].clone()).collect();
    let m = a.len();
    let mut cost = vec![Rational::zero(); total];
    for (j, v) in lp.objective() {
        cost[*j] = v.clone();
    }
    let mut best: Option<Rational> = None;
    if m == 0 {
        return Some(Rational::zero());
    }
    for subset in combinations(total, m) {
        let sq: Vec<Vec<Rational>> = (0..m)
            .map(|i| subset.iter().map(|&j| a[i][j].clone()).collect())
            .collect();
        let Some(z) = solve_square(sq, b.clone()) else { continue };
        if z.iter().any(|v| v.is_negative()) {
            continue;
        }
        let val: Rational = subset.iter().zip(&z).map(|(&j, v)| &cost[j] * v).sum();
        let better = match (&best, lp.sense()) {
            (None, _) => true,
            (Some(bv), Sense::Minimize) => val < *bv,
            (Some(bv), Sense::Maximize) => val > *bv,
        };
        if better {
            best = Some(val);
        }
    }
    best
}

pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=7);
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::with_vars(sense, n);
    lp.set_objective((0..n).map(|j| (j, int(rng.random_range(-5..=5)))));
    for _ in 0..m {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                row.push((j, int(rng.random_range(-4..=4))));
            }
        }
        let rel = match rng.random_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        // Mix of degenerate (zero) and ordinary right-hand sides.
        let rhs = if rng.random_bool(0.25) { 0 } else { rng.random_range(-6..=10) };
        lp.add_constraint(row, rel, int(rhs));
    }
    // Bounded feasible region: the oracle only sees vertices.
    lp.add_constraint((0..n).map(|j| (j, int(1))), Relation::Le, int(rng.random_range(1..=12)));
    lp
}

/// Null vector of a rank n−1 system, or `None`.
pub fn null_vector(rows: &[Vec<Rational>], n: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v /= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..n {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != n - 1 {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c)).unwrap();
    let mut x = vec![Rational::zero(); n];
    x[free] = int(1);
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = -m[i][free].clone();
    }
    Some(x)
}

pub struct Cone {
    pub n: usize,
    pub rows: Vec<(Vec<Rational>, Relation)>,
    pub p: Vec<Rational>,
    pub q: Vec<Rational>,
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn in_cone(c: &Cone, x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && c.rows.iter().all(|(a, rel)| {
            let v = dot(a, x);
            match rel {
                Relation::Eq => v.is_zero(),
                Relation::Le => !v.is_positive(),
                Relation::Ge => !v.is_negative(),
            }
        })
}

/// min p·x / q·x over the extreme rays (q > 0 entrywise, so every ray counts).
pub fn ray_oracle(c: &Cone) -> Option<Rational> {
    let n = c.n;
    let mut candidates: Vec<Vec<Rational>> = c.rows.iter().map(|(a, _)| a.clone()).collect();
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = int(1);
        candidates.push(e);
    }
    let k = candidates.len();
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let chosen: Vec<Vec<Rational>> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| candidates[i].clone()).collect();
        let Some(x) = null_vector(&chosen, n) else { continue };
        for dir in [x.clone(), x.iter().map(|v| -v).collect()] {
            if in_cone(c, &dir) {
                let ratio = dot(&c.p, &dir) / dot(&c.q, &dir);
                if best.as_ref().is_none_or(|b| ratio < *b) {
                    best = Some(ratio);
                }
            }
        }
    }
    best
}

pub fn random_cone(rng: &mut ChaCha8Rng) -> Cone {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(0..=3);
    let rows = (0..m)
        .map(|_| {
            let a: Vec<Rational> = (0..n).map(|_| int(rng.random_range(-3..=3))).collect();
            let rel = match rng.random_range(0..3) {
                0 => Relation::Eq,
                1 => Relation::Le,
                _ => Relation::Ge,
            };
            (a, rel)
        })
        .collect();
    Cone {
        n,
        rows,
        p: (0..n).map(|_| int(rng.random_range(-5..=5))).collect(),
        q: (0..n).map(|_| rat(rng.random_range(1..=6), rng.random_range(1..=3))).collect(),
    }
}

pub fn sparse(v: &[Rational]) -> Vec<(usize, Rational)> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect()
}

/// Random LPs against vertex enumeration under both exact methods.
/// Returns the number of optimal cases.
pub fn simplex_against_vertices(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut optimal = 0;
    for case in 0..cases {
        let lp = random_lp(&mut rng);
        let expected = brute_force(&lp);
        for method in [ExactMethod::Crossover, ExactMethod::PureExact] {
            let sol = solve_exact_with(&lp, method);
            match &expected {
                None if sol.status != Status::Infeasible => {
                    return Err(format!("case {case} {method:?}: {:?}, oracle infeasible", sol.status));
                }
                None => {}
                Some(v) => {
                    if sol.status != Status::Optimal || sol.value.as_ref() != Some(v) {
                        return Err(format!("case {case} {method:?}: {:?} {:?}, oracle {v}", sol.status, sol.value));
                    }
                    verify_certificate(&lp, &sol).map_err(|e| format!("case {case}: {e}"))?;
                }
            }
        }
        if expected.is_some() {
            optimal += 1;
        }
    }
    Ok(optimal)
}

/// Random cones: the Charnes–Cooper slice against the extreme-ray oracle.
/// Returns the number of cones with a slice.
pub fn slices_against_rays(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solved = 0;
    for case in 0..cases {
        let cone = random_cone(&mut rng);
        let expected = ray_oracle(&cone);
        let fp = FractionalProgram::over_cone(
            cone.n,
            Sense::Minimize,
            sparse(&cone.p),
            sparse(&cone.q),
            cone.rows.iter().map(|(a, rel)| (sparse(a), *rel)).collect(),
            int(1),
        );
        match (solve_fractional(&fp), expected) {
            (Ok(sol), Some(v)) if sol.status == Status::Optimal && sol.value.as_ref() == Some(&v) => solved += 1,
            (Err(LpError::NoNormalizablePoint), None) => {}
            (got, want) => return Err(format!("case {case}: solver {got:?}, oracle {want:?}")),
        }
    }
    Ok(solved)
}
