//! Revised primal simplex on a problem in standard form
//! `min cᵀx  s.t.  A x = b, x ≥ 0` with `b ≥ 0`.
//!
//! Column indices: `0..n` are structural and slack columns, `n..n+m` are the
//! artificial unit columns (one per row) and `n+m` is an optional shift column
//! used to regain feasibility from an arbitrary starting basis.

use crate::field::Field;
use crate::lu::LuFactor;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub primal: f64,
    pub dual: f64,
    pub pivot: f64,
    pub drop: f64,
}

impl Tolerances {
    pub fn float() -> Self {
        Tolerances {
            primal: 1e-9,
            dual: 1e-9,
            pivot: 1e-9,
            drop: 1e-14,
        }
    }

    pub fn exact() -> Self {
        Tolerances {
            primal: 0.0,
            dual: 0.0,
            pivot: 0.0,
            drop: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm<F> {
    pub m: usize,
    pub n: usize,
    pub cols: Vec<Vec<(usize, F)>>,
    pub rows: Vec<Vec<(usize, F)>>,
    pub b: Vec<F>,
    pub c: Vec<F>,
    /// Per row, a column equal to the unit vector of that row, if any.
    pub unit: Vec<Option<usize>>,
}

impl<F: Field> StandardForm<F> {
    pub fn from_columns(m: usize, cols: Vec<Vec<(usize, F)>>, b: Vec<F>, c: Vec<F>) -> Self {
        let n = cols.len();
        let mut rows: Vec<Vec<(usize, F)>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col {
                rows[*i].push((j, v.clone()));
            }
        }
        let one = F::one();
        let mut unit = vec![None; m];
        for (j, col) in cols.iter().enumerate() {
            if col.len() == 1 {
                let (i, v) = &col[0];
                if unit[*i].is_none() && v.sub(&one).exact_zero() && c[j].exact_zero() {
                    unit[*i] = Some(j);
                }
            }
        }
        StandardForm {
            m,
            n,
            cols,
            rows,
            b,
            c,
            unit,
        }
    }

    pub fn convert<G: Field>(&self, f: impl Fn(&F) -> G) -> StandardForm<G> {
        let conv = |v: &Vec<(usize, F)>| v.iter().map(|(i, x)| (*i, f(x))).collect::<Vec<_>>();
        StandardForm {
            m: self.m,
            n: self.n,
            cols: self.cols.iter().map(conv).collect(),
            rows: self.rows.iter().map(conv).collect(),
            b: self.b.iter().map(&f).collect(),
            c: self.c.iter().map(&f).collect(),
            unit: self.unit.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, thiserror::Error)]
pub(crate) enum EngineError {
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone)]
struct Eta<F> {
    r: usize,
    pivot: F,
    entries: Vec<(usize, F)>,
}

const NONBASIC: usize = usize::MAX;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_BEFORE_BLAND: usize = 60;

pub(crate) struct Engine<'a, F: Field> {
    sf: &'a StandardForm<F>,
    tol: Tolerances,
    pub basis: Vec<usize>,
    pos: Vec<usize>,
    eligible: Vec<bool>,
    cost: Vec<F>,
    d: Vec<F>,
    pub xb: Vec<F>,
    lu: LuFactor<F>,
    etas: Vec<Eta<F>>,
    weights: Vec<f64>,
    shift: Option<Vec<F>>,
    pin_artificials: bool,
    bland: bool,
    degenerate_run: usize,
    pub iterations: usize,
    pub max_iterations: usize,
    row_acc: Vec<F>,
    row_mark: Vec<bool>,
    next_candidate: Option<usize>,
}

impl<'a, F: Field> Engine<'a, F> {
    fn total(&self) -> usize {
        self.sf.n + self.sf.m + 1
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.sf.n && j < self.sf.n + self.sf.m
    }

    fn piv_floor(&self) -> f64 {
        if F::EXACT {
            0.0
        } else {
            self.tol.pivot.max(1e-9)
        }
    }

    fn shift_index(&self) -> usize {
        self.sf.n + self.sf.m
    }

    fn blank(sf: &'a StandardForm<F>, tol: Tolerances, basis: Vec<usize>) -> Self {
        let total = sf.n + sf.m + 1;
        let mut pos = vec![NONBASIC; total];
        for (p, &j) in basis.iter().enumerate() {
            pos[j] = p;
        }
        let mut eligible = vec![true; total];
        for e in eligible.iter_mut().skip(sf.n) {
            *e = false;
        }
        Engine {
            sf,
            tol,
            basis,
            pos,
            eligible,
            cost: vec![F::zero(); total],
            d: vec![F::zero(); total],
            xb: vec![F::zero(); sf.m],
            lu: LuFactor::identity(sf.m),
            etas: Vec::new(),
            weights: vec![1.0; total],
            shift: None,
            pin_artificials: false,
            bland: false,
            degenerate_run: 0,
            iterations: 0,
            max_iterations: 50 * (sf.m + sf.n) + 10_000,
            row_acc: vec![F::zero(); total],
            row_mark: vec![false; total],
            next_candidate: None,
        }
    }

    /// Starts from the unit columns of the problem, filling the rest with artificials.
    pub fn slack_start(sf: &'a StandardForm<F>, tol: Tolerances) -> Result<Self, EngineError> {
        let basis: Vec<usize> = (0..sf.m)
            .map(|i| sf.unit[i].unwrap_or(sf.n + i))
            .collect();
        let mut e = Self::blank(sf, tol, basis);
        e.refactor()?;
        Ok(e)
    }

    /// Starts from a given basis (column indices, artificials allowed).
    pub fn with_basis(
        sf: &'a StandardForm<F>,
        tol: Tolerances,
        basis: Vec<usize>,
    ) -> Result<Self, EngineError> {
        assert_eq!(basis.len(), sf.m);
        let mut e = Self::blank(sf, tol, basis);
        e.refactor()?;
        Ok(e)
    }

    pub fn has_artificials(&self) -> bool {
        self.basis.iter().any(|&j| self.is_artificial(j))
    }

    fn column(&self, j: usize) -> Vec<(usize, F)> {
        if j < self.sf.n {
            self.sf.cols[j].clone()
        } else if j < self.sf.n + self.sf.m {
            vec![(j - self.sf.n, F::one())]
        } else {
            let s = self.shift.as_ref().expect("shift column");
            s.iter()
                .enumerate()
                .filter(|(_, v)| !v.exact_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect()
        }
    }

    fn column_dot(&self, j: usize, y: &[F]) -> F {
        if j < self.sf.n {
            let mut acc = F::zero();
            for (i, a) in &self.sf.cols[j] {
                if !y[*i].exact_zero() {
                    acc = acc.add(&a.mul(&y[*i]));
                }
            }
            acc
        } else if j < self.sf.n + self.sf.m {
            y[j - self.sf.n].clone()
        } else {
            let s = self.shift.as_ref().expect("shift column");
            let mut acc = F::zero();
            for (i, v) in s.iter().enumerate() {
                if !v.exact_zero() && !y[i].exact_zero() {
                    acc = acc.add(&v.mul(&y[i]));
                }
            }
            acc
        }
    }

    /// Refactorises the basis; singular bases are repaired with artificials.
    fn refactor(&mut self) -> Result<bool, EngineError> {
        let m = self.sf.m;
        let mut repaired = false;
        for _attempt in 0..3 {
            let cols: Vec<Vec<(usize, F)>> = self.basis.iter().map(|&j| self.column(j)).collect();
            match LuFactor::factor(m, &cols, self.tol.drop) {
                Ok(lu) => {
                    self.lu = lu;
                    self.etas.clear();
                    self.compute_xb();
                    self.compute_d();
                    return Ok(repaired);
                }
                Err(s) => {
                    repaired = true;
                    for (&p, &i) in s.free_cols.iter().zip(s.free_rows.iter()) {
                        let old = self.basis[p];
                        self.pos[old] = NONBASIC;
                        let art = self.sf.n + i;
                        if self.pos[art] != NONBASIC {
                            return Err(EngineError::Numerical("cannot repair singular basis".into()));
                        }
                        self.basis[p] = art;
                        self.pos[art] = p;
                    }
                }
            }
        }
        Err(EngineError::Numerical("basis stays singular after repair".into()))
    }

    fn ftran(&self, mut a: Vec<F>) -> Vec<F> {
        let mut x = self.lu.solve(&mut a, self.tol.drop);
        for eta in &self.etas {
            let xr = &x[eta.r];
            if xr.is_zero_tol(self.tol.drop) {
                continue;
            }
            let xr = xr.div(&eta.pivot);
            for (i, a) in &eta.entries {
                x[*i].sub_mul_assign(a, &xr);
            }
            x[eta.r] = xr;
        }
        x
    }

    fn btran(&self, mut c: Vec<F>) -> Vec<F> {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.r].clone();
            for (i, a) in &eta.entries {
                if !c[*i].exact_zero() {
                    v.sub_mul_assign(a, &c[*i]);
                }
            }
            c[eta.r] = v.div(&eta.pivot);
        }
        self.lu.solve_transpose(&c, self.tol.drop)
    }

    fn dense_column(&self, j: usize) -> Vec<F> {
        let mut a = vec![F::zero(); self.sf.m];
        for (i, v) in self.column(j) {
            a[i] = v;
        }
        a
    }

    fn compute_xb(&mut self) {
        self.xb = self.ftran(self.sf.b.clone());
        if !F::EXACT {
            for v in self.xb.iter_mut() {
                if v.is_zero_tol(self.tol.drop) {
                    *v = F::zero();
                }
            }
        }
    }

    pub fn duals(&self) -> Vec<F> {
        let cb: Vec<F> = self.basis.iter().map(|&j| self.cost[j].clone()).collect();
        self.btran(cb)
    }

    fn compute_d(&mut self) {
        self.next_candidate = None;
        let y = self.duals();
        for j in 0..self.total() {
            if j == self.shift_index() && self.shift.is_none() {
                self.d[j] = F::zero();
                continue;
            }
            if self.pos[j] != NONBASIC {
                self.d[j] = F::zero();
            } else {
                self.d[j] = self.cost[j].sub(&self.column_dot(j, &y));
            }
        }
    }

    pub fn set_costs(&mut self, cost: Vec<F>) {
        assert_eq!(cost.len(), self.total());
        self.cost = cost;
        self.bland = false;
        self.degenerate_run = 0;
        self.compute_d();
    }

    pub fn phase1_costs(&self) -> Vec<F> {
        let mut c = vec![F::zero(); self.total()];
        for ci in c.iter_mut().skip(self.sf.n).take(self.sf.m) {
            *ci = F::one();
        }
        c
    }

    pub fn phase2_costs(&self) -> Vec<F> {
        let mut c = vec![F::zero(); self.total()];
        c[..self.sf.n].clone_from_slice(&self.sf.c);
        c
    }

    pub fn artificial_mass(&self) -> F {
        let mut acc = F::zero();
        for (p, &j) in self.basis.iter().enumerate() {
            if self.is_artificial(j) {
                acc = acc.add(&self.xb[p]);
            }
        }
        acc
    }

    fn price(&mut self) -> Option<usize> {
        let tol = self.tol.dual;
        if let Some(j) = self.next_candidate.take() {
            if !self.bland && self.eligible[j] && self.pos[j] == NONBASIC && self.d[j].is_neg_tol(tol) {
                return Some(j);
            }
        }
        if self.bland {
            return (0..self.total())
                .find(|&j| self.eligible[j] && self.pos[j] == NONBASIC && self.d[j].is_neg_tol(tol));
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.total() {
            if !self.eligible[j] || self.pos[j] != NONBASIC {
                continue;
            }
            if !self.d[j].is_neg_tol(tol) {
                continue;
            }
            let score = self.score(j);
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Returns the leaving position and the step length.
    fn ratio_test(&self, alpha: &[F]) -> Option<(usize, F)> {
        let ptol = self.tol.pivot;
        let pinned = |p: usize| {
            let j = self.basis[p];
            (self.pin_artificials && self.is_artificial(j))
                || (j == self.shift_index() && !self.eligible[j])
        };
        if F::EXACT {
            let mut best: Option<(usize, F)> = None;
            for p in 0..self.sf.m {
                let a = &alpha[p];
                if a.exact_zero() {
                    continue;
                }
                let ratio = if a.is_pos_tol(0.0) {
                    self.xb[p].div(a)
                } else if pinned(p) {
                    F::zero()
                } else {
                    continue;
                };
                let replace = match &best {
                    None => true,
                    Some((bp, bv)) => {
                        let diff = ratio.sub(bv);
                        if diff.is_neg_tol(0.0) {
                            true
                        } else if diff.exact_zero() {
                            if self.bland {
                                self.basis[p] < self.basis[*bp]
                            } else {
                                a.abs_f64() > alpha[*bp].abs_f64()
                            }
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    best = Some((p, ratio));
                }
            }
            return best;
        }
        // Harris two-pass ratio test.
        let ftol = self.tol.primal;
        let mut bound = f64::INFINITY;
        for p in 0..self.sf.m {
            let a = alpha[p].to_f64();
            if a > ptol {
                let x = self.xb[p].to_f64().max(0.0);
                bound = bound.min((x + ftol) / a);
            } else if a < -ptol && pinned(p) {
                bound = bound.min(ftol / -a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for p in 0..self.sf.m {
            let a = alpha[p].to_f64();
            let eligible = a > ptol || (a < -ptol && pinned(p));
            if !eligible {
                continue;
            }
            let x = if a > 0.0 { self.xb[p].to_f64().max(0.0) } else { 0.0 };
            let ratio = x / a.abs();
            if ratio <= bound {
                let better = match best {
                    None => true,
                    Some((bp, _)) => {
                        if self.bland {
                            self.basis[p] < self.basis[bp]
                        } else {
                            a.abs() > alpha[bp].to_f64().abs()
                        }
                    }
                };
                if better {
                    best = Some((p, ratio));
                }
            }
        }
        best.map(|(p, _)| {
            let a = &alpha[p];
            let theta = if a.is_pos_tol(0.0) {
                let t = self.xb[p].div(a);
                if t.is_neg_tol(0.0) {
                    F::zero()
                } else {
                    t
                }
            } else {
                F::zero()
            };
            (p, theta)
        })
    }

    fn rho(&mut self, r: usize) -> Vec<F> {
        let mut e = vec![F::zero(); self.sf.m];
        e[r] = F::one();
        self.btran(e)
    }

    /// Computes row `r` of `B⁻¹A` over all columns; returns the touched columns.
    fn pivot_row(&mut self, r: usize) -> Vec<usize> {
        let rho = self.rho(r);
        self.scatter_row(&rho)
    }

    fn scatter_row(&mut self, rho: &[F]) -> Vec<usize> {
        let mut touched = Vec::new();
        let n = self.sf.n;
        for (i, ri) in rho.iter().enumerate() {
            if ri.is_zero_tol(self.tol.drop) {
                continue;
            }
            for (j, a) in &self.sf.rows[i] {
                if !self.row_mark[*j] {
                    self.row_mark[*j] = true;
                    touched.push(*j);
                    self.row_acc[*j] = F::zero();
                }
                let t = a.mul(ri);
                self.row_acc[*j] = self.row_acc[*j].add(&t);
            }
            let art = n + i;
            self.row_mark[art] = true;
            touched.push(art);
            self.row_acc[art] = ri.clone();
        }
        if self.shift.is_some() {
            let s = self.shift_index();
            let v = self.column_dot(s, rho);
            self.row_mark[s] = true;
            touched.push(s);
            self.row_acc[s] = v;
        }
        touched
    }

    fn score(&self, j: usize) -> f64 {
        let v = self.d[j].to_f64();
        let score = v * v / self.weights[j];
        // Exact values may underflow to zero in f64; keep them eligible.
        if score > 0.0 {
            score
        } else {
            f64::MIN_POSITIVE
        }
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: Vec<F>, theta: F) {
        let m = self.sf.m;
        // Primal update.
        if !theta.exact_zero() {
            for p in 0..m {
                if !alpha[p].exact_zero() {
                    self.xb[p].sub_mul_assign(&theta, &alpha[p]);
                }
            }
        }
        self.xb[r] = theta;
        if !F::EXACT {
            for v in self.xb.iter_mut() {
                if v.is_neg_tol(0.0) && v.is_zero_tol(self.tol.primal) {
                    *v = F::zero();
                }
            }
        }

        // Dual update through the pivot row.
        let leaving = self.basis[r];
        let arq = alpha[r].clone();
        let ratio = self.d[q].div(&arq);
        let wq = self.weights[q].max(1.0);
        let arq_f = arq.to_f64();
        let rho = self.rho(r);
        let rho_nnz = rho.iter().filter(|v| !v.is_zero_tol(self.tol.drop)).count();
        self.next_candidate = None;
        if rho_nnz * 8 > self.sf.m {
            // Dense row of the inverse: sweep the columns once, updating the
            // reduced costs and choosing the next entering column on the way.
            let tol = self.tol.dual;
            let mut best: Option<(usize, f64)> = None;
            let shift = self.shift.is_some().then(|| self.shift_index());
            let cols = (0..self.sf.n).chain(shift);
            for j in cols {
                if j == q || (self.pos[j] != NONBASIC && j != leaving) {
                    continue;
                }
                let arj = self.column_dot(j, &rho);
                if !arj.is_zero_tol(self.tol.drop) {
                    self.d[j].sub_mul_assign(&ratio, &arj);
                    if j != leaving {
                        let g = arj.to_f64() / arq_f;
                        let cand = g * g * wq;
                        if cand > self.weights[j] {
                            self.weights[j] = cand;
                        }
                    }
                }
                if self.eligible[j] && self.d[j].is_neg_tol(tol) {
                    let sc = self.score(j);
                    if best.map_or(true, |(_, b)| sc > b) {
                        best = Some((j, sc));
                    }
                }
            }
            for i in 0..self.sf.m {
                if !rho[i].is_zero_tol(self.tol.drop) {
                    let art = self.sf.n + i;
                    self.d[art].sub_mul_assign(&ratio, &rho[i]);
                }
            }
            self.next_candidate = best.map(|(j, _)| j);
        } else {
            let touched = self.scatter_row(&rho);
            for &j in &touched {
                let arj = std::mem::replace(&mut self.row_acc[j], F::zero());
                self.row_mark[j] = false;
                if arj.is_zero_tol(self.tol.drop) {
                    continue;
                }
                if self.pos[j] == NONBASIC || j == leaving {
                    self.d[j].sub_mul_assign(&ratio, &arj);
                    let g = arj.to_f64() / arq_f;
                    let cand = g * g * wq;
                    if cand > self.weights[j] {
                        self.weights[j] = cand;
                    }
                }
            }
        }
        self.d[q] = F::zero();
        self.weights[leaving] = (wq / (arq_f * arq_f)).max(1.0);
        if !self.weights[leaving].is_finite() {
            self.weights[leaving] = 1.0;
        }

        // Basis update.
        self.pos[leaving] = NONBASIC;
        self.pos[q] = r;
        self.basis[r] = q;
        let entries: Vec<(usize, F)> = alpha
            .into_iter()
            .enumerate()
            .filter(|(i, v)| *i != r && !v.is_zero_tol(self.tol.drop))
            .collect();
        self.etas.push(Eta {
            r,
            pivot: arq,
            entries,
        });
        self.iterations += 1;
    }

    /// Runs simplex iterations with the current costs until optimal or unbounded.
    pub fn run(&mut self) -> Result<Outcome, EngineError> {
        loop {
            if self.iterations >= self.max_iterations {
                return Err(EngineError::IterationLimit);
            }
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor_checked()?;
            }
            let priced = self.price();
            let Some(q) = priced else {
                if !F::EXACT && !self.etas.is_empty() {
                    // Confirm optimality on fresh factors.
                    self.refactor_checked()?;
                    if self.price().is_some() {
                        continue;
                    }
                }
                return Ok(Outcome::Optimal);
            };
            let alpha = self.ftran(self.dense_column(q));
            if !F::EXACT {
                // Recompute d_q from the column to catch drift in the updated values.
                let mut dq = self.cost[q].clone();
                for (p, a) in alpha.iter().enumerate() {
                    let cb = &self.cost[self.basis[p]];
                    if !cb.exact_zero() && !a.exact_zero() {
                        dq.sub_mul_assign(cb, a);
                    }
                }
                let drift = !dq.is_neg_tol(self.tol.dual);
                self.d[q] = dq;
                if drift {
                    continue;
                }
            }
            let Some((r, theta)) = self.ratio_test(&alpha) else {
                if !F::EXACT && !self.etas.is_empty() {
                    self.refactor_checked()?;
                    continue;
                }
                return Ok(Outcome::Unbounded);
            };
            if !F::EXACT && alpha[r].abs_f64() < 1e-7 && !self.etas.is_empty() {
                // Tiny pivot on stale factors: refresh and price again.
                self.refactor_checked()?;
                continue;
            }
            if theta.is_zero_tol(self.tol.primal) {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_BEFORE_BLAND {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            self.pivot(q, r, alpha, theta);
        }
    }

    fn refactor_checked(&mut self) -> Result<(), EngineError> {
        let repaired = self.refactor()?;
        if repaired {
            let bad = self
                .xb
                .iter()
                .any(|v| v.is_neg_tol(self.tol.primal.max(1e-7)));
            if bad {
                return Err(EngineError::Numerical(
                    "basis repair lost primal feasibility".into(),
                ));
            }
        }
        if !F::EXACT {
            for v in self.xb.iter_mut() {
                if v.is_neg_tol(0.0) && v.is_zero_tol(self.tol.primal) {
                    *v = F::zero();
                }
            }
        }
        Ok(())
    }

    /// Pivots basic artificials out where possible, then pins the rest at zero.
    pub fn drive_out_artificials(&mut self) -> Result<(), EngineError> {
        for r in 0..self.sf.m {
            let j = self.basis[r];
            if !self.is_artificial(j) {
                continue;
            }
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor_checked()?;
            }
            let touched = self.pivot_row(r);
            let mut best: Option<(usize, f64)> = None;
            for &k in &touched {
                let v = self.row_acc[k].abs_f64();
                let ok = k < self.sf.n
                    && self.pos[k] == NONBASIC
                    && !self.row_acc[k].is_zero_tol(self.piv_floor());
                if ok && best.map_or(true, |(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            for &k in &touched {
                self.row_acc[k] = F::zero();
                self.row_mark[k] = false;
            }
            if let Some((q, _)) = best {
                let alpha = self.ftran(self.dense_column(q));
                let theta = self.xb[r].div(&alpha[r]);
                let theta = if theta.is_neg_tol(0.0) { F::zero() } else { theta };
                self.pivot(q, r, alpha, theta);
            }
        }
        for j in self.sf.n..self.sf.n + self.sf.m {
            self.eligible[j] = false;
        }
        self.pin_artificials = true;
        Ok(())
    }

    pub fn pin_artificials(&mut self) {
        for j in self.sf.n..self.sf.n + self.sf.m {
            self.eligible[j] = false;
        }
        self.pin_artificials = true;
    }

    /// Installs a shift column so that the current (possibly infeasible)
    /// basic solution becomes feasible after one pivot, then minimises the
    /// shift. Returns `false` if the problem turns out infeasible.
    pub fn restore_feasibility(&mut self) -> Result<bool, EngineError> {
        let m = self.sf.m;
        let negative: Vec<usize> = (0..m)
            .filter(|&p| self.xb[p].is_neg_tol(self.tol.primal))
            .collect();
        if negative.is_empty() {
            return Ok(true);
        }
        let mut col = vec![F::zero(); m];
        for &p in &negative {
            for (i, v) in self.column(self.basis[p]) {
                col[i] = col[i].sub(&v);
            }
        }
        self.shift = Some(col);
        let s = self.shift_index();
        self.eligible[s] = true;
        let mut cost = vec![F::zero(); self.total()];
        cost[s] = F::one();
        self.set_costs(cost);

        let alpha = self.ftran(self.dense_column(s));
        // Entering the shift raises every negative basic value at unit rate;
        // the most negative one leaves.
        let mut r = negative[0];
        for &p in &negative {
            if self.xb[p].sub(&self.xb[r]).is_neg_tol(0.0) {
                r = p;
            }
        }
        let theta = self.xb[r].div(&alpha[r]);
        self.pivot(s, r, alpha, theta);
        for &p in &negative {
            if self.xb[p].is_neg_tol(0.0) {
                self.xb[p] = F::zero();
            }
        }
        let out = self.run()?;
        debug_assert_eq!(out, Outcome::Optimal);
        let sp = self.pos[s];
        if sp != NONBASIC && self.xb[sp].is_pos_tol(self.tol.primal) {
            return Ok(false);
        }
        if sp != NONBASIC {
            // Shift is basic at zero: pivot it out or pin it.
            let touched = self.pivot_row(sp);
            let mut best: Option<(usize, f64)> = None;
            for &k in &touched {
                let v = self.row_acc[k].abs_f64();
                if k < self.sf.n && self.pos[k] == NONBASIC && !self.row_acc[k].is_zero_tol(self.piv_floor()) && best.map_or(true, |(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            for &k in &touched {
                self.row_acc[k] = F::zero();
                self.row_mark[k] = false;
            }
            if let Some((q, _)) = best {
                let alpha = self.ftran(self.dense_column(q));
                self.pivot(q, sp, alpha, F::zero());
            }
        }
        self.eligible[s] = false;
        Ok(true)
    }

    /// True if every basic artificial sits at zero.
    pub fn artificials_at_zero(&self) -> bool {
        self.basis
            .iter()
            .zip(&self.xb)
            .all(|(&j, v)| !self.is_artificial(j) || v.is_zero_tol(self.tol.primal))
    }

    pub fn primal_feasible(&self) -> bool {
        self.xb.iter().all(|v| !v.is_neg_tol(self.tol.primal))
    }

    /// True if no eligible column has a negative reduced cost.
    pub fn dual_feasible(&mut self) -> bool {
        self.price().is_none()
    }

    /// Basic solution over structural and slack columns.
    pub fn primal(&self) -> Vec<F> {
        let mut x = vec![F::zero(); self.sf.n];
        for (p, &j) in self.basis.iter().enumerate() {
            if j < self.sf.n {
                x[j] = self.xb[p].clone();
            }
        }
        x
    }

}

/// Result of running both phases on a standard-form problem.
pub(crate) struct EngineResult<F> {
    pub outcome: Outcome,
    pub basis: Vec<usize>,
    pub x: Vec<F>,
    pub y: Vec<F>,
    pub iterations: usize,
}

/// Two-phase simplex. The floating-point path first solves a copy whose
/// variables have slightly negative lower bounds (`x ≥ -δ`), which breaks the
/// heavy primal degeneracy of cone-like programs, and then cleans up from the
/// resulting basis on the true data.
pub(crate) fn two_phase<F: Field>(
    sf: &StandardForm<F>,
    tol: Tolerances,
) -> Result<EngineResult<F>, EngineError> {
    if F::EXACT {
        return two_phase_plain(sf, tol);
    }
    let perturbed = perturb(sf);
    let first = two_phase_plain(&perturbed, tol)?;
    if first.outcome != Outcome::Optimal {
        return two_phase_plain(sf, tol);
    }
    let mut e = Engine::with_basis(sf, tol, first.basis)?;
    e.iterations = first.iterations;
    if !e.artificials_at_zero() {
        return two_phase_plain(sf, tol);
    }
    e.pin_artificials();
    if !e.restore_feasibility()? {
        return two_phase_plain(sf, tol);
    }
    let c2 = e.phase2_costs();
    e.set_costs(c2);
    let outcome = e.run()?;
    Ok(finish(e, outcome))
}

/// Replaces `b` by `b + A·δ` for small pseudo-random `δ > 0`.
fn perturb<F: Field>(sf: &StandardForm<F>) -> StandardForm<F> {
    let mut out = sf.clone();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for (j, col) in sf.cols.iter().enumerate() {
        state ^= j as u64;
        state = state.wrapping_mul(0xbf58_476d_1ce4_e5b9).rotate_left(31);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        let delta = F::from_f64(1e-6 * (1.0 + u));
        for (i, a) in col {
            out.b[*i] = out.b[*i].add(&a.mul(&delta));
        }
    }
    // Keep b ≥ 0 by flipping rows that went negative.
    let flip: Vec<bool> = out.b.iter().map(|v| v.is_neg_tol(0.0)).collect();
    if flip.iter().any(|&f| f) {
        let neg = |i: usize, v: &F| if flip[i] { v.neg() } else { v.clone() };
        let cols: Vec<Vec<(usize, F)>> = out
            .cols
            .iter()
            .map(|col| col.iter().map(|(i, v)| (*i, neg(*i, v))).collect())
            .collect();
        let b: Vec<F> = out.b.iter().enumerate().map(|(i, v)| neg(i, v)).collect();
        out = StandardForm::from_columns(out.m, cols, b, out.c);
    }
    out
}

fn two_phase_plain<F: Field>(
    sf: &StandardForm<F>,
    tol: Tolerances,
) -> Result<EngineResult<F>, EngineError> {
    let mut e = Engine::slack_start(sf, tol)?;
    if e.has_artificials() {
        let c1 = e.phase1_costs();
        e.set_costs(c1);
        e.run()?;
        if e.artificial_mass().is_pos_tol(tol.primal.max(0.0) * 10.0) {
            return Ok(EngineResult {
                outcome: Outcome::Infeasible,
                basis: e.basis.clone(),
                x: Vec::new(),
                y: Vec::new(),
                iterations: e.iterations,
            });
        }
        e.drive_out_artificials()?;
    } else {
        e.pin_artificials();
    }
    let c2 = e.phase2_costs();
    e.set_costs(c2);
    let outcome = e.run()?;
    Ok(finish(e, outcome))
}

pub(crate) fn finish<F: Field>(e: Engine<'_, F>, outcome: Outcome) -> EngineResult<F> {
    let x = e.primal();
    let y = e.duals();
    EngineResult {
        outcome,
        basis: e.basis.clone(),
        x,
        y,
        iterations: e.iterations,
    }
}
