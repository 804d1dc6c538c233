//! Sparse LU factorisation of a square basis matrix with Markowitz pivoting.
//!
//! The factorisation records the elimination as a sequence of row operations
//! (`lower`) and the pivot rows that remain (`upper`). Rows are indexed by
//! constraint row, columns by basis position.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::field::Field;

/// Relative threshold for accepting a pivot in the floating-point path.
const PIVOT_THRESHOLD: f64 = 0.01;
/// Markowitz search examines at most this many candidate columns.
const SEARCH_COLUMNS: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct LuFactor<F> {
    m: usize,
    piv_row: Vec<usize>,
    piv_col: Vec<usize>,
    diag: Vec<F>,
    lower: Vec<Vec<(usize, F)>>,
    upper: Vec<Vec<(usize, F)>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub free_cols: Vec<usize>,
    pub free_rows: Vec<usize>,
}

impl<F: Field> LuFactor<F> {
    pub fn identity(m: usize) -> Self {
        LuFactor {
            m,
            piv_row: (0..m).collect(),
            piv_col: (0..m).collect(),
            diag: vec![F::one(); m],
            lower: vec![Vec::new(); m],
            upper: vec![Vec::new(); m],
        }
    }

    /// Factorises the matrix whose column `k` is `columns[k]` (sparse, by row).
    pub fn factor(m: usize, columns: &[Vec<(usize, F)>], drop_tol: f64) -> Result<Self, Singular> {
        assert_eq!(columns.len(), m);
        let mut rows = RowStore::new(m);
        let mut colpat: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (k, col) in columns.iter().enumerate() {
            for (i, v) in col {
                if !v.is_zero_tol(drop_tol) {
                    rows.push(*i, k, v.clone());
                    colpat[k].push(*i);
                }
            }
        }
        let mut row_count: Vec<usize> = rows.rows.iter().map(Vec::len).collect();
        let mut col_count: Vec<usize> = colpat.iter().map(Vec::len).collect();
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];

        let mut col_heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..m).map(|k| Reverse((col_count[k], k))).collect();
        let mut row_heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..m).map(|i| Reverse((row_count[i], i))).collect();

        let mut lu = LuFactor {
            m,
            piv_row: Vec::with_capacity(m),
            piv_col: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
            lower: Vec::with_capacity(m),
            upper: Vec::with_capacity(m),
        };

        for _step in 0..m {
            let pivot = choose_pivot(
                &rows,
                &colpat,
                &row_count,
                &col_count,
                &row_active,
                &col_active,
                &mut col_heap,
                &mut row_heap,
                drop_tol,
            );
            let Some((p, q)) = pivot else {
                return Err(Singular {
                    free_cols: (0..m).filter(|&k| col_active[k]).collect(),
                    free_rows: (0..m).filter(|&i| row_active[i]).collect(),
                });
            };

            let prow = rows.take(p);
            let pval = prow
                .iter()
                .find(|(k, _)| *k == q)
                .map(|(_, v)| v.clone())
                .expect("pivot entry present");

            row_active[p] = false;
            col_active[q] = false;
            for (k, _) in &prow {
                col_count[*k] -= 1;
                if col_active[*k] {
                    col_heap.push(Reverse((col_count[*k], *k)));
                }
            }

            let mut lower_k = Vec::new();
            let targets = std::mem::take(&mut colpat[q]);
            for i in targets {
                if !row_active[i] {
                    continue;
                }
                let Some(pos_q) = rows.find(i, q) else {
                    continue;
                };
                let (_, aiq) = rows.remove_at(i, pos_q);
                row_count[i] -= 1;
                let l = aiq.div(&pval);
                for (k, v) in &prow {
                    if *k == q {
                        continue;
                    }
                    match rows.find(i, *k) {
                        Some(slot) => {
                            rows.rows[i][slot].1.sub_mul_assign(&l, v);
                            if rows.rows[i][slot].1.is_zero_tol(drop_tol) {
                                rows.remove_at(i, slot);
                                row_count[i] -= 1;
                                col_count[*k] -= 1;
                                col_heap.push(Reverse((col_count[*k], *k)));
                            }
                        }
                        None => {
                            let mut fill = F::zero();
                            fill.sub_mul_assign(&l, v);
                            if fill.is_zero_tol(drop_tol) {
                                continue;
                            }
                            rows.push(i, *k, fill);
                            colpat[*k].push(i);
                            col_count[*k] += 1;
                            row_count[i] += 1;
                            col_heap.push(Reverse((col_count[*k], *k)));
                        }
                    }
                }
                row_heap.push(Reverse((row_count[i], i)));
                lower_k.push((i, l));
            }

            lu.piv_row.push(p);
            lu.piv_col.push(q);
            lu.diag.push(pval);
            lu.lower.push(lower_k);
            lu.upper
                .push(prow.into_iter().filter(|(k, _)| *k != q).collect());
        }
        Ok(lu)
    }

    /// Solves `B x = a` in place: on entry `a` is indexed by row, on exit the
    /// returned vector is indexed by basis position.
    pub fn solve(&self, a: &mut [F], tol: f64) -> Vec<F> {
        for k in 0..self.piv_row.len() {
            let ap = &a[self.piv_row[k]];
            if ap.is_zero_tol(tol) || self.lower[k].is_empty() {
                continue;
            }
            let ap = ap.clone();
            for (i, l) in &self.lower[k] {
                a[*i].sub_mul_assign(l, &ap);
            }
        }
        let mut x = vec![F::zero(); self.m];
        for k in (0..self.piv_row.len()).rev() {
            let mut val = a[self.piv_row[k]].clone();
            for (j, u) in &self.upper[k] {
                if !x[*j].exact_zero() {
                    val.sub_mul_assign(u, &x[*j]);
                }
            }
            if !val.is_zero_tol(tol * 1e-3) {
                x[self.piv_col[k]] = val.div(&self.diag[k]);
            }
        }
        x
    }

    /// Solves `yᵀ B = cᵀ`: `c` is indexed by basis position, the result by row.
    pub fn solve_transpose(&self, c: &[F], tol: f64) -> Vec<F> {
        let mut acc = vec![F::zero(); self.m];
        let mut w = vec![F::zero(); self.m];
        for k in 0..self.piv_row.len() {
            let q = self.piv_col[k];
            let val = c[q].sub(&acc[q]);
            if val.is_zero_tol(tol * 1e-3) {
                continue;
            }
            let wv = val.div(&self.diag[k]);
            for (j, u) in &self.upper[k] {
                let t = wv.mul(u);
                acc[*j] = acc[*j].add(&t);
            }
            w[self.piv_row[k]] = wv;
        }
        for k in (0..self.piv_row.len()).rev() {
            let p = self.piv_row[k];
            for (i, l) in &self.lower[k] {
                if !w[*i].exact_zero() {
                    let wi = w[*i].clone();
                    w[p].sub_mul_assign(l, &wi);
                }
            }
        }
        w
    }
}

/// Active rows of the elimination; long rows carry a column -> slot index.
struct RowStore<F> {
    rows: Vec<Vec<(usize, F)>>,
    index: Vec<Option<Vec<u32>>>,
    m: usize,
}

const LONG_ROW: usize = 24;

impl<F: Field> RowStore<F> {
    fn new(m: usize) -> Self {
        RowStore {
            rows: vec![Vec::new(); m],
            index: vec![None; m],
            m,
        }
    }

    fn find(&self, i: usize, k: usize) -> Option<usize> {
        match &self.index[i] {
            Some(ix) => match ix[k] {
                0 => None,
                p => Some(p as usize - 1),
            },
            None => self.rows[i].iter().position(|(kk, _)| *kk == k),
        }
    }

    fn get(&self, i: usize, k: usize) -> Option<&F> {
        self.find(i, k).map(|p| &self.rows[i][p].1)
    }

    fn remove_at(&mut self, i: usize, pos: usize) -> (usize, F) {
        let e = self.rows[i].swap_remove(pos);
        if let Some(ix) = &mut self.index[i] {
            ix[e.0] = 0;
            if pos < self.rows[i].len() {
                ix[self.rows[i][pos].0] = pos as u32 + 1;
            }
        }
        e
    }

    fn push(&mut self, i: usize, k: usize, v: F) {
        self.rows[i].push((k, v));
        let len = self.rows[i].len();
        match &mut self.index[i] {
            Some(ix) => ix[k] = len as u32,
            None if len > LONG_ROW => {
                let mut ix = vec![0u32; self.m];
                for (p, (kk, _)) in self.rows[i].iter().enumerate() {
                    ix[*kk] = p as u32 + 1;
                }
                self.index[i] = Some(ix);
            }
            None => {}
        }
    }

    fn take(&mut self, i: usize) -> Vec<(usize, F)> {
        self.index[i] = None;
        std::mem::take(&mut self.rows[i])
    }
}

#[allow(clippy::too_many_arguments)]
fn choose_pivot<F: Field>(
    rows: &RowStore<F>,
    colpat: &[Vec<usize>],
    row_count: &[usize],
    col_count: &[usize],
    row_active: &[bool],
    col_active: &[bool],
    col_heap: &mut BinaryHeap<Reverse<(usize, usize)>>,
    row_heap: &mut BinaryHeap<Reverse<(usize, usize)>>,
    drop_tol: f64,
) -> Option<(usize, usize)> {
    // Drop stale heap entries.
    while let Some(&Reverse((cnt, k))) = col_heap.peek() {
        if !col_active[k] || col_count[k] != cnt {
            col_heap.pop();
        } else {
            break;
        }
    }
    while let Some(&Reverse((cnt, i))) = row_heap.peek() {
        if !row_active[i] || row_count[i] != cnt {
            row_heap.pop();
        } else {
            break;
        }
    }

    let entry = |i: usize, k: usize| -> Option<&F> { rows.get(i, k) };
    let col_max = |k: usize| -> f64 {
        colpat[k]
            .iter()
            .filter(|&&i| row_active[i])
            .filter_map(|&i| entry(i, k))
            .map(|v| v.abs_f64())
            .fold(0.0, f64::max)
    };
    let acceptable = |v: &F, cmax: f64| -> bool {
        if F::EXACT {
            !v.exact_zero()
        } else {
            v.abs_f64() > drop_tol && v.abs_f64() >= PIVOT_THRESHOLD * cmax
        }
    };

    // Column singleton: no elimination needed.
    if let Some(&Reverse((1, k))) = col_heap.peek() {
        for &i in &colpat[k] {
            if row_active[i] {
                if let Some(v) = entry(i, k) {
                    if !v.is_zero_tol(drop_tol) {
                        return Some((i, k));
                    }
                }
            }
        }
    }
    // Row singleton.
    if let Some(&Reverse((1, i))) = row_heap.peek() {
        if let Some((k, v)) = rows.rows[i].iter().find(|(k, _)| col_active[*k]) {
            if acceptable(v, col_max(*k)) {
                return Some((i, *k));
            }
        }
    }

    // Markowitz search over the sparsest few columns.
    let mut popped = Vec::new();
    let mut best: Option<(usize, usize, usize, f64)> = None; // (cost, row, col, |v|)
    while popped.len() < SEARCH_COLUMNS {
        let Some(Reverse((cnt, k))) = col_heap.pop() else {
            break;
        };
        if !col_active[k] || col_count[k] != cnt {
            continue;
        }
        popped.push(Reverse((cnt, k)));
        if cnt == 0 {
            continue;
        }
        let cmax = col_max(k);
        for &i in &colpat[k] {
            if !row_active[i] {
                continue;
            }
            let Some(v) = entry(i, k) else { continue };
            if !acceptable(v, cmax) {
                continue;
            }
            let cost = (row_count[i] - 1) * (cnt - 1);
            let mag = v.abs_f64();
            let better = match best {
                None => true,
                Some((bc, _, _, bm)) => cost < bc || (cost == bc && mag > bm),
            };
            if better {
                best = Some((cost, i, k, mag));
            }
        }
    }
    for e in popped {
        col_heap.push(e);
    }
    if let Some((_, i, k, _)) = best {
        return Some((i, k));
    }
    // Fall back to an exhaustive scan before declaring singularity.
    let mut fallback: Option<(usize, usize, f64)> = None;
    for k in 0..col_active.len() {
        if !col_active[k] || col_count[k] == 0 {
            continue;
        }
        let cmax = col_max(k);
        for &i in &colpat[k] {
            if !row_active[i] {
                continue;
            }
            if let Some(v) = entry(i, k) {
                if acceptable(v, cmax) {
                    let mag = v.abs_f64();
                    if fallback.map_or(true, |(_, _, bm)| mag > bm) {
                        fallback = Some((i, k, mag));
                    }
                }
            }
        }
        if fallback.is_some() {
            break;
        }
    }
    fallback.map(|(i, k, _)| (i, k))
}
