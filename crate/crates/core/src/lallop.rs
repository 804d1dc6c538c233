//! The lallop linear program.
//!
//! Variables are fragment multiplicities. The constraints are the A₀
//! conditions (flip balance of owned rectangles, slot balance), the objective
//! is 2·(λ₀ − ν̄₀) and the denominator ν₀ is normalised to 1.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use ratlp::rational::{int, rat};
use ratlp::{
    charnes_cooper, format_rational, solve_exact, solve_float, verify_certificate, FractionalProgram,
    LinearProgram, LpError, Rational, Relation, Sense, Status, Verification,
};
use serde::Serialize;

use crate::diagram::{DiagramError, VanKampenDiagram};
use crate::pods::{
    b_functionals, calibration, check_a0, follows_graph, phi0, rectangles_of, BVector, PodError,
    PodFragment, Rectangle,
};
use crate::words::{minimal_period, primitive_root, Word};

pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LallopError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("{0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("{0} is a proper power")]
    NotRootFree(String),
    #[error("{0} is not in the commutator subgroup")]
    NotInCommutatorSubgroup(String),
    #[error("the program needs {needed} fragments, over the budget of {budget}")]
    ResourceLimit { needed: u64, budget: u64 },
    #[error("no admissible point has positive degree")]
    NoNormalizablePoint,
    #[error("internal model error: {0}")]
    InternalModelError(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

impl LallopError {
    pub fn name(&self) -> &'static str {
        match self {
            LallopError::EmptyWord => "EmptyWord",
            LallopError::NotCyclicallyReduced(_) => "NotCyclicallyReduced",
            LallopError::NotRootFree(_) => "NotRootFree",
            LallopError::NotInCommutatorSubgroup(_) => "NotInCommutatorSubgroup",
            LallopError::ResourceLimit { .. } => "ResourceLimit",
            LallopError::NoNormalizablePoint => "NoNormalizablePoint",
            LallopError::InternalModelError(_) => "InternalModelError",
            LallopError::Lp(LpError::NumericallyUnstable { .. }) => "NumericallyUnstable",
            LallopError::Lp(_) => "LpError",
            LallopError::Diagram(e) => e.name(),
        }
    }
}

impl From<PodError> for LallopError {
    fn from(e: PodError) -> Self {
        match e {
            PodError::EmptyWord => LallopError::EmptyWord,
            PodError::NotCyclicallyReduced(w) => LallopError::NotCyclicallyReduced(w),
            PodError::NotRootFree(w) => LallopError::NotRootFree(w),
            other => LallopError::InternalModelError(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    /// No doubly open tripods, so only pods with at most four rectangles.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FragmentCounts {
    pub bipods: u64,
    pub tripods: u64,
    pub open_tripods1: u64,
    pub open_tripods2: u64,
    pub doubly_open_tripods: u64,
}

impl FragmentCounts {
    pub fn total(&self) -> u64 {
        self.bipods + self.tripods + self.open_tripods1 + self.open_tripods2 + self.doubly_open_tripods
    }
}

/// The assembled program for r^M.
#[derive(Debug, Clone)]
pub struct LallopProgram {
    pub root: Word,
    pub power: u32,
    pub mode: Mode,
    pub rectangles: Vec<Rectangle>,
    pub fragments: Vec<PodFragment>,
    pub counts: FragmentCounts,
    pub fractional: FractionalProgram,
    pub lp: LinearProgram,
}

impl LallopProgram {
    pub fn num_constraints(&self) -> usize {
        self.lp.num_constraints()
    }

    /// The objective 2·(λ₀ − ν̄₀) of a point.
    pub fn objective(&self, b: &BVector) -> Rational {
        let f = b_functionals(b, self.root.len(), self.power);
        int(2) * (f.lambda - f.nubar)
    }

    /// ν₀ of a point.
    pub fn denominator(&self, b: &BVector) -> Rational {
        b_functionals(b, self.root.len(), self.power).nu
    }

    /// The LP point for a fragment vector (entries outside the basis are dropped).
    pub fn to_point(&self, b: &BVector) -> Vec<(usize, Rational)> {
        let index: HashMap<&PodFragment, usize> =
            self.fragments.iter().enumerate().map(|(j, f)| (f, j)).collect();
        let mut out: Vec<(usize, Rational)> = b
            .iter()
            .filter_map(|(f, v)| index.get(f).map(|&j| (j, v.clone())))
            .collect();
        out.sort_by_key(|e| e.0);
        out
    }

    pub fn to_bvector(&self, point: &[(usize, Rational)]) -> BVector {
        point
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (self.fragments[*j], v.clone()))
            .collect()
    }

    /// Φ₀(Φ(D)) scaled to ν₀ = 1; feasible for the program whenever the
    /// diagram is reduced and has positive degree.
    pub fn point_from_diagram(&self, d: &VanKampenDiagram) -> Result<BVector, LallopError> {
        let b = phi0(&d.phi()?);
        let nu = self.denominator(&b);
        if nu <= Rational::zero() {
            return Err(LallopError::NoNormalizablePoint);
        }
        Ok(b.into_iter().map(|(f, v)| (f, v / &nu)).collect())
    }
}

fn check_root(r: &Word, power: u32) -> Result<(), LallopError> {
    if r.is_empty() {
        return Err(LallopError::EmptyWord);
    }
    if !r.is_cyclically_reduced() {
        return Err(LallopError::NotCyclicallyReduced(r.to_string()));
    }
    if minimal_period(r.letters()) < r.len() {
        return Err(LallopError::NotRootFree(r.to_string()));
    }
    if !r.in_commutator_subgroup() {
        return Err(LallopError::NotInCommutatorSubgroup(r.pow(power as i64).to_string()));
    }
    Ok(())
}

/// Enumerates the fragment basis and writes down the program.
pub fn build_program(r: &Word, power: u32, mode: Mode, budget: u64) -> Result<LallopProgram, LallopError> {
    check_root(r, power)?;
    let n = r.len() as u32;
    let rects = rectangles_of(r)?;
    let m = rects.len();
    let succ = follows_graph(&rects, n);
    let mut pred = vec![Vec::new(); m];
    for (a, list) in succ.iter().enumerate() {
        for &b in list {
            pred[b].push(a);
        }
    }
    let follow_pairs: u64 = succ.iter().map(|s| s.len() as u64).sum();
    let open: u64 = (0..m).map(|x| (pred[x].len() * succ[x].len()) as u64).sum();
    let dotp = if mode == Mode::Full { m as u64 * follow_pairs } else { 0 };
    let needed = 2 * open + dotp + follow_pairs + open;
    if needed > budget {
        return Err(LallopError::ResourceLimit { needed, budget });
    }

    // Blocks keyed by one rectangle, enumerated in parallel and merged in order.
    let blocks: Vec<[Vec<PodFragment>; 5]> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut out: [Vec<PodFragment>; 5] = Default::default();
            for &b in &succ[a] {
                if a < b && succ[b].contains(&a) {
                    out[0].push(PodFragment::Bipod([rects[a], rects[b]]));
                }
                for &c in &succ[b] {
                    if a < b && a < c && succ[c].contains(&a) {
                        out[1].push(PodFragment::Tripod([rects[a], rects[b], rects[c]]));
                    }
                }
            }
            // a as the centre of open tripods.
            for &p in &pred[a] {
                for &t in &succ[a] {
                    out[2].push(PodFragment::OpenTripod1 {
                        center: rects[a],
                        pred: rects[p],
                        succ: rects[t],
                    });
                    out[3].push(PodFragment::OpenTripod2 {
                        center: rects[a],
                        pred: rects[p],
                        spine: rects[t],
                    });
                }
            }
            // a as the spine of doubly open tripods.
            if mode == Mode::Full {
                for p in 0..m {
                    for &t in &succ[p] {
                        out[4].push(PodFragment::DoublyOpenTripod {
                            spine: rects[a],
                            pred: rects[p],
                            succ: rects[t],
                        });
                    }
                }
            }
            out
        })
        .collect();
    let mut fragments = Vec::new();
    let mut counts = FragmentCounts::default();
    for kind in 0..5 {
        for block in &blocks {
            fragments.extend_from_slice(&block[kind]);
            let c = block[kind].len() as u64;
            match kind {
                0 => counts.bipods += c,
                1 => counts.tripods += c,
                2 => counts.open_tripods1 += c,
                3 => counts.open_tripods2 += c,
                _ => counts.doubly_open_tripods += c,
            }
        }
    }
    drop(blocks);
    debug_assert!(fragments.iter().all(|f| f.is_valid(n)));

    let c = calibration(r.len(), power);
    let index: HashMap<Rectangle, usize> = rects.iter().enumerate().map(|(j, r)| (*r, j)).collect();
    let mut flip_rows: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    let mut slot_rows: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    let mut numerator = Vec::with_capacity(fragments.len());
    let mut denominator = Vec::with_capacity(fragments.len());
    let one = Rational::one();
    let minus_one = -Rational::one();
    for (j, f) in fragments.iter().enumerate() {
        let mut owned: BTreeMap<usize, i64> = BTreeMap::new();
        for x in f.owned() {
            let (a, b) = (index[&x], index[&x.flip()]);
            *owned.entry(a.min(b)).or_insert(0) += if a < b { 1 } else { -1 };
        }
        for (row, v) in owned {
            if v != 0 {
                flip_rows.entry(row).or_default().push((j, int(v)));
            }
        }
        if let Some((x, y)) = f.emits() {
            slot_rows.entry((index[&x], index[&y])).or_default().push((j, one.clone()));
        }
        if let Some((x, y)) = f.consumes() {
            slot_rows.entry((index[&x], index[&y])).or_default().push((j, minus_one.clone()));
        }
        let obj = int(2) * (f.lambda0() - int(f.nubar0_units()) * &c);
        if !obj.is_zero() {
            numerator.push((j, obj));
        }
        let nu = int(f.nu0_units()) * &c;
        if !nu.is_zero() {
            denominator.push((j, nu));
        }
    }
    let rows: Vec<(Vec<(usize, Rational)>, Relation)> = flip_rows
        .into_values()
        .chain(slot_rows.into_values())
        .map(|row| (row, Relation::Eq))
        .collect();
    let fractional = FractionalProgram::over_cone(
        fragments.len(),
        Sense::Minimize,
        numerator,
        denominator,
        rows,
        Rational::one(),
    );
    let (lp, _) = charnes_cooper(&fractional).map_err(|e| match e {
        LpError::NoNormalizablePoint => LallopError::NoNormalizablePoint,
        other => LallopError::Lp(other),
    })?;
    Ok(LallopProgram {
        root: r.clone(),
        power,
        mode,
        rectangles: rects,
        fragments,
        counts,
        fractional,
        lp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum Solver {
    Exact,
    Float { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LallopOptions {
    pub mode: Mode,
    pub solver: Solver,
    pub budget: u64,
}

impl Default for LallopOptions {
    fn default() -> Self {
        LallopOptions {
            mode: Mode::Full,
            solver: Solver::Exact,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LallopValue {
    Exact(Rational),
    /// A floating-point optimum that could not be confirmed exactly.
    Approximate(f64),
}

impl LallopValue {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            LallopValue::Exact(v) => Some(v),
            LallopValue::Approximate(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LallopValue::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            LallopValue::Approximate(x) => *x,
        }
    }
}

impl std::fmt::Display for LallopValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LallopValue::Exact(v) => f.write_str(&format_rational(v)),
            LallopValue::Approximate(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub build_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct LallopResult {
    pub root: Word,
    pub power: u32,
    pub mode: Mode,
    pub value: LallopValue,
    /// "exact", "verified" (float solve confirmed exactly) or "unverified".
    pub verification: &'static str,
    pub certificate: Option<BVector>,
    pub counts: FragmentCounts,
    pub variables: usize,
    pub constraints: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
struct CertificateEntry {
    kind: crate::pods::FragmentKind,
    fragment: PodFragment,
    coefficient: String,
}

#[derive(Debug, Clone, Serialize)]
struct CertificateDoc<'a> {
    root: &'a Word,
    power: u32,
    mode: Mode,
    value: String,
    verification: &'static str,
    fragments: Vec<CertificateEntry>,
}

impl LallopResult {
    /// The certificate as JSON: the non-zero fragments with their coefficients.
    pub fn certificate_json(&self) -> Option<String> {
        let cert = self.certificate.as_ref()?;
        let doc = CertificateDoc {
            root: &self.root,
            power: self.power,
            mode: self.mode,
            value: self.value.to_string(),
            verification: self.verification,
            fragments: cert
                .iter()
                .map(|(f, v)| CertificateEntry {
                    kind: f.kind(),
                    fragment: *f,
                    coefficient: format_rational(v),
                })
                .collect(),
        };
        Some(serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

/// Re-checks an exact certificate: membership in A₀, ν₀ = 1 and the objective.
pub fn check_certificate(program: &LallopProgram, cert: &BVector, value: &Rational) -> Result<(), String> {
    check_a0(cert, program.root.len() as u32).map_err(|v| v.to_string())?;
    let nu = program.denominator(cert);
    if !nu.is_one() {
        return Err(format!("ν₀ is {}, not 1", format_rational(&nu)));
    }
    let obj = program.objective(cert);
    if obj != *value {
        return Err(format!(
            "objective {} differs from the value {}",
            format_rational(&obj),
            format_rational(value)
        ));
    }
    Ok(())
}

/// lallop of a word: reduce, split off the root, build and solve.
pub fn lallop(w: &Word, opts: &LallopOptions) -> Result<LallopResult, LallopError> {
    if w.is_empty() {
        return Err(LallopError::EmptyWord);
    }
    if !w.in_commutator_subgroup() {
        return Err(LallopError::NotInCommutatorSubgroup(w.to_string()));
    }
    let dec = primitive_root(w).map_err(|_| LallopError::EmptyWord)?;
    let t0 = Instant::now();
    let program = build_program(&dec.root, dec.exponent, opts.mode, opts.budget)?;
    let build_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let lp = &program.lp;
    let (value, verification, point) = match opts.solver {
        Solver::Exact => {
            let sol = solve_exact(lp);
            match sol.status {
                Status::Optimal => {
                    verify_certificate(lp, &sol).map_err(LallopError::InternalModelError)?;
                    let v = sol.value.clone().expect("optimal");
                    (LallopValue::Exact(v), "exact", Some(sol.point))
                }
                Status::Infeasible => return Err(LallopError::NoNormalizablePoint),
                Status::Unbounded => {
                    return Err(LallopError::InternalModelError("the program is unbounded".into()))
                }
            }
        }
        Solver::Float { tol } => {
            let fs = solve_float(lp, tol)?;
            match fs.status {
                Status::Optimal => match fs.verify(lp) {
                    Verification::Verified(sol) => {
                        let v = sol.value.clone().expect("optimal");
                        (LallopValue::Exact(v), "verified", Some(sol.point))
                    }
                    Verification::Unverified { .. } => (
                        LallopValue::Approximate(fs.value.expect("optimal")),
                        "unverified",
                        None,
                    ),
                },
                Status::Infeasible => return Err(LallopError::NoNormalizablePoint),
                Status::Unbounded => {
                    return Err(LallopError::InternalModelError("the program is unbounded".into()))
                }
            }
        }
    };
    let certificate = point.map(|p| program.to_bvector(&p));
    if let (Some(cert), LallopValue::Exact(v)) = (&certificate, &value) {
        check_certificate(&program, cert, v).map_err(LallopError::InternalModelError)?;
    }
    Ok(LallopResult {
        root: program.root.clone(),
        power: program.power,
        mode: opts.mode,
        value,
        verification,
        certificate,
        counts: program.counts,
        variables: program.fragments.len(),
        constraints: program.num_constraints(),
        timings: Timings {
            build_seconds,
            solve_seconds: t1.elapsed().as_secs_f64(),
        },
    })
}

/// The sandwich value (2m − 4)/(m − 1) for r_m = [a,b][a,b⁻ᵐ].
pub fn r_m_upper(m: i64) -> Rational {
    rat(2 * m - 4, m - 1)
}
