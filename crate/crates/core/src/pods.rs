//! Rectangles, pods and the fragment basis the lallop program is written in.
//!
//! Positions are 1-based over the root r = x₁⋯x_n. A rectangle (iˢ, i′ˢ′)
//! records an edge read as x_iˢ from one side and x_{i′}ˢ′ from the other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use ratlp::rational::{int, rat};
use ratlp::Rational;
use serde::{Serialize, Serializer};

use crate::words::{minimal_period, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PodError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("{0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("{0} is a proper power")]
    NotRootFree(String),
    #[error("invalid pod: {0}")]
    InvalidPod(String),
    #[error("cannot mix pods and fragments in one vector")]
    MixedBasis,
}

impl PodError {
    pub fn name(&self) -> &'static str {
        match self {
            PodError::EmptyWord => "EmptyWord",
            PodError::NotCyclicallyReduced(_) => "NotCyclicallyReduced",
            PodError::NotRootFree(_) => "NotRootFree",
            PodError::InvalidPod(_) => "InvalidPod",
            PodError::MixedBasis => "MixedBasis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rectangle {
    pub i: u32,
    pub s: i8,
    pub i2: u32,
    pub s2: i8,
}

impl Rectangle {
    /// Panics unless both signs are ±1.
    pub fn new(i: u32, s: i8, i2: u32, s2: i8) -> Rectangle {
        assert!(s.abs() == 1 && s2.abs() == 1, "signs must be +1 or -1");
        Rectangle { i, s, i2, s2 }
    }

    /// ι, swapping the two readings.
    pub fn flip(self) -> Rectangle {
        Rectangle {
            i: self.i2,
            s: self.s2,
            i2: self.i,
            s2: self.s,
        }
    }

    /// Letter condition x_iˢ = x_{i′}^{−s′} over r, plus i ≠ i′.
    pub fn is_valid_for(&self, r: &[Letter]) -> bool {
        let n = r.len() as u32;
        let ok = |p: u32| (1..=n).contains(&p);
        ok(self.i) && ok(self.i2) && self.i != self.i2 && letter(r, self.i, self.s) == letter(r, self.i2, self.s2).inverse()
    }
}

fn letter(r: &[Letter], i: u32, s: i8) -> Letter {
    let l = r[i as usize - 1];
    if s > 0 {
        l
    } else {
        l.inverse()
    }
}

fn sign_char(s: i8) -> char {
    if s > 0 {
        '+'
    } else {
        '-'
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{}, {}{})", self.i, sign_char(self.s), self.i2, sign_char(self.s2))
    }
}

impl Serialize for Rectangle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn check_root(r: &Word) -> Result<(), PodError> {
    if r.is_empty() {
        return Err(PodError::EmptyWord);
    }
    if !r.is_cyclically_reduced() {
        return Err(PodError::NotCyclicallyReduced(r.to_string()));
    }
    if minimal_period(r.letters()) < r.len() {
        return Err(PodError::NotRootFree(r.to_string()));
    }
    Ok(())
}

/// Rec(r^M), sorted. The set does not depend on M.
pub fn rectangles_of(r: &Word) -> Result<Vec<Rectangle>, PodError> {
    check_root(r)?;
    let n = r.len() as u32;
    let mut by_letter: HashMap<Letter, Vec<(u32, i8)>> = HashMap::new();
    for i in 1..=n {
        for s in [1i8, -1] {
            by_letter.entry(letter(r.letters(), i, s)).or_default().push((i, s));
        }
    }
    let mut out = Vec::new();
    for i in 1..=n {
        for s in [1i8, -1] {
            let want = letter(r.letters(), i, s).inverse();
            for &(i2, s2) in &by_letter[&want] {
                if i2 != i {
                    out.push(Rectangle::new(i, s, i2, s2));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Does `a` follow `b`? Positions wrap modulo n into 1..=n.
pub fn follows(a: &Rectangle, b: &Rectangle, n: u32) -> bool {
    let next = b.i % n + 1;
    let prev = (b.i + n - 2) % n + 1;
    (a.i2 == next && a.s2 == 1 && b.s == 1) || (a.i2 == prev && a.s2 == -1 && b.s == -1)
}

fn min_rotation(v: &[Rectangle]) -> Vec<Rectangle> {
    (0..v.len())
        .map(|k| v[k..].iter().chain(&v[..k]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// A cyclic list of rectangles, each following the one before. Stored at its
/// lexicographically least rotation so equal pods compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pod {
    rects: Vec<Rectangle>,
}

impl Pod {
    pub fn new(rects: Vec<Rectangle>, n: u32) -> Result<Pod, PodError> {
        let k = rects.len();
        if k < 2 {
            return Err(PodError::InvalidPod(format!("a pod needs at least 2 rectangles, got {k}")));
        }
        for j in 0..k {
            let (a, b) = (&rects[(j + 1) % k], &rects[j]);
            if !follows(a, b, n) {
                return Err(PodError::InvalidPod(format!("{a} does not follow {b}")));
            }
        }
        Ok(Pod {
            rects: min_rotation(&rects),
        })
    }

    pub fn rectangles(&self) -> &[Rectangle] {
        &self.rects
    }

    pub fn k(&self) -> usize {
        self.rects.len()
    }

    pub fn lambda(&self) -> Rational {
        rat(self.k() as i64 - 2, 2)
    }

    /// ν in units of c.
    pub fn nu_units(&self) -> i64 {
        self.rects.iter().map(|r| (r.s + r.s2) as i64).sum()
    }

    /// ν̄ in units of c.
    pub fn nubar_units(&self) -> i64 {
        2 * self.k() as i64
    }
}

impl fmt::Display for Pod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (j, r) in self.rects.iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

impl Serialize for Pod {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The finite basis that pods break up into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PodFragment {
    Bipod([Rectangle; 2]),
    Tripod([Rectangle; 3]),
    OpenTripod1 { center: Rectangle, pred: Rectangle, succ: Rectangle },
    OpenTripod2 { center: Rectangle, pred: Rectangle, spine: Rectangle },
    DoublyOpenTripod { spine: Rectangle, pred: Rectangle, succ: Rectangle },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    Bipod,
    Tripod,
    OpenTripod1,
    OpenTripod2,
    DoublyOpenTripod,
}

impl PodFragment {
    pub fn bipod(a: Rectangle, b: Rectangle) -> PodFragment {
        let v = min_rotation(&[a, b]);
        PodFragment::Bipod([v[0], v[1]])
    }

    pub fn tripod(a: Rectangle, b: Rectangle, c: Rectangle) -> PodFragment {
        let v = min_rotation(&[a, b, c]);
        PodFragment::Tripod([v[0], v[1], v[2]])
    }

    pub fn kind(&self) -> FragmentKind {
        match self {
            PodFragment::Bipod(_) => FragmentKind::Bipod,
            PodFragment::Tripod(_) => FragmentKind::Tripod,
            PodFragment::OpenTripod1 { .. } => FragmentKind::OpenTripod1,
            PodFragment::OpenTripod2 { .. } => FragmentKind::OpenTripod2,
            PodFragment::DoublyOpenTripod { .. } => FragmentKind::DoublyOpenTripod,
        }
    }

    /// Rectangles counted by flip balance. Every rectangle of a pod is owned
    /// by exactly one fragment of its break-up.
    pub fn owned(&self) -> Vec<Rectangle> {
        match *self {
            PodFragment::Bipod(r) => r.to_vec(),
            PodFragment::Tripod(r) => r.to_vec(),
            PodFragment::OpenTripod1 { center, succ, .. } => vec![center, succ],
            PodFragment::OpenTripod2 { center, spine, .. } => vec![center, spine],
            PodFragment::DoublyOpenTripod { succ, .. } => vec![succ],
        }
    }

    pub fn emits(&self) -> Option<(Rectangle, Rectangle)> {
        match *self {
            PodFragment::OpenTripod1 { pred, succ, .. } => Some((succ, pred)),
            PodFragment::DoublyOpenTripod { spine, succ, .. } => Some((succ, spine)),
            _ => None,
        }
    }

    pub fn consumes(&self) -> Option<(Rectangle, Rectangle)> {
        match *self {
            PodFragment::OpenTripod2 { pred, spine, .. } => Some((pred, spine)),
            PodFragment::DoublyOpenTripod { spine, pred, .. } => Some((pred, spine)),
            _ => None,
        }
    }

    /// The follows-conditions of the fragment's kind.
    pub fn is_valid(&self, n: u32) -> bool {
        match *self {
            PodFragment::Bipod([a, b]) => follows(&b, &a, n) && follows(&a, &b, n),
            PodFragment::Tripod([a, b, c]) => {
                follows(&b, &a, n) && follows(&c, &b, n) && follows(&a, &c, n)
            }
            PodFragment::OpenTripod1 { center, pred, succ } => {
                follows(&center, &pred, n) && follows(&succ, &center, n)
            }
            PodFragment::OpenTripod2 { center, pred, spine } => {
                follows(&center, &pred, n) && follows(&spine, &center, n)
            }
            PodFragment::DoublyOpenTripod { pred, succ, .. } => follows(&succ, &pred, n),
        }
    }

    pub fn lambda0(&self) -> Rational {
        match self {
            PodFragment::Bipod(_) => Rational::zero(),
            _ => rat(1, 2),
        }
    }

    /// ν₀ in units of c.
    pub fn nu0_units(&self) -> i64 {
        let s = |r: &Rectangle| r.s as i64;
        let s2 = |r: &Rectangle| r.s2 as i64;
        match self {
            PodFragment::Bipod(r) => r.iter().map(|x| s(x) + s2(x)).sum(),
            PodFragment::Tripod(r) => r.iter().map(|x| s(x) + s2(x)).sum(),
            PodFragment::OpenTripod1 { center, pred, succ } => {
                s(pred) + s2(center) + s(center) + s2(succ)
            }
            PodFragment::OpenTripod2 { center, pred, spine } => {
                s(pred) + s2(center) + s(center) + s2(spine)
            }
            PodFragment::DoublyOpenTripod { pred, succ, .. } => s(pred) + s2(succ),
        }
    }

    /// ν̄₀ in units of c.
    pub fn nubar0_units(&self) -> i64 {
        match self {
            PodFragment::Bipod(_) => 4,
            PodFragment::Tripod(_) => 6,
            PodFragment::OpenTripod1 { .. } | PodFragment::OpenTripod2 { .. } => 4,
            PodFragment::DoublyOpenTripod { .. } => 2,
        }
    }
}

impl fmt::Display for PodFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PodFragment::Bipod([a, b]) => write!(f, "bipod[{a}, {b}]"),
            PodFragment::Tripod([a, b, c]) => write!(f, "tripod[{a}, {b}, {c}]"),
            PodFragment::OpenTripod1 { center, pred, succ } => {
                write!(f, "ot1({center}; {pred}, {succ})")
            }
            PodFragment::OpenTripod2 { center, pred, spine } => {
                write!(f, "ot2({center}; {pred}, {spine})")
            }
            PodFragment::DoublyOpenTripod { spine, pred, succ } => {
                write!(f, "dotp({spine}; {pred}, {succ})")
            }
        }
    }
}

impl Serialize for PodFragment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub type VerVector = BTreeMap<Pod, Rational>;
pub type BVector = BTreeMap<PodFragment, Rational>;

fn add_to<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, v: Rational) {
    let e = map.entry(key).or_insert_with(Rational::zero);
    *e += v;
}

/// Φ₀ on a single pod.
pub fn phi0_decompose(p: &Pod) -> BVector {
    let r = &p.rects;
    let k = r.len();
    let mut out = BVector::new();
    match k {
        2 => add_to(&mut out, PodFragment::bipod(r[0], r[1]), Rational::one()),
        3 => add_to(&mut out, PodFragment::tripod(r[0], r[1], r[2]), Rational::one()),
        _ => {
            let spine = r[k - 1];
            add_to(
                &mut out,
                PodFragment::OpenTripod1 {
                    center: r[0],
                    pred: spine,
                    succ: r[1],
                },
                Rational::one(),
            );
            for i in 1..k - 3 {
                add_to(
                    &mut out,
                    PodFragment::DoublyOpenTripod {
                        spine,
                        pred: r[i],
                        succ: r[i + 1],
                    },
                    Rational::one(),
                );
            }
            add_to(
                &mut out,
                PodFragment::OpenTripod2 {
                    center: r[k - 2],
                    pred: r[k - 3],
                    spine,
                },
                Rational::one(),
            );
        }
    }
    out
}

/// Φ₀ extended linearly.
pub fn phi0(x: &VerVector) -> BVector {
    let mut out = BVector::new();
    for (p, coeff) in x {
        for (f, v) in phi0_decompose(p) {
            add_to(&mut out, f, v * coeff);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Functionals {
    #[serde(with = "crate::rational_serde")]
    pub lambda: Rational,
    #[serde(with = "crate::rational_serde")]
    pub nu: Rational,
    #[serde(with = "crate::rational_serde")]
    pub nubar: Rational,
}

/// c = 1/(2·M·|r|).
pub fn calibration(r_len: usize, power: u32) -> Rational {
    rat(1, 2 * power as i64 * r_len as i64)
}

pub fn ver_functionals(x: &VerVector, r_len: usize, power: u32) -> Functionals {
    let c = calibration(r_len, power);
    let mut f = Functionals {
        lambda: Rational::zero(),
        nu: Rational::zero(),
        nubar: Rational::zero(),
    };
    for (p, v) in x {
        f.lambda += p.lambda() * v;
        f.nu += int(p.nu_units()) * &c * v;
        f.nubar += int(p.nubar_units()) * &c * v;
    }
    f
}

pub fn b_functionals(x: &BVector, r_len: usize, power: u32) -> Functionals {
    let c = calibration(r_len, power);
    let mut f = Functionals {
        lambda: Rational::zero(),
        nu: Rational::zero(),
        nubar: Rational::zero(),
    };
    for (p, v) in x {
        f.lambda += p.lambda0() * v;
        f.nu += int(p.nu0_units()) * &c * v;
        f.nubar += int(p.nubar0_units()) * &c * v;
    }
    f
}

/// A basis element of either space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Pod(Pod),
    Fragment(PodFragment),
}

/// (λ, ν, ν̄) of a vector over pods or over fragments, but not both.
pub fn functional_values(x: &[(Element, Rational)], r: &Word, power: u32) -> Result<Functionals, PodError> {
    let pods = x.iter().filter(|(e, _)| matches!(e, Element::Pod(_))).count();
    if pods != 0 && pods != x.len() {
        return Err(PodError::MixedBasis);
    }
    if pods > 0 {
        let mut v = VerVector::new();
        for (e, c) in x {
            if let Element::Pod(p) = e {
                add_to(&mut v, p.clone(), c.clone());
            }
        }
        Ok(ver_functionals(&v, r.len(), power))
    } else {
        let mut v = BVector::new();
        for (e, c) in x {
            if let Element::Fragment(f) = e {
                add_to(&mut v, *f, c.clone());
            }
        }
        Ok(b_functionals(&v, r.len(), power))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("negative coefficient {value} on {element}")]
    NegativeCoefficient { element: String, value: String },
    #[error("invalid basis element {0}")]
    InvalidElement(String),
    #[error("{rect} occurs {count} times but its flip occurs {flip_count} times")]
    FlipImbalance { rect: Rectangle, count: String, flip_count: String },
    #[error("slot ({}, {}) is emitted {emits} times and consumed {consumes} times", .slot.0, .slot.1)]
    SlotImbalance { slot: (Rectangle, Rectangle), emits: String, consumes: String },
}

fn check_flip_balance(counts: &BTreeMap<Rectangle, Rational>) -> Result<(), Violation> {
    let zero = Rational::zero();
    for (r, c) in counts {
        let f = counts.get(&r.flip()).unwrap_or(&zero);
        if c != f {
            return Err(Violation::FlipImbalance {
                rect: *r,
                count: ratlp::format_rational(c),
                flip_count: ratlp::format_rational(f),
            });
        }
    }
    Ok(())
}

/// Membership in A: non-negative, and each R occurs as often as ι(R).
pub fn check_a(x: &VerVector, n: u32) -> Result<(), Violation> {
    let mut counts = BTreeMap::new();
    for (p, v) in x {
        if v.is_negative() {
            return Err(Violation::NegativeCoefficient {
                element: p.to_string(),
                value: ratlp::format_rational(v),
            });
        }
        if Pod::new(p.rects.clone(), n).is_err() {
            return Err(Violation::InvalidElement(p.to_string()));
        }
        for r in &p.rects {
            add_to(&mut counts, *r, v.clone());
        }
    }
    check_flip_balance(&counts)
}

/// Membership in A₀: non-negative, owned-rectangle flip balance and slot balance.
pub fn check_a0(x: &BVector, n: u32) -> Result<(), Violation> {
    let mut counts = BTreeMap::new();
    let mut slots: BTreeMap<(Rectangle, Rectangle), (Rational, Rational)> = BTreeMap::new();
    for (f, v) in x {
        if v.is_negative() {
            return Err(Violation::NegativeCoefficient {
                element: f.to_string(),
                value: ratlp::format_rational(v),
            });
        }
        if !f.is_valid(n) {
            return Err(Violation::InvalidElement(f.to_string()));
        }
        for r in f.owned() {
            add_to(&mut counts, r, v.clone());
        }
        if let Some(p) = f.emits() {
            slots.entry(p).or_insert_with(|| (Rational::zero(), Rational::zero())).0 += v;
        }
        if let Some(p) = f.consumes() {
            slots.entry(p).or_insert_with(|| (Rational::zero(), Rational::zero())).1 += v;
        }
    }
    check_flip_balance(&counts)?;
    for (slot, (e, c)) in slots {
        if e != c {
            return Err(Violation::SlotImbalance {
                slot,
                emits: ratlp::format_rational(&e),
                consumes: ratlp::format_rational(&c),
            });
        }
    }
    Ok(())
}

/// Reassembles a non-negative integer point of A₀ into pods, chaining each
/// open tripod of the first kind through doubly open tripods to an open
/// tripod of the second kind. Returns `None` when no chaining uses up every
/// fragment; closed loops of doubly open tripods are the obstruction.
pub fn reassemble(b: &BVector) -> Option<VerVector> {
    let mut counts: BTreeMap<PodFragment, u64> = BTreeMap::new();
    let mut out = VerVector::new();
    for (f, v) in b {
        if v.is_negative() || !v.is_integer() {
            return None;
        }
        let c: u64 = v.to_integer().try_into().ok()?;
        if c == 0 {
            continue;
        }
        match *f {
            PodFragment::Bipod(r) => add_to(&mut out, Pod { rects: min_rotation(&r) }, int(c as i64)),
            PodFragment::Tripod(r) => add_to(&mut out, Pod { rects: min_rotation(&r) }, int(c as i64)),
            _ => {
                counts.insert(*f, c);
            }
        }
    }
    let mut pods = Vec::new();
    if !chain_all(&mut counts, &mut pods) {
        return None;
    }
    for p in pods {
        add_to(&mut out, Pod { rects: min_rotation(&p) }, Rational::one());
    }
    Some(out)
}

fn take(counts: &mut BTreeMap<PodFragment, u64>, f: &PodFragment) {
    let c = counts.get_mut(f).expect("present");
    *c -= 1;
    if *c == 0 {
        counts.remove(f);
    }
}

fn give(counts: &mut BTreeMap<PodFragment, u64>, f: PodFragment) {
    *counts.entry(f).or_insert(0) += 1;
}

fn chain_all(counts: &mut BTreeMap<PodFragment, u64>, pods: &mut Vec<Vec<Rectangle>>) -> bool {
    let start = counts
        .keys()
        .find(|f| matches!(f, PodFragment::OpenTripod1 { .. }))
        .copied();
    let Some(start) = start else {
        return counts.is_empty();
    };
    let PodFragment::OpenTripod1 { center, pred, succ } = start else {
        unreachable!()
    };
    take(counts, &start);
    let mut rects = vec![center, succ];
    if extend_chain(counts, pods, &mut rects, succ, pred) {
        return true;
    }
    give(counts, start);
    false
}

fn extend_chain(
    counts: &mut BTreeMap<PodFragment, u64>,
    pods: &mut Vec<Vec<Rectangle>>,
    rects: &mut Vec<Rectangle>,
    open: Rectangle,
    spine: Rectangle,
) -> bool {
    let candidates: Vec<PodFragment> = counts
        .keys()
        .filter(|f| f.consumes() == Some((open, spine)))
        .copied()
        .collect();
    for f in candidates {
        take(counts, &f);
        match f {
            PodFragment::OpenTripod2 { center, .. } => {
                let mut pod = rects.clone();
                pod.push(center);
                pod.push(spine);
                pods.push(pod);
                if chain_all(counts, pods) {
                    return true;
                }
                pods.pop();
            }
            PodFragment::DoublyOpenTripod { succ, .. } => {
                rects.push(succ);
                if extend_chain(counts, pods, rects, succ, spine) {
                    return true;
                }
                rects.pop();
            }
            _ => unreachable!("only these kinds consume"),
        }
        give(counts, f);
    }
    false
}

/// Successor lists of the follows relation: `succ[a]` holds every b that follows a.
pub fn follows_graph(rects: &[Rectangle], n: u32) -> Vec<Vec<usize>> {
    let mut by_second: HashMap<(u32, i8), Vec<usize>> = HashMap::new();
    for (j, r) in rects.iter().enumerate() {
        by_second.entry((r.i2, r.s2)).or_default().push(j);
    }
    rects
        .iter()
        .map(|a| {
            let key = if a.s > 0 {
                (a.i % n + 1, 1)
            } else {
                ((a.i + n - 2) % n + 1, -1)
            };
            by_second.get(&key).cloned().unwrap_or_default()
        })
        .collect()
}

/// A random k-pod through a uniformly chosen start, or `None` if no k-pod
/// starts there. Each step only goes where the cycle can still close.
pub fn sample_pod<R: Rng>(rects: &[Rectangle], n: u32, k: usize, rng: &mut R) -> Option<Pod> {
    if rects.is_empty() || k < 2 {
        return None;
    }
    let succ = follows_graph(rects, n);
    let start = rng.random_range(0..rects.len());
    // closes[d][v]: from v, some walk of d more steps ends at a rectangle that start follows.
    let m = rects.len();
    let mut closes = vec![vec![false; m]; k];
    for v in 0..m {
        closes[0][v] = succ[v].contains(&start);
    }
    for d in 1..k {
        for v in 0..m {
            closes[d][v] = succ[v].iter().any(|&w| closes[d - 1][w]);
        }
    }
    if !closes[k - 1][start] {
        return None;
    }
    let mut walk = vec![start];
    let mut cur = start;
    for d in (0..k - 1).rev() {
        let options: Vec<usize> = succ[cur].iter().copied().filter(|&w| closes[d][w]).collect();
        cur = options[rng.random_range(0..options.len())];
        walk.push(cur);
    }
    Some(Pod::new(walk.into_iter().map(|j| rects[j]).collect(), n).expect("closed walk"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: u32, s: i8, i2: u32, s2: i8) -> Rectangle {
        Rectangle::new(i, s, i2, s2)
    }

    fn torus_pod() -> Pod {
        Pod::new(
            vec![rec(1, 1, 3, 1), rec(4, 1, 2, 1), rec(3, 1, 1, 1), rec(2, 1, 4, 1)],
            4,
        )
        .unwrap()
    }

    #[test]
    fn commutator_rectangles() {
        let r = Word::parse("abAB").unwrap();
        let got = rectangles_of(&r).unwrap();
        let mut want = vec![
            rec(1, 1, 3, 1),
            rec(3, 1, 1, 1),
            rec(1, -1, 3, -1),
            rec(3, -1, 1, -1),
            rec(2, 1, 4, 1),
            rec(4, 1, 2, 1),
            rec(2, -1, 4, -1),
            rec(4, -1, 2, -1),
        ];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(rec(1, 1, 3, 1).flip(), rec(3, 1, 1, 1));
    }

    #[test]
    fn follows_examples() {
        assert!(follows(&rec(4, 1, 2, 1), &rec(1, 1, 3, 1), 4));
        // Wraparound: 1 ≡ 4 + 1 (mod 4).
        assert!(follows(&rec(3, 1, 1, 1), &rec(4, 1, 2, 1), 4));
        assert!(follows(&rec(1, 1, 3, 1), &rec(2, 1, 4, 1), 4));
        assert!(!follows(&rec(1, 1, 3, 1), &rec(4, 1, 2, 1), 4));
        assert!(!follows(&rec(1, -1, 3, -1), &rec(1, 1, 3, 1), 4));
    }

    #[test]
    fn torus_pod_breaks_into_two_open_tripods() {
        let b = phi0_decompose(&torus_pod());
        assert_eq!(b.len(), 2);
        assert!(b.keys().any(|f| f.kind() == FragmentKind::OpenTripod1));
        assert!(b.keys().any(|f| f.kind() == FragmentKind::OpenTripod2));
        let mut x = VerVector::new();
        x.insert(torus_pod(), Rational::one());
        let one = Functionals {
            lambda: int(1),
            nu: int(1),
            nubar: int(1),
        };
        assert_eq!(ver_functionals(&x, 4, 1), one);
        assert_eq!(b_functionals(&b, 4, 1), one);
        assert_eq!(check_a(&x, 4), Ok(()));
        assert_eq!(check_a0(&b, 4), Ok(()));
        assert_eq!(reassemble(&b), Some(x));
    }

    #[test]
    fn lone_open_tripod_is_not_in_a0() {
        let f = PodFragment::OpenTripod1 {
            center: rec(1, 1, 3, 1),
            pred: rec(2, 1, 4, 1),
            succ: rec(4, 1, 2, 1),
        };
        assert!(f.is_valid(4));
        let mut b = BVector::new();
        b.insert(f, Rational::one());
        assert!(matches!(check_a0(&b, 4), Err(_)));
    }

    #[test]
    fn mixed_basis_is_rejected() {
        let r = Word::parse("abAB").unwrap();
        let p = torus_pod();
        let f = *phi0_decompose(&p).keys().next().unwrap();
        let x = vec![(Element::Pod(p), Rational::one()), (Element::Fragment(f), Rational::one())];
        assert_eq!(functional_values(&x, &r, 1), Err(PodError::MixedBasis));
        assert_eq!(
            functional_values(&[], &r, 1).unwrap(),
            Functionals {
                lambda: Rational::zero(),
                nu: Rational::zero(),
                nubar: Rational::zero()
            }
        );
    }
}
