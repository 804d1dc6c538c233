//! Pieces, the C′(1/N) condition, and the structural volume bounds.

use num_traits::One;
use ratlp::rational::{int, rat};
use ratlp::Rational;
use serde::Serialize;

use crate::words::{abelianize, cyclically_reduce, minimal_period, primitive_root, Letter, Word};
use crate::rational_serde;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CancellationError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("{0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("{word} is the proper power ({root})^{exponent}")]
    IsProperPower { word: String, root: String, exponent: u32 },
    #[error("{0} is not in the commutator subgroup")]
    NotInCommutatorSubgroup(String),
    #[error("invalid scl: {0}")]
    InvalidScl(String),
    #[error("N must be positive")]
    InvalidN,
}

impl CancellationError {
    pub fn name(&self) -> &'static str {
        match self {
            CancellationError::EmptyWord => "EmptyWord",
            CancellationError::NotCyclicallyReduced(_) => "NotCyclicallyReduced",
            CancellationError::IsProperPower { .. } => "IsProperPower",
            CancellationError::NotInCommutatorSubgroup(_) => "NotInCommutatorSubgroup",
            CancellationError::InvalidScl(_) => "InvalidScl",
            CancellationError::InvalidN => "InvalidN",
        }
    }
}

/// Where the longest piece was found: `rotation` of r and `other_rotation` of
/// r (or of r⁻¹ when `inverse` is set) share the prefix `piece`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceWitness {
    pub rotation: usize,
    pub other_rotation: usize,
    pub inverse: bool,
    pub piece: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceReport {
    pub word: Word,
    pub max_piece_length: usize,
    pub witness: Option<PieceWitness>,
    /// Largest N with C′(1/N); 0 stands for "every N" (no pieces at all).
    pub c_prime_threshold: usize,
}

fn z_function(s: &[i32]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

fn check_input(r: &Word) -> Result<(), CancellationError> {
    if r.is_empty() {
        return Err(CancellationError::EmptyWord);
    }
    if !r.is_cyclically_reduced() {
        return Err(CancellationError::NotCyclicallyReduced(r.to_string()));
    }
    let p = minimal_period(r.letters());
    if p < r.len() {
        let root = Word::from_letters(r.letters()[..p].iter().copied(), r.alphabet_size());
        return Err(CancellationError::IsProperPower {
            word: r.to_string(),
            root: root.to_string(),
            exponent: (r.len() / p) as u32,
        });
    }
    Ok(())
}

/// Longest common prefix of two distinct cyclic conjugates of r^{±1}.
///
/// For each rotation u of r, one Z-function pass over `u # r r` (and `u # r⁻¹ r⁻¹`)
/// gives its common prefix with every rotation at once.
pub fn max_piece_length(r: &Word) -> Result<PieceReport, CancellationError> {
    check_input(r)?;
    Ok(scan_pieces(r))
}

/// Same scan for any non-empty cyclically reduced word, proper powers included.
/// Rotations that coincide as words are not counted as pieces.
pub(crate) fn scan_pieces(r: &Word) -> PieceReport {
    let n = r.len();
    let fwd: Vec<i32> = r.letters().iter().map(|l| l.signed()).collect();
    let inv: Vec<i32> = r.inverse().letters().iter().map(|l| l.signed()).collect();
    let mut best: Option<(usize, usize, usize, bool)> = None;
    for a in 0..n {
        for (inverse, other) in [(false, &fwd), (true, &inv)] {
            let mut s: Vec<i32> = Vec::with_capacity(3 * n + 1);
            s.extend(fwd[a..].iter().chain(&fwd[..a]));
            s.push(0);
            s.extend(other.iter().chain(other.iter()));
            let z = z_function(&s);
            for b in 0..n {
                if !inverse && z[n + 1 + b] >= n {
                    continue;
                }
                let len = z[n + 1 + b].min(n);
                if best.is_none_or(|(l, ..)| len > l) {
                    best = Some((len, a, b, inverse));
                }
            }
        }
    }
    let (len, a, b, inverse) = best.expect("non-empty word");
    let witness = (len > 0).then(|| PieceWitness {
        rotation: a,
        other_rotation: b,
        inverse,
        piece: Word::from_letters(
            (0..len).map(|k| Letter::from_signed(fwd[(a + k) % n])),
            r.alphabet_size(),
        ),
    });
    PieceReport {
        word: r.clone(),
        max_piece_length: len,
        witness,
        c_prime_threshold: if len == 0 { 0 } else { n / len },
    }
}

/// C′(1/N): every piece has length at most |r|/N.
pub fn satisfies_c_prime(r: &Word, n: usize) -> Result<bool, CancellationError> {
    if n == 0 {
        return Err(CancellationError::InvalidN);
    }
    let report = max_piece_length(r)?;
    Ok(report.max_piece_length * n <= r.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// The simplicial volume ‖G_r‖.
    Volume,
    /// scl(r), derived from the piece structure.
    Scl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
    StrictUpper,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub quantity: Quantity,
    pub side: Side,
    #[serde(with = "rational_serde")]
    pub value: Rational,
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub word: Word,
    #[serde(with = "rational_serde::option")]
    pub scl_input: Option<Rational>,
    pub bounds: Vec<Bound>,
}

impl BoundReport {
    fn extremes(&self, quantity: Quantity) -> (Option<&Bound>, Option<&Bound>) {
        let lower = self
            .bounds
            .iter()
            .filter(|b| b.quantity == quantity && matches!(b.side, Side::Lower | Side::Exact))
            .max_by(|a, b| a.value.cmp(&b.value));
        let upper = self
            .bounds
            .iter()
            .filter(|b| {
                b.quantity == quantity && matches!(b.side, Side::Upper | Side::StrictUpper | Side::Exact)
            })
            .min_by(|a, b| {
                a.value
                    .cmp(&b.value)
                    .then((a.side == Side::StrictUpper).cmp(&(b.side == Side::StrictUpper)).reverse())
            });
        (lower, upper)
    }

    /// Best lower bound on the volume, if any.
    pub fn volume_lower(&self) -> Option<&Rational> {
        self.extremes(Quantity::Volume).0.map(|b| &b.value)
    }

    /// Best upper bound on the volume and whether it is strict.
    pub fn volume_upper(&self) -> Option<(&Rational, bool)> {
        self.extremes(Quantity::Volume)
            .1
            .map(|b| (&b.value, b.side == Side::StrictUpper))
    }

    /// Does the reported interval contain `x`?
    pub fn contains(&self, x: &Rational) -> bool {
        let lower_ok = self.volume_lower().is_none_or(|l| l <= x);
        let upper_ok = match self.volume_upper() {
            None => true,
            Some((u, true)) => x < u,
            Some((u, false)) => x <= u,
        };
        lower_ok && upper_ok
    }

    fn consistent(&self) -> bool {
        for q in [Quantity::Volume, Quantity::Scl] {
            if let (Some(l), Some(u)) = self.extremes(q) {
                let ok = if u.side == Side::StrictUpper {
                    l.value < u.value
                } else {
                    l.value <= u.value
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

/// Splits of r into pieces with disjoint supports, up to rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Decomposition {
    /// `rotation(r) = r1 · r2`.
    Product { rotation: usize, r1: Word, r2: Word },
    /// `rotation(r) = r1 · t · r2 · t⁻¹`.
    Conjugated { rotation: usize, r1: Word, t: Letter, r2: Word },
}

impl Decomposition {
    /// The rotation of r described by the witness.
    pub fn reassemble(&self) -> Word {
        match self {
            Decomposition::Product { r1, r2, .. } => r1.mul(r2),
            Decomposition::Conjugated { r1, t, r2, .. } => {
                let t = Word::from_letters([*t], r1.alphabet_size());
                r1.mul(&t).mul(r2).mul(&t.inverse())
            }
        }
    }
}

fn nontrivial_in_commutator(w: &Word) -> bool {
    !w.is_empty() && abelianize(w).iter().all(|&x| x == 0)
}

/// Searches the rotations of r for either decomposable shape. The conjugated
/// shape is tried first since it is also a product of disjoint supports.
pub fn detect_decomposable(r: &Word) -> Option<Decomposition> {
    if !r.is_cyclically_reduced() {
        return None;
    }
    let n = r.len();
    let k = r.alphabet_size();
    let rotations: Vec<Word> = (0..n).map(|rot| r.rotate(rot)).collect();
    for (rot, u) in rotations.iter().enumerate() {
        let l = u.letters();
        let t = l[n - 1].inverse();
        let g = t.generator();
        for i in 1..n.saturating_sub(2) {
            if l[i] != t {
                continue;
            }
            let r1 = Word::from_letters(l[..i].iter().copied(), k);
            let r2 = Word::from_letters(l[i + 1..n - 1].iter().copied(), k);
            if nontrivial_in_commutator(&r1)
                && nontrivial_in_commutator(&r2)
                && !r1.support().contains(&g)
                && !r2.support().contains(&g)
            {
                return Some(Decomposition::Conjugated { rotation: rot, r1, t, r2 });
            }
        }
    }
    for (rot, u) in rotations.iter().enumerate() {
        let l = u.letters();
        for split in 1..n {
            let r1 = Word::from_letters(l[..split].iter().copied(), k);
            let r2 = Word::from_letters(l[split..].iter().copied(), k);
            if nontrivial_in_commutator(&r1)
                && nontrivial_in_commutator(&r2)
                && r1.support().is_disjoint(&r2.support())
            {
                return Some(Decomposition::Product { rotation: rot, r1, r2 });
            }
        }
    }
    None
}

/// Volume bounds that follow from the shape of r and, optionally, scl(r).
pub fn bound_report(r: &Word, scl: Option<&Rational>) -> Result<BoundReport, CancellationError> {
    if r.is_empty() {
        return Err(CancellationError::EmptyWord);
    }
    if !r.in_commutator_subgroup() {
        return Err(CancellationError::NotInCommutatorSubgroup(r.to_string()));
    }
    if let Some(s) = scl {
        if *s < rat(1, 2) {
            return Err(CancellationError::InvalidScl(format!(
                "scl must be at least 1/2, got {}",
                ratlp::format_rational(s)
            )));
        }
    }
    let (core, _) = cyclically_reduce(r);
    let dec = primitive_root(&core).map_err(|_| CancellationError::EmptyWord)?;
    let mut bounds = Vec::new();
    let volume = |side, value, source| Bound {
        quantity: Quantity::Volume,
        side,
        value,
        source,
    };
    if let Some(s) = scl {
        bounds.push(volume(Side::StrictUpper, int(4) * s, "weak upper bound"));
    }
    if dec.exponent == 1 {
        let report = max_piece_length(&core)?;
        let n = report.c_prime_threshold;
        // No pieces at all cannot happen in F′, where every generator occurs twice.
        if n >= 7 {
            let nr = int(n as i64);
            if let Some(s) = scl {
                let v = (Rational::one() - int(6) / &nr) * int(4) * s;
                bounds.push(volume(Side::Lower, v, "small cancellation"));
            }
            bounds.push(volume(
                Side::Lower,
                &nr / int(3) - Rational::one(),
                "small cancellation, unconditional",
            ));
            bounds.push(Bound {
                quantity: Quantity::Scl,
                side: Side::Lower,
                value: (&nr - int(6)) / int(12),
                source: "small cancellation, scl",
            });
        }
        if let (Some(s), Some(_)) = (scl, detect_decomposable(&core)) {
            let v = int(4) * (s - rat(1, 2));
            bounds.push(volume(Side::Exact, v, "decomposable relator"));
        }
    } else if dec.exponent >= 7 {
        if let Some(s) = scl {
            let m = int(dec.exponent as i64);
            let v = (Rational::one() - int(6) / m) * int(4) * s;
            bounds.push(volume(Side::Lower, v, "proper power"));
        }
    }
    if let Some(s) = scl {
        bounds.push(Bound {
            quantity: Quantity::Scl,
            side: Side::Exact,
            value: s.clone(),
            source: "input",
        });
    }
    let report = BoundReport {
        word: r.clone(),
        scl_input: scl.cloned(),
        bounds,
    };
    if !report.consistent() {
        return Err(CancellationError::InvalidScl(
            "the supplied scl contradicts the bounds implied by the word".into(),
        ));
    }
    Ok(report)
}
