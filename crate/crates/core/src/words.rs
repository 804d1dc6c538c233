//! Words in a free group.
//!
//! Generators are `a`–`z` and their inverses `A`–`Z`. Alphabets larger than 26
//! use the numeric form `g27` / `G27`, which the parser accepts for any index.
//! The identity renders as `1`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("invalid character {character:?} at position {position}")]
    InvalidCharacter { character: char, position: usize },
    #[error("the word is empty")]
    EmptyWord,
    #[error("parse error at position {position}: {message}")]
    ParseError { position: usize, message: String },
    #[error("unbound name {0:?}")]
    UnboundName(String),
}

impl WordError {
    pub fn name(&self) -> &'static str {
        match self {
            WordError::InvalidCharacter { .. } => "InvalidCharacter",
            WordError::EmptyWord => "EmptyWord",
            WordError::ParseError { .. } => "ParseError",
            WordError::UnboundName(_) => "UnboundName",
        }
    }
}

/// A generator or its inverse, stored as `±index` with 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: u32, positive: bool) -> Letter {
        assert!(generator >= 1, "generator indices start at 1");
        let g = generator as i32;
        Letter(if positive { g } else { -g })
    }

    /// From the signed encoding `±generator`. Panics on 0.
    pub fn from_signed(value: i32) -> Letter {
        assert!(value != 0, "0 is not a letter");
        Letter(value)
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> u32 {
        self.0.unsigned_abs()
    }

    /// +1 or -1.
    pub fn sign(self) -> i32 {
        self.0.signum()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    fn render(self, numeric: bool, out: &mut String) {
        let g = self.generator();
        if !numeric && g <= 26 {
            let base = if self.is_positive() { b'a' } else { b'A' };
            out.push((base + (g - 1) as u8) as char);
        } else {
            out.push(if self.is_positive() { 'g' } else { 'G' });
            out.push_str(&g.to_string());
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(false, &mut s);
        f.write_str(&s)
    }
}

/// A freely reduced word. Equality and hashing ignore the alphabet size.
#[derive(Debug, Clone, Eq)]
pub struct Word {
    letters: Vec<Letter>,
    alphabet_size: u32,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl std::hash::Hash for Word {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letters.cmp(&other.letters)
    }
}

/// Stack-based free reduction.
pub fn free_reduce(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl Word {
    pub fn identity(alphabet_size: u32) -> Word {
        Word {
            letters: Vec::new(),
            alphabet_size,
        }
    }

    /// Freely reduces `letters`. The alphabet grows to cover every generator used.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>, alphabet_size: u32) -> Word {
        let letters = free_reduce(letters);
        let top = letters.iter().map(|l| l.generator()).max().unwrap_or(0);
        Word {
            letters,
            alphabet_size: alphabet_size.max(top),
        }
    }

    /// Convenience for tests and fixtures: `Word::parse("abAB")` over 26 letters.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let w = parse_word(text, 26)?;
        let top = w.letters.iter().map(|l| l.generator()).max().unwrap_or(1);
        Ok(Word {
            alphabet_size: top.max(1),
            ..w
        })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn with_alphabet(mut self, alphabet_size: u32) -> Word {
        self.alphabet_size = self.alphabet_size.max(alphabet_size);
        self
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            alphabet_size: self.alphabet_size,
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(
            self.letters.iter().chain(other.letters.iter()).copied(),
            self.alphabet_size.max(other.alphabet_size),
        )
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.alphabet_size);
        for _ in 0..exponent.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `h · self · h⁻¹`.
    pub fn conjugate_by(&self, h: &Word) -> Word {
        h.mul(self).mul(&h.inverse())
    }

    /// `[self, h] = self · h · self⁻¹ · h⁻¹`.
    pub fn commutator(&self, h: &Word) -> Word {
        self.mul(h).mul(&self.inverse()).mul(&h.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(a), Some(b)) => self.letters.len() == 1 || *a != b.inverse(),
            _ => true,
        }
    }

    /// The cyclic rotation starting at letter `k`, freely reduced.
    pub fn rotate(&self, k: usize) -> Word {
        if self.is_empty() {
            return self.clone();
        }
        let k = k % self.len();
        Word::from_letters(
            self.letters[k..].iter().chain(&self.letters[..k]).copied(),
            self.alphabet_size,
        )
    }

    pub fn support(&self) -> BTreeSet<u32> {
        self.letters.iter().map(|l| l.generator()).collect()
    }

    pub fn in_commutator_subgroup(&self) -> bool {
        abelianize(self).iter().all(|&x| x == 0)
    }

    fn numeric(&self) -> bool {
        self.alphabet_size > 26 || self.letters.iter().any(|l| l.generator() > 26)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let numeric = self.numeric();
        let mut s = String::with_capacity(self.letters.len());
        for l in &self.letters {
            l.render(numeric, &mut s);
        }
        f.write_str(&s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Reads letters without reducing them. `1` alone is the identity; whitespace is skipped.
pub(crate) fn scan_letters(text: &str, alphabet_size: u32) -> Result<Vec<Letter>, WordError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() == 1 && chars[0] == '1' {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let bad = || WordError::InvalidCharacter {
            character: ch,
            position: i,
        };
        if (ch == 'g' || ch == 'G') && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            let g: u32 = digits.parse().map_err(|_| bad())?;
            if g == 0 || g > alphabet_size {
                return Err(bad());
            }
            out.push(Letter::new(g, ch == 'g'));
            i = j;
            continue;
        }
        let (g, positive) = match ch {
            'a'..='z' => (ch as u32 - 'a' as u32 + 1, true),
            'A'..='Z' => (ch as u32 - 'A' as u32 + 1, false),
            _ => return Err(bad()),
        };
        if g > alphabet_size {
            return Err(bad());
        }
        out.push(Letter::new(g, positive));
        i += 1;
    }
    Ok(out)
}

/// Parses and freely reduces a word over the first `alphabet_size` generators.
pub fn parse_word(text: &str, alphabet_size: u32) -> Result<Word, WordError> {
    let letters = scan_letters(text.trim(), alphabet_size)?;
    Ok(Word::from_letters(letters, alphabet_size))
}

/// Returns `(core, conjugator)` with `core` cyclically reduced and
/// `conjugator · core · conjugator⁻¹ = w`.
pub fn cyclically_reduce(w: &Word) -> (Word, Word) {
    let l = &w.letters;
    let mut k = 0;
    while 2 * k + 1 < l.len() && l[k] == l[l.len() - 1 - k].inverse() {
        k += 1;
    }
    let core = Word {
        letters: l[k..l.len() - k].to_vec(),
        alphabet_size: w.alphabet_size,
    };
    let conj = Word {
        letters: l[..k].to_vec(),
        alphabet_size: w.alphabet_size,
    };
    (core, conj)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootDecomposition {
    pub root: Word,
    pub exponent: u32,
    pub conjugator: Word,
}

impl RootDecomposition {
    /// `conjugator · root^exponent · conjugator⁻¹`.
    pub fn expand(&self) -> Word {
        self.root.pow(self.exponent as i64).conjugate_by(&self.conjugator)
    }
}

/// Smallest period of a sequence, from the KMP failure function.
pub(crate) fn minimal_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

pub fn primitive_root(w: &Word) -> Result<RootDecomposition, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let (core, conjugator) = cyclically_reduce(w);
    let p = minimal_period(&core.letters);
    Ok(RootDecomposition {
        root: Word {
            letters: core.letters[..p].to_vec(),
            alphabet_size: w.alphabet_size,
        },
        exponent: (core.len() / p) as u32,
        conjugator,
    })
}

/// Exponent sums per generator.
pub fn abelianize(w: &Word) -> Vec<i64> {
    let mut v = vec![0i64; w.alphabet_size as usize];
    for l in &w.letters {
        v[l.generator() as usize - 1] += l.sign() as i64;
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

fn tokenize(expr: &str) -> Result<Vec<(usize, Tok)>, WordError> {
    let chars: Vec<char> = expr.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| WordError::ParseError {
                position: start,
                message: format!("integer {s} out of range"),
            })?;
            out.push((start, Tok::Int(v)));
        } else if "()[],*^'-".contains(ch) {
            out.push((i, Tok::Sym(ch)));
            i += 1;
        } else {
            return Err(WordError::ParseError {
                position: i,
                message: format!("unexpected character {ch:?}"),
            });
        }
    }
    Ok(out)
}

struct Evaluator<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    bindings: &'a HashMap<String, Word>,
}

impl Evaluator<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, WordError> {
        Err(WordError::ParseError {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), WordError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {c:?}"))
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_)) | Some(Tok::Sym('(')) | Some(Tok::Sym('[')) | Some(Tok::Int(1))
        )
    }

    fn product(&mut self) -> Result<Word, WordError> {
        let mut acc = self.power()?;
        loop {
            if self.peek() == Some(&Tok::Sym('*')) {
                self.pos += 1;
                acc = acc.mul(&self.power()?);
            } else if self.starts_atom() {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Word, WordError> {
        let mut w = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('\'')) => {
                    self.pos += 1;
                    w = w.inverse();
                }
                Some(Tok::Sym('^')) => {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Sym('-')) => {
                            self.pos += 1;
                            match self.peek().cloned() {
                                Some(Tok::Int(n)) => {
                                    self.pos += 1;
                                    w = w.pow(-n);
                                }
                                _ => return self.fail("expected an integer exponent"),
                            }
                        }
                        Some(Tok::Int(n)) => {
                            self.pos += 1;
                            w = w.pow(n);
                        }
                        _ => {
                            let h = self.atom()?;
                            w = w.conjugate_by(&h);
                        }
                    }
                }
                _ => return Ok(w),
            }
        }
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(w) = self.bindings.get(&name) {
                    return Ok(w.clone());
                }
                scan_letters(&name, u32::MAX)
                    .map(|l| Word::from_letters(l, 1))
                    .map_err(|_| WordError::UnboundName(name))
            }
            Some(Tok::Int(1)) => {
                self.pos += 1;
                Ok(Word::identity(1))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let w = self.product()?;
                self.expect(')')?;
                Ok(w)
            }
            Some(Tok::Sym('[')) => {
                self.pos += 1;
                let g = self.product()?;
                self.expect(',')?;
                let h = self.product()?;
                self.expect(']')?;
                Ok(g.commutator(&h))
            }
            _ => self.fail("expected a word, name, '(' or '['"),
        }
    }
}

/// Evaluates an expression such as `"v^-1 * (t1 v t1^-1) [g,h]"`.
///
/// Names are looked up in `bindings` first; an unbound name made only of
/// letters is read as a literal word.
pub fn evaluate(expr: &str, bindings: &HashMap<String, Word>) -> Result<Word, WordError> {
    let toks = tokenize(expr)?;
    let mut ev = Evaluator {
        toks,
        pos: 0,
        end: expr.chars().count(),
        bindings,
    };
    let w = ev.product()?;
    if ev.pos != ev.toks.len() {
        return ev.fail("trailing input");
    }
    Ok(w)
}
