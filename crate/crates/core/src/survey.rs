//! Random reduced words in the commutator subgroup and their statistics.
//!
//! Streams: sample `i` at length `n` draws from ChaCha8 seeded with the survey
//! seed, on stream `(n << 32) | i`. Samples are independent of the number of
//! worker threads and of the order in which they finish.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cancellation::scan_pieces;
use crate::lallop::{lallop, LallopError, LallopOptions, Mode, Solver};
use crate::words::{cyclically_reduce, Letter, Word};

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

pub const CSV_HEADER: &str = "n,k,samples,mean_piece,max_piece,frac_cprime_sqrt,mean_lallop_stat,seed";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurveyError {
    #[error("invalid survey configuration: {0}")]
    InvalidConfig(String),
    #[error("no word of length {n} over {k} generators in the commutator subgroup after {attempts} attempts")]
    RejectionBudgetExceeded { n: usize, k: usize, attempts: u64 },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Lallop(#[from] LallopError),
}

impl SurveyError {
    pub fn name(&self) -> &'static str {
        match self {
            SurveyError::InvalidConfig(_) => "InvalidConfig",
            SurveyError::RejectionBudgetExceeded { .. } => "RejectionBudgetExceeded",
            SurveyError::Csv(_) => "CsvError",
            SurveyError::Lallop(e) => e.name(),
        }
    }
}

/// The rng for one sample.
pub fn sample_rng(seed: u64, n: usize, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | index);
    rng
}

/// A uniform reduced word of length n (no conditioning).
pub fn random_reduced_word<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(n);
    for _ in 0..n {
        let l = match out.last() {
            None => letter_of(rng.random_range(0..2 * k)),
            Some(prev) => {
                // 2k − 1 choices: skip the inverse of the previous letter.
                let forbidden = index_of(prev.inverse());
                let mut j = rng.random_range(0..2 * k - 1);
                if j >= forbidden {
                    j += 1;
                }
                letter_of(j)
            }
        };
        out.push(l);
    }
    out
}

fn letter_of(j: usize) -> Letter {
    Letter::new((j / 2 + 1) as u32, j % 2 == 0)
}

fn index_of(l: Letter) -> usize {
    2 * (l.generator() as usize - 1) + usize::from(!l.is_positive())
}

fn exponent_sums_vanish(letters: &[Letter], k: usize) -> bool {
    let mut sums = vec![0i64; k];
    for l in letters {
        sums[l.generator() as usize - 1] += if l.is_positive() { 1 } else { -1 };
    }
    sums.iter().all(|&s| s == 0)
}

/// A uniform reduced word of length n with zero abelianization, by rejection.
/// Also returns the number of attempts used.
pub fn sample_commutator_word_counted<R: Rng>(
    n: usize,
    k: usize,
    rng: &mut R,
    cap: u64,
) -> Result<(Word, u64), SurveyError> {
    if n == 0 || n % 2 == 1 {
        return Err(SurveyError::InvalidConfig(format!("length {n} must be even and positive")));
    }
    if k == 0 {
        return Err(SurveyError::InvalidConfig("the alphabet is empty".into()));
    }
    for attempt in 1..=cap {
        let letters = random_reduced_word(n, k, rng);
        if exponent_sums_vanish(&letters, k) {
            let w = Word::from_letters(letters, k as u32);
            debug_assert_eq!(w.len(), n);
            return Ok((w, attempt));
        }
    }
    Err(SurveyError::RejectionBudgetExceeded { n, k, attempts: cap })
}

pub fn sample_commutator_word<R: Rng>(n: usize, k: usize, rng: &mut R, cap: u64) -> Result<Word, SurveyError> {
    sample_commutator_word_counted(n, k, rng, cap).map(|(w, _)| w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyConfig {
    pub alphabet_size: usize,
    pub lengths: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Run lallop on every sample in this mode (exact solver).
    pub lallop: Option<Mode>,
    pub lallop_budget: u64,
    pub rejection_cap: u64,
}

impl SurveyConfig {
    pub fn new(alphabet_size: usize, lengths: Vec<usize>, samples: usize, seed: u64) -> Self {
        SurveyConfig {
            alphabet_size,
            lengths,
            samples,
            seed,
            lallop: None,
            lallop_budget: crate::lallop::DEFAULT_BUDGET,
            rejection_cap: DEFAULT_REJECTION_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), SurveyError> {
        if self.alphabet_size < 2 {
            return Err(SurveyError::InvalidConfig("need at least two generators".into()));
        }
        if self.samples == 0 {
            return Err(SurveyError::InvalidConfig("need at least one sample".into()));
        }
        if self.lengths.is_empty() {
            return Err(SurveyError::InvalidConfig("no lengths given".into()));
        }
        if let Some(n) = self.lengths.iter().find(|&&n| n < 2 || n % 2 == 1) {
            return Err(SurveyError::InvalidConfig(format!("length {n} must be even and at least 2")));
        }
        Ok(())
    }
}

/// What was measured on one word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub word: Word,
    pub core_length: usize,
    pub piece: usize,
    /// C′(1/√n) for the cyclic core: piece ≤ |core|/√n.
    pub cprime_sqrt: bool,
    /// The same test against the sampled length: piece ≤ n/√n.
    pub cprime_sqrt_raw: bool,
    pub attempts: u64,
    pub lallop_stat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub mean_piece: f64,
    pub max_piece: usize,
    pub frac_cprime_sqrt: f64,
    pub frac_cprime_sqrt_raw: f64,
    /// Mean of lallop·log(n)/n over the samples where it was computed.
    pub mean_lallop_stat: Option<f64>,
    pub lallop_computed: usize,
    /// samples / attempts of the rejection sampler.
    pub acceptance_rate: f64,
    pub seed: u64,
    #[serde(skip)]
    pub per_sample: Vec<SampleStats>,
}

pub fn measure(w: &Word, n: usize) -> (usize, usize, bool, bool) {
    let (core, _) = cyclically_reduce(w);
    let piece = scan_pieces(&core).max_piece_length;
    let c = core.len();
    (c, piece, piece * piece * n <= c * c, piece * piece <= n)
}

fn lallop_stat(w: &Word, n: usize, mode: Mode, budget: u64) -> Result<Option<f64>, SurveyError> {
    let opts = LallopOptions {
        mode,
        solver: Solver::Exact,
        budget,
    };
    match lallop(w, &opts) {
        Ok(res) => Ok(Some(res.value.to_f64() * (n as f64).ln() / n as f64)),
        Err(LallopError::ResourceLimit { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run_survey(cfg: &SurveyConfig) -> Result<Vec<SurveyRow>, SurveyError> {
    cfg.validate()?;
    let k = cfg.alphabet_size;
    let mut rows = Vec::with_capacity(cfg.lengths.len());
    for &n in &cfg.lengths {
        let per_sample: Vec<SampleStats> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(cfg.seed, n, i);
                let (word, attempts) = sample_commutator_word_counted(n, k, &mut rng, cfg.rejection_cap)?;
                let (core_length, piece, cprime_sqrt, cprime_sqrt_raw) = measure(&word, n);
                let lallop_stat = match cfg.lallop {
                    Some(mode) => lallop_stat(&word, n, mode, cfg.lallop_budget)?,
                    None => None,
                };
                Ok(SampleStats {
                    word,
                    core_length,
                    piece,
                    cprime_sqrt,
                    cprime_sqrt_raw,
                    attempts,
                    lallop_stat,
                })
            })
            .collect::<Result<_, SurveyError>>()?;
        let s = per_sample.len() as f64;
        let stats: Vec<f64> = per_sample.iter().filter_map(|x| x.lallop_stat).collect();
        let attempts: u64 = per_sample.iter().map(|x| x.attempts).sum();
        rows.push(SurveyRow {
            n,
            k,
            samples: per_sample.len(),
            mean_piece: per_sample.iter().map(|x| x.piece as f64).sum::<f64>() / s,
            max_piece: per_sample.iter().map(|x| x.piece).max().unwrap_or(0),
            frac_cprime_sqrt: per_sample.iter().filter(|x| x.cprime_sqrt).count() as f64 / s,
            frac_cprime_sqrt_raw: per_sample.iter().filter(|x| x.cprime_sqrt_raw).count() as f64 / s,
            mean_lallop_stat: (!stats.is_empty()).then(|| stats.iter().sum::<f64>() / stats.len() as f64),
            lallop_computed: stats.len(),
            acceptance_rate: s / attempts as f64,
            seed: cfg.seed,
            per_sample,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct CsvRecord {
    n: usize,
    k: usize,
    samples: usize,
    mean_piece: String,
    max_piece: usize,
    frac_cprime_sqrt: String,
    mean_lallop_stat: String,
    seed: u64,
}

/// Writes the rows as CSV with the fixed header.
pub fn write_csv<W: Write>(rows: &[SurveyRow], out: W) -> Result<(), SurveyError> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(CsvRecord {
            n: r.n,
            k: r.k,
            samples: r.samples,
            mean_piece: format!("{:.6}", r.mean_piece),
            max_piece: r.max_piece,
            frac_cprime_sqrt: format!("{:.6}", r.frac_cprime_sqrt),
            mean_lallop_stat: r.mean_lallop_stat.map(|x| format!("{x:.6}")).unwrap_or_default(),
            seed: r.seed,
        })
        .map_err(|e| SurveyError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| SurveyError::Csv(e.to_string()))?;
    Ok(())
}

pub fn to_csv(rows: &[SurveyRow]) -> Result<String, SurveyError> {
    let mut buf = Vec::new();
    if rows.is_empty() {
        buf.extend_from_slice(CSV_HEADER.as_bytes());
        buf.push(b'\n');
    } else {
        write_csv(rows, &mut buf)?;
    }
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}
