use std::collections::HashMap;

use onerel::survey::{
    measure, random_reduced_word, run_survey, sample_commutator_word, sample_commutator_word_counted,
    sample_rng, to_csv, SurveyConfig, SurveyError, CSV_HEADER,
};
use onerel::words::{cyclically_reduce, Letter, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_letters(k: u32) -> Vec<Letter> {
    (1..=k).flat_map(|g| [Letter::new(g, true), Letter::new(g, false)]).collect()
}

/// Every reduced word of length n over k generators.
fn reduced_words(n: usize, k: u32) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &out {
            for l in all_letters(k) {
                if w.last().is_some_and(|p: &Letter| *p == l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn in_commutator(w: &[Letter], k: u32) -> bool {
    let mut sums = vec![0i64; k as usize];
    for l in w {
        sums[l.generator() as usize - 1] += if l.is_positive() { 1 } else { -1 };
    }
    sums.iter().all(|&s| s == 0)
}

/// Upper 0.001 quantile of χ² with `df` degrees of freedom (Wilson–Hilferty).
fn chi2_critical(df: f64) -> f64 {
    let z = 3.0902;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn uniform_on_the_commutator_sphere_of_radius_eight() {
    let support: Vec<Vec<Letter>> = reduced_words(8, 2).into_iter().filter(|w| in_commutator(w, 2)).collect();
    let index: HashMap<Vec<Letter>, usize> = support.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let draws = 10_000;
    let mut counts = vec![0usize; support.len()];
    for i in 0..draws {
        let w = sample_commutator_word(8, 2, &mut sample_rng(8, 8, i), 1_000_000).unwrap();
        counts[*index.get(w.letters()).expect("sample outside the support")] += 1;
    }
    let expected = draws as f64 / support.len() as f64;
    assert!(expected >= 5.0, "too few draws per cell");
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let df = (support.len() - 1) as f64;
    assert!(stat < chi2_critical(df), "χ² = {stat} over {df} degrees of freedom");
}

#[test]
fn acceptance_rate_matches_the_commutator_density() {
    for n in [4usize, 6, 8, 10, 12] {
        let all = reduced_words(n, 2);
        let p = all.iter().filter(|w| in_commutator(w, 2)).count() as f64 / all.len() as f64;
        let mut attempts = 0u64;
        let accepted = 4000u64;
        for i in 0..accepted {
            attempts += sample_commutator_word_counted(n, 2, &mut sample_rng(99, n, i), 1_000_000).unwrap().1;
        }
        let rate = accepted as f64 / attempts as f64;
        // Attempts per acceptance are geometric; compare means.
        let mean = attempts as f64 / accepted as f64;
        let sd = ((1.0 - p) / (p * p) / accepted as f64).sqrt();
        assert!((mean - 1.0 / p).abs() <= 4.0 * sd, "n = {n}: rate {rate} against {p}");
    }
}

#[test]
fn reduced_words_are_reduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [1usize, 2, 5, 30] {
        let w = random_reduced_word(40, k, &mut rng);
        assert_eq!(w.len(), 40);
        assert!(w.windows(2).all(|p| p[0] != p[1].inverse()));
        assert!(w.iter().all(|l| (1..=k as u32).contains(&l.generator())));
    }
}

#[test]
fn samples_are_reduced_commutator_words() {
    let mut cfg = SurveyConfig::new(3, vec![4, 10, 20], 50, 5);
    cfg.rejection_cap = 1_000_000;
    for row in run_survey(&cfg).unwrap() {
        assert_eq!(row.per_sample.len(), 50);
        for s in &row.per_sample {
            assert_eq!(s.word.len(), row.n);
            assert!(s.word.in_commutator_subgroup());
            assert_eq!(Word::from_letters(s.word.letters().to_vec(), 3), s.word);
            assert!(s.attempts >= 1);
            let (core, _) = cyclically_reduce(&s.word);
            assert_eq!(s.core_length, core.len());
            assert_eq!(s.core_length % 2, 0);
            assert_eq!(
                s.cprime_sqrt,
                (s.piece * s.piece * row.n) as f64 <= (s.core_length * s.core_length) as f64
            );
        }
        let max = row.per_sample.iter().map(|s| s.piece).max().unwrap();
        assert_eq!(row.max_piece, max);
    }
}

#[test]
fn measure_examples() {
    let w = Word::parse("abAB").unwrap();
    // Piece 1, √4 = 2: 1·1·4 ≤ 16.
    assert_eq!(measure(&w, 4), (4, 1, true, true));
    // A conjugated commutator is measured on its core.
    let w = Word::parse("cabABC").unwrap();
    assert_eq!(measure(&w, 6), (4, 1, true, true));
    // abab·ABAB reduces cyclically to itself and has piece 3.
    let w = Word::parse("ababABAB").unwrap();
    let (c, piece, cp, _) = measure(&w, 8);
    assert_eq!((c, piece, cp), (8, 3, false));
}

#[test]
fn csv_is_reproducible() {
    let cfg = SurveyConfig::new(2, vec![16, 24], 40, 42);
    let a = to_csv(&run_survey(&cfg).unwrap()).unwrap();
    let b = to_csv(&run_survey(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 8);
    assert_eq!((row[0], row[1], row[2], row[6], row[7]), ("16", "2", "40", "", "42"));
    assert_eq!(a.lines().count(), 3);
    // Another seed gives other words.
    let c = to_csv(&run_survey(&SurveyConfig::new(2, vec![16, 24], 40, 43)).unwrap()).unwrap();
    assert_ne!(a, c);
    assert_eq!(to_csv(&[]).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn samples_do_not_depend_on_the_thread_count() {
    let cfg = SurveyConfig::new(2, vec![12], 30, 7);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| run_survey(&cfg).unwrap());
    let b = run_survey(&cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_configurations() {
    for cfg in [
        SurveyConfig::new(1, vec![8], 10, 0),
        SurveyConfig::new(2, vec![7], 10, 0),
        SurveyConfig::new(2, vec![], 10, 0),
        SurveyConfig::new(2, vec![8], 0, 0),
    ] {
        let err = run_survey(&cfg).unwrap_err();
        assert!(matches!(err, SurveyError::InvalidConfig(_)), "{err:?}");
        assert_eq!(err.name(), "InvalidConfig");
    }
}

#[test]
fn rejection_cap_is_enforced() {
    let mut cfg = SurveyConfig::new(2, vec![48], 200, 42);
    cfg.rejection_cap = 1;
    let err = run_survey(&cfg).unwrap_err();
    assert!(matches!(err, SurveyError::RejectionBudgetExceeded { n: 48, k: 2, attempts: 1 }));
    assert_eq!(err.name(), "RejectionBudgetExceeded");
}

#[test]
fn length_two_has_no_commutator_words() {
    let err = sample_commutator_word(2, 2, &mut sample_rng(0, 2, 0), 1000).unwrap_err();
    assert!(matches!(err, SurveyError::RejectionBudgetExceeded { n: 2, .. }));
}
