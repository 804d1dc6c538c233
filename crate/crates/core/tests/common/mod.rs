#![allow(dead_code)]

use std::path::PathBuf;

use onerel::diagram::{validate_diagram, DiagramDoc, VanKampenDiagram};
use onerel::survey::{sample_commutator_word, sample_rng};
use onerel::words::{cyclically_reduce, primitive_root, Word};
use onerel::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> VanKampenDiagram {
    validate_diagram(&DiagramDoc::load(fixture_path(name)).unwrap()).unwrap()
}

pub fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

/// [a,b][a,b⁻ᵐ].
pub fn r_m(m: usize) -> Word {
    w(&format!("abABa{}A{}", "B".repeat(m), "b".repeat(m)))
}

/// A random cyclically reduced, root-free word of length `n` in the commutator subgroup.
pub fn random_relator(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Word {
    loop {
        let seed: u64 = rng.random();
        let x = sample_commutator_word(n, k, &mut sample_rng(seed, n, 0), 1_000_000).unwrap();
        let (core, _) = cyclically_reduce(&x);
        if !core.is_empty() && primitive_root(&core).unwrap().exponent == 1 {
            return core;
        }
    }
}
