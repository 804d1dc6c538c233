mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use common::{fixture, q, r_m, random_relator, w};
use num_traits::One;
use onerel::diagram::{random_glued_diagram, DiagramError};
use onerel::lallop::{build_program, Mode, DEFAULT_BUDGET};
use onerel::pods::{
    b_functionals, check_a, check_a0, follows, functional_values, phi0, phi0_decompose, reassemble,
    rectangles_of, sample_pod, ver_functionals, Element, FragmentKind, Pod, PodError, PodFragment,
    Rectangle, VerVector, Violation,
};
use onerel::words::{Letter, Word};
use onerel::Rational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rect(i: u32, s: i8, i2: u32, s2: i8) -> Rectangle {
    Rectangle::new(i, s, i2, s2)
}

/// Rec by the definition: every (iˢ, i′ˢ′) with i ≠ i′ and x_iˢ = x_{i′}^{−s′}.
fn brute_rectangles(r: &Word) -> Vec<Rectangle> {
    let x = r.letters();
    let n = x.len() as u32;
    let sign = |l: Letter, s: i8| if s > 0 { l } else { l.inverse() };
    let mut out = Vec::new();
    for i in 1..=n {
        for i2 in 1..=n {
            for s in [1i8, -1] {
                for s2 in [1i8, -1] {
                    let a = sign(x[i as usize - 1], s);
                    let b = sign(x[i2 as usize - 1], s2);
                    if i != i2 && a == b.inverse() {
                        out.push(rect(i, s, i2, s2));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Root-free relators of length at most 12, shared by the property tests.
fn pool() -> &'static Vec<Word> {
    static POOL: OnceLock<Vec<Word>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut v = vec![w("abAB"), r_m(2), w("abABcdCD")];
        for j in 0..40 {
            let n = 2 * rng.random_range(2..=6);
            v.push(random_relator(&mut rng, n, 2 + j % 3));
        }
        v
    })
}

fn multiset<I: IntoIterator<Item = Rectangle>>(it: I) -> BTreeMap<Rectangle, usize> {
    let mut m = BTreeMap::new();
    for r in it {
        *m.entry(r).or_insert(0) += 1;
    }
    m
}

#[test]
fn commutator_rectangles() {
    let r = w("abAB");
    let rects = rectangles_of(&r).unwrap();
    assert_eq!(rects, brute_rectangles(&r));
    assert_eq!(rects.len(), 8);
    // The definition forces (4⁻,2⁻); (4⁻,3⁻) would pair B with b⁻¹ = B.
    assert!(rects.contains(&rect(4, -1, 2, -1)));
    assert!(!rects.contains(&rect(4, -1, 3, -1)));
    for x in &rects {
        assert!(rects.contains(&x.flip()));
    }
}

#[test]
fn rectangle_errors() {
    assert_eq!(rectangles_of(&w("")).unwrap_err(), PodError::EmptyWord);
    assert!(matches!(rectangles_of(&w("abABabAB")), Err(PodError::NotRootFree(_))));
    assert!(matches!(rectangles_of(&w("aabA")), Err(PodError::NotCyclicallyReduced(_))));
}

#[test]
fn random_rectangles_match_the_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = 2 * rng.random_range(2..=15);
        let k = rng.random_range(2..=4);
        let r = random_relator(&mut rng, n, k);
        let rects = rectangles_of(&r).unwrap();
        assert!(rects.len() <= 4 * r.len() * r.len());
        assert_eq!(rects, brute_rectangles(&r), "{r}");
    }
}

#[test]
fn follows_examples() {
    assert!(follows(&rect(4, 1, 2, 1), &rect(1, 1, 3, 1), 4));
    // Wrapping around: (3⁺,1⁺) follows (4⁺,2⁺) since 1 ≡ 4 + 1.
    assert!(follows(&rect(3, 1, 1, 1), &rect(4, 1, 2, 1), 4));
    assert!(follows(&rect(1, 1, 3, 1), &rect(2, 1, 4, 1), 4));
    assert!(!follows(&rect(1, 1, 3, 1), &rect(4, 1, 2, 1), 4));
    assert!(!follows(&rect(1, -1, 3, -1), &rect(1, 1, 3, 1), 4));
    // The negative clause steps backwards.
    assert!(follows(&rect(2, -1, 4, -1), &rect(1, -1, 3, -1), 4));
}

fn torus_pod() -> Pod {
    Pod::new(vec![rect(1, 1, 3, 1), rect(4, 1, 2, 1), rect(3, 1, 1, 1), rect(2, 1, 4, 1)], 4).unwrap()
}

#[test]
fn four_pod_breaks_into_two_open_tripods() {
    let p = torus_pod();
    let b = phi0_decompose(&p);
    let kinds: Vec<FragmentKind> = b.keys().map(|f| f.kind()).collect();
    assert_eq!(kinds.len(), 2);
    assert!(kinds.contains(&FragmentKind::OpenTripod1));
    assert!(kinds.contains(&FragmentKind::OpenTripod2));
    let x: VerVector = [(p, Rational::one())].into_iter().collect();
    let f = ver_functionals(&x, 4, 1);
    assert_eq!((f.lambda.clone(), f.nu.clone(), f.nubar.clone()), (q(1, 1), q(1, 1), q(1, 1)));
    assert_eq!(b_functionals(&phi0(&x), 4, 1), f);
    check_a(&x, 4).unwrap();
    check_a0(&phi0(&x), 4).unwrap();
}

#[test]
fn five_pods_use_one_doubly_open_tripod() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    for r in pool() {
        let rects = rectangles_of(r).unwrap();
        let Some(p) = sample_pod(&rects, r.len() as u32, 5, &mut rng) else { continue };
        let b = phi0_decompose(&p);
        let mut kinds: Vec<FragmentKind> = b.keys().map(|f| f.kind()).collect();
        kinds.sort();
        assert_eq!(
            kinds,
            vec![FragmentKind::OpenTripod1, FragmentKind::OpenTripod2, FragmentKind::DoublyOpenTripod]
        );
        let lambda0: Rational = b.keys().map(|f| f.lambda0()).sum();
        assert_eq!(lambda0, q(3, 2));
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn unmatched_open_tripods_break_slot_balance() {
    let p = torus_pod();
    let r = p.rectangles();
    // Two first-kind open tripods own all four rectangles, so the flip rows
    // balance, but nothing consumes their slots.
    let x = [
        (PodFragment::OpenTripod1 { center: r[0], pred: r[3], succ: r[1] }, Rational::one()),
        (PodFragment::OpenTripod1 { center: r[2], pred: r[1], succ: r[3] }, Rational::one()),
    ]
    .into_iter()
    .collect();
    assert!(matches!(check_a0(&x, 4), Err(Violation::SlotImbalance { .. })));
}

#[test]
fn negative_and_invalid_points() {
    let p = torus_pod();
    let x: VerVector = [(p.clone(), -Rational::one())].into_iter().collect();
    assert!(matches!(check_a(&x, 4), Err(Violation::NegativeCoefficient { .. })));
    let bad = PodFragment::bipod(rect(1, 1, 3, 1), rect(3, 1, 1, 1));
    assert!(!bad.is_valid(4));
    let y = [(bad, Rational::one())].into_iter().collect();
    assert!(matches!(check_a0(&y, 4), Err(Violation::InvalidElement(_))));
    assert_eq!(
        functional_values(&[(Element::Pod(p), q(1, 1)), (Element::Fragment(bad), q(1, 1))], &w("abAB"), 1),
        Err(PodError::MixedBasis)
    );
}

#[test]
fn diagram_points_reassemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut points = vec![fixture("torus.json").phi().unwrap(), fixture("r3_genus2.json").phi().unwrap()];
    while points.len() < 60 {
        let root = &pool()[rng.random_range(0..pool().len())];
        let degrees: Vec<i64> = (0..rng.random_range(1..=3)).map(|_| 1).collect();
        match random_glued_diagram(root, 1, &degrees, &mut rng) {
            Ok(d) => points.push(d.phi().unwrap()),
            Err(DiagramError::DegreeOneVertex { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    for x in points {
        let b = phi0(&x);
        let back = reassemble(&b).expect("Φ₀ of a diagram reassembles");
        assert_eq!(phi0(&back), b);
        let lambda: Rational = back.iter().map(|(p, v)| p.lambda() * v).sum();
        let lambda0: Rational = b.iter().map(|(f, v)| f.lambda0() * v).sum();
        assert_eq!(lambda, lambda0);
    }
}

/// Every fragment the program can use, by direct search over triples.
fn brute_fragments(r: &Word, mode: Mode) -> BTreeSet<PodFragment> {
    let rects = brute_rectangles(r);
    let n = r.len() as u32;
    let mut out = BTreeSet::new();
    for &a in &rects {
        for &b in &rects {
            let f = PodFragment::bipod(a, b);
            if a != b && f.is_valid(n) {
                out.insert(f);
            }
            for &c in &rects {
                for f in [
                    PodFragment::tripod(a, b, c),
                    PodFragment::OpenTripod1 { center: a, pred: b, succ: c },
                    PodFragment::OpenTripod2 { center: a, pred: b, spine: c },
                    PodFragment::DoublyOpenTripod { spine: a, pred: b, succ: c },
                ] {
                    if f.is_valid(n) && (mode == Mode::Full || f.kind() != FragmentKind::DoublyOpenTripod) {
                        out.insert(f);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn fragment_basis_matches_enumeration() {
    for r in [w("abAB"), r_m(2), w("abABcdCD")] {
        for mode in [Mode::Full, Mode::Truncated] {
            let p = build_program(&r, 1, mode, DEFAULT_BUDGET).unwrap();
            let got: BTreeSet<PodFragment> = p.fragments.iter().copied().collect();
            assert_eq!(got.len(), p.fragments.len(), "duplicate fragments for {r}");
            assert_eq!(got, brute_fragments(&r, mode), "{r} {mode:?}");
            let by_kind = |k| got.iter().filter(|f| f.kind() == k).count() as u64;
            assert_eq!(p.counts.bipods, by_kind(FragmentKind::Bipod));
            assert_eq!(p.counts.tripods, by_kind(FragmentKind::Tripod));
            assert_eq!(p.counts.open_tripods1, by_kind(FragmentKind::OpenTripod1));
            assert_eq!(p.counts.open_tripods2, by_kind(FragmentKind::OpenTripod2));
            assert_eq!(p.counts.doubly_open_tripods, by_kind(FragmentKind::DoublyOpenTripod));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn phi0_conserves_the_functionals(j in 0usize..43, k in 2usize..=10, seed in any::<u64>(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Walk the pool from j until some start point carries a k-pod.
        let (r, p) = (0..1000)
            .find_map(|t| {
                let r = &pool()[(j + t) % pool().len()];
                sample_pod(&rectangles_of(r).unwrap(), r.len() as u32, k, &mut rng).map(|p| (r, p))
            })
            .unwrap();
        let n = r.len() as u32;
        prop_assert_eq!(p.k(), k);
        let b = phi0_decompose(&p);
        // Each rectangle of the pod is owned exactly once.
        let owned = multiset(b.iter().flat_map(|(f, v)| {
            let c = v.to_integer().try_into().unwrap();
            std::iter::repeat_n(f.owned(), c).flatten()
        }));
        prop_assert_eq!(owned, multiset(p.rectangles().iter().copied()));
        // Emitted and consumed slots cancel inside one pod.
        let mut slots: BTreeMap<(Rectangle, Rectangle), i64> = BTreeMap::new();
        for (f, v) in &b {
            let c: i64 = v.to_integer().try_into().unwrap();
            if let Some(s) = f.emits() { *slots.entry(s).or_insert(0) += c; }
            if let Some(s) = f.consumes() { *slots.entry(s).or_insert(0) -= c; }
            prop_assert!(f.is_valid(n));
        }
        prop_assert!(slots.values().all(|v| *v == 0));
        let x: VerVector = [(p.clone(), Rational::one())].into_iter().collect();
        prop_assert_eq!(b_functionals(&b, r.len(), m), ver_functionals(&x, r.len(), m));
        prop_assert_eq!(reassemble(&b).map(|y| phi0(&y)), Some(b));
    }
}

#[test]
fn doubly_open_cycles_are_admissible_but_dominated() {
    // A closed chain of doubly open tripods around one spine balances every
    // row, yet no pod breaks up into it.
    let p = torus_pod();
    let r = p.rectangles();
    let spine = r[0];
    let cycle: onerel::pods::BVector = (0..4)
        .map(|i| (PodFragment::DoublyOpenTripod { spine, pred: r[i], succ: r[(i + 1) % 4] }, Rational::one()))
        .collect();
    check_a0(&cycle, 4).unwrap();
    assert_eq!(reassemble(&cycle), None);
    // The pod on the same rectangles has the same ν and ν̄ and λ smaller by 1.
    let f = b_functionals(&cycle, 4, 1);
    let g = ver_functionals(&[(p, Rational::one())].into_iter().collect(), 4, 1);
    assert_eq!((f.nu, f.nubar), (g.nu, g.nubar));
    assert_eq!(f.lambda, g.lambda + q(1, 1));
}
