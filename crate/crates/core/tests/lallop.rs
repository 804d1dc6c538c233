mod common;

use common::{fixture, q, r_m, w};
use onerel::lallop::{
    build_program, check_certificate, lallop, r_m_upper, LallopError, LallopOptions, LallopResult, Mode,
    Solver, DEFAULT_BUDGET,
};
use onerel::diagram::{random_glued_diagram, VanKampenDiagram};
use onerel::words::Word;
use onerel::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(x: &Word, mode: Mode) -> LallopResult {
    lallop(x, &LallopOptions { mode, ..Default::default() }).unwrap()
}

fn exact(x: &Word, mode: Mode) -> Rational {
    run(x, mode).value.exact().unwrap().clone()
}

/// 4·scl(r_m) − 2 with scl(r_m) = (2m − 3)/(2m − 2).
fn scl_bound(m: i64) -> Rational {
    q(4, 1) * q(2 * m - 3, 2 * m - 2) - q(2, 1)
}

#[test]
fn commutator_is_zero_in_both_modes() {
    let full = run(&w("abAB"), Mode::Full);
    assert_eq!(full.value.exact(), Some(&q(0, 1)));
    assert_eq!((full.root.to_string(), full.power), ("abAB".into(), 1));
    assert!(exact(&w("abAB"), Mode::Truncated) >= q(0, 1));
}

#[test]
fn r2_is_zero() {
    let r2 = w("abABaBBAbb");
    assert_eq!(r2, r_m(2));
    let full = run(&r2, Mode::Full);
    assert_eq!(full.value.exact(), Some(&q(0, 1)));
    assert_eq!(full.verification, "exact");
    assert!(full.value.exact().unwrap() <= &scl_bound(2));
    assert!(full.value.exact().unwrap() <= &r_m_upper(2));
    let truncated = exact(&r2, Mode::Truncated);
    assert!(truncated >= q(0, 1));
    // Sandwich: a two-disk torus diagram bounds the volume by 0 from above.
    let torus = torus_diagram_for(&r2).expect("a torus gluing of r₂");
    assert_eq!(torus.volume_upper_bound().unwrap(), r_m_upper(2));
    assert_eq!(full.value.exact().unwrap(), &r_m_upper(2));
}

/// Random two-disk gluings until one closes up into a torus.
fn torus_diagram_for(r: &Word) -> Option<VanKampenDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..200_000).find_map(|_| {
        random_glued_diagram(r, 1, &[1, 1], &mut rng).ok().filter(|d| d.chi() == 0)
    })
}

#[test]
fn r3_sandwich_on_the_fixture() {
    let d = fixture("r3_genus2.json");
    assert_eq!(d.volume_upper_bound().unwrap(), r_m_upper(3));
    assert_eq!(d.lallop_ratio().unwrap(), r_m_upper(3));
    // The lower end is the full solve, run by the acceptance target.
}

#[test]
fn truncated_values_for_r3_and_r4() {
    assert_eq!(exact(&r_m(3), Mode::Truncated), q(1, 1));
    assert_eq!(exact(&r_m(4), Mode::Truncated), q(4, 3));
    assert_eq!(r_m_upper(3), q(1, 1));
    assert_eq!(r_m_upper(4), q(4, 3));
    assert_eq!(scl_bound(3), q(1, 1));
}

#[test]
fn float_solver_is_verified_on_the_commutator() {
    let res = lallop(
        &w("abAB"),
        &LallopOptions {
            solver: Solver::Float { tol: 1e-9 },
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(res.verification, "verified");
    assert_eq!(res.value.exact(), Some(&q(0, 1)));
}

#[test]
fn surface_relator() {
    let res = run(&w("abABcdCD"), Mode::Full);
    assert_eq!(res.value.exact(), Some(&q(4, 1)));
    // Matches the upper bound from the one-disk genus-2 diagram.
    assert_eq!(fixture("genus2.json").volume_upper_bound().unwrap(), q(4, 1));
}

#[test]
fn counterexample_relator_is_not_positive() {
    // The truncated value bounds the full one from above.
    let v = w("aaaabABAbaBAAbAB");
    let res = run(&v, Mode::Truncated);
    assert!(res.value.exact().unwrap() <= &q(0, 1), "{}", res.value);
}

#[test]
fn diagram_points_are_feasible() {
    for (name, mode) in [
        ("torus.json", Mode::Full),
        ("torus.json", Mode::Truncated),
        ("genus2.json", Mode::Full),
        ("r3_genus2.json", Mode::Full),
        ("r3_genus2.json", Mode::Truncated),
    ] {
        let d = fixture(name);
        let p = build_program(d.root(), d.power(), mode, DEFAULT_BUDGET).unwrap();
        let b = p.point_from_diagram(&d).unwrap();
        let point = p.to_point(&b);
        let big_pods = d.phi().unwrap().keys().any(|pod| pod.k() > 4);
        if mode == Mode::Truncated && big_pods {
            // Vertices of degree above 4 need doubly open tripods.
            assert!(point.len() < b.len(), "{name}");
            continue;
        }
        assert_eq!(point.len(), b.len(), "{name}: the diagram uses fragments outside the basis");
        p.lp.check_feasible(&point).unwrap_or_else(|row| panic!("{name}: row {row} fails"));
        let ratio = d.lallop_ratio().unwrap();
        assert_eq!(p.objective(&b), ratio, "{name}");
        assert_eq!(p.lp.objective_value(&point), ratio, "{name}");
        check_certificate(&p, &b, &ratio).unwrap();
    }
}

#[test]
fn certificates_are_checked_and_deterministic() {
    let a = run(&r_m(3), Mode::Truncated);
    let b = run(&r_m(3), Mode::Truncated);
    assert_eq!(a.certificate, b.certificate);
    assert_eq!(a.counts, b.counts);
    let cert = a.certificate.clone().unwrap();
    let p = build_program(&r_m(3), 1, Mode::Truncated, DEFAULT_BUDGET).unwrap();
    check_certificate(&p, &cert, a.value.exact().unwrap()).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&a.certificate_json().unwrap()).unwrap();
    assert_eq!(doc["value"], "1");
    assert_eq!(doc["mode"], "truncated");
    assert_eq!(doc["fragments"].as_array().unwrap().len(), cert.len());
    assert_eq!(a.variables as u64, a.counts.total());
}

#[test]
fn powers_and_conjugates_use_the_root() {
    let res = run(&w("cabABabABC"), Mode::Truncated);
    assert_eq!((res.root.to_string(), res.power), ("abAB".into(), 2));
}

#[test]
fn input_errors() {
    let opts = LallopOptions::default();
    assert_eq!(lallop(&w(""), &opts).unwrap_err(), LallopError::EmptyWord);
    assert!(matches!(lallop(&w("ab"), &opts), Err(LallopError::NotInCommutatorSubgroup(_))));
    let tight = LallopOptions { budget: 10, ..opts };
    let err = lallop(&r_m(2), &tight).unwrap_err();
    assert!(matches!(err, LallopError::ResourceLimit { budget: 10, .. }));
    assert_eq!(err.name(), "ResourceLimit");
    assert!(matches!(
        build_program(&w("abABabAB"), 1, Mode::Full, DEFAULT_BUDGET),
        Err(LallopError::NotRootFree(_))
    ));
}

#[test]
fn the_budget_estimate_covers_the_basis() {
    for x in [w("abAB"), r_m(2), r_m(3), w("abABcdCD")] {
        let p = build_program(&x, 1, Mode::Full, DEFAULT_BUDGET).unwrap();
        let needed = match build_program(&x, 1, Mode::Full, 0) {
            Err(LallopError::ResourceLimit { needed, .. }) => needed,
            other => panic!("{other:?}"),
        };
        assert!(p.counts.total() <= needed);
    }
}
