//! The floating-point path against the exact solver on mid-sized programs.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratlp::rational::int;
use ratlp::{solve_exact, solve_float, LinearProgram, Relation, Sense, Status, Verification};

/// 50 rows, 80 columns, feasible by construction and bounded by a budget row.
fn random_feasible(rng: &mut ChaCha8Rng) -> LinearProgram {
    let (m, n) = (50, 80);
    let x0: Vec<i64> = (0..n).map(|_| if rng.random_bool(0.5) { rng.random_range(0..=4) } else { 0 }).collect();
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::with_vars(sense, n);
    lp.set_objective((0..n).map(|j| (j, int(rng.random_range(-9..=9)))));
    for _ in 0..m {
        let mut row: Vec<(usize, i64)> = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.15) {
                let v = rng.random_range(-5..=5);
                if v != 0 {
                    row.push((j, v));
                }
            }
        }
        let ax: i64 = row.iter().map(|(j, v)| v * x0[*j]).sum();
        let (rel, rhs) = match rng.random_range(0..4) {
            0 => (Relation::Eq, ax),
            1 | 2 => (Relation::Le, ax + rng.random_range(0..=3)),
            _ => (Relation::Ge, ax - rng.random_range(0..=3)),
        };
        lp.add_constraint(row.into_iter().map(|(j, v)| (j, int(v))), rel, int(rhs));
    }
    let total: i64 = x0.iter().sum();
    lp.add_constraint((0..n).map(|j| (j, int(1))), Relation::Le, int(total + 20));
    lp
}

#[test]
fn float_agrees_with_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut verified = 0;
    for case in 0..50 {
        let lp = random_feasible(&mut rng);
        let exact = solve_exact(&lp);
        assert_eq!(exact.status, Status::Optimal, "case {case}");
        let e = exact.value.as_ref().unwrap().to_f64().unwrap();
        let f = solve_float(&lp, 1e-9).unwrap();
        assert_eq!(f.status, Status::Optimal, "case {case}");
        let v = f.value.unwrap();
        assert!((v - e).abs() <= 1e-6 * (1.0 + e.abs()), "case {case}: float {v}, exact {e}");
        assert!(f.residual <= 1e-9, "case {case}: residual {}", f.residual);
        if let Verification::Verified(sol) = f.verify(&lp) {
            assert_eq!(sol.value, exact.value, "case {case}");
            verified += 1;
        }
    }
    assert!(verified >= 40, "only {verified} float bases verified exactly");
}
