mod common;

use common::{lp_vertex_oracle, random_lp, OracleLp};
use nemoloc::evolution::rng_from_seed;
use nemoloc::numerics::{lp_solve, nm_maximize, LpStatus, SimplexSearchConfig};
use proptest::prelude::*;

#[test]
fn lp_solve_matches_vertex_enumeration() {
    let mut rng = rng_from_seed(99);
    for i in 0..500 {
        let lp = random_lp(&mut rng);
        let got = lp_solve(&lp);
        match lp_vertex_oracle(&lp) {
            OracleLp::Optimal(v) => {
                assert_eq!(got.status, LpStatus::Optimal, "program {i}: {lp:?}");
                assert!((got.value - v).abs() <= 1e-8 * (1.0 + v.abs()), "program {i}: {} vs {v}", got.value);
                assert!(lp.max_violation(&got.point) <= 1e-9 * (1.0 + v.abs()), "program {i}");
            }
            OracleLp::Infeasible => assert_eq!(got.status, LpStatus::Infeasible, "program {i}: {lp:?}"),
            OracleLp::Unbounded => assert_eq!(got.status, LpStatus::Unbounded, "program {i}: {lp:?}"),
        }
    }
}

#[test]
fn lp_solve_is_pure() {
    let mut rng = rng_from_seed(5);
    for _ in 0..50 {
        let lp = random_lp(&mut rng);
        assert_eq!(format!("{:?}", lp_solve(&lp)), format!("{:?}", lp_solve(&lp)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nelder_mead_stays_in_the_box(
        center in prop::collection::vec(-3.0f64..3.0, 1..5),
        seed in any::<u64>(),
    ) {
        let n = center.len();
        let bounds = vec![(-1.0, 1.0); n];
        let cfg = SimplexSearchConfig { max_evals: 400, restarts: 2, seed, ..SimplexSearchConfig::default() };
        let f = |x: &[f64]| -x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>();
        let (x, v) = nm_maximize(f, &vec![0.0; n], &bounds, &cfg);
        prop_assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
        prop_assert!((v - f(&x)).abs() < 1e-12);
        let again = nm_maximize(f, &vec![0.0; n], &bounds, &cfg);
        prop_assert_eq!(x, again.0);
    }
}
