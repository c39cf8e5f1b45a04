mod common;

use proptest::prelude::*;
use reachxfer::pareto::{dominates, feasible, mayer_front, nondominated_filter};
use reachxfer::Reconstructor;

fn oracle(points: &[Vec<f64>], weak: bool) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..points.len())
        .filter(|&i| points.iter().all(|p| !dominates(p, &points[i], weak)))
        .collect();
    keep.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    keep
}

proptest! {
    #[test]
    fn filter_matches_quadratic_oracle(
        // Small integer lattice so ties are common.
        raw in prop::collection::vec(prop::collection::vec(0u8..6, 2), 0..40),
        weak in prop::bool::ANY,
    ) {
        let points: Vec<Vec<f64>> = raw.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        prop_assert_eq!(nondominated_filter(&points, weak), oracle(&points, weak));
    }

    #[test]
    fn filter_matches_oracle_in_three_objectives(
        raw in prop::collection::vec(prop::collection::vec(0u8..5, 3), 0..30),
        weak in prop::bool::ANY,
    ) {
        let points: Vec<Vec<f64>> = raw.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        prop_assert_eq!(nondominated_filter(&points, weak), oracle(&points, weak));
    }
}

#[test]
fn coarse_mayer_front_is_feasible_and_flies() {
    let (s, field) = common::coarse();
    let model = s.model();
    let (k, c) = (s.constraints(), s.target_set());
    let spacing = field.grid().spacings();
    let front = mayer_front(field, s.initial_orbit(), s.mayer_scan()).unwrap();
    assert!(!front.front.is_empty());
    let objectives: Vec<Vec<f64>> = front.candidates.iter().map(|p| p.objectives.to_vec()).collect();
    let expected: Vec<[f64; 2]> = oracle(&objectives, front.scan.weak_dominance)
        .into_iter()
        .map(|i| front.candidates[i].objectives)
        .collect();
    let got: Vec<[f64; 2]> = front.front.iter().map(|p| p.objectives).collect();
    assert_eq!(got, expected);
    // Less time always costs more propellant along the front.
    for w in front.front.windows(2) {
        assert!(w[0].objectives[0] <= w[1].objectives[0] && w[0].objectives[1] >= w[1].objectives[1]);
    }
    let r = Reconstructor::mayer(field, &model, &k, &c);
    let opts = s.reconstruct_options();
    for p in &front.front {
        let (ok, value) = feasible(field, &p.start, p.tf).unwrap();
        assert!(ok && value <= 0.0);
        let t = r.reconstruct(p.start, &[], p.tf, &opts);
        assert!(common::reconstruction_succeeds(&t, &k, &c, &spacing), "t_f {}: {:?}", p.tf, t.err());
    }
}
