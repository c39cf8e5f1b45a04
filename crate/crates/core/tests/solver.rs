mod common;

use reachxfer::hjsolver::{check_invariants, solve, uniform_stamps};
use reachxfer::systems::{box_level, solve_planar, terminal_and_obstacle};
use reachxfer::trajectory::{follow_costate, interpolate_value};
use reachxfer::{Axis, GridSpec, HamiltonianSystem, SolverSettings};

/// `x' = u`, `|u| <= 1`.
struct SingleIntegrator;

impl HamiltonianSystem for SingleIntegrator {
    fn hamiltonian(&self, _x: &[f64], p: &[f64]) -> f64 {
        p[0].abs()
    }
    fn dissipation(&self, _grid: &GridSpec) -> reachxfer::Result<Vec<f64>> {
        Ok(vec![1.0])
    }
}

fn small_planar(confine: bool) -> (GridSpec, Vec<f64>, Vec<f64>, reachxfer::ValueField) {
    let s = common::scenario("castalia_coarse.toml");
    let axes: Vec<Axis> = s.grid.axes().iter().zip([9, 7, 7, 7]).map(|(a, count)| Axis { count, ..*a }).collect();
    let grid = GridSpec::new(axes).unwrap();
    let (k, c) = (s.constraints(), s.target_set());
    let settings = SolverSettings { confine, ..s.solver };
    let stamps = uniform_stamps(s.normalization.time_from_si(600.0), 4);
    let field = solve_planar(&s.model(), &grid, &k, &c, &stamps, settings, |_, _| {}).unwrap();
    let (terminal, obstacle) = terminal_and_obstacle(&grid, &k, &c, confine);
    (grid, terminal, obstacle, field)
}

#[test]
fn planar_solves_keep_invariants_and_are_deterministic() {
    for confine in [false, true] {
        let (_, terminal, obstacle, a) = small_planar(confine);
        check_invariants(&a, &terminal, &obstacle).unwrap();
        let (_, _, _, b) = small_planar(confine);
        let bits = |f: &reachxfer::ValueField| f.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}

#[test]
fn confined_values_stay_above_the_box_level() {
    let (grid, _, obstacle, field) = small_planar(true);
    for i in 0..grid.len() {
        let level = box_level(&grid, &grid.node_vec(i));
        assert!(level <= 1e-12 && obstacle[i] >= level);
        for k in 0..field.stamps().len() {
            assert!(field.slice(k)[i] as f64 >= level - 1e-6);
        }
    }
}

#[test]
fn single_integrator_matches_closed_form_and_steers_into_target() {
    let g = GridSpec::new(vec![Axis::new(-1.0, 1.0, 201)]).unwrap();
    let dx = g.spacing(0);
    let terminal = g.sample(|x| x[0].abs() - 0.1);
    let obstacle = vec![-1.0; g.len()];
    let stamps = [0.0, 0.2, 0.4, 0.6];
    let field = solve(&SingleIntegrator, &g, &terminal, &obstacle, &stamps, SolverSettings::default()).unwrap();
    check_invariants(&field, &terminal, &obstacle).unwrap();
    for (k, &t) in stamps.iter().enumerate() {
        for (i, v) in field.slice(k).iter().enumerate() {
            let x = g.axis(0).coord(i);
            let exact = (x.abs() - t).max(0.0) - 0.1;
            assert!((*v as f64 - exact).abs() <= 2.0 * dx, "t {t} x {x}: {v} vs {exact}");
        }
    }
    for x0 in [-0.65, 0.3, 0.62] {
        assert!(interpolate_value(&field, &[x0], 0.6).unwrap() <= 2.0 * dx);
        let path = follow_costate(&field, &[x0], 0.6, 120, |x, q, h| vec![x[0] - h * q[0].signum()]).unwrap();
        let end = path.last().unwrap()[0];
        assert!(end.abs() <= 0.1 + 2.0 * dx, "from {x0} ended at {end}");
    }
}
