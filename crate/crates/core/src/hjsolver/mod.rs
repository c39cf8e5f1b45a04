//! Time marching of the obstacle problem `max{g - w, w_t + H(x, grad w)} = 0`
//! forward in the horizon variable.

mod field;
pub mod weno;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use field::ValueField;
pub use weno::WenoVariant;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use weno::{gather_stencil, weno5_pair};

/// A Hamiltonian `H(x, p)` together with bounds `alpha_k >= |dH/dp_k|` over a grid.
pub trait HamiltonianSystem: Sync {
    fn hamiltonian(&self, x: &[f64], p: &[f64]) -> f64;

    /// Global Lax-Friedrichs coefficients, one per grid dimension.
    fn dissipation(&self, grid: &GridSpec) -> Result<Vec<f64>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub cfl: f64,
    /// Step used when every dissipation coefficient vanishes, and upper cap otherwise.
    pub max_dt: f64,
    pub weno: WenoVariant,
    /// Treat the planar grid box as a state constraint (see `systems`).
    #[serde(default)]
    pub confine: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            max_dt: 0.05,
            weno: WenoVariant::Z,
            confine: false,
        }
    }
}

/// `cfl / sum_k(alpha_k / dx_k)`, or `max_dt` when all `alpha_k` vanish.
pub fn cfl_timestep(grid: &GridSpec, alpha: &[f64], cfl: f64, max_dt: f64) -> f64 {
    let rate: f64 = alpha.iter().zip(grid.spacings()).map(|(a, dx)| a / dx).sum();
    if rate > 0.0 {
        cfl / rate
    } else {
        max_dt
    }
}

/// Uniform horizon stamps `0, t_max / (n - 1), ..., t_max`.
pub fn uniform_stamps(t_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..count).map(|i| t_max * i as f64 / (count - 1) as f64).collect(),
    }
}

pub struct Solver<'a, S: HamiltonianSystem> {
    system: &'a S,
    grid: GridSpec,
    obstacle: Vec<f64>,
    alpha: Vec<f64>,
    settings: SolverSettings,
}

impl<'a, S: HamiltonianSystem> Solver<'a, S> {
    pub fn new(system: &'a S, grid: GridSpec, obstacle: Vec<f64>, settings: SolverSettings) -> Result<Self> {
        let alpha = system.dissipation(&grid)?;
        Self::with_dissipation(system, grid, obstacle, alpha, settings)
    }

    pub fn with_dissipation(
        system: &'a S,
        grid: GridSpec,
        obstacle: Vec<f64>,
        alpha: Vec<f64>,
        settings: SolverSettings,
    ) -> Result<Self> {
        if obstacle.len() != grid.len() {
            return Err(Error::Config(format!(
                "obstacle has {} values for a grid of {}",
                obstacle.len(),
                grid.len()
            )));
        }
        if alpha.len() != grid.dim() || alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::domain("dissipation coefficients must be finite, non-negative, one per dimension"));
        }
        if !(settings.cfl > 0.0) || !(settings.max_dt > 0.0) {
            return Err(Error::Config("cfl and max_dt must be positive".into()));
        }
        Ok(Self {
            system,
            grid,
            obstacle,
            alpha,
            settings,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dissipation(&self) -> &[f64] {
        &self.alpha
    }

    pub fn obstacle(&self) -> &[f64] {
        &self.obstacle
    }

    pub fn cfl_timestep(&self) -> f64 {
        cfl_timestep(&self.grid, &self.alpha, self.settings.cfl, self.settings.max_dt).min(self.settings.max_dt)
    }

    /// `-H_LF(x, p-, p+)` at every node.
    pub fn rhs(&self, slice: &[f64], out: &mut [f64]) {
        let grid = &self.grid;
        let d = grid.dim();
        let strides = grid.strides();
        let spacings = grid.spacings();
        let variant = self.settings.weno;
        out.par_iter_mut().enumerate().for_each_init(
            || (vec![0usize; d], vec![0.0; d], vec![0.0; d], [0.0f64; 7]),
            |(idx, x, p, st), (flat, slot)| {
                grid.unravel(flat, idx);
                let mut diss = 0.0;
                for k in 0..d {
                    let axis = grid.axis(k);
                    x[k] = axis.coord(idx[k]);
                    gather_stencil(slice, flat, idx[k], axis.count, strides[k], axis.periodic, st);
                    let (minus, plus) = weno5_pair(st, spacings[k], variant);
                    p[k] = 0.5 * (minus + plus);
                    diss += 0.5 * self.alpha[k] * (plus - minus);
                }
                *slot = -(self.system.hamiltonian(x, p) - diss);
            },
        );
    }

    /// One TVD-RK3 step of size `dt` followed by the obstacle projection.
    pub fn step(&self, slice: &[f64], dt: f64) -> Result<Vec<f64>> {
        let bound = cfl_timestep(&self.grid, &self.alpha, self.settings.cfl, f64::INFINITY);
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, bound });
        }
        // Shu-Osher stages written as increments so that a zero right-hand
        // side leaves the slice bit-identical.
        let n = slice.len();
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        let mut l3 = vec![0.0; n];
        self.rhs(slice, &mut l1);
        let u1: Vec<f64> = slice.par_iter().zip(&l1).map(|(u, a)| u + dt * a).collect();
        self.rhs(&u1, &mut l2);
        let u2: Vec<f64> = slice
            .par_iter()
            .zip(&l1)
            .zip(&l2)
            .map(|((u, a), b)| u + 0.25 * dt * (a + b))
            .collect();
        self.rhs(&u2, &mut l3);
        let out = slice
            .par_iter()
            .zip(&l1)
            .zip(&l2)
            .zip(&l3)
            .zip(&self.obstacle)
            .map(|((((u, a), b), c), g)| {
                let v = u + dt * ((a + b) / 6.0 + 2.0 / 3.0 * c);
                // f64::max would hide a NaN behind the obstacle.
                if v.is_nan() {
                    v
                } else {
                    v.max(*g)
                }
            })
            .collect();
        Ok(out)
    }

    /// Marches `terminal` through the horizon `stamps` (the first must be 0).
    pub fn march(&self, terminal: &[f64], stamps: &[f64]) -> Result<ValueField> {
        self.march_with(terminal, stamps, |_, _| {})
    }

    /// As [`Self::march`], calling `progress(k, stamp)` after each stored slice.
    pub fn march_with(&self, terminal: &[f64], stamps: &[f64], mut progress: impl FnMut(usize, f64)) -> Result<ValueField> {
        if terminal.len() != self.grid.len() {
            return Err(Error::Config("terminal slice does not match the grid".into()));
        }
        if let Some(&first) = stamps.first() {
            if first != 0.0 {
                return Err(Error::Config("the first horizon stamp must be 0".into()));
            }
        }
        let mut field = ValueField::with_capacity(self.grid.clone(), stamps.len());
        if stamps.is_empty() {
            return Ok(field);
        }
        check_finite(terminal, 0.0)?;
        let mut current = terminal.to_vec();
        field.push(0.0, &current);
        progress(0, 0.0);
        let dt_max = self.cfl_timestep();
        for (k, w) in stamps.windows(2).enumerate() {
            let interval = w[1] - w[0];
            if !(interval > 0.0) {
                return Err(Error::Config("horizon stamps must be strictly increasing".into()));
            }
            let substeps = (interval / dt_max).ceil().max(1.0) as usize;
            let dt = interval / substeps as f64;
            for s in 0..substeps {
                current = self.step(&current, dt)?;
                check_finite(&current, w[0] + (s + 1) as f64 * dt)?;
            }
            field.push(w[1], &current);
            progress(k + 1, w[1]);
        }
        Ok(field)
    }
}

fn check_finite(slice: &[f64], time: f64) -> Result<()> {
    match slice.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::NonFinite { time, node }),
        None => Ok(()),
    }
}

/// Structural checks of a stored solution: the first slice equals `terminal`
/// (after single-precision storage), every slice lies on or above `obstacle`,
/// and every value is finite. Returns a description of the first violation.
pub fn check_invariants(field: &ValueField, terminal: &[f64], obstacle: &[f64]) -> std::result::Result<(), String> {
    let n = field.grid().len();
    if terminal.len() != n || obstacle.len() != n {
        return Err("terminal or obstacle does not match the grid".into());
    }
    for (k, &t) in field.stamps().iter().enumerate() {
        let slice = field.slice(k);
        for i in 0..n {
            let v = slice[i];
            if !v.is_finite() {
                return Err(format!("non-finite value at stamp {t}, node {i}"));
            }
            if v < obstacle[i] as f32 {
                return Err(format!("value {v} below obstacle {} at stamp {t}, node {i}", obstacle[i]));
            }
            if k == 0 && v != terminal[i] as f32 {
                return Err(format!("terminal slice {v} differs from {} at node {i}", terminal[i]));
            }
        }
    }
    Ok(())
}

/// Solves the obstacle problem with terminal slice `terminal` (normally
/// `max(nu, g)`) and obstacle `g`, storing the requested horizon stamps.
pub fn solve<S: HamiltonianSystem>(
    system: &S,
    grid: &GridSpec,
    terminal: &[f64],
    obstacle: &[f64],
    stamps: &[f64],
    settings: SolverSettings,
) -> Result<ValueField> {
    Solver::new(system, grid.clone(), obstacle.to_vec(), settings)?.march(terminal, stamps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    /// `x' = u`, `|u| <= 1`.
    struct SingleIntegrator;

    impl HamiltonianSystem for SingleIntegrator {
        fn hamiltonian(&self, _x: &[f64], p: &[f64]) -> f64 {
            p[0].abs()
        }
        fn dissipation(&self, _grid: &GridSpec) -> Result<Vec<f64>> {
            Ok(vec![1.0])
        }
    }

    /// `H = 0`.
    struct Frozen;

    impl HamiltonianSystem for Frozen {
        fn hamiltonian(&self, _x: &[f64], _p: &[f64]) -> f64 {
            0.0
        }
        fn dissipation(&self, grid: &GridSpec) -> Result<Vec<f64>> {
            Ok(vec![0.0; grid.dim()])
        }
    }

    /// Constant `H = 1`, so values fall at unit rate.
    struct Sink;

    impl HamiltonianSystem for Sink {
        fn hamiltonian(&self, _x: &[f64], _p: &[f64]) -> f64 {
            1.0
        }
        fn dissipation(&self, grid: &GridSpec) -> Result<Vec<f64>> {
            Ok(vec![0.0; grid.dim()])
        }
    }

    /// Advection `w_t - c w_x = 0`, i.e. `H = -c p`.
    struct Advection(f64);

    impl HamiltonianSystem for Advection {
        fn hamiltonian(&self, _x: &[f64], p: &[f64]) -> f64 {
            -self.0 * p[0]
        }
        fn dissipation(&self, _grid: &GridSpec) -> Result<Vec<f64>> {
            Ok(vec![self.0.abs()])
        }
    }

    fn line(n: usize, lo: f64, hi: f64) -> GridSpec {
        GridSpec::new(vec![Axis::new(lo, hi, n)]).unwrap()
    }

    #[test]
    fn cfl_formula() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 11)]).unwrap();
        assert!((cfl_timestep(&g, &[1.0], 0.5, 1.0) - 0.05).abs() < 1e-15);
        let g2 = GridSpec::new(vec![Axis::new(0.0, 1.0, 11), Axis::new(0.0, 2.0, 21)]).unwrap();
        let a = cfl_timestep(&g2, &[0.3, 1.7], 0.5, 1.0);
        let b = cfl_timestep(&g2, &[0.6, 3.4], 0.5, 1.0);
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert_eq!(cfl_timestep(&g2, &[0.0, 0.0], 0.5, 0.125), 0.125);
    }

    #[test]
    fn refuses_cfl_violation() {
        let g = line(21, -1.0, 1.0);
        let obstacle = vec![-10.0; 21];
        let s = Solver::new(&SingleIntegrator, g.clone(), obstacle, SolverSettings::default()).unwrap();
        let slice = g.sample(|x| x[0].abs());
        let dt = s.cfl_timestep();
        assert!(s.step(&slice, dt).is_ok());
        assert!(matches!(s.step(&slice, 2.0 * dt), Err(Error::Cfl { .. })));
    }

    #[test]
    fn zero_hamiltonian_is_stationary() {
        let g = line(15, 0.0, 1.0);
        let f = g.sample(|x| (3.0 * x[0]).sin());
        let s = Solver::new(&Frozen, g, vec![-5.0; 15], SolverSettings::default()).unwrap();
        let next = s.step(&f, 0.05).unwrap();
        assert_eq!(next, f);
    }

    #[test]
    fn obstacle_holds_the_floor() {
        let g = line(15, 0.0, 1.0);
        let obstacle = g.sample(|x| x[0] - 0.5);
        let s = Solver::new(&Sink, g, obstacle.clone(), SolverSettings::default()).unwrap();
        let next = s.step(&obstacle, 0.05).unwrap();
        assert_eq!(next, obstacle);
    }

    #[test]
    fn advection_translates_profile() {
        let c = 0.5;
        let n = 201;
        let g = line(n, -2.0, 2.0);
        let profile = |x: f64| (-4.0 * x * x).exp();
        let init = g.sample(|x| profile(x[0]));
        let system = Advection(c);
        let s = Solver::new(&system, g.clone(), vec![-1e9; n], SolverSettings::default()).unwrap();
        let field = s.march(&init, &[0.0, 1.0]).unwrap();
        let dx = g.spacing(0);
        let end = field.slice_f64(1);
        for i in 0..n {
            let x = g.axis(0).coord(i);
            // w_t = c w_x: w(x, t) = w0(x + c t).
            assert!((end[i] - profile(x + c)).abs() <= 2.0 * dx);
        }
    }

    fn single_integrator_error(n: usize) -> (f64, f64) {
        let g = line(n, -1.0, 1.0);
        let terminal = g.sample(|x| x[0].abs() - 0.1);
        let field = solve(&SingleIntegrator, &g, &terminal, &vec![-1.0; n], &[0.0, 0.25, 0.5], SolverSettings::default()).unwrap();
        let mut worst: f64 = 0.0;
        for (k, &t) in field.stamps().iter().enumerate() {
            for (i, v) in field.slice(k).iter().enumerate() {
                let x = g.axis(0).coord(i);
                let exact = (x.abs() - t).max(0.0) - 0.1;
                worst = worst.max((*v as f64 - exact).abs());
            }
        }
        (worst, g.spacing(0))
    }

    #[test]
    fn single_integrator_matches_closed_form() {
        let (e1, dx) = single_integrator_error(401);
        assert!(e1 <= 2.0 * dx, "{e1} > {}", 2.0 * dx);
        let (e2, dx2) = single_integrator_error(801);
        assert!(e2 <= 2.0 * dx2 && e2 < e1, "{e1} -> {e2}");
    }

    #[test]
    fn stamps_zero_only_returns_terminal() {
        let g = line(11, -1.0, 1.0);
        let terminal = g.sample(|x| x[0].abs() - 0.1);
        let field = solve(&SingleIntegrator, &g, &terminal, &vec![-1.0; 11], &[0.0], SolverSettings::default()).unwrap();
        assert_eq!(field.stamps(), &[0.0]);
        assert_eq!(field.slice_f64(0), terminal.iter().map(|v| *v as f32 as f64).collect::<Vec<_>>());
    }

    #[test]
    fn non_finite_aborts_with_time() {
        struct Explode;
        impl HamiltonianSystem for Explode {
            fn hamiltonian(&self, x: &[f64], _p: &[f64]) -> f64 {
                if x[0] > 0.5 {
                    f64::NAN
                } else {
                    0.0
                }
            }
            fn dissipation(&self, g: &GridSpec) -> Result<Vec<f64>> {
                Ok(vec![0.0; g.dim()])
            }
        }
        let g = line(11, 0.0, 1.0);
        let err = solve(&Explode, &g, &vec![0.0; 11], &vec![-1.0; 11], &[0.0, 0.1], SolverSettings::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }
}
