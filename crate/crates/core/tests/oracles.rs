//! Oracle comparisons: closed forms, the RK4 reference integrator and the
//! exact linear solution.

use std::f64::consts::PI;

use chic::config::InitialPreset;
use chic::dynamics::{integrate, linear_mode_solution, linear_solution, step_oracle, SchemeConfig};
use chic::equilibrium::{equilibrium_from_data, hessian_spectrum, solve_steady, SteadyOptions};
use chic::functionals::{state_norm, StateNorm};
use chic::model::{strong_residual, InitialData, Parameters, Potential, State, StateRates};
use chic::spectral::Grid;

fn smooth(grid: &Grid, seed: u64) -> InitialData {
    InitialPreset::Random {
        seed,
        amplitude: 0.3 * (1.0 + PI * PI).powi(3),
        smoothness: 3.0,
        mean: 0.1,
        theta_mean: 0.05,
        chi1_mean: 0.1,
    }
    .build(grid)
    .unwrap()
}

fn rk4_to(grid: &Grid, s0: &State, t: f64, dt: f64, p: &Parameters) -> State {
    let steps = (t / dt).round() as usize;
    let mut s = s0.clone();
    for _ in 0..steps {
        s = step_oracle(grid, &s, dt, p).unwrap();
    }
    s
}

fn imex_to(grid: &Grid, init: &InitialData, t: f64, dt: f64, p: &Parameters) -> State {
    let scheme = SchemeConfig::new(dt, t, p).with_stride(usize::MAX);
    integrate(grid, init, &scheme, p, &mut []).unwrap().last().clone()
}

#[test]
fn imex_converges_to_rk4_reference_at_first_order() {
    let grid = Grid::new(1, 8).unwrap();
    for sigma in [0.0, 0.5] {
        let p = Parameters::new(1.0, 1.0, sigma, Potential::quartic(1.0), true).unwrap();
        let init = smooth(&grid, 11);
        let reference = rk4_to(&grid, &init.to_state(&grid, &p), 0.5, 2.5e-4, &p);
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| state_norm(&grid, &imex_to(&grid, &init, 0.5, dt, &p).sub(&reference), sigma, StateNorm::Hsigma))
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((0.8..1.3).contains(&order), "sigma {sigma}: errors {errs:?}");
        }
    }
}

#[test]
fn rk4_matches_exact_linear_solution() {
    let grid = Grid::new(1, 8).unwrap();
    let p = Parameters::new(1.0, 0.7, 0.3, Potential::linear_test(2.0), true).unwrap();
    let s0 = smooth(&grid, 3).to_state(&grid, &p);
    let exact = linear_solution(&grid, &p, &s0, 0.4).unwrap();
    let rk = rk4_to(&grid, &s0, 0.4, 1e-4, &p);
    assert!(state_norm(&grid, &rk.sub(&exact), p.sigma, StateNorm::Hsigma) < 1e-9);
}

#[test]
fn linear_solution_agrees_with_mode_solution() {
    let grid = Grid::new(1, 8).unwrap();
    let p = Parameters::new(1.0, 0.5, 0.0, Potential::linear_test(1.0), true).unwrap();
    let s0 = smooth(&grid, 9).to_state(&grid, &p);
    let full = linear_solution(&grid, &p, &s0, 0.7).unwrap();
    // Mode 3 with the Fourier law: (theta, chi, chi_t).
    let y = linear_mode_solution(&grid, &p, 3, &[s0.theta.values[3], s0.chi.values[3], s0.chi_t.values[3]], 0.7).unwrap();
    for (a, b) in y.iter().zip([full.theta.values[3], full.chi.values[3], full.chi_t.values[3]]) {
        assert!((a - b).abs() < 1e-12, "{y:?}");
    }
}

/// Strong residual of IMEX steps, with forward-difference rates, shrinks like dt.
#[test]
fn strong_residual_shrinks_with_dt() {
    let grid = Grid::new(1, 16).unwrap();
    let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
    let init = smooth(&grid, 5);
    let res: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let scheme = SchemeConfig::new(dt, 0.2, &p);
            let traj = integrate(&grid, &init, &scheme, &p, &mut []).unwrap();
            let n = traj.states.len();
            let (a, b) = (&traj.states[n - 2], &traj.states[n - 1]);
            let rates = StateRates::finite_difference(a, b, dt);
            strong_residual(&grid, b, &rates, &p).unwrap().max()
        })
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.5).contains(&ratio), "residuals {res:?}");
    }
}

#[test]
fn spectrum_and_equilibria_closed_forms() {
    let grid = Grid::new(2, 8).unwrap();
    for a in [1.0, 15.0] {
        let ev = hessian_spectrum(&grid, &grid.zeros(), &Potential::quartic(a), 0.0, 3).unwrap();
        // pi^2 |k|^2 - a with |k|^2 = 1, 1, 2.
        for (got, want) in ev.iter().zip([PI * PI - a, PI * PI - a, 2.0 * PI * PI - a]) {
            assert!((got - want).abs() < 1e-9, "{ev:?}");
        }
    }
    let g1 = Grid::new(1, 32).unwrap();
    let mut guess = g1.zeros();
    guess.values[1] = 0.5;
    let sol = solve_steady(&g1, &Potential::quartic(15.0), 0.0, &guess, &SteadyOptions::default()).unwrap();
    assert!(sol.residual <= 1e-12);
    assert!(sol.hessian_min_eig > 0.0);
    assert!(sol.v_inf().max_abs() > 0.1);
    assert!(sol.chi_inf.values[0].abs() <= 1e-14);

    let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
    let init = InitialData::new(g1.constant(0.3), g1.zero_flux(), g1.constant(0.4), g1.constant(0.1));
    let (theta, m) = equilibrium_from_data(&init, &p);
    assert!((theta - 0.2).abs() < 1e-15 && (m - 0.5).abs() < 1e-15);
}
