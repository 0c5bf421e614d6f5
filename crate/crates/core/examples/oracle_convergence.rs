//! First-order convergence of the IMEX step against the exact matrix
//! exponential solution of the linear test model.

use chic::config::InitialPreset;
use chic::dynamics::{integrate, linear_solution, SchemeConfig};
use chic::functionals::{state_norm, StateNorm};
use chic::model::{Parameters, Potential};
use chic::spectral::Grid;

fn main() -> chic::Result<()> {
    let grid = Grid::new(1, 16)?;
    let params = Parameters::new(1.0, 1.0, 0.5, Potential::linear_test(1.0), true)?;
    let init = InitialPreset::Random {
        seed: 5,
        amplitude: 0.5 * (1.0 + std::f64::consts::PI.powi(2)).powi(3),
        smoothness: 3.0,
        mean: 0.1,
        theta_mean: 0.2,
        chi1_mean: 0.3,
    }
    .build(&grid)?;
    let s0 = init.to_state(&grid, &params);
    let mut prev: Option<f64> = None;
    println!("{:>10} {:>14} {:>8}", "dt", "max error", "order");
    for dt in [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3] {
        let scheme = SchemeConfig::new(dt, 1.0, &params);
        let traj = integrate(&grid, &init, &scheme, &params, &mut [])?;
        let mut err = 0.0_f64;
        for s in &traj.states {
            let exact = linear_solution(&grid, &params, &s0, s.time)?;
            err = err.max(state_norm(&grid, &s.sub(&exact), params.sigma, StateNorm::Hsigma));
        }
        let order = prev.map(|p| (p / err).log2());
        println!(
            "{dt:>10.1e} {err:>14.6e} {:>8}",
            order.map_or("-".to_string(), |o| format!("{o:.3}"))
        );
        prev = Some(err);
    }
    Ok(())
}
