//! Empirical Lojasiewicz exponents. A nondegenerate equilibrium gives
//! `rho = 1/2`. At `a = pi^2` the constant state loses strict convexity along
//! the first mode: random directions still see `1/2`, but sampling along the
//! Hessian null mode, where the energy is quartic and the gradient cubic,
//! exposes `rho = 1/4` and with it algebraic convergence rates.

use std::f64::consts::PI;

use chic::equilibrium::{hessian_modes, loja_fit, solve_steady, LojaDirections, LojaOptions, SteadyOptions};
use chic::fit::{exponent_from_rho, SeriesTag};
use chic::model::Potential;
use chic::spectral::Grid;

fn main() -> chic::Result<()> {
    let grid = Grid::new(1, 32)?;
    let cases = [
        ("nontrivial, a = 15", 15.0, 0.5),
        ("constant, a = 1", 1.0, 0.0),
        ("constant, a = pi^2", PI * PI, 0.0),
    ];
    for (label, a, amp) in cases {
        let pot = Potential::quartic(a);
        let mut guess = grid.zeros();
        guess.values[1] = amp;
        let sol = solve_steady(&grid, &pot, 0.0, &guess, &SteadyOptions::default())?;
        let mut sets = vec![("random", LojaOptions::default())];
        if sol.is_degenerate() {
            let soft = hessian_modes(&grid, &sol.v_inf(), &pot, 0.0, sol.null_dim)?;
            sets.push((
                "null modes",
                LojaOptions {
                    directions: LojaDirections::Given(soft.into_iter().map(|(_, z)| z).collect()),
                    ..Default::default()
                },
            ));
        }
        for (dirs, opts) in sets {
            let fit = loja_fit(&grid, &pot, &sol, &opts)?;
            let rate = if fit.regime == "algebraic" {
                format!("V* decay ~ t^-{:.3}", exponent_from_rho(fit.rho, SeriesTag::DualNorm))
            } else {
                "exponential decay".to_string()
            };
            println!(
                "{label:<20} {dirs:<10} null dim {}  rho {:.4}  R^2 {:.4}  eta {:.3}  {rate}",
                sol.null_dim, fit.rho, fit.r_squared, fit.eta
            );
        }
    }
    Ok(())
}
