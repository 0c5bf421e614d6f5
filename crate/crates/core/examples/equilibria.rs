//! Steady states of the quartic model: the constant branch, a nontrivial
//! branch found from a single-mode guess, their energies and the low end of
//! the Hessian spectrum at each.

use chic::equilibrium::{hessian_spectrum, solve_steady, SteadyOptions};
use chic::model::Potential;
use chic::spectral::Grid;

fn main() -> chic::Result<()> {
    let grid = Grid::new(1, 128)?;
    let opts = SteadyOptions::default();
    for a in [1.0, 5.0, 15.0, 40.0] {
        let pot = Potential::quartic(a);
        let mut guess = grid.zeros();
        guess.values[1] = 0.5;
        println!("a = {a}");
        for (label, g) in [("constant", grid.zeros()), ("mode 1", guess)] {
            let sol = solve_steady(&grid, &pot, 0.0, &g, &opts)?;
            let spectrum = hessian_spectrum(&grid, &sol.v_inf(), &pot, 0.0, 3)?;
            let amp = grid.to_nodal(&sol.chi_inf)?.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            println!(
                "  {label:<9} max|chi| {amp:.6}  E {:>12.6e}  residual {:.1e}  newton {:>2}  flow {:>5}  spectrum {:?}",
                sol.energy,
                sol.residual,
                sol.newton_iterations,
                sol.flow_steps,
                spectrum.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}
