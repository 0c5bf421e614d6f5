//! Split a two-dimensional trajectory into a linear decaying part `d` and a
//! bounded nonlinear part `c`, check the recombination and the decay of `d`.

use chic::config::InitialPreset;
use chic::decomposition::{c_bound_ratios, choose_ell, decay_check, split_integrate};
use chic::dynamics::{integrate, SchemeConfig};
use chic::model::{Parameters, Potential};
use chic::spectral::Grid;

fn main() -> chic::Result<()> {
    let grid = Grid::new(2, 32)?;
    let params = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true)?;
    let init = InitialPreset::Random {
        seed: 3,
        amplitude: 0.2,
        smoothness: 1.0,
        mean: 0.1,
        theta_mean: 0.1,
        chi1_mean: 0.05,
    }
    .build(&grid)?;
    let scheme = SchemeConfig::new(1e-2, 20.0, &params).with_stride(100);
    let traj = integrate(&grid, &init, &scheme, &params, &mut [])?;
    let ell = choose_ell(&grid, &traj, &params, 1)?;
    println!(
        "ell = {:.4} (sup phi' = {:.4}, certificate {:.3e} over {} fields)",
        ell.ell, ell.sup_dphi, ell.certificate, ell.samples
    );
    let run = split_integrate(&grid, &init, &scheme, &params, ell.ell)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "recombine", "|d|", "|c_t|", "|A c|");
    for (i, t) in run.times.iter().enumerate() {
        let m = &run.c_monitor[i];
        println!(
            "{t:>6.1} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            run.recombination_defect[i], run.d_norm[i], m.chi_t, m.a_chi
        );
    }
    let d = decay_check(&run)?;
    println!("d decays at rate {:.4} (R^2 {:.5}, falsified: {})", d.rate, d.r_squared, d.falsified);
    println!("late-window c bound ratios {:?}", c_bound_ratios(&run, 0.1));
    Ok(())
}
