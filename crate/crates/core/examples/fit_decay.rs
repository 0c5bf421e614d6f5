//! Classify decay series as exponential or algebraic and translate the
//! algebraic exponent back into a Lojasiewicz exponent.

use chic::fit::{fit_decay, DecayModel, SeriesTag};

fn main() -> chic::Result<()> {
    let t: Vec<f64> = (1..=200).map(|i| i as f64 * 0.25).collect();
    let series = [
        ("2 e^{-0.7 t}", t.iter().map(|t| 2.0 * (-0.7 * t).exp()).collect::<Vec<_>>()),
        ("3 t^{-1/2}", t.iter().map(|t| 3.0 / t.sqrt()).collect()),
        ("(1 + t)^{-2}", t.iter().map(|t| (1.0 + t).powi(-2)).collect()),
    ];
    for (label, v) in &series {
        let r = fit_decay(&t, v, DecayModel::Auto, SeriesTag::DualNorm)?;
        println!(
            "{label:<14} -> {:?}: exponent {:.4}, prefactor {:.4}, R^2 {:.6}, implied rho {:.4}",
            r.model, r.exponent, r.prefactor, r.r_squared, r.implied_rho
        );
    }
    Ok(())
}
