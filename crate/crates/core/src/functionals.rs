//! Norms, conserved quantities, and the Lyapunov/proof functionals.
//!
//! `V*` is realized as the `(I + A)^{-1/2}`-weighted norm; on mean-free
//! fields `V₀^{-1}` is `‖A₀^{-1/2}·‖`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Observer;
use crate::error::Result;
use crate::model::{MeanData, Parameters, Potential, State};
use crate::spectral::{require_mean_free, FluxCoeffs, Grid, Operator, ScalarCoeffs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// L²
    H,
    /// H¹
    V,
    /// `‖(I + A)^{-1/2} v‖`
    Vdual,
    /// `‖A₀^{r/2} ṽ‖`; negative `r` needs a mean-free input.
    V0r(f64),
    /// `H²`-type norm with weight `1 + λ + λ²`.
    W,
}

pub fn norm(grid: &Grid, v: &ScalarCoeffs, kind: NormKind) -> Result<f64> {
    let s = match kind {
        NormKind::H => grid.norm_sq(v),
        NormKind::V => grid.spectral_sum(v, |l| 1.0 + l),
        NormKind::Vdual => grid.spectral_sum(v, |l| 1.0 / (1.0 + l)),
        NormKind::V0r(r) => {
            if r < 0.0 {
                require_mean_free(v)?;
            }
            grid.spectral_sum(v, |l| if l == 0.0 { 0.0 } else { l.powf(r) })
        }
        NormKind::W => grid.spectral_sum(v, |l| 1.0 + l + l * l),
    };
    Ok(s.sqrt())
}

/// `‖A₀^{-1/2} v‖²` of the mean-free part of `v`.
pub(crate) fn v0_inv_sq(grid: &Grid, v: &ScalarCoeffs) -> f64 {
    grid.spectral_sum(v, |l| if l == 0.0 { 0.0 } else { 1.0 / l })
}

pub fn flux_norm(grid: &Grid, q: &FluxCoeffs) -> f64 {
    grid.flux_norm_sq(q).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateNorm {
    /// `ℋ_σ = H × H^d(σ-weighted) × V × V*`
    Hsigma,
    /// `𝒱_σ = V × V^d(σ-weighted) × W × H`
    Vsigma,
}

pub fn state_norm(grid: &Grid, s: &State, sigma: f64, kind: StateNorm) -> f64 {
    let n2 = match kind {
        StateNorm::Hsigma => {
            grid.norm_sq(&s.theta)
                + sigma * grid.flux_norm_sq(&s.q)
                + grid.spectral_sum(&s.chi, |l| 1.0 + l)
                + grid.spectral_sum(&s.chi_t, |l| 1.0 / (1.0 + l))
        }
        StateNorm::Vsigma => {
            grid.spectral_sum(&s.theta, |l| 1.0 + l)
                + sigma * (grid.flux_norm_sq(&s.q) + grid.flux_grad_norm_sq(&s.q))
                + grid.spectral_sum(&s.chi, |l| 1.0 + l + l * l)
                + grid.norm_sq(&s.chi_t)
        }
    };
    n2.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conserved {
    /// `⟨ϑ + χ, 1⟩`
    pub total_mass: f64,
    /// `⟨χ, 1⟩`
    pub chi_mass: f64,
    /// `⟨χ_t, 1⟩`
    pub chi_t_mean: f64,
    /// `|⟨ϑ,1⟩ - ϑ∞ - ε⟨χ₁,1⟩e^{-t/ε}|`
    pub theta_mean_defect: f64,
    /// `|⟨χ_t,1⟩ - ⟨χ₁,1⟩e^{-t/ε}|`
    pub chi_t_mean_defect: f64,
    /// `|⟨ϑ+χ,1⟩ - ⟨ϑ₀+χ₀,1⟩|`
    pub total_mass_defect: f64,
}

pub fn conserved(s: &State, means: &MeanData) -> Conserved {
    let total = s.theta.mean() + s.chi.mean();
    Conserved {
        total_mass: total,
        chi_mass: s.chi.mean(),
        chi_t_mean: s.chi_t.mean(),
        theta_mean_defect: (s.theta.mean() - means.theta_mean_at(s.time)).abs(),
        chi_t_mean_defect: (s.chi_t.mean() - means.chi_t_mean_at(s.time)).abs(),
        total_mass_defect: (total - means.total_mass).abs(),
    }
}

/// `E(v) = ½‖∇v‖² + ⟨Φ̃(v), 1⟩` with `Φ̃` shifted by `m`.
pub fn energy_e(grid: &Grid, v: &ScalarCoeffs, potential: &Potential, m: f64) -> Result<f64> {
    require_mean_free(v)?;
    Ok(energy_unchecked(grid, v, &potential.shifted(m)))
}

fn energy_unchecked(grid: &Grid, v: &ScalarCoeffs, shifted: &Potential) -> f64 {
    0.5 * grid.spectral_sum(v, |l| l) + grid.integrate_map(v, |y| shifted.big_phi(y))
}

/// `L = ½(‖ϑ̃‖² + σ‖q‖² + ε‖χ̃_t‖²_{V₀^{-1}}) + E(χ̃)` with shift `m`.
pub fn lyapunov_l(grid: &Grid, s: &State, params: &Parameters, m: f64) -> f64 {
    let shifted = params.potential.shifted(m);
    let chi = s.chi.deflated();
    0.5 * (grid.norm_sq(&s.theta.deflated())
        + params.sigma * grid.flux_norm_sq(&s.q)
        + params.epsilon * v0_inv_sq(grid, &s.chi_t))
        + energy_unchecked(grid, &chi, &shifted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCoefficients {
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu: f64,
    pub nu: f64,
    pub c_alpha_nu: f64,
}

impl FunctionalCoefficients {
    /// Defaults; `κ₂ = 1/(1 + π²)` and `C_{α,ν} = 10(1 + 1/α)` (zero when `α = 0`).
    pub fn defaults(sigma: f64, alpha: f64) -> Self {
        let kappa2 = 1.0 / (1.0 + std::f64::consts::PI.powi(2));
        let gamma2 = if sigma > 0.0 {
            (0.5 / (kappa2 * (1.0 + 1.0 / sigma))).min(0.5)
        } else {
            0.0
        };
        FunctionalCoefficients {
            beta: 0.05,
            gamma1: 0.01,
            gamma2,
            mu: 0.05,
            nu: 0.05,
            c_alpha_nu: if alpha > 0.0 { 10.0 * (1.0 + 1.0 / alpha) } else { 0.0 },
        }
    }

    pub fn zero() -> Self {
        FunctionalCoefficients {
            beta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            mu: 0.0,
            nu: 0.0,
            c_alpha_nu: 0.0,
        }
    }
}

/// `⟨q, ∇A₀^{-1} v⟩` for mean-free `v` (the mean is ignored).
pub fn flux_cross(grid: &Grid, q: &FluxCoeffs, v: &ScalarCoeffs) -> f64 {
    let lam = grid.eigenvalues();
    let mut s = 0.0;
    for (comp, qc) in q.components.iter().enumerate() {
        for idx in 1..grid.len() {
            let g = -grid.wavenumber(idx, comp) * v.values[idx] / lam[idx];
            s += qc[idx] * g * grid.flux_weight(comp, idx);
        }
    }
    s
}

/// `Ψ_σ` with the unshifted `Φ(χ)`; for `σ = 0` the `q` and `γ₂` terms drop (`Ψ₀`).
pub fn psi_sigma(grid: &Grid, s: &State, coeffs: &FunctionalCoefficients, params: &Parameters) -> f64 {
    let theta = s.theta.deflated();
    let chi = s.chi.deflated();
    let chi_t = s.chi_t.deflated();
    let inv = |l: f64| if l == 0.0 { 0.0 } else { 1.0 / l };
    let lam = grid.eigenvalues();
    let w = grid.weights();
    let cross_inv: f64 = (1..grid.len())
        .map(|k| w[k] * chi_t.values[k] * chi.values[k] / lam[k])
        .sum();
    let (b, g1) = (coeffs.beta, coeffs.gamma1);
    let mut psi = grid.norm_sq(&theta)
        + grid.spectral_sum(&chi_t, inv)
        + grid.spectral_sum(&chi, |l| l)
        + 2.0 * b * cross_inv
        + b * grid.spectral_sum(&chi, inv)
        + params.alpha * b * grid.norm_sq(&chi)
        + 2.0 * grid.integrate_map(&s.chi, |y| params.potential.big_phi(y))
        + g1 * (2.0 * grid.inner(&chi_t, &chi)
            + grid.norm_sq(&chi)
            + params.alpha * grid.spectral_sum(&chi, |l| l));
    if params.sigma > 0.0 {
        psi += params.sigma * grid.flux_norm_sq(&s.q) - coeffs.gamma2 * flux_cross(grid, &s.q, &theta);
    }
    psi
}

/// `F(v) = A₀v + φ̃(v) - ⟨φ̃(v),1⟩` for the shifted potential.
pub fn gradient_f(grid: &Grid, v: &ScalarCoeffs, shifted: &Potential) -> ScalarCoeffs {
    let mut f = grid
        .apply(v, Operator::Laplacian)
        .expect("grid-sized coefficients");
    f.axpy(1.0, &grid.map_dealiased(v, |y| shifted.phi(y)));
    f.values[0] = 0.0;
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofValues {
    pub g: f64,
    pub m: f64,
    pub n: f64,
    pub n_terms: [f64; 4],
}

/// `G`, `M`, `N` at time `t = s.time`; `e_inf` is `E(χ̃∞)` and `m` the limiting mass.
pub fn proof_functionals(
    grid: &Grid,
    s: &State,
    coeffs: &FunctionalCoefficients,
    params: &Parameters,
    m: f64,
    e_inf: f64,
) -> ProofValues {
    let shifted = params.potential.shifted(m);
    let chi = s.chi.deflated();
    let theta = s.theta.deflated();
    let f = gradient_f(grid, &chi, &shifted);
    let lam = grid.eigenvalues();
    let w = grid.weights();
    let g: f64 = (1..grid.len())
        .map(|k| w[k] * s.chi_t.values[k] * f.values[k] / (lam[k] * lam[k]))
        .sum();
    let l = lyapunov_l(grid, s, params, m);
    let cross = flux_cross(grid, &s.q, &theta);
    let mval = l - e_inf - coeffs.mu * cross
        + coeffs.nu * g
        + coeffs.c_alpha_nu * (-2.0 * s.time / params.epsilon).exp();
    let terms = [
        grid.flux_norm_sq(&s.q),
        v0_inv_sq(grid, &s.chi_t),
        coeffs.mu * grid.norm_sq(&theta),
        coeffs.nu * v0_inv_sq(grid, &f),
    ];
    ProofValues {
        g,
        m: mval,
        n: terms.iter().sum::<f64>().sqrt(),
        n_terms: terms,
    }
}

/// Instantaneous dissipation rates `(‖q‖², ‖χ̃_t‖²_{V₀^{-1}} + α‖χ̃_t‖²)`.
pub fn dissipation_rates(grid: &Grid, s: &State, params: &Parameters) -> (f64, f64) {
    let chi_t = s.chi_t.deflated();
    (
        grid.flux_norm_sq(&s.q),
        v0_inv_sq(grid, &chi_t) + params.alpha * grid.norm_sq(&chi_t),
    )
}

pub const CSV_COLUMNS: [&str; 17] = [
    "t",
    "mass_total",
    "mass_chi",
    "mean_chi_t",
    "norm_theta_tilde",
    "norm_q",
    "norm_chi_V",
    "norm_chit_Vdual",
    "norm_Achi",
    "L",
    "Psi_sigma",
    "E",
    "G",
    "M",
    "N",
    "diss_q_int",
    "diss_chit_int",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_total: f64,
    pub mass_chi: f64,
    pub mean_chi_t: f64,
    pub norm_theta_tilde: f64,
    pub norm_q: f64,
    pub norm_chi_v: f64,
    pub norm_chit_vdual: f64,
    pub norm_achi: f64,
    pub l: f64,
    pub psi_sigma: f64,
    pub e: f64,
    pub g: f64,
    pub m: f64,
    pub n: f64,
    pub diss_q_int: f64,
    pub diss_chit_int: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.mass_total,
            self.mass_chi,
            self.mean_chi_t,
            self.norm_theta_tilde,
            self.norm_q,
            self.norm_chi_v,
            self.norm_chit_vdual,
            self.norm_achi,
            self.l,
            self.psi_sigma,
            self.e,
            self.g,
            self.m,
            self.n,
            self.diss_q_int,
            self.diss_chit_int,
        ]
    }

    /// One CSV row, 17 significant digits per field.
    pub fn csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Header plus one row per record.
pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Evaluation context shared by every record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsContext {
    pub params: Parameters,
    pub coeffs: FunctionalCoefficients,
    pub means: MeanData,
    /// `E(χ̃∞)` entering `M`.
    pub e_inf: f64,
}

pub fn diagnostics_record(
    grid: &Grid,
    s: &State,
    ctx: &DiagnosticsContext,
    integrals: (f64, f64),
) -> DiagnosticsRecord {
    let p = &ctx.params;
    let m = ctx.means.chi_mass_inf;
    let chi = s.chi.deflated();
    let pf = proof_functionals(grid, s, &ctx.coeffs, p, m, ctx.e_inf);
    DiagnosticsRecord {
        t: s.time,
        mass_total: s.theta.mean() + s.chi.mean(),
        mass_chi: s.chi.mean(),
        mean_chi_t: s.chi_t.mean(),
        norm_theta_tilde: grid.norm_sq(&s.theta.deflated()).sqrt(),
        norm_q: if p.sigma > 0.0 {
            flux_norm(grid, &s.q)
        } else {
            flux_norm(grid, &grid.gradient(&s.theta))
        },
        norm_chi_v: grid.spectral_sum(&s.chi, |l| 1.0 + l).sqrt(),
        norm_chit_vdual: grid.spectral_sum(&s.chi_t, |l| 1.0 / (1.0 + l)).sqrt(),
        norm_achi: grid.spectral_sum(&s.chi, |l| l * l).sqrt(),
        l: lyapunov_l(grid, s, p, m),
        psi_sigma: psi_sigma(grid, s, &ctx.coeffs, p),
        e: energy_unchecked(grid, &chi, &p.potential.shifted(m)),
        g: pf.g,
        m: pf.m,
        n: pf.n,
        diss_q_int: integrals.0,
        diss_chit_int: integrals.1,
    }
}

/// Accumulates the dissipation integrals (trapezoid rule on every step) and
/// records a [`DiagnosticsRecord`] at every snapshot.
pub struct DiagnosticsObserver<'g> {
    grid: &'g Grid,
    ctx: DiagnosticsContext,
    last: Option<(f64, f64, f64)>,
    integrals: (f64, f64),
    pub records: Vec<DiagnosticsRecord>,
}

impl<'g> DiagnosticsObserver<'g> {
    pub fn new(grid: &'g Grid, ctx: DiagnosticsContext) -> Self {
        DiagnosticsObserver {
            grid,
            ctx,
            last: None,
            integrals: (0.0, 0.0),
            records: Vec::new(),
        }
    }

    pub fn integrals(&self) -> (f64, f64) {
        self.integrals
    }

    /// Replace `E(χ̃∞)` after the fact; `M` depends on it additively.
    pub fn rebase_energy(&mut self, e_inf: f64) {
        let shift = self.ctx.e_inf - e_inf;
        for r in self.records.iter_mut() {
            r.m += shift;
        }
        self.ctx.e_inf = e_inf;
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

impl Observer for DiagnosticsObserver<'_> {
    fn observe(&mut self, state: &State, snapshot: bool) -> Result<()> {
        let (dq, dc) = dissipation_rates(self.grid, state, &self.ctx.params);
        if let Some((t0, q0, c0)) = self.last {
            let h = state.time - t0;
            self.integrals.0 += 0.5 * h * (q0 + dq);
            self.integrals.1 += 0.5 * h * (c0 + dc);
        }
        self.last = Some((state.time, dq, dc));
        if snapshot {
            self.records
                .push(diagnostics_record(self.grid, state, &self.ctx, self.integrals));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos1(grid: &Grid, amp: f64) -> ScalarCoeffs {
        let mut v = grid.zeros();
        v.values[1] = amp;
        v
    }

    #[test]
    fn norm_examples() {
        let grid = Grid::new(1, 16).unwrap();
        let v = cos1(&grid, 1.0);
        assert!((norm(&grid, &v, NormKind::H).unwrap().powi(2) - 0.5).abs() < 1e-15);
        let expect = 0.5 / (1.0 + PI * PI);
        assert!((norm(&grid, &v, NormKind::Vdual).unwrap().powi(2) - expect).abs() < 1e-15);
        assert!(norm(&grid, &grid.constant(1.0), NormKind::V0r(-1.0)).is_err());

        let mut s = State::constant(&grid, 1.0, 1.0);
        s.chi_t = grid.constant(1.0);
        assert!((state_norm(&grid, &s, 0.5, StateNorm::Hsigma).powi(2) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn conserved_examples() {
        let grid = Grid::new(1, 8).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let init = crate::model::InitialData::new(
            grid.constant(0.3),
            grid.zero_flux(),
            grid.constant(0.4),
            grid.constant(0.1),
        );
        let means = init.means(&p);
        assert!((means.theta_inf - 0.2).abs() < 1e-15);
        assert!((means.chi_mass_inf - 0.5).abs() < 1e-15);
        let s = init.to_state(&grid, &p);
        let c = conserved(&s, &means);
        assert_eq!(c.chi_mass, 0.4);
        assert!(c.theta_mean_defect < 1e-15);
    }

    #[test]
    fn energy_examples() {
        let grid = Grid::new(1, 16).unwrap();
        let v = cos1(&grid, 1.0);
        let e = energy_e(&grid, &v, &Potential::quartic(0.0), 0.0).unwrap();
        assert!((e - (PI * PI / 4.0 + 3.0 / 32.0)).abs() < 1e-13);
        assert_eq!(energy_e(&grid, &grid.zeros(), &Potential::quartic(1.0), 0.0).unwrap(), 0.0);
        assert!(energy_e(&grid, &grid.constant(1.0), &Potential::quartic(1.0), 0.0).is_err());
    }

    #[test]
    fn zero_state_functionals_vanish() {
        let grid = Grid::new(2, 8).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let s = State::constant(&grid, 0.0, 0.0);
        assert_eq!(lyapunov_l(&grid, &s, &p, 0.0), 0.0);
        let c = FunctionalCoefficients::defaults(0.5, 0.5);
        assert_eq!(psi_sigma(&grid, &s, &c, &p), 0.0);
    }

    #[test]
    fn equilibrium_proof_values() {
        let grid = Grid::new(1, 16).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let mut s = State::constant(&grid, 0.2, 0.0);
        s.time = 1.5;
        let c = FunctionalCoefficients::defaults(0.5, 0.5);
        let pv = proof_functionals(&grid, &s, &c, &p, 0.0, 0.0);
        assert_eq!(pv.n, 0.0);
        assert_eq!(pv.g, 0.0);
        assert!((pv.m - c.c_alpha_nu * (-3.0_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn default_coefficients() {
        let c = FunctionalCoefficients::defaults(0.5, 0.5);
        assert_eq!(c.gamma2, 0.5);
        assert_eq!(c.c_alpha_nu, 30.0);
        assert_eq!(FunctionalCoefficients::defaults(0.0, 0.0).c_alpha_nu, 0.0);
    }

    #[test]
    fn csv_row_has_seventeen_significant_digits() {
        let r = DiagnosticsRecord {
            t: 0.1,
            mass_total: 0.0,
            mass_chi: 0.0,
            mean_chi_t: 0.0,
            norm_theta_tilde: 0.0,
            norm_q: 0.0,
            norm_chi_v: 0.0,
            norm_chit_vdual: 0.0,
            norm_achi: 0.0,
            l: 0.0,
            psi_sigma: 0.0,
            e: 0.0,
            g: 0.0,
            m: 0.0,
            n: 0.0,
            diss_q_int: 0.0,
            diss_chit_int: 0.0,
        };
        let row = r.csv_row();
        assert!(row.starts_with("1.0000000000000001e-1,"));
        assert_eq!(row.split(',').count(), CSV_COLUMNS.len());
    }
}
