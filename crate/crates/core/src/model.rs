//! Potential, parameters, state, and the strong form of the coupled system
//!
//! ```text
//! (ϑ + χ)_t + ∇·q = 0
//! σ q_t + q = -∇ϑ
//! ε χ_tt + χ_t - Δ(-Δχ + α χ_t + φ(χ) - ϑ) = 0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ChicError, Result};
use crate::spectral::{FluxCoeffs, FluxField, Grid, Operator, ScalarCoeffs, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `φ(r) = r³ - a r`
    Quartic { a: f64 },
    /// `φ(r) = Σ_j c_j r^j`, odd degree with positive leading coefficient.
    Polynomial { coefficients: Vec<f64> },
    /// `φ(r) = -a r`; violates coercivity, used for exact linear oracles.
    LinearTest { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialOrder {
    /// `Φ`, the antiderivative with `Φ(0) = 0`.
    Antiderivative,
    /// `φ`
    Value,
    /// `φ'`
    First,
    /// `φ''`
    Second,
}

/// The nonlinearity `φ` as a polynomial, possibly shifted (`φ̃(y) = φ(y + m)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    kind: PotentialKind,
    shift: f64,
    /// Ascending coefficients of `φ` (after shifting).
    phi: Vec<f64>,
    c4: f64,
}

impl Potential {
    pub fn quartic(a: f64) -> Self {
        Potential {
            kind: PotentialKind::Quartic { a },
            shift: 0.0,
            phi: vec![0.0, -a, 0.0, 1.0],
            c4: a.max(0.0),
        }
    }

    pub fn linear_test(a: f64) -> Self {
        Potential {
            kind: PotentialKind::LinearTest { a },
            shift: 0.0,
            phi: vec![0.0, -a],
            c4: a.max(0.0),
        }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let mut c = coefficients.clone();
        while c.len() > 1 && *c.last().unwrap() == 0.0 {
            c.pop();
        }
        let deg = c.len() - 1;
        if deg.is_multiple_of(2) || c[deg] <= 0.0 {
            return Err(ChicError::invalid(
                "potential",
                "polynomial φ needs odd degree and positive leading coefficient",
            ));
        }
        let c4 = min_derivative(&c).map_or(0.0, |m| (-m).max(0.0));
        Ok(Potential {
            kind: PotentialKind::Polynomial { coefficients },
            shift: 0.0,
            phi: c,
            c4,
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Accumulated shift `m` with `φ̃(y) = φ(y + m)`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Lower-bound constant with `φ' ≥ -c4`.
    pub fn c4(&self) -> f64 {
        self.c4
    }

    pub fn phi_coefficients(&self) -> &[f64] {
        &self.phi
    }

    pub fn is_linear(&self) -> bool {
        self.phi.len() <= 2
    }

    /// Degree of `Φ`.
    pub fn degree(&self) -> usize {
        self.phi.len()
    }

    /// `Φ` positive-leading of even degree, i.e. bounded below and coercive.
    pub fn is_coercive(&self) -> bool {
        let deg = self.phi.len() - 1;
        deg % 2 == 1 && self.phi[deg] > 0.0
    }

    pub fn eval(&self, r: f64, order: PotentialOrder) -> f64 {
        match order {
            PotentialOrder::Antiderivative => self.big_phi(r),
            PotentialOrder::Value => self.phi(r),
            PotentialOrder::First => self.dphi(r),
            PotentialOrder::Second => self.d2phi(r),
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.phi.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    pub fn dphi(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.phi.iter().enumerate().skip(1).rev() {
            acc = acc * r + j as f64 * c;
        }
        acc
    }

    pub fn d2phi(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.phi.iter().enumerate().skip(2).rev() {
            acc = acc * r + (j * (j - 1)) as f64 * c;
        }
        acc
    }

    pub fn big_phi(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.phi.iter().enumerate().rev() {
            acc = acc * r + c / (j + 1) as f64;
        }
        acc * r
    }

    /// `φ̃(y) = φ(y + m)`; the antiderivative of the result again vanishes at 0.
    pub fn shifted(&self, m: f64) -> Potential {
        // Taylor re-expansion about m: φ̃_j = Σ_{i≥j} C(i,j) φ_i m^{i-j}.
        let len = self.phi.len();
        let mut out = vec![0.0; len];
        for (i, &ci) in self.phi.iter().enumerate() {
            let mut binom = 1.0;
            for (j, o) in out.iter_mut().enumerate().take(i + 1) {
                if j > 0 {
                    binom = binom * (i + 1 - j) as f64 / j as f64;
                }
                *o += ci * binom * m.powi((i - j) as i32);
            }
        }
        Potential {
            kind: self.kind.clone(),
            shift: self.shift + m,
            phi: out,
            c4: self.c4,
        }
    }
}

/// Shorthand for [`Potential::eval`].
pub fn potential_eval(p: &Potential, r: f64, order: PotentialOrder) -> f64 {
    p.eval(r, order)
}

/// Shorthand for [`Potential::shifted`].
pub fn shift_potential(p: &Potential, m: f64) -> Potential {
    p.shifted(m)
}

fn min_derivative(phi: &[f64]) -> Option<f64> {
    let p = Potential {
        kind: PotentialKind::Polynomial {
            coefficients: phi.to_vec(),
        },
        shift: 0.0,
        phi: phi.to_vec(),
        c4: 0.0,
    };
    let deg = phi.len() - 1;
    if deg <= 1 {
        return Some(p.dphi(0.0));
    }
    // Cauchy bound on the roots of φ'' contains every critical point of φ'.
    let lead = phi[deg] * (deg * (deg - 1)) as f64;
    let mut bound = 1.0_f64;
    for (j, c) in phi.iter().enumerate().skip(2) {
        if j < deg {
            bound = bound.max(1.0 + (c * (j * (j - 1)) as f64 / lead).abs());
        }
    }
    let samples = 4000;
    let mut best = (f64::INFINITY, 0.0);
    for s in 0..=samples {
        let y = -bound + 2.0 * bound * s as f64 / samples as f64;
        let v = p.dphi(y);
        if v < best.0 {
            best = (v, y);
        }
    }
    let mut y = best.1;
    for _ in 0..50 {
        let h = p.d2phi(y);
        let hh = {
            let eps = 1e-6 * (1.0 + y.abs());
            (p.d2phi(y + eps) - p.d2phi(y - eps)) / (2.0 * eps)
        };
        if hh <= 0.0 {
            break;
        }
        y -= h / hh;
    }
    Some(best.0.min(p.dphi(y)))
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    /// Global verdict (structural for polynomials).
    pub holds: bool,
    /// Whether the reported constant satisfies the inequality on every sample.
    pub sampled_ok: bool,
    pub constant: f64,
    /// Sample where the constant is attained.
    pub witness: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub range: (f64, f64),
    pub varsigma: f64,
    pub checks: Vec<AssumptionCheck>,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// `(ε, c_ε)` pairs for the growth condition on a sampled set of ε.
    pub c_eps: Vec<(f64, f64)>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds && c.sampled_ok)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const GROWTH_EPSILONS: [f64; 3] = [1.0, 0.1, 0.01];

/// Sample the structural assumptions on `range` and infer the constants
/// `c0, c1, c2, c3, c4` (with `ς = varsigma` for the `(y - ς)φ` bound).
pub fn verify_assumptions(p: &Potential, range: (f64, f64), tol: f64, varsigma: f64) -> AssumptionReport {
    let (lo, hi) = range;
    let samples = 8001;
    let ys: Vec<f64> = (0..samples)
        .map(|s| lo + (hi - lo) * s as f64 / (samples - 1) as f64)
        .collect();
    let argmax = |f: &dyn Fn(f64) -> f64| -> (f64, f64) {
        ys.iter()
            .map(|&y| (f(y), y))
            .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let coercive = p.is_coercive();
    let deg_phi = p.phi.len() - 1;
    let mut checks = Vec::new();

    let (neg_min, w0) = argmax(&|y| -p.big_phi(y));
    let c0 = neg_min.max(0.0);
    checks.push(AssumptionCheck {
        name: "bounded_below",
        holds: coercive,
        sampled_ok: ys.iter().all(|&y| p.big_phi(y) >= -c0 - tol),
        constant: c0,
        witness: w0,
    });

    let (c1, w1) = argmax(&|y| p.d2phi(y).abs() / (1.0 + y.abs()));
    let c1 = c1.max(0.0);
    checks.push(AssumptionCheck {
        name: "second_derivative_growth",
        holds: deg_phi <= 3,
        sampled_ok: ys
            .iter()
            .all(|&y| p.d2phi(y).abs() <= c1 * (1.0 + y.abs()) + tol),
        constant: c1,
        witness: w1,
    });

    let mut c_eps = Vec::new();
    let mut growth_ok = true;
    let mut growth_witness = 0.0;
    for &e in GROWTH_EPSILONS.iter() {
        let (c, w) = argmax(&|y| p.phi(y).abs() - e * p.big_phi(y));
        let c = c.max(0.0);
        growth_ok &= ys.iter().all(|&y| p.phi(y).abs() <= e * p.big_phi(y) + c + tol);
        growth_witness = w;
        c_eps.push((e, c));
    }
    checks.push(AssumptionCheck {
        name: "growth",
        holds: coercive,
        sampled_ok: growth_ok,
        constant: c_eps.last().map_or(0.0, |x| x.1),
        witness: growth_witness,
    });

    let c2 = 0.5 * p.degree() as f64;
    let (c3, w3) = argmax(&|y| c2 * p.big_phi(y) - (y - varsigma) * p.phi(y));
    let c3 = c3.max(0.0);
    checks.push(AssumptionCheck {
        name: "monotone_coercivity",
        holds: coercive,
        sampled_ok: ys
            .iter()
            .all(|&y| (y - varsigma) * p.phi(y) >= c2 * p.big_phi(y) - c3 - tol),
        constant: c3,
        witness: w3,
    });

    let (neg_dmin, w4) = argmax(&|y| -p.dphi(y));
    let lead_ok = deg_phi <= 1 || (deg_phi % 2 == 1 && p.phi[deg_phi] > 0.0);
    checks.push(AssumptionCheck {
        name: "derivative_lower_bound",
        holds: lead_ok,
        sampled_ok: neg_dmin <= p.c4 + tol,
        constant: p.c4,
        witness: w4,
    });

    AssumptionReport {
        range,
        varsigma,
        checks,
        c0,
        c1,
        c2,
        c3,
        c4: p.c4,
        c_eps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub epsilon: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub potential: Potential,
    /// Temperature coupling; `false` reduces to the isothermal equation.
    pub coupling: bool,
}

impl Parameters {
    pub fn new(epsilon: f64, alpha: f64, sigma: f64, potential: Potential, coupling: bool) -> Result<Self> {
        let p = Parameters {
            epsilon,
            alpha,
            sigma,
            potential,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ChicError::invalid("epsilon", "must be > 0"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(ChicError::invalid("alpha", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(ChicError::invalid("sigma", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub(crate) fn coupling_factor(&self) -> f64 {
        if self.coupling {
            1.0
        } else {
            0.0
        }
    }
}

/// `(ϑ, q, χ, χ_t)` at one instant, in coefficient form. For `σ = 0` the
/// flux is kept equal to `-∇ϑ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub theta: ScalarCoeffs,
    pub q: FluxCoeffs,
    pub chi: ScalarCoeffs,
    pub chi_t: ScalarCoeffs,
    pub time: f64,
}

impl State {
    pub fn constant(grid: &Grid, theta: f64, chi: f64) -> Self {
        State {
            theta: grid.constant(theta),
            q: grid.zero_flux(),
            chi: grid.constant(chi),
            chi_t: grid.zeros(),
            time: 0.0,
        }
    }

    pub fn sub(&self, other: &State) -> State {
        State {
            theta: self.theta.sub(&other.theta),
            q: self.q.sub(&other.q),
            chi: self.chi.sub(&other.chi),
            chi_t: self.chi_t.sub(&other.chi_t),
            time: self.time,
        }
    }

    pub fn add(&self, other: &State) -> State {
        State {
            theta: self.theta.add(&other.theta),
            q: self.q.add(&other.q),
            chi: self.chi.add(&other.chi),
            chi_t: self.chi_t.add(&other.chi_t),
            time: self.time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.q.is_finite() && self.chi.is_finite() && self.chi_t.is_finite()
    }
}

/// Time derivatives `(ϑ_t, q_t, χ_t, χ_tt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRates {
    pub theta_t: ScalarCoeffs,
    pub q_t: FluxCoeffs,
    pub chi_t: ScalarCoeffs,
    pub chi_tt: ScalarCoeffs,
}

impl StateRates {
    /// Forward difference `(b - a)/h`.
    pub fn finite_difference(a: &State, b: &State, h: f64) -> Self {
        let d = b.sub(a);
        StateRates {
            theta_t: d.theta.scale(1.0 / h),
            q_t: d.q.scale(1.0 / h),
            chi_t: d.chi.scale(1.0 / h),
            chi_tt: d.chi_t.scale(1.0 / h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub theta0: ScalarCoeffs,
    pub q0: FluxCoeffs,
    pub chi0: ScalarCoeffs,
    pub chi1: ScalarCoeffs,
    /// Bound on `|⟨ϑ₀,1⟩| + |⟨χ₀,1⟩| + |⟨χ₁,1⟩|`; infinite means unrestricted.
    pub delta: f64,
}

/// Scalars fixed by the initial data through the mean identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanData {
    /// `ϑ∞ = ⟨ϑ₀ - εχ₁, 1⟩`
    pub theta_inf: f64,
    /// `m = ⟨χ₀ + εχ₁, 1⟩`, the limiting mass of `χ`.
    pub chi_mass_inf: f64,
    pub chi1_mean: f64,
    pub total_mass: f64,
    pub epsilon: f64,
}

impl MeanData {
    pub fn chi_t_mean_at(&self, t: f64) -> f64 {
        self.chi1_mean * (-t / self.epsilon).exp()
    }

    pub fn theta_mean_at(&self, t: f64) -> f64 {
        self.theta_inf + self.epsilon * self.chi1_mean * (-t / self.epsilon).exp()
    }

    pub fn chi_mean_at(&self, t: f64) -> f64 {
        self.chi_mass_inf - self.epsilon * self.chi1_mean * (-t / self.epsilon).exp()
    }
}

impl InitialData {
    pub fn new(theta0: ScalarCoeffs, q0: FluxCoeffs, chi0: ScalarCoeffs, chi1: ScalarCoeffs) -> Self {
        InitialData {
            theta0,
            q0,
            chi0,
            chi1,
            delta: f64::INFINITY,
        }
    }

    pub fn from_nodal(
        grid: &Grid,
        theta0: &ScalarField,
        q0: &FluxField,
        chi0: &ScalarField,
        chi1: &ScalarField,
    ) -> Result<Self> {
        Ok(InitialData::new(
            grid.to_spectral(theta0)?,
            grid.flux_to_spectral(q0)?,
            grid.to_spectral(chi0)?,
            grid.to_spectral(chi1)?,
        ))
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn mean_bound(&self) -> f64 {
        self.theta0.mean().abs() + self.chi0.mean().abs() + self.chi1.mean().abs()
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for (name, v) in [
            ("theta0", &self.theta0),
            ("chi0", &self.chi0),
            ("chi1", &self.chi1),
        ] {
            if v.len() != grid.len() {
                return Err(ChicError::DimensionMismatch {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
            if !v.is_finite() {
                return Err(ChicError::invalid(name, "non-finite initial data"));
            }
        }
        if self.q0.components.len() != grid.dim() {
            return Err(ChicError::DimensionMismatch {
                expected: grid.dim(),
                got: self.q0.components.len(),
            });
        }
        if self.mean_bound() > self.delta {
            return Err(ChicError::invalid(
                "delta",
                format!("mean bound {} exceeds delta {}", self.mean_bound(), self.delta),
            ));
        }
        Ok(())
    }

    pub fn means(&self, params: &Parameters) -> MeanData {
        let eps = params.epsilon;
        MeanData {
            theta_inf: self.theta0.mean() - eps * self.chi1.mean(),
            chi_mass_inf: self.chi0.mean() + eps * self.chi1.mean(),
            chi1_mean: self.chi1.mean(),
            total_mass: self.theta0.mean() + self.chi0.mean(),
            epsilon: eps,
        }
    }

    /// Initial state; for `σ = 0` the flux is `-∇ϑ₀` and `q0` is ignored.
    pub fn to_state(&self, grid: &Grid, params: &Parameters) -> State {
        let q = if params.sigma > 0.0 {
            self.q0.clone()
        } else {
            grid.gradient(&self.theta0).scale(-1.0)
        };
        State {
            theta: self.theta0.clone(),
            q,
            chi: self.chi0.clone(),
            chi_t: self.chi1.clone(),
            time: 0.0,
        }
    }

    /// Data for the linear decaying part of the splitting: deflated data with the original flux.
    pub fn deflated(&self) -> InitialData {
        InitialData {
            theta0: self.theta0.deflated(),
            q0: self.q0.clone(),
            chi0: self.chi0.deflated(),
            chi1: self.chi1.deflated(),
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    /// `‖ϑ_t + χ_t + ∇·q‖`
    pub theta: f64,
    /// `‖σ q_t + q + ∇ϑ‖`
    pub flux: f64,
    /// `‖ε χ_tt + χ_t + A(Aχ + αχ_t + φ(χ) - ϑ)‖`
    pub chi: f64,
    /// `‖rate of χ - χ_t‖`
    pub kinematic: f64,
}

impl ResidualNorms {
    pub fn max(&self) -> f64 {
        self.theta.max(self.flux).max(self.chi).max(self.kinematic)
    }
}

/// L² norms of the strong-form residuals for a state and supplied time derivatives.
pub fn strong_residual(grid: &Grid, s: &State, rates: &StateRates, params: &Parameters) -> Result<ResidualNorms> {
    let c = params.coupling_factor();
    let mut r_theta = rates.theta_t.clone();
    r_theta.axpy(c, &rates.chi_t);
    r_theta.axpy(1.0, &grid.divergence(&s.q));

    let mut r_flux = rates.q_t.scale(params.sigma);
    r_flux.axpy(1.0, &s.q);
    r_flux.axpy(1.0, &grid.gradient(&s.theta));

    let pot = &params.potential;
    let mut mu = grid.apply(&s.chi, Operator::Laplacian)?;
    mu.axpy(params.alpha, &s.chi_t);
    mu.axpy(1.0, &grid.map_dealiased(&s.chi, |v| pot.phi(v)));
    mu.axpy(-c, &s.theta);
    let mut r_chi = grid.apply(&mu, Operator::Laplacian)?;
    r_chi.axpy(params.epsilon, &rates.chi_tt);
    r_chi.axpy(1.0, &s.chi_t);

    let kin = rates.chi_t.sub(&s.chi_t);
    Ok(ResidualNorms {
        theta: grid.norm_sq(&r_theta).sqrt(),
        flux: grid.flux_norm_sq(&r_flux).sqrt(),
        chi: grid.norm_sq(&r_chi).sqrt(),
        kinematic: grid.norm_sq(&kin).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quartic_evaluation_examples() {
        let p = Potential::quartic(1.0);
        assert_eq!(p.eval(0.0, PotentialOrder::Value), 0.0);
        assert_eq!(p.eval(0.0, PotentialOrder::First), -1.0);
        assert!((p.eval(1.0, PotentialOrder::Antiderivative) + 0.25).abs() < 1e-15);
        assert_eq!(Potential::quartic(2.0).phi(1.0), -1.0);
        assert_eq!(p.d2phi(2.0), 12.0);
        assert_eq!(p.c4(), 1.0);
    }

    #[test]
    fn shift_examples() {
        let a = 1.7;
        let m = 0.3;
        let p = Potential::quartic(a);
        let same = p.shifted(0.0);
        for y in [-1.3, 0.0, 0.4, 2.0] {
            assert_eq!(same.phi(y), p.phi(y));
        }
        let s = p.shifted(m);
        assert!((s.phi(0.0) - (m * m * m - a * m)).abs() < 1e-15);
        assert!((s.dphi(0.0) - (3.0 * m * m - a)).abs() < 1e-15);
        assert_eq!(s.big_phi(0.0), 0.0);
        for y in [-0.8, 0.25, 1.1] {
            assert!((s.big_phi(y) - (p.big_phi(y + m) - p.big_phi(m))).abs() < 1e-13);
        }
    }

    #[test]
    fn assumption_report_quartic_and_linear() {
        let r = verify_assumptions(&Potential::quartic(1.0), (-10.0, 10.0), 1e-9, 0.0);
        assert!(r.all_hold(), "{r:?}");
        assert_eq!(r.c4, 1.0);
        assert!((r.c0 - 0.25).abs() < 1e-6);

        let r = verify_assumptions(&Potential::linear_test(1.0), (-10.0, 10.0), 1e-9, 0.0);
        assert!(!r.check("bounded_below").unwrap().holds);
        assert!(r.check("derivative_lower_bound").unwrap().holds);
    }

    #[test]
    fn polynomial_c4_matches_closed_form() {
        // φ = r^5 - 2r^3 + r, φ' = 5r^4 - 6r^2 + 1, min at r² = 3/5: 5·9/25 - 18/5 + 1 = -0.8
        let p = Potential::polynomial(vec![0.0, 1.0, 0.0, -2.0, 0.0, 1.0]).unwrap();
        assert!((p.c4() - 0.8).abs() < 1e-10);
        assert!(Potential::polynomial(vec![0.0, 1.0, 1.0]).is_err());
        let r = verify_assumptions(&p, (-5.0, 5.0), 1e-9, 0.0);
        assert!(!r.check("second_derivative_growth").unwrap().holds);
    }

    #[test]
    fn parameter_validation() {
        let p = Potential::quartic(1.0);
        assert!(Parameters::new(0.0, 0.5, 0.5, p.clone(), true).is_err());
        assert!(Parameters::new(1.0, -0.1, 0.5, p.clone(), true).is_err());
        assert!(Parameters::new(1.0, 0.5, 1.5, p.clone(), true).is_err());
        assert!(Parameters::new(1.0, 0.0, 0.0, p, true).is_ok());
    }

    #[test]
    fn constant_state_has_zero_residual() {
        let grid = Grid::new(1, 16).unwrap();
        let params = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        for theta in [-2.0, 0.0, 3.1] {
            let s = State::constant(&grid, theta, 0.7);
            let rates = StateRates {
                theta_t: grid.zeros(),
                q_t: grid.zero_flux(),
                chi_t: grid.zeros(),
                chi_tt: grid.zeros(),
            };
            let r = strong_residual(&grid, &s, &rates, &params).unwrap();
            assert!(r.max() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn manufactured_single_mode_residual_matches_hand_forcing() {
        // χ = A cos(πx), ϑ = B cos(πx), q = C sin(πx), rates chosen to cancel
        // every linear term, so the χ-residual is exactly the nonlinear
        // remainder A(φ(χ)) - λ·(linear part of φ) worked out by hand.
        let grid = Grid::new(1, 16).unwrap();
        let params = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let (a, b, c) = (0.3, 0.2, -0.1);
        let lam = PI * PI;
        let mut s = State::constant(&grid, 0.0, 0.0);
        s.chi.values[1] = a;
        s.theta.values[1] = b;
        s.q.components[0][1] = c;
        s.chi_t.values[1] = 0.05;
        // φ(χ) = A³cos³ - A cos = (3A³/4 - A) cos + (A³/4) cos3
        let phi1 = 0.75 * a * a * a - a;
        let mu1 = lam * a + params.alpha * 0.05 + phi1 - b;
        let mut rates = StateRates {
            theta_t: grid.zeros(),
            q_t: grid.zero_flux(),
            chi_t: s.chi_t.clone(),
            chi_tt: grid.zeros(),
        };
        rates.theta_t.values[1] = -0.05 - PI * c;
        rates.q_t.components[0][1] = -(c - PI * b) / params.sigma;
        rates.chi_tt.values[1] = -(0.05 + lam * mu1) / params.epsilon;
        let r = strong_residual(&grid, &s, &rates, &params).unwrap();
        assert!(r.theta < 1e-12 && r.flux < 1e-12 && r.kinematic == 0.0, "{r:?}");
        // remaining forcing: A applied to (A³/4) cos(3πx), norm = 9π²·A³/4·sqrt(1/2)
        let expect = 9.0 * lam * a * a * a / 4.0 * 0.5_f64.sqrt();
        assert!((r.chi - expect).abs() < 1e-10 * expect.max(1.0), "{} vs {}", r.chi, expect);
    }
}
