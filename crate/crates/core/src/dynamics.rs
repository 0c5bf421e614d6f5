//! Time integration.
//!
//! The production scheme is linearly implicit: every linear term (including a
//! stabilization `ℓ_s A χ`) is treated implicitly and `A(φ(χ) - ℓ_s χ)` is
//! explicit. Because every linear operator is diagonal in the cosine basis,
//! the implicit solve reduces to one small dense system per mode, whose
//! inverse is precomputed. The mean mode is advanced with its exact solution,
//! so the mean identities hold to rounding for any step size.
//!
//! [`step_oracle`] (classical RK4 on the full discretized system) and
//! [`linear_mode_solution`] (matrix exponential for linear potentials) serve
//! as independent references.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{ChicError, Result};
use crate::model::{InitialData, Parameters, State, StateRates};
use crate::spectral::{Grid, ScalarCoeffs};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// `ℓ_s`; must dominate the potential's `c4`.
    pub stabilization: f64,
    /// Keep every `stride`-th state as a snapshot.
    pub stride: usize,
    /// Bound on the `ℋ_σ` norm beyond which a run is declared blown up.
    pub blowup_threshold: f64,
}

impl SchemeConfig {
    pub fn new(dt: f64, t_end: f64, params: &Parameters) -> Self {
        SchemeConfig {
            dt,
            t_end,
            stabilization: params.potential.c4(),
            stride: 1,
            blowup_threshold: 1e8,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// `min(1e-2, (1 + λ_max)^{-1/2})`.
    pub fn default_dt(grid: &Grid) -> f64 {
        (1.0 / (1.0 + grid.max_eigenvalue()).sqrt()).min(1e-2)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self, params: &Parameters) -> Result<()> {
        params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ChicError::invalid("dt", "must be > 0"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ChicError::invalid("t_end", "must be >= 0"));
        }
        if self.stride == 0 {
            return Err(ChicError::invalid("stride", "must be >= 1"));
        }
        if self.stabilization < params.potential.c4() {
            return Err(ChicError::invalid(
                "stabilization",
                format!(
                    "ell_s = {} is below the potential constant c4 = {}",
                    self.stabilization,
                    params.potential.c4()
                ),
            ));
        }
        Ok(())
    }
}

/// Per-mode unknowns: `[ϑ, q_1..q_d, χ, χ_t]`, or `[ϑ, χ, χ_t]` when `σ = 0`.
fn mode_width(grid: &Grid, params: &Parameters) -> usize {
    if params.sigma > 0.0 {
        grid.dim() + 3
    } else {
        3
    }
}

fn gather(s: &State, idx: usize, flux: bool) -> Vec<f64> {
    let mut y = vec![s.theta.values[idx]];
    if flux {
        y.extend(s.q.components.iter().map(|c| c[idx]));
    }
    y.push(s.chi.values[idx]);
    y.push(s.chi_t.values[idx]);
    y
}

fn scatter(s: &mut State, idx: usize, flux: bool, y: &[f64]) {
    let mut it = y.iter();
    s.theta.values[idx] = *it.next().unwrap();
    if flux {
        for c in s.q.components.iter_mut() {
            c[idx] = *it.next().unwrap();
        }
    }
    s.chi.values[idx] = *it.next().unwrap();
    s.chi_t.values[idx] = *it.next().unwrap();
}

/// Mode Jacobian with `χ`-stiffness `λ(λ + κ)`.
fn mode_jacobian(grid: &Grid, params: &Parameters, idx: usize, kappa: f64) -> DMatrix<f64> {
    let lam = grid.eigenvalues()[idx];
    let c = params.coupling_factor();
    let eps = params.epsilon;
    let width = mode_width(grid, params);
    let (ichi, iw) = (width - 2, width - 1);
    let mut j = DMatrix::zeros(width, width);
    j[(0, iw)] = -c;
    if params.sigma > 0.0 {
        for i in 0..grid.dim() {
            let g = grid.wavenumber(idx, i);
            j[(0, 1 + i)] = -g;
            j[(1 + i, 0)] = g / params.sigma;
            j[(1 + i, 1 + i)] = -1.0 / params.sigma;
        }
    } else {
        j[(0, 0)] = -lam;
    }
    j[(ichi, iw)] = 1.0;
    j[(iw, 0)] = c * lam / eps;
    j[(iw, ichi)] = -lam * (lam + kappa) / eps;
    j[(iw, iw)] = -(1.0 + params.alpha * lam) / eps;
    j
}

/// Linearly implicit stepper with precomputed per-mode resolvents.
pub struct ImexStepper<'g> {
    grid: &'g Grid,
    params: Parameters,
    scheme: SchemeConfig,
    width: usize,
    resolvent: Vec<DMatrix<f64>>,
    mean_decay: f64,
    flux_decay: f64,
}

impl<'g> ImexStepper<'g> {
    pub fn new(grid: &'g Grid, params: &Parameters, scheme: &SchemeConfig) -> Result<Self> {
        scheme.validate(params)?;
        let width = mode_width(grid, params);
        let dt = scheme.dt;
        let mut resolvent = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let j = mode_jacobian(grid, params, idx, scheme.stabilization);
            let m = DMatrix::identity(width, width) - j * dt;
            let inv = m
                .try_inverse()
                .ok_or_else(|| ChicError::invalid("dt", "singular implicit system"))?;
            resolvent.push(inv);
        }
        let flux_decay = if params.sigma > 0.0 {
            (-dt / params.sigma).exp()
        } else {
            0.0
        };
        Ok(ImexStepper {
            grid,
            params: params.clone(),
            scheme: scheme.clone(),
            width,
            resolvent,
            mean_decay: (-dt / params.epsilon).exp(),
            flux_decay,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.scheme.dt
    }

    /// Explicit part `P(φ(χ)) - ℓ_s χ` of the chemical potential.
    pub fn explicit_forcing(&self, chi: &ScalarCoeffs) -> ScalarCoeffs {
        let pot = &self.params.potential;
        let mut f = self.grid.map_dealiased(chi, |v| pot.phi(v));
        f.axpy(-self.scheme.stabilization, chi);
        f
    }

    /// One step where `forcing` replaces the explicit chemical-potential term.
    pub fn step_with_forcing(&self, s: &State, forcing: &ScalarCoeffs) -> State {
        let grid = self.grid;
        let flux = self.params.sigma > 0.0;
        let dt = self.scheme.dt;
        let eps = self.params.epsilon;
        let c = self.params.coupling_factor();
        let mut out = s.clone();
        out.time = s.time + dt;

        let w0 = s.chi_t.values[0];
        let dchi = eps * w0 * (1.0 - self.mean_decay);
        out.chi_t.values[0] = w0 * self.mean_decay;
        out.chi.values[0] = s.chi.values[0] + dchi;
        out.theta.values[0] = s.theta.values[0] - c * dchi;
        if flux {
            for comp in out.q.components.iter_mut() {
                comp[0] *= self.flux_decay;
            }
        }

        let iw = self.width - 1;
        for idx in 1..grid.len() {
            let lam = grid.eigenvalues()[idx];
            let mut y = gather(s, idx, flux);
            y[iw] -= dt * lam * forcing.values[idx] / eps;
            let r = &self.resolvent[idx];
            let ynew: Vec<f64> = (0..self.width)
                .map(|i| (0..self.width).map(|j| r[(i, j)] * y[j]).sum())
                .collect();
            scatter(&mut out, idx, flux, &ynew);
        }
        if !flux {
            out.q = grid.gradient(&out.theta).scale(-1.0);
        }
        out
    }

    pub fn step(&self, s: &State) -> Result<State> {
        let forcing = self.explicit_forcing(&s.chi);
        let next = self.step_with_forcing(s, &forcing);
        self.check_blowup(&next)?;
        Ok(next)
    }

    pub fn check_blowup(&self, s: &State) -> Result<()> {
        let norm = hsigma_quick(self.grid, s, self.params.sigma);
        if !norm.is_finite() || norm > self.scheme.blowup_threshold {
            return Err(ChicError::Blowup {
                step: (s.time / self.scheme.dt).round() as usize,
                time: s.time,
                norm,
            });
        }
        Ok(())
    }
}

fn hsigma_quick(grid: &Grid, s: &State, sigma: f64) -> f64 {
    let n2 = grid.norm_sq(&s.theta)
        + sigma * grid.flux_norm_sq(&s.q)
        + grid.spectral_sum(&s.chi, |l| 1.0 + l)
        + grid.spectral_sum(&s.chi_t, |l| 1.0 / (1.0 + l));
    n2.sqrt()
}

/// Free-function form of [`ImexStepper::step`].
pub fn step_imex(grid: &Grid, s: &State, scheme: &SchemeConfig, params: &Parameters) -> Result<State> {
    ImexStepper::new(grid, params, scheme)?.step(s)
}

/// Receives every state of a run; `snapshot` marks stored states.
pub trait Observer {
    fn observe(&mut self, state: &State, snapshot: bool) -> Result<()>;
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

pub fn integrate(
    grid: &Grid,
    init: &InitialData,
    scheme: &SchemeConfig,
    params: &Parameters,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    init.validate(grid)?;
    let stepper = ImexStepper::new(grid, params, scheme)?;
    integrate_from(&stepper, init.to_state(grid, params), observers)
}

/// Run `stepper` from `state` until the configured end time.
pub fn integrate_from(
    stepper: &ImexStepper<'_>,
    mut state: State,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    let scheme = stepper.scheme();
    let steps = scheme.steps();
    let t0 = state.time;
    let mut traj = Trajectory {
        times: vec![state.time],
        states: vec![state.clone()],
    };
    for o in observers.iter_mut() {
        o.observe(&state, true)?;
    }
    for n in 1..=steps {
        state = stepper.step(&state)?;
        state.time = t0 + n as f64 * scheme.dt;
        let snap = n % scheme.stride == 0 || n == steps;
        for o in observers.iter_mut() {
            o.observe(&state, snap)?;
        }
        if snap {
            traj.times.push(state.time);
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}

/// Right-hand side of the semi-discrete system (for `σ = 0` the flux rate is zero
/// and the flux is re-slaved to `-∇ϑ` after each update).
pub fn time_derivative(grid: &Grid, s: &State, params: &Parameters) -> StateRates {
    let c = params.coupling_factor();
    let eps = params.epsilon;
    let pot = &params.potential;
    let lam = grid.eigenvalues();

    let mut theta_t = s.chi_t.scale(-c);
    let q_t = if params.sigma > 0.0 {
        theta_t.axpy(-1.0, &grid.divergence(&s.q));
        let mut r = grid.gradient(&s.theta).scale(-1.0);
        r.axpy(-1.0, &s.q);
        r.scale(1.0 / params.sigma)
    } else {
        for (t, (th, l)) in theta_t.values.iter_mut().zip(s.theta.values.iter().zip(lam)) {
            *t -= l * th;
        }
        grid.zero_flux()
    };
    let phi = grid.map_dealiased(&s.chi, |v| pot.phi(v));
    let mut chi_tt = grid.zeros();
    for k in 0..grid.len() {
        let l = lam[k];
        let mu = l * s.chi.values[k] + params.alpha * s.chi_t.values[k] + phi.values[k] - c * s.theta.values[k];
        chi_tt.values[k] = -(s.chi_t.values[k] + l * mu) / eps;
    }
    StateRates {
        theta_t,
        q_t,
        chi_t: s.chi_t.clone(),
        chi_tt,
    }
}

fn advance(s: &State, r: &StateRates, h: f64) -> State {
    State {
        theta: {
            let mut v = s.theta.clone();
            v.axpy(h, &r.theta_t);
            v
        },
        q: {
            let mut v = s.q.clone();
            v.axpy(h, &r.q_t);
            v
        },
        chi: {
            let mut v = s.chi.clone();
            v.axpy(h, &r.chi_t);
            v
        },
        chi_t: {
            let mut v = s.chi_t.clone();
            v.axpy(h, &r.chi_tt);
            v
        },
        time: s.time + h,
    }
}

/// One classical RK4 step on the full semi-discrete system. Explicit, so it
/// needs `dt` well below the parabolic limit `~ε/(α λ_max)`.
pub fn step_oracle(grid: &Grid, s: &State, dt: f64, params: &Parameters) -> Result<State> {
    let slave = |mut x: State| {
        if params.sigma == 0.0 {
            x.q = grid.gradient(&x.theta).scale(-1.0);
        }
        x
    };
    let k1 = time_derivative(grid, s, params);
    let s2 = slave(advance(s, &k1, 0.5 * dt));
    let k2 = time_derivative(grid, &s2, params);
    let s3 = slave(advance(s, &k2, 0.5 * dt));
    let k3 = time_derivative(grid, &s3, params);
    let s4 = slave(advance(s, &k3, dt));
    let k4 = time_derivative(grid, &s4, params);
    let combo = |a: &ScalarCoeffs, b: &ScalarCoeffs, c: &ScalarCoeffs, d: &ScalarCoeffs| {
        let mut v = a.clone();
        v.axpy(2.0, b);
        v.axpy(2.0, c);
        v.axpy(1.0, d);
        v
    };
    let incr = StateRates {
        theta_t: combo(&k1.theta_t, &k2.theta_t, &k3.theta_t, &k4.theta_t),
        q_t: {
            let mut v = k1.q_t.clone();
            v.axpy(2.0, &k2.q_t);
            v.axpy(2.0, &k3.q_t);
            v.axpy(1.0, &k4.q_t);
            v
        },
        chi_t: combo(&k1.chi_t, &k2.chi_t, &k3.chi_t, &k4.chi_t),
        chi_tt: combo(&k1.chi_tt, &k2.chi_tt, &k3.chi_tt, &k4.chi_tt),
    };
    let out = slave(advance(s, &incr, dt / 6.0));
    if !out.is_finite() {
        return Err(ChicError::Blowup {
            step: 1,
            time: out.time,
            norm: f64::INFINITY,
        });
    }
    Ok(out)
}

fn linear_slope(params: &Parameters) -> Result<f64> {
    let pot = &params.potential;
    if !pot.is_linear() {
        return Err(ChicError::invalid(
            "potential",
            "the exact mode solution needs a linear nonlinearity",
        ));
    }
    Ok(pot.phi_coefficients().get(1).copied().unwrap_or(0.0))
}

/// Generator of the mode-`idx` linear system for a linear potential.
pub fn linear_mode_matrix(grid: &Grid, params: &Parameters, idx: usize) -> Result<DMatrix<f64>> {
    let slope = linear_slope(params)?;
    Ok(mode_jacobian(grid, params, idx, slope))
}

/// `exp(t J_k) y0` for the mode vector layout of the stepper.
pub fn linear_mode_solution(grid: &Grid, params: &Parameters, idx: usize, y0: &[f64], t: f64) -> Result<Vec<f64>> {
    let j = linear_mode_matrix(grid, params, idx)?;
    if y0.len() != j.nrows() {
        return Err(ChicError::DimensionMismatch {
            expected: j.nrows(),
            got: y0.len(),
        });
    }
    let e = (j * t).exp();
    Ok((e * DVector::from_column_slice(y0)).iter().copied().collect())
}

/// Exact solution of the discretized linear system at time `s0.time + t`.
pub fn linear_solution(grid: &Grid, params: &Parameters, s0: &State, t: f64) -> Result<State> {
    let flux = params.sigma > 0.0;
    let mut out = s0.clone();
    out.time = s0.time + t;
    for idx in 0..grid.len() {
        let y = linear_mode_solution(grid, params, idx, &gather(s0, idx, flux), t)?;
        scatter(&mut out, idx, flux, &y);
    }
    if !flux {
        out.q = grid.gradient(&out.theta).scale(-1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;

    fn params(sigma: f64) -> Parameters {
        Parameters::new(1.0, 0.5, sigma, Potential::quartic(1.0), true).unwrap()
    }

    #[test]
    fn constant_state_is_fixed() {
        let grid = Grid::new(2, 8).unwrap();
        let p = params(0.5);
        let scheme = SchemeConfig::new(0.01, 0.1, &p);
        let stepper = ImexStepper::new(&grid, &p, &scheme).unwrap();
        let s = State::constant(&grid, 0.3, 0.2);
        let next = stepper.step(&s).unwrap();
        assert!(next.sub(&s).chi.max_abs() < 1e-15);
        assert!(next.sub(&s).theta.max_abs() < 1e-15);
    }

    #[test]
    fn mean_mode_is_exact() {
        let grid = Grid::new(1, 8).unwrap();
        let p = params(0.5);
        let scheme = SchemeConfig::new(0.1, 1.0, &p);
        let stepper = ImexStepper::new(&grid, &p, &scheme).unwrap();
        let mut s = State::constant(&grid, 0.0, 0.0);
        s.chi_t.values[0] = 1.0;
        for _ in 0..10 {
            s = stepper.step(&s).unwrap();
        }
        let e = (-1.0_f64).exp();
        assert!((s.chi_t.values[0] - e).abs() < 1e-14);
        assert!((s.chi.values[0] - (1.0 - e)).abs() < 1e-14);
        assert!((s.theta.values[0] + s.chi.values[0]).abs() < 1e-15);
    }

    #[test]
    fn stabilization_below_c4_is_rejected() {
        let p = params(0.5);
        let mut scheme = SchemeConfig::new(0.01, 1.0, &p);
        scheme.stabilization = 0.5;
        assert!(scheme.validate(&p).is_err());
    }

    #[test]
    fn blowup_is_reported() {
        let grid = Grid::new(1, 8).unwrap();
        let p = params(0.5);
        let mut scheme = SchemeConfig::new(0.01, 1.0, &p);
        scheme.blowup_threshold = 1.0;
        let stepper = ImexStepper::new(&grid, &p, &scheme).unwrap();
        let s = State::constant(&grid, 10.0, 0.0);
        assert!(matches!(stepper.step(&s), Err(ChicError::Blowup { .. })));
    }

    #[test]
    fn linear_mode_generator_eigenvalues_are_stable() {
        let grid = Grid::new(1, 8).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::linear_test(1.0), true).unwrap();
        for idx in 1..grid.len() {
            let j = linear_mode_matrix(&grid, &p, idx).unwrap();
            for ev in j.complex_eigenvalues().iter() {
                assert!(ev.re < 0.0, "mode {idx}: {ev}");
            }
        }
        assert!(linear_mode_matrix(&grid, &params(0.5), 1).is_err());
    }

    #[test]
    fn rk4_and_imex_agree_on_short_run() {
        let grid = Grid::new(1, 16).unwrap();
        let p = params(0.5);
        let mut s = State::constant(&grid, 0.0, 0.1);
        s.chi.values[1] = 0.2;
        s.theta.values[2] = 0.1;
        let dt = 1e-4;
        let scheme = SchemeConfig::new(dt, 0.0, &p);
        let stepper = ImexStepper::new(&grid, &p, &scheme).unwrap();
        let mut a = s.clone();
        let mut b = s.clone();
        for _ in 0..100 {
            a = stepper.step(&a).unwrap();
            b = step_oracle(&grid, &b, dt, &p).unwrap();
        }
        let d = a.sub(&b);
        assert!(d.chi.max_abs() < 1e-4 && d.theta.max_abs() < 1e-4, "{}", d.chi.max_abs());
    }
}
