//! Splitting of a trajectory into an exponentially decaying part and a
//! regular part, driven by `ψ(r) = φ(r) + ℓr`:
//!
//! ```text
//! d-part: ε χ^d_tt + χ^d_t + A(Aχ^d + ψ(χ) - ψ(χ^c) + αχ^d_t - ϑ^d) = 0,  data = deflated data
//! c-part: ε χ^c_tt + χ^c_t + A(Aχ^c + ψ(χ^c) + αχ^c_t - ϑ^c) = ℓAχ,       data = means, q^c(0) = 0
//! ```
//!
//! Both parts share the heat equations of the full system. The forcings of
//! the two parts add up to `φ(χ)`, so `full = d + c` up to rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dynamics::{ImexStepper, SchemeConfig, Trajectory};
use crate::equilibrium::linear_fit;
use crate::error::{ChicError, Result};
use crate::functionals::{state_norm, StateNorm};
use crate::model::{InitialData, Parameters, State};
use crate::spectral::{Grid, ScalarCoeffs};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllChoice {
    pub ell: f64,
    /// `sup φ'(χ)` over the sampled snapshots and oversampled nodes.
    pub sup_dphi: f64,
    /// Minimum over sampled `(t, z)` of the quadratic form with `‖z‖ = 1`.
    pub certificate: f64,
    pub samples: usize,
    /// Smallest eigenvalue of `½A + (ℓ - 2c4) - φ'(χ(t))` over the sampled
    /// snapshots, when the grid is small enough for a dense solve.
    pub min_eig: Option<f64>,
}

/// Number of random test fields per certificate.
pub const CERTIFICATE_FIELDS: usize = 100;

fn sampled_indices(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        (0..len).collect()
    } else {
        (0..max).map(|i| i * (len - 1) / (max - 1)).collect()
    }
}

/// Quadratic form `½‖∇z‖² + (ℓ - 2c4)‖z‖² - ⟨φ'(χ)z, z⟩` with `φ'(χ)` given on
/// the oversampled nodes.
pub fn ell_form(grid: &Grid, curv: &[f64], shift: f64, z: &ScalarCoeffs) -> f64 {
    let zp = grid.padded_nodal(z);
    let pot: f64 = zp.iter().zip(curv).map(|(a, c)| c * a * a).sum::<f64>() / zp.len() as f64;
    0.5 * grid.spectral_sum(z, |l| l) + shift * grid.norm_sq(z) - pot
}

/// `ℓ = 2c4 + max(0, sup φ'(χ))`, certified on random mean-free fields.
pub fn choose_ell(grid: &Grid, traj: &Trajectory, params: &Parameters, seed: u64) -> Result<EllChoice> {
    if traj.states.is_empty() {
        return Err(ChicError::invalid("trajectory", "empty"));
    }
    let pot = &params.potential;
    let curvs: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| grid.padded_nodal(&s.chi).iter().map(|&y| pot.dphi(y)).collect())
        .collect();
    let sup = curvs
        .iter()
        .flat_map(|c| c.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let c4 = pot.c4();
    let ell = 2.0 * c4 + sup.max(0.0);
    let shift = ell - 2.0 * c4;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = sampled_indices(traj.states.len(), 16);
    let mut cert = f64::INFINITY;
    let mut samples = 0;
    for &i in &idx {
        for _ in 0..CERTIFICATE_FIELDS {
            let mut z = grid.zeros();
            for k in 1..grid.len() {
                let g: f64 = StandardNormal.sample(&mut rng);
                z.values[k] = g / (1.0 + grid.eigenvalues()[k]).sqrt();
            }
            let nz = grid.norm_sq(&z).sqrt();
            let z = z.scale(1.0 / nz);
            cert = cert.min(ell_form(grid, &curvs[i], shift, &z));
            samples += 1;
        }
    }
    let min_eig = if grid.len() <= 600 {
        Some(
            idx.iter()
                .map(|&i| ell_form_min_eig(grid, &curvs[i], shift))
                .fold(f64::INFINITY, f64::min),
        )
    } else {
        None
    };
    Ok(EllChoice {
        ell,
        sup_dphi: sup,
        certificate: cert,
        samples,
        min_eig,
    })
}

fn ell_form_min_eig(grid: &Grid, curv: &[f64], shift: f64) -> f64 {
    let n = grid.len();
    let w = grid.weights();
    let mut mat = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = grid.zeros();
        e.values[j] = 1.0 / w[j].sqrt();
        let mut p = grid.padded_nodal(&e);
        for (a, c) in p.iter_mut().zip(curv) {
            *a *= -c;
        }
        let h = grid.project_padded(&p);
        for i in 0..n {
            let diag = if i == j {
                0.5 * grid.eigenvalues()[i] + shift
            } else {
                0.0
            };
            mat[(i, j)] = w[i].sqrt() * h.values[i] + diag;
        }
    }
    let sym = (&mat + mat.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CMonitor {
    pub t: f64,
    /// `‖∇ϑ^c‖`
    pub grad_theta: f64,
    /// `‖∇·q^c‖`
    pub div_q: f64,
    /// `‖χ^c_t‖`
    pub chi_t: f64,
    /// `‖Aχ^c‖`
    pub a_chi: f64,
    /// Largest discrete curl coefficient of `q^c` (zero for `d = 1`).
    pub curl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Set when the fitted rate is not positive.
    pub falsified: bool,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitRun {
    pub ell: f64,
    pub times: Vec<f64>,
    /// `‖full - (d + c)‖_{ℋσ}` per snapshot.
    pub recombination_defect: Vec<f64>,
    /// `‖(ϑ^d, q^d, χ^d, χ^d_t)‖_{ℋσ}` per snapshot.
    pub d_norm: Vec<f64>,
    pub c_monitor: Vec<CMonitor>,
    /// `α∫₀^t ‖χ^c_t‖²` per snapshot.
    pub c_dissipation: Vec<f64>,
    pub full_trajectory: Trajectory,
    pub d_trajectory: Trajectory,
    pub c_trajectory: Trajectory,
}

fn curl_max(grid: &Grid, s: &State) -> f64 {
    grid.curl(&s.q)
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn c_monitor(grid: &Grid, s: &State) -> CMonitor {
    CMonitor {
        t: s.time,
        grad_theta: grid.spectral_sum(&s.theta, |l| l).sqrt(),
        div_q: grid.norm_sq(&grid.divergence(&s.q)).sqrt(),
        chi_t: grid.norm_sq(&s.chi_t).sqrt(),
        a_chi: grid.spectral_sum(&s.chi, |l| l * l).sqrt(),
        curl: curl_max(grid, s),
    }
}

/// Co-integrate the full, d- and c-systems in lockstep.
pub fn split_integrate(
    grid: &Grid,
    init: &InitialData,
    scheme: &SchemeConfig,
    params: &Parameters,
    ell: f64,
) -> Result<SplitRun> {
    init.validate(grid)?;
    if ell < params.potential.c4() {
        return Err(ChicError::invalid("ell", "must be at least c4"));
    }
    let stepper = ImexStepper::new(grid, params, scheme)?;
    let pot = &params.potential;
    let psi = |v: f64| pot.phi(v) + ell * v;
    let ls = scheme.stabilization;

    let mut full = init.to_state(grid, params);
    let mut d = init.deflated().to_state(grid, params);
    let mut c = State {
        theta: grid.constant(init.theta0.mean()),
        q: grid.zero_flux(),
        chi: grid.constant(init.chi0.mean()),
        chi_t: grid.constant(init.chi1.mean()),
        time: 0.0,
    };

    let mut run = SplitRun {
        ell,
        times: Vec::new(),
        recombination_defect: Vec::new(),
        d_norm: Vec::new(),
        c_monitor: Vec::new(),
        c_dissipation: Vec::new(),
        full_trajectory: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
        },
        d_trajectory: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
        },
        c_trajectory: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
        },
    };
    let mut c_diss = 0.0;
    let record = |run: &mut SplitRun, full: &State, d: &State, c: &State, c_diss: f64| {
        let defect = full.sub(&d.add(c));
        run.times.push(full.time);
        run.recombination_defect
            .push(state_norm(grid, &defect, params.sigma, StateNorm::Hsigma));
        run.d_norm.push(state_norm(grid, d, params.sigma, StateNorm::Hsigma));
        run.c_monitor.push(c_monitor(grid, c));
        run.c_dissipation.push(c_diss);
        for (traj, s) in [
            (&mut run.full_trajectory, full),
            (&mut run.d_trajectory, d),
            (&mut run.c_trajectory, c),
        ] {
            traj.times.push(s.time);
            traj.states.push(s.clone());
        }
    };
    record(&mut run, &full, &d, &c, c_diss);

    let steps = scheme.steps();
    for n in 1..=steps {
        let psi_full = grid.map_dealiased(&full.chi, psi);
        let psi_c = grid.map_dealiased(&c.chi, psi);

        let f_full = stepper.explicit_forcing(&full.chi);
        let mut f_d = psi_full.sub(&psi_c);
        f_d.axpy(-ls, &d.chi);
        let mut f_c = psi_c;
        f_c.axpy(-ell, &full.chi);
        f_c.axpy(-ls, &c.chi);

        let c_rate_prev = grid.norm_sq(&c.chi_t);
        let t = n as f64 * scheme.dt;
        full = stepper.step_with_forcing(&full, &f_full);
        d = stepper.step_with_forcing(&d, &f_d);
        c = stepper.step_with_forcing(&c, &f_c);
        full.time = t;
        d.time = t;
        c.time = t;
        for s in [&full, &d, &c] {
            stepper.check_blowup(s)?;
        }
        c_diss += 0.5 * scheme.dt * params.alpha * (c_rate_prev + grid.norm_sq(&c.chi_t));
        if n % scheme.stride == 0 || n == steps {
            record(&mut run, &full, &d, &c, c_diss);
        }
    }
    Ok(run)
}

/// Log-linear fit `v ≈ C e^{-ct}` over the points with `t ≥ t_min` and
/// `v ≥ floor` (values at rounding level carry no decay information).
pub fn decay_check_series(t: &[f64], v: &[f64], t_min: f64, floor: f64) -> Result<DecayCheck> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(v)
        .filter(|(ti, vi)| **ti >= t_min && **vi > floor && vi.is_finite())
        .map(|(ti, vi)| (*ti, vi.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(ChicError::InvalidSeries {
            required: 10,
            got: pts.len(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (a, b, r2) = linear_fit(&x, &y);
    let rate = if b.abs() < 1e-14 { 0.0 } else { -b };
    Ok(DecayCheck {
        rate,
        prefactor: a.exp(),
        r_squared: r2,
        falsified: rate <= 0.0,
        points: x.len(),
    })
}

/// Exponential-decay fit of the d-part norm on the tail of the run (after
/// the first tenth of the time window, above the rounding floor).
pub fn decay_check(run: &SplitRun) -> Result<DecayCheck> {
    let t_end = run.times.last().copied().unwrap_or(0.0);
    let peak = run.d_norm.iter().cloned().fold(0.0, f64::max);
    decay_check_series(&run.times, &run.d_norm, 0.1 * t_end, 1e-11 * peak.max(1e-300))
}

/// Ratio of the late-time maximum of each monitored c-norm to its peak over the
/// initial transient (the first `fraction` of the snapshots).
pub fn c_bound_ratios(run: &SplitRun, fraction: f64) -> [f64; 4] {
    let split = ((run.c_monitor.len() as f64 * fraction).ceil() as usize).clamp(1, run.c_monitor.len());
    let (head, tail) = run.c_monitor.split_at(split);
    let get = |m: &CMonitor, i: usize| [m.grad_theta, m.div_q, m.chi_t, m.a_chi][i];
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let h = head.iter().map(|m| get(m, i)).fold(0.0, f64::max);
        let t = tail.iter().map(|m| get(m, i)).fold(0.0, f64::max);
        *o = if t == 0.0 { 0.0 } else if h == 0.0 { f64::INFINITY } else { t / h };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;

    #[test]
    fn ell_rule_examples() {
        let grid = Grid::new(1, 16).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let s = State::constant(&grid, 0.0, 0.0);
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![s],
        };
        let e = choose_ell(&grid, &traj, &p, 1).unwrap();
        assert_eq!(e.ell, 2.0);
        assert!(e.certificate >= -1e-12);

        let s = State::constant(&grid, 0.0, 1.0);
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![s],
        };
        assert_eq!(choose_ell(&grid, &traj, &p, 1).unwrap().ell, 4.0);
    }

    #[test]
    fn synthetic_decay_series() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 5.0 * (-0.3 * x).exp()).collect();
        let d = decay_check_series(&t, &v, 0.0, 0.0).unwrap();
        assert!((d.rate - 0.3).abs() < 1e-12 && (d.prefactor - 5.0).abs() < 1e-10);
        assert!((d.r_squared - 1.0).abs() < 1e-12);
        let c = vec![2.0; 30];
        let d = decay_check_series(&t, &c, 0.0, 0.0).unwrap();
        assert_eq!(d.rate, 0.0);
        assert!(d.falsified);
    }

    #[test]
    fn mean_free_split_starts_from_full_data() {
        let grid = Grid::new(1, 16).unwrap();
        let p = Parameters::new(1.0, 0.5, 0.5, Potential::quartic(1.0), true).unwrap();
        let mut chi0 = grid.zeros();
        chi0.values[1] = 0.2;
        let init = InitialData::new(grid.zeros(), grid.zero_flux(), chi0, grid.zeros());
        let scheme = SchemeConfig::new(1e-2, 1.0, &p).with_stride(10);
        let run = split_integrate(&grid, &init, &scheme, &p, 4.0).unwrap();
        assert_eq!(run.d_trajectory.states[0], run.full_trajectory.states[0]);
        assert_eq!(run.c_trajectory.states[0].chi.max_abs(), 0.0);
        assert!(run.recombination_defect.iter().all(|&x| x <= 1e-12), "{:?}", run.recombination_defect);
    }
}
