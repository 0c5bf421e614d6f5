//! Command drivers behind the `chic` binary. Every command writes its
//! artifacts into the configured output directory:
//!
//! | command      | files |
//! |--------------|-------|
//! | `simulate`   | `diagnostics.csv`, `trajectory.csv`, `final_state.json`, `summary.json`, `simulate.plot` |
//! | `equilibria` | `equilibria.json`, `loja.json`, `equilibria.csv`, `equilibria.plot` |
//! | `decompose`  | `split.csv`, `split.json`, `decompose.plot` |
//! | `verify`     | `verify.json`, `verify_report.csv`, one CSV per backing series, `verify.plot` |
//! | `fit-decay`  | `fit.json`, `fit_series.csv` |
//!
//! CSV floats carry 17 significant digits; identical config and seed give
//! byte-identical CSV files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::config::{RawConfig, RunConfig};
use crate::decomposition::{c_bound_ratios, choose_ell, decay_check, split_integrate, SplitRun};
use crate::dynamics::{integrate, Trajectory};
use crate::equilibrium::{
    equilibrium_from_data, hessian_modes, hessian_spectrum, loja_fit, solve_steady, EquilibriumSolution,
    LojaDirections, LojaOptions, SteadyOptions,
};
use crate::error::{ChicError, Result};
use crate::fit::{fit_decay, DecayFitResult};
use crate::functionals::{
    conserved, diagnostics_csv, energy_e, norm, state_norm, DiagnosticsContext, DiagnosticsObserver,
    DiagnosticsRecord, NormKind, StateNorm,
};
use crate::model::State;
use crate::spectral::{Grid, ScalarCoeffs};
use crate::verify::{run_verify, VerifyOptions, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Equilibria,
    Decompose,
    Verify,
    FitDecay,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Simulate,
        Command::Equilibria,
        Command::Decompose,
        Command::Verify,
        Command::FitDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Equilibria => "equilibria",
            Command::Decompose => "decompose",
            Command::Verify => "verify",
            Command::FitDecay => "fit-decay",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ChicError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ChicError::config(0, "<command>", format!("unknown command `{s}`")))
    }
}

/// Exit status of a finished command.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

/// Map an error to its exit status.
pub fn exit_code(err: &ChicError) -> i32 {
    match err {
        ChicError::Config { .. } | ChicError::InvalidParameter { .. } | ChicError::Json(_) | ChicError::Io(_) => {
            exit::CONFIG
        }
        ChicError::DimensionMismatch { .. }
        | ChicError::NonzeroMean { .. }
        | ChicError::Blowup { .. }
        | ChicError::NotConverged { .. }
        | ChicError::SingularHessian { .. }
        | ChicError::InsufficientSamples { .. }
        | ChicError::InvalidSeries { .. } => exit::NUMERICAL,
    }
}

#[derive(Debug, Clone, Default)]
pub struct CommandOutcome {
    /// Files written, in order.
    pub files: Vec<PathBuf>,
    /// `false` only for a verification run with failing checks.
    pub passed: bool,
    /// Human-readable result lines.
    pub lines: Vec<String>,
    /// The full report of a verification run.
    pub report: Option<VerifyReport>,
}

impl CommandOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::OK
        } else {
            exit::VERIFICATION
        }
    }
}

struct Writer {
    dir: PathBuf,
    out: CommandOutcome,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        Ok(Writer {
            dir: dir.to_path_buf(),
            out: CommandOutcome {
                passed: true,
                ..Default::default()
            },
        })
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        if self.out.files.is_empty() {
            std::fs::create_dir_all(&self.dir)?;
        }
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.out.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn line(&mut self, s: impl Into<String>) {
        self.out.lines.push(s.into());
    }
}

/// Run `cmd` with `cfg`, writing artifacts to `cfg.out_dir`.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<CommandOutcome> {
    let mut w = Writer::new(&cfg.out_dir)?;
    match cmd {
        Command::Simulate => simulate(cfg, &mut w)?,
        Command::Equilibria => equilibria(cfg, &mut w)?,
        Command::Decompose => decompose(cfg, &mut w)?,
        Command::Verify => verify(cfg, &mut w)?,
        Command::FitDecay => fit(cfg, &mut w)?,
    }
    Ok(w.out)
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn axis_names(dim: usize) -> &'static str {
    ["x", "x,y", "x,y,z"][dim - 1]
}

/// Nodal values of `θ, χ, χ_t` for every snapshot.
fn trajectory_csv(grid: &Grid, traj: &Trajectory) -> Result<String> {
    let nodes = grid.nodes();
    let dim = grid.dim();
    let mut rows = Vec::with_capacity(traj.states.len() * nodes.len());
    for s in &traj.states {
        let (th, ch, ct) = (grid.to_nodal(&s.theta)?, grid.to_nodal(&s.chi)?, grid.to_nodal(&s.chi_t)?);
        for (i, x) in nodes.iter().enumerate() {
            let mut r = vec![s.time];
            r.extend_from_slice(&x[..dim]);
            r.extend([th.values[i], ch.values[i], ct.values[i]]);
            rows.push(r);
        }
    }
    Ok(csv_rows(&format!("t,{},theta,chi,chi_t", axis_names(dim)), rows))
}

struct SimRun {
    grid: Grid,
    traj: Trajectory,
    records: Vec<DiagnosticsRecord>,
    limit: Option<EquilibriumSolution>,
}

/// Integrate with diagnostics; `M` is referenced to the equilibrium reached
/// from the final state (constant branch when that solve fails).
fn run_simulation(cfg: &RunConfig) -> Result<SimRun> {
    cfg.require_uniqueness()?;
    let grid = cfg.grid()?;
    let init = cfg.initial_data(&grid)?;
    let p = &cfg.params;
    let means = init.means(p);
    let m = means.chi_mass_inf;
    let e_const = energy_e(&grid, &grid.zeros(), &p.potential, m)?;
    let ctx = DiagnosticsContext {
        params: p.clone(),
        coeffs: cfg.coeffs,
        means,
        e_inf: e_const,
    };
    let mut obs = DiagnosticsObserver::new(&grid, ctx);
    let traj = integrate(&grid, &init, &cfg.scheme, p, &mut [&mut obs])?;
    let guess = traj.last().chi.deflated();
    let opts = SteadyOptions {
        tol: cfg.equilibria.tol,
        ..Default::default()
    };
    let limit = solve_steady(&grid, &p.potential, m, &guess, &opts).ok();
    if let Some(sol) = &limit {
        obs.rebase_energy(sol.energy);
    }
    let records = obs.into_records();
    Ok(SimRun {
        grid,
        traj,
        records,
        limit,
    })
}

const SIMULATE_PLOT: &str = r#"# gnuplot script for diagnostics.csv
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set logscale y
set multiplot layout 2,1
plot 'diagnostics.csv' using 1:5 with lines, '' using 1:6 with lines, '' using 1:8 with lines, '' using 1:15 with lines
unset logscale y
plot 'diagnostics.csv' using 1:10 with lines, '' using 1:11 with lines, '' using 1:14 with lines
unset multiplot
"#;

fn simulate(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let run = run_simulation(cfg)?;
    let grid = &run.grid;
    w.text("diagnostics.csv", &diagnostics_csv(&run.records))?;
    w.text("trajectory.csv", &trajectory_csv(grid, &run.traj)?)?;
    let last = run.traj.last();
    w.json("final_state.json", last)?;

    let init = cfg.initial_data(grid)?;
    let means = init.means(&cfg.params);
    let worst = run
        .traj
        .states
        .iter()
        .map(|s| conserved(s, &means))
        .fold((0.0_f64, 0.0_f64, 0.0_f64), |a, c| {
            (
                a.0.max(c.total_mass_defect),
                a.1.max(c.theta_mean_defect),
                a.2.max(c.chi_t_mean_defect),
            )
        });
    let summary = json!({
        "config": cfg,
        "steps": cfg.scheme.steps(),
        "snapshots": run.traj.states.len(),
        "means": {
            "theta_inf": means.theta_inf,
            "chi_mass_inf": means.chi_mass_inf,
            "total_mass": means.total_mass,
        },
        "max_defects": {
            "total_mass": worst.0,
            "theta_mean": worst.1,
            "chi_t_mean": worst.2,
        },
        "final": {
            "t": last.time,
            "norm_hsigma": state_norm(grid, last, cfg.params.sigma, StateNorm::Hsigma),
            "record": run.records.last(),
        },
        "limit_equilibrium": run.limit,
    });
    w.json("summary.json", &summary)?;
    w.text("simulate.plot", SIMULATE_PLOT)?;
    w.line(format!(
        "simulated {} steps to t = {}; max total-mass defect {:.3e}",
        cfg.scheme.steps(),
        last.time,
        worst.0
    ));
    Ok(())
}

#[derive(Serialize)]
struct Branch {
    label: String,
    solution: Option<EquilibriumSolution>,
    spectrum: Vec<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct LojaEntry {
    label: String,
    fit: Option<crate::equilibrium::LojaFit>,
    error: Option<String>,
}

fn equilibria(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let grid = cfg.grid()?;
    let init = cfg.initial_data(&grid)?;
    let (theta_inf, m) = equilibrium_from_data(&init, &cfg.params);
    let pot = &cfg.params.potential;
    let opts = SteadyOptions {
        tol: cfg.equilibria.tol,
        ..Default::default()
    };
    let mut guess = grid.zeros();
    guess.values[1] = cfg.equilibria.guess_amplitude;
    let guesses: [(&str, ScalarCoeffs); 3] = [
        ("constant", grid.zeros()),
        ("from_mode_1", guess),
        ("from_data", init.chi0.deflated()),
    ];
    let mut branches = Vec::new();
    let mut lojas = Vec::new();
    let mut profiles: Vec<(String, ScalarCoeffs)> = Vec::new();
    for (label, g) in guesses {
        match solve_steady(&grid, pot, m, &g, &opts) {
            Ok(mut sol) => {
                sol.theta_inf = theta_inf;
                let spectrum = hessian_spectrum(&grid, &sol.v_inf(), pot, m, cfg.equilibria.hessian_k)?;
                let lo = LojaOptions {
                    eta: cfg.equilibria.eta,
                    count: cfg.equilibria.loja_count,
                    seed: cfg.seed,
                    ..Default::default()
                };
                let entry = |name: String, lo: &LojaOptions| match loja_fit(&grid, pot, &sol, lo) {
                    Ok(f) => LojaEntry { label: name, fit: Some(f), error: None },
                    Err(e) => LojaEntry { label: name, fit: None, error: Some(e.to_string()) },
                };
                lojas.push(entry(label.to_string(), &lo));
                if sol.is_degenerate() && grid.len() <= 601 {
                    // The exponent is a worst case over directions; probe the null modes too.
                    let soft = hessian_modes(&grid, &sol.v_inf(), pot, m, sol.null_dim)?;
                    let lo = LojaOptions {
                        directions: LojaDirections::Given(soft.into_iter().map(|(_, z)| z).collect()),
                        ..lo.clone()
                    };
                    lojas.push(entry(format!("{label}/null_modes"), &lo));
                }
                w.line(format!(
                    "{label}: residual {:.3e}, energy {:.12e}, min Hessian eigenvalue {:.6e}",
                    sol.residual, sol.energy, sol.hessian_min_eig
                ));
                profiles.push((label.to_string(), sol.chi_inf.clone()));
                branches.push(Branch {
                    label: label.to_string(),
                    solution: Some(sol),
                    spectrum,
                    error: None,
                });
            }
            Err(e) => {
                if exit_code(&e) != exit::NUMERICAL {
                    return Err(e);
                }
                w.line(format!("{label}: {e}"));
                branches.push(Branch {
                    label: label.to_string(),
                    solution: None,
                    spectrum: Vec::new(),
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if branches.iter().all(|b| b.solution.is_none()) {
        return Err(ChicError::NotConverged {
            iterations: opts.max_newton,
            residual: f64::NAN,
        });
    }
    w.json(
        "equilibria.json",
        &json!({ "theta_inf": theta_inf, "m": m, "potential": pot, "branches": branches }),
    )?;
    w.json("loja.json", &lojas)?;

    let nodes = grid.nodes();
    let nodal: Vec<Vec<f64>> = profiles
        .iter()
        .map(|(_, c)| grid.to_nodal(c).map(|f| f.values))
        .collect::<Result<_>>()?;
    let header = format!(
        "{},{}",
        axis_names(grid.dim()),
        profiles.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",")
    );
    let rows = nodes.iter().enumerate().map(|(i, x)| {
        let mut r = x[..grid.dim()].to_vec();
        r.extend(nodal.iter().map(|f| f[i]));
        r
    });
    w.text("equilibria.csv", &csv_rows(&header, rows))?;
    let mut plot = String::from("# gnuplot script for equilibria.csv\nset datafile separator ','\nset key autotitle columnhead\n");
    if grid.dim() == 1 {
        let cols: Vec<String> = (0..profiles.len())
            .map(|k| format!("'equilibria.csv' using 1:{} with lines", k + 2))
            .collect();
        plot.push_str(&format!("plot {}\n", cols.join(", ")));
    } else {
        plot.push_str("set view map\nsplot 'equilibria.csv' using 1:2:3 with points palette\n");
    }
    w.text("equilibria.plot", &plot)
}

fn split_csv(run: &SplitRun) -> String {
    csv_rows(
        "t,recombination_defect,d_norm,grad_theta_c,div_q_c,chi_t_c,a_chi_c,curl_c,c_dissipation",
        (0..run.times.len()).map(|i| {
            let m = &run.c_monitor[i];
            vec![
                run.times[i],
                run.recombination_defect[i],
                run.d_norm[i],
                m.grad_theta,
                m.div_q,
                m.chi_t,
                m.a_chi,
                m.curl,
                run.c_dissipation[i],
            ]
        }),
    )
}

const DECOMPOSE_PLOT: &str = r#"# gnuplot script for split.csv
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set logscale y
plot 'split.csv' using 1:3 with lines, '' using 1:4 with lines, '' using 1:6 with lines, '' using 1:7 with lines
"#;

fn decompose(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    cfg.require_uniqueness()?;
    let grid = cfg.grid()?;
    let init = cfg.initial_data(&grid)?;
    let p = &cfg.params;
    let traj = integrate(&grid, &init, &cfg.scheme, p, &mut [])?;
    let ell = choose_ell(&grid, &traj, p, cfg.seed)?;
    let run = split_integrate(&grid, &init, &cfg.scheme, p, ell.ell)?;
    let decay = decay_check(&run);
    let ratios = c_bound_ratios(&run, 0.1);
    let recomb = run.recombination_defect.iter().cloned().fold(0.0, f64::max);
    let curl = run.c_monitor.iter().map(|m| m.curl).fold(0.0, f64::max);
    w.text("split.csv", &split_csv(&run))?;
    w.json(
        "split.json",
        &json!({
            "ell": ell,
            "max_recombination_defect": recomb,
            "decay": decay.as_ref().ok(),
            "decay_error": decay.as_ref().err().map(|e| e.to_string()),
            "c_bound_ratios": {
                "grad_theta": ratios[0], "div_q": ratios[1], "chi_t": ratios[2], "a_chi": ratios[3],
            },
            "max_curl_c": curl,
            "c_dissipation": run.c_dissipation.last(),
        }),
    )?;
    w.text("decompose.plot", DECOMPOSE_PLOT)?;
    w.line(format!("ell = {:.6}, max recombination defect {recomb:.3e}", ell.ell));
    match decay {
        Ok(d) => w.line(format!(
            "d-part decay rate {:.4e} (R^2 {:.4}){}",
            d.rate,
            d.r_squared,
            if d.falsified { " FALSIFIED" } else { "" }
        )),
        Err(e) => w.line(format!("d-part decay fit unavailable: {e}")),
    }
    Ok(())
}

const VERIFY_PLOT: &str = r#"# gnuplot script for the verification series
set datafile separator ','
set key autotitle columnhead
set logscale y
set multiplot layout 2,2
plot 'c2_balance.csv' using 1:2 with linespoints
plot 'c3_oracle.csv' using 2:3 with points
plot 'c6_split.csv' using 1:3 with lines
plot 'c8_separation.csv' using 2:3 with points
unset multiplot
"#;

fn verify(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let report = run_verify(&VerifyOptions {
        seed: cfg.seed,
        ..Default::default()
    })?;
    for c in &report.checks {
        w.line(format!(
            "{} {:<40} {:>12.4e} (threshold {:.3e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.value,
            c.threshold,
            c.detail
        ));
    }
    for k in 1..=9 {
        if let Some(ok) = report.criterion_passed(k) {
            w.line(format!("criterion {k}: {}", if ok { "pass" } else { "FAIL" }));
        }
    }
    for (name, contents) in &report.artifacts {
        w.text(name, contents)?;
    }
    w.json("verify.json", &report)?;
    w.text("verify.plot", VERIFY_PLOT)?;
    w.out.passed = report.all_passed();
    w.out.report = Some(report);
    Ok(())
}

/// Read column `column` against `t` from a CSV file with a header row.
pub fn read_series(path: &Path, column: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ChicError::config(0, "fit.input", format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| ChicError::config(0, "fit.column", format!("column `{name}` not in {}", path.display())))
    };
    let (it, iv) = (find("t")?, find(column)?);
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let get = |i: usize| {
            cells
                .get(i)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| ChicError::config(n + 2, column, format!("bad number in {}", path.display())))
        };
        t.push(get(it)?);
        v.push(get(iv)?);
    }
    Ok((t, v))
}

fn fit(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let f = &cfg.fit;
    let (source, t, v) = match &f.input {
        Some(path) => {
            let col = f.column.clone().unwrap_or_else(|| "norm_chit_Vdual".into());
            let (t, v) = read_series(path, &col)?;
            (format!("{}:{col}", path.display()), t, v)
        }
        None => {
            // ‖χ(t) - χ∞‖_{V*} along a fresh run, above the rounding floor.
            let run = run_simulation(cfg)?;
            let chi_inf = match &run.limit {
                Some(sol) => sol.chi_inf.clone(),
                None => {
                    return Err(ChicError::NotConverged {
                        iterations: 0,
                        residual: f64::NAN,
                    })
                }
            };
            let series: Vec<(f64, f64)> = run
                .traj
                .states
                .iter()
                .map(|s: &State| Ok((s.time, norm(&run.grid, &s.chi.sub(&chi_inf), NormKind::Vdual)?)))
                .collect::<Result<_>>()?;
            let peak = series.iter().map(|x| x.1).fold(0.0, f64::max);
            let (t, v) = series
                .into_iter()
                .filter(|(_, v)| *v > 1e-10 * peak)
                .unzip();
            ("simulation:chi_minus_chi_inf_Vdual".to_string(), t, v)
        }
    };
    let keep: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= f.t_min).collect();
    let tw: Vec<f64> = keep.iter().map(|&i| t[i]).collect();
    let vw: Vec<f64> = keep.iter().map(|&i| v[i]).collect();
    let result: DecayFitResult = fit_decay(&tw, &vw, f.model, f.tag)?;
    w.text(
        "fit_series.csv",
        &csv_rows("t,value", tw.iter().zip(&vw).map(|(a, b)| vec![*a, *b])),
    )?;
    w.json("fit.json", &json!({ "source": source, "tag": f.tag, "result": result }))?;
    w.line(format!(
        "{:?} model, exponent {:.6e}, implied rho {:.6}, R^2 {:.6}",
        result.model, result.exponent, result.implied_rho, result.r_squared
    ));
    Ok(())
}

/// Load a config file and apply CLI-style overrides; `seed` and `out` win over
/// `run.seed` and `output.dir`.
pub fn load_config(path: &Path, overrides: &[String], seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig> {
    let mut raw = RawConfig::load(path)?;
    for o in overrides {
        raw.set_override(o)?;
    }
    if let Some(s) = seed {
        raw.set_override(&format!("run.seed={s}"))?;
    }
    if let Some(dir) = out {
        raw.set_override(&format!("output.dir={}", dir.display()))?;
    }
    RunConfig::from_raw(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert_eq!(exit_code(&"run".parse::<Command>().unwrap_err()), exit::CONFIG);
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&ChicError::invalid("dt", "must be > 0")), exit::CONFIG);
        let blowup = ChicError::Blowup { step: 1, time: 0.1, norm: 1e9 };
        assert_eq!(exit_code(&blowup), exit::NUMERICAL);
        assert_eq!(exit_code(&ChicError::InvalidSeries { required: 3, got: 1 }), exit::NUMERICAL);
    }

    #[test]
    fn csv_rows_use_seventeen_digits() {
        let s = csv_rows("t,v", [vec![0.1, 1.0 / 3.0]]);
        assert_eq!(s, "t,v\n1.0000000000000001e-1,3.3333333333333331e-1\n");
    }

    #[test]
    fn read_series_picks_named_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "t,a,b\n0,1,2\n1,3,4\n\n").unwrap();
        assert_eq!(read_series(&p, "b").unwrap(), (vec![0.0, 1.0], vec![2.0, 4.0]));
        assert!(read_series(&p, "c").is_err());
        std::fs::write(&p, "t,a\n0,x\n").unwrap();
        assert!(matches!(read_series(&p, "a"), Err(ChicError::Config { line: 2, .. })));
    }
}
