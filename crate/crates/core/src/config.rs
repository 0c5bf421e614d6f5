//! Run configuration.
//!
//! Plain-text grammar (one setting per line):
//!
//! ```text
//! # comment            ; also a comment
//! [section]
//! key = value
//! ```
//!
//! Keys are addressed as `section.key`; overrides use the same form. A JSON
//! file `{"section": {"key": value, ...}, ...}` is equivalent.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dynamics::SchemeConfig;
use crate::error::{ChicError, Result};
use crate::functionals::FunctionalCoefficients;
use crate::model::{InitialData, Parameters, Potential};
use crate::spectral::{FluxCoeffs, Grid, ScalarCoeffs};

/// Every accepted key with its default (empty means "derived").
pub const KEYS: &[(&str, &str)] = &[
    ("grid.dim", "1"),
    ("grid.n", "64"),
    ("params.epsilon", "1"),
    ("params.alpha", "0.5"),
    ("params.sigma", "0.5"),
    ("params.potential", "quartic"),
    ("params.a", "1"),
    ("params.coefficients", ""),
    ("params.coupling", "true"),
    ("scheme.dt", "auto"),
    ("scheme.t_end", "10"),
    ("scheme.stride", "10"),
    ("scheme.stabilization", "auto"),
    ("scheme.blowup", "1e8"),
    ("initial.preset", "random"),
    ("initial.seed", ""),
    ("initial.amplitude", "0.1"),
    ("initial.smoothness", "1"),
    ("initial.mean", "0"),
    ("initial.theta_mean", "0"),
    ("initial.chi1_mean", "0"),
    ("initial.k", "1"),
    ("initial.theta", "0"),
    ("initial.chi", "0"),
    ("initial.delta", "inf"),
    ("functionals.beta", ""),
    ("functionals.gamma1", ""),
    ("functionals.gamma2", ""),
    ("functionals.mu", ""),
    ("functionals.nu", ""),
    ("functionals.c_alpha_nu", ""),
    ("equilibria.tol", "1e-12"),
    ("equilibria.guess_amplitude", "0.5"),
    ("equilibria.hessian_k", "5"),
    ("equilibria.loja_count", "200"),
    ("equilibria.eta", "auto"),
    ("fit.input", ""),
    ("fit.column", ""),
    ("fit.model", "auto"),
    ("fit.tag", "dual_norm"),
    ("fit.t_min", "0"),
    ("output.dir", "out"),
    ("run.seed", "1"),
    ("run.allow_alpha_zero", "false"),
];

/// Flat `section.key -> (value, line)` table; line 0 marks non-file sources.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ChicError::config(line, s, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ChicError::config(line, s, "expected `key = value`"))?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{}.{}", section, k.trim())
            };
            let v = v.split(" #").next().unwrap_or("").trim();
            let v = v.trim_matches('"').to_string();
            check_key(&key, line)?;
            if entries.insert(key.clone(), (v, line)).is_some() {
                return Err(ChicError::config(line, key, "duplicate key"));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let obj = v
            .as_object()
            .ok_or_else(|| ChicError::config(0, "<root>", "expected a JSON object of sections"))?;
        let mut entries = BTreeMap::new();
        for (sec, body) in obj {
            let body = body
                .as_object()
                .ok_or_else(|| ChicError::config(0, sec.clone(), "section must be an object"))?;
            for (k, val) in body {
                let key = format!("{sec}.{k}");
                check_key(&key, 0)?;
                let s = match val {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(a) => a
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                entries.insert(key, (s, 0));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChicError::config(0, path.display().to_string(), e.to_string()))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::parse_json(&text)
        } else {
            Self::parse_text(&text)
        }
    }

    /// Apply `section.key=value`.
    pub fn set_override(&mut self, entry: &str) -> Result<()> {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| ChicError::config(0, entry, "override must be `section.key=value`"))?;
        let key = k.trim().to_string();
        check_key(&key, 0)?;
        self.entries.insert(key, (v.trim().to_string(), 0));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn raw(&self, key: &str) -> (String, usize) {
        match self.entries.get(key) {
            Some((v, l)) => (v.clone(), *l),
            None => (default_of(key).to_string(), 0),
        }
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, line) = self.raw(key);
        v.parse::<f64>()
            .map_err(|_| ChicError::config(line, key, format!("expected a number, got `{v}`")))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        let (v, _) = self.raw(key);
        if v.is_empty() || v == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, line) = self.raw(key);
        v.parse::<usize>()
            .map_err(|_| ChicError::config(line, key, format!("expected a nonnegative integer, got `{v}`")))
    }

    fn u64(&self, key: &str) -> Result<u64> {
        let (v, line) = self.raw(key);
        v.parse::<u64>()
            .map_err(|_| ChicError::config(line, key, format!("expected an integer, got `{v}`")))
    }

    fn bool(&self, key: &str) -> Result<bool> {
        let (v, line) = self.raw(key);
        match v.as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(ChicError::config(line, key, format!("expected a boolean, got `{v}`"))),
        }
    }

    fn string(&self, key: &str) -> String {
        self.raw(key).0
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).1
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let (v, line) = self.raw(key);
        v.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| ChicError::config(line, key, format!("bad list entry `{s}`")))
            })
            .collect()
    }
}

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _)| *k == key).map_or("", |(_, d)| d)
}

fn check_key(key: &str, line: usize) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(ChicError::config(line, key, "unknown key"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialPreset {
    Constant { theta: f64, chi: f64 },
    SingleMode { k: [usize; 3], amplitude: f64, mean: f64 },
    Random {
        seed: u64,
        amplitude: f64,
        /// Decay exponent `s` of the coefficients.
        smoothness: f64,
        mean: f64,
        theta_mean: f64,
        chi1_mean: f64,
    },
}

/// Smooth random field: coefficient `k` is `N(0,1)·amplitude/(1 + λ_k)^s`.
pub fn random_coeffs(grid: &Grid, rng: &mut ChaCha8Rng, amplitude: f64, mean: f64, s: f64) -> ScalarCoeffs {
    let mut v = grid.zeros();
    for k in 1..grid.len() {
        let g: f64 = StandardNormal.sample(rng);
        v.values[k] = amplitude * g / (1.0 + grid.eigenvalues()[k]).powf(s);
    }
    v.values[0] = mean;
    v
}

pub fn random_flux(grid: &Grid, rng: &mut ChaCha8Rng, amplitude: f64, s: f64) -> FluxCoeffs {
    let mut q = grid.zero_flux();
    for comp in 0..grid.dim() {
        for idx in 0..grid.len() {
            let g: f64 = StandardNormal.sample(rng);
            q.components[comp][idx] = amplitude * g / (1.0 + grid.flux_eigenvalue(comp, idx)).powf(s);
        }
    }
    q
}

impl InitialPreset {
    pub fn build(&self, grid: &Grid) -> Result<InitialData> {
        Ok(match *self {
            InitialPreset::Constant { theta, chi } => {
                InitialData::new(grid.constant(theta), grid.zero_flux(), grid.constant(chi), grid.zeros())
            }
            InitialPreset::SingleMode { k, amplitude, mean } => {
                let mut chi0 = grid.constant(mean);
                let idx = mode_index(grid, k)?;
                chi0.values[idx] += amplitude;
                InitialData::new(grid.zeros(), grid.zero_flux(), chi0, grid.zeros())
            }
            InitialPreset::Random {
                seed,
                amplitude,
                smoothness,
                mean,
                theta_mean,
                chi1_mean,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta0 = random_coeffs(grid, &mut rng, amplitude, theta_mean, smoothness);
                let q0 = random_flux(grid, &mut rng, amplitude, smoothness);
                let chi0 = random_coeffs(grid, &mut rng, amplitude, mean, smoothness);
                let chi1 = random_coeffs(grid, &mut rng, amplitude, chi1_mean, smoothness);
                InitialData::new(theta0, q0, chi0, chi1)
            }
        })
    }
}

fn mode_index(grid: &Grid, k: [usize; 3]) -> Result<usize> {
    (0..grid.len())
        .find(|&i| grid.mode(i) == k)
        .ok_or_else(|| ChicError::config(0, "initial.k", format!("mode {k:?} not on the grid")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriaSettings {
    pub tol: f64,
    pub guess_amplitude: f64,
    pub hessian_k: usize,
    pub loja_count: usize,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSettings {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub model: crate::fit::DecayModel,
    pub tag: crate::fit::SeriesTag,
    pub t_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub params: Parameters,
    pub scheme: SchemeConfig,
    pub initial: InitialPreset,
    pub delta: f64,
    pub coeffs: FunctionalCoefficients,
    pub equilibria: EquilibriaSettings,
    pub fit: FitSettings,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub allow_alpha_zero: bool,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let dim = raw.usize("grid.dim")?;
        let n = raw.usize("grid.n")?;
        let grid = Grid::new(dim, n).map_err(|e| ChicError::config(raw.line("grid.n"), "grid", e.to_string()))?;

        let a = raw.f64("params.a")?;
        let kind = raw.string("params.potential");
        let potential = match kind.as_str() {
            "quartic" => Potential::quartic(a),
            "linear_test" => Potential::linear_test(a),
            "polynomial" => Potential::polynomial(raw.f64_list("params.coefficients")?).map_err(|e| {
                ChicError::config(raw.line("params.coefficients"), "params.coefficients", e.to_string())
            })?,
            other => {
                return Err(ChicError::config(
                    raw.line("params.potential"),
                    "params.potential",
                    format!("unknown potential `{other}` (quartic, polynomial, linear_test)"),
                ))
            }
        };
        let params = Parameters {
            epsilon: raw.f64("params.epsilon")?,
            alpha: raw.f64("params.alpha")?,
            sigma: raw.f64("params.sigma")?,
            potential,
            coupling: raw.bool("params.coupling")?,
        };
        params.validate().map_err(|e| ChicError::config(0, "params", e.to_string()))?;

        let t_end = raw.f64("scheme.t_end")?;
        // The automatic step is shrunk so that a whole number of steps lands on t_end.
        let dt = match raw.opt_f64("scheme.dt")? {
            Some(dt) => dt,
            None if t_end > 0.0 && t_end.is_finite() => {
                t_end / (t_end / SchemeConfig::default_dt(&grid)).ceil()
            }
            None => SchemeConfig::default_dt(&grid),
        };
        let mut scheme = SchemeConfig::new(dt, t_end, &params);
        scheme.stride = raw.usize("scheme.stride")?;
        if let Some(ls) = raw.opt_f64("scheme.stabilization")? {
            scheme.stabilization = ls;
        }
        scheme.blowup_threshold = raw.f64("scheme.blowup")?;
        scheme
            .validate(&params)
            .map_err(|e| ChicError::config(raw.line("scheme.dt"), "scheme", e.to_string()))?;

        let seed = raw.u64("run.seed")?;
        let preset = raw.string("initial.preset");
        let initial = match preset.as_str() {
            "constant" => InitialPreset::Constant {
                theta: raw.f64("initial.theta")?,
                chi: raw.f64("initial.chi")?,
            },
            "single_mode" => {
                let ks = raw.f64_list("initial.k")?;
                if ks.is_empty() || ks.len() > dim || ks.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
                    return Err(ChicError::config(
                        raw.line("initial.k"),
                        "initial.k",
                        "expected up to `dim` nonnegative integers",
                    ));
                }
                let mut k = [0; 3];
                for (i, x) in ks.iter().enumerate() {
                    k[i] = *x as usize;
                }
                InitialPreset::SingleMode {
                    k,
                    amplitude: raw.f64("initial.amplitude")?,
                    mean: raw.f64("initial.mean")?,
                }
            }
            "random" => InitialPreset::Random {
                seed: if raw.get("initial.seed").is_some_and(|s| !s.is_empty()) {
                    raw.u64("initial.seed")?
                } else {
                    seed
                },
                amplitude: raw.f64("initial.amplitude")?,
                smoothness: raw.f64("initial.smoothness")?,
                mean: raw.f64("initial.mean")?,
                theta_mean: raw.f64("initial.theta_mean")?,
                chi1_mean: raw.f64("initial.chi1_mean")?,
            },
            other => {
                return Err(ChicError::config(
                    raw.line("initial.preset"),
                    "initial.preset",
                    format!("unknown preset `{other}` (constant, single_mode, random)"),
                ))
            }
        };

        let mut coeffs = FunctionalCoefficients::defaults(params.sigma, params.alpha);
        for (key, slot) in [
            ("functionals.beta", &mut coeffs.beta),
            ("functionals.gamma1", &mut coeffs.gamma1),
            ("functionals.gamma2", &mut coeffs.gamma2),
            ("functionals.mu", &mut coeffs.mu),
            ("functionals.nu", &mut coeffs.nu),
            ("functionals.c_alpha_nu", &mut coeffs.c_alpha_nu),
        ] {
            if let Some(v) = raw.opt_f64(key)? {
                if v < 0.0 {
                    return Err(ChicError::config(raw.line(key), key, "must be >= 0"));
                }
                *slot = v;
            }
        }

        let model = match raw.string("fit.model").as_str() {
            "auto" => crate::fit::DecayModel::Auto,
            "exponential" => crate::fit::DecayModel::Exponential,
            "algebraic" => crate::fit::DecayModel::Algebraic,
            other => {
                return Err(ChicError::config(
                    raw.line("fit.model"),
                    "fit.model",
                    format!("unknown model `{other}`"),
                ))
            }
        };
        let tag = match raw.string("fit.tag").as_str() {
            "dual_norm" => crate::fit::SeriesTag::DualNorm,
            "theta_l2" => crate::fit::SeriesTag::ThetaL2,
            other => {
                return Err(ChicError::config(raw.line("fit.tag"), "fit.tag", format!("unknown tag `{other}`")))
            }
        };
        let input = raw.string("fit.input");
        let column = raw.string("fit.column");

        let cfg = RunConfig {
            dim,
            n,
            params,
            scheme,
            initial,
            delta: raw.f64("initial.delta")?,
            coeffs,
            equilibria: EquilibriaSettings {
                tol: raw.f64("equilibria.tol")?,
                guess_amplitude: raw.f64("equilibria.guess_amplitude")?,
                hessian_k: raw.usize("equilibria.hessian_k")?,
                loja_count: raw.usize("equilibria.loja_count")?,
                eta: raw.opt_f64("equilibria.eta")?,
            },
            fit: FitSettings {
                input: (!input.is_empty()).then(|| PathBuf::from(input)),
                column: (!column.is_empty()).then_some(column),
                model,
                tag,
                t_min: raw.f64("fit.t_min")?,
            },
            out_dir: PathBuf::from(raw.string("output.dir")),
            seed,
            allow_alpha_zero: raw.bool("run.allow_alpha_zero")?,
        };
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    pub fn initial_data(&self, grid: &Grid) -> Result<InitialData> {
        let init = self.initial.build(grid)?.with_delta(self.delta);
        init.validate(grid)
            .map_err(|e| ChicError::config(0, "initial", e.to_string()))?;
        Ok(init)
    }

    /// Commands whose claims rely on uniqueness need `α > 0`.
    pub fn require_uniqueness(&self) -> Result<()> {
        if self.params.alpha == 0.0 && !self.allow_alpha_zero {
            return Err(ChicError::config(
                0,
                "params.alpha",
                "alpha = 0 voids uniqueness; set run.allow_alpha_zero = true to proceed",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_are_equivalent() {
        let text = "[grid]\ndim = 2\nn = 16\n[params]\nalpha = 0.25 # viscosity\npotential = quartic\na = 2\n";
        let json = r#"{"grid": {"dim": 2, "n": 16}, "params": {"alpha": 0.25, "potential": "quartic", "a": 2}}"#;
        let a = RunConfig::from_raw(&RawConfig::parse_text(text).unwrap()).unwrap();
        let b = RunConfig::from_raw(&RawConfig::parse_json(json).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.alpha, 0.25);
        assert_eq!(a.dim, 2);
    }

    #[test]
    fn errors_carry_line_and_key() {
        let err = RawConfig::parse_text("[grid]\nn = 16\nbogus = 1\n").unwrap_err();
        match err {
            ChicError::Config { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "grid.bogus");
            }
            other => panic!("{other}"),
        }
        let raw = RawConfig::parse_text("[params]\n\nalpha = abc\n").unwrap();
        match RunConfig::from_raw(&raw).unwrap_err() {
            ChicError::Config { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "params.alpha");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn overrides_and_alpha_guard() {
        let mut raw = RawConfig::parse_text("").unwrap();
        raw.set_override("params.alpha=0").unwrap();
        let cfg = RunConfig::from_raw(&raw).unwrap();
        assert!(cfg.require_uniqueness().is_err());
        raw.set_override("run.allow_alpha_zero=true").unwrap();
        assert!(RunConfig::from_raw(&raw).unwrap().require_uniqueness().is_ok());
        assert!(raw.set_override("nope").is_err());
    }

    #[test]
    fn presets_build() {
        let grid = Grid::new(1, 16).unwrap();
        let c = InitialPreset::Constant { theta: 0.3, chi: 0.2 }.build(&grid).unwrap();
        assert_eq!(c.theta0.values[0], 0.3);
        let s = InitialPreset::SingleMode {
            k: [2, 0, 0],
            amplitude: 0.1,
            mean: 0.0,
        }
        .build(&grid)
        .unwrap();
        assert_eq!(s.chi0.values[2], 0.1);
        let r1 = InitialPreset::Random {
            seed: 3,
            amplitude: 0.1,
            smoothness: 1.0,
            mean: 0.2,
            theta_mean: 0.0,
            chi1_mean: 0.0,
        };
        assert_eq!(r1.build(&grid).unwrap(), r1.build(&grid).unwrap());
        assert_eq!(r1.build(&grid).unwrap().chi0.values[0], 0.2);
    }
}
