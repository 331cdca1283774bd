//! `key = value` experiment configuration.
//!
//! Blank lines and anything after `#` are ignored. Keys are case-sensitive
//! and may appear at most once. Defaults:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `mode` | `torus` | `torus` or `ball` |
//! | `n` | `3` | boundary dimension, `>= 2` |
//! | `x_min`, `x_max` | `1e-3`, `0.5` | collar extent |
//! | `Nx`, `Ny` | `64`, `1` | grid size |
//! | `anisotropy` | `isotropic` | `isotropic` or `one_tangential` |
//! | `background` | `hyperbolic` | `hyperbolic`, `tangential_ramp`, `tangential_wave` |
//! | `beta` | `0` | background deformation strength |
//! | `dt`, `T` | `1e-3`, `1` | time step and final time |
//! | `scheme` | `imex_backward_euler` | or `explicit_rk2` |
//! | `boundary` | `dirichlet` | or `neumann` |
//! | `epsilon_close` | `0.1` | closeness flag threshold |
//! | `sample_every` | `10` | steps between samples |
//! | `snapshot_every` | `0` | snapshot triplet spacing, `0` disables |
//! | `perturbation` | `random_smooth` | `none`, `conformal`, `bump`, `random_smooth` |
//! | `w0` | `0.01` | conformal factor |
//! | `amplitude`, `center`, `width` | `0.01`, `0.1`, `0.5` | bump and random-smooth size |
//! | `rng` | `chacha8` | the only generator; streams come from `ChaCha8Rng::seed_from_u64` |
//! | `seed` | `0` | seed of every random draw |
//! | `mu`, `nu`, `a` | `0.01`, `1`, `0.5` | contraction size, weight, Hoelder exponent |
//! | `eta`, `epsilon`, `b_n` | `0`, `0.1`, `1` | energy-estimate constants |
//! | `fit_t0`, `fit_t1` | `1`, `5` | decay fit window |
//! | `picard_tol`, `picard_max_iter` | `1e-10`, `30` | Picard stopping rule |
//! | `identity_states` | `20` | random states for `check-identities` |
//! | `series_file`, `summary_file` | `series.csv`, `summary.txt` | output names |

use std::fmt;
use std::str::FromStr;

use collarflow::geometry::Background;
use collarflow::{Anisotropy, Boundary, CollarChart, Mode, Scheme};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}`: expected {expected}, got `{value}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("line {line}: `{key}`: {msg}")]
    Range { line: usize, key: String, msg: String },
    #[error("`{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    CheckIdentities,
    Duhamel,
    Stability,
    Spectrum,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::CheckIdentities => "check-identities",
            Kind::Duhamel => "duhamel",
            Kind::Stability => "stability",
            Kind::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    Conformal { w0: f64 },
    Bump { amplitude: f64, center: f64, width: f64 },
    RandomSmooth { amplitude: f64 },
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::Conformal { .. } => "conformal",
            Perturbation::Bump { .. } => "bump",
            Perturbation::RandomSmooth { .. } => "random_smooth",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub anisotropy: Anisotropy,
    pub background: Background,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub boundary: Boundary,
    pub epsilon_close: f64,
    pub sample_every: usize,
    pub snapshot_every: Option<usize>,
    pub perturbation: Perturbation,
    pub seed: u64,
    pub mu: f64,
    pub nu: f64,
    pub a: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub b_n: f64,
    pub fit_window: (f64, f64),
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub identity_states: usize,
    pub series_file: String,
    pub summary_file: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Torus,
            n: 3,
            x_min: 1e-3,
            x_max: 0.5,
            nx: 64,
            ny: 1,
            anisotropy: Anisotropy::Isotropic,
            background: Background::Hyperbolic,
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::ImexBackwardEuler,
            boundary: Boundary::Dirichlet,
            epsilon_close: 0.1,
            sample_every: 10,
            snapshot_every: None,
            perturbation: Perturbation::RandomSmooth { amplitude: 0.01 },
            seed: 0,
            mu: 0.01,
            nu: 1.0,
            a: 0.5,
            eta: 0.0,
            epsilon: 0.1,
            b_n: 1.0,
            fit_window: (1.0, 5.0),
            picard_tol: 1e-10,
            picard_max_iter: 30,
            identity_states: 20,
            series_file: "series.csv".into(),
            summary_file: "summary.txt".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn chart(&self) -> Result<CollarChart, ConfigError> {
        CollarChart::new(self.mode, self.n, self.x_min, self.x_max, self.nx, self.ny, self.anisotropy)
            .map_err(|e| ConfigError::Invalid { key: "chart".into(), msg: e.to_string() })
    }

    /// `(key, value)` pairs in a fixed order, used to echo the configuration.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let beta = match self.background {
            Background::Hyperbolic => 0.0,
            Background::TangentialRamp { beta } | Background::TangentialWave { beta } => beta,
        };
        let mut out = vec![
            ("mode", self.mode.name().to_string()),
            ("n", self.n.to_string()),
            ("x_min", num(self.x_min)),
            ("x_max", num(self.x_max)),
            ("Nx", self.nx.to_string()),
            ("Ny", self.ny.to_string()),
            ("anisotropy", self.anisotropy.name().to_string()),
            ("background", self.background.name().to_string()),
            ("beta", num(beta)),
            ("dt", num(self.dt)),
            ("T", num(self.t_final)),
            ("scheme", scheme_name(self.scheme).to_string()),
            ("boundary", self.boundary.name().to_string()),
            ("epsilon_close", num(self.epsilon_close)),
            ("sample_every", self.sample_every.to_string()),
            ("snapshot_every", self.snapshot_every.unwrap_or(0).to_string()),
            ("perturbation", self.perturbation.name().to_string()),
        ];
        match self.perturbation {
            Perturbation::None => {}
            Perturbation::Conformal { w0 } => out.push(("w0", num(w0))),
            Perturbation::Bump { amplitude, center, width } => {
                out.push(("amplitude", num(amplitude)));
                out.push(("center", num(center)));
                out.push(("width", num(width)));
            }
            Perturbation::RandomSmooth { amplitude } => out.push(("amplitude", num(amplitude))),
        }
        out.extend([
            ("rng", "chacha8".to_string()),
            ("seed", self.seed.to_string()),
            ("mu", num(self.mu)),
            ("nu", num(self.nu)),
            ("a", num(self.a)),
            ("eta", num(self.eta)),
            ("epsilon", num(self.epsilon)),
            ("b_n", num(self.b_n)),
            ("fit_t0", num(self.fit_window.0)),
            ("fit_t1", num(self.fit_window.1)),
            ("picard_tol", num(self.picard_tol)),
            ("picard_max_iter", self.picard_max_iter.to_string()),
            ("identity_states", self.identity_states.to_string()),
        ]);
        out
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::ExplicitRk2 => "explicit_rk2",
        Scheme::ImexBackwardEuler => "imex_backward_euler",
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn parse<T: FromStr>(&self, expected: &'static str) -> Result<T, ConfigError> {
        self.value.parse().map_err(|_| ConfigError::Type {
            line: self.line,
            key: self.key.into(),
            expected,
            value: self.value.into(),
        })
    }

    fn float(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.parse("a number")?;
        if !v.is_finite() {
            return Err(self.range("must be finite"));
        }
        Ok(v)
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v <= 0.0 {
            return Err(self.range("must be > 0"));
        }
        Ok(v)
    }

    fn non_negative(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v < 0.0 {
            return Err(self.range("must be >= 0"));
        }
        Ok(v)
    }

    fn count(&self, min: usize) -> Result<usize, ConfigError> {
        let v: usize = self.parse("a non-negative integer")?;
        if v < min {
            return Err(self.range(&format!("must be >= {min}")));
        }
        Ok(v)
    }

    fn choice<T: Copy>(&self, options: &[(&str, T)]) -> Result<T, ConfigError> {
        options
            .iter()
            .find(|(name, _)| *name == self.value)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.range(&format!("unknown value `{}` (expected one of {})", self.value, names.join(", ")))
            })
    }

    fn range(&self, msg: &str) -> ConfigError {
        ConfigError::Range { line: self.line, key: self.key.into(), msg: msg.into() }
    }
}

const KEYS: &[&str] = &[
    "mode", "n", "x_min", "x_max", "Nx", "Ny", "anisotropy", "background", "beta", "dt", "T",
    "scheme", "boundary", "epsilon_close", "sample_every", "snapshot_every", "perturbation", "w0",
    "amplitude", "center", "width", "rng", "seed", "mu", "nu", "a", "eta", "epsilon", "b_n",
    "fit_t0", "fit_t1", "picard_tol", "picard_max_iter", "identity_states", "series_file",
    "summary_file",
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{body}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate { line, key: key.into() });
        }
        entries.push(Entry { line, key, value });
    }

    let mut c = ExperimentConfig::default();
    let mut beta = 0.0;
    let mut background = "hyperbolic";
    let mut perturbation = "random_smooth";
    let (mut w0, mut amplitude, mut center, mut width) = (0.01, 0.01, 0.1, 0.5);
    for e in &entries {
        match e.key {
            "mode" => c.mode = e.choice(&[("torus", Mode::Torus), ("ball", Mode::Ball)])?,
            "n" => c.n = e.count(2)?,
            "x_min" => c.x_min = e.positive()?,
            "x_max" => c.x_max = e.positive()?,
            "Nx" => c.nx = e.count(8)?,
            "Ny" => c.ny = e.count(1)?,
            "anisotropy" => {
                c.anisotropy = e.choice(&[
                    ("isotropic", Anisotropy::Isotropic),
                    ("one_tangential", Anisotropy::OneTangential),
                ])?
            }
            "background" => {
                background = e.choice(&[
                    ("hyperbolic", "hyperbolic"),
                    ("tangential_ramp", "tangential_ramp"),
                    ("tangential_wave", "tangential_wave"),
                ])?
            }
            "beta" => beta = e.float()?,
            "dt" => c.dt = e.positive()?,
            "T" => c.t_final = e.non_negative()?,
            "scheme" => {
                c.scheme = e.choice(&[
                    ("imex_backward_euler", Scheme::ImexBackwardEuler),
                    ("explicit_rk2", Scheme::ExplicitRk2),
                ])?
            }
            "boundary" => {
                c.boundary = e.choice(&[("dirichlet", Boundary::Dirichlet), ("neumann", Boundary::Neumann)])?
            }
            "epsilon_close" => c.epsilon_close = e.positive()?,
            "sample_every" => c.sample_every = e.count(1)?,
            "snapshot_every" => c.snapshot_every = Some(e.count(0)?).filter(|k| *k > 0),
            "perturbation" => {
                perturbation = e.choice(&[
                    ("none", "none"),
                    ("conformal", "conformal"),
                    ("bump", "bump"),
                    ("random_smooth", "random_smooth"),
                ])?
            }
            "w0" => {
                w0 = e.float()?;
                if w0 <= -1.0 {
                    return Err(e.range("must be > -1 so that (1 + w0) h is a metric"));
                }
            }
            "amplitude" => amplitude = e.float()?,
            "center" => center = e.positive()?,
            "width" => width = e.positive()?,
            "rng" => {
                e.choice(&[("chacha8", ())])?;
            }
            "seed" => c.seed = e.parse("a non-negative integer")?,
            "mu" => c.mu = e.positive()?,
            "nu" => c.nu = e.non_negative()?,
            "a" => {
                c.a = e.float()?;
                if !(c.a > 0.0 && c.a < 1.0) {
                    return Err(e.range("must lie in (0, 1)"));
                }
            }
            "eta" => c.eta = e.non_negative()?,
            "epsilon" => c.epsilon = e.non_negative()?,
            "b_n" => c.b_n = e.positive()?,
            "fit_t0" => c.fit_window.0 = e.non_negative()?,
            "fit_t1" => c.fit_window.1 = e.positive()?,
            "picard_tol" => c.picard_tol = e.positive()?,
            "picard_max_iter" => c.picard_max_iter = e.count(1)?,
            "identity_states" => c.identity_states = e.count(1)?,
            "series_file" => c.series_file = file_name(e)?,
            "summary_file" => c.summary_file = file_name(e)?,
            other => unreachable!("key `{other}` passed the key check"),
        }
    }
    c.background = match background {
        "tangential_ramp" => Background::TangentialRamp { beta },
        "tangential_wave" => Background::TangentialWave { beta },
        _ => Background::Hyperbolic,
    };
    c.perturbation = match perturbation {
        "none" => Perturbation::None,
        "conformal" => Perturbation::Conformal { w0 },
        "bump" => Perturbation::Bump { amplitude, center, width },
        _ => Perturbation::RandomSmooth { amplitude },
    };
    if c.x_min >= c.x_max {
        return Err(ConfigError::Invalid {
            key: "x_min".into(),
            msg: format!("x_min = {} must be below x_max = {}", c.x_min, c.x_max),
        });
    }
    if c.fit_window.0 >= c.fit_window.1 {
        return Err(ConfigError::Invalid { key: "fit_t0".into(), msg: "fit window must satisfy fit_t0 < fit_t1".into() });
    }
    c.chart()?;
    Ok(c)
}

fn file_name(e: &Entry) -> Result<String, ConfigError> {
    if e.value.is_empty() || e.value.contains(['/', '\\']) {
        return Err(e.range("must be a plain file name"));
    }
    Ok(e.value.to_string())
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config("n=3\nmode=torus\nNx=128").unwrap();
        assert_eq!(c.nx, 128);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.perturbation, Perturbation::RandomSmooth { amplitude: 0.01 });
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config("# header\n\n  n = 4   # trailing\nseed=9\n").unwrap();
        assert_eq!((c.n, c.seed), (4, 9));
    }

    #[test]
    fn dimension_below_two_is_a_range_error() {
        let e = parse_config("n=1").unwrap_err();
        assert!(matches!(e, ConfigError::Range { line: 1, ref key, .. } if key == "n"), "{e}");
    }

    #[test]
    fn unknown_enum_value() {
        let e = parse_config("n=3\nmode=sphere").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("sphere"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert_eq!(
            parse_config("n=3\nnx=12").unwrap_err(),
            ConfigError::UnknownKey { line: 2, key: "nx".into() }
        );
        assert_eq!(
            parse_config("dt=1e-3\ndt=2e-3").unwrap_err(),
            ConfigError::Duplicate { line: 2, key: "dt".into() }
        );
    }

    #[test]
    fn type_mismatch_names_key_and_line() {
        let e = parse_config("\n\nNx=many").unwrap_err();
        assert!(matches!(e, ConfigError::Type { line: 3, ref key, .. } if key == "Nx"), "{e}");
    }

    #[test]
    fn chart_level_errors_surface() {
        assert!(parse_config("anisotropy=one_tangential\nNy=1").is_err());
        assert!(parse_config("x_min=0.6").is_err());
    }

    #[test]
    fn perturbation_parameters_attach_to_family() {
        let c = parse_config("perturbation=bump\namplitude=0.02\ncenter=0.05\nwidth=0.3").unwrap();
        assert_eq!(c.perturbation, Perturbation::Bump { amplitude: 0.02, center: 0.05, width: 0.3 });
        let c = parse_config("perturbation=conformal\nw0=0.2").unwrap();
        assert_eq!(c.perturbation, Perturbation::Conformal { w0: 0.2 });
    }
}
