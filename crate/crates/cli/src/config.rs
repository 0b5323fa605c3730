//! Scenario files: a flat TOML table of spectral, system, grid and output settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tlsme_core::observables::{classify_regime, RegimeLabel, RegimeThresholds};
use tlsme_core::{DensityMatrix, KernelMode, LowerLimit, Method, SpectralDensity, TimeGrid, C64};

use crate::error::{CliError, Result};

pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_N_STEPS: usize = 10_000;
pub const DEFAULT_ORACLE_MODES: usize = 40;
pub const DEFAULT_ORACLE_N_MAX: usize = 2;

/// Raw scenario as written in a config file. Every field is optional here so
/// that validation can name whichever one is missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    /// `lorentzian`, `spin_boson` or `flat`.
    pub model: Option<String>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub mass: Option<f64>,
    pub omega0: Option<f64>,
    pub omega_l: Option<f64>,
    pub detuning: Option<f64>,
    pub drive: Option<f64>,
    /// `excited`, `ground`, `plus` or `custom` (with `rho_ee`, `rho_eg_re`, `rho_eg_im`).
    pub initial: Option<String>,
    pub rho_ee: Option<f64>,
    pub rho_eg_re: Option<f64>,
    pub rho_eg_im: Option<f64>,
    pub t_end: Option<f64>,
    pub n_steps: Option<usize>,
    pub methods: Option<Vec<String>>,
    /// `minus_infinity` or `minus_omega_l` (with `omega_l`).
    pub lower_limit: Option<String>,
    pub output: Option<PathBuf>,
    pub oracle_modes: Option<usize>,
    pub oracle_n_max: Option<usize>,
    /// Half-width of a uniform oracle band around the spectral peak. Without it
    /// the bath is discretized over ±100 widths with a coverage check.
    pub oracle_band: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub modes: usize,
    pub n_max: usize,
    pub band: Option<f64>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: SpectralDensity,
    pub mode: KernelMode,
    /// Rate used by the Markovian equation.
    pub gamma: f64,
    pub detuning: f64,
    pub drive: f64,
    pub rho0: DensityMatrix,
    pub grid: TimeGrid,
    pub methods: Vec<Method>,
    pub oracle: OracleSettings,
    pub output: Option<PathBuf>,
}

impl Scenario {
    /// Regime label; only defined for the Lorentzian model.
    pub fn regime(&self) -> Option<RegimeLabel> {
        match self.spec {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                detuning,
            } => classify_regime(
                self.detuning,
                self.drive,
                gamma,
                width,
                detuning,
                RegimeThresholds::default(),
            )
            .ok(),
            _ => None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .and_then(|span| key_at(text, span.start))
                .or_else(|| backticked(e.message()))
                .unwrap_or_else(|| "config".to_string());
            CliError::config(field, e.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(out) = &config.output {
            if out.is_relative() {
                if let Some(dir) = path.parent() {
                    config.output = Some(dir.join(out));
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Sets a numeric parameter by its config key.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "gamma" => &mut self.gamma,
            "lambda" => &mut self.lambda,
            "delta" => &mut self.delta,
            "mass" => &mut self.mass,
            "omega0" => &mut self.omega0,
            "omega_l" => &mut self.omega_l,
            "detuning" => &mut self.detuning,
            "drive" => &mut self.drive,
            "t_end" => &mut self.t_end,
            "oracle_band" => &mut self.oracle_band,
            _ => return Err(CliError::config(key, "not a numeric scenario parameter")),
        };
        *slot = Some(value);
        Ok(())
    }

    pub fn validate(&self) -> Result<Scenario> {
        let positive = |field: &str, v: Option<f64>| -> Result<f64> {
            let v = v.ok_or_else(|| CliError::config(field, "missing"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::config(
                    field,
                    format!("must be positive, got {v}"),
                ))
            }
        };
        let finite = |field: &str, v: Option<f64>| -> Result<f64> {
            let v = v.ok_or_else(|| CliError::config(field, "missing"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::config(field, format!("must be finite, got {v}")))
            }
        };

        let gamma = positive("gamma", Some(self.gamma.unwrap_or(1.0)))?;
        let model = self.model.as_deref().unwrap_or("lorentzian");
        let spec = match model {
            "lorentzian" => SpectralDensity::Lorentzian {
                gamma,
                width: positive("lambda", self.lambda)?,
                detuning: finite("delta", Some(self.delta.unwrap_or(0.0)))?,
            },
            "spin_boson" => SpectralDensity::SpinBoson {
                mass: positive("mass", self.mass)?,
                width: positive("lambda", self.lambda)?,
                omega0: positive("omega0", self.omega0)?,
            },
            "flat" => SpectralDensity::FlatMemoryless { gamma },
            other => {
                return Err(CliError::config(
                    "model",
                    format!("unknown model `{other}` (lorentzian, spin_boson, flat)"),
                ))
            }
        };
        spec.validate().map_err(core_config)?;

        let lower_limit = match self.lower_limit.as_deref().unwrap_or("minus_infinity") {
            "minus_infinity" => LowerLimit::MinusInfinity,
            "minus_omega_l" => LowerLimit::MinusOmegaL(positive("omega_l", self.omega_l)?),
            other => {
                return Err(CliError::config(
                    "lower_limit",
                    format!("unknown lower limit `{other}` (minus_infinity, minus_omega_l)"),
                ))
            }
        };
        let mode = KernelMode::preferred(&spec, lower_limit);
        mode.validate(&spec).map_err(core_config)?;

        let detuning = finite("detuning", self.detuning)?;
        let drive = finite("drive", self.drive)?;
        if drive < 0.0 {
            return Err(CliError::config("drive", "must be non-negative"));
        }

        let rho0 = match self.initial.as_deref().unwrap_or("excited") {
            "excited" => DensityMatrix::excited(),
            "ground" => DensityMatrix::ground(),
            "plus" => DensityMatrix::plus(),
            "custom" => {
                let ee = finite("rho_ee", self.rho_ee)?;
                let eg = C64::new(
                    finite("rho_eg_re", Some(self.rho_eg_re.unwrap_or(0.0)))?,
                    finite("rho_eg_im", Some(self.rho_eg_im.unwrap_or(0.0)))?,
                );
                DensityMatrix::from_entries(ee, eg)
                    .map_err(|e| CliError::config("rho_ee", e.to_string()))?
            }
            other => {
                return Err(CliError::config(
                    "initial",
                    format!("unknown initial state `{other}` (excited, ground, plus, custom)"),
                ))
            }
        };

        let t_end = positive("t_end", Some(self.t_end.unwrap_or(DEFAULT_T_END)))?;
        let n_steps = self.n_steps.unwrap_or(DEFAULT_N_STEPS);
        if n_steps == 0 {
            return Err(CliError::config("n_steps", "must be at least 1"));
        }
        let grid = TimeGrid::new(0.0, t_end, n_steps).map_err(core_config)?;

        let labels = self
            .methods
            .as_ref()
            .ok_or_else(|| CliError::config("methods", "missing"))?;
        if labels.is_empty() {
            return Err(CliError::config(
                "methods",
                "at least one method is required",
            ));
        }
        let mut methods = Vec::new();
        for label in labels {
            let m = Method::from_label(label).ok_or_else(|| {
                CliError::config(
                    "methods",
                    format!(
                        "unknown method `{label}` (exact, nz, tcl, tcl_secular, markovian, oracle)"
                    ),
                )
            })?;
            if methods.contains(&m) {
                return Err(CliError::config(
                    "methods",
                    format!("`{label}` listed twice"),
                ));
            }
            methods.push(m);
        }
        methods.sort_by_key(|m| Method::ALL.iter().position(|a| a == m));
        if methods.contains(&Method::Oracle)
            && matches!(spec, SpectralDensity::FlatMemoryless { .. })
        {
            return Err(CliError::config(
                "methods",
                "the oracle needs a structured spectral density",
            ));
        }

        let oracle = OracleSettings {
            modes: self.oracle_modes.unwrap_or(DEFAULT_ORACLE_MODES),
            n_max: self.oracle_n_max.unwrap_or(DEFAULT_ORACLE_N_MAX),
            band: match self.oracle_band {
                Some(b) => Some(positive("oracle_band", Some(b))?),
                None => None,
            },
        };
        if oracle.modes < 2 {
            return Err(CliError::config("oracle_modes", "must be at least 2"));
        }
        if oracle.n_max == 0 {
            return Err(CliError::config("oracle_n_max", "must be at least 1"));
        }

        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "scenario".to_string()),
            spec,
            mode,
            gamma,
            detuning,
            drive,
            rho0,
            grid,
            methods,
            oracle,
            output: self.output.clone(),
        })
    }
}

fn core_config(e: tlsme_core::Error) -> CliError {
    match e {
        tlsme_core::Error::Config { field, reason } => CliError::config(field, reason),
        other => CliError::config("config", other.to_string()),
    }
}

/// Key on the line containing byte offset `pos`.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let start = text[..pos.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let (key, _) = line.split_once('=')?;
    let key = key.trim().trim_matches('"');
    (!key.is_empty()).then(|| key.to_string())
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        model = "lorentzian"
        lambda = 25.0
        delta = 0.01
        detuning = 0.3
        drive = 0.02
        methods = ["tcl", "exact"]
    "#;

    #[test]
    fn parses_and_orders_methods() {
        let s = ScenarioConfig::from_toml(BASE).unwrap().validate().unwrap();
        assert_eq!(s.methods, vec![Method::Exact, Method::Tcl]);
        assert_eq!(s.grid.n_steps, DEFAULT_N_STEPS);
        assert_eq!(s.rho0, DensityMatrix::excited());
    }

    #[test]
    fn empty_methods_is_a_config_error() {
        let text = BASE.replace(r#"["tcl", "exact"]"#, "[]");
        let err = ScenarioConfig::from_toml(&text)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(matches!(err, CliError::Config { ref field, .. } if field == "methods"));
    }

    #[test]
    fn errors_name_the_field() {
        let bad_type = BASE.replace("drive = 0.02", "drive = \"strong\"");
        match ScenarioConfig::from_toml(&bad_type).unwrap_err() {
            CliError::Config { field, .. } => assert_eq!(field, "drive"),
            e => panic!("{e}"),
        }
        let unknown = format!("{BASE}\nwidth = 3.0");
        match ScenarioConfig::from_toml(&unknown).unwrap_err() {
            CliError::Config { field, .. } => assert_eq!(field, "width"),
            e => panic!("{e}"),
        }
        let negative = BASE.replace("lambda = 25.0", "lambda = -1.0");
        match ScenarioConfig::from_toml(&negative)
            .unwrap()
            .validate()
            .unwrap_err()
        {
            CliError::Config { field, .. } => assert_eq!(field, "lambda"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn custom_state_must_be_physical() {
        let text = format!("{BASE}\ninitial = \"custom\"\nrho_ee = 0.5\nrho_eg_re = 0.9");
        let err = ScenarioConfig::from_toml(&text)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(matches!(err, CliError::Config { ref field, .. } if field == "rho_ee"));
    }

    #[test]
    fn toml_round_trip() {
        let c = ScenarioConfig::from_toml(BASE).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
