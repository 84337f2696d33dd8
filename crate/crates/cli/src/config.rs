//! Flat `key = value` run configuration.
//!
//! Values are resolved in layers, later layers winning:
//! built-in defaults, `--preset`, `--config` file, `AMM_TRACK_<KEY>`
//! environment variables, then `--set key=value` flags and the dedicated
//! `--seed` / `--format` flags. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use amm_track_core::cpmm::{ExecCost, Pool};
use amm_track_core::simulate::{
    scenario_shift_by, MechScenario, ReducedScenario, ServiceLevel, ShiftSizes,
};
use amm_track_core::stability::ServicePair;
use amm_track_core::stochastic::DisturbanceSpec;

use crate::CliError;

pub const ENV_PREFIX: &str = "AMM_TRACK_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SimulateReduced,
    SimulateCpmm,
    Sweep,
    Calibrate,
    Certify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SimulateReduced => "simulate-reduced",
            Command::SimulateCpmm => "simulate-cpmm",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Certify => "certify",
        }
    }

    pub fn default_preset(self) -> &'static str {
        match self {
            Command::Sweep => "reduced",
            _ => "baseline",
        }
    }
}

const DISTURBANCE_KEYS: [&str; 5] = ["disturbance", "sigma", "laplace_scale", "shock_prob", "shock_scale"];
const REDUCED_KEYS: [&str; 11] = [
    "lambda", "p", "level", "x_star", "gamma_bar", "x0", "horizon", "seed", "shift_lambda", "shift_p", "shift_floor",
];
const CPMM_KEYS: [&str; 7] = ["reserve_x", "reserve_y", "eta", "c_f", "depth_scale", "horizon", "seed"];

fn reduced_defaults(level: ServiceLevel) -> Vec<(&'static str, String)> {
    let sc = ReducedScenario::baseline();
    let shift = ShiftSizes::default();
    let level = match level {
        ServiceLevel::Strong => "strong",
        ServiceLevel::Baseline => "baseline",
        ServiceLevel::Weak => "weak",
    };
    let mut out = vec![
        ("lambda", fmt(sc.pair.lambda)),
        ("p", fmt(sc.pair.p)),
        ("level", level.to_string()),
        ("x_star", fmt(sc.x_star)),
        ("gamma_bar", fmt(sc.gamma_bar)),
        ("x0", fmt(sc.x0)),
        ("horizon", sc.horizon.to_string()),
        ("seed", sc.seed.to_string()),
        ("shift_lambda", fmt(shift.lambda)),
        ("shift_p", fmt(shift.p)),
        ("shift_floor", fmt(shift.floor)),
    ];
    out.extend(disturbance_defaults(&sc.disturbance));
    out
}

fn cpmm_defaults(depth: f64) -> Vec<(&'static str, String)> {
    let sc = MechScenario::baseline();
    let mut out = vec![
        ("reserve_x", fmt(sc.pool0.reserve_x)),
        ("reserve_y", fmt(sc.pool0.reserve_y)),
        ("eta", fmt(sc.pool0.eta)),
        ("c_f", fmt(sc.cost.c_f)),
        ("depth_scale", fmt(depth)),
        ("horizon", sc.horizon.to_string()),
        ("seed", sc.seed.to_string()),
    ];
    out.extend(disturbance_defaults(&sc.disturbance));
    out
}

fn disturbance_defaults(spec: &DisturbanceSpec) -> Vec<(&'static str, String)> {
    let (sigma, prob, scale) = match *spec {
        DisturbanceSpec::GaussianWithShocks { sigma, shock_prob, shock_scale } => (sigma, shock_prob, shock_scale),
        _ => (2e-3, 0.01, 10.0),
    };
    vec![
        ("disturbance", "gaussian_with_shocks".to_string()),
        ("sigma", fmt(sigma)),
        ("laplace_scale", fmt(sigma)),
        ("shock_prob", fmt(prob)),
        ("shock_scale", fmt(scale)),
    ]
}

/// 7 x 7 sweep grid centred on the baseline pair (0.5, 0.729), spanning
/// as much of (0, 1] as equal spacing allows.
const LAMBDA_GRID: &str = "0.05,0.2,0.35,0.5,0.65,0.8,0.95";
const P_GRID: &str = "0.459,0.549,0.639,0.729,0.819,0.909,0.999";
const PHAT_GRID: &str = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1";

fn preset_values(command: Command, preset: &str) -> Result<Vec<(&'static str, String)>, CliError> {
    let unknown = || CliError::Config(format!("unknown preset `{preset}` for {}", command.name()));
    let values = match command {
        Command::SimulateReduced => {
            let level: ServiceLevel = preset.parse().map_err(|_| unknown())?;
            let mut v = reduced_defaults(level);
            v.push(("format", "csv".into()));
            v
        }
        Command::SimulateCpmm => {
            let depth = match preset {
                "baseline" => 1.0,
                "shallow" => 0.5,
                "deep" => 2.0,
                _ => return Err(unknown()),
            };
            let mut v = cpmm_defaults(depth);
            v.push(("format", "csv".into()));
            v
        }
        Command::Sweep => {
            let mut v = match preset {
                "reduced" => {
                    let base = ReducedScenario::baseline();
                    let mut v = reduced_defaults(ServiceLevel::Baseline);
                    v.push(("lambda_grid", LAMBDA_GRID.into()));
                    v.push(("p_grid", P_GRID.into()));
                    v.push(("radius", fmt(10.0 * base.x_star)));
                    v
                }
                "cpmm" => {
                    let mut v = cpmm_defaults(1.0);
                    v.push(("depth_grid", "0.5,1,2,4".into()));
                    v.push(("cost_grid", "0,0.06,0.12,0.24".into()));
                    v
                }
                _ => return Err(unknown()),
            };
            v.push(("target", preset.to_string()));
            v.push(("format", "csv".into()));
            v
        }
        Command::Calibrate => {
            if preset != "baseline" {
                return Err(unknown());
            }
            vec![("input", String::new()), ("phat_grid", PHAT_GRID.into()), ("pairs", String::new())]
        }
        Command::Certify => {
            let base = ReducedScenario::baseline();
            let mut v = match preset {
                "baseline" => vec![
                    ("lambda", fmt(base.pair.lambda)),
                    ("p", fmt(base.pair.p)),
                    ("gamma_bar", fmt(base.gamma_bar)),
                    ("radius", fmt(10.0 * base.x_star)),
                ],
                _ => return Err(unknown()),
            };
            v.push(("alpha_cap", String::new()));
            v.extend(disturbance_defaults(&base.disturbance));
            v
        }
    };
    Ok(values)
}

/// Keys accepted by each command; anything else is a config error.
pub fn allowed_keys(command: Command, target: Option<&str>) -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = match command {
        Command::SimulateReduced => [&REDUCED_KEYS[..], &DISTURBANCE_KEYS, &["format"]].concat(),
        Command::SimulateCpmm => [&CPMM_KEYS[..], &DISTURBANCE_KEYS, &["format"]].concat(),
        Command::Sweep => match target {
            Some("cpmm") => [&CPMM_KEYS[..], &DISTURBANCE_KEYS, &["depth_grid", "cost_grid", "target", "format"]].concat(),
            _ => [
                &REDUCED_KEYS[..],
                &DISTURBANCE_KEYS,
                &["lambda_grid", "p_grid", "radius", "target", "format"],
            ]
            .concat(),
        },
        Command::Calibrate => vec!["input", "phat_grid", "pairs"],
        Command::Certify => [&["lambda", "p", "gamma_bar", "radius", "alpha_cap"][..], &DISTURBANCE_KEYS].concat(),
    };
    keys.sort_unstable();
    keys
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Parse `key = value` lines.
pub fn parse_text(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1)));
        };
        let key = k.trim();
        if key.is_empty() {
            return Err(CliError::Config(format!("{origin}:{}: empty key", i + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_assignment(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Config(format!("expected key=value, got `{s}`"))),
    }
}

/// Everything that feeds a resolved configuration.
#[derive(Debug, Clone, Default)]
pub struct Layers {
    pub preset: Option<String>,
    pub file: Option<std::path::PathBuf>,
    /// `(key, value)` pairs from the environment, already stripped of the prefix.
    pub env: Vec<(String, String)>,
    pub flags: Vec<(String, String)>,
}

impl Layers {
    /// Collects `AMM_TRACK_*` variables for the given keys.
    pub fn env_from_process(keys: &[&str]) -> Vec<(String, String)> {
        keys.iter()
            .filter_map(|k| {
                let var = format!("{ENV_PREFIX}{}", k.to_ascii_uppercase());
                std::env::var(&var).ok().map(|v| (k.to_string(), v))
            })
            .collect()
    }
}

/// Resolved configuration of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: String,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn resolve(command: Command, layers: &Layers) -> Result<Self, CliError> {
        let preset = layers.preset.clone().unwrap_or_else(|| command.default_preset().to_string());
        let file_values = match &layers.file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
                parse_text(&text, &path.display().to_string())?
            }
            None => Vec::new(),
        };
        // the sweep target picks the defaults, so it is resolved first
        let preset = if command == Command::Sweep {
            let target = [&file_values, &layers.env, &layers.flags]
                .iter()
                .flat_map(|l| l.iter())
                .rfind(|(k, _)| k == "target")
                .map(|(_, v)| v.clone());
            target.unwrap_or(preset)
        } else {
            preset
        };

        let mut values: BTreeMap<String, String> = preset_values(command, &preset)?
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let allowed = allowed_keys(command, values.get("target").map(String::as_str));
        for (k, v) in file_values.iter().chain(&layers.env).chain(&layers.flags) {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key `{k}` for {}", command.name())));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(RunConfig { command, preset, values })
    }

    pub fn get(&self, key: &str) -> Result<&str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.get(key)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("`{key}`: expected a finite number, got `{raw}`")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.get(key) {
            Some(v) if !v.is_empty() => self.f64(key).map(Some),
            _ => Ok(None),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let raw = self.get(key)?;
        raw.parse::<u64>()
            .map_err(|_| CliError::Config(format!("`{key}`: expected a nonnegative integer, got `{raw}`")))
    }

    /// Comma list, or `lo:hi:n` for `n` evenly spaced points.
    pub fn grid(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.get(key)?;
        let bad = || CliError::Config(format!("`{key}`: malformed grid `{raw}`"));
        let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
        let grid = if parts.len() == 3 {
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            let n: usize = parts[2].parse().map_err(|_| bad())?;
            match n {
                0 => return Err(bad()),
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        } else {
            raw.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?
        };
        if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        Ok(grid)
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.get("format")? {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("`format`: expected csv or json, got `{other}`"))),
        }
    }

    pub fn disturbance(&self) -> Result<DisturbanceSpec, CliError> {
        let spec = match self.get("disturbance")? {
            "zero" => DisturbanceSpec::Zero,
            "gaussian" => DisturbanceSpec::Gaussian { sigma: self.f64("sigma")? },
            "laplace" => DisturbanceSpec::Laplace { scale: self.f64("laplace_scale")? },
            "gaussian_with_shocks" => DisturbanceSpec::GaussianWithShocks {
                sigma: self.f64("sigma")?,
                shock_prob: self.f64("shock_prob")?,
                shock_scale: self.f64("shock_scale")?,
            },
            other => {
                return Err(CliError::Config(format!(
                    "`disturbance`: expected zero, gaussian, laplace or gaussian_with_shocks, got `{other}`"
                )))
            }
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn pair(&self) -> Result<ServicePair, CliError> {
        ServicePair::new(self.f64("lambda")?, self.f64("p")?).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn shift(&self) -> Result<ShiftSizes, CliError> {
        Ok(ShiftSizes {
            lambda: self.f64("shift_lambda")?,
            p: self.f64("shift_p")?,
            floor: self.f64("shift_floor")?,
        })
    }

    /// Base pair shifted by `level`.
    pub fn reduced_scenario(&self) -> Result<ReducedScenario, CliError> {
        let level: ServiceLevel = self.get("level")?.parse().map_err(CliError::Config)?;
        let base = ReducedScenario {
            pair: self.pair()?,
            x_star: self.f64("x_star")?,
            gamma_bar: self.f64("gamma_bar")?,
            disturbance: self.disturbance()?,
            horizon: self.u64("horizon")?,
            seed: self.u64("seed")?,
            x0: self.f64("x0")?,
        };
        let sc = scenario_shift_by(&base, level, self.shift()?);
        sc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(sc)
    }

    pub fn mech_scenario(&self) -> Result<MechScenario, CliError> {
        let sc = MechScenario {
            pool0: Pool {
                reserve_x: self.f64("reserve_x")?,
                reserve_y: self.f64("reserve_y")?,
                eta: self.f64("eta")?,
            },
            cost: ExecCost { c_f: self.f64("c_f")? },
            depth_scale: self.f64("depth_scale")?,
            disturbance: self.disturbance()?,
            horizon: self.u64("horizon")?,
            seed: self.u64("seed")?,
        };
        sc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        sc.initial_pool().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(sc)
    }

    /// Text that resolves back to this configuration through `--config`.
    pub fn echo(&self) -> String {
        let mut out = format!("# amm-track {} (preset {})\n", self.command.name(), self.preset);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write_echo(&self, dir: &Path) -> Result<(), CliError> {
        crate::output::write_file(&dir.join("config.resolved"), &self.echo())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}
