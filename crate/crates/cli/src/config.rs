//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use roe_lab::engine::{Resolution, Thresholds};
use roe_lab::space::Model;

use crate::error::CliError;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "ROE_LAB_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub model: Model,
    // radial and spectral grids of the transform checks
    pub r_max: f64,
    pub num_points: usize,
    pub lambda_max: f64,
    pub spectral_points: usize,
    // sequence experiments
    pub seq_r_max: f64,
    pub seq_h: f64,
    pub hardy_r_max: f64,
    pub hardy_step: f64,
    pub ball_half_count: usize,
    pub ball_eps: f64,
    pub check_radius: f64,
    pub solvable_b_min: f64,
    pub solvable_b_max: f64,
    pub solvable_b_step: f64,
    pub solvable_eta_min: f64,
    pub solvable_eta_max: f64,
    pub solvable_eta_step: f64,
    // lattice of the relation-path checks and the kappa fit
    pub kappa_b_max: f64,
    pub kappa_b_step: f64,
    pub kappa_eta_max: f64,
    pub kappa_eta_step: f64,
    // thresholds
    pub pass_tol: f64,
    pub counterexample_tol: f64,
    pub growth_factor: f64,
    pub recovery_tol: f64,
    // calibration constants; `c_inv = auto` calibrates on every run
    pub c_inv: Option<f64>,
    pub kappa: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Fill the `seconds` column. Off by default so reruns are byte-identical.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let res = Resolution::default();
        let th = Thresholds::default();
        Self {
            n: 3,
            model: Model::Ball,
            r_max: 16.0,
            num_points: 1601,
            lambda_max: 22.0,
            spectral_points: 1201,
            seq_r_max: res.radial_r_max,
            seq_h: res.radial_h,
            hardy_r_max: res.hardy_r_max,
            hardy_step: res.hardy_step,
            ball_half_count: res.ball_half_count,
            ball_eps: res.ball_eps,
            check_radius: res.check_radius,
            solvable_b_min: res.solvable_b.0,
            solvable_b_max: res.solvable_b.1,
            solvable_b_step: res.solvable_b_step,
            solvable_eta_min: res.solvable_eta.0,
            solvable_eta_max: res.solvable_eta.1,
            solvable_eta_step: res.solvable_eta_step,
            kappa_b_max: 3.0,
            kappa_b_step: 0.005,
            kappa_eta_max: 1.5,
            kappa_eta_step: 0.01,
            pass_tol: th.pass,
            counterexample_tol: th.counterexample,
            growth_factor: th.growth,
            recovery_tol: th.recovery,
            c_inv: None,
            kappa: res.kappa,
            output_dir: PathBuf::from("roe-lab-out"),
            seed: 0,
            timing: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for '{key}'")))
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Ball => "ball",
        Model::HalfSpace => "half_space",
    }
}

impl RunConfig {
    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "model" => {
                self.model = match value {
                    "ball" => Model::Ball,
                    "half_space" => Model::HalfSpace,
                    _ => return Err(CliError::Config(format!("unknown model '{value}'"))),
                }
            }
            "r_max" => self.r_max = parse(key, value)?,
            "num_points" => self.num_points = parse(key, value)?,
            "lambda_max" => self.lambda_max = parse(key, value)?,
            "spectral_points" => self.spectral_points = parse(key, value)?,
            "seq_r_max" => self.seq_r_max = parse(key, value)?,
            "seq_h" => self.seq_h = parse(key, value)?,
            "hardy_r_max" => self.hardy_r_max = parse(key, value)?,
            "hardy_step" => self.hardy_step = parse(key, value)?,
            "ball_half_count" => self.ball_half_count = parse(key, value)?,
            "ball_eps" => self.ball_eps = parse(key, value)?,
            "check_radius" => self.check_radius = parse(key, value)?,
            "solvable_b_min" => self.solvable_b_min = parse(key, value)?,
            "solvable_b_max" => self.solvable_b_max = parse(key, value)?,
            "solvable_b_step" => self.solvable_b_step = parse(key, value)?,
            "solvable_eta_min" => self.solvable_eta_min = parse(key, value)?,
            "solvable_eta_max" => self.solvable_eta_max = parse(key, value)?,
            "solvable_eta_step" => self.solvable_eta_step = parse(key, value)?,
            "kappa_b_max" => self.kappa_b_max = parse(key, value)?,
            "kappa_b_step" => self.kappa_b_step = parse(key, value)?,
            "kappa_eta_max" => self.kappa_eta_max = parse(key, value)?,
            "kappa_eta_step" => self.kappa_eta_step = parse(key, value)?,
            "pass_tol" => self.pass_tol = parse(key, value)?,
            "counterexample_tol" => self.counterexample_tol = parse(key, value)?,
            "growth_factor" => self.growth_factor = parse(key, value)?,
            "recovery_tol" => self.recovery_tol = parse(key, value)?,
            "c_inv" => self.c_inv = if value == "auto" { None } else { Some(parse(key, value)?) },
            "kappa" => self.kappa = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "timing" => self.timing = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override string.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{pair}' is not key=value")))?;
        self.set(k, v)
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Serialises every field; `parse_str(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n", self.n.to_string());
        put("model", model_name(self.model).to_string());
        put("r_max", self.r_max.to_string());
        put("num_points", self.num_points.to_string());
        put("lambda_max", self.lambda_max.to_string());
        put("spectral_points", self.spectral_points.to_string());
        put("seq_r_max", self.seq_r_max.to_string());
        put("seq_h", self.seq_h.to_string());
        put("hardy_r_max", self.hardy_r_max.to_string());
        put("hardy_step", self.hardy_step.to_string());
        put("ball_half_count", self.ball_half_count.to_string());
        put("ball_eps", self.ball_eps.to_string());
        put("check_radius", self.check_radius.to_string());
        put("solvable_b_min", self.solvable_b_min.to_string());
        put("solvable_b_max", self.solvable_b_max.to_string());
        put("solvable_b_step", self.solvable_b_step.to_string());
        put("solvable_eta_min", self.solvable_eta_min.to_string());
        put("solvable_eta_max", self.solvable_eta_max.to_string());
        put("solvable_eta_step", self.solvable_eta_step.to_string());
        put("kappa_b_max", self.kappa_b_max.to_string());
        put("kappa_b_step", self.kappa_b_step.to_string());
        put("kappa_eta_max", self.kappa_eta_max.to_string());
        put("kappa_eta_step", self.kappa_eta_step.to_string());
        put("pass_tol", self.pass_tol.to_string());
        put("counterexample_tol", self.counterexample_tol.to_string());
        put("growth_factor", self.growth_factor.to_string());
        put("recovery_tol", self.recovery_tol.to_string());
        put("c_inv", self.c_inv.map_or_else(|| "auto".to_string(), |c| c.to_string()));
        put("kappa", self.kappa.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("seed", self.seed.to_string());
        put("timing", self.timing.to_string());
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("r_max", self.r_max),
            ("lambda_max", self.lambda_max),
            ("seq_r_max", self.seq_r_max),
            ("seq_h", self.seq_h),
            ("hardy_r_max", self.hardy_r_max),
            ("hardy_step", self.hardy_step),
            ("ball_eps", self.ball_eps),
            ("check_radius", self.check_radius),
            ("solvable_b_step", self.solvable_b_step),
            ("solvable_eta_step", self.solvable_eta_step),
            ("kappa_b_max", self.kappa_b_max),
            ("kappa_b_step", self.kappa_b_step),
            ("kappa_eta_max", self.kappa_eta_max),
            ("kappa_eta_step", self.kappa_eta_step),
            ("pass_tol", self.pass_tol),
            ("counterexample_tol", self.counterexample_tol),
            ("growth_factor", self.growth_factor),
            ("recovery_tol", self.recovery_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("'{k}' must be positive and finite, got {v}")));
            }
        }
        if let Some(c) = self.c_inv {
            if !(c > 0.0) || !c.is_finite() {
                return Err(CliError::Config(format!("'c_inv' must be positive, got {c}")));
            }
        }
        if !(self.kappa.is_finite()) {
            return Err(CliError::Config("'kappa' must be finite".into()));
        }
        if self.pass_tol >= self.counterexample_tol {
            return Err(CliError::Config("pass_tol must be below counterexample_tol".into()));
        }
        if self.solvable_b_min >= self.solvable_b_max || self.solvable_eta_min >= self.solvable_eta_max {
            return Err(CliError::Config("solvable lattice ranges are empty".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            pass: self.pass_tol,
            counterexample: self.counterexample_tol,
            growth: self.growth_factor,
            recovery: self.recovery_tol,
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            radial_r_max: self.seq_r_max,
            radial_h: self.seq_h,
            hardy_r_max: self.hardy_r_max,
            hardy_step: self.hardy_step,
            ball_half_count: self.ball_half_count,
            ball_eps: self.ball_eps,
            check_radius: self.check_radius,
            solvable_b: (self.solvable_b_min, self.solvable_b_max),
            solvable_b_step: self.solvable_b_step,
            solvable_eta: (self.solvable_eta_min, self.solvable_eta_max),
            solvable_eta_step: self.solvable_eta_step,
            kappa: self.kappa,
        }
    }
}
