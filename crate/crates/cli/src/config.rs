//! Flat `key = value` run configuration. Every command-line flag has a key
//! here; flags are applied after the file so they win.

use std::fmt::Write as _;
use std::path::PathBuf;

use dogm_threat::sim::{NoiseConfig, ScenarioKind, ScenarioParams};
use dogm_threat::PipelineConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError { key: key.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Overrides on top of the scenario defaults.
    pub params: ScenarioParams,
    pub pipeline: PipelineConfig,
    pub noise: NoiseConfig,
    /// Cluster angle uncertainty in degrees, as given by the user.
    pub phi_u_deg: f64,
    /// Output directory; `detect` treats it as a file and defaults to stdout.
    pub out: Option<PathBuf>,
    pub emit_frames: bool,
    pub emit_svg: bool,
    pub bench_frames: usize,
    pub frames: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    /// Keys set explicitly, so a later scenario change keeps them.
    param_overrides: Vec<(String, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scenario = ScenarioKind::TurningIn;
        Self {
            scenario,
            params: ScenarioParams::defaults(scenario),
            pipeline: PipelineConfig::default(),
            noise: NoiseConfig::default(),
            phi_u_deg: 0.0,
            out: None,
            emit_frames: false,
            emit_svg: false,
            bench_frames: 300,
            frames: None,
            plan: None,
            param_overrides: Vec::new(),
        }
    }
}

const PARAM_KEYS: [&str; 9] = [
    "ego_speed",
    "actor_speed",
    "turn_radius",
    "conflict_time",
    "ego_lag",
    "lane_offset",
    "crossing_offset",
    "tail",
    "frame_period",
];

fn param_mut<'a>(p: &'a mut ScenarioParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "ego_speed" => &mut p.ego_speed,
        "actor_speed" => &mut p.actor_speed,
        "turn_radius" => &mut p.turn_radius,
        "conflict_time" => &mut p.conflict_time,
        "ego_lag" => &mut p.ego_lag,
        "lane_offset" => &mut p.lane_offset,
        "crossing_offset" => &mut p.crossing_offset,
        "tail" => &mut p.tail,
        "frame_period" => &mut p.frame_period,
        _ => return None,
    })
}

fn num(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| err(key, format!("`{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(key, "must be finite"));
    }
    Ok(v)
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| err(key, format!("`{value}` is not a non-negative integer")))
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(err(key, format!("`{value}` is not a boolean"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "scenario" => {
                self.scenario = value.parse().map_err(|e: String| err(key, e))?;
                self.params = ScenarioParams::defaults(self.scenario);
                for (k, v) in &self.param_overrides {
                    *param_mut(&mut self.params, k).expect("known key") = *v;
                }
            }
            "horizon" => self.pipeline.prediction.horizon = num(key, value)?,
            "phi_u" => {
                self.phi_u_deg = num(key, value)?;
                self.pipeline.prediction.phi_u = self.phi_u_deg.to_radians();
            }
            "seed" => self.noise.seed = value.parse().map_err(|_| err(key, format!("`{value}` is not an unsigned integer")))?,
            "sigma_v" => self.noise.sigma_v = num(key, value)?,
            "sigma_m" => self.noise.sigma_m = num(key, value)?,
            "lag_gain" => self.noise.lag_gain = num(key, value)?,
            "v_min" => self.pipeline.mask.v_min = num(key, value)?,
            "mask_p_occ_min" => self.pipeline.mask.p_occ_min = num(key, value)?,
            "eps_cells" => self.pipeline.dbscan.eps_cells = num(key, value)?,
            "min_pts" => self.pipeline.dbscan.min_pts = count(key, value)?,
            "p_occ_min" => self.pipeline.plausibility.p_occ_min = num(key, value)?,
            "p_move_min" => self.pipeline.plausibility.p_move_min = num(key, value)?,
            "var_max" => self.pipeline.plausibility.var_max = num(key, value)?,
            "n_min" => self.pipeline.plausibility.n_min = count(key, value)?,
            "n_max" => self.pipeline.plausibility.n_max = count(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "emit_frames" => self.emit_frames = flag(key, value)?,
            "emit_svg" => self.emit_svg = flag(key, value)?,
            "bench_frames" => self.bench_frames = count(key, value)?,
            "frames" => self.frames = Some(PathBuf::from(value)),
            "plan" => self.plan = Some(PathBuf::from(value)),
            _ => {
                let v = num(key, value);
                match param_mut(&mut self.params, key) {
                    Some(slot) => {
                        let v = v?;
                        *slot = v;
                        self.param_overrides.retain(|(k, _)| k != key);
                        self.param_overrides.push((key.to_string(), v));
                    }
                    None => return Err(err(key, "unknown key")),
                }
            }
        }
        Ok(())
    }

    /// Applies a config document: one `key = value` per line, `#` starts a
    /// comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line, format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Range checks of every threshold, reported by key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline
            .validate()
            .map_err(|e| match e {
                dogm_threat::ConfigError::OutOfRange { key: "phi_u", .. } => {
                    err("phi_u", format!("{} degrees outside [0, 45]", self.phi_u_deg))
                }
                dogm_threat::ConfigError::OutOfRange { key, value, range } => {
                    let key = if key == "p_occ_min" && self.pipeline.mask.validate().is_err() { "mask_p_occ_min" } else { key };
                    err(key, format!("{value} outside {range}"))
                }
            })?;
        if let Err(reason) = self.noise.validate() {
            let key = ["sigma_v", "sigma_m", "lag_gain"].into_iter().find(|k| reason.starts_with(k)).unwrap_or("noise");
            return Err(err(key, reason));
        }
        Ok(())
    }

    /// Effective configuration in the same format `apply_text` reads.
    pub fn echo(&self) -> String {
        let p = &self.pipeline;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.to_string());
        kv("horizon", p.prediction.horizon.to_string());
        kv("phi_u", self.phi_u_deg.to_string());
        kv("seed", self.noise.seed.to_string());
        kv("sigma_v", self.noise.sigma_v.to_string());
        kv("sigma_m", self.noise.sigma_m.to_string());
        kv("lag_gain", self.noise.lag_gain.to_string());
        kv("v_min", p.mask.v_min.to_string());
        kv("mask_p_occ_min", p.mask.p_occ_min.to_string());
        kv("eps_cells", p.dbscan.eps_cells.to_string());
        kv("min_pts", p.dbscan.min_pts.to_string());
        kv("p_occ_min", p.plausibility.p_occ_min.to_string());
        kv("p_move_min", p.plausibility.p_move_min.to_string());
        kv("var_max", p.plausibility.var_max.to_string());
        kv("n_min", p.plausibility.n_min.to_string());
        kv("n_max", p.plausibility.n_max.to_string());
        let mut params = self.params;
        for key in PARAM_KEYS {
            kv(key, param_mut(&mut params, key).map(|v| v.to_string()).unwrap_or_default());
        }
        if let Some(o) = &self.out {
            kv("out", o.display().to_string());
        }
        kv("emit_frames", self.emit_frames.to_string());
        kv("emit_svg", self.emit_svg.to_string());
        kv("bench_frames", self.bench_frames.to_string());
        if let Some(f) = &self.frames {
            kv("frames", f.display().to_string());
        }
        if let Some(f) = &self.plan {
            kv("plan", f.display().to_string());
        }
        s
    }
}
