use crate::background::{Background, ConstantState};
use crate::diagnostics::{DiagConfig, SpaceTimeBump};
use crate::error::{config, Error, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;
use crate::initdata::{notch_data, wave_data, InitialData, NotchParams};
use crate::rarefaction::{sonic_left_velocity, WaveProfile};
use crate::solver::SchemeConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveKind {
    Rarefaction,
    /// Constant reference `(rho_minus, u_minus)`; the plus state must agree.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub kind: WaveKind,
    pub rho_minus: f64,
    pub rho_plus: f64,
    /// Defaults to `−c(ρ₋)`, which starts the fan at `x = 0`.
    pub u_minus: Option<f64>,
    /// Derived from the Riemann invariant when absent, checked otherwise.
    pub u_plus: Option<f64>,
    pub q: f64,
    pub eta: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            kind: WaveKind::Rarefaction,
            rho_minus: 1.0,
            rho_plus: 2.0,
            u_minus: None,
            u_plus: None,
            q: 2.0,
            eta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Notch,
    Wave,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    pub kind: InitKind,
    pub notch: NotchParams,
    /// Two-column `(x, rho0)` file for `kind = "csv"`.
    pub rho_csv: Option<PathBuf>,
    /// Two-column `(x, m0)` file for `kind = "csv"`.
    pub m_csv: Option<PathBuf>,
    /// Mollifier radius for `eps > 0`; defaults to `eps`.
    pub mollify_radius: Option<f64>,
    /// Deviation from the reference that counts as perturbed when sizing
    /// the domain.
    pub support_tol: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            kind: InitKind::Notch,
            notch: NotchParams::default(),
            rho_csv: None,
            m_csv: None,
            mollify_radius: None,
            support_tol: 1e-10,
        }
    }
}

/// Settings for the post-hoc analyses of `diag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostConfig {
    pub test: SpaceTimeBump,
    pub t1: f64,
    pub t2: f64,
    pub seeds: Vec<f64>,
    pub path_t_from: f64,
    pub path_t_to: f64,
    pub substeps: usize,
    /// Start of the blow-up window; the detected vacuum-vanishing time when absent.
    pub blowup_start: Option<f64>,
    pub blowup_eta: f64,
}

impl Default for PostConfig {
    fn default() -> Self {
        Self {
            test: SpaceTimeBump {
                x_center: -10.0,
                x_half_width: 15.0,
                t_center: 2.0,
                t_half_width: 2.0,
            },
            t1: 0.0,
            t2: 4.0,
            seeds: vec![-40.0, -25.0, 0.0, 5.0, 20.0, 40.0],
            path_t_from: 0.0,
            path_t_to: 4.0,
            substeps: 4,
            blowup_start: None,
            blowup_eta: 1.0,
        }
    }
}

/// Parameter lists for `sweep`; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    /// Worker threads; all cores when absent.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Times at which `wave` writes profiles.
    pub wave_times: Vec<f64>,
    /// Norm exponent for `rates.csv`; `0` selects the sup norm.
    pub rate_p: f64,
    pub rate_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            wave_times: vec![0.0, 10.0, 100.0, 1000.0],
            rate_p: 2.0,
            rate_times: (0..=20).map(|k| 10f64.powf(1.0 + k as f64 / 10.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasParams,
    pub wave: WaveConfig,
    pub grid: Grid1D,
    pub scheme: SchemeConfig,
    pub init: InitConfig,
    pub diag: DiagConfig,
    pub post: PostConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    /// Runs never draw random numbers; kept so the echo is complete.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gas: GasParams::default(),
            wave: WaveConfig::default(),
            grid: Grid1D {
                x_left: -600.0,
                x_right: 940.0,
                n: 2000,
            },
            scheme: SchemeConfig::default(),
            init: InitConfig::default(),
            diag: DiagConfig::default(),
            post: PostConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
            deterministic: true,
        }
    }
}

impl RunConfig {
    /// Reads a TOML file; `None` gives the stability benchmark.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let mut cfg: Self = toml::from_str(&text)
                    .map_err(|e| config(format!("{}: {e}", p.display())))?;
                cfg.resolve_paths(p.parent().unwrap_or(Path::new(".")));
                Ok(cfg)
            }
        }
    }

    /// Resolves relative CSV paths against the config file directory.
    fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.init.rho_csv, &mut self.init.m_csv].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Applies `key.path=value` assignments. Values are parsed as TOML and
    /// fall back to bare strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = toml::Value::try_from(self)
            .map_err(|e| config(format!("cannot serialize config: {e}")))?;
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| config(format!("override `{o}` is not key=value")))?;
            let value = parse_value(raw.trim());
            set_path(&mut root, key.trim(), value)?;
        }
        root.try_into()
            .map_err(|e: toml::de::Error| config(format!("after overrides: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        self.grid.validate()?;
        self.scheme.validate()?;
        self.diag.validate()?;
        if !self.deterministic {
            return Err(config("deterministic must be true; runs are always reproducible"));
        }
        if !(self.init.support_tol > 0.0) {
            return Err(config("init.support_tol must be positive"));
        }
        if self.init.kind == InitKind::Csv && (self.init.rho_csv.is_none() || self.init.m_csv.is_none()) {
            return Err(config("init.kind = \"csv\" needs init.rho_csv and init.m_csv"));
        }
        if self.sweep.eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(config("sweep.eps entries must be >= 0"));
        }
        if self.sweep.threads == Some(0) {
            return Err(config("sweep.threads must be at least 1"));
        }
        Ok(())
    }

    pub fn u_minus(&self) -> f64 {
        self.wave
            .u_minus
            .unwrap_or_else(|| sonic_left_velocity(&self.gas, self.wave.rho_minus))
    }

    pub fn wave_profile(&self) -> Result<WaveProfile> {
        let w = &self.wave;
        if w.kind != WaveKind::Rarefaction {
            return Err(config("wave.kind must be \"rarefaction\" here"));
        }
        WaveProfile::new(self.gas, w.rho_minus, w.rho_plus, self.u_minus(), w.u_plus, w.q, w.eta)
    }

    /// Far-field velocities `(u₋, u₊)` of the reference.
    pub fn end_velocities(&self) -> Result<(f64, f64)> {
        match self.wave.kind {
            WaveKind::Rarefaction => {
                let wp = self.wave_profile()?;
                Ok((wp.u_minus, wp.u_plus))
            }
            WaveKind::Constant => {
                let u = self.wave.u_minus.unwrap_or(0.0);
                Ok((u, u))
            }
        }
    }

    pub fn background(&self) -> Result<Box<dyn Background>> {
        match self.wave.kind {
            WaveKind::Rarefaction => Ok(Box::new(self.wave_profile()?)),
            WaveKind::Constant => {
                let w = &self.wave;
                let u = w.u_minus.unwrap_or(0.0);
                if w.rho_plus != w.rho_minus || w.u_plus.is_some_and(|up| up != u) {
                    return Err(config(
                        "a constant reference needs rho_plus = rho_minus and u_plus = u_minus",
                    ));
                }
                Ok(Box::new(ConstantState::new(w.rho_minus, u, self.gas)?))
            }
        }
    }

    pub fn initial_data(&self, bg: &dyn Background) -> Result<InitialData> {
        match self.init.kind {
            InitKind::Notch => notch_data(self.grid, bg, &self.init.notch),
            InitKind::Wave => wave_data(self.grid, bg),
            InitKind::Csv => InitialData::from_csv(
                self.grid,
                self.init.rho_csv.as_deref().expect("validated"),
                self.init.m_csv.as_deref().expect("validated"),
            ),
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config(format!("malformed override key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| config(format!("override key `{key}` walks into a non-table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| config(format!("override key `{key}` walks into a non-table")))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml_and_json() {
        let c = RunConfig::default();
        let t = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&t).unwrap(), c);
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&j).unwrap(), c);
    }

    #[test]
    fn overrides_reach_nested_and_optional_keys() {
        let c = RunConfig::default()
            .with_overrides(&[
                "grid.n=4000".into(),
                "gas.eps = 1e-4".into(),
                "wave.u_minus=-1.5".into(),
                "scheme.limiter=minmod".into(),
                "post.seeds=[1.0, 2.0]".into(),
            ])
            .unwrap();
        assert_eq!(c.grid.n, 4000);
        assert_eq!(c.gas.eps, 1e-4);
        assert_eq!(c.wave.u_minus, Some(-1.5));
        assert_eq!(c.scheme.limiter, crate::solver::Limiter::Minmod);
        assert_eq!(c.post.seeds, vec![1.0, 2.0]);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let c = RunConfig::default();
        for o in ["grid.n", "grid.bogus=1", "grid.n=abc", "gas.gamma.x=1", ".n=1"] {
            let e = c.with_overrides(&[o.into()]).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{o}: {e}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[grid]\nx_left = 0\nx_right = 1\nn = 20\nfoo = 1").is_err());
        assert!(toml::from_str::<RunConfig>("[nonsense]\na = 1").is_err());
    }

    #[test]
    fn constant_reference_requires_equal_states() {
        let mut c = RunConfig::default();
        c.wave.kind = WaveKind::Constant;
        assert!(c.background().is_err());
        c.wave.rho_plus = c.wave.rho_minus;
        c.wave.u_minus = Some(0.3);
        let bg = c.background().unwrap();
        assert_eq!(bg.point(5.0, 1.0).unwrap().u, 0.3);
    }

    #[test]
    fn sonic_default_starts_fan_at_origin() {
        let c = RunConfig::default();
        let wp = c.wave_profile().unwrap();
        assert!(wp.w_minus.abs() < 1e-14);
    }
}
