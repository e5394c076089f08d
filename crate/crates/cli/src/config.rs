//! Run configuration: TOML schema, hardware presets and named parameters.

use std::path::Path;

use repeater_core::chain::{ip_preset, mp_preset, ChainConfig, NodeParams, Platform};
use repeater_core::keyrate::KeyMode;
use repeater_core::optimizer::OptimizerConfig;
use repeater_core::timing::TimingParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainSpec,
    /// Fields of the optimizer configuration; missing ones take defaults.
    #[serde(default)]
    pub optimizer: Table,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub keyrate: KeyrateSpec,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub platform: Platform,
    /// Preset for every node's IP parameters.
    pub ip_preset: Option<String>,
    /// Preset for every node's MP parameters.
    pub mp_preset: Option<String>,
    /// Per-node IP presets (n + 1 entries), replacing `ip_preset`.
    #[serde(default)]
    pub ip_node_presets: Vec<String>,
    #[serde(default)]
    pub mp_node_presets: Vec<String>,
    /// Equal links: `n_links` links over `total_km`.
    pub n_links: Option<usize>,
    pub total_km: Option<f64>,
    /// Explicit link lengths, in place of `n_links`/`total_km`.
    #[serde(default)]
    pub link_lengths_km: Vec<f64>,
    /// Field overrides applied to every node's IP parameters.
    #[serde(default)]
    pub ip: Table,
    #[serde(default)]
    pub mp: Table,
    #[serde(default)]
    pub timing: Table,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Fidelity targets for the heatmap.
    #[serde(default)]
    pub targets: Vec<f64>,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    /// Geometric instead of linear spacing.
    #[serde(default)]
    pub log: bool,
    /// Explicit values, in place of start/stop/steps.
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let err = |m: &str| Err(CliError::Config(format!("sweep axis '{}': {m}", self.param)));
        if !self.values.is_empty() {
            if self.start.is_some() || self.stop.is_some() || self.steps.is_some() {
                return err("give either values or start/stop/steps");
            }
            return Ok(self.values.clone());
        }
        let (Some(a), Some(b), Some(k)) = (self.start, self.stop, self.steps) else {
            return err("needs values or all of start, stop, steps");
        };
        if k == 0 {
            return err("steps must be >= 1");
        }
        if self.log && !(a > 0.0 && b > 0.0) {
            return err("log spacing needs positive start and stop");
        }
        if k == 1 {
            return Ok(vec![a]);
        }
        Ok((0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                if i == k - 1 {
                    b
                } else if self.log {
                    (a.ln() + t * (b.ln() - a.ln())).exp()
                } else {
                    a + t * (b - a)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KeyrateSpec {
    /// Depolarizing keep factor of the end-node measurements.
    #[serde(default = "one")]
    pub meas_keep: f64,
    #[serde(default)]
    pub mode: KeyMode,
}

fn one() -> f64 {
    1.0
}

impl Default for KeyrateSpec {
    fn default() -> Self {
        KeyrateSpec { meas_keep: 1.0, mode: KeyMode::OneWay }
    }
}

/// Output file names, relative to the output directory. Unset entries take
/// the defaults listed in the README when a verb always writes them.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub frontier: Option<String>,
    pub schemes: Option<String>,
    pub counts: Option<String>,
    pub keyrates: Option<String>,
    pub heatmap: Option<String>,
    pub dot: Option<String>,
    pub brute_frontier: Option<String>,
    pub oracle_report: Option<String>,
    pub points: Option<String>,
    pub manifest: Option<String>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        if path == "." {
            CliError::Config(msg)
        } else {
            CliError::Config(format!("{path}: {msg}"))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every sweep point resolves, so a bad config never starts a run.
    pub fn validate(&self) -> Result<()> {
        self.resolve()?;
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() || sweep.axes.len() > 2 {
                return Err(CliError::Config(format!("sweep needs 1 or 2 axes, got {}", sweep.axes.len())));
            }
            if let Some(t) = sweep.targets.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
                return Err(CliError::Config(format!("sweep.targets: {t} outside (0, 1]")));
            }
            for p in self.sweep_points()? {
                p.config.resolve()?;
            }
        }
        if !(0.0..=1.0).contains(&self.keyrate.meas_keep) {
            return Err(CliError::Config("keyrate.meas_keep must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<(ChainConfig, OptimizerConfig)> {
        Ok((self.chain.resolve()?, resolve_optimizer(&self.optimizer)?))
    }

    /// Set a named parameter, e.g. `ip.t_depol`, `mp.n_modes`,
    /// `optimizer.eps_f`, `chain.total_km`. `ip.t_coh` sets both IP
    /// coherence times and `ip.efficiency` sets p_em, p_pps and p_det.
    pub fn set_param(&mut self, name: &str, v: f64) -> Result<()> {
        let unknown = || CliError::Config(format!("unknown parameter '{name}'"));
        let (section, field) = name.split_once('.').ok_or_else(unknown)?;
        let ip_template = || table_of(&ip_preset("ip-set-1").expect("built-in preset"));
        let mp_template = || table_of(&mp_preset("mp-set-1").expect("built-in preset"));
        match (section, field) {
            ("chain", "total_km") => self.chain.total_km = Some(v),
            ("chain", "n_links") => self.chain.n_links = Some(as_count(name, v)?),
            ("ip", "t_coh") => {
                for f in ["t_depol", "t_deph"] {
                    set_typed(&mut self.chain.ip, &ip_template(), f, v, name)?;
                }
            }
            ("ip", "efficiency") => {
                for f in ["p_em", "p_pps", "p_det"] {
                    set_typed(&mut self.chain.ip, &ip_template(), f, v, name)?;
                }
            }
            ("ip", f) => set_typed(&mut self.chain.ip, &ip_template(), f, v, name)?,
            ("mp", f) => set_typed(&mut self.chain.mp, &mp_template(), f, v, name)?,
            ("timing", f) => set_typed(&mut self.chain.timing, &table_of(&TimingParams::default()), f, v, name)?,
            ("optimizer", f) => {
                set_typed(&mut self.optimizer, &table_of(&OptimizerConfig::default()), f, v, name)?
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }

    /// Cartesian grid of the sweep axes; a single point without a sweep.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![SweepPoint { label: "base".into(), params: vec![], config: self.clone() }]);
        };
        let axes: Vec<(String, Vec<f64>)> =
            sweep.axes.iter().map(|a| Ok((a.param.clone(), a.values()?))).collect::<Result<_>>()?;
        let mut out = vec![];
        let ys: Vec<Option<(usize, f64)>> = match axes.get(1) {
            Some((_, vals)) => vals.iter().copied().enumerate().map(Some).collect(),
            None => vec![None],
        };
        for (i, &x) in axes[0].1.iter().enumerate() {
            for y in &ys {
                let mut config = self.clone();
                config.sweep = None;
                config.set_param(&axes[0].0, x)?;
                let mut params = vec![(axes[0].0.clone(), x)];
                let mut label = format!("x{i}");
                if let Some((j, yv)) = *y {
                    config.set_param(&axes[1].0, yv)?;
                    params.push((axes[1].0.clone(), yv));
                    label.push_str(&format!("_y{j}"));
                }
                out.push(SweepPoint { label, params, config });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub params: Vec<(String, f64)>,
    pub config: RunConfig,
}

impl ChainSpec {
    pub fn resolve(&self) -> Result<ChainConfig> {
        let lengths = match (&self.link_lengths_km[..], self.n_links, self.total_km) {
            ([], Some(n), Some(km)) => {
                if n == 0 {
                    return Err(CliError::Config("chain.n_links must be >= 1".into()));
                }
                vec![km / n as f64; n]
            }
            ([], _, _) => {
                return Err(CliError::Config("chain: give link_lengths_km or both n_links and total_km".into()))
            }
            (l, None, None) => l.to_vec(),
            _ => return Err(CliError::Config("chain: link_lengths_km excludes n_links and total_km".into())),
        };
        let n = lengths.len();
        let need_ip = self.platform != Platform::Mp;
        let need_mp = self.platform != Platform::Ip;
        let ip = node_params(need_ip, "ip", &self.ip_preset, &self.ip_node_presets, n, &self.ip, ip_preset)?;
        let mp = node_params(need_mp, "mp", &self.mp_preset, &self.mp_node_presets, n, &self.mp, mp_preset)?;
        let nodes = (0..=n)
            .map(|i| NodeParams { ip: ip.as_ref().map(|v| v[i]), mp: mp.as_ref().map(|v| v[i]) })
            .collect();
        let timing = merged(&TimingParams::default(), &self.timing, "chain.timing")?;
        let chain = ChainConfig { platform: self.platform, nodes, link_lengths_km: lengths, timing };
        chain.validate()?;
        Ok(chain)
    }
}

fn node_params<T: Serialize + DeserializeOwned>(
    needed: bool,
    kind: &str,
    preset: &Option<String>,
    per_node: &[String],
    n: usize,
    overrides: &Table,
    lookup: fn(&str) -> repeater_core::error::Result<T>,
) -> Result<Option<Vec<T>>> {
    let names: Vec<&str> = if !per_node.is_empty() {
        if preset.is_some() {
            return Err(CliError::Config(format!("chain: {kind}_preset excludes {kind}_node_presets")));
        }
        if per_node.len() != n + 1 {
            return Err(CliError::Config(format!(
                "chain.{kind}_node_presets: {n} links need {} entries, got {}",
                n + 1,
                per_node.len()
            )));
        }
        per_node.iter().map(String::as_str).collect()
    } else if let Some(p) = preset {
        vec![p.as_str(); n + 1]
    } else if needed {
        return Err(CliError::Config(format!("chain: platform needs {kind}_preset or {kind}_node_presets")));
    } else {
        return Ok(None);
    };
    names
        .into_iter()
        .map(|name| merged(&lookup(name)?, overrides, &format!("chain.{kind}")))
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn path_error(prefix: &str, e: serde_path_to_error::Error<toml::de::Error>) -> CliError {
    let path = e.path().to_string();
    CliError::Config(format!("{prefix}.{path}: {}", e.into_inner().message()))
}

fn table_of<T: Serialize>(v: &T) -> Table {
    match Value::try_from(v) {
        Ok(Value::Table(t)) => t,
        _ => unreachable!("parameter structs serialize to tables"),
    }
}

/// `base` with the fields in `over` replaced; unknown fields are errors.
fn merged<T: Serialize + DeserializeOwned>(base: &T, over: &Table, path: &str) -> Result<T> {
    let mut t = table_of(base);
    for (k, v) in over {
        let Some(old) = t.get(k) else {
            return Err(CliError::Config(format!("{path}.{k}: unknown field")));
        };
        let v = coerce(old, v.clone()).ok_or_else(|| CliError::Config(format!("{path}.{k}: wrong type")))?;
        t.insert(k.clone(), v);
    }
    serde_path_to_error::deserialize(Value::Table(t))
        .map_err(|e| path_error(path, e))
}

/// Integers are accepted where floats are expected and integral floats
/// where integers are.
fn coerce(old: &Value, v: Value) -> Option<Value> {
    match (old, v) {
        (Value::Float(_), Value::Integer(i)) => Some(Value::Float(i as f64)),
        (Value::Integer(_), Value::Float(f)) if f.fract() == 0.0 && f.abs() < 9e15 => Some(Value::Integer(f as i64)),
        (o, v) if std::mem::discriminant(o) == std::mem::discriminant(&v) => Some(v),
        _ => None,
    }
}

fn set_typed(target: &mut Table, template: &Table, field: &str, v: f64, name: &str) -> Result<()> {
    let old = template.get(field).ok_or_else(|| CliError::Config(format!("unknown parameter '{name}'")))?;
    let value = match old {
        Value::Float(_) => Value::Float(v),
        Value::Integer(_) => Value::Integer(as_count(name, v)? as i64),
        _ => return Err(CliError::Config(format!("parameter '{name}' is not numeric"))),
    };
    target.insert(field.to_string(), value);
    Ok(())
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 9e15 {
        Ok(v as usize)
    } else {
        Err(CliError::Config(format!("parameter '{name}' needs a non-negative integer, got {v}")))
    }
}

/// Optimizer fields over defaults. `eps_swap` and `eps_distill` accept
/// "off" to disable the band.
pub fn resolve_optimizer(t: &Table) -> Result<OptimizerConfig> {
    let mut t = t.clone();
    let mut off = vec![];
    for k in ["eps_swap", "eps_distill"] {
        match t.get(k) {
            Some(Value::String(s)) if s == "off" => {
                t.remove(k);
                off.push(k);
            }
            Some(Value::String(s)) => {
                return Err(CliError::Config(format!("optimizer.{k}: expected a number or \"off\", got \"{s}\"")))
            }
            Some(Value::Integer(i)) => {
                let f = *i as f64;
                t.insert(k.to_string(), Value::Float(f));
            }
            _ => {}
        }
    }
    let defaults = table_of(&OptimizerConfig::default());
    for (k, v) in t.clone() {
        if let Some(old) = defaults.get(&k) {
            if let Some(c) = coerce(old, v) {
                t.insert(k, c);
            }
        }
    }
    let mut cfg: OptimizerConfig = serde_path_to_error::deserialize(Value::Table(t))
        .map_err(|e| path_error("optimizer", e))?;
    for k in off {
        match k {
            "eps_swap" => cfg.eps_swap = None,
            _ => cfg.eps_distill = None,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
