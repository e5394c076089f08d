//! Repeater-chain description and built-in hardware presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platform_ip::IpParams;
use crate::platform_mp::MpParams;
use crate::timing::TimingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Platform {
    /// Information-processing nodes end to end.
    Ip,
    /// Multiplexed memories, photonic swaps, no distillation.
    Mp,
    /// Multiplexed sources feeding information-processing memories.
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct NodeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip: Option<IpParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mp: Option<MpParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub platform: Platform,
    /// One entry per node, end nodes included (n + 1 entries).
    pub nodes: Vec<NodeParams>,
    /// One entry per elementary link (n entries), km.
    pub link_lengths_km: Vec<f64>,
    #[serde(default)]
    pub timing: TimingParams,
}

impl ChainConfig {
    /// Chain of `n` equal links over `total_km` with identical nodes.
    pub fn uniform(platform: Platform, node: NodeParams, n: usize, total_km: f64) -> Self {
        ChainConfig {
            platform,
            nodes: vec![node; n + 1],
            link_lengths_km: vec![total_km / n as f64; n],
            timing: TimingParams::default(),
        }
    }

    pub fn n_links(&self) -> usize {
        self.link_lengths_km.len()
    }

    pub fn span_length_km(&self, span: (usize, usize)) -> f64 {
        self.link_lengths_km[span.0..span.1].iter().sum()
    }

    pub fn ip(&self, node: usize) -> &IpParams {
        self.nodes[node].ip.as_ref().expect("validated chain has IP parameters")
    }

    pub fn mp(&self, node: usize) -> &MpParams {
        self.nodes[node].mp.as_ref().expect("validated chain has MP parameters")
    }

    pub fn supports_distillation(&self) -> bool {
        self.platform != Platform::Mp
    }

    /// True when all nodes and all links are identical.
    pub fn is_uniform(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0] == w[1]) && self.link_lengths_km.windows(2).all(|w| w[0] == w[1])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_links();
        if n == 0 {
            return Err(Error::Validation("chain needs at least one elementary link".into()));
        }
        if self.nodes.len() != n + 1 {
            return Err(Error::Validation(format!("{} links need {} nodes, got {}", n, n + 1, self.nodes.len())));
        }
        if let Some(l) = self.link_lengths_km.iter().find(|&&l| !(l > 0.0)) {
            return Err(Error::Validation(format!("link length {l} must be > 0")));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let need_ip = self.platform != Platform::Mp;
            let need_mp = self.platform != Platform::Ip;
            match (&node.ip, need_ip) {
                (Some(p), _) => p.validate()?,
                (None, true) => return Err(Error::Validation(format!("node {i} lacks IP parameters"))),
                _ => {}
            }
            match (&node.mp, need_mp) {
                (Some(p), _) => p.validate()?,
                (None, true) => return Err(Error::Validation(format!("node {i} lacks MP parameters"))),
                _ => {}
            }
        }
        if self.timing.t_swap < 0.0 || self.timing.t_distill < 0.0 {
            return Err(Error::Validation("t_swap and t_distill must be >= 0".into()));
        }
        Ok(())
    }
}

pub const IP_PRESETS: [&str; 4] = ["ip-set-1", "ip-set-2", "ip-set-3", "ip-set-4"];
pub const MP_PRESETS: [&str; 4] = ["mp-set-1", "mp-set-2", "mp-set-3", "mp-set-4"];

/// Base IP hardware with one of the four example parameter sets.
pub fn ip_preset(name: &str) -> Result<IpParams> {
    let k = IP_PRESETS.iter().position(|&p| p == name).ok_or_else(|| unknown(name))?;
    let coherence = [3.0, 10.0, 50.0, 100.0][k];
    let eff = [0.8, 0.9, 0.95, 0.99][k];
    let gates = [0.98, 0.99, 0.995, 0.999][k];
    Ok(IpParams {
        t_prep: 6e-6,
        f_prep: 0.99,
        dark_count_rate: 10.0,
        detection_window: crate::platform_ip::DEFAULT_DETECTION_WINDOW,
        l0: 22.0,
        n_ri: 1.44,
        delta_phi: 14.3f64.to_radians(),
        t_depol: coherence,
        t_deph: coherence,
        p_em: eff,
        p_pps: eff,
        p_det: eff,
        f_gates: gates,
        f_gates_deph: 1.0,
    })
}

/// Base MP hardware with one of the four example parameter sets.
pub fn mp_preset(name: &str) -> Result<MpParams> {
    let k = MP_PRESETS.iter().position(|&p| p == name).ok_or_else(|| unknown(name))?;
    Ok(MpParams {
        t_prep: 6e-6,
        dark_count_rate: 10.0,
        detection_window: crate::platform_ip::DEFAULT_DETECTION_WINDOW,
        l0: 22.0,
        n_ri: 1.44,
        t_coh: [1e-2, 1e-1, 1.0, 10.0][k],
        n_modes: [10_000, 100_000, 1_000_000, 10_000_000][k],
        p_app: [0.9, 0.95, 0.99, 0.999][k],
        bsm_level: k as u32,
    })
}

fn unknown(name: &str) -> Error {
    Error::Config(format!(
        "unknown preset '{name}'; available: {}, {}",
        IP_PRESETS.join(", "),
        MP_PRESETS.join(", ")
    ))
}
