//! Tabular text outputs. Floats use the shortest representation that parses
//! back to the same value, so identical runs give identical bytes.

use std::fmt::Write as _;

use crate::keyrate::{qber, six_state_fraction_with, KeyMode};
use crate::optimizer::{FrontierRow, SchemeStore};

pub const FRONTIER_HEADER: &str = "n_links,p_bin,F,p,T_seconds,scheme_id";

pub fn frontier_csv(rows: &[FrontierRow]) -> String {
    let mut out = String::from(FRONTIER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.n_links, r.p_bin, r.fidelity, r.p, r.t_seconds, r.scheme_id);
    }
    out
}

/// Candidates evaluated per link length.
pub fn counts_csv(store: &SchemeStore) -> String {
    let mut out = String::from("n_links,link_length,candidates\n");
    for (len, c) in &store.counts {
        let _ = writeln!(out, "{},{},{}", store.n_links, len, c);
    }
    out
}

/// Frontier rows with their six-state secret fraction and key rate.
pub fn keyrate_csv(rows: &[FrontierRow], meas_keep: f64, mode: KeyMode) -> String {
    let mut out = String::from("n_links,p_bin,F,p,T_seconds,secret_fraction,key_rate_bps,scheme_id\n");
    for r in rows {
        let f = six_state_fraction_with(&qber(&r.scheme.metrics.state, meas_keep), mode);
        let rate = if f > 0.0 { f * r.p / r.t_seconds } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n_links, r.p_bin, r.fidelity, r.p, r.t_seconds, f, rate, r.scheme_id
        );
    }
    out
}

/// One cell of a parameter sweep at a fixed fidelity target. `best` is
/// `None` where no scheme reaches the target.
#[derive(Debug, Clone)]
pub struct HeatmapCell {
    pub x: f64,
    pub y: Option<f64>,
    pub f_target: f64,
    pub best: Option<(f64, f64, f64, String)>,
}

/// Columns: x, y (empty for 1-D sweeps), F_target, then F, p, T_seconds,
/// rate_hz and scheme_id of the fastest scheme at or above the target
/// (all empty when infeasible).
pub fn heatmap_csv(x_name: &str, y_name: Option<&str>, cells: &[HeatmapCell]) -> String {
    let mut out = format!("{x_name},{},F_target,F,p,T_seconds,rate_hz,scheme_id\n", y_name.unwrap_or(""));
    for c in cells {
        let y = c.y.map(|v| v.to_string()).unwrap_or_default();
        match &c.best {
            Some((f, p, t, id)) => {
                let _ = writeln!(out, "{},{},{},{},{},{},{},{}", c.x, y, c.f_target, f, p, t, 1.0 / t, id);
            }
            None => {
                let _ = writeln!(out, "{},{},{},,,,,", c.x, y, c.f_target);
            }
        }
    }
    out
}
