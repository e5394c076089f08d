//! Six-state secret-key rates of delivered pairs.

use serde::{Deserialize, Serialize};

use crate::qstate::{measure_noisy, Basis, TwoQubitState};
use crate::scheme::Scheme;

/// Error rates relative to Φ⁺ in the three measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QberTriple {
    pub q_x: f64,
    pub q_y: f64,
    pub q_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// One-way post-processing.
    #[default]
    OneWay,
    /// One B-step of advantage distillation before one-way processing,
    /// used only where it beats plain one-way.
    Advantage,
}

/// QBERs from noisy measurements; `meas_keep` is the depolarizing keep
/// factor of each measurement (1 = noiseless). Φ⁺ is correlated in X and Z
/// and anticorrelated in Y.
pub fn qber(s: &TwoQubitState, meas_keep: f64) -> QberTriple {
    let keep = meas_keep.clamp(0.0, 1.0);
    let m = |b| measure_noisy(s, b, keep).expect("keep clamped to [0, 1]");
    let differ = |p: [f64; 4]| p[1] + p[2];
    let same = |p: [f64; 4]| p[0] + p[3];
    QberTriple { q_x: differ(m(Basis::X)), q_y: same(m(Basis::Y)), q_z: differ(m(Basis::Z)) }
}

/// Bell weights (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻) consistent with the three error rates.
pub fn bell_weights(q: &QberTriple) -> [f64; 4] {
    let (x, y, z) = (q.q_x, q.q_y, q.q_z);
    [1.0 - (x + y + z) / 2.0, (x + y - z) / 2.0, (y + z - x) / 2.0, (x + z - y) / 2.0].map(|v| v.max(0.0))
}

fn entropy(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    p.iter().filter(|&&v| v > 0.0).map(|&v| -(v / total) * (v / total).log2()).sum()
}

/// One-way six-state secret fraction 1 − H(λ), floored at 0.
pub fn six_state_fraction(q: &QberTriple) -> f64 {
    (1.0 - entropy(&bell_weights(q))).max(0.0)
}

/// Secret fraction with an optional advantage-distillation step.
pub fn six_state_fraction_with(q: &QberTriple, mode: KeyMode) -> f64 {
    let one_way = six_state_fraction(q);
    match mode {
        KeyMode::OneWay => one_way,
        KeyMode::Advantage => {
            let [a, b, c, d] = bell_weights(q);
            let keep = (a + b).powi(2) + (c + d).powi(2);
            if keep <= 0.0 {
                return one_way;
            }
            let next = [a * a + b * b, 2.0 * a * b, c * c + d * d, 2.0 * c * d].map(|v| v / keep);
            let stepped = keep / 2.0 * (1.0 - entropy(&next)).max(0.0);
            one_way.max(stepped)
        }
    }
}

/// Secret bits per second: fraction · p / T.
pub fn key_rate(scheme: &Scheme, meas_keep: f64) -> f64 {
    key_rate_with(scheme, meas_keep, KeyMode::OneWay)
}

pub fn key_rate_with(scheme: &Scheme, meas_keep: f64, mode: KeyMode) -> f64 {
    let f = six_state_fraction_with(&qber(&scheme.metrics.state, meas_keep), mode);
    if f == 0.0 || !(scheme.t() > 0.0) {
        return 0.0;
    }
    f * scheme.p() / scheme.t()
}
