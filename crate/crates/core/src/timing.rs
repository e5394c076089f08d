//! Near-deterministic repetition: success probabilities, attempt counts,
//! time-averaged storage decay and attempt durations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, km/s.
pub const C_LIGHT_KM_S: f64 = 299_792.458;

/// 1 − (1−p)^r.
pub fn success_after(p: f64, r: u64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    -(r as f64 * (-p).ln_1p()).exp_m1()
}

/// Smallest r with `success_after(p, r) >= p_min`.
pub fn attempts_for(p: f64, p_min: f64) -> Result<u64> {
    if p <= 0.0 {
        return Err(Error::Infeasible("attempt success probability is zero".into()));
    }
    if p >= p_min {
        return Ok(1);
    }
    let est = ((-p_min).ln_1p() / (-p).ln_1p()).ceil();
    if !est.is_finite() || est > 1e15 {
        return Err(Error::Infeasible(format!("p = {p} needs too many attempts")));
    }
    let mut r = (est as u64).max(1);
    // Guard the ceiling against rounding in either direction.
    while success_after(p, r) < p_min {
        r += 1;
    }
    while r > 1 && success_after(p, r - 1) >= p_min {
        r -= 1;
    }
    Ok(r)
}

/// E[e^{−c(r−j)}] with j the first success round of a geometric process with
/// per-round probability p, conditioned on success within r rounds.
pub fn avg_decay_factor(p: f64, r: u64, c: f64) -> f64 {
    debug_assert!(r >= 1 && c >= 0.0);
    if c == 0.0 || r == 1 {
        return 1.0;
    }
    if c.is_infinite() {
        // Only a success in the last round survives.
        return if p >= 1.0 { 0.0 } else { p * (1.0 - p).powi((r - 1) as i32) / success_after(p, r) };
    }
    if p >= 1.0 {
        return (-c * (r - 1) as f64).exp();
    }
    p * geometric_decay_sum(p, r, c) / success_after(p, r)
}

/// Σ_{j=1}^{r} (1−p)^{j−1} e^{−c(r−j)}, evaluated without cancellation.
fn geometric_decay_sum(p: f64, r: u64, c: f64) -> f64 {
    let lq = (-p).ln_1p();
    let rf = r as f64;
    // Terms are q^{j−1} b^{r−j} with b = e^{−c}; factor out the larger end.
    let la = lq + c; // ln(q/b)
    if la == 0.0 {
        return rf * (-c * (rf - 1.0)).exp();
    }
    if la < 0.0 {
        // b dominates: b^{r−1} Σ_k (q/b)^k
        (-c * (rf - 1.0)).exp() * (rf * la).exp_m1() / la.exp_m1()
    } else {
        // q dominates: q^{r−1} Σ_k (b/q)^k
        let lb = -la;
        (lq * (rf - 1.0)).exp() * (rf * lb).exp_m1() / lb.exp_m1()
    }
}

/// Probability that a block of r attempts succeeds and both memories still
/// emit at readout, with c = c₁ + c₂ the summed per-attempt decay exponents.
pub fn mp_retrieval_prob(p: f64, r: u64, c: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if c == 0.0 {
        return success_after(p, r);
    }
    if p >= 1.0 {
        return (-c * (r - 1) as f64).exp();
    }
    (p * geometric_decay_sum(p, r, c)).min(1.0)
}

/// The attempt count maximizing [`mp_retrieval_prob`], from the stationary
/// point of its continuous extension.
pub fn optimal_attempts_mp(p: f64, c: f64) -> u64 {
    if p >= 1.0 || c.is_infinite() {
        return 1;
    }
    let lq = (-p).ln_1p();
    let x = (c - (-(c.exp()) * lq / c).ln()) / (c + lq);
    let base = if x.is_finite() { x.floor().max(1.0) } else { 1.0 };
    let lo = base.min(1e15) as u64;
    let hi = lo + 1;
    if mp_retrieval_prob(p, hi, c) > mp_retrieval_prob(p, lo, c) {
        hi
    } else {
        lo.max(1)
    }
}

/// max over r of [`mp_retrieval_prob`].
pub fn max_retrieval_prob(p: f64, c: f64) -> f64 {
    let mut r = optimal_attempts_mp(p, c);
    while mp_retrieval_prob(p, r + 1, c) > mp_retrieval_prob(p, r, c) {
        r += 1;
    }
    while r > 1 && mp_retrieval_prob(p, r - 1, c) > mp_retrieval_prob(p, r, c) {
        r -= 1;
    }
    mp_retrieval_prob(p, r, c)
}

/// Largest summed decay exponent c for which some block length still reaches
/// `p_min`. `None` when a single attempt already does (no finite limit).
pub fn critical_decay_constant(p: f64, p_min: f64) -> Option<f64> {
    if p >= p_min {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while max_retrieval_prob(p, hi) >= p_min {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if max_retrieval_prob(p, mid) >= p_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Epg,
    Swap,
    Distill,
}

/// How far the EPG heralding signal travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeraldPath {
    /// Photon to the midpoint and heralding signal back: L in total.
    #[default]
    RoundTrip,
    /// Only the midpoint-to-node leg is counted: L/2.
    OneWay,
}

/// Classical-processing times that the hardware tables leave open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    pub t_swap: f64,
    pub t_distill: f64,
    pub herald_path: HeraldPath,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams { t_swap: 0.0, t_distill: 0.0, herald_path: HeraldPath::RoundTrip }
    }
}

/// Duration of one attempt of a stage. `length_km` is the elementary link
/// length for EPG and the merged span length otherwise.
pub fn attempt_duration(length_km: f64, stage: Stage, t_prep: f64, n_ri: f64, timing: &TimingParams) -> f64 {
    let travel = length_km * n_ri / C_LIGHT_KM_S;
    match stage {
        Stage::Epg => {
            t_prep
                + match timing.herald_path {
                    HeraldPath::RoundTrip => travel,
                    HeraldPath::OneWay => travel / 2.0,
                }
        }
        Stage::Swap => timing.t_swap + travel,
        Stage::Distill => timing.t_distill + travel,
    }
}
