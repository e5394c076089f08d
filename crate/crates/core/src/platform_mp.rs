//! Multiplexed-platform pair generation.
//!
//! Two photon-pair sources (truncated at two pairs) each send one dual-rail
//! half towards a midpoint station and store the other half. The midpoint
//! projects onto Ψ⁺⊗Ψ⁺ click patterns (photon-number resolving), the nodes
//! post-select on holding at least one photon, and the stored dual-rail
//! halves form the logical pair.

use nalgebra::{DMatrix, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platform_ip::{transmissivity, IpParams};
use crate::qstate::{TwoQubitState, C};

type Mat3 = SMatrix<f64, 3, 3>;
type Mat4 = SMatrix<C, 4, 4>;

fn default_window() -> f64 {
    crate::platform_ip::DEFAULT_DETECTION_WINDOW
}

/// Hardware description of a multiplexed node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpParams {
    pub t_prep: f64,
    pub dark_count_rate: f64,
    #[serde(default = "default_window")]
    pub detection_window: f64,
    pub l0: f64,
    pub n_ri: f64,
    /// Efficiency coherence time of the memory, s.
    pub t_coh: f64,
    pub n_modes: u64,
    /// Apparatus efficiency applied once per photonic arm.
    pub p_app: f64,
    /// Boosted-BSM level N: success 1 − 1/2^{N+1}.
    pub bsm_level: u32,
}

impl MpParams {
    pub fn dark_count_prob(&self) -> f64 {
        (self.dark_count_rate * self.detection_window).clamp(0.0, 1.0)
    }

    /// Midpoint-arm efficiency for a link of length `l_km`.
    pub fn arm_efficiency(&self, l_km: f64) -> f64 {
        transmissivity(l_km / 2.0, self.l0) * self.p_app
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_app) {
            return Err(Error::Validation(format!("mp.p_app = {} outside [0, 1]", self.p_app)));
        }
        if self.n_modes < 1 {
            return Err(Error::Validation("mp.n_modes must be >= 1".into()));
        }
        if !(self.t_prep > 0.0 && self.l0 > 0.0 && self.t_coh > 0.0) {
            return Err(Error::Validation("mp: t_prep, l0, t_coh must be > 0".into()));
        }
        if !(self.n_ri >= 1.0) || self.dark_count_rate < 0.0 {
            return Err(Error::Validation("mp: n_ri >= 1 and nonnegative dark counts required".into()));
        }
        Ok(())
    }
}

/// Photon-pair number distribution of the truncated source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcAmplitudes {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

pub fn pdc_probs(n_s: f64) -> PdcAmplitudes {
    let d = n_s + 1.0;
    let p0 = 1.0 / (d * d);
    let p1 = 2.0 * n_s / (d * d * d);
    PdcAmplitudes { p0, p1, p2: 1.0 - p0 - p1 }
}

/// Loss channel on a mode truncated at two photons.
pub fn lossy_kraus(gamma: f64) -> [Mat3; 3] {
    let t = 1.0 - gamma;
    let mut a0 = Mat3::zeros();
    a0[(0, 0)] = 1.0;
    a0[(1, 1)] = t.sqrt();
    a0[(2, 2)] = t;
    let mut a1 = Mat3::zeros();
    a1[(0, 1)] = gamma.sqrt();
    a1[(1, 2)] = (2.0 * t * gamma).sqrt();
    let mut a2 = Mat3::zeros();
    a2[(0, 2)] = gamma;
    [a0, a1, a2]
}

/// 1 − 1/2^{N+1}.
pub fn boosted_bsm_prob(level: u32) -> f64 {
    1.0 - 0.5f64.powi(level as i32 + 1)
}

/// 1 − (1−p)^{N}.
pub fn multiplexed_success(p_el: f64, n_modes: u64) -> f64 {
    crate::timing::success_after(p_el, n_modes)
}

/// Closed-form heralding probability including the factor 4 for the four
/// equivalent click patterns. `eta` is the full midpoint-arm efficiency
/// (channel × p_app), as returned by `MpParams::arm_efficiency`.
pub fn p_succ_closed(n_s: f64, eta: f64, p_app: f64) -> f64 {
    let PdcAmplitudes { p1, p2, .. } = pdc_probs(n_s);
    let bsm = eta * eta
        * (3.0 * p1 * p1 - 4.0 * (4.0 * eta - 3.0) * p1 * p2
            + 4.0 * p2 * (1.0 + p2 * (3.0 - 8.0 * eta + 4.0 * eta * eta)))
        / 24.0;
    let x = 4.0 * (eta - 1.0) * p2 * (p_app - 2.0);
    let nz = p_app * p_app * (p1 + x) * (3.0 * p1 + x)
        / (4.0 * p2 + (p1 + (2.0 - 4.0 * eta) * p2) * (3.0 * p1 + (6.0 - 4.0 * eta) * p2));
    4.0 * bsm * nz
}

/// Heralded fidelity without local loss (p_app = 1).
pub fn fidelity_closed(n_s: f64, eta: f64) -> f64 {
    let e1 = eta - 1.0;
    let n2 = n_s * n_s;
    3.0 / (4.0 * e1 * e1 * n2 * n2 + 24.0 * e1 * e1 * n2 * n_s
        + 4.0 * (9.0 * eta * eta - 20.0 * eta + 11.0) * n2
        - 24.0 * e1 * n_s
        + 3.0)
}

fn check_f(f: f64) -> Result<()> {
    if !(f > 0.5 && f < 1.0) {
        return Err(Error::Domain(format!("fidelity {f} outside (1/2, 1)")));
    }
    Ok(())
}

/// Mean photon number giving fidelity `f` at midpoint efficiency `eta`.
pub fn ns_for_fidelity(f: f64, eta: f64) -> Result<f64> {
    check_f(f)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta {eta} outside [0, 1)")));
    }
    Ok(0.5 * (ns_root(f, eta) - 3.0))
}

fn ns_root(f: f64, eta: f64) -> f64 {
    ((-9.0 * eta * f + 5.0 * f + 2.0 * (f * (f + 3.0)).sqrt()) / (f - eta * f)).sqrt()
}

/// Modes needed to herald once at fidelity `f`, to leading order in small η:
/// F(S−1)⁶ / (32η²(S−3)²) with S the η → 0 root.
pub fn required_modes(f: f64, eta: f64) -> Result<f64> {
    check_f(f)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1]")));
    }
    let s = ns_root(f, 0.0);
    Ok(f * (s - 1.0).powi(6) / (32.0 * eta * eta * (s - 3.0).powi(2)))
}

/// 1/p with p the exact heralding probability at the fidelity-matched N_s.
pub fn required_modes_exact(f: f64, eta: f64) -> Result<f64> {
    check_f(f)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1)")));
    }
    let s = ns_root(f, eta);
    Ok(f * (s - 1.0).powi(6) / (32.0 * eta * eta * (s - 3.0).powi(2)))
}

/// Largest useful N_s: the η → 0 fidelity equals `f_threshold`.
pub fn ns_upper_bound(f_threshold: f64) -> f64 {
    let f = f_threshold;
    0.5 * ((5.0 + 2.0 * (f * (f + 3.0)).sqrt() / f).sqrt() - 3.0)
}

/// N_s grid from 2·10⁻⁴ up to the upper bound in steps of 10⁻⁴.
pub fn ns_grid(f_threshold: f64, step: f64) -> Vec<f64> {
    let hi = ns_upper_bound(f_threshold);
    let lo = 2e-4;
    let n = ((hi - lo) / step).floor() as usize;
    (0..=n).map(|k| lo + step * k as f64).filter(|&x| x <= hi).collect()
}

/// Mode index within a 9-dim dual-rail pair space: 3·n₀ + n₁.
fn dr(n0: usize, n1: usize) -> usize {
    3 * n0 + n1
}

/// Density matrix of one source over (memory pair, midpoint pair), 81×81,
/// after local loss `gamma_local` and midpoint-arm loss `gamma_mid`.
fn source_state(n_s: f64, gamma_local: f64, gamma_mid: f64) -> DMatrix<f64> {
    let PdcAmplitudes { p0, p1, p2 } = pdc_probs(n_s);
    // |n,m⟩_mem |m,n⟩_mid
    let idx = |a0: usize, a1: usize, b0: usize, b1: usize| dr(a0, a1) * 9 + dr(b0, b1);
    let mut v = vec![0.0; 81];
    v[idx(0, 0, 0, 0)] = p0.sqrt();
    let s1 = (p1 / 2.0).sqrt();
    v[idx(1, 0, 0, 1)] = s1;
    v[idx(0, 1, 1, 0)] = s1;
    let s2 = (p2 / 3.0).sqrt();
    v[idx(2, 0, 0, 2)] = s2;
    v[idx(1, 1, 1, 1)] = -s2;
    v[idx(0, 2, 2, 0)] = s2;
    // Expand the pure state into Kraus branches; each branch stays sparse
    // because loss only lowers photon numbers.
    let kl = lossy_kraus(gamma_local);
    let km = lossy_kraus(gamma_mid);
    let mut branches: Vec<Vec<(usize, f64)>> =
        vec![v.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(i, &a)| (i, a)).collect()];
    for (mode, ks) in [(0, &kl), (1, &kl), (2, &km), (3, &km)] {
        let stride = 3usize.pow(3 - mode as u32);
        let mut next = Vec::with_capacity(branches.len() * 3);
        for br in &branches {
            for k in ks {
                let mut out: Vec<(usize, f64)> = Vec::with_capacity(br.len());
                for &(i, amp) in br {
                    let a = (i / stride) % 3;
                    let base = i - a * stride;
                    for d in 0..3 {
                        let kda = k[(d, a)];
                        if kda != 0.0 {
                            let j = base + d * stride;
                            match out.iter_mut().find(|(x, _)| *x == j) {
                                Some(e) => e.1 += kda * amp,
                                None => out.push((j, kda * amp)),
                            }
                        }
                    }
                }
                if !out.is_empty() {
                    next.push(out);
                }
            }
        }
        branches = next;
    }
    let mut rho = DMatrix::<f64>::zeros(81, 81);
    for br in &branches {
        for &(i, a) in br {
            for &(j, b) in br {
                rho[(i, j)] += a * b;
            }
        }
    }
    rho
}

/// Full heralded state of an MP attempt over the two stored dual-rail pairs.
#[derive(Debug, Clone)]
pub struct MpHerald {
    /// Unnormalized post-selected operator on (memory a) ⊗ (memory d),
    /// restricted to the logical dual-rail block, indexed by logical label.
    pub logical: [[f64; 4]; 4],
    /// Heralding probability per attempt (all four patterns).
    pub p_el: f64,
}

/// Midpoint photon configurations with one photon per time bin: (b-side, c-side).
fn one_per_bin() -> [(usize, usize); 4] {
    // x0, x1 ∈ {b, c}
    [
        (dr(1, 1), dr(0, 0)),
        (dr(1, 0), dr(0, 1)),
        (dr(0, 1), dr(1, 0)),
        (dr(0, 0), dr(1, 1)),
    ]
}

fn nonzero_mask(i: usize) -> bool {
    i / 9 != 0 && i % 9 != 0
}

/// Herald on one pattern, post-select, and account for dark-count heralds.
pub fn mp_herald(n_s: f64, eta_mid: f64, p_app: f64, p_dc: f64) -> MpHerald {
    let rho = source_state(n_s, 1.0 - p_app, 1.0 - eta_mid);
    // Source 2 is the mirror image; its midpoint modes are c, memory modes d.
    let configs = one_per_bin();
    let singles = [dr(1, 0), dr(0, 1)];
    let vac = dr(0, 0);
    // The completing dark click is random, so the logical phase is lost.
    let z = |i: usize| if (i % 9) % 3 == 1 { -1.0 } else { 1.0 };
    // kron of (memory a, midpoint x) and (memory d, midpoint y) blocks
    let kron = |i: usize, j: usize, x: (usize, usize), y: (usize, usize)| {
        rho[(9 * (i / 9) + x.0, 9 * (j / 9) + x.1)] * rho[(9 * (i % 9) + y.0, 9 * (j % 9) + y.1)]
    };
    // Multi-photon and vacuum memory components never count as successes.
    let entry = |i: usize, j: usize| {
        {
            let mut v = 0.0;
            for &(b1, c1) in &configs {
                for &(b2, c2) in &configs {
                    v += kron(i, j, (b1, b2), (c1, c2));
                }
            }
            if p_dc > 0.0 {
                // A single midpoint photon completed by a dark count in the other bin.
                let mut fh = 0.0;
                for &x in &singles {
                    fh += kron(i, j, (x, x), (vac, vac)) + kron(i, j, (vac, vac), (x, x));
                }
                v += fh * (1.0 + z(i) * z(j)) * p_dc;
            }
            v
        }
    };
    // Heralding counts every post-selected memory configuration.
    let p_el = (0..81).filter(|&i| nonzero_mask(i)).map(|i| entry(i, i)).sum();
    let logical = std::array::from_fn(|i| std::array::from_fn(|j| entry(logical_index(i), logical_index(j))));
    MpHerald { logical, p_el }
}

fn logical_index(k: usize) -> usize {
    // logical |0⟩ = |1,0⟩, |1⟩ = |0,1⟩ per dual-rail pair
    let l = |b: usize| if b == 0 { dr(1, 0) } else { dr(0, 1) };
    9 * l(k >> 1) + l(k & 1)
}

impl MpHerald {
    /// Fidelity with the logical Ψ⁺, normalized over the full post-selected
    /// space (multi-photon components count as failures).
    pub fn fidelity(&self) -> f64 {
        let l = &self.logical;
        0.5 * (l[1][1] + l[2][2] + 2.0 * l[1][2]) / self.p_el
    }

    /// Two-qubit image: the logical block (X on d moves Ψ⁺ to Φ⁺); weight
    /// outside the logical block is spread as (I − Φ⁺)/3, preserving fidelity.
    pub fn to_state(&self) -> TwoQubitState {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i ^ 1, j ^ 1)] = C::new(self.logical[i][j] / self.p_el, 0.0);
            }
        }
        let w = 1.0 - m.trace().re;
        if w > 0.0 {
            let phi = TwoQubitState::phi_plus();
            m += (Mat4::identity() - phi.matrix()) * C::new(w / 3.0, 0.0);
        }
        TwoQubitState::from_matrix_unchecked(m)
    }
}

/// Pair generation on a multiplexed link, per mode.
#[derive(Debug, Clone, Copy)]
pub struct MpEpg {
    pub state: TwoQubitState,
    pub fidelity: f64,
    pub p_el: f64,
}

pub fn mp_epg(n_s: f64, l_km: f64, params: &MpParams) -> Result<MpEpg> {
    mp_epg_with(n_s, params.arm_efficiency(l_km), params.p_app, params.dark_count_prob())
}

pub fn mp_epg_with(n_s: f64, eta_mid: f64, p_app: f64, p_dc: f64) -> Result<MpEpg> {
    if !(n_s > 0.0) {
        return Err(Error::Domain(format!("n_s = {n_s} must be > 0")));
    }
    let h = mp_herald(n_s, eta_mid, p_app, p_dc);
    if !(h.p_el > 0.0) {
        return Err(Error::Infeasible("MP heralding probability is zero".into()));
    }
    Ok(MpEpg { state: h.to_state(), fidelity: h.fidelity(), p_el: h.p_el.min(1.0) })
}

/// MP source whose pairs are moved losslessly into IP memories. The state is
/// identical; only the downstream storage and gate models change.
pub fn combined_epg(n_s: f64, l_km: f64, mp: &MpParams, _ip: &IpParams) -> Result<MpEpg> {
    mp_epg(n_s, l_km, mp)
}
