//! Elementary pair generation on information-processing nodes.
//!
//! Each node holds a spin that emits (|↑⟩) or does not emit (|↓⟩) a photon
//! into its fibre arm. The photons interfere on a midpoint beamsplitter read
//! by two threshold detectors; exactly one click heralds. The whole process is
//! simulated on the explicit spin ⊗ photon space, so success probability and
//! heralded state come out of the same density matrix.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{apply_pauli_map, deph_weights, GateNoise, Side, TwoQubitState, C};

type Mat16 = SMatrix<C, 16, 16>;
type Mat4 = SMatrix<C, 4, 4>;

const ZERO: C = C::new(0.0, 0.0);

pub const DEFAULT_DETECTION_WINDOW: f64 = 30e-9;

fn default_window() -> f64 {
    DEFAULT_DETECTION_WINDOW
}

/// Hardware description of an information-processing node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpParams {
    /// Entanglement preparation time, s.
    pub t_prep: f64,
    /// Preparation fidelity; each qubit is dephased with keep 2F−1.
    pub f_prep: f64,
    /// Detector dark counts, Hz.
    pub dark_count_rate: f64,
    /// Detection window per attempt, s.
    #[serde(default = "default_window")]
    pub detection_window: f64,
    /// Fibre attenuation length, km.
    pub l0: f64,
    pub n_ri: f64,
    /// Optical phase uncertainty, rad.
    pub delta_phi: f64,
    pub t_depol: f64,
    pub t_deph: f64,
    pub p_em: f64,
    pub p_pps: f64,
    pub p_det: f64,
    pub f_gates: f64,
    pub f_gates_deph: f64,
}

impl IpParams {
    pub fn gate_noise(&self) -> GateNoise {
        GateNoise::from_gate_fidelity(self.f_gates, self.f_gates_deph)
    }

    pub fn dark_count_prob(&self) -> f64 {
        (self.dark_count_rate * self.detection_window).clamp(0.0, 1.0)
    }

    /// Photon survival probability of one arm of a link of length `l_km`.
    pub fn arm_efficiency(&self, l_km: f64) -> f64 {
        self.p_em * self.p_pps * transmissivity(l_km / 2.0, self.l0) * self.p_det
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("f_prep", self.f_prep),
            ("p_em", self.p_em),
            ("p_pps", self.p_pps),
            ("p_det", self.p_det),
            ("f_gates", self.f_gates),
            ("f_gates_deph", self.f_gates_deph),
        ];
        for (n, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("ip.{n} = {v} outside [0, 1]")));
            }
        }
        let pos = [
            ("t_prep", self.t_prep),
            ("l0", self.l0),
            ("t_depol", self.t_depol),
            ("t_deph", self.t_deph),
        ];
        for (n, v) in pos {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("ip.{n} = {v} must be > 0")));
            }
        }
        if !(self.n_ri >= 1.0) || self.dark_count_rate < 0.0 || self.detection_window < 0.0 {
            return Err(Error::Validation("ip: n_ri >= 1 and nonnegative dark counts required".into()));
        }
        Ok(())
    }
}

/// e^{−L/L₀}.
pub fn transmissivity(l_km: f64, l0_km: f64) -> f64 {
    (-l_km / l0_km).exp()
}

/// A heralded pair and the per-attempt success probability.
#[derive(Debug, Clone, Copy)]
pub struct EpgOutput {
    pub state: TwoQubitState,
    pub p_attempt: f64,
}

/// Link-level optical parameters of one attempt.
#[derive(Debug, Clone, Copy)]
pub struct ArmOptics {
    pub eta_a: f64,
    pub eta_b: f64,
    /// Keep factor of the relative optical phase.
    pub phase_keep: f64,
    pub p_dc: f64,
}

impl ArmOptics {
    pub fn symmetric(l_km: f64, params: &IpParams) -> Self {
        let eta = params.arm_efficiency(l_km);
        ArmOptics {
            eta_a: eta,
            eta_b: eta,
            phase_keep: (-params.delta_phi * params.delta_phi / 2.0).exp(),
            p_dc: params.dark_count_prob(),
        }
    }

    pub fn between(l_km: f64, a: &IpParams, b: &IpParams) -> Self {
        let phase = 0.5 * (a.delta_phi + b.delta_phi);
        ArmOptics {
            eta_a: a.arm_efficiency(l_km),
            eta_b: b.arm_efficiency(l_km),
            phase_keep: (-phase * phase / 2.0).exp(),
            p_dc: 0.5 * (a.dark_count_prob() + b.dark_count_prob()),
        }
    }
}

/// Index layout of the 16-dim space: 8·sA + 4·sB + 2·photon_a + photon_b.
fn emit(spins: &Mat4) -> Mat16 {
    let v = |x: usize| (x << 2) | x; // spin value copied onto the photon
    let mut out = Mat16::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[(v(i), v(j))] = spins[(i, j)];
        }
    }
    out
}

/// Amplitude damping on qubit `q` of four with transmission `eta`.
fn damp(m: &Mat16, q: usize, eta: f64) -> Mat16 {
    let bit = 1usize << (3 - q);
    let k0 = |x: usize| if x & bit != 0 { eta.sqrt() } else { 1.0 };
    let mut out = Mat16::from_fn(|i, j| m[(i, j)] * C::new(k0(i) * k0(j), 0.0));
    let loss = 1.0 - eta;
    if loss > 0.0 {
        for i in 0..16 {
            if i & bit != 0 {
                continue;
            }
            for j in 0..16 {
                if j & bit != 0 {
                    continue;
                }
                out[(i, j)] += m[(i | bit, j | bit)] * C::new(loss, 0.0);
            }
        }
    }
    out
}

/// Beamsplitter output amplitudes ⟨n_c n_d| V |a b⟩ for photon numbers a, b ∈ {0,1}.
fn bs_amplitudes() -> [[f64; 9]; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let idx = |c: usize, d: usize| 3 * c + d;
    let mut v = [[0.0; 9]; 4];
    v[0][idx(0, 0)] = 1.0;
    // |01⟩ (photon from b)
    v[1][idx(1, 0)] = h;
    v[1][idx(0, 1)] = -h;
    // |10⟩ (photon from a)
    v[2][idx(1, 0)] = h;
    v[2][idx(0, 1)] = h;
    // |11⟩: Hong–Ou–Mandel bunching
    v[3][idx(2, 0)] = h;
    v[3][idx(0, 2)] = -h;
    v
}

/// POVM element on the photon pair (a,b) for "only detector c (d) clicks".
fn herald_povm(p_dc: f64, on_c: bool) -> [[f64; 4]; 4] {
    let v = bs_amplitudes();
    let mut m = [[0.0; 4]; 4];
    for c in 0..3 {
        for d in 0..3 {
            let (mine, other) = if on_c { (c, d) } else { (d, c) };
            let click = if mine > 0 { 1.0 } else { p_dc };
            let quiet = if other == 0 { 1.0 - p_dc } else { 0.0 };
            let w = click * quiet;
            if w == 0.0 {
                continue;
            }
            let k = 3 * c + d;
            for x in 0..4 {
                for y in 0..4 {
                    m[x][y] += w * v[x][k] * v[y][k];
                }
            }
        }
    }
    m
}

/// One emission/interference/detection round acting on a spin state.
/// Returns the unnormalized heralded spin operator, with the d-click outcome
/// Z-corrected on spin A so both outcomes herald the same Bell state.
fn herald_round(spins: &Mat4, optics: &ArmOptics, with_phase: bool) -> Mat4 {
    let mut rho = emit(spins);
    rho = damp(&rho, 2, optics.eta_a);
    rho = damp(&rho, 3, optics.eta_b);
    if with_phase {
        rho = apply_pauli_map(&rho, 4, 3, &deph_weights(optics.phase_keep));
    }
    let mut out = Mat4::zeros();
    for on_c in [true, false] {
        let m = herald_povm(optics.p_dc, on_c);
        let mut s = Mat4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = ZERO;
                for x in 0..4 {
                    for y in 0..4 {
                        if m[x][y] != 0.0 {
                            acc += rho[(4 * a + y, 4 * b + x)] * m[x][y];
                        }
                    }
                }
                s[(a, b)] = acc;
            }
        }
        if !on_c {
            // Z on spin A: sign flip when exactly one of the row/col has sA = 1.
            s = Mat4::from_fn(|i, j| if ((i >> 1) ^ (j >> 1)) & 1 == 1 { -s[(i, j)] } else { s[(i, j)] });
        }
        out += s;
    }
    out
}

fn flip_both(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|i, j| m[(i ^ 3, j ^ 3)])
}

/// Ψ⁺ → Φ⁺ by X on spin B, then preparation dephasing on both spins.
fn finish(m: Mat4, f_prep_a: f64, f_prep_b: f64) -> Result<EpgOutput> {
    let p = m.trace().re;
    if !(p > 0.0) {
        return Err(Error::Infeasible("heralding probability is zero".into()));
    }
    let framed = Mat4::from_fn(|i, j| m[(i ^ 1, j ^ 1)]) / C::new(p, 0.0);
    let mut s = TwoQubitState::from_matrix_unchecked(framed);
    s = crate::qstate::dephase(&s, (2.0 * f_prep_a - 1.0).clamp(0.0, 1.0), Side::A)?;
    s = crate::qstate::dephase(&s, (2.0 * f_prep_b - 1.0).clamp(0.0, 1.0), Side::B)?;
    Ok(EpgOutput { state: s, p_attempt: p.min(1.0) })
}

fn product_spins(s: f64) -> Mat4 {
    let amp = [(1.0 - s).sqrt(), s.sqrt()];
    Mat4::from_fn(|i, j| C::new(amp[i >> 1] * amp[i & 1] * amp[j >> 1] * amp[j & 1], 0.0))
}

/// Single-click generation with bright-state population s = cos²θ.
pub fn single_click_epg(theta: f64, l_km: f64, params: &IpParams) -> Result<EpgOutput> {
    single_click_with(theta, &ArmOptics::symmetric(l_km, params), params.f_prep, params.f_prep)
}

pub fn single_click_with(theta: f64, optics: &ArmOptics, f_prep_a: f64, f_prep_b: f64) -> Result<EpgOutput> {
    let s = theta.cos().powi(2);
    if s < f64::EPSILON {
        return Err(Error::Infeasible("cos θ = 0: no bright-state component".into()));
    }
    let out = herald_round(&product_spins(s), optics, true);
    finish(out, f_prep_a, f_prep_b)
}

/// Double-click generation: two single-click rounds at s = ½ with both spins
/// flipped in between and afterwards. The optical phase cancels between
/// rounds, so no phase noise enters.
pub fn double_click_epg(l_km: f64, params: &IpParams) -> Result<EpgOutput> {
    double_click_with(&ArmOptics::symmetric(l_km, params), params.f_prep, params.f_prep)
}

pub fn double_click_with(optics: &ArmOptics, f_prep_a: f64, f_prep_b: f64) -> Result<EpgOutput> {
    let first = herald_round(&product_spins(0.5), optics, false);
    let second = herald_round(&flip_both(&first), optics, false);
    finish(flip_both(&second), f_prep_a, f_prep_b)
}

/// θ grid used by the optimizer: `steps` equally spaced values on [½, π].
pub fn theta_grid(steps: usize) -> Vec<f64> {
    let (lo, hi) = (0.5, std::f64::consts::PI);
    match steps {
        0 => vec![],
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
