//! Independent reference constructions used as test oracles. They share no
//! code with the library beyond plain data types.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

pub type M = DMatrix<C>;

pub fn c(x: f64) -> C {
    C::new(x, 0.0)
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    M::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn x() -> M {
    M::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}
pub fn z() -> M {
    M::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}
pub fn y() -> M {
    let i = C::new(0.0, 1.0);
    M::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])
}

/// Single-qubit operator `u` on qubit `q` of `n` (qubit 0 leftmost).
pub fn on(u: &M, q: usize, n: usize) -> M {
    let id = eye(2);
    let mut out = M::identity(1, 1);
    for k in 0..n {
        out = kron(&out, if k == q { u } else { &id });
    }
    out
}

pub fn depol(rho: &M, q: usize, n: usize, keep: f64) -> M {
    // ρ ↦ kρ + (1−k)·(I/2 ⊗ tr_q ρ), written as a Pauli twirl.
    let mut tw = rho.clone();
    for p in [x(), y(), z()] {
        let u = on(&p, q, n);
        tw += &u * rho * &u;
    }
    rho * c(keep) + tw * c((1.0 - keep) / 4.0)
}

pub fn deph(rho: &M, q: usize, n: usize, keep: f64) -> M {
    let u = on(&z(), q, n);
    rho * c((1.0 + keep) / 2.0) + &u * rho * &u * c((1.0 - keep) / 2.0)
}

/// Bell vectors Φ⁺, Ψ⁺, Φ⁻, Ψ⁻ over |00⟩,|01⟩,|10⟩,|11⟩.
pub fn bell_vectors() -> [Vec<f64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [vec![h, 0.0, 0.0, h], vec![0.0, h, h, 0.0], vec![h, 0.0, 0.0, -h], vec![0.0, h, -h, 0.0]]
}

pub fn phi_plus() -> M {
    let v = &bell_vectors()[0];
    M::from_fn(4, 4, |i, j| c(v[i] * v[j]))
}

pub fn werner(f: f64) -> M {
    phi_plus() * c((4.0 * f - 1.0) / 3.0) + eye(4) * c((1.0 - f) / 3.0)
}

pub fn fid(rho: &M) -> f64 {
    let v = &bell_vectors()[0];
    let mut s = C::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            s += v[i] * rho[(i, j)] * v[j];
        }
    }
    s.re
}

/// ⟨b| on qubits (q1, q1+1) of a 4-qubit operator, leaving qubits
/// (0, 3) → 4×4 block for outer qubits.
fn contract_inner(rho: &M, bra: &[f64], ket: &[f64]) -> M {
    M::from_fn(4, 4, |i, j| {
        let (i0, i3) = (i >> 1, i & 1);
        let (j0, j3) = (j >> 1, j & 1);
        let mut acc = C::new(0.0, 0.0);
        for m in 0..4 {
            for n in 0..4 {
                if bra[m] == 0.0 || ket[n] == 0.0 {
                    continue;
                }
                let r = (i0 << 3) | (m << 1) | i3;
                let s = (j0 << 3) | (n << 1) | j3;
                acc += bra[m] * rho[(r, s)] * ket[n];
            }
        }
        acc
    })
}

/// Swap by explicit Bell projections on the inner qubits of a ⊗ b, with
/// depolarizing-then-dephasing noise on both measured qubits; each outcome
/// is corrected by the Pauli on the last qubit that maps the ideal output
/// back to Φ⁺, and all outcomes are summed.
pub fn swap_oracle(a: &M, b: &M, bsm_depol: f64, bsm_deph: f64) -> M {
    let raw = |a: &M, b: &M, noisy: bool| -> Vec<M> {
        let mut rho = kron(a, b);
        if noisy {
            for q in [1, 2] {
                rho = depol(&rho, q, 4, bsm_depol);
                rho = deph(&rho, q, 4, bsm_deph);
            }
        }
        bell_vectors().iter().map(|v| contract_inner(&rho, v, v)).collect()
    };
    let ideal = raw(&phi_plus(), &phi_plus(), false);
    let corr: Vec<M> = ideal
        .iter()
        .map(|o| {
            [eye(2), x(), y(), z()]
                .into_iter()
                .map(|p| on(&p, 1, 2))
                .max_by(|u, w| {
                    let fu = fid(&(u * o * u));
                    let fw = fid(&(w * o * w));
                    fu.total_cmp(&fw)
                })
                .unwrap()
        })
        .collect();
    let outs = raw(a, b, true);
    let mut sum = M::zeros(4, 4);
    for (o, u) in outs.iter().zip(&corr) {
        sum += u * o * u;
    }
    sum
}

fn rx(theta: f64) -> M {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    M::from_row_slice(2, 2, &[c(co), C::new(0.0, -si), C::new(0.0, -si), c(co)])
}

/// CNOT control `ctl`, target `tgt` on `n` qubits from projectors.
fn cnot(ctl: usize, tgt: usize, n: usize) -> M {
    let p0 = M::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    let p1 = M::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
    on(&p0, ctl, n) + on(&p1, ctl, n) * on(&x(), tgt, n)
}

#[derive(Clone, Copy)]
pub struct PartyNoise {
    pub cnot_depol: f64,
    pub cnot_deph: f64,
    pub meas_depol: f64,
}

/// DEJMPS on (A1,B1) ⊗ (A2,B2) with explicit gates. Returns the kept,
/// normalized state on (A1,B1) and the success probability.
pub fn dejmps_oracle(a: &M, b: &M, alice: PartyNoise, bob: PartyNoise) -> (M, f64) {
    let n = 4;
    let mut rho = kron(a, b);
    let rot = on(&rx(std::f64::consts::FRAC_PI_2), 0, n)
        * on(&rx(-std::f64::consts::FRAC_PI_2), 1, n)
        * on(&rx(std::f64::consts::FRAC_PI_2), 2, n)
        * on(&rx(-std::f64::consts::FRAC_PI_2), 3, n);
    rho = &rot * rho * rot.adjoint();
    let u = cnot(0, 2, n) * cnot(1, 3, n);
    rho = &u * rho * u.adjoint();
    for (q, p) in [(0, alice), (1, bob), (2, alice), (3, bob)] {
        rho = depol(&rho, q, n, p.cnot_depol);
        rho = deph(&rho, q, n, p.cnot_deph);
    }
    rho = depol(&rho, 2, n, alice.meas_depol);
    rho = depol(&rho, 3, n, bob.meas_depol);
    let mut kept = M::zeros(4, 4);
    for t in [0usize, 3] {
        for i in 0..4 {
            for j in 0..4 {
                kept[(i, j)] += rho[(4 * i + t, 4 * j + t)];
            }
        }
    }
    let p = kept.trace().re;
    (kept / c(p), p)
}

/// A random valid two-qubit state: mixture of a random pure state and a
/// random Bell-diagonal state, from a seed slice of 12 numbers in [−1, 1].
pub fn generic_state(seed: &[f64]) -> M {
    let mut v: Vec<C> = (0..4).map(|i| C::new(seed[2 * i], seed[2 * i + 1])).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt().max(1e-9);
    v.iter_mut().for_each(|a| *a /= norm);
    let pure = M::from_fn(4, 4, |i, j| v[i] * v[j].conj());
    bell_diag_state(&seed[8..12]) * c(0.6) + pure * c(0.4)
}

pub fn bell_diag_state(w: &[f64]) -> M {
    let w: Vec<f64> = w.iter().map(|v| v.abs() + 1e-3).collect();
    let t: f64 = w.iter().sum();
    let mut m = M::zeros(4, 4);
    for (k, v) in bell_vectors().iter().enumerate() {
        m += M::from_fn(4, 4, |i, j| c(v[i] * v[j])) * c(w[k] / t);
    }
    m
}

// ---------------------------------------------------------------------------
// Single-/double-click pair generation by pure-state trajectories.

pub struct Optics {
    pub eta_a: f64,
    pub eta_b: f64,
    pub phase_keep: f64,
    pub p_dc: f64,
}

/// One heralding round on a mixture of spin vectors (sA, sB). Each spin in
/// |1⟩ emits one photon into its arm. Losses, phase noise and the
/// (unobserved) detector record are enumerated as orthogonal branches.
fn click_round(input: &[(f64, [C; 4])], o: &Optics, with_phase: bool) -> Vec<(f64, [C; 4])> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![];
    let phases: Vec<(f64, f64)> =
        if with_phase { vec![((1.0 + o.phase_keep) / 2.0, 1.0), ((1.0 - o.phase_keep) / 2.0, -1.0)] } else { vec![(1.0, 1.0)] };
    for &(w, psi) in input {
        for &(wp, sign) in &phases {
            for lost_a in [false, true] {
                for lost_b in [false, true] {
                    // amplitude per (spins, detector-mode occupation nc, nd)
                    let mut amp = vec![[C::new(0.0, 0.0); 4]; 9];
                    for s in 0..4 {
                        let (sa, sb) = (s >> 1, s & 1);
                        let mut a = psi[s];
                        let pa = if sa == 1 {
                            if lost_a {
                                a *= (1.0 - o.eta_a).sqrt();
                                0
                            } else {
                                a *= o.eta_a.sqrt();
                                1
                            }
                        } else if lost_a {
                            continue;
                        } else {
                            0
                        };
                        let pb = if sb == 1 {
                            if lost_b {
                                a *= (1.0 - o.eta_b).sqrt();
                                0
                            } else {
                                a *= o.eta_b.sqrt() * sign;
                                1
                            }
                        } else if lost_b {
                            continue;
                        } else {
                            0
                        };
                        // 50:50 beamsplitter: a† → (c† + d†)/√2, b† → (c† − d†)/√2
                        match (pa, pb) {
                            (0, 0) => amp[0][s] += a,
                            (1, 0) => {
                                amp[3][s] += a * h;
                                amp[1][s] += a * h;
                            }
                            (0, 1) => {
                                amp[3][s] += a * h;
                                amp[1][s] -= a * h;
                            }
                            _ => {
                                // (c†+d†)(c†−d†)/2 = (c†² − d†²)/2 → |2,0⟩/√2 − |0,2⟩/√2
                                amp[6][s] += a * h;
                                amp[2][s] -= a * h;
                            }
                        }
                    }
                    for (k, v) in amp.iter().enumerate() {
                        let (nc, nd) = (k / 3, k % 3);
                        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
                        if norm == 0.0 {
                            continue;
                        }
                        for on_c in [true, false] {
                            let (mine, other) = if on_c { (nc, nd) } else { (nd, nc) };
                            let pc = if mine > 0 { 1.0 } else { o.p_dc };
                            let pq = if other == 0 { 1.0 - o.p_dc } else { 0.0 };
                            let wk = pc * pq;
                            if wk == 0.0 {
                                continue;
                            }
                            let mut v = *v;
                            if !on_c {
                                // Z on spin A
                                v[2] = -v[2];
                                v[3] = -v[3];
                            }
                            out.push((w * wp * wk, v));
                        }
                    }
                }
            }
        }
    }
    out
}

fn to_state(branches: &[(f64, [C; 4])], f_prep: f64) -> (M, f64) {
    let mut m = M::zeros(4, 4);
    for (w, v) in branches {
        // Ψ⁺ → Φ⁺ by X on spin B
        let v2 = [v[1], v[0], v[3], v[2]];
        m += M::from_fn(4, 4, |i, j| v2[i] * v2[j].conj()) * c(*w);
    }
    let p = m.trace().re;
    let mut rho = m / c(p);
    let k = 2.0 * f_prep - 1.0;
    rho = deph(&rho, 0, 2, k);
    rho = deph(&rho, 1, 2, k);
    (rho, p)
}

pub fn single_click_oracle(s: f64, o: &Optics, f_prep: f64) -> (M, f64) {
    let amp = [(1.0 - s).sqrt(), s.sqrt()];
    let psi = [c(amp[0] * amp[0]), c(amp[0] * amp[1]), c(amp[1] * amp[0]), c(amp[1] * amp[1])];
    to_state(&click_round(&[(1.0, psi)], o, true), f_prep)
}

pub fn double_click_oracle(o: &Optics, f_prep: f64) -> (M, f64) {
    let psi = [c(0.5); 4];
    let flip = |v: &[(f64, [C; 4])]| -> Vec<(f64, [C; 4])> { v.iter().map(|(w, a)| (*w, [a[3], a[2], a[1], a[0]])).collect() };
    let first = click_round(&[(1.0, psi)], o, false);
    let second = click_round(&flip(&first), o, false);
    to_state(&flip(&second), f_prep)
}

// ---------------------------------------------------------------------------
// Multiplexed pair generation in truncated Fock space.

/// Index of a dual-rail pair (n₀, n₁) ∈ {0,1,2}².
fn dr(n0: usize, n1: usize) -> usize {
    3 * n0 + n1
}

/// Sparse amplitude branches of one source over (memory pair, midpoint
/// pair) after loss, each as a map from 81-dim index to amplitude.
fn source_branches(n_s: f64, g_local: f64, g_mid: f64) -> Vec<Vec<f64>> {
    let d = n_s + 1.0;
    let p0 = 1.0 / (d * d);
    let p1 = 2.0 * n_s / (d * d * d);
    let p2 = 1.0 - p0 - p1;
    let idx = |m0: usize, m1: usize, b0: usize, b1: usize| 9 * dr(m0, m1) + dr(b0, b1);
    let mut v = vec![0.0; 81];
    v[idx(0, 0, 0, 0)] = p0.sqrt();
    v[idx(1, 0, 0, 1)] = (p1 / 2.0).sqrt();
    v[idx(0, 1, 1, 0)] = (p1 / 2.0).sqrt();
    v[idx(2, 0, 0, 2)] = (p2 / 3.0).sqrt();
    v[idx(1, 1, 1, 1)] = -(p2 / 3.0).sqrt();
    v[idx(0, 2, 2, 0)] = (p2 / 3.0).sqrt();
    // Loss of k photons out of n: amplitude √(C(n,k) γ^k (1−γ)^{n−k}).
    let binom = |n: usize, k: usize| [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 2.0, 1.0]][n][k];
    let mut branches = vec![v];
    for mode in 0..4 {
        let g = if mode < 2 { g_local } else { g_mid };
        let stride = [27, 9, 3, 1][mode];
        let mut next = vec![];
        for br in &branches {
            for k in 0..3 {
                let mut out = vec![0.0; 81];
                let mut any = false;
                for (i, &a) in br.iter().enumerate() {
                    let n = (i / stride) % 3;
                    if a == 0.0 || k > n {
                        continue;
                    }
                    let amp = (binom(n, k) * g.powi(k as i32) * (1.0 - g).powi((n - k) as i32)).sqrt();
                    out[i - k * stride] += a * amp;
                    any = true;
                }
                if any {
                    next.push(out);
                }
            }
        }
        branches = next;
    }
    branches
}

/// (p_el, fidelity to logical Ψ⁺) for the two-source architecture with a
/// Ψ⁺⊗Ψ⁺ time-bin projection at the midpoint (×4 for the four equivalent
/// outcomes) and post-selection on both memories holding photons.
pub fn mp_fock_oracle(n_s: f64, eta_mid: f64, p_app: f64) -> (f64, f64) {
    let br = source_branches(n_s, 1.0 - p_app, 1.0 - eta_mid);
    // One photon per time bin, each either on side b or c.
    let cfgs = [(dr(1, 1), dr(0, 0)), (dr(1, 0), dr(0, 1)), (dr(0, 1), dr(1, 0)), (dr(0, 0), dr(1, 1))];
    let l = |bit: usize| if bit == 0 { dr(1, 0) } else { dr(0, 1) };
    let mut p = 0.0;
    let mut f = 0.0;
    for b1 in &br {
        for b2 in &br {
            let mut mem = vec![0.0; 81];
            for &(xb, xc) in &cfgs {
                for a in 0..9 {
                    let u = b1[9 * a + xb];
                    if u == 0.0 {
                        continue;
                    }
                    for d in 0..9 {
                        mem[9 * a + d] += 0.5 * u * b2[9 * d + xc];
                    }
                }
            }
            for a in 1..9 {
                for d in 1..9 {
                    p += 4.0 * mem[9 * a + d].powi(2);
                }
            }
            let ov = (mem[9 * l(0) + l(1)] + mem[9 * l(1) + l(0)]) * std::f64::consts::FRAC_1_SQRT_2;
            f += 4.0 * ov * ov;
        }
    }
    (p, f / p)
}
