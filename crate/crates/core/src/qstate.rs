//! Two-qubit density-matrix algebra.
//!
//! Every state is tracked in the |Φ⁺⟩ frame: heralding and swap outcomes are
//! Pauli-corrected so that the target state is always (|00⟩+|11⟩)/√2.
//! Qubit 0 is the most significant bit of a basis index.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C = Complex64;
pub type Mat4 = SMatrix<C, 4, 4>;
pub type Mat16 = SMatrix<C, 16, 16>;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Tolerances used by [`TwoQubitState::validate`].
pub const HERM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Pauli labels; the discriminant doubles as the Klein-group element
/// (bit 0 = X part, bit 1 = Z part), so that P_i·P_j ∝ P_{i^j}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I = 0,
    X = 1,
    Z = 2,
    Y = 3,
}

pub const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y];

impl Pauli {
    pub fn matrix(self) -> SMatrix<C, 2, 2> {
        let i = C::new(0.0, 1.0);
        match self {
            Pauli::I => SMatrix::<C, 2, 2>::new(ONE, ZERO, ZERO, ONE),
            Pauli::X => SMatrix::<C, 2, 2>::new(ZERO, ONE, ONE, ZERO),
            Pauli::Z => SMatrix::<C, 2, 2>::new(ONE, ZERO, ZERO, -ONE),
            Pauli::Y => SMatrix::<C, 2, 2>::new(ZERO, -i, i, ZERO),
        }
    }
}

/// Which half of a pair a single-qubit channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

/// Gate and measurement noise. Every λ is a keep factor: 1 means noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateNoise {
    pub bsm_depol: f64,
    pub bsm_deph: f64,
    pub cnot_depol: f64,
    pub cnot_deph: f64,
    pub meas_depol: f64,
}

impl GateNoise {
    pub const IDEAL: GateNoise = GateNoise {
        bsm_depol: 1.0,
        bsm_deph: 1.0,
        cnot_depol: 1.0,
        cnot_deph: 1.0,
        meas_depol: 1.0,
    };

    /// Noise from a single gate fidelity figure and a dephasing figure,
    /// applied uniformly to BSM, CNOT and measurement.
    pub fn from_gate_fidelity(f_gates: f64, f_gates_deph: f64) -> GateNoise {
        GateNoise {
            bsm_depol: f_gates,
            bsm_deph: f_gates_deph,
            cnot_depol: f_gates,
            cnot_deph: f_gates_deph,
            meas_depol: f_gates,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bsm_depol", self.bsm_depol),
            ("bsm_deph", self.bsm_deph),
            ("cnot_depol", self.cnot_depol),
            ("cnot_deph", self.cnot_deph),
            ("meas_depol", self.meas_depol),
        ] {
            check_keep(name, v)?;
        }
        Ok(())
    }
}

fn check_keep(name: &str, k: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::Validation(format!("{name} = {k} is outside [0, 1]")));
    }
    Ok(())
}

/// Pauli-probability vector of a depolarizing channel with keep factor `k`.
pub fn depol_weights(k: f64) -> [f64; 4] {
    let e = (1.0 - k) / 4.0;
    [k + e, e, e, e]
}

/// Pauli-probability vector of a Z-dephasing channel with keep factor `k`.
pub fn deph_weights(k: f64) -> [f64; 4] {
    [(1.0 + k) / 2.0, 0.0, (1.0 - k) / 2.0, 0.0]
}

/// Composition of two single-qubit Pauli maps (group convolution).
pub fn compose_weights(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i ^ j] += a[i] * b[j];
        }
    }
    out
}

/// Conjugate a `D`-dimensional density matrix by a Pauli on qubit `q`
/// (of `nq` qubits, qubit 0 most significant).
fn pauli_conj<const D: usize>(m: &SMatrix<C, D, D>, nq: usize, q: usize, p: Pauli) -> SMatrix<C, D, D> {
    let bit = 1usize << (nq - 1 - q);
    let flip = matches!(p, Pauli::X | Pauli::Y);
    let sign = matches!(p, Pauli::Z | Pauli::Y);
    SMatrix::<C, D, D>::from_fn(|i, j| {
        let (si, sj) = if flip { (i ^ bit, j ^ bit) } else { (i, j) };
        let v = m[(si, sj)];
        if sign && (((i & bit) != 0) ^ ((j & bit) != 0)) {
            -v
        } else {
            v
        }
    })
}

/// Apply the linear map ρ ↦ Σ_P w_P · P ρ P on qubit `q`.
/// Weights need not be probabilities; signed combinations are used for
/// time-averaged storage maps.
pub fn apply_pauli_map<const D: usize>(m: &SMatrix<C, D, D>, nq: usize, q: usize, w: &[f64; 4]) -> SMatrix<C, D, D> {
    let mut out = m * C::new(w[0], 0.0);
    for p in [Pauli::X, Pauli::Z, Pauli::Y] {
        let wp = w[p as usize];
        if wp != 0.0 {
            out += pauli_conj(m, nq, q, p) * C::new(wp, 0.0);
        }
    }
    out
}

/// A correlated two-qubit Pauli map ρ ↦ Σ_{P,Q} w[P][Q] (P⊗Q) ρ (P⊗Q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliMap2 {
    pub w: [[f64; 4]; 4],
}

impl PauliMap2 {
    pub fn identity() -> Self {
        let mut w = [[0.0; 4]; 4];
        w[0][0] = 1.0;
        PauliMap2 { w }
    }

    pub fn product(a: &[f64; 4], b: &[f64; 4]) -> Self {
        let mut w = [[0.0; 4]; 4];
        for (i, wa) in a.iter().enumerate() {
            for (j, wb) in b.iter().enumerate() {
                w[i][j] = wa * wb;
            }
        }
        PauliMap2 { w }
    }

    pub fn add_scaled(&mut self, other: &PauliMap2, s: f64) {
        for i in 0..4 {
            for j in 0..4 {
                self.w[i][j] += s * other.w[i][j];
            }
        }
    }

    pub fn apply(&self, s: &TwoQubitState) -> TwoQubitState {
        let mut out = Mat4::zeros();
        for (i, row) in self.w.iter().enumerate() {
            if row.iter().all(|&x| x == 0.0) {
                continue;
            }
            let left = if i == 0 { s.m } else { pauli_conj(&s.m, 2, 0, PAULIS[i]) };
            for (j, &wij) in row.iter().enumerate() {
                if wij == 0.0 {
                    continue;
                }
                let t = if j == 0 { left } else { pauli_conj(&left, 2, 1, PAULIS[j]) };
                out += t * C::new(wij, 0.0);
            }
        }
        TwoQubitState::from_matrix_unchecked(out)
    }

    /// Action on a Bell-diagonal vector: (P⊗Q) maps Bell index k to k^P^Q.
    pub fn apply_bell_diag(&self, d: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                let w = self.w[i][j];
                if w == 0.0 {
                    continue;
                }
                for (k, dk) in d.iter().enumerate() {
                    out[k ^ i ^ j] += w * dk;
                }
            }
        }
        out
    }

    /// Fidelity after the map, given the Bell-diagonal of the input.
    pub fn fidelity_of(&self, d: &[f64; 4]) -> f64 {
        let mut f = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                f += self.w[i][j] * d[i ^ j];
            }
        }
        f
    }
}

/// Bipartite two-qubit state in the computational basis |00⟩,|01⟩,|10⟩,|11⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    m: Mat4,
}

impl TwoQubitState {
    /// Wraps a matrix after checking the state invariants.
    pub fn new(m: Mat4) -> Result<Self> {
        let s = TwoQubitState { m };
        s.validate()?;
        Ok(s)
    }

    /// Hermitian-symmetrizes without validation; used on channel outputs.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        TwoQubitState { m: (m + m.adjoint()) * C::new(0.5, 0.0) }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.m;
        for i in 0..4 {
            for j in 0..4 {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERM_TOL {
                    return Err(Error::Validation(format!("state not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!("state trace {tr} != 1")));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -PSD_TOL {
            return Err(Error::Validation(format!("state has eigenvalue {lmin}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.m + self.m.adjoint()) * C::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn pure(psi: &SVector<C, 4>) -> Self {
        let n = psi.norm();
        let v = psi / C::new(n, 0.0);
        TwoQubitState::from_matrix_unchecked(v * v.adjoint())
    }

    /// |B_k⟩⟨B_k| for the Bell state (I⊗P_k)|Φ⁺⟩.
    pub fn bell(p: Pauli) -> Self {
        TwoQubitState::pure(&bell_vector(p))
    }

    pub fn phi_plus() -> Self {
        Self::bell(Pauli::I)
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState { m: Mat4::identity() * C::new(0.25, 0.0) }
    }

    /// Werner state F·|Φ⁺⟩⟨Φ⁺| + (1−F)/3·(I − |Φ⁺⟩⟨Φ⁺|).
    pub fn werner(f: f64) -> Self {
        Self::from_bell_diagonal(&[f, (1.0 - f) / 3.0, (1.0 - f) / 3.0, (1.0 - f) / 3.0])
    }

    /// Bell-diagonal state with weights indexed by [`Pauli`] label.
    pub fn from_bell_diagonal(d: &[f64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for p in PAULIS {
            let v = bell_vector(p);
            m += v * v.adjoint() * C::new(d[p as usize], 0.0);
        }
        TwoQubitState::from_matrix_unchecked(m)
    }

    /// ⟨B_k|ρ|B_k⟩ for the four Bell states, indexed by [`Pauli`] label.
    pub fn bell_diagonal(&self) -> [f64; 4] {
        let m = &self.m;
        let h = 0.5;
        // Closed forms of ⟨B_k|ρ|B_k⟩ in the computational basis.
        let phi_p = h * (m[(0, 0)].re + m[(3, 3)].re + 2.0 * m[(0, 3)].re);
        let phi_m = h * (m[(0, 0)].re + m[(3, 3)].re - 2.0 * m[(0, 3)].re);
        let psi_p = h * (m[(1, 1)].re + m[(2, 2)].re + 2.0 * m[(1, 2)].re);
        let psi_m = h * (m[(1, 1)].re + m[(2, 2)].re - 2.0 * m[(1, 2)].re);
        [phi_p, psi_p, phi_m, psi_m]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

pub fn bell_vector(p: Pauli) -> SVector<C, 4> {
    let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi = SVector::<C, 4>::new(s, ZERO, ZERO, s);
    kron2(&Pauli::I.matrix(), &p.matrix()) * phi
}

fn kron2(a: &SMatrix<C, 2, 2>, b: &SMatrix<C, 2, 2>) -> Mat4 {
    Mat4::from_fn(|i, j| a[(i >> 1, j >> 1)] * b[(i & 1, j & 1)])
}

/// ⟨Φ⁺|ρ|Φ⁺⟩.
pub fn fidelity(s: &TwoQubitState) -> f64 {
    let m = s.matrix();
    0.5 * (m[(0, 0)].re + m[(3, 3)].re + m[(0, 3)].re + m[(3, 0)].re)
}

fn sides(side: Side) -> &'static [usize] {
    match side {
        Side::A => &[0],
        Side::B => &[1],
        Side::Both => &[0, 1],
    }
}

/// Single-qubit map with Pauli weights on the chosen side(s).
pub fn apply_local(s: &TwoQubitState, w: &[f64; 4], side: Side) -> TwoQubitState {
    let mut m = s.m;
    for &q in sides(side) {
        m = apply_pauli_map(&m, 2, q, w);
    }
    TwoQubitState::from_matrix_unchecked(m)
}

/// keep·ρ + (1−keep)·(I/2 ⊗ tr_q ρ) on the chosen side(s).
pub fn depolarize(s: &TwoQubitState, keep: f64, side: Side) -> Result<TwoQubitState> {
    check_keep("keep", keep)?;
    Ok(apply_local(s, &depol_weights(keep), side))
}

/// Z-dephasing with Kraus operators {√((1+k)/2)·I, √((1−k)/2)·Z}.
pub fn dephase(s: &TwoQubitState, keep: f64, side: Side) -> Result<TwoQubitState> {
    check_keep("keep", keep)?;
    Ok(apply_local(s, &deph_weights(keep), side))
}

/// Pauli weights of depolarizing followed by dephasing on one qubit.
pub fn gate_weights(depol: f64, deph: f64) -> [f64; 4] {
    compose_weights(&depol_weights(depol), &deph_weights(deph))
}

/// Bell-state measurement on the inner qubits of `a` = (i,j) and `b` = (j,k).
///
/// Noise acts on the two measured qubits before projection. All four
/// outcomes are corrected into the |Φ⁺⟩ frame and summed, so the result is
/// the outcome-averaged state; success is deterministic.
pub fn bell_swap(a: &TwoQubitState, b: &TwoQubitState, noise: &GateNoise) -> Result<TwoQubitState> {
    noise.validate()?;
    let w = gate_weights(noise.bsm_depol, noise.bsm_deph);
    let a = apply_local(a, &w, Side::B);
    let b = apply_local(b, &w, Side::A);
    Ok(swap_contract(&a.m, &b.m))
}

/// Outcome-summed Bell projection of qubits (1,2) of ρa⊗ρb.
fn swap_contract(a: &Mat4, b: &Mat4) -> TwoQubitState {
    let mut out = Mat4::zeros();
    for p in PAULIS {
        let bv = bell_vector(p);
        // Bell vector as a 2×2 coefficient array B[j][k] = ⟨jk|B⟩.
        let coef = |j: usize, k: usize| bv[2 * j + k];
        let mut blk = Mat4::zeros();
        for i in 0..2 {
            for l in 0..2 {
                for ip in 0..2 {
                    for lp in 0..2 {
                        let mut acc = ZERO;
                        for j in 0..2 {
                            for k in 0..2 {
                                let cjk = coef(j, k).conj();
                                if cjk == ZERO {
                                    continue;
                                }
                                for jp in 0..2 {
                                    for kp in 0..2 {
                                        let c2 = coef(jp, kp);
                                        if c2 == ZERO {
                                            continue;
                                        }
                                        acc += cjk * c2 * a[(2 * i + j, 2 * ip + jp)] * b[(2 * k + l, 2 * kp + lp)];
                                    }
                                }
                            }
                        }
                        blk[(2 * i + l, 2 * ip + lp)] = acc;
                    }
                }
            }
        }
        // Outcome B_p leaves (I⊗P)-rotated Φ⁺ on the outer pair; undo on qubit B.
        out += pauli_conj(&blk, 2, 1, p);
    }
    TwoQubitState::from_matrix_unchecked(out)
}

/// Bell-diagonal of the swap output from the Bell-diagonals of the inputs.
/// Exact: off-diagonal Bell coherences never feed the output diagonal.
pub fn bell_swap_diag(da: &[f64; 4], db: &[f64; 4], noise: &GateNoise) -> [f64; 4] {
    let w = gate_weights(noise.bsm_depol, noise.bsm_deph);
    let da = conv(da, &w);
    let db = conv(db, &w);
    conv(&da, &db)
}

fn conv(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    compose_weights(a, b)
}

/// Outcome of a distillation attempt.
#[derive(Debug, Clone, Copy)]
pub struct Distilled {
    pub state: TwoQubitState,
    pub success_prob: f64,
}

/// DEJMPS with the same noise at both parties.
pub fn dejmps(a: &TwoQubitState, b: &TwoQubitState, noise: &GateNoise) -> Result<Distilled> {
    dejmps_with(a, b, noise, noise)
}

/// DEJMPS where Alice's and Bob's operations carry separate noise.
///
/// Qubit order of the joint state is (A1, B1, A2, B2). Alice applies
/// Rx(π/2), Bob Rx(−π/2); CNOTs A1→A2 and B1→B2 followed by CNOT noise on all
/// four qubits; measurement depolarization on A2, B2; keep equal outcomes.
pub fn dejmps_with(a: &TwoQubitState, b: &TwoQubitState, alice: &GateNoise, bob: &GateNoise) -> Result<Distilled> {
    alice.validate()?;
    bob.validate()?;
    let joint: Mat16 = Mat16::from_fn(|i, j| a.m[(i >> 2, j >> 2)] * b.m[(i & 3, j & 3)]);
    let u = dejmps_unitary();
    let mut rho = u * joint * u.adjoint();
    let wa = gate_weights(alice.cnot_depol, alice.cnot_deph);
    let wb = gate_weights(bob.cnot_depol, bob.cnot_deph);
    for (q, w) in [(0, &wa), (1, &wb), (2, &wa), (3, &wb)] {
        rho = apply_pauli_map(&rho, 4, q, w);
    }
    rho = apply_pauli_map(&rho, 4, 2, &depol_weights(alice.meas_depol));
    rho = apply_pauli_map(&rho, 4, 3, &depol_weights(bob.meas_depol));
    // Keep (A2,B2) ∈ {00, 11}; indices are 4·(A1B1) + (A2B2).
    let mut kept = Mat4::zeros();
    for t in [0usize, 3] {
        for i in 0..4 {
            for j in 0..4 {
                kept[(i, j)] += rho[(4 * i + t, 4 * j + t)];
            }
        }
    }
    let p = kept.trace().re;
    if p <= 0.0 {
        return Err(Error::DegenerateDistillation);
    }
    let state = TwoQubitState::from_matrix_unchecked(kept / C::new(p, 0.0));
    Ok(Distilled { state, success_prob: p.min(1.0) })
}

/// DEJMPS on Bell-diagonals only: returns the output Bell-diagonal and the
/// success probability. Exact for arbitrary inputs, because every step maps
/// Bell-diagonal entries to Bell-diagonal entries and coherences never reach
/// the diagonal.
pub fn dejmps_diag(da: &[f64; 4], db: &[f64; 4], alice: &GateNoise, bob: &GateNoise) -> Result<([f64; 4], f64)> {
    // The bilateral rotations fix Φ⁺ and exchange the Z and Y labels.
    let rot = |d: &[f64; 4]| [d[0], d[1], d[3], d[2]];
    let (a, b) = (rot(da), rot(db));
    let x = |k: usize| k & 1;
    let z = |k: usize| k >> 1;
    let label = |x: usize, z: usize| x | (z << 1);
    let mut joint = [[0.0; 4]; 4];
    for s in 0..4 {
        for t in 0..4 {
            // bilateral CNOT: X errors spread source→target, Z errors target→source
            let s2 = label(x(s), z(s) ^ z(t));
            let t2 = label(x(t) ^ x(s), z(t));
            joint[s2][t2] += a[s] * b[t];
        }
    }
    let gate = compose_weights(
        &gate_weights(alice.cnot_depol, alice.cnot_deph),
        &gate_weights(bob.cnot_depol, bob.cnot_deph),
    );
    let meas = compose_weights(&depol_weights(alice.meas_depol), &depol_weights(bob.meas_depol));
    let target_noise = compose_weights(&gate, &meas);
    // P(target kept | target label t): kept when its X bit ends up 0.
    let keep: [f64; 4] = std::array::from_fn(|t| (0..4).filter(|&e| x(t ^ e) == 0).map(|e| target_noise[e]).sum());
    let mut out = [0.0; 4];
    for (s, row) in joint.iter().enumerate() {
        for (t, v) in row.iter().enumerate() {
            out[s] += v * keep[t];
        }
    }
    let out = compose_weights(&out, &gate);
    let p: f64 = out.iter().sum();
    if p <= 0.0 {
        return Err(Error::DegenerateDistillation);
    }
    Ok((out.map(|v| v / p), p.min(1.0)))
}

fn rx(angle: f64) -> SMatrix<C, 2, 2> {
    let c = C::new((angle / 2.0).cos(), 0.0);
    let s = C::new(0.0, -(angle / 2.0).sin());
    SMatrix::<C, 2, 2>::new(c, s, s, c)
}

fn dejmps_unitary() -> Mat16 {
    use std::f64::consts::FRAC_PI_2;
    let ra = rx(FRAC_PI_2);
    let rb = rx(-FRAC_PI_2);
    let locals = [ra, rb, ra, rb];
    let rot = Mat16::from_fn(|i, j| {
        let mut v = ONE;
        for (q, u) in locals.iter().enumerate() {
            let sh = 3 - q;
            v *= u[((i >> sh) & 1, (j >> sh) & 1)];
        }
        v
    });
    // CNOT 0→2 and 1→3 as a basis permutation.
    let perm = |x: usize| {
        let mut y = x;
        if x & 8 != 0 {
            y ^= 2;
        }
        if x & 4 != 0 {
            y ^= 1;
        }
        y
    };
    let cnots = Mat16::from_fn(|i, j| if perm(j) == i { ONE } else { ZERO });
    cnots * rot
}

/// Joint outcome distribution of measuring both qubits in `basis` after
/// depolarizing each with keep `meas_depol`. Returned as
/// [P(+,+), P(+,−), P(−,+), P(−,−)].
pub fn measure_noisy(s: &TwoQubitState, basis: Basis, meas_depol: f64) -> Result<[f64; 4]> {
    check_keep("meas_depol", meas_depol)?;
    let noisy = apply_local(s, &depol_weights(meas_depol), Side::Both);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = C::new(0.0, 1.0);
    let (plus, minus): (SVector<C, 2>, SVector<C, 2>) = match basis {
        Basis::Z => (SVector::<C, 2>::new(ONE, ZERO), SVector::<C, 2>::new(ZERO, ONE)),
        Basis::X => (
            SVector::<C, 2>::new(C::new(h, 0.0), C::new(h, 0.0)),
            SVector::<C, 2>::new(C::new(h, 0.0), C::new(-h, 0.0)),
        ),
        Basis::Y => (
            SVector::<C, 2>::new(C::new(h, 0.0), i * h),
            SVector::<C, 2>::new(C::new(h, 0.0), -i * h),
        ),
    };
    let vecs = [plus, minus];
    let mut out = [0.0; 4];
    for (ka, va) in vecs.iter().enumerate() {
        for (kb, vb) in vecs.iter().enumerate() {
            let v = SVector::<C, 4>::from_fn(|x, _| va[x >> 1] * vb[x & 1]);
            out[2 * ka + kb] = (v.adjoint() * noisy.m * v)[(0, 0)].re.max(0.0);
        }
    }
    Ok(out)
}
