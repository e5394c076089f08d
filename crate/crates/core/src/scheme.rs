//! Scheme trees and their exact evaluation.
//!
//! A scheme is a binary tree: pair generation at the leaves, swapping or
//! distillation at internal nodes, each block repeated for a fixed number of
//! attempts r. Evaluation is split into a per-node `Prepared` step that does
//! not depend on r and a cheap `finish` step that applies the block repetition.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, Platform};
use crate::error::{Error, Result};
use crate::platform_ip::{double_click_with, single_click_with, ArmOptics};
use crate::platform_mp::{boosted_bsm_prob, mp_epg_with, multiplexed_success};
use crate::qstate::{
    apply_local, bell_swap, bell_swap_diag, compose_weights, dejmps_diag, dejmps_with, fidelity, GateNoise, PauliMap2, Side,
    TwoQubitState, C,
};
use crate::timing::{attempt_duration, avg_decay_factor, mp_retrieval_prob, success_after, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Protocol {
    SingleClick { theta: f64 },
    DoubleClick,
    MpSource { n_s: f64 },
    MatterBsm,
    BoostedBsm { level: u32 },
    Dejmps,
}

impl Protocol {
    pub fn stage(&self) -> Stage {
        match self {
            Protocol::SingleClick { .. } | Protocol::DoubleClick | Protocol::MpSource { .. } => Stage::Epg,
            Protocol::MatterBsm | Protocol::BoostedBsm { .. } => Stage::Swap,
            Protocol::Dejmps => Stage::Distill,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Protocol::SingleClick { theta } => format!("single-click θ={theta:.4}"),
            Protocol::DoubleClick => "double-click".into(),
            Protocol::MpSource { n_s } => format!("mp-source N_s={n_s:.4}"),
            Protocol::MatterBsm => "matter-bsm".into(),
            Protocol::BoostedBsm { level } => format!("boosted-bsm N={level}"),
            Protocol::Dejmps => "dejmps".into(),
        }
    }

    fn hash_into<H: Hasher>(&self, h: &mut H) {
        match self {
            Protocol::SingleClick { theta } => (0u8, theta.to_bits()).hash(h),
            Protocol::DoubleClick => 1u8.hash(h),
            Protocol::MpSource { n_s } => (2u8, n_s.to_bits()).hash(h),
            Protocol::MatterBsm => 3u8.hash(h),
            Protocol::BoostedBsm { level } => (4u8, *level).hash(h),
            Protocol::Dejmps => 5u8.hash(h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub state: TwoQubitState,
    pub fidelity: f64,
    pub p: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct Scheme {
    pub protocol: Protocol,
    pub r: u64,
    pub span: (usize, usize),
    pub children: Option<[Arc<Scheme>; 2]>,
    pub metrics: Metrics,
    /// Hash of the protocol tree (protocols and attempt counts, not spans).
    pub tree_key: u64,
}

impl Scheme {
    pub fn stage(&self) -> Stage {
        self.protocol.stage()
    }

    pub fn n_links(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn fidelity(&self) -> f64 {
        self.metrics.fidelity
    }

    pub fn p(&self) -> f64 {
        self.metrics.p
    }

    pub fn t(&self) -> f64 {
        self.metrics.t
    }

    fn key_for(protocol: &Protocol, r: u64, children: &Option<[Arc<Scheme>; 2]>) -> u64 {
        let mut h = DefaultHasher::new();
        protocol.hash_into(&mut h);
        r.hash(&mut h);
        if let Some([a, b]) = children {
            a.tree_key.hash(&mut h);
            b.tree_key.hash(&mut h);
        }
        h.finish()
    }

    pub fn new(protocol: Protocol, r: u64, span: (usize, usize), children: Option<[Arc<Scheme>; 2]>, metrics: Metrics) -> Self {
        let tree_key = Self::key_for(&protocol, r, &children);
        Scheme { protocol, r, span, children, metrics, tree_key }
    }

    /// Same tree moved `offset` links to the right.
    pub fn shifted(&self, offset: usize) -> Scheme {
        if offset == 0 {
            return self.clone();
        }
        Scheme {
            protocol: self.protocol,
            r: self.r,
            span: (self.span.0 + offset, self.span.1 + offset),
            children: self
                .children
                .as_ref()
                .map(|[a, b]| [Arc::new(a.shifted(offset)), Arc::new(b.shifted(offset))]),
            metrics: self.metrics,
            tree_key: self.tree_key,
        }
    }

    /// True when both trees apply the same protocols with the same attempt
    /// counts in the same shape.
    pub fn same_tree(&self, other: &Scheme) -> bool {
        if self.tree_key != other.tree_key || self.protocol != other.protocol || self.r != other.r {
            return false;
        }
        match (&self.children, &other.children) {
            (None, None) => true,
            (Some([a1, b1]), Some([a2, b2])) => a1.same_tree(a2) && b1.same_tree(b2),
            _ => false,
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Scheme)) {
        f(self);
        if let Some([a, b]) = &self.children {
            a.walk(f);
            b.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Checks the structural invariants and p ≥ p_min at every node.
    pub fn check_invariants(&self, p_min: f64) -> Result<()> {
        let mut err = None;
        self.walk(&mut |s| {
            if err.is_some() {
                return;
            }
            if s.metrics.p < p_min {
                err = Some(format!("node {:?} has p = {} < {}", s.span, s.metrics.p, p_min));
            }
            match (&s.children, s.stage()) {
                (None, Stage::Epg) if s.n_links() == 1 => {}
                (Some([a, b]), Stage::Swap) if a.span.1 == b.span.0 && a.span.0 == s.span.0 && b.span.1 == s.span.1 => {
                    if !(s.metrics.t > a.metrics.t && s.metrics.t > b.metrics.t) {
                        err = Some(format!("swap at {:?} not slower than its children", s.span));
                    }
                }
                (Some([a, b]), Stage::Distill) if a.span == s.span && b.span == s.span => {}
                _ => err = Some(format!("malformed node at {:?}", s.span)),
            }
        });
        match err {
            Some(e) => Err(Error::Structure(e)),
            None => Ok(()),
        }
    }
}

/// Per-attempt decay exponents of one stored qubit: (depolarizing, dephasing).
type Decay = (f64, f64);

/// Everything about a block that does not depend on its attempt count.
#[derive(Debug, Clone)]
pub struct Prepared {
    base: Base,
    /// Bell-diagonal of the state before block-wait averaging.
    pub diag: [f64; 4],
    /// Per-attempt success probability.
    pub q: f64,
    pub t_attempt: f64,
    decay: [Decay; 2],
    /// Summed per-attempt retrieval-decay exponent of the two memories (MP).
    c_retrieval: f64,
}

#[derive(Debug, Clone)]
enum Base {
    State(TwoQubitState),
    /// Swap computed on demand; screening only needs the Bell-diagonal.
    Swap {
        a: TwoQubitState,
        b: TwoQubitState,
        noise: GateNoise,
        stage: [[f64; 4]; 2],
    },
    /// Distillation computed on demand.
    Distill {
        a: TwoQubitState,
        b: TwoQubitState,
        noise: [GateNoise; 2],
        stage: [[f64; 4]; 2],
    },
}

impl Prepared {
    pub fn has_retrieval_decay(&self) -> bool {
        self.c_retrieval > 0.0
    }

    pub fn c_retrieval(&self) -> f64 {
        self.c_retrieval
    }

    pub fn base_state(&self) -> TwoQubitState {
        match &self.base {
            Base::State(s) => *s,
            Base::Swap { a, b, noise, stage } => {
                let s = bell_swap(a, b, noise).expect("noise validated with the chain");
                let s = apply_local(&s, &stage[0], Side::A);
                apply_local(&s, &stage[1], Side::B)
            }
            Base::Distill { a, b, noise, stage } => {
                let out = dejmps_with(a, b, &noise[0], &noise[1]).expect("success probability checked when prepared");
                let s = apply_local(&out.state, &stage[0], Side::A);
                apply_local(&s, &stage[1], Side::B)
            }
        }
    }

    pub fn block_p(&self, r: u64) -> f64 {
        if self.c_retrieval > 0.0 {
            mp_retrieval_prob(self.q, r, self.c_retrieval)
        } else {
            success_after(self.q, r)
        }
    }

    /// The r-averaged storage map of the two output qubits.
    pub fn storage_map(&self, r: u64) -> PauliMap2 {
        let terms = |d: Decay| -> [([f64; 4], f64); 3] {
            [
                ([0.25; 4], 0.0),
                ([0.25, -0.25, 0.25, -0.25], d.0),
                ([0.5, 0.0, -0.5, 0.0], d.0 + d.1),
            ]
        };
        let ta = terms(self.decay[0]);
        let tb = terms(self.decay[1]);
        if self.decay.iter().all(|&(a, b)| a == 0.0 && b == 0.0) {
            return PauliMap2::identity();
        }
        let mut map = PauliMap2 { w: [[0.0; 4]; 4] };
        for (wa, ea) in &ta {
            for (wb, eb) in &tb {
                let e = avg_decay_factor(self.q.min(1.0), r, ea + eb);
                map.add_scaled(&PauliMap2::product(wa, wb), e);
            }
        }
        map
    }

    /// Fidelity, probability and time without building the output state.
    pub fn screen(&self, r: u64) -> (f64, f64, f64) {
        let f = self.storage_map(r).fidelity_of(&self.diag);
        (f, self.block_p(r), r as f64 * self.t_attempt)
    }

    pub fn finish(&self, r: u64) -> Metrics {
        let state = self.storage_map(r).apply(&self.base_state());
        Metrics { fidelity: fidelity(&state), state, p: self.block_p(r), t: r as f64 * self.t_attempt }
    }
}

/// Pauli weights of a qubit stored for time `t` (depolarizing then dephasing).
fn wait_weights(t: f64, t_depol: f64, t_deph: f64) -> [f64; 4] {
    let a = (-t / t_depol).exp();
    let b = (-t / t_deph).exp();
    [0.25 + a / 4.0 + a * b / 2.0, 0.25 - a / 4.0, 0.25 + a / 4.0 - a * b / 2.0, 0.25 - a / 4.0]
}

/// Evaluates protocols on a chain.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub chain: &'a ChainConfig,
}

impl<'a> Evaluator<'a> {
    pub fn new(chain: &'a ChainConfig) -> Self {
        Evaluator { chain }
    }

    /// (T_depol, T_deph) of the memory at `node`; infinite for MP memories.
    fn qubit_times(&self, node: usize) -> (f64, f64) {
        match self.chain.platform {
            Platform::Mp => (f64::INFINITY, f64::INFINITY),
            _ => {
                let ip = self.chain.ip(node);
                (ip.t_depol, ip.t_deph)
            }
        }
    }

    fn retrieval_rate(&self, node: usize) -> f64 {
        match self.chain.platform {
            Platform::Mp => 1.0 / self.chain.mp(node).t_coh,
            _ => 0.0,
        }
    }

    fn n_ri(&self, node: usize) -> f64 {
        match self.chain.platform {
            Platform::Ip => self.chain.ip(node).n_ri,
            _ => self.chain.mp(node).n_ri,
        }
    }

    fn gate_noise(&self, node: usize) -> GateNoise {
        match self.chain.platform {
            Platform::Mp => GateNoise::IDEAL,
            _ => self.chain.ip(node).gate_noise(),
        }
    }

    fn decay_for(&self, span: (usize, usize), t_attempt: f64) -> [Decay; 2] {
        let d = |n: usize| {
            let (td, tz) = self.qubit_times(n);
            (t_attempt / td, t_attempt / tz)
        };
        [d(span.0), d(span.1)]
    }

    fn wait_on(&self, span: (usize, usize), t: f64) -> [[f64; 4]; 2] {
        let w = |n: usize| {
            let (td, tz) = self.qubit_times(n);
            wait_weights(t, td, tz)
        };
        [w(span.0), w(span.1)]
    }

    fn retrieval_survival(&self, span: (usize, usize), t: f64) -> f64 {
        (-t * (self.retrieval_rate(span.0) + self.retrieval_rate(span.1))).exp()
    }

    /// Pair generation on elementary link `link`.
    pub fn prepare_epg(&self, protocol: &Protocol, link: usize) -> Result<Prepared> {
        let chain = self.chain;
        let span = (link, link + 1);
        let l = chain.link_lengths_km[link];
        let (state, q, t_prep, n_ri) = match (chain.platform, protocol) {
            (Platform::Ip, Protocol::SingleClick { .. } | Protocol::DoubleClick) => {
                let (a, b) = (chain.ip(span.0), chain.ip(span.1));
                let optics = ArmOptics::between(l, a, b);
                let out = match protocol {
                    Protocol::SingleClick { theta } => single_click_with(*theta, &optics, a.f_prep, b.f_prep)?,
                    _ => double_click_with(&optics, a.f_prep, b.f_prep)?,
                };
                (out.state, out.p_attempt, a.t_prep.max(b.t_prep), a.n_ri)
            }
            (Platform::Mp | Platform::Combined, Protocol::MpSource { n_s }) => {
                let (a, b) = (chain.mp(span.0), chain.mp(span.1));
                let eta = 0.5 * (a.arm_efficiency(l) + b.arm_efficiency(l));
                let p_app = 0.5 * (a.p_app + b.p_app);
                let p_dc = 0.5 * (a.dark_count_prob() + b.dark_count_prob());
                let out = mp_epg_with(*n_s, eta, p_app, p_dc)?;
                let q = multiplexed_success(out.p_el, a.n_modes.min(b.n_modes));
                (out.state, q, a.t_prep.max(b.t_prep), a.n_ri)
            }
            (p, proto) => {
                return Err(Error::Capability(format!("{} is not a pair-generation protocol on {p:?}", proto.label())))
            }
        };
        if !(q > 0.0) {
            return Err(Error::Infeasible("zero pair-generation probability".into()));
        }
        let t_attempt = attempt_duration(l, Stage::Epg, t_prep, n_ri, &chain.timing);
        Ok(Prepared {
            diag: state.bell_diagonal(),
            base: Base::State(state),
            q,
            t_attempt,
            decay: self.decay_for(span, t_attempt),
            c_retrieval: t_attempt * (self.retrieval_rate(span.0) + self.retrieval_rate(span.1)),
        })
    }

    /// Deterministic wait of the earlier-finishing child. Returns the
    /// children's states and the retrieval survival factor of the wait.
    fn aligned(&self, s1: &Scheme, s2: &Scheme) -> (TwoQubitState, TwoQubitState, [f64; 4], [f64; 4], f64) {
        let (mut a, mut b) = (s1.metrics.state, s2.metrics.state);
        let (mut da, mut db) = (s1.metrics.state.bell_diagonal(), s2.metrics.state.bell_diagonal());
        let dt = s1.metrics.t - s2.metrics.t;
        let mut surv = 1.0;
        if dt != 0.0 {
            let (early, st, d) = if dt < 0.0 { (s1, &mut a, &mut da) } else { (s2, &mut b, &mut db) };
            let w = self.wait_on(early.span, dt.abs());
            *st = apply_local(&apply_local(st, &w[0], Side::A), &w[1], Side::B);
            *d = compose_weights(&compose_weights(d, &w[0]), &w[1]);
            surv = self.retrieval_survival(early.span, dt.abs());
        }
        (a, b, da, db, surv)
    }

    pub fn prepare_swap(&self, s1: &Scheme, s2: &Scheme, protocol: &Protocol) -> Result<Prepared> {
        if s1.span.1 != s2.span.0 {
            return Err(Error::Structure(format!("spans {:?} and {:?} are not adjacent", s1.span, s2.span)));
        }
        let mid = s1.span.1;
        let span = (s1.span.0, s2.span.1);
        let p_proto = match (self.chain.platform, protocol) {
            (Platform::Mp, Protocol::BoostedBsm { level }) => boosted_bsm_prob(*level),
            (Platform::Ip | Platform::Combined, Protocol::MatterBsm) => 1.0,
            (p, proto) => return Err(Error::Capability(format!("{} cannot swap on {p:?}", proto.label()))),
        };
        let noise = self.gate_noise(mid);
        let (a, b, da, db, surv) = self.aligned(s1, s2);
        let t_stage = attempt_duration(self.chain.span_length_km(span), Stage::Swap, 0.0, self.n_ri(mid), &self.chain.timing);
        let stage = self.wait_on(span, t_stage);
        let diag = compose_weights(&compose_weights(&bell_swap_diag(&da, &db, &noise), &stage[0]), &stage[1]);
        let q = s1.metrics.p * s2.metrics.p * p_proto * surv * self.retrieval_survival(span, t_stage);
        let t_attempt = s1.metrics.t.max(s2.metrics.t) + t_stage;
        Ok(Prepared {
            base: Base::Swap { a, b, noise, stage },
            diag,
            q,
            t_attempt,
            decay: self.decay_for(span, t_attempt),
            c_retrieval: t_attempt * (self.retrieval_rate(span.0) + self.retrieval_rate(span.1)),
        })
    }

    pub fn prepare_distill(&self, s1: &Scheme, s2: &Scheme, protocol: &Protocol) -> Result<Prepared> {
        if !self.chain.supports_distillation() {
            return Err(Error::Capability("multiplexed platforms cannot distill".into()));
        }
        if *protocol != Protocol::Dejmps {
            return Err(Error::Capability(format!("{} is not a distillation protocol", protocol.label())));
        }
        if s1.span != s2.span {
            return Err(Error::Structure(format!("distilling unequal spans {:?} and {:?}", s1.span, s2.span)));
        }
        let span = s1.span;
        let (a, b, da, db, _) = self.aligned(s1, s2);
        let noise = [self.gate_noise(span.0), self.gate_noise(span.1)];
        let (out, p_proto) = dejmps_diag(&da, &db, &noise[0], &noise[1])?;
        let t_stage =
            attempt_duration(self.chain.span_length_km(span), Stage::Distill, 0.0, self.n_ri(span.0), &self.chain.timing);
        let stage = self.wait_on(span, t_stage);
        let diag = compose_weights(&compose_weights(&out, &stage[0]), &stage[1]);
        let q = s1.metrics.p * s2.metrics.p * p_proto;
        let t_attempt = s1.metrics.t.max(s2.metrics.t) + t_stage;
        Ok(Prepared {
            diag,
            base: Base::Distill { a, b, noise, stage },
            q,
            t_attempt,
            decay: self.decay_for(span, t_attempt),
            c_retrieval: 0.0,
        })
    }

    pub fn eval_epg(&self, protocol: &Protocol, link: usize, r: u64) -> Result<Scheme> {
        let prep = self.prepare_epg(protocol, link)?;
        Ok(Scheme::new(*protocol, r, (link, link + 1), None, prep.finish(r)))
    }

    pub fn eval_swap(&self, s1: &Arc<Scheme>, s2: &Arc<Scheme>, protocol: &Protocol, r: u64) -> Result<Scheme> {
        let prep = self.prepare_swap(s1, s2, protocol)?;
        Ok(Scheme::new(*protocol, r, (s1.span.0, s2.span.1), Some([s1.clone(), s2.clone()]), prep.finish(r)))
    }

    pub fn eval_distill(&self, s1: &Arc<Scheme>, s2: &Arc<Scheme>, protocol: &Protocol, r: u64) -> Result<Scheme> {
        let prep = self.prepare_distill(s1, s2, protocol)?;
        Ok(Scheme::new(*protocol, r, s1.span, Some([s1.clone(), s2.clone()]), prep.finish(r)))
    }

    /// Re-evaluate a tree from its leaves on this chain, optionally moved by
    /// `offset` links. Fails if the shifted spans leave the chain.
    pub fn reevaluate(&self, s: &Scheme, offset: usize) -> Result<Arc<Scheme>> {
        let span = (s.span.0 + offset, s.span.1 + offset);
        if span.1 > self.chain.n_links() {
            return Err(Error::Structure(format!("span {span:?} exceeds the chain")));
        }
        let out = match &s.children {
            None => self.eval_epg(&s.protocol, span.0, s.r)?,
            Some([a, b]) => {
                let a = self.reevaluate(a, offset)?;
                let b = if Arc::ptr_eq(&s.children.as_ref().unwrap()[0], &s.children.as_ref().unwrap()[1]) {
                    a.clone()
                } else {
                    self.reevaluate(b, offset)?
                };
                match s.stage() {
                    Stage::Swap => self.eval_swap(&a, &b, &s.protocol, s.r)?,
                    _ => self.eval_distill(&a, &b, &s.protocol, s.r)?,
                }
            }
        };
        Ok(Arc::new(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub kind: Stage,
    pub protocol: Protocol,
    pub r: u64,
    pub span: (usize, usize),
    pub fidelity: f64,
    pub p: f64,
    pub t_seconds: f64,
    /// Row-major density matrix as (re, im) pairs.
    pub state: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<SchemeRecord>,
}

impl SchemeRecord {
    pub fn from_scheme(s: &Scheme) -> Self {
        let m = s.metrics.state.matrix();
        let mut state = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                state.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        SchemeRecord {
            kind: s.stage(),
            protocol: s.protocol,
            r: s.r,
            span: s.span,
            fidelity: s.metrics.fidelity,
            p: s.metrics.p,
            t_seconds: s.metrics.t,
            state,
            children: s.children.iter().flat_map(|c| c.iter().map(|x| SchemeRecord::from_scheme(x))).collect(),
        }
    }

    /// Rebuild the tree with the recorded metrics (no re-evaluation).
    pub fn to_scheme(&self) -> Result<Scheme> {
        if self.state.len() != 16 {
            return Err(Error::Structure("state must have 16 entries".into()));
        }
        let m = nalgebra::Matrix4::<C>::from_fn(|i, j| {
            let [re, im] = self.state[4 * i + j];
            C::new(re, im)
        });
        let children = match self.children.len() {
            0 => None,
            2 => Some([Arc::new(self.children[0].to_scheme()?), Arc::new(self.children[1].to_scheme()?)]),
            k => return Err(Error::Structure(format!("scheme node with {k} children"))),
        };
        if self.protocol.stage() != self.kind {
            return Err(Error::Structure("kind does not match protocol".into()));
        }
        let metrics = Metrics {
            state: TwoQubitState::new(m)?,
            fidelity: self.fidelity,
            p: self.p,
            t: self.t_seconds,
        };
        Ok(Scheme::new(self.protocol, self.r, self.span, children, metrics))
    }
}

/// Graph text in DOT syntax, nodes numbered in pre-order.
pub fn to_dot(s: &Scheme, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  node [shape=box];");
    let mut counter = 0usize;
    dot_node(s, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

fn dot_node(s: &Scheme, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    let kind = match s.stage() {
        Stage::Epg => "EPG",
        Stage::Swap => "SWAP",
        Stage::Distill => "DISTILL",
    };
    let proto = match s.protocol {
        Protocol::SingleClick { theta } => format!("θ={theta:.4}"),
        _ => s.protocol.label(),
    };
    let _ = writeln!(
        out,
        "  n{id} [label=\"{kind}, {proto}, r={}\\nspan=({},{})\\nF={:.6} p={:.6} T={:.6e} s\"];",
        s.r, s.span.0, s.span.1, s.metrics.fidelity, s.metrics.p, s.metrics.t
    );
    if let Some([a, b]) = &s.children {
        for c in [a, b] {
            let cid = dot_node(c, counter, out);
            let _ = writeln!(out, "  n{id} -> n{cid};");
        }
    }
    id
}
