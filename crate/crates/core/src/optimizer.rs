//! Heuristic search over near-deterministic schemes.
//!
//! Link lengths are processed bottom-up. Every candidate (pair of stored
//! sub-schemes × protocol × attempt count) is evaluated exactly; only the
//! fastest scheme per coarse (p, F) cell survives, and each link's store is
//! pruned to a per-probability-bin frontier once it is complete.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, Platform};
use crate::error::{Error, Result};
use crate::platform_ip::theta_grid;
use crate::platform_mp::ns_grid;
use crate::scheme::{Evaluator, Prepared, Protocol, Scheme};
use crate::timing::{attempts_for, optimal_attempts_mp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub eps_f: f64,
    pub eps_p: f64,
    /// Fidelity band for swapping; `None` disables it.
    pub eps_swap: Option<f64>,
    /// Fidelity band for distillation; `None` disables it.
    pub eps_distill: Option<f64>,
    /// Length band |i₁ − i₂| ≤ 2·log(i₁ + i₂ − 1) on swap decompositions.
    pub length_band: bool,
    pub length_band_log_base: f64,
    /// Distillation rounds per link.
    pub m: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub r_discr: usize,
    pub f_threshold: f64,
    pub symmetric: bool,
    pub bisection: bool,
    pub bdcz_only: bool,
    /// Number of single-click θ values on [½, π].
    pub theta_steps: usize,
    pub double_click: bool,
    /// Step of the MP mean-photon-number grid.
    pub ns_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eps_f: 0.01,
            eps_p: 0.02,
            eps_swap: Some(0.05),
            eps_distill: Some(0.05),
            length_band: true,
            length_band_log_base: std::f64::consts::E,
            m: 2,
            p_min: 0.9,
            p_max: 0.99,
            r_discr: 200,
            f_threshold: 0.5,
            symmetric: false,
            bisection: false,
            bdcz_only: false,
            theta_steps: 300,
            double_click: true,
            ns_step: 1e-4,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(m.to_string()));
        if !(self.f_threshold >= 0.5 && self.f_threshold < 1.0) {
            return bad("f_threshold must be in [0.5, 1)");
        }
        if !(self.p_min > 0.0 && self.p_min < self.p_max && self.p_max <= 1.0) {
            return bad("need 0 < p_min < p_max <= 1");
        }
        if !(self.eps_f > 0.0 && self.eps_p > 0.0) {
            return bad("eps_f and eps_p must be > 0");
        }
        if self.eps_swap.is_some_and(|e| e < 0.0) || self.eps_distill.is_some_and(|e| e < 0.0) {
            return bad("band widths must be >= 0");
        }
        if self.r_discr < 1 {
            return bad("r_discr must be >= 1");
        }
        if !(self.ns_step > 0.0) || !(self.length_band_log_base > 1.0) {
            return bad("ns_step > 0 and length_band_log_base > 1 required");
        }
        Ok(())
    }

    /// Number of probability bins above p_min.
    pub fn n_p_bins(&self) -> u32 {
        bin_count(1.0 - self.p_min, self.eps_p)
    }

    pub fn n_f_bins(&self) -> u32 {
        bin_count(1.0 - self.f_threshold, self.eps_f)
    }

    pub fn max_cells(&self) -> u64 {
        self.n_p_bins() as u64 * self.n_f_bins() as u64
    }
}

fn bin_count(range: f64, eps: f64) -> u32 {
    let x = range / eps;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.max(1.0) as u32
    } else {
        x.ceil().max(1.0) as u32
    }
}

/// min n ≥ 1 with v < lo + n·eps, capped at `max`.
fn bin_index(v: f64, lo: f64, eps: f64, max: u32) -> u32 {
    let mut n = (((v - lo) / eps).floor() + 1.0).max(1.0) as i64;
    while n > 1 && v < lo + (n - 1) as f64 * eps {
        n -= 1;
    }
    while !(v < lo + n as f64 * eps) && (n as u32) < max {
        n += 1;
    }
    (n as u32).min(max)
}

pub fn p_bin(p: f64, cfg: &OptimizerConfig) -> u32 {
    bin_index(p, cfg.p_min, cfg.eps_p, cfg.n_p_bins())
}

pub fn f_bin(f: f64, cfg: &OptimizerConfig) -> u32 {
    bin_index(f, cfg.f_threshold, cfg.eps_f, cfg.n_f_bins())
}

/// (p-bin, F-bin).
pub type Cell = (u32, u32);

pub fn cell_of(f: f64, p: f64, cfg: &OptimizerConfig) -> Cell {
    (p_bin(p, cfg), f_bin(f, cfg))
}

/// Coarse-grained store of one link: the fastest scheme per cell.
#[derive(Debug, Clone, Default)]
pub struct LinkStore {
    pub cells: BTreeMap<Cell, Arc<Scheme>>,
}

impl LinkStore {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn schemes(&self) -> Vec<Arc<Scheme>> {
        self.cells.values().cloned().collect()
    }

    /// Fastest scheme with fidelity at least `f`.
    pub fn best_time_for(&self, f: f64) -> Option<&Arc<Scheme>> {
        self.cells
            .values()
            .filter(|s| s.fidelity() >= f)
            .min_by(|a, b| a.t().total_cmp(&b.t()))
    }

    fn incumbent_t(&self, cell: &Cell) -> Option<f64> {
        self.cells.get(cell).map(|s| s.t())
    }
}

/// Inserts `s` into its cell unless it is below threshold or an incumbent is
/// at least as fast. Returns whether it was stored.
pub fn store_scheme(link: &mut LinkStore, s: Arc<Scheme>, cfg: &OptimizerConfig) -> bool {
    if s.fidelity() < cfg.f_threshold || s.p() < cfg.p_min {
        return false;
    }
    let cell = cell_of(s.fidelity(), s.p(), cfg);
    match link.cells.get(&cell) {
        Some(old) if old.t() <= s.t() => false,
        _ => {
            link.cells.insert(cell, s);
            true
        }
    }
}

/// Per p-bin, walking by fidelity from the top, keep a scheme only if it is
/// strictly faster than every higher-fidelity survivor.
pub fn prune(link: &mut LinkStore) {
    let mut keep = BTreeMap::new();
    let mut by_p: BTreeMap<u32, Vec<(Cell, Arc<Scheme>)>> = BTreeMap::new();
    for (c, s) in std::mem::take(&mut link.cells) {
        by_p.entry(c.0).or_default().push((c, s));
    }
    for (_, mut v) in by_p {
        v.sort_by(|a, b| b.1.fidelity().total_cmp(&a.1.fidelity()).then(b.0 .1.cmp(&a.0 .1)));
        let mut best_t = f64::INFINITY;
        for (c, s) in v {
            if s.t() < best_t {
                best_t = s.t();
                keep.insert(c, s);
            }
        }
    }
    link.cells = keep;
}

/// Length band on the number of elementary links in each half.
pub fn length_band_ok(i1: usize, i2: usize, log_base: f64) -> bool {
    let d = (i1 as f64 - i2 as f64).abs();
    d <= 2.0 * ((i1 + i2 - 1) as f64).ln() / log_base.ln()
}

/// Both swap bands: lengths and per-link log-fidelity.
pub fn swap_band_ok(s1: &Scheme, s2: &Scheme, eps_swap: f64) -> bool {
    let (i1, i2) = (s1.n_links(), s2.n_links());
    length_band_ok(i1, i2, std::f64::consts::E) && swap_fidelity_band_ok(s1, s2, eps_swap)
}

fn swap_fidelity_band_ok(s1: &Scheme, s2: &Scheme, eps: f64) -> bool {
    let (i1, i2) = (s1.n_links() as f64, s2.n_links() as f64);
    (s1.fidelity().ln() / i1 - s2.fidelity().ln() / i2).abs() <= eps
}

/// |F₁ − F₂| ≤ ε.
pub fn distill_band_ok(s1: &Scheme, s2: &Scheme, eps_distill: f64) -> bool {
    (s1.fidelity() - s2.fidelity()).abs() <= eps_distill
}

/// Attempt counts between the p_min and p_max crossings of an IP-style block.
pub fn attempt_grid(p_attempt: f64, cfg: &OptimizerConfig) -> Result<Vec<u64>> {
    if p_attempt >= cfg.p_max {
        return Ok(vec![1]);
    }
    let r_min = attempts_for(p_attempt, cfg.p_min)?;
    let r_max = attempts_for(p_attempt, cfg.p_max.min(1.0 - 1e-12))?;
    Ok(spread(r_min, r_max, cfg.r_discr))
}

/// Attempt grid for a prepared block; handles MP retrieval decay, where the
/// block probability peaks at a finite r.
pub fn attempt_grid_for(prep: &Prepared, cfg: &OptimizerConfig) -> Result<Vec<u64>> {
    if !prep.has_retrieval_decay() {
        return attempt_grid(prep.q, cfg);
    }
    let r_peak = peak_attempts(prep);
    if prep.block_p(r_peak) < cfg.p_min {
        return Err(Error::Infeasible("retrieval decay caps the block below p_min".into()));
    }
    let first_at = |target: f64| -> u64 {
        let (mut lo, mut hi) = (1u64, r_peak);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if prep.block_p(mid) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let r_min = first_at(cfg.p_min);
    let r_max = if prep.block_p(r_peak) >= cfg.p_max { first_at(cfg.p_max) } else { r_peak };
    Ok(spread(r_min, r_max.max(r_min), cfg.r_discr))
}

fn peak_attempts(prep: &Prepared) -> u64 {
    let mut r = optimal_attempts_mp(prep.q, prep.c_retrieval());
    while prep.block_p(r + 1) > prep.block_p(r) {
        r += 1;
    }
    while r > 1 && prep.block_p(r - 1) > prep.block_p(r) {
        r -= 1;
    }
    r
}

/// At most `k` near-uniform integers from `lo` to `hi`, both included.
fn spread(lo: u64, hi: u64, k: usize) -> Vec<u64> {
    if hi <= lo || k <= 1 {
        return vec![lo];
    }
    let span = hi - lo;
    if span < k as u64 {
        return (lo..=hi).collect();
    }
    let mut v: Vec<u64> = (0..k)
        .map(|j| lo + ((span as f64) * j as f64 / (k - 1) as f64).round() as u64)
        .collect();
    v.dedup();
    *v.last_mut().unwrap() = hi;
    v
}

/// Pair-generation protocols for a chain.
pub fn epg_protocols(chain: &ChainConfig, cfg: &OptimizerConfig) -> Vec<Protocol> {
    match chain.platform {
        Platform::Ip => {
            let mut v: Vec<Protocol> = theta_grid(cfg.theta_steps)
                .into_iter()
                .filter(|t| t.cos().powi(2) > 1e-12)
                .map(|theta| Protocol::SingleClick { theta })
                .collect();
            if cfg.double_click {
                v.push(Protocol::DoubleClick);
            }
            v
        }
        Platform::Mp | Platform::Combined => ns_grid(cfg.f_threshold, cfg.ns_step)
            .into_iter()
            .map(|n_s| Protocol::MpSource { n_s })
            .collect(),
    }
}

fn swap_protocol(chain: &ChainConfig, mid: usize) -> Protocol {
    match chain.platform {
        Platform::Mp => Protocol::BoostedBsm { level: chain.mp(mid).bsm_level },
        _ => Protocol::MatterBsm,
    }
}

/// Result of an optimization: per-link stores plus candidate counters.
#[derive(Debug, Clone, Default)]
pub struct SchemeStore {
    pub n_links: usize,
    pub links: BTreeMap<(usize, usize), LinkStore>,
    /// Candidates evaluated, per link length.
    pub counts: BTreeMap<usize, u64>,
}

impl SchemeStore {
    pub fn end_to_end(&self) -> Option<&LinkStore> {
        self.links.get(&(0, self.n_links)).filter(|l| !l.is_empty())
    }

    pub fn total_count(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Frontier rows of the end-to-end link, ordered by cell.
    pub fn frontier(&self) -> Vec<FrontierRow> {
        let Some(link) = self.links.get(&(0, self.n_links)) else { return vec![] };
        link.cells
            .iter()
            .map(|(c, s)| FrontierRow {
                n_links: self.n_links,
                p_bin: c.0,
                f_bin: c.1,
                fidelity: s.fidelity(),
                p: s.p(),
                t_seconds: s.t(),
                scheme_id: format!("n{}-p{}-f{}", self.n_links, c.0, c.1),
                scheme: s.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FrontierRow {
    pub n_links: usize,
    pub p_bin: u32,
    pub f_bin: u32,
    pub fidelity: f64,
    pub p: f64,
    pub t_seconds: f64,
    pub scheme_id: String,
    pub scheme: Arc<Scheme>,
}

const SCREEN_TOL: f64 = 1e-9;

#[derive(Clone)]
struct Entry {
    t: f64,
    seq: (usize, usize),
    scheme: Arc<Scheme>,
}

type Best = BTreeMap<Cell, Entry>;

fn merge_best(mut a: Best, b: Best) -> Best {
    for (c, e) in b {
        match a.get(&c) {
            Some(x) if (x.t, x.seq) <= (e.t, e.seq) => {}
            _ => {
                a.insert(c, e);
            }
        }
    }
    a
}

/// A fully specified block minus its attempt count.
type Job = (Prepared, Protocol, Option<[Arc<Scheme>; 2]>);

/// Cell of a screened candidate, unless the fidelity is too close to a bin
/// edge for the screening value to be trusted.
fn confident_cell(f: f64, p: f64, cfg: &OptimizerConfig) -> Option<Cell> {
    let x = (f - cfg.f_threshold) / cfg.eps_f;
    if (x - x.round()).abs() * cfg.eps_f < SCREEN_TOL {
        return None;
    }
    Some(cell_of(f, p, cfg))
}

/// Evaluates all jobs × attempt grids in parallel and returns the fastest
/// new scheme per cell that beats the existing store. Equal times resolve to
/// the incumbent, then to the earliest candidate in enumeration order.
fn best_candidates<F>(n_jobs: usize, span: (usize, usize), job: F, existing: &LinkStore, cfg: &OptimizerConfig) -> (Best, u64)
where
    F: Fn(usize) -> Option<Job> + Sync,
{
    let beaten = |map: &Best, cell: &Cell, t: f64| {
        existing.incumbent_t(cell).is_some_and(|it| it <= t) || map.get(cell).is_some_and(|e| e.t <= t)
    };
    (0..n_jobs)
        .into_par_iter()
        .fold(
            || (Best::new(), 0u64),
            |(mut map, mut count), ji| {
                let Some((prep, proto, children)) = job(ji) else { return (map, count) };
                let Ok(grid) = attempt_grid_for(&prep, cfg) else { return (map, count) };
                for (ri, &r) in grid.iter().enumerate() {
                    count += 1;
                    let (f, p, t) = prep.screen(r);
                    if p < cfg.p_min || f < cfg.f_threshold - SCREEN_TOL {
                        continue;
                    }
                    if let Some(cell) = confident_cell(f, p, cfg) {
                        if beaten(&map, &cell, t) {
                            continue;
                        }
                    }
                    let metrics = prep.finish(r);
                    if metrics.fidelity < cfg.f_threshold {
                        continue;
                    }
                    let cell = cell_of(metrics.fidelity, metrics.p, cfg);
                    if beaten(&map, &cell, t) {
                        continue;
                    }
                    let scheme = Arc::new(Scheme::new(proto, r, span, children.clone(), metrics));
                    map.insert(cell, Entry { t, seq: (ji, ri), scheme });
                }
                (map, count)
            },
        )
        .reduce(|| (Best::new(), 0), |(a, ca), (b, cb)| (merge_best(a, b), ca + cb))
}

/// Every candidate with p ≥ p_min, in enumeration order.
fn all_candidates<F>(n_jobs: usize, span: (usize, usize), job: F, cfg: &OptimizerConfig) -> (Vec<Arc<Scheme>>, u64)
where
    F: Fn(usize) -> Option<Job> + Sync,
{
    let per_job: Vec<(Vec<Arc<Scheme>>, u64)> = (0..n_jobs)
        .into_par_iter()
        .map(|ji| {
            let Some((prep, proto, children)) = job(ji) else { return (vec![], 0) };
            let Ok(grid) = attempt_grid_for(&prep, cfg) else { return (vec![], 0) };
            let mut out = vec![];
            for &r in &grid {
                if prep.block_p(r) >= cfg.p_min {
                    out.push(Arc::new(Scheme::new(proto, r, span, children.clone(), prep.finish(r))));
                }
            }
            (out, grid.len() as u64)
        })
        .collect();
    let count = per_job.iter().map(|x| x.1).sum();
    (per_job.into_iter().flat_map(|x| x.0).collect(), count)
}

/// Decompositions (i₁, i₂) of a span of `i` links allowed by the flags.
fn decompositions(i: usize, n: usize, cfg: &OptimizerConfig) -> Vec<(usize, usize)> {
    let h = odd_part(n);
    (1..i)
        .map(|i1| (i1, i - i1))
        .filter(|&(i1, i2)| {
            if cfg.length_band && !length_band_ok(i1, i2, cfg.length_band_log_base) {
                return false;
            }
            if cfg.bdcz_only && i1 != i2 {
                return false;
            }
            if cfg.bisection && i > h && (i1 % h != 0 || i2 % h != 0) {
                return false;
            }
            if cfg.symmetric && i1 > i2 {
                return false;
            }
            true
        })
        .collect()
}

pub fn odd_part(mut n: usize) -> usize {
    while n > 0 && n % 2 == 0 {
        n /= 2;
    }
    n
}

/// Link lengths processed: all of 1..=n, or with bisection 1..=h plus the
/// multiples of h.
pub fn link_lengths(n: usize, cfg: &OptimizerConfig) -> Vec<usize> {
    let h = odd_part(n);
    (1..=n).filter(|&i| !cfg.bisection || i <= h || i % h == 0).collect()
}

/// Spans processed, bottom-up. Symmetric chains use one canonical span
/// (0, i) per length.
fn spans_to_process(n: usize, cfg: &OptimizerConfig) -> Vec<(usize, usize)> {
    link_lengths(n, cfg)
        .into_iter()
        .flat_map(|i| {
            let starts = if cfg.symmetric { 0..1 } else { 0..n - i + 1 };
            starts.map(move |s| (s, s + i))
        })
        .collect()
}

/// Heuristic optimization over a chain.
pub fn optimize(chain: &ChainConfig, cfg: &OptimizerConfig) -> Result<SchemeStore> {
    chain.validate()?;
    cfg.validate()?;
    if cfg.symmetric && !chain.is_uniform() {
        return Err(Error::Validation("symmetric mode needs identical nodes and equal link lengths".into()));
    }
    let n = chain.n_links();
    let ev = Evaluator::new(chain);
    let mut store = SchemeStore { n_links: n, ..Default::default() };
    let epg = epg_protocols(chain, cfg);

    for span in spans_to_process(n, cfg) {
        let i = span.1 - span.0;
        let mut link = LinkStore::default();
        let mut count = 0u64;
        if i == 1 {
            let preps: Vec<Option<Prepared>> = epg.par_iter().map(|p| ev.prepare_epg(p, span.0).ok()).collect();
            let (best, c) = best_candidates(
                epg.len(),
                span,
                |k| preps[k].clone().map(|prep| (prep, epg[k], None)),
                &link,
                cfg,
            );
            count += c;
            insert_best(&mut link, best, cfg);
        } else {
            for (i1, _) in decompositions(i, n, cfg) {
                let mid = span.0 + i1;
                let left_span = if cfg.symmetric { (0, i1) } else { (span.0, mid) };
                let right_span = if cfg.symmetric { (0, i - i1) } else { (mid, span.1) };
                let left = store.links.get(&left_span).map(|l| l.schemes()).unwrap_or_default();
                let right: Vec<Arc<Scheme>> = if cfg.bdcz_only {
                    // the right half must repeat the left half's tree
                    left.iter()
                        .map(|s| if cfg.symmetric { Some(Arc::new(s.shifted(i1))) } else { ev.reevaluate(s, i1).ok() })
                        .map(|o| o.filter(|s| s.check_invariants(cfg.p_min).is_ok()))
                        .map(|o| o.unwrap_or_else(|| Arc::new(placeholder())))
                        .collect()
                } else {
                    let r = store.links.get(&right_span).map(|l| l.schemes()).unwrap_or_default();
                    if cfg.symmetric {
                        r.iter().map(|s| Arc::new(s.shifted(i1))).collect()
                    } else {
                        r
                    }
                };
                let left_span_abs = (span.0, mid);
                let left: Vec<Arc<Scheme>> = if cfg.symmetric && left_span != left_span_abs {
                    left.iter().map(|s| Arc::new(s.shifted(span.0))).collect()
                } else {
                    left
                };
                let proto = swap_protocol(chain, mid);
                let dedupe = cfg.symmetric && i1 == i - i1 && !cfg.bdcz_only;
                let (nl, nr) = (left.len(), right.len());
                let n_jobs = if cfg.bdcz_only { nl } else { nl * nr };
                let (best, c) = best_candidates(
                    n_jobs,
                    span,
                    |k| {
                        let (a, b) = if cfg.bdcz_only { (k, k) } else { (k / nr, k % nr) };
                        if dedupe && b < a {
                            return None;
                        }
                        let (s1, s2) = (&left[a], &right[b]);
                        if s2.r == 0 {
                            return None;
                        }
                        if let Some(eps) = cfg.eps_swap {
                            if !swap_fidelity_band_ok(s1, s2, eps) {
                                return None;
                            }
                        }
                        let prep = ev.prepare_swap(s1, s2, &proto).ok()?;
                        Some((prep, proto, Some([s1.clone(), s2.clone()])))
                    },
                    &link,
                    cfg,
                );
                count += c;
                insert_best(&mut link, best, cfg);
            }
        }
        if chain.supports_distillation() {
            for _round in 0..cfg.m {
                let snap = link.schemes();
                let ns = snap.len();
                let n_jobs = if cfg.bdcz_only { ns } else { ns * ns };
                let (best, c) = best_candidates(
                    n_jobs,
                    span,
                    |k| {
                        let (a, b) = if cfg.bdcz_only { (k, k) } else { (k / ns, k % ns) };
                        let (s1, s2) = (&snap[a], &snap[b]);
                        if let Some(eps) = cfg.eps_distill {
                            if !distill_band_ok(s1, s2, eps) {
                                return None;
                            }
                        }
                        let prep = ev.prepare_distill(s1, s2, &Protocol::Dejmps).ok()?;
                        Some((prep, Protocol::Dejmps, Some([s1.clone(), s2.clone()])))
                    },
                    &link,
                    cfg,
                );
                count += c;
                insert_best(&mut link, best, cfg);
            }
        }
        prune(&mut link);
        *store.counts.entry(i).or_default() += count;
        store.links.insert(span, link);
    }
    if cfg.symmetric && n > 0 && !store.links.contains_key(&(0, n)) {
        store.links.insert((0, n), LinkStore::default());
    }
    Ok(store)
}

/// Stand-in for a right half that could not be instantiated; never combined.
fn placeholder() -> Scheme {
    let m = crate::scheme::Metrics {
        state: crate::qstate::TwoQubitState::maximally_mixed(),
        fidelity: 0.25,
        p: 0.0,
        t: 0.0,
    };
    Scheme::new(Protocol::DoubleClick, 0, (0, 1), None, m)
}

fn insert_best(link: &mut LinkStore, best: Best, cfg: &OptimizerConfig) {
    for (_, e) in best {
        store_scheme(link, e.scheme, cfg);
    }
}

/// Refuses brute-force runs that would evaluate more than this many candidates.
pub const BRUTE_FORCE_GUARD: u64 = 2_000_000_000;

/// Exhaustive enumeration (only the p_min filter) over the same protocol
/// sets, attempt grids and distillation rounds as [`optimize`], without
/// coarse-graining, bands, thresholds or pruning on intermediate links. The
/// end-to-end link is reported as the fastest scheme per cell, pruned like
/// the heuristic's output so the two are directly comparable.
pub fn brute_force(chain: &ChainConfig, cfg: &OptimizerConfig) -> Result<SchemeStore> {
    brute_force_guarded(chain, cfg, BRUTE_FORCE_GUARD)
}

pub fn brute_force_guarded(chain: &ChainConfig, cfg: &OptimizerConfig, guard: u64) -> Result<SchemeStore> {
    chain.validate()?;
    cfg.validate()?;
    let n = chain.n_links();
    if n > 3 {
        return Err(Error::SizeGuard(format!("brute force supports n <= 3, got {n}")));
    }
    let ev = Evaluator::new(chain);
    let epg = epg_protocols(chain, cfg);
    let est = |jobs: usize, r: usize| -> Result<()> {
        let e = jobs as u64 * r as u64;
        if e > guard {
            return Err(Error::SizeGuard(format!("~{e} candidates exceed the guard of {guard}")));
        }
        Ok(())
    };
    est(epg.len(), cfg.r_discr)?;
    let mut lists: BTreeMap<(usize, usize), Vec<Arc<Scheme>>> = BTreeMap::new();
    let mut store = SchemeStore { n_links: n, ..Default::default() };
    let mut spans: Vec<(usize, usize)> = (1..=n).flat_map(|i| (0..=n - i).map(move |s| (s, s + i))).collect();
    spans.sort_by_key(|s| (s.1 - s.0, s.0));
    for span in spans {
        let i = span.1 - span.0;
        let last = span == (0, n);
        let rounds = if chain.supports_distillation() { cfg.m } else { 0 };
        let mut all: Vec<Arc<Scheme>> = vec![];
        let mut link = LinkStore::default();
        let mut count = 0u64;
        // On the end-to-end link the final phase only needs the best per cell.
        let final_gen = last && rounds == 0;
        if i == 1 {
            let preps: Vec<Option<Prepared>> = epg.par_iter().map(|p| ev.prepare_epg(p, span.0).ok()).collect();
            count += brute_phase(final_gen, epg.len(), span, |k| preps[k].clone().map(|p| (p, epg[k], None)), &mut all, &mut link, cfg);
        } else {
            for i1 in 1..i {
                let mid = span.0 + i1;
                let left = &lists[&(span.0, mid)];
                let right = &lists[&(mid, span.1)];
                est(left.len() * right.len(), cfg.r_discr)?;
                let proto = swap_protocol(chain, mid);
                let nr = right.len();
                count += brute_phase(
                    final_gen,
                    left.len() * nr,
                    span,
                    |k| {
                        let (s1, s2) = (&left[k / nr], &right[k % nr]);
                        let prep = ev.prepare_swap(s1, s2, &proto).ok()?;
                        Some((prep, proto, Some([s1.clone(), s2.clone()])))
                    },
                    &mut all,
                    &mut link,
                    cfg,
                );
            }
        }
        for round in 0..rounds {
            let snap = all.clone();
            let ns = snap.len();
            est(ns * ns, cfg.r_discr)?;
            let final_round = last && round + 1 == rounds;
            if final_round {
                for s in &all {
                    store_scheme(&mut link, s.clone(), cfg);
                }
            }
            count += brute_phase(
                final_round,
                ns * ns,
                span,
                |k| {
                    let (s1, s2) = (&snap[k / ns], &snap[k % ns]);
                    let prep = ev.prepare_distill(s1, s2, &Protocol::Dejmps).ok()?;
                    Some((prep, Protocol::Dejmps, Some([s1.clone(), s2.clone()])))
                },
                &mut all,
                &mut link,
                cfg,
            );
        }
        *store.counts.entry(i).or_default() += count;
        if last {
            prune(&mut link);
            store.links.insert(span, link);
        } else {
            lists.insert(span, all);
        }
    }
    Ok(store)
}

/// One brute-force phase: either list every candidate, or (final phase of
/// the end-to-end link) keep only the fastest per cell.
#[allow(clippy::too_many_arguments)]
fn brute_phase<F>(
    best_only: bool,
    n_jobs: usize,
    span: (usize, usize),
    job: F,
    all: &mut Vec<Arc<Scheme>>,
    link: &mut LinkStore,
    cfg: &OptimizerConfig,
) -> u64
where
    F: Fn(usize) -> Option<Job> + Sync,
{
    if best_only {
        let (best, c) = best_candidates(n_jobs, span, job, link, cfg);
        insert_best(link, best, cfg);
        c
    } else {
        let (v, c) = all_candidates(n_jobs, span, job, cfg);
        all.extend(v);
        c
    }
}

/// Upper bound on candidates for a symmetric chain: r·C²·n·ln n.
pub fn symmetric_count_bound(n: usize, cfg: &OptimizerConfig) -> f64 {
    let c = cfg.max_cells() as f64;
    cfg.r_discr as f64 * c * c * n as f64 * (n as f64).ln()
}

/// Upper bound on candidates for a general chain: 2·r·C²·n²·ln n.
pub fn general_count_bound(n: usize, cfg: &OptimizerConfig) -> f64 {
    let c = cfg.max_cells() as f64;
    2.0 * cfg.r_discr as f64 * c * c * (n * n) as f64 * (n as f64).ln()
}
