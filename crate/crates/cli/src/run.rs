//! Verb implementations. Each returns the text printed on success.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use repeater_core::chain::ChainConfig;
use repeater_core::error::Error as CoreError;
use repeater_core::optimizer::{brute_force, optimize, FrontierRow, OptimizerConfig, SchemeStore};
use repeater_core::report::{counts_csv, frontier_csv, heatmap_csv, keyrate_csv, HeatmapCell};
use repeater_core::scheme::{to_dot, Evaluator};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SweepPoint};
use crate::error::{CliError, Result};
use crate::output::{schemes_json, suffixed, OutDir, SchemeEntry};

pub struct Options {
    pub out: PathBuf,
    pub workers: Option<usize>,
    /// Raw config bytes, hashed into the manifest.
    pub config_bytes: Vec<u8>,
}

/// Optimization result for one chain; `store` is `None` when the chain
/// admits no scheme at all.
pub struct Outcome {
    pub store: Option<SchemeStore>,
    pub rows: Vec<FrontierRow>,
    pub infeasible: Option<String>,
}

pub fn run_chain(chain: &ChainConfig, opt: &OptimizerConfig) -> Result<Outcome> {
    match optimize(chain, opt) {
        Ok(store) => {
            let rows = store.frontier();
            Ok(Outcome { store: Some(store), rows, infeasible: None })
        }
        Err(CoreError::Infeasible(m)) => Ok(Outcome { store: None, rows: vec![], infeasible: Some(m) }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct ParamValue {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct PointSummary {
    label: String,
    params: Vec<ParamValue>,
    status: &'static str,
    candidates_total: u64,
    candidates_per_length: BTreeMap<usize, u64>,
    frontier_rows: usize,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    verb: String,
    config_sha256: String,
    started_unix_seconds: u64,
    wall_time_seconds: f64,
    workers: usize,
    points: Vec<PointSummary>,
    outputs: Vec<String>,
}

fn summary(label: &str, params: &[(String, f64)], o: &Outcome) -> PointSummary {
    PointSummary {
        label: label.to_string(),
        params: params.iter().map(|(n, v)| ParamValue { name: n.clone(), value: *v }).collect(),
        status: if o.infeasible.is_some() || o.rows.is_empty() { "empty" } else { "ok" },
        candidates_total: o.store.as_ref().map_or(0, |s| s.total_count()),
        candidates_per_length: o.store.as_ref().map(|s| s.counts.clone()).unwrap_or_default(),
        frontier_rows: o.rows.len(),
    }
}

struct Session<'a> {
    opts: &'a Options,
    out: OutDir,
    started: SystemTime,
    clock: Instant,
    verb: &'static str,
}

impl<'a> Session<'a> {
    fn new(opts: &'a Options, verb: &'static str) -> Self {
        Session { opts, out: OutDir::new(&opts.out), started: SystemTime::now(), clock: Instant::now(), verb }
    }

    fn finish(mut self, cfg: &RunConfig, points: Vec<PointSummary>) -> Result<()> {
        let name = cfg.outputs.manifest.clone().unwrap_or_else(|| "manifest.json".into());
        let manifest = Manifest {
            tool: "repeater",
            version: env!("CARGO_PKG_VERSION"),
            core_version: repeater_core::VERSION,
            verb: self.verb.to_string(),
            config_sha256: format!("{:x}", Sha256::digest(&self.opts.config_bytes)),
            started_unix_seconds: self.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_time_seconds: self.clock.elapsed().as_secs_f64(),
            workers: self.opts.workers.unwrap_or_else(rayon::current_num_threads),
            points,
            outputs: self.out.written.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        self.out.write(&name, &text)
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(CliError::Usage("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn dots(rows: &[FrontierRow]) -> String {
    rows.iter().map(|r| to_dot(&r.scheme, &r.scheme_id)).collect::<Vec<_>>().join("\n")
}

fn brute_rows(chain: &ChainConfig, opt: &OptimizerConfig) -> Result<Vec<FrontierRow>> {
    match brute_force(chain, opt) {
        Ok(s) => Ok(s.frontier()),
        Err(CoreError::Infeasible(_)) => Ok(vec![]),
        Err(e) => Err(e.into()),
    }
}

fn describe(o: &Outcome, n_links: usize) -> String {
    match o.rows.iter().max_by(|a, b| a.fidelity.total_cmp(&b.fidelity)) {
        None => format!("{n_links} links: no scheme reaches the thresholds"),
        Some(best) => format!(
            "{n_links} links: {} frontier schemes from {} candidates; highest F = {:.6} (p = {:.4}, T = {:.4e} s)",
            o.rows.len(),
            o.store.as_ref().map_or(0, |s| s.total_count()),
            best.fidelity,
            best.p,
            best.t_seconds
        ),
    }
}

pub fn cmd_optimize(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let mut s = Session::new(opts, "optimize");
    let (chain, opt) = cfg.resolve()?;
    let o = &cfg.outputs;
    let (outcome, brute) = with_workers(opts.workers, || {
        let outcome = run_chain(&chain, &opt)?;
        let brute = o.brute_frontier.as_ref().map(|_| brute_rows(&chain, &opt)).transpose()?;
        Ok((outcome, brute))
    })?;
    s.out.write(o.frontier.as_deref().unwrap_or("frontier.csv"), &frontier_csv(&outcome.rows))?;
    s.out.write(o.schemes.as_deref().unwrap_or("schemes.json"), &schemes_json(&outcome.rows))?;
    if let Some(store) = &outcome.store {
        s.out.write(o.counts.as_deref().unwrap_or("counts.csv"), &counts_csv(store))?;
    }
    if let Some(name) = &o.keyrates {
        s.out.write(name, &keyrate_csv(&outcome.rows, cfg.keyrate.meas_keep, cfg.keyrate.mode))?;
    }
    if let Some(name) = &o.dot {
        s.out.write(name, &dots(&outcome.rows))?;
    }
    if let (Some(name), Some(rows)) = (&o.brute_frontier, &brute) {
        s.out.write(name, &frontier_csv(rows))?;
    }
    let msg = describe(&outcome, chain.n_links());
    s.finish(cfg, vec![summary("base", &[], &outcome)])?;
    Ok(msg)
}

pub fn cmd_keyrate(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let mut s = Session::new(opts, "keyrate");
    let (chain, opt) = cfg.resolve()?;
    let o = &cfg.outputs;
    let outcome = with_workers(opts.workers, || run_chain(&chain, &opt))?;
    s.out.write(o.frontier.as_deref().unwrap_or("frontier.csv"), &frontier_csv(&outcome.rows))?;
    let (keep, mode) = (cfg.keyrate.meas_keep, cfg.keyrate.mode);
    s.out.write(o.keyrates.as_deref().unwrap_or("keyrates.csv"), &keyrate_csv(&outcome.rows, keep, mode))?;
    let best = outcome
        .rows
        .iter()
        .map(|r| (repeater_core::keyrate::key_rate_with(&r.scheme, keep, mode), r))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let msg = match best {
        Some((rate, r)) if rate > 0.0 => {
            format!("highest key rate {rate:.6e} bit/s from {} (F = {:.6})", r.scheme_id, r.fidelity)
        }
        _ => "no frontier scheme yields a positive key rate".to_string(),
    };
    s.finish(cfg, vec![summary("base", &[], &outcome)])?;
    Ok(msg)
}

pub fn cmd_sweep(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep verb needs a [sweep] section".into()))?;
    let mut s = Session::new(opts, "sweep");
    let points = cfg.sweep_points()?;
    let resolved: Vec<(SweepPoint, ChainConfig, OptimizerConfig)> = points
        .into_iter()
        .map(|p| {
            let (c, o) = p.config.resolve()?;
            Ok((p, c, o))
        })
        .collect::<Result<_>>()?;
    let o = &cfg.outputs;
    let want_brute = o.brute_frontier.is_some();
    let results: Vec<(Outcome, Option<Vec<FrontierRow>>)> = with_workers(opts.workers, || {
        resolved
            .par_iter()
            .map(|(_, chain, opt)| {
                let out = run_chain(chain, opt)?;
                let brute = if want_brute { Some(brute_rows(chain, opt)?) } else { None };
                Ok((out, brute))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let x_name = sweep.axes[0].param.as_str();
    let y_name = sweep.axes.get(1).map(|a| a.param.as_str());
    let mut index = format!("label,{x_name},{},status,candidates,frontier_rows\n", y_name.unwrap_or(""));
    let mut cells = vec![];
    let mut summaries = vec![];
    for ((point, _, _), (outcome, brute)) in resolved.iter().zip(&results) {
        let x = point.params[0].1;
        let y = point.params.get(1).map(|p| p.1);
        let sm = summary(&point.label, &point.params, outcome);
        let _ = writeln!(
            index,
            "{},{},{},{},{},{}",
            point.label,
            x,
            y.map(|v| v.to_string()).unwrap_or_default(),
            sm.status,
            sm.candidates_total,
            sm.frontier_rows
        );
        summaries.push(sm);
        for &f_target in &sweep.targets {
            let best = outcome
                .rows
                .iter()
                .filter(|r| r.fidelity >= f_target)
                .min_by(|a, b| a.t_seconds.total_cmp(&b.t_seconds))
                .map(|r| (r.fidelity, r.p, r.t_seconds, format!("{}-{}", point.label, r.scheme_id)));
            cells.push(HeatmapCell { x, y, f_target, best });
        }
        let label = &point.label;
        if let Some(name) = &o.frontier {
            s.out.write(&suffixed(name, label), &frontier_csv(&outcome.rows))?;
        }
        if let Some(name) = &o.schemes {
            s.out.write(&suffixed(name, label), &schemes_json(&outcome.rows))?;
        }
        if let (Some(name), Some(store)) = (&o.counts, &outcome.store) {
            s.out.write(&suffixed(name, label), &counts_csv(store))?;
        }
        if let Some(name) = &o.keyrates {
            let text = keyrate_csv(&outcome.rows, cfg.keyrate.meas_keep, cfg.keyrate.mode);
            s.out.write(&suffixed(name, label), &text)?;
        }
        if let Some(name) = &o.dot {
            s.out.write(&suffixed(name, label), &dots(&outcome.rows))?;
        }
        if let (Some(name), Some(rows)) = (&o.brute_frontier, brute) {
            s.out.write(&suffixed(name, label), &frontier_csv(rows))?;
        }
    }
    s.out.write(o.points.as_deref().unwrap_or("points.csv"), &index)?;
    if !sweep.targets.is_empty() {
        s.out.write(o.heatmap.as_deref().unwrap_or("heatmap.csv"), &heatmap_csv(x_name, y_name, &cells))?;
    }
    let feasible = cells.iter().filter(|c| c.best.is_some()).count();
    let msg = format!(
        "{} sweep points, {} of {} heatmap cells reach their target",
        resolved.len(),
        feasible,
        cells.len()
    );
    s.finish(cfg, summaries)?;
    Ok(msg)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn cmd_oracle_check(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let mut s = Session::new(opts, "oracle-check");
    let (chain, opt) = cfg.resolve()?;
    let (outcome, brute) = with_workers(opts.workers, || {
        let brute = brute_rows(&chain, &opt)?;
        Ok((run_chain(&chain, &opt)?, brute))
    })?;

    // Every heuristic row must survive serialization and re-evaluate to itself.
    let ev = Evaluator::new(&chain);
    let mut mismatches = vec![];
    for r in &outcome.rows {
        let json = serde_json::to_string(&SchemeEntry::from_row(r)).expect("entry serializes");
        let back: SchemeEntry = serde_json::from_str(&json).expect("entry parses");
        let again = back.scheme.to_scheme().and_then(|t| ev.reevaluate(&t, 0))?;
        let ok = rel_close(again.fidelity(), r.fidelity, 1e-9)
            && rel_close(again.p(), r.p, 1e-9)
            && rel_close(again.t(), r.t_seconds, 1e-9);
        if !ok {
            mismatches.push(r.scheme_id.clone());
        }
    }

    type Side = Option<(f64, f64, f64)>;
    let mut cells: BTreeMap<(u32, u32), (Side, Side)> = BTreeMap::new();
    for r in &outcome.rows {
        cells.entry((r.p_bin, r.f_bin)).or_default().0 = Some((r.fidelity, r.p, r.t_seconds));
    }
    for r in &brute {
        cells.entry((r.p_bin, r.f_bin)).or_default().1 = Some((r.fidelity, r.p, r.t_seconds));
    }
    let mut report = String::from("p_bin,f_bin,heuristic_F,heuristic_p,heuristic_T,brute_F,brute_p,brute_T,T_ratio\n");
    let (mut same, mut only_h, mut only_b, mut worst) = (0usize, 0usize, 0usize, 1.0f64);
    for ((pb, fb), (h, b)) in &cells {
        let fmt = |x: &Side| x.map(|(f, p, t)| format!("{f},{p},{t}")).unwrap_or_else(|| ",,".into());
        let ratio = match (h, b) {
            (Some(h), Some(b)) => {
                let q = h.2 / b.2;
                worst = worst.max(q);
                if rel_close(h.2, b.2, 1e-12) {
                    same += 1;
                }
                q.to_string()
            }
            (Some(_), None) => {
                only_h += 1;
                String::new()
            }
            _ => {
                only_b += 1;
                String::new()
            }
        };
        let _ = writeln!(report, "{pb},{fb},{},{},{ratio}", fmt(h), fmt(b));
    }
    let o = &cfg.outputs;
    s.out.write(o.frontier.as_deref().unwrap_or("frontier.csv"), &frontier_csv(&outcome.rows))?;
    s.out.write(o.brute_frontier.as_deref().unwrap_or("brute_frontier.csv"), &frontier_csv(&brute))?;
    s.out.write(o.oracle_report.as_deref().unwrap_or("oracle_report.csv"), &report)?;
    let msg = format!(
        "{} cells: {same} identical, {only_h} heuristic only, {only_b} brute force only, worst T ratio {worst:.4}; \
         {} of {} frontier schemes re-evaluate exactly{}",
        cells.len(),
        outcome.rows.len() - mismatches.len(),
        outcome.rows.len(),
        if mismatches.is_empty() { String::new() } else { format!(" (mismatches: {})", mismatches.join(" ")) }
    );
    s.finish(cfg, vec![summary("base", &[], &outcome)])?;
    Ok(msg)
}

/// Graph text and record per scheme, from a schemes file or a fresh run.
pub fn cmd_export(cfg: Option<&RunConfig>, from: Option<&Path>, ids: &[String], opts: &Options) -> Result<String> {
    let entries: Vec<SchemeEntry> = match (from, cfg) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        (None, Some(cfg)) => {
            let (chain, opt) = cfg.resolve()?;
            let outcome = with_workers(opts.workers, || run_chain(&chain, &opt))?;
            outcome.rows.iter().map(SchemeEntry::from_row).collect()
        }
        (None, None) => return Err(CliError::Usage("export-scheme needs --config or --from".into())),
    };
    let chosen: Vec<&SchemeEntry> = if ids.is_empty() {
        entries.iter().collect()
    } else {
        ids.iter()
            .map(|id| {
                entries.iter().find(|e| &e.scheme_id == id).ok_or_else(|| {
                    let known: Vec<&str> = entries.iter().map(|e| e.scheme_id.as_str()).collect();
                    CliError::Usage(format!("no scheme '{id}'; available: {}", known.join(", ")))
                })
            })
            .collect::<Result<_>>()?
    };
    let mut out = OutDir::new(&opts.out);
    for e in &chosen {
        let scheme = e.scheme.to_scheme()?;
        out.write(&format!("{}.dot", e.scheme_id), &to_dot(&scheme, &e.scheme_id))?;
        let mut json = serde_json::to_string_pretty(e).expect("entry serializes");
        json.push('\n');
        out.write(&format!("{}.json", e.scheme_id), &json)?;
    }
    Ok(format!("exported {} schemes", chosen.len()))
}
