//! Atomic file output and the structured scheme records.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use repeater_core::optimizer::FrontierRow;
use repeater_core::scheme::SchemeRecord;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Write `bytes` to `path` through a temporary sibling and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Collects written files relative to the output directory.
pub struct OutDir {
    pub root: PathBuf,
    pub written: Vec<String>,
}

impl OutDir {
    pub fn new(root: &Path) -> Self {
        OutDir { root: root.to_path_buf(), written: vec![] }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.root.join(name), contents.as_bytes())?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// One entry of the schemes file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeEntry {
    pub scheme_id: String,
    pub n_links: usize,
    pub p_bin: u32,
    pub f_bin: u32,
    pub fidelity: f64,
    pub p: f64,
    pub t_seconds: f64,
    pub scheme: SchemeRecord,
}

impl SchemeEntry {
    pub fn from_row(r: &FrontierRow) -> Self {
        SchemeEntry {
            scheme_id: r.scheme_id.clone(),
            n_links: r.n_links,
            p_bin: r.p_bin,
            f_bin: r.f_bin,
            fidelity: r.fidelity,
            p: r.p,
            t_seconds: r.t_seconds,
            scheme: SchemeRecord::from_scheme(&r.scheme),
        }
    }
}

pub fn schemes_json(rows: &[FrontierRow]) -> String {
    let entries: Vec<SchemeEntry> = rows.iter().map(SchemeEntry::from_row).collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("records serialize");
    s.push('\n');
    s
}

/// `frontier.csv` + `x1_y0` → `frontier_x1_y0.csv`.
pub fn suffixed(name: &str, label: &str) -> String {
    match name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => format!("{stem}_{label}.{ext}"),
        _ => format!("{name}_{label}"),
    }
}
