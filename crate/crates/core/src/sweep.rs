//! Parameter sweeps driven by a small `key = value` spec file.
//!
//! ```text
//! mode = sure-success        # asymptotic | exact | sure-success
//! K = 4, 8, 16
//! t = 1, 2
//! b = 16                     # or N = ...; lists and a..b ranges allowed
//! tau = 1
//! j1 = 3                     # exact mode only
//! j2 = 0..4
//! ordering = reflection-then-oracle
//! engine = auto
//! ```
//!
//! Rows come out sorted by `(N, K, t, tau, j1, j2)` whatever order the
//! workers finish in.

use rayon::prelude::*;

use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::record::{run_asymptotic, run_surephase, simulate, Engine, Mode, RunRecord, CSV_HEADER};
use crate::statevector::Step3Ordering;

#[derive(Debug, Clone, PartialEq)]
enum Size {
    Items(Vec<u64>),
    Block(Vec<u64>),
}

/// Parsed sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: Mode,
    size: Size,
    pub k: Vec<u64>,
    pub t: Vec<u64>,
    pub tau: Vec<u64>,
    pub j1: Vec<u64>,
    pub j2: Vec<u64>,
    pub ordering: Step3Ordering,
    pub engine: Engine,
}

/// One configuration of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SweepPoint {
    pub n: u64,
    pub k: u64,
    pub t: u64,
    pub tau: u64,
    pub j1: Option<u64>,
    pub j2: Option<u64>,
}

/// Either a finished record or the point and the error it raised.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub outcome: Result<RunRecord>,
}

fn parse_list(key: &str, value: &str) -> Result<Vec<u64>> {
    let bad = |v: &str| Error::Parse(format!("`{key}`: `{v}` is not a non-negative integer"));
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad(lo))?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad(hi))?;
            if hi < lo {
                return Err(Error::Parse(format!("`{key}`: empty range {part}")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("`{key}` lists no values")));
    }
    Ok(out)
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut mode = None;
        let (mut n, mut b) = (None, None);
        let (mut k, mut t, mut tau) = (None, None, None);
        let (mut j1, mut j2) = (vec![0], vec![0]);
        let mut ordering = Step3Ordering::ReflectionThenOracle;
        let mut engine = Engine::Auto;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => mode = Some(value.parse()?),
                "N" => n = Some(parse_list(key, value)?),
                "b" => b = Some(parse_list(key, value)?),
                "K" => k = Some(parse_list(key, value)?),
                "t" => t = Some(parse_list(key, value)?),
                "tau" => tau = Some(parse_list(key, value)?),
                "j1" => j1 = parse_list(key, value)?,
                "j2" => j2 = parse_list(key, value)?,
                "ordering" => ordering = value.parse()?,
                "engine" => engine = value.parse()?,
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", i + 1))),
            }
        }
        let size = match (n, b) {
            (Some(n), None) => Size::Items(n),
            (None, Some(b)) => Size::Block(b),
            _ => return Err(Error::Parse("give exactly one of `N` or `b`".into())),
        };
        let need = |v: Option<Vec<u64>>, name: &str| v.ok_or_else(|| Error::Parse(format!("missing key `{name}`")));
        Ok(Self {
            mode: mode.ok_or_else(|| Error::Parse("missing key `mode`".into()))?,
            size,
            k: need(k, "K")?,
            t: need(t, "t")?,
            tau: need(tau, "tau")?,
            j1,
            j2,
            ordering,
            engine,
        })
    }

    /// Cartesian product of all parameter lists, sorted and deduplicated.
    pub fn points(&self) -> Vec<SweepPoint> {
        let exact = self.mode == Mode::Exact;
        let mut out = Vec::new();
        for &k in &self.k {
            let sizes: Vec<u64> = match &self.size {
                Size::Items(ns) => ns.clone(),
                Size::Block(bs) => bs.iter().map(|b| b * k).collect(),
            };
            for &n in &sizes {
                for &t in &self.t {
                    for &tau in &self.tau {
                        if exact {
                            for &j1 in &self.j1 {
                                for &j2 in &self.j2 {
                                    out.push(SweepPoint { n, k, t, tau, j1: Some(j1), j2: Some(j2) });
                                }
                            }
                        } else {
                            out.push(SweepPoint { n, k, t, tau, j1: None, j2: None });
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn run_point(&self, p: &SweepPoint) -> Result<RunRecord> {
        let g = SearchGeometry::new(p.n, p.k, p.t, p.tau)?;
        match self.mode {
            Mode::Asymptotic => run_asymptotic(&g, self.engine),
            Mode::Exact => simulate(
                &g,
                p.j1.unwrap_or(0),
                p.j2.unwrap_or(0),
                self.ordering,
                self.engine,
                None,
            ),
            Mode::SureSuccess => run_surephase(&g).map(|(rec, _)| rec),
        }
    }

    /// Runs every point in parallel; rows keep the order of [`Self::points`].
    pub fn run(&self) -> Vec<SweepRow> {
        self.points()
            .into_par_iter()
            .map(|point| SweepRow {
                point,
                outcome: self.run_point(&point),
            })
            .collect()
    }
}

impl SweepRow {
    /// CSV line; failed rows keep the parameters and leave the results empty.
    pub fn csv_row(&self, mode: Mode) -> String {
        match &self.outcome {
            Ok(rec) => rec.csv_row(),
            Err(_) => {
                let p = &self.point;
                let b = if p.k > 0 && p.n % p.k == 0 { (p.n / p.k).to_string() } else { String::new() };
                let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
                format!(
                    "{},{},{},{},{},{},{},{},,,,,,",
                    mode.as_str(),
                    p.n,
                    p.k,
                    b,
                    p.t,
                    p.tau,
                    opt(p.j1),
                    opt(p.j2)
                )
            }
        }
    }
}

/// Header plus one line per row, newline-terminated.
pub fn render_csv(mode: Mode, rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row(mode));
        out.push('\n');
    }
    out
}
