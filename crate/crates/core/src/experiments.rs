//! Monte Carlo lifetime sweeps, CSV output and lifetime fits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decoder::DecoderConfig;
use crate::lattice::LatticeGeom;
use crate::noise::{ErrorEvent, NoiseConfig};
use crate::verifier::{lifetime_run, RunConfig, RunLog};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QPolicy {
    EqualP,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Colony side Q.
    pub q_side: usize,
    /// Lattice exponent, L = Q^n.
    pub n: usize,
    /// Renormalization time U = b^2.
    pub u: u64,
    pub f_c: f64,
    pub f_n: f64,
    pub p: Vec<f64>,
    pub q: QPolicy,
    pub instances: usize,
    pub t_max: u64,
    pub base_seed: u64,
    pub pair_weights: [f64; 2],
    pub wrong_charge_dist: [f64; 3],
    pub verify_every: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            q_side: 3,
            n: 1,
            u: 49,
            f_c: 0.8,
            f_n: 0.2,
            p: vec![1e-3],
            q: QPolicy::EqualP,
            instances: 60,
            t_max: 1_000_000,
            base_seed: 1,
            pair_weights: [0.5, 0.5],
            wrong_charge_dist: [1.0, 1.0, 1.0],
            verify_every: 1,
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses `key=value` lines; `#` starts a comment. Missing keys keep defaults.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExperimentError::Parse { line: i + 1, msg: format!("expected key=value, got {line:?}") })?;
            cfg.set(k.trim(), v.trim()).map_err(|msg| ExperimentError::Parse { line: i + 1, msg })?;
        }
        Ok(cfg)
    }

    /// Sets one field by its config key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
        }
        match key {
            "Q" => self.q_side = num(v)?,
            "n" => self.n = num(v)?,
            "U" => self.u = num(v)?,
            "f_c" => self.f_c = num(v)?,
            "f_n" => self.f_n = num(v)?,
            "p" => self.p = parse_list(v)?,
            "q" => self.q = if v == "p" { QPolicy::EqualP } else { QPolicy::Fixed(num(v)?) },
            "instances" => self.instances = num(v)?,
            "t_max" => self.t_max = num(v)?,
            "base_seed" => self.base_seed = num(v)?,
            "pair_weights" => {
                let w = parse_list(v)?;
                self.pair_weights = w.try_into().map_err(|_| "pair_weights needs 2 values".to_string())?;
            }
            "wrong_charge_dist" => {
                let w = parse_list(v)?;
                self.wrong_charge_dist = w.try_into().map_err(|_| "wrong_charge_dist needs 3 values".to_string())?;
            }
            "verify_every" => self.verify_every = num(v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Integer square root of U.
    pub fn b(&self) -> usize {
        let mut b = (self.u as f64).sqrt() as u64;
        while b * b > self.u {
            b -= 1;
        }
        while (b + 1) * (b + 1) <= self.u {
            b += 1;
        }
        b as usize
    }

    pub fn q_for(&self, p: f64) -> f64 {
        match self.q {
            QPolicy::EqualP => p,
            QPolicy::Fixed(q) => q,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let inv = |m: String| Err(ExperimentError::Invalid(m));
        if let Err(e) = LatticeGeom::new(self.q_side, self.n) {
            return inv(e.to_string());
        }
        let b = self.b();
        if (b * b) as u64 != self.u {
            return inv(format!("U = {} is not a perfect square", self.u));
        }
        self.decoder().validate().map_err(ExperimentError::Invalid)?;
        if self.p.is_empty() {
            return inv("empty p list".into());
        }
        for &p in &self.p {
            self.noise(p).validate().map_err(ExperimentError::Invalid)?;
        }
        if self.instances == 0 || self.t_max == 0 || self.verify_every == 0 {
            return inv("instances, t_max and verify_every must be positive".into());
        }
        Ok(())
    }

    pub fn decoder(&self) -> DecoderConfig {
        DecoderConfig::new(self.q_side, self.n, self.b(), self.f_c, self.f_n)
    }

    pub fn noise(&self, p: f64) -> NoiseConfig {
        NoiseConfig { p, q: self.q_for(p), pair_weights: self.pair_weights, wrong_charge_weights: self.wrong_charge_dist }
    }

    /// Stable text form; re-parses to an equal config.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let q = match self.q {
            QPolicy::EqualP => "p".to_string(),
            QPolicy::Fixed(v) => format!("{v:e}"),
        };
        let _ = writeln!(s, "Q={}", self.q_side);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "U={}", self.u);
        let _ = writeln!(s, "f_c={:e}", self.f_c);
        let _ = writeln!(s, "f_n={:e}", self.f_n);
        let _ = writeln!(s, "p={}", fmt_list(&self.p));
        let _ = writeln!(s, "q={q}");
        let _ = writeln!(s, "instances={}", self.instances);
        let _ = writeln!(s, "t_max={}", self.t_max);
        let _ = writeln!(s, "base_seed={}", self.base_seed);
        let _ = writeln!(s, "pair_weights={}", fmt_list(&self.pair_weights));
        let _ = writeln!(s, "wrong_charge_dist={}", fmt_list(&self.wrong_charge_dist));
        let _ = writeln!(s, "verify_every={}", self.verify_every);
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let d = Sha256::digest(self.canonical().as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Seed of instance `i` at p-index `k`: base_seed + k * instances + i.
    pub fn seed_for(&self, k: usize, i: usize) -> u64 {
        self.base_seed.wrapping_add((k * self.instances + i) as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeRecord {
    pub config_hash: String,
    pub seed: u64,
    pub q_side: usize,
    pub n: usize,
    pub u: u64,
    pub f_c: f64,
    pub f_n: f64,
    pub p: f64,
    pub q: f64,
    pub lifetime: u64,
    pub failure_detail: String,
    pub wall_ms: u64,
}

pub const CSV_HEADER: [&str; 12] =
    ["config_hash", "seed", "Q", "n", "U", "f_c", "f_n", "p", "q", "lifetime", "failure_detail", "wall_ms"];

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Record wall time per instance; off keeps output byte-reproducible.
    pub timing: bool,
    /// Keep the error history of the first instance.
    pub log_events: bool,
    /// Keep the decoder trace of the first instance.
    pub trace: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<LifetimeRecord>,
    pub events: Option<Vec<ErrorEvent>>,
    pub trace: Option<String>,
}

/// Runs one instance.
pub fn run_instance(cfg: &ExperimentConfig, k: usize, i: usize, log: &mut RunLog, timing: bool) -> LifetimeRecord {
    let p = cfg.p[k];
    let seed = cfg.seed_for(k, i);
    let run = RunConfig {
        geom: LatticeGeom::new(cfg.q_side, cfg.n).expect("validated"),
        decoder: cfg.decoder(),
        noise: cfg.noise(p),
        seed,
        t_max: cfg.t_max,
        verify_every: cfg.verify_every,
    };
    let start = Instant::now();
    let out = lifetime_run(&run, log);
    let wall_ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
    let mut detail = if out.censored { "censored".to_string() } else { out.status.to_string() };
    if cfg.verify_every > 1 {
        let _ = write!(detail, ";grid={}", cfg.verify_every);
    }
    if out.fallback {
        detail.push_str(";approx_matching");
    }
    LifetimeRecord {
        config_hash: cfg.hash(),
        seed,
        q_side: cfg.q_side,
        n: cfg.n,
        u: cfg.u,
        f_c: cfg.f_c,
        f_n: cfg.f_n,
        p,
        q: cfg.q_for(p),
        lifetime: out.lifetime,
        failure_detail: detail,
        wall_ms,
    }
}

/// All instances for all p values, in parallel; records come back in (p, instance) order.
pub fn run_sweep(cfg: &ExperimentConfig, opts: SweepOptions) -> Result<SweepOutput, ExperimentError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.p.len()).flat_map(|k| (0..cfg.instances).map(move |i| (k, i))).collect();
    let mut first_log = RunLog {
        events: opts.log_events.then(Vec::new),
        trace: opts.trace.then(String::new),
        ..RunLog::default()
    };
    let first = run_instance(cfg, 0, 0, &mut first_log, opts.timing);
    let rest: Vec<LifetimeRecord> =
        jobs[1..].par_iter().map(|&(k, i)| run_instance(cfg, k, i, &mut RunLog::default(), opts.timing)).collect();
    let mut records = Vec::with_capacity(jobs.len());
    records.push(first);
    records.extend(rest);
    Ok(SweepOutput { records, events: first_log.events, trace: first_log.trace })
}

pub fn write_records<W: Write>(w: W, records: &[LifetimeRecord]) -> Result<(), ExperimentError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in records {
        wr.write_record([
            r.config_hash.clone(),
            r.seed.to_string(),
            r.q_side.to_string(),
            r.n.to_string(),
            r.u.to_string(),
            r.f_c.to_string(),
            r.f_n.to_string(),
            format!("{:e}", r.p),
            format!("{:e}", r.q),
            r.lifetime.to_string(),
            r.failure_detail.clone(),
            r.wall_ms.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<LifetimeRecord>, ExperimentError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (li, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |f: &str| ExperimentError::Parse { line: li + 2, msg: format!("bad field {f}") };
        if rec.len() != CSV_HEADER.len() {
            return Err(ExperimentError::Parse { line: li + 2, msg: "wrong field count".into() });
        }
        macro_rules! f {
            ($i:expr) => {
                rec[$i].parse().map_err(|_| bad(CSV_HEADER[$i]))?
            };
        }
        out.push(LifetimeRecord {
            config_hash: rec[0].to_string(),
            seed: f!(1),
            q_side: f!(2),
            n: f!(3),
            u: f!(4),
            f_c: f!(5),
            f_n: f!(6),
            p: f!(7),
            q: f!(8),
            lifetime: f!(9),
            failure_detail: rec[10].to_string(),
            wall_ms: f!(11),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub p: f64,
    pub count: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub censored: usize,
}

/// Mean lifetime per (n, p), ordered by n then p.
pub fn summarize(records: &[LifetimeRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, u64), Vec<&LifetimeRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n, r.p.to_bits())).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((n, pb), rs)| {
            let xs: Vec<f64> = rs.iter().map(|r| r.lifetime as f64).collect();
            let (mean, sem) = mean_sem(&xs);
            let censored = rs.iter().filter(|r| r.failure_detail.starts_with("censored")).count();
            SummaryRow { n, p: f64::from_bits(pb), count: xs.len(), mean, sem, censored }
        })
        .collect();
    rows.sort_by(|a, b| (a.n, a.p).partial_cmp(&(b.n, b.p)).expect("finite p"));
    rows
}

pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeFit {
    /// Coefficient of (1/(p(1-p)))^(2^n).
    pub coef: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub r2: f64,
    /// Slope of ln(lifetime) against ln(p).
    pub loglog_slope: f64,
    pub poor_fit: bool,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

/// Fits mean lifetime against (1/(p(1-p)))^(2^n) plus a constant.
pub fn fit_lifetime(points: &[(f64, f64)], n: usize) -> Result<LifetimeFit, ExperimentError> {
    let mut distinct: Vec<u64> = points.iter().map(|p| p.0.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(ExperimentError::Fit("need at least 3 distinct p values".into()));
    }
    if points.iter().any(|&(p, y)| !(p > 0.0 && p < 1.0) || !y.is_finite() || y <= 0.0) {
        return Err(ExperimentError::Fit("p must lie in (0,1) and lifetimes be positive".into()));
    }
    let e = 2f64.powi(n as i32);
    let x: Vec<f64> = points.iter().map(|&(p, _)| (1.0 / (p * (1.0 - p))).powf(e)).collect();
    let y: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
    let (coef, intercept) = least_squares(&x, &y);
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (coef * a + intercept)).collect();
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (loglog_slope, _) = least_squares(&lx, &ly);
    Ok(LifetimeFit { coef, intercept, residuals, r2, loglog_slope, poor_fit: r2 < 0.9 })
}

/// Fit over the summary rows of lattice exponent n.
pub fn fit_records(records: &[LifetimeRecord], n: usize) -> Result<LifetimeFit, ExperimentError> {
    let pts: Vec<(f64, f64)> = summarize(records).into_iter().filter(|r| r.n == n).map(|r| (r.p, r.mean)).collect();
    fit_lifetime(&pts, n)
}
