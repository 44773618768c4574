use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use anyon_ca::algebra::proof_parameters;
use anyon_ca::classifier::{self, ClassifierParams};
use anyon_ca::experiments::{self, ExperimentConfig, SweepOptions};

#[derive(Parser)]
#[command(name = "anyon-ca", version, about = "Cellular-automaton decoding of Ising anyons on a torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a lifetime sweep and write one CSV row per instance.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated charge error rates.
        #[arg(long)]
        p: Option<String>,
        /// Measurement error rate, or "p".
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        t_max: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Error history of the first instance.
        #[arg(long)]
        log_events: Option<PathBuf>,
        /// Decoder move trace of the first instance.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record wall time (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Assign recorded error events to hierarchy levels.
    Classify {
        #[arg(long)]
        events: PathBuf,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, default_value_t = 7)]
        b: u64,
        #[arg(long = "Q", default_value_t = 3)]
        q: u64,
        /// Defaults to b^2.
        #[arg(long = "U")]
        u: Option<u64>,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Fail when Q < 4(a+2) or U < 4(b+2).
        #[arg(long)]
        strict: bool,
        /// Per-event level table; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the closed-form constants for colony side Q and fusion-graph diameter D.
    Params {
        #[arg(long = "Q", default_value_t = 78)]
        q: u64,
        #[arg(long = "D", default_value_t = 2)]
        d: u64,
        #[arg(long, default_value_t = 3)]
        a: u64,
        #[arg(long)]
        b: Option<u64>,
    },
    /// Fit mean lifetime against (1/(p(1-p)))^(2^n).
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Simulate { config, p, q, n, instances, t_max, seed, out, log_events, trace, timing } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    ExperimentConfig::parse(&text)?
                }
                None => ExperimentConfig::default(),
            };
            let overrides = [
                ("p", p),
                ("q", q),
                ("n", n.map(|v| v.to_string())),
                ("instances", instances.map(|v| v.to_string())),
                ("t_max", t_max.map(|v| v.to_string())),
                ("base_seed", seed.map(|v| v.to_string())),
            ];
            for (k, v) in overrides {
                if let Some(v) = v {
                    cfg.set(k, &v).map_err(anyhow::Error::msg)?;
                }
            }
            cfg.validate()?;
            let denom = classifier::convergence_denominator(cfg.q_side as u64, cfg.u);
            eprintln!("convergence bound: p + q < 1/{denom} = {:.6e}", 1.0 / denom as f64);
            let opts = SweepOptions { timing, log_events: log_events.is_some(), trace: trace.is_some() };
            let res = experiments::run_sweep(&cfg, opts)?;
            experiments::write_records(BufWriter::new(File::create(&out)?), &res.records)?;
            if let (Some(path), Some(ev)) = (log_events, res.events.as_ref()) {
                classifier::write_events(BufWriter::new(File::create(path)?), ev)?;
            }
            if let (Some(path), Some(tr)) = (trace, res.trace.as_ref()) {
                std::fs::write(path, tr)?;
            }
            println!("# n p count mean sem censored");
            for r in experiments::summarize(&res.records) {
                println!("{} {:e} {} {} {} {}", r.n, r.p, r.count, r.mean, r.sem, r.censored);
            }
        }
        Cmd::Classify { events, a, b, q, u, n_max, strict, out } => {
            let ev = classifier::read_events(File::open(&events).with_context(|| format!("opening {}", events.display()))?)?;
            let params = ClassifierParams::new(a, b, q, u.unwrap_or(b * b), n_max);
            let asg = classifier::classify(&ev, params, strict)?;
            if !asg.preconditions_ok {
                eprintln!("warning: Q >= 4(a+2) or U >= 4(b+2) does not hold");
            }
            if asg.truncated {
                eprintln!("warning: candidate enumeration truncated");
            }
            for lvl in 0..=n_max {
                eprintln!("level {lvl}: {} actual errors", asg.errors_at(lvl).count());
            }
            eprintln!("unclassified at cutoff: {}", asg.unclassified.len());
            match out {
                Some(path) => classifier::write_levels(BufWriter::new(File::create(path)?), &ev, &asg)?,
                None => classifier::write_levels(std::io::stdout().lock(), &ev, &asg)?,
            }
        }
        Cmd::Params { q, d, a, b } => {
            let pp = proof_parameters(q, d, a, b)?;
            let mut o = std::io::stdout().lock();
            writeln!(o, "Q = {}", pp.q)?;
            writeln!(o, "D = {}", pp.d)?;
            writeln!(o, "a = {}", pp.a_sep)?;
            writeln!(o, "b = {}", pp.b)?;
            writeln!(o, "U = {}", pp.u)?;
            writeln!(o, "f_c b = {}", pp.fc_b)?;
            writeln!(o, "f_n b = {}", pp.fn_b)?;
            writeln!(o, "f_c = {:.6}", pp.f_c)?;
            writeln!(o, "f_n = {:.6}", pp.f_n)?;
            writeln!(o, "b0 = {}", pp.b0)?;
            writeln!(o, "p_c = {:.4e}", pp.p_c)?;
            writeln!(o, "b >= b0: {}", pp.b_at_least_b0)?;
            writeln!(o, "b > 2 f_n b: {}", pp.b_above_twice_fn)?;
            writeln!(o, "U >= 4(b+2): {}", pp.u_at_least_4b2)?;
            writeln!(o, "Q odd: {}", pp.q_odd)?;
        }
        Cmd::Fit { input, n } => {
            let recs = experiments::read_records(File::open(&input).with_context(|| format!("opening {}", input.display()))?)?;
            if recs.is_empty() {
                bail!("no records in {}", input.display());
            }
            let f = experiments::fit_records(&recs, n)?;
            println!("coef = {:e}", f.coef);
            println!("intercept = {:e}", f.intercept);
            println!("r2 = {:.4}", f.r2);
            println!("loglog_slope = {:.4}", f.loglog_slope);
            println!("poor_fit = {}", f.poor_fit);
            println!("# p mean fitted");
            for r in experiments::summarize(&recs).into_iter().filter(|r| r.n == n) {
                let x = (1.0 / (r.p * (1.0 - r.p))).powf(2f64.powi(n as i32));
                println!("{:e} {} {}", r.p, r.mean, f.coef * x + f.intercept);
            }
        }
    }
    Ok(())
}
