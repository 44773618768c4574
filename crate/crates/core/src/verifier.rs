//! Recoverability check with perfect operations: match sigmas, fuse, match
//! the resulting eps, fuse, then inspect residual charge and loop homology.

use std::fmt;

use thiserror::Error;

use crate::backend::{AnyonId, Charge, Kind, SystemState, ising::SECTOR_EPS, ising::SECTOR_SIGMA};
use crate::decoder::{full_step, Decoder};
use crate::lattice::{LatticeGeom, Site};
use crate::noise::{ErrorEvent, NoiseConfig};

/// Point counts up to this are matched exactly.
pub const N_EXACT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("odd number of points ({0}) cannot be perfectly matched")]
    OddCount(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Index pairs into the input point list, lower index first.
    pub pairs: Vec<(usize, usize)>,
    /// Minimal displacement from the first to the second point of each pair.
    pub paths: Vec<(i64, i64)>,
    pub weight: usize,
    /// False when the heuristic fallback was used.
    pub exact: bool,
}

fn dp_match(d: &[Vec<usize>]) -> (usize, Vec<(usize, usize)>) {
    let n = d.len();
    let full = (1usize << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    let mut choice = vec![(0u8, 0u8); 1 << n];
    best[0] = 0;
    for mask in 0..=full {
        if best[mask] == usize::MAX || mask == full {
            continue;
        }
        // lowest unmatched point
        let i = (!mask).trailing_zeros() as usize;
        #[allow(clippy::needless_range_loop)]
        for j in (i + 1)..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let nm = mask | (1 << i) | (1 << j);
            let w = best[mask] + d[i][j];
            if w < best[nm] {
                best[nm] = w;
                choice[nm] = (i as u8, j as u8);
            }
        }
    }
    let mut pairs = Vec::with_capacity(n / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((i as usize, j as usize));
        mask &= !((1 << i) | (1 << j));
    }
    pairs.reverse();
    (best[full], pairs)
}

fn greedy_match(d: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = d.len();
    let mut edges: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| (d[i][j], i, j)).collect();
    edges.sort_unstable();
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for (_, i, j) in edges {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            pairs.push((i, j));
        }
    }
    // 2-swap improvement
    loop {
        let mut improved = false;
        for x in 0..pairs.len() {
            for y in (x + 1)..pairs.len() {
                let (a, b) = pairs[x];
                let (c, e) = pairs[y];
                let cur = d[a][b] + d[c][e];
                let alt1 = d[a][c] + d[b][e];
                let alt2 = d[a][e] + d[b][c];
                if alt1 < cur && alt1 <= alt2 {
                    pairs[x] = (a.min(c), a.max(c));
                    pairs[y] = (b.min(e), b.max(e));
                    improved = true;
                } else if alt2 < cur {
                    pairs[x] = (a.min(e), a.max(e));
                    pairs[y] = (b.min(c), b.max(c));
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Minimum-weight perfect matching under the torus Manhattan metric.
pub fn mwpm(points: &[Site], geom: &LatticeGeom) -> Result<Matching, VerifyError> {
    let n = points.len();
    if n % 2 == 1 {
        return Err(VerifyError::OddCount(n));
    }
    let d: Vec<Vec<usize>> =
        points.iter().map(|&a| points.iter().map(|&b| geom.torus_distance(a, b)).collect()).collect();
    let (pairs, exact) = if n <= N_EXACT { (dp_match(&d).1, true) } else { (greedy_match(&d), false) };
    let weight = pairs.iter().map(|&(i, j)| d[i][j]).sum();
    let paths = pairs.iter().map(|&(i, j)| geom.torus_displacement(points[i], points[j])).collect();
    Ok(Matching { pairs, paths, weight, exact })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LogicalStatus {
    pub success: bool,
    pub eps_x: bool,
    pub eps_y: bool,
    pub sigma_x: bool,
    pub sigma_y: bool,
    pub residual: bool,
    /// Set when a matching above the exact size limit was needed.
    pub fallback: bool,
}

impl LogicalStatus {
    fn from_flags(eps: [bool; 2], sigma: [bool; 2], residual: bool, fallback: bool) -> Self {
        let success = !(eps[0] || eps[1] || sigma[0] || sigma[1] || residual);
        LogicalStatus { success, eps_x: eps[0], eps_y: eps[1], sigma_x: sigma[0], sigma_y: sigma[1], residual, fallback }
    }
}

impl fmt::Display for LogicalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.success {
            return f.write_str("ok");
        }
        let mut parts = Vec::new();
        for (flag, name) in [
            (self.eps_x, "eps_x"),
            (self.eps_y, "eps_y"),
            (self.sigma_x, "sigma_x"),
            (self.sigma_y, "sigma_y"),
            (self.residual, "residual"),
        ] {
            if flag {
                parts.push(name);
            }
        }
        f.write_str(&parts.join("+"))
    }
}

/// Walks `id` to `target` along an x-then-y minimal path; wrap ties go negative.
fn walk_l_path(st: &mut SystemState, id: AnyonId, target: Site) {
    let g = st.geom;
    let start = st.anyon(id).expect("live").site;
    let (mut dx, mut dy) = g.torus_displacement(start, target);
    let l = g.l as i64;
    if 2 * dx == l {
        dx = -dx;
    }
    if 2 * dy == l {
        dy = -dy;
    }
    let mut cur = start;
    for _ in 0..dx.unsigned_abs() {
        cur = g.offset(cur, dx.signum(), 0);
        st.move_anyon(id, cur);
    }
    for _ in 0..dy.unsigned_abs() {
        cur = g.offset(cur, 0, dy.signum());
        st.move_anyon(id, cur);
    }
}

fn match_and_fuse(st: &mut SystemState, kind: Kind) -> bool {
    let mut ids: Vec<AnyonId> = st.anyons().filter(|a| a.kind == kind).map(|a| a.id).collect();
    ids.sort_unstable();
    let pts: Vec<Site> = ids.iter().map(|&id| st.anyon(id).expect("live").site).collect();
    let m = mwpm(&pts, &st.geom).expect("an odd anyon count means charge was not conserved");
    for &(i, j) in &m.pairs {
        let target = pts[j];
        walk_l_path(st, ids[i], target);
        st.fuse_site(target);
    }
    !m.exact
}

/// Decodes a deep copy of the state with perfect operations. The live state is untouched.
pub fn snapshot_decode(state: &SystemState) -> LogicalStatus {
    if state.is_empty() {
        let h = state.homology;
        return LogicalStatus::from_flags(h[SECTOR_EPS], h[SECTOR_SIGMA], false, false);
    }
    let mut st = state.clone();
    st.collapse_all();
    let fb1 = match_and_fuse(&mut st, Kind::Sigma);
    st.collapse_all();
    let fb2 = match_and_fuse(&mut st, Kind::Epsilon);
    st.collapse_all();
    let residual = !st.is_empty();
    let h = st.homology;
    LogicalStatus::from_flags(h[SECTOR_EPS], h[SECTOR_SIGMA], residual, fb1 || fb2)
}

/// Everything needed to run one memory instance.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geom: LatticeGeom,
    pub decoder: crate::decoder::DecoderConfig,
    pub noise: NoiseConfig,
    pub seed: u64,
    pub t_max: u64,
    pub verify_every: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeOutcome {
    /// Step count (1-based) at which the verifier first failed, or t_max.
    pub lifetime: u64,
    pub status: LogicalStatus,
    /// True when the run reached t_max without failure.
    pub censored: bool,
    pub fallback: bool,
}

/// Optional per-run recording.
#[derive(Debug, Default)]
pub struct RunLog {
    pub events: Option<Vec<ErrorEvent>>,
    pub trace: Option<String>,
    /// Checks global charge after every step.
    pub check_conservation: bool,
    pub conservation_violations: u64,
}

/// Runs noise and decoder until the verifier reports failure or `t_max` steps pass.
pub fn lifetime_run(cfg: &RunConfig, log: &mut RunLog) -> LifetimeOutcome {
    let mut state = SystemState::new(cfg.geom, cfg.seed);
    let mut dec = Decoder::new(cfg.geom, cfg.decoder.clone());
    if log.trace.is_some() {
        dec.enable_trace();
    }
    let every = cfg.verify_every.max(1);
    let mut fallback = false;
    for t in 0..cfg.t_max {
        let rec = full_step(&mut state, &mut dec, &cfg.noise, t);
        if let Some(ev) = log.events.as_mut() {
            ev.extend(rec.charge_events);
            ev.extend(rec.measurement_events);
        }
        if let Some(tr) = log.trace.as_mut() {
            tr.push_str(&dec.take_trace());
        }
        if log.check_conservation && state.total_charge() != Charge::Vacuum {
            log.conservation_violations += 1;
        }
        if (t + 1) % every != 0 {
            continue;
        }
        let status = snapshot_decode(&state);
        fallback |= status.fallback;
        if !status.success {
            return LifetimeOutcome { lifetime: t + 1, status, censored: false, fallback };
        }
    }
    LifetimeOutcome { lifetime: cfg.t_max, status: LogicalStatus::from_flags([false; 2], [false; 2], false, fallback), censored: true, fallback }
}
