//! Stochastic pair creation on edges and faulty charge measurement on sites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::backend::{Charge, PairKind, SystemState};
use crate::lattice::Site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Charge,
    Measurement,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Charge => "charge",
            EventKind::Measurement => "measurement",
        }
    }
}

/// A space-time error record. Charge errors sit on edge midpoints at integer
/// time, measurement errors on sites at half-integer time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEvent {
    pub kind: EventKind,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub p: f64,
    pub q: f64,
    /// Relative weights of sigma-sigma and eps-eps pair creation.
    pub pair_weights: [f64; 2],
    /// Relative weights of reported charges, indexed by charge; restricted to
    /// the wrong charges when a measurement fails.
    pub wrong_charge_weights: [f64; 3],
}

impl NoiseConfig {
    pub fn new(p: f64, q: f64) -> Self {
        NoiseConfig { p, q, pair_weights: [0.5, 0.5], wrong_charge_weights: [1.0, 1.0, 1.0] }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.pair_weights.iter().any(|&w| w < 0.0) || self.pair_weights.iter().sum::<f64>() <= 0.0 {
            return Err("pair weights must be non-negative with positive sum".into());
        }
        if self.wrong_charge_weights.iter().any(|&w| w < 0.0) {
            return Err("wrong-charge weights must be non-negative".into());
        }
        Ok(())
    }
}

/// Reported charge per site for one measurement round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeGrid {
    pub l: usize,
    pub cells: Vec<Charge>,
}

impl SyndromeGrid {
    pub fn vacuum(l: usize) -> Self {
        SyndromeGrid { l, cells: vec![Charge::Vacuum; l * l] }
    }

    #[inline]
    pub fn get(&self, s: Site) -> Charge {
        self.cells[s.y * self.l + s.x]
    }

    pub fn set(&mut self, s: Site, c: Charge) {
        self.cells[s.y * self.l + s.x] = c;
    }

    pub fn non_trivial(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_trivial()).count()
    }
}

/// Indices in `0..n` each selected independently with probability `p`, in ascending order.
pub fn bernoulli_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Vec<usize> {
    let mut out = Vec::new();
    if p <= 0.0 || n == 0 {
        return out;
    }
    if p >= 1.0 {
        return (0..n).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut i: usize = 0;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n - i) as f64 {
            break;
        }
        i += skip as usize;
        out.push(i);
        i += 1;
        if i >= n {
            break;
        }
    }
    out
}

/// Endpoints of edge `e`: edge `2 * site + 0` points in +x, `2 * site + 1` in +y.
pub fn edge_sites(state: &SystemState, e: usize) -> (Site, Site) {
    let g = state.geom;
    let s = g.site(e / 2);
    let t = if e.is_multiple_of(2) { g.offset(s, 1, 0) } else { g.offset(s, 0, 1) };
    (s, t)
}

/// One round of pair creation. Each of the 2L^2 edges fires with probability p;
/// firing edges are processed in a uniformly random order.
pub fn apply_charge_noise(state: &mut SystemState, cfg: &NoiseConfig, t: u64) -> Vec<ErrorEvent> {
    let n_edges = 2 * state.geom.sites();
    let mut edges = bernoulli_indices(state.rng(), n_edges, cfg.p);
    if edges.is_empty() {
        return Vec::new();
    }
    edges.shuffle(state.rng());
    let w_sigma = cfg.pair_weights[0] / (cfg.pair_weights[0] + cfg.pair_weights[1]);
    let mut events = Vec::with_capacity(edges.len());
    for e in edges {
        let kind = if state.rng().gen::<f64>() < w_sigma { PairKind::SigmaSigma } else { PairKind::EpsEps };
        let (a, b) = edge_sites(state, e);
        state.create_pair(kind, a, b);
        let (mx, my) = if e % 2 == 0 { (a.x as f64 + 0.5, a.y as f64) } else { (a.x as f64, a.y as f64 + 0.5) };
        events.push(ErrorEvent { kind: EventKind::Charge, x: mx, y: my, t: t as f64 });
    }
    events
}

fn wrong_charge<R: Rng + ?Sized>(rng: &mut R, truth: Charge, w: &[f64; 3]) -> Charge {
    let others: Vec<Charge> = Charge::ALL.iter().copied().filter(|&c| c != truth).collect();
    let total: f64 = others.iter().map(|c| w[c.index()]).sum();
    if total <= 0.0 {
        return others[rng.gen_range(0..others.len())];
    }
    let mut u = rng.gen::<f64>() * total;
    for &c in &others {
        u -= w[c.index()];
        if u < 0.0 {
            return c;
        }
    }
    *others.last().expect("non-empty")
}

/// Measures every site of a collapsed state. With probability q a site reports
/// a wrong charge.
pub fn measure_all_sites(state: &mut SystemState, cfg: &NoiseConfig, t: u64) -> (SyndromeGrid, Vec<ErrorEvent>) {
    let g = state.geom;
    let mut grid = SyndromeGrid::vacuum(g.l);
    for a in state.anyons() {
        grid.set(a.site, a.kind.charge());
    }
    let flips = bernoulli_indices(state.rng(), g.sites(), cfg.q);
    let mut events = Vec::with_capacity(flips.len());
    for idx in flips {
        let s = g.site(idx);
        let truth = grid.get(s);
        let c = wrong_charge(state.rng(), truth, &cfg.wrong_charge_weights);
        grid.set(s, c);
        events.push(ErrorEvent { kind: EventKind::Measurement, x: s.x as f64, y: s.y as f64, t: t as f64 + 0.5 });
    }
    (grid, events)
}
