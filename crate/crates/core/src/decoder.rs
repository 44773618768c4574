//! Hierarchical cellular-automaton decoder: binned syndrome renormalization,
//! the transition-rule table, the level-k transport operator and the step schedule.

use std::fmt::Write as _;

use crate::backend::{AnyonId, Charge, SystemState};
use crate::lattice::{region_of, LatticeGeom, RegionChain, RegionClass, Site};
use crate::noise::{apply_charge_noise, measure_all_sites, ErrorEvent, NoiseConfig, SyndromeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    pub q: usize,
    pub b: usize,
    pub n_max: usize,
    pub f_c: f64,
    pub f_n: f64,
}

impl DecoderConfig {
    pub fn new(q: usize, n_max: usize, b: usize, f_c: f64, f_n: f64) -> Self {
        DecoderConfig { q, b, n_max, f_c, f_n }
    }

    pub fn u(&self) -> u64 {
        (self.b * self.b) as u64
    }

    /// Smallest count satisfying `count >= f * b` (and at least 1).
    pub fn threshold(f: f64, b: usize) -> u32 {
        let exact = f * b as f64;
        let k = (exact - 1e-9).ceil();
        k.max(1.0) as u32
    }

    pub fn c_threshold(&self) -> u32 {
        Self::threshold(self.f_c, self.b)
    }

    pub fn n_threshold(&self) -> u32 {
        Self::threshold(self.f_n, self.b)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.b < 1 {
            return Err("b must be positive".into());
        }
        if !(self.f_c > 0.0 && self.f_c <= 1.0 && self.f_n > 0.0 && self.f_n <= 1.0) {
            return Err("f_c and f_n must lie in (0, 1]".into());
        }
        if self.f_c <= self.f_n {
            return Err(format!("f_c = {} must exceed f_n = {}", self.f_c, self.f_n));
        }
        Ok(())
    }

    /// Working period of level k, U^k.
    pub fn period(&self, k: usize) -> u64 {
        self.u().pow(k as u32)
    }
}

/// Bin accumulator for a single cell and channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Channel {
    counts: [u32; 3],
    last_seen: [u32; 3],
    bins_hit: u32,
    last_bin: u8,
}

impl Channel {
    fn report(&mut self, c: Charge, tick: u32) {
        if !c.is_trivial() {
            self.counts[c.index()] += 1;
            self.last_seen[c.index()] = tick;
        }
    }

    /// Closes the current bin; returns the bin's charge.
    fn close_bin(&mut self, thr: u32) -> Charge {
        let total = self.counts[1] + self.counts[2];
        let out = if total >= thr {
            let (e, s) = (self.counts[1], self.counts[2]);
            if e > s || (e == s && self.last_seen[1] > self.last_seen[2]) {
                Charge::Epsilon
            } else {
                Charge::Sigma
            }
        } else {
            Charge::Vacuum
        };
        if !out.is_trivial() {
            self.bins_hit += 1;
            self.last_bin = out as u8;
        }
        self.counts = [0; 3];
        self.last_seen = [0; 3];
        out
    }

    fn publish(&mut self, thr: u32) -> Charge {
        let out = if self.bins_hit >= thr { Charge::from_index(self.last_bin as usize).expect("charge") } else { Charge::Vacuum };
        self.bins_hit = 0;
        self.last_bin = 0;
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Level {
    cells: usize,
    c: Vec<Channel>,
    n: Vec<Channel>,
    s_c: Vec<Charge>,
    s_n: Vec<Charge>,
    tick: u32,
    bins_done: u32,
    nontrivial_c_bins: u64,
    max_c_bin_count: u32,
}

/// Per-level, per-colony bins and published syndromes for levels 1..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeHierarchy {
    levels: Vec<Level>,
    b: u32,
    thr_c: u32,
    thr_n: u32,
    q: usize,
}

impl SyndromeHierarchy {
    pub fn new(geom: &LatticeGeom, cfg: &DecoderConfig) -> Self {
        let levels = (1..=cfg.n_max)
            .map(|k| {
                let cells = geom.cells(k);
                let m = cells * cells;
                Level {
                    cells,
                    c: vec![Channel::default(); m],
                    n: vec![Channel::default(); m],
                    s_c: vec![Charge::Vacuum; m],
                    s_n: vec![Charge::Vacuum; m],
                    tick: 0,
                    bins_done: 0,
                    nontrivial_c_bins: 0,
                    max_c_bin_count: 0,
                }
            })
            .collect();
        SyndromeHierarchy { levels, b: cfg.b as u32, thr_c: cfg.c_threshold(), thr_n: cfg.n_threshold(), q: geom.q }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Cells per axis at level k (k >= 1).
    pub fn cells(&self, k: usize) -> usize {
        self.levels[k - 1].cells
    }

    pub fn s_c(&self, k: usize, rho: (usize, usize)) -> Charge {
        let lv = &self.levels[k - 1];
        lv.s_c[rho.1 * lv.cells + rho.0]
    }

    pub fn s_n(&self, k: usize, rho: (usize, usize)) -> Charge {
        let lv = &self.levels[k - 1];
        lv.s_n[rho.1 * lv.cells + rho.0]
    }

    /// Number of level-k centre-channel bins that came out non-trivial so far.
    pub fn nontrivial_c_bins(&self, k: usize) -> u64 {
        self.levels[k - 1].nontrivial_c_bins
    }

    /// Largest non-trivial report count seen in any closed level-k bin.
    pub fn max_c_bin_count(&self, k: usize) -> u32 {
        self.levels[k - 1].max_c_bin_count
    }

    fn feed(&mut self, k: usize, inputs: &[(Charge, Charge)]) -> bool {
        let (b, thr_c, thr_n) = (self.b, self.thr_c, self.thr_n);
        let lv = &mut self.levels[k - 1];
        lv.tick += 1;
        let tick = lv.tick;
        for (i, &(ic, inn)) in inputs.iter().enumerate() {
            lv.c[i].report(ic, tick);
            lv.n[i].report(inn, tick);
        }
        if tick < b {
            return false;
        }
        lv.tick = 0;
        for i in 0..inputs.len() {
            let cnt = lv.c[i].counts[1] + lv.c[i].counts[2];
            lv.max_c_bin_count = lv.max_c_bin_count.max(cnt);
            if !lv.c[i].close_bin(thr_c).is_trivial() {
                lv.nontrivial_c_bins += 1;
            }
            lv.n[i].close_bin(thr_n);
        }
        lv.bins_done += 1;
        if lv.bins_done < b {
            return false;
        }
        lv.bins_done = 0;
        for i in 0..inputs.len() {
            lv.s_c[i] = lv.c[i].publish(thr_c);
            lv.s_n[i] = lv.n[i].publish(thr_n);
        }
        true
    }

    /// Feeds one measurement round. Returns the highest level that published.
    pub fn accumulate(&mut self, geom: &LatticeGeom, s0: &SyndromeGrid) -> usize {
        if self.levels.is_empty() {
            return 0;
        }
        let cells1 = self.levels[0].cells;
        let mut inputs: Vec<(Charge, Charge)> = Vec::with_capacity(cells1 * cells1);
        let side = geom.colony_side(1);
        let off = (side - 1) / 2;
        for ry in 0..cells1 {
            for rx in 0..cells1 {
                let c = s0.get(Site::new(rx * side + off, ry * side + off));
                inputs.push((c, c));
            }
        }
        let mut top = 0;
        if !self.feed(1, &inputs) {
            return top;
        }
        top = 1;
        for k in 2..=self.levels.len() {
            let prev = &self.levels[k - 2];
            let cells = self.levels[k - 1].cells;
            let mid = self.q / 2;
            let mut inp = Vec::with_capacity(cells * cells);
            for ry in 0..cells {
                for rx in 0..cells {
                    let (px, py) = (rx * self.q + mid, ry * self.q + mid);
                    let j = py * prev.cells + px;
                    inp.push((prev.s_c[j], prev.s_n[j]));
                }
            }
            if !self.feed(k, &inp) {
                break;
            }
            top = k;
        }
        top
    }
}

/// Offsets of the eight neighbours, in the index order used by [`select_rule`].
pub const NEIGHBOUR_OFFSETS: [(i64, i64); 8] = [(-1, 1), (0, 1), (1, 1), (-1, 0), (1, 0), (-1, -1), (0, -1), (1, -1)];

fn nb_index(dx: i64, dy: i64) -> usize {
    NEIGHBOUR_OFFSETS.iter().position(|&o| o == (dx, dy)).expect("neighbour offset")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleAction {
    NoOp,
    Move { dir: (i64, i64), charge: Charge, level: usize },
}

enum Clause {
    Nothing(&'static [(i64, i64)]),
    MoveIf(&'static [(i64, i64)], (i64, i64)),
}

const W: (i64, i64) = (-1, 0);
const E: (i64, i64) = (1, 0);
const N: (i64, i64) = (0, 1);
const S: (i64, i64) = (0, -1);

/// Decision list of an inner region and its default move (None for the centre).
fn inner_rules(r: RegionClass) -> (&'static [Clause], Option<(i64, i64)>) {
    use Clause::*;
    use RegionClass::*;
    match r {
        SWQuadrant => (&[Nothing(&[(0, -1), (-1, 0), (-1, -1)]), MoveIf(&[(0, 1), (-1, 1)], N), MoveIf(&[(1, 0), (1, -1)], E)], Some(N)),
        WestCorridor => (&[Nothing(&[(0, -1), (-1, 0), (0, 1), (-1, -1), (-1, 1)])], Some(E)),
        NWQuadrant => (&[Nothing(&[(-1, 0), (0, 1), (-1, 1)]), MoveIf(&[(1, 0), (1, 1)], E), MoveIf(&[(0, -1), (-1, -1)], S)], Some(E)),
        NorthCorridor => (&[Nothing(&[(-1, 0), (0, 1), (1, 0), (-1, 1), (1, 1)])], Some(S)),
        NEQuadrant => (&[Nothing(&[(0, 1), (1, 0), (1, 1)]), MoveIf(&[(0, -1), (1, -1)], S), MoveIf(&[(-1, 0), (-1, 1)], W)], Some(S)),
        EastCorridor => (&[Nothing(&[(0, 1), (1, 0), (0, -1), (1, 1), (1, -1)])], Some(W)),
        SEQuadrant => (&[Nothing(&[(1, 0), (0, -1), (1, -1)]), MoveIf(&[(-1, 0), (-1, -1)], W), MoveIf(&[(0, 1), (1, 1)], N)], Some(W)),
        SouthCorridor => (&[Nothing(&[(1, 0), (0, -1), (-1, 0), (1, -1), (-1, -1)])], Some(N)),
        Centre => (&[], None),
        WestBorder | SouthBorder => unreachable!("borders are not inner regions"),
    }
}

/// Evaluates the transition-rule table: border clauses first, then the inner region.
pub fn select_rule(region: RegionChain, s_c: Charge, nb: &[Charge; 8], level: usize) -> RuleAction {
    if s_c.is_trivial() {
        return RuleAction::NoOp;
    }
    let hit = |o: &(i64, i64)| !nb[nb_index(o.0, o.1)].is_trivial();
    let mv = |dir| RuleAction::Move { dir, charge: s_c, level };
    if region.west && [(-1, 1), (-1, 0), (-1, -1)].iter().any(hit) {
        return mv(W);
    }
    if region.south && [(-1, -1), (0, -1), (1, -1)].iter().any(hit) {
        return mv(S);
    }
    let (clauses, default) = inner_rules(region.inner);
    for c in clauses {
        match c {
            Clause::Nothing(offs) => {
                if offs.iter().any(hit) {
                    return RuleAction::NoOp;
                }
            }
            Clause::MoveIf(offs, dir) => {
                if offs.iter().any(hit) {
                    return mv(*dir);
                }
            }
        }
    }
    match default {
        Some(d) => mv(d),
        None => RuleAction::NoOp,
    }
}

/// Counters for one application of the transport operator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub pairs_created: u32,
    pub fusions: u32,
}

fn find_carrier(state: &SystemState, site: Site, q: Charge) -> Option<AnyonId> {
    state.at(site).iter().copied().filter(|&id| state.charge_of(id) == q).max()
}

/// Transports a charge `q` over `steps` single steps from `from` along `dir`.
/// A missing charge is created as a pair; intermediate occupied sites are fused
/// with the carrier, and a fresh pair is created whenever the fused charge is not q.
pub fn execute_move(state: &mut SystemState, from: Site, dir: (i64, i64), q: Charge, steps: usize) -> MoveStats {
    let mut st = MoveStats::default();
    if state.at(from).len() > 1 {
        state.fuse_site(from);
        st.fusions += 1;
    }
    let mut carrier = match find_carrier(state, from, q) {
        Some(id) => id,
        None => {
            st.pairs_created += 1;
            state.create_pair_at(q, from).1
        }
    };
    let mut cur = from;
    for i in 0..steps {
        cur = state.geom.offset(cur, dir.0, dir.1);
        state.move_anyon(carrier, cur);
        if i + 1 == steps || state.at(cur).len() < 2 {
            continue;
        }
        st.fusions += 1;
        let c = state.fuse_site(cur);
        if c == q {
            carrier = state.at(cur)[0];
        } else {
            st.pairs_created += 1;
            carrier = state.create_pair_at(q, cur).1;
        }
    }
    st
}

fn dir_name(d: (i64, i64)) -> &'static str {
    match d {
        (1, 0) => "E",
        (-1, 0) => "W",
        (0, 1) => "N",
        (0, -1) => "S",
        _ => "?",
    }
}

/// Aggregate counters of a decoder run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecoderStats {
    pub moves: u64,
    pub pairs_created: u64,
}

#[derive(Debug, Clone)]
pub struct Decoder {
    pub cfg: DecoderConfig,
    pub geom: LatticeGeom,
    pub hierarchy: SyndromeHierarchy,
    pub stats: DecoderStats,
    trace: Option<String>,
}

impl Decoder {
    pub fn new(geom: LatticeGeom, cfg: DecoderConfig) -> Self {
        let hierarchy = SyndromeHierarchy::new(&geom, &cfg);
        Decoder { cfg, geom, hierarchy, stats: DecoderStats::default(), trace: None }
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(String::new());
    }

    /// Trace lines `t level rho_x rho_y action charge`, one per move.
    pub fn take_trace(&mut self) -> String {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Centre and neighbour syndromes of a level-k cell.
    fn cell_inputs(&self, k: usize, s0: &SyndromeGrid, rho: (usize, usize), cells: usize) -> (Charge, [Charge; 8]) {
        let wrap = |v: usize, d: i64| (v as i64 + d).rem_euclid(cells as i64) as usize;
        let mut nb = [Charge::Vacuum; 8];
        if k == 0 {
            let s = Site::new(rho.0, rho.1);
            for (i, &(dx, dy)) in NEIGHBOUR_OFFSETS.iter().enumerate() {
                nb[i] = s0.get(Site::new(wrap(s.x, dx), wrap(s.y, dy)));
            }
            (s0.get(s), nb)
        } else {
            for (i, &(dx, dy)) in NEIGHBOUR_OFFSETS.iter().enumerate() {
                nb[i] = self.hierarchy.s_n(k, (wrap(rho.0, dx), wrap(rho.1, dy)));
            }
            (self.hierarchy.s_c(k, rho), nb)
        }
    }

    /// Rule decisions for every level-k cell from one syndrome snapshot, in row-major order.
    pub fn plan_level(&self, k: usize, s0: &SyndromeGrid) -> Vec<((usize, usize), RuleAction)> {
        let cells = self.geom.cells(k);
        let mut out = Vec::new();
        for ry in 0..cells {
            for rx in 0..cells {
                let centre = if k == 0 { s0.get(Site::new(rx, ry)) } else { self.hierarchy.s_c(k, (rx, ry)) };
                if centre.is_trivial() {
                    continue;
                }
                let (sc, nb) = self.cell_inputs(k, s0, (rx, ry), cells);
                let a = select_rule(region_of((rx, ry), self.geom.q), sc, &nb, k);
                if a != RuleAction::NoOp {
                    out.push(((rx, ry), a));
                }
            }
        }
        out
    }

    /// Everything after measurement in step t: hierarchy update, rule rounds for
    /// every level whose period ends, end-of-step collapse.
    pub fn step(&mut self, state: &mut SystemState, s0: &SyndromeGrid, t: u64) {
        self.hierarchy.accumulate(&self.geom, s0);
        let levels = self.cfg.n_max.min(self.geom.n_levels);
        for k in 0..levels {
            if !(t + 1).is_multiple_of(self.cfg.period(k)) {
                continue;
            }
            let plan = self.plan_level(k, s0);
            let side = self.geom.colony_side(k);
            for (rho, action) in plan {
                if let RuleAction::Move { dir, charge, .. } = action {
                    let from = self.geom.centre_site(crate::lattice::ColonyAddress { level: k, rho });
                    let ms = execute_move(state, from, dir, charge, side);
                    self.stats.moves += 1;
                    self.stats.pairs_created += u64::from(ms.pairs_created);
                    if let Some(tr) = self.trace.as_mut() {
                        let _ = writeln!(tr, "{t} {k} {} {} {} {}", rho.0, rho.1, dir_name(dir), charge.name());
                    }
                }
            }
        }
        state.collapse_all();
    }
}

/// Output of one full time step.
#[derive(Debug, Clone, Default)]
pub struct StepRecord {
    pub charge_events: Vec<ErrorEvent>,
    pub measurement_events: Vec<ErrorEvent>,
}

/// One complete time step: noise, collapse, measurement, decoder.
pub fn full_step(state: &mut SystemState, dec: &mut Decoder, noise: &NoiseConfig, t: u64) -> StepRecord {
    let charge_events = apply_charge_noise(state, noise, t);
    if !charge_events.is_empty() {
        state.collapse_all();
    }
    let (s0, measurement_events) = measure_all_sites(state, noise, t);
    dec.step(state, &s0, t);
    StepRecord { charge_events, measurement_events }
}
