//! Hierarchical space-time error taxonomy on recorded error histories.
//!
//! Actual errors are extracted level by level. At each level the remaining
//! events are split into linkage components at that level's separation scale;
//! a component is an actual error when it passes the box, containment and
//! non-separation conditions. Candidate containment is decided exactly through
//! "base" candidates: every candidate contains one built from two smaller base
//! candidates, each padded by at most one linking event.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rand::Rng;
use thiserror::Error;

pub use crate::noise::{ErrorEvent, EventKind};

/// Upper limit on base candidates kept per level and component.
pub const BASE_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("event log line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierParams {
    pub a: u64,
    pub b: u64,
    pub q: u64,
    pub u: u64,
    pub n_max: usize,
}

impl ClassifierParams {
    pub fn new(a: u64, b: u64, q: u64, u: u64, n_max: usize) -> Self {
        ClassifierParams { a, b, q, u, n_max }
    }

    /// Whether Q >= 4(a+2) and U >= 4(b+2).
    pub fn preconditions_hold(&self) -> bool {
        self.q >= 4 * (self.a + 2) && self.u >= 4 * (self.b + 2)
    }

    fn qn(&self, n: usize) -> f64 {
        (self.q as f64).powi(n as i32)
    }

    fn un(&self, n: usize) -> f64 {
        (self.u as f64).powi(n as i32)
    }

    /// Linkage scale (aQ^n, aQ^n, bU^n).
    pub fn link_scale(&self, n: usize) -> [f64; 3] {
        let s = self.a as f64 * self.qn(n);
        [s, s, self.b as f64 * self.un(n)]
    }

    /// Scale of condition (iii) at level n >= 1.
    pub fn spread_scale(&self, n: usize) -> [f64; 3] {
        let s = 4.0 * (self.a + 2) as f64 * self.qn(n - 1);
        [s, s, 4.0 * (self.b + 2) as f64 * self.un(n - 1)]
    }
}

#[inline]
fn pos(e: &ErrorEvent) -> [f64; 3] {
    [e.x, e.y, e.t]
}

#[inline]
fn close(p: [f64; 3], q: [f64; 3], s: [f64; 3]) -> bool {
    (p[0] - q[0]).abs() < s[0] && (p[1] - q[1]).abs() < s[1] && (p[2] - q[2]).abs() < s[2]
}

/// True iff some box `[x,x+l) x [y,y+m) x [t,t+n)` holds a point of each set.
pub fn linked(a: &[[f64; 3]], b: &[[f64; 3]], l: f64, m: f64, n: f64) -> bool {
    a.iter().any(|&p| b.iter().any(|&q| close(p, q, [l, m, n])))
}

pub fn separated(a: &[[f64; 3]], b: &[[f64; 3]], l: f64, m: f64, n: f64) -> bool {
    !linked(a, b, l, m, n)
}

fn extent(ev: &[ErrorEvent], idx: impl IntoIterator<Item = usize>) -> [f64; 3] {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for i in idx {
        let p = pos(&ev[i]);
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]
}

/// Axis-aligned bounding box as (min corner, max corner).
pub fn bounding_box(ev: &[ErrorEvent], idx: &[usize]) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in idx {
        let p = pos(&ev[i]);
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

struct Ctx<'a> {
    ev: &'a [ErrorEvent],
    p: ClassifierParams,
    truncated: bool,
}

impl Ctx<'_> {
    /// Whether the set is small enough for a level-k candidate.
    fn fits(&self, k: usize, set: &[usize]) -> bool {
        let e = extent(self.ev, set.iter().copied());
        if k == 0 {
            let kind = self.ev[set[0]].kind;
            set.iter().all(|&i| self.ev[i].kind == kind) && e[0] <= 1.0 && e[1] <= 1.0 && e[2] == 0.0
        } else {
            e[0] < self.p.qn(k) && e[1] < self.p.qn(k) && e[2] < self.p.un(k)
        }
    }

    fn sets_linked(&self, x: &[usize], y: &[usize], s: [f64; 3]) -> bool {
        x.iter().any(|&i| y.iter().any(|&j| close(pos(&self.ev[i]), pos(&self.ev[j]), s)))
    }

    fn padded(&mut self, k: usize, base: &[Vec<usize>], pool: &[usize]) -> Vec<Vec<usize>> {
        let mut out = BTreeSet::new();
        for b in base {
            out.insert(b.clone());
            for &u in pool {
                if b.binary_search(&u).is_ok() {
                    continue;
                }
                let mut c = b.clone();
                let at = c.binary_search(&u).unwrap_err();
                c.insert(at, u);
                if self.fits(k, &c) {
                    out.insert(c);
                }
            }
            if out.len() > BASE_CAP {
                self.truncated = true;
                break;
            }
        }
        out.into_iter().collect()
    }

    /// Base level-k candidates inside `pool` (sorted index list).
    fn base(&mut self, k: usize, pool: &[usize]) -> Vec<Vec<usize>> {
        if k == 0 {
            return pool.iter().map(|&i| vec![i]).collect();
        }
        let lower = self.base(k - 1, pool);
        let ext = self.padded(k - 1, &lower, pool);
        let s = self.p.link_scale(k - 1);
        let mut out = BTreeSet::new();
        'outer: for (ix, x) in ext.iter().enumerate() {
            for y in &ext[ix + 1..] {
                if x.iter().any(|i| y.binary_search(i).is_ok()) {
                    continue;
                }
                if !self.sets_linked(x, y, s) {
                    continue;
                }
                let mut u: Vec<usize> = x.iter().chain(y.iter()).copied().collect();
                u.sort_unstable();
                if self.fits(k, &u) {
                    out.insert(u);
                    if out.len() >= BASE_CAP {
                        self.truncated = true;
                        break 'outer;
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

fn components(ev: &[ErrorEvent], idx: &[usize], s: [f64; 3]) -> Vec<Vec<usize>> {
    let n = idx.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ev[idx[i]].t.total_cmp(&ev[idx[j]].t));
    for (oi, &i) in order.iter().enumerate() {
        let pi = pos(&ev[idx[i]]);
        for &j in &order[oi + 1..] {
            let pj = pos(&ev[idx[j]]);
            if pj[2] - pi[2] >= s[2] {
                break;
            }
            if close(pi, pj, s) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &e) in idx.iter().enumerate().take(n) {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(e);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().map(|mut g| {
        g.sort_unstable();
        g
    }).collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActualError {
    pub level: usize,
    /// Indices into the input history, ascending.
    pub events: Vec<usize>,
    pub bbox: ([f64; 3], [f64; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelAssignment {
    pub errors: Vec<ActualError>,
    /// Level of the actual error containing each event; None when unclassified.
    pub level_of: Vec<Option<usize>>,
    /// Events not assigned by the level cutoff.
    pub unclassified: Vec<usize>,
    /// Set when base-candidate enumeration hit its cap somewhere.
    pub truncated: bool,
    pub preconditions_ok: bool,
}

impl LevelAssignment {
    pub fn errors_at(&self, level: usize) -> impl Iterator<Item = &ActualError> {
        self.errors.iter().filter(move |e| e.level == level)
    }
}

/// Classifies a history. With `strict`, violated parameter preconditions are an error;
/// otherwise they are reported in the result.
pub fn classify(history: &[ErrorEvent], p: ClassifierParams, strict: bool) -> Result<LevelAssignment, ClassifyError> {
    let ok = p.preconditions_hold();
    if strict && !ok {
        return Err(ClassifyError::Precondition(format!(
            "need Q >= 4(a+2) and U >= 4(b+2), got a={} b={} Q={} U={}",
            p.a, p.b, p.q, p.u
        )));
    }
    if p.q < 2 || p.u < 2 || p.a == 0 || p.b == 0 {
        return Err(ClassifyError::Precondition("a, b must be positive and Q, U at least 2".into()));
    }
    let mut ctx = Ctx { ev: history, p, truncated: false };
    let mut level_of = vec![None; history.len()];
    let mut errors = Vec::new();
    let mut remaining: Vec<usize> = (0..history.len()).collect();

    for comp in components(history, &remaining, p.link_scale(0)) {
        if ctx.fits(0, &comp) {
            for &i in &comp {
                level_of[i] = Some(0);
            }
            let bbox = bounding_box(history, &comp);
            errors.push(ActualError { level: 0, events: comp, bbox });
        }
    }
    remaining.retain(|&i| level_of[i].is_none());

    for n in 1..=p.n_max {
        if remaining.is_empty() {
            break;
        }
        for comp in components(history, &remaining, p.link_scale(n)) {
            if !ctx.fits(n, &comp) {
                continue;
            }
            let base = ctx.base(n, &comp);
            if base.is_empty() {
                continue;
            }
            let s3 = p.spread_scale(n);
            let spread = base.iter().enumerate().any(|(i, x)| base[i + 1..].iter().any(|y| !ctx.sets_linked(x, y, s3)));
            if spread {
                continue;
            }
            for &i in &comp {
                level_of[i] = Some(n);
            }
            let bbox = bounding_box(history, &comp);
            errors.push(ActualError { level: n, events: comp, bbox });
        }
        remaining.retain(|&i| level_of[i].is_none());
    }
    errors.sort_by(|x, y| (x.level, &x.events).cmp(&(y.level, &y.events)));
    Ok(LevelAssignment { errors, level_of, unclassified: remaining, truncated: ctx.truncated, preconditions_ok: ok })
}

/// Checks that actual errors of equal level are pairwise separated at their level's scale.
pub fn check_separation(history: &[ErrorEvent], p: ClassifierParams, a: &LevelAssignment) -> Result<(), String> {
    let pts = |e: &ActualError| e.events.iter().map(|&i| pos(&history[i])).collect::<Vec<_>>();
    for (i, x) in a.errors.iter().enumerate() {
        for y in &a.errors[i + 1..] {
            if x.level != y.level {
                continue;
            }
            let s = p.link_scale(x.level);
            if linked(&pts(x), &pts(y), s[0], s[1], s[2]) {
                return Err(format!("level-{} errors {:?} and {:?} are linked", x.level, x.events, y.events));
            }
        }
    }
    Ok(())
}

/// Marks every event that belongs to at least one level-n candidate error.
pub fn candidate_members(history: &[ErrorEvent], p: ClassifierParams, n: usize) -> Vec<bool> {
    if n == 0 {
        return vec![true; history.len()];
    }
    let lower = ClassifierParams { n_max: n - 1, ..p };
    let asg = match classify(history, lower, false) {
        Ok(a) => a,
        Err(_) => return vec![false; history.len()],
    };
    let pool: Vec<usize> = asg.unclassified.clone();
    let mut ctx = Ctx { ev: history, p, truncated: false };
    let mut member = vec![false; history.len()];
    // a base candidate lies inside one linkage component at scale n-1
    for comp in components(history, &pool, p.link_scale(n - 1)) {
        for b in ctx.base(n, &comp) {
            for &i in &b {
                member[i] = true;
            }
            for &e in &pool {
                if member[e] {
                    continue;
                }
                let mut c = b.clone();
                c.push(e);
                if ctx.fits(n, &c) {
                    member[e] = true;
                }
            }
        }
    }
    member
}

/// Rate bound for level-n candidates: 4(p+q) at level 0, (4 Q^4 U^2 (p+q))^(2^n) above.
pub fn epsilon_bound(n: usize, p: f64, q: f64, qq: u64, u: u64) -> f64 {
    let s = p + q;
    if s == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return (4.0 * s).min(f64::MAX);
    }
    let base = 4.0 * (qq as f64).powi(4) * (u as f64).powi(2) * s;
    base.powf(2f64.powi(n as i32))
}

/// Denominator D of the convergence condition p + q < 1/D, D = 4 Q^4 U^2.
pub fn convergence_denominator(q: u64, u: u64) -> u128 {
    4 * (q as u128).pow(4) * (u as u128).pow(2)
}

pub fn convergent(p: f64, q: f64, qq: u64, u: u64) -> bool {
    (p + q) * (convergence_denominator(qq, u) as f64) < 1.0
}

/// Reads an event log with header `kind,x,y,t`.
pub fn read_events<R: Read>(r: R) -> Result<Vec<ErrorEvent>, ClassifyError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (li, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = li + 2;
        if rec.len() != 4 {
            return Err(ClassifyError::Parse { line, msg: format!("expected 4 fields, got {}", rec.len()) });
        }
        let kind = match &rec[0] {
            "charge" => EventKind::Charge,
            "measurement" => EventKind::Measurement,
            k => return Err(ClassifyError::Parse { line, msg: format!("unknown kind {k:?}") }),
        };
        let num = |i: usize| -> Result<f64, ClassifyError> {
            rec[i].parse::<f64>().map_err(|e| ClassifyError::Parse { line, msg: format!("field {i}: {e}") })
        };
        out.push(ErrorEvent { kind, x: num(1)?, y: num(2)?, t: num(3)? });
    }
    Ok(out)
}

pub fn write_events<W: Write>(w: W, events: &[ErrorEvent]) -> Result<(), ClassifyError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["kind", "x", "y", "t"])?;
    for e in events {
        wr.write_record([e.kind.as_str().to_string(), e.x.to_string(), e.y.to_string(), e.t.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Per-event level table: `index,kind,x,y,t,level`.
pub fn write_levels<W: Write>(w: W, events: &[ErrorEvent], a: &LevelAssignment) -> Result<(), ClassifyError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["index", "kind", "x", "y", "t", "level"])?;
    for (i, e) in events.iter().enumerate() {
        let lvl = a.level_of[i].map_or_else(|| "unclassified".to_string(), |l| l.to_string());
        wr.write_record([i.to_string(), e.kind.as_str().into(), e.x.to_string(), e.y.to_string(), e.t.to_string(), lvl])?;
    }
    wr.flush()?;
    Ok(())
}

/// Independent noise history on an `l x l` plane over `steps` rounds, without
/// running any dynamics: charge events on edge midpoints, measurement events on sites.
pub fn sample_history<R: Rng + ?Sized>(rng: &mut R, l: usize, steps: usize, p: f64, q: f64) -> Vec<ErrorEvent> {
    let mut out = Vec::new();
    for t in 0..steps {
        for y in 0..l {
            for x in 0..l {
                if rng.gen::<f64>() < p {
                    out.push(ErrorEvent { kind: EventKind::Charge, x: x as f64 + 0.5, y: y as f64, t: t as f64 });
                }
                if rng.gen::<f64>() < p {
                    out.push(ErrorEvent { kind: EventKind::Charge, x: x as f64, y: y as f64 + 0.5, t: t as f64 });
                }
                if rng.gen::<f64>() < q {
                    out.push(ErrorEvent { kind: EventKind::Measurement, x: x as f64, y: y as f64, t: t as f64 + 0.5 });
                }
            }
        }
    }
    out
}

/// A planted hierarchy: an error cluster built to be an actual error of `level`.
#[derive(Debug, Clone)]
pub struct PlantedCluster {
    pub level: usize,
    pub events: Vec<ErrorEvent>,
}

fn planted_level1<R: Rng + ?Sized>(rng: &mut R) -> Vec<ErrorEvent> {
    let kind = if rng.gen::<bool>() { EventKind::Charge } else { EventKind::Measurement };
    let e0 = ErrorEvent { kind, x: 0.0, y: 0.0, t: 0.0 };
    match rng.gen_range(0..3) {
        // same place, later time
        0 => vec![e0, ErrorEvent { t: rng.gen_range(1..7) as f64, ..e0 }],
        // mixed kinds on one site, same round
        1 => {
            let other = if kind == EventKind::Charge { EventKind::Measurement } else { EventKind::Charge };
            vec![e0, ErrorEvent { kind: other, ..e0 }]
        }
        // same kind, too far apart for one unit box
        _ => vec![e0, ErrorEvent { x: 1.5, y: rng.gen_range(0..2) as f64 * 0.5, ..e0 }],
    }
}

/// Builds a cluster of the given level: two clusters one level down, shifted
/// along x so that they link at the lower scale but overflow its box.
pub fn planted_cluster<R: Rng + ?Sized>(rng: &mut R, level: usize, a: u64, q: u64) -> PlantedCluster {
    let events = match level {
        0 => {
            let kind = if rng.gen::<bool>() { EventKind::Charge } else { EventKind::Measurement };
            vec![ErrorEvent { kind, x: 0.0, y: 0.0, t: 0.0 }]
        }
        1 => planted_level1(rng),
        k => {
            let lower = planted_cluster(rng, k - 1, a, q).events;
            let w = extent(&lower, 0..lower.len())[0];
            let qk1 = (q as f64).powi(k as i32 - 1);
            let qk2 = (q as f64).powi(k as i32 - 2);
            let d = qk1.max((w + a as f64 * qk2).ceil());
            debug_assert!(d < a as f64 * qk1 && d + w < q as f64 * qk1, "planted geometry infeasible at level {k}");
            let mut ev = lower.clone();
            ev.extend(lower.iter().map(|e| ErrorEvent { x: e.x + d, ..*e }));
            ev
        }
    };
    PlantedCluster { level, events }
}

/// A history made of isolated planted clusters with levels drawn from `0..=max_level`.
/// Returns the events and, per cluster, its level and event index range.
pub fn planted_history<R: Rng + ?Sized>(
    rng: &mut R,
    clusters: usize,
    max_level: usize,
    a: u64,
    q: u64,
) -> (Vec<ErrorEvent>, Vec<(usize, std::ops::Range<usize>)>) {
    let spacing = 4.0 * a as f64 * (q as f64).powi(max_level as i32 + 1);
    let mut events = Vec::new();
    let mut planted = Vec::new();
    for c in 0..clusters {
        let level = rng.gen_range(0..=max_level);
        let cl = planted_cluster(rng, level, a, q);
        let start = events.len();
        let (ox, oy, ot) = (c as f64 * spacing, rng.gen_range(0..4) as f64, rng.gen_range(0..10) as f64);
        events.extend(cl.events.iter().map(|e| ErrorEvent { x: e.x + ox, y: e.y + oy, t: e.t + ot, ..*e }));
        planted.push((level, start..events.len()));
    }
    (events, planted)
}
