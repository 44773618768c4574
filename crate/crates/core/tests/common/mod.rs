#![allow(dead_code)]

use num_complex::Complex64;

/// Dense state vector on m Majorana modes (m/2 qubits), Jordan-Wigner encoded:
/// g_{2k} = Z..Z X_k, g_{2k+1} = Z..Z Y_k.
#[derive(Clone, Debug)]
pub struct Fock {
    pub m: usize,
    pub psi: Vec<Complex64>,
}

impl Fock {
    /// Modes (2k, 2k+1) paired with i g g = +1, which is |1..1>.
    pub fn paired(m: usize) -> Self {
        assert!(m.is_multiple_of(2) && m <= 16);
        let dim = 1usize << (m / 2);
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        psi[dim - 1] = Complex64::new(1.0, 0.0);
        Fock { m, psi }
    }

    pub fn gamma_vec(&self, j: usize, v: &[Complex64]) -> Vec<Complex64> {
        let k = j / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (idx, &amp) in v.iter().enumerate() {
            let below = (idx & ((1 << k) - 1)).count_ones();
            let sign = if below % 2 == 1 { -1.0 } else { 1.0 };
            let bit = (idx >> k) & 1;
            let flipped = idx ^ (1 << k);
            let f = if j.is_multiple_of(2) {
                Complex64::new(1.0, 0.0)
            } else if bit == 0 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, -1.0)
            };
            out[flipped] += amp * f * sign;
        }
        out
    }

    /// i g_a g_b applied to v.
    fn pair_op(&self, a: usize, b: usize, v: &[Complex64]) -> Vec<Complex64> {
        let gb = self.gamma_vec(b, v);
        self.gamma_vec(a, &gb).into_iter().map(|z| z * Complex64::new(0.0, 1.0)).collect()
    }

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    /// <i g_a g_b>.
    pub fn cov(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        Self::inner(&self.psi, &self.pair_op(a, b, &self.psi)).re
    }

    pub fn prob_plus(&self, a: usize, b: usize) -> f64 {
        (1.0 + self.cov(a, b)) / 2.0
    }

    pub fn exchange(&mut self, i: usize, j: usize, s: i8) {
        let gj = self.gamma_vec(j, &self.psi);
        let gij = self.gamma_vec(i, &gj);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sf = f64::from(s);
        self.psi = self.psi.iter().zip(&gij).map(|(p, q)| (p + q * sf) * r).collect();
    }

    pub fn apply_gamma(&mut self, a: usize) {
        self.psi = self.gamma_vec(a, &self.psi);
    }

    /// Projects onto i g_a g_b = s and renormalizes. Returns the prior probability.
    pub fn project(&mut self, a: usize, b: usize, s: i8) -> f64 {
        let op = self.pair_op(a, b, &self.psi);
        let sf = f64::from(s);
        let v: Vec<Complex64> = self.psi.iter().zip(&op).map(|(p, q)| (p + q * sf) * 0.5).collect();
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!(n2 > 1e-12);
        let n = n2.sqrt();
        self.psi = v.into_iter().map(|z| z / n).collect();
        n2
    }
}

/// Brute-force minimum perfect-matching weight over all pairings.
pub fn enumerate_min_matching(d: &[Vec<usize>]) -> usize {
    fn rec(d: &[Vec<usize>], left: &mut Vec<usize>) -> usize {
        if left.is_empty() {
            return 0;
        }
        let i = left.remove(0);
        let mut best = usize::MAX;
        for k in 0..left.len() {
            let j = left.remove(k);
            best = best.min(d[i][j] + rec(d, left));
            left.insert(k, j);
        }
        left.insert(0, i);
        best
    }
    let mut all: Vec<usize> = (0..d.len()).collect();
    rec(d, &mut all)
}

/// Total-variation distance between two distributions on the same finite support.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

use anyon_ca::backend::{AnyonId, BranchPolicy, Charge, PairKind, SystemState};
use anyon_ca::lattice::{LatticeGeom, Site};
use rand::Rng;

/// One step of a planar sigma-only scenario. Anyons are numbered in creation
/// order, pair k owning anyons 2k and 2k+1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    /// Pair created at `r`, second member moved to `r2` (+x or +y neighbour).
    Create(Site, Site),
    Move(usize, Site),
    /// Moves the first anyon onto the (adjacent) site of the second and fuses there.
    Fuse(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub l: usize,
    pub ops: Vec<Op>,
    pub fusions: usize,
}

impl Scenario {
    pub fn modes(&self) -> usize {
        2 * self.ops.iter().filter(|o| matches!(o, Op::Create(..))).count()
    }
}

/// Random sigma scenario on an L x L grid that never wraps, with `pairs`
/// pairs, `fusions` fusions and no two anyons ever sharing a site outside a fusion.
pub fn random_scenario<R: Rng>(rng: &mut R, l: usize, pairs: usize, fusions: usize) -> Scenario {
    'retry: loop {
        let mut ops = Vec::new();
        let mut pos: Vec<Site> = Vec::new();
        let mut free: Vec<bool> = Vec::new();
        let mut blocked: Vec<Site> = Vec::new();
        let mut done = 0;
        let occupied = |pos: &[Site], blocked: &[Site], s: Site| pos.contains(&s) || blocked.contains(&s);
        for _ in 0..4000 {
            if done == fusions && pos.len() == 2 * pairs {
                return Scenario { l, ops, fusions };
            }
            let choice = rng.gen_range(0..10);
            if choice == 0 && pos.len() < 2 * pairs {
                let r = Site::new(rng.gen_range(0..l - 1), rng.gen_range(0..l - 1));
                let r2 = if rng.gen_bool(0.5) { Site::new(r.x + 1, r.y) } else { Site::new(r.x, r.y + 1) };
                if occupied(&pos, &blocked, r) || occupied(&pos, &blocked, r2) {
                    continue;
                }
                ops.push(Op::Create(r, r2));
                pos.extend([r, r2]);
                free.extend([true, true]);
                continue;
            }
            let movers: Vec<usize> = (0..pos.len()).filter(|&i| free[i]).collect();
            if movers.is_empty() {
                continue;
            }
            if choice == 1 && done < fusions && pos.len() >= 4 {
                let mut cands = Vec::new();
                for &i in &movers {
                    for &j in &movers {
                        if i != j && pos[i].x.abs_diff(pos[j].x) + pos[i].y.abs_diff(pos[j].y) == 1 {
                            cands.push((i, j));
                        }
                    }
                }
                if let Some(&(i, j)) = cands.get(rng.gen_range(0..cands.len().max(1))) {
                    ops.push(Op::Fuse(i, j));
                    blocked.push(pos[j]);
                    pos[i] = Site::new(usize::MAX, usize::MAX);
                    pos[j] = Site::new(usize::MAX, usize::MAX - 1);
                    free[i] = false;
                    free[j] = false;
                    done += 1;
                }
                continue;
            }
            let i = movers[rng.gen_range(0..movers.len())];
            let (dx, dy) = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)][rng.gen_range(0..4)];
            let (nx, ny) = (pos[i].x as i64 + dx, pos[i].y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= l as i64 || ny >= l as i64 {
                continue;
            }
            let t = Site::new(nx as usize, ny as usize);
            if occupied(&pos, &blocked, t) {
                continue;
            }
            ops.push(Op::Move(i, t));
            pos[i] = t;
        }
        continue 'retry;
    }
}

/// Replays a scenario on the backend. Returns the fusion outcomes (true = eps),
/// the backend's vacuum probability just before each fusion and the branch log.
pub fn run_backend(sc: &Scenario, seed: u64, policy: BranchPolicy) -> (Vec<bool>, Vec<f64>, Vec<bool>) {
    let geom = LatticeGeom::new(sc.l, 1).expect("odd side");
    let mut st = SystemState::new(geom, seed);
    st.set_branch_policy(policy);
    let mut ids: Vec<AnyonId> = Vec::new();
    let mut out = Vec::new();
    let mut probs = Vec::new();
    for &op in &sc.ops {
        match op {
            Op::Create(r, r2) => {
                let (a, b) = st.create_pair(PairKind::SigmaSigma, r, r2);
                ids.extend([a, b]);
            }
            Op::Move(i, t) => st.move_anyon(ids[i], t),
            Op::Fuse(i, j) => {
                let target = st.anyon(ids[j]).expect("live").site;
                st.move_anyon(ids[i], target);
                let (mi, mj) = (st.anyon(ids[i]).unwrap().mode, st.anyon(ids[j]).unwrap().mode);
                let (lo, hi) = if ids[i] < ids[j] { (mi, mj) } else { (mj, mi) };
                probs.push(st.majorana().prob_plus(lo, hi));
                out.push(st.fuse_site(target) == Charge::Epsilon);
            }
        }
    }
    (out, probs, st.branch_log().to_vec())
}

/// Exact outcome distribution of a scenario from the position-ordered braid
/// representation on a dense Fock space. Index bit k is fusion k (1 = eps).
pub fn oracle_distribution(sc: &Scenario) -> Vec<f64> {
    let mut dist = vec![0.0; 1 << sc.fusions];
    let mut stack = vec![(OracleRun::new(sc.modes()), 0usize, 0usize, 0usize, 1.0f64)];
    while let Some((mut run, mut op_i, fused, bits, w)) = stack.pop() {
        let mut pending = None;
        while op_i < sc.ops.len() {
            let op = sc.ops[op_i];
            op_i += 1;
            match op {
                Op::Create(r, r2) => run.create(r, r2),
                Op::Move(i, t) => run.step(i, t, None),
                Op::Fuse(i, j) => {
                    pending = Some(run.approach(i, j));
                    break;
                }
            }
        }
        let Some((a, b)) = pending else {
            dist[bits] += w;
            continue;
        };
        let p = run.fock.prob_plus(a, b);
        for (s, pr) in [(1i8, p), (-1i8, 1.0 - p)] {
            if pr < 1e-12 {
                continue;
            }
            let mut next = run.clone();
            next.fock.project(a, b, s);
            let nb = if s == -1 { bits | 1 << fused } else { bits };
            stack.push((next, op_i, fused + 1, nb, w * pr));
        }
    }
    dist
}

#[derive(Clone)]
struct OracleRun {
    fock: Fock,
    /// Anyon index per slot, in projection order.
    order: Vec<usize>,
    /// Fock mode per slot; modes stay with positions.
    slot_mode: Vec<usize>,
    pos: Vec<Site>,
    next_mode: usize,
}

impl OracleRun {
    fn new(m: usize) -> Self {
        OracleRun { fock: Fock::paired(m.max(2)), order: Vec::new(), slot_mode: Vec::new(), pos: Vec::new(), next_mode: 0 }
    }

    fn key(s: Site) -> (usize, usize) {
        (s.x, s.y)
    }

    fn slot_of(&self, a: usize) -> usize {
        self.order.iter().position(|&x| x == a).expect("in order")
    }

    fn swap(&mut self, p: usize) {
        let (u, v) = (self.order[p], self.order[p + 1]);
        let s: i8 = if self.pos[u].y > self.pos[v].y { 1 } else { -1 };
        assert_ne!(self.pos[u].y, self.pos[v].y, "degenerate crossing");
        self.fock.exchange(self.slot_mode[p], self.slot_mode[p + 1], s);
        self.order.swap(p, p + 1);
    }

    fn create(&mut self, r: Site, r2: Site) {
        let a = self.pos.len();
        self.pos.extend([r, r]);
        let p = self.order.iter().position(|&x| Self::key(self.pos[x]) > Self::key(r)).unwrap_or(self.order.len());
        self.order.splice(p..p, [a, a + 1]);
        self.slot_mode.splice(p..p, [self.next_mode, self.next_mode + 1]);
        self.next_mode += 2;
        self.step(a + 1, r2, None);
    }

    /// Moves anyon `a` to `t`, passing every anyon strictly between in projection
    /// order. `stop` is a site whose occupants are never passed.
    fn step(&mut self, a: usize, t: Site, stop: Option<Site>) {
        let old = self.pos[a];
        let mut p = self.slot_of(a);
        let kt = Self::key(t);
        if kt > Self::key(old) {
            while p + 1 < self.order.len() {
                let s = self.pos[self.order[p + 1]];
                if Some(s) == stop || s == old || Self::key(s) > kt {
                    break;
                }
                self.swap(p);
                p += 1;
            }
        } else {
            while p > 0 {
                let s = self.pos[self.order[p - 1]];
                if Some(s) == stop || s == old || Self::key(s) < kt {
                    break;
                }
                self.swap(p - 1);
                p -= 1;
            }
        }
        self.pos[a] = t;
    }

    /// Brings anyon i next to anyon j and returns the (left, right) slot modes.
    fn approach(&mut self, i: usize, j: usize) -> (usize, usize) {
        let t = self.pos[j];
        self.step(i, t, Some(t));
        let (pi, pj) = (self.slot_of(i), self.slot_of(j));
        assert_eq!(pi.abs_diff(pj), 1, "fusing anyons not adjacent in order");
        let (l, r) = if pi < pj { (pi, pj) } else { (pj, pi) };
        (self.slot_mode[l], self.slot_mode[r])
    }
}
