//! Anyon models as data: labels, duals, fusion multiplicities, quantum
//! dimensions, the pair-fusion graph and the decoder constants derived from it.

use std::fmt;

use thiserror::Error;

/// Index of the vacuum charge in every model.
pub const VACUUM: usize = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("diameter undefined for cyclic model")]
    Cyclic,
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("model file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeLabel {
    pub id: usize,
    pub name: String,
}

/// Fusion data of an anyon model. `fusion[a][b][c]` is the multiplicity of `c` in `a x b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnyonModel {
    pub name: String,
    pub labels: Vec<ChargeLabel>,
    pub dual: Vec<Option<usize>>,
    pub fusion: Vec<Vec<Vec<u32>>>,
    pub qdim: Vec<f64>,
}

impl AnyonModel {
    /// Empty model with the given label names; the first one is the vacuum.
    pub fn with_labels(name: &str, names: &[&str]) -> Self {
        let n = names.len();
        AnyonModel {
            name: name.to_string(),
            labels: names
                .iter()
                .enumerate()
                .map(|(id, s)| ChargeLabel { id, name: s.to_string() })
                .collect(),
            dual: vec![None; n],
            fusion: vec![vec![vec![0; n]; n]; n],
            qdim: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    pub fn name_of(&self, a: usize) -> &str {
        &self.labels[a].name
    }

    pub fn n(&self, a: usize, b: usize, c: usize) -> u32 {
        self.fusion[a][b][c]
    }

    /// Sets `N[a][b][c]` and its mirror `N[b][a][c]`.
    pub fn set_fusion(&mut self, a: usize, b: usize, c: usize, mult: u32) {
        self.fusion[a][b][c] = mult;
        self.fusion[b][a][c] = mult;
    }

    pub fn outcomes(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.fusion[a][b][c] > 0).collect()
    }

    /// Dual from the dual map, falling back to the fusion table.
    pub fn dual_of(&self, a: usize) -> Option<usize> {
        self.dual[a].or_else(|| {
            let cands: Vec<usize> =
                (0..self.len()).filter(|&b| self.fusion[a][b][VACUUM] == 1).collect();
            if cands.len() == 1 {
                Some(cands[0])
            } else {
                None
            }
        })
    }

    /// Parses the plain-text model format (see `models/ising.anyons`).
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let mut model: Option<AnyonModel> = None;
        let mut name = String::from("unnamed");
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| AlgebraError::Parse { line: i + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "name" => {
                    name = toks.get(1).ok_or_else(|| err("missing name"))?.to_string();
                    if let Some(m) = model.as_mut() {
                        m.name = name.clone();
                    }
                }
                "labels" => {
                    if model.is_some() {
                        return Err(err("labels given twice"));
                    }
                    if toks.len() < 2 {
                        return Err(err("no labels"));
                    }
                    model = Some(AnyonModel::with_labels(&name, &toks[1..]));
                }
                "dual" | "qdim" | "fusion" => {
                    let m = model.as_mut().ok_or_else(|| err("labels must come first"))?;
                    let idx = |s: &str| m.index_of(s).ok_or_else(|| err(&format!("unknown label {s}")));
                    match toks[0] {
                        "dual" => {
                            if toks.len() != 3 {
                                return Err(err("expected: dual <a> <b>"));
                            }
                            let (a, b) = (idx(toks[1])?, idx(toks[2])?);
                            m.dual[a] = Some(b);
                            m.dual[b] = Some(a);
                        }
                        "qdim" => {
                            if toks.len() != 3 {
                                return Err(err("expected: qdim <a> <value>"));
                            }
                            let a = idx(toks[1])?;
                            m.qdim[a] = parse_real(toks[2]).ok_or_else(|| err("bad qdim value"))?;
                        }
                        _ => {
                            if toks.len() != 5 {
                                return Err(err("expected: fusion <a> <b> <c> <mult>"));
                            }
                            let (a, b, c) = (idx(toks[1])?, idx(toks[2])?, idx(toks[3])?);
                            let mult: u32 = toks[4].parse().map_err(|_| err("bad multiplicity"))?;
                            m.set_fusion(a, b, c, mult);
                        }
                    }
                }
                other => return Err(err(&format!("unknown directive {other}"))),
            }
        }
        model.ok_or(AlgebraError::Parse { line: 0, msg: "no labels line".into() })
    }

    /// Serializes back to the model file format.
    pub fn to_text(&self) -> String {
        let mut s = format!("name {}\nlabels", self.name);
        for l in &self.labels {
            s.push(' ');
            s.push_str(&l.name);
        }
        s.push('\n');
        for a in 0..self.len() {
            if let Some(b) = self.dual[a] {
                if a <= b {
                    s.push_str(&format!("dual {} {}\n", self.name_of(a), self.name_of(b)));
                }
            }
        }
        for a in 0..self.len() {
            s.push_str(&format!("qdim {} {:?}\n", self.name_of(a), self.qdim[a]));
        }
        for a in 0..self.len() {
            for b in a..self.len() {
                for c in 0..self.len() {
                    if self.fusion[a][b][c] > 0 {
                        s.push_str(&format!(
                            "fusion {} {} {} {}\n",
                            self.name_of(a),
                            self.name_of(b),
                            self.name_of(c),
                            self.fusion[a][b][c]
                        ));
                    }
                }
            }
        }
        s
    }
}

fn parse_real(tok: &str) -> Option<f64> {
    if let Some(inner) = tok.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
        return inner.parse::<f64>().ok().map(f64::sqrt);
    }
    tok.parse().ok()
}

/// The Ising model {1, eps, sigma}.
pub fn ising_model() -> AnyonModel {
    let mut m = AnyonModel::with_labels("ising", &["1", "eps", "sigma"]);
    let (one, eps, sig) = (0, 1, 2);
    for a in 0..3 {
        m.dual[a] = Some(a);
        m.set_fusion(one, a, a, 1);
    }
    m.set_fusion(eps, eps, one, 1);
    m.set_fusion(sig, eps, sig, 1);
    m.set_fusion(sig, sig, one, 1);
    m.set_fusion(sig, sig, eps, 1);
    m.qdim = vec![1.0, 1.0, std::f64::consts::SQRT_2];
    m
}

/// Fibonacci model {1, tau}, tau x tau = 1 + tau. Cyclic.
pub fn fibonacci_model() -> AnyonModel {
    let mut m = AnyonModel::with_labels("fibonacci", &["1", "tau"]);
    m.dual = vec![Some(0), Some(1)];
    m.set_fusion(0, 0, 0, 1);
    m.set_fusion(0, 1, 1, 1);
    m.set_fusion(1, 1, 0, 1);
    m.set_fusion(1, 1, 1, 1);
    m.qdim = vec![1.0, (1.0 + 5f64.sqrt()) / 2.0];
    m
}

/// Abelian Z_n model with charges 0..n and addition mod n.
pub fn cyclic_group_model(n: usize) -> AnyonModel {
    let names: Vec<String> =
        (0..n).map(|k| if k == 0 { "1".to_string() } else { format!("z{k}") }).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut m = AnyonModel::with_labels(&format!("z{n}"), &refs);
    for a in 0..n {
        m.dual[a] = Some((n - a) % n);
        for b in 0..n {
            m.fusion[a][b][(a + b) % n] = 1;
        }
    }
    m
}

/// The model with only the vacuum.
pub fn trivial_model() -> AnyonModel {
    let mut m = AnyonModel::with_labels("trivial", &["1"]);
    m.dual[0] = Some(0);
    m.fusion[0][0][0] = 1;
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    IncompleteTable,
    VacuumLabel,
    NoUniqueDual,
    VacuumNotIdentity,
    NotCommutative,
    BadQdim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub labels: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every model axiom; the result lists each violation with the labels involved.
pub fn validate_model(model: &AnyonModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = model.len();
    let mut push = |kind, labels: Vec<usize>, message: String| out.push(Violation { kind, labels, message });
    let complete = model.fusion.len() == n
        && model.fusion.iter().all(|row| row.len() == n && row.iter().all(|c| c.len() == n))
        && model.dual.len() == n
        && model.qdim.len() == n;
    if !complete {
        push(ViolationKind::IncompleteTable, vec![], "incomplete fusion table".into());
        return out;
    }
    if n == 0 || model.labels[0].name != "1" {
        push(ViolationKind::VacuumLabel, vec![0], "label 0 is not the vacuum \"1\"".into());
        if n == 0 {
            return out;
        }
    }
    let name = |a: usize| model.labels[a].name.clone();
    for a in 0..n {
        let cands: Vec<usize> = (0..n).filter(|&b| model.fusion[a][b][VACUUM] == 1).collect();
        let ok = cands.len() == 1 && model.dual[a] == Some(cands[0]) && (0..n).all(|b| model.fusion[a][b][VACUUM] <= 1);
        if !ok {
            push(ViolationKind::NoUniqueDual, vec![a], format!("no unique dual for {}", name(a)));
        }
    }
    for a in 0..n {
        for c in 0..n {
            let want = u32::from(c == a);
            if model.fusion[a][VACUUM][c] != want || model.fusion[VACUUM][a][c] != want {
                push(
                    ViolationKind::VacuumNotIdentity,
                    vec![a, c],
                    format!("vacuum not identity: N[{}][1][{}] = {}", name(a), name(c), model.fusion[a][VACUUM][c]),
                );
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            for c in 0..n {
                if model.fusion[a][b][c] != model.fusion[b][a][c] {
                    push(
                        ViolationKind::NotCommutative,
                        vec![a, b, c],
                        format!("fusion not commutative for {} x {} -> {}", name(a), name(b), name(c)),
                    );
                }
            }
        }
    }
    if (model.qdim[VACUUM] - 1.0).abs() > 1e-12 {
        push(ViolationKind::BadQdim, vec![VACUUM], "qdim of vacuum is not 1".into());
    }
    for a in 0..n {
        if model.qdim[a].is_nan() || model.qdim[a] <= 0.0 {
            push(ViolationKind::BadQdim, vec![a], format!("qdim of {} not positive", name(a)));
        }
        if let Some(b) = model.dual[a] {
            if b < n && (model.qdim[a] - model.qdim[b]).abs() > 1e-12 {
                push(ViolationKind::BadQdim, vec![a, b], format!("qdim of {} differs from its dual", name(a)));
            }
        }
    }
    out
}

/// Directed graph on particle/antiparticle classes with an explicit vacuum sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionGraph {
    /// Each vertex is the sorted set of labels in one dual class; vertex 0 is the vacuum.
    pub vertices: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub class_of: Vec<usize>,
}

impl FusionGraph {
    pub fn vacuum(&self) -> usize {
        0
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == v).map(|e| e.1)
    }

    fn has_cycle(&self) -> bool {
        // 0 unvisited, 1 on stack, 2 done
        let mut color = vec![0u8; self.vertices.len()];
        fn dfs(g: &FusionGraph, v: usize, color: &mut [u8]) -> bool {
            color[v] = 1;
            for w in g.successors(v).collect::<Vec<_>>() {
                if color[w] == 1 || (color[w] == 0 && dfs(g, w, color)) {
                    return true;
                }
            }
            color[v] = 2;
            false
        }
        (0..self.vertices.len()).any(|v| color[v] == 0 && dfs(self, v, &mut color))
    }
}

pub fn build_fusion_graph(model: &AnyonModel) -> Result<FusionGraph, AlgebraError> {
    let v = validate_model(model);
    if !v.is_empty() {
        return Err(AlgebraError::InvalidModel(v[0].message.clone()));
    }
    let n = model.len();
    let mut class_of = vec![usize::MAX; n];
    let mut vertices = vec![vec![VACUUM]];
    class_of[VACUUM] = 0;
    for a in 1..n {
        if class_of[a] != usize::MAX {
            continue;
        }
        let d = model.dual[a].expect("validated");
        let mut cls = vec![a, d];
        cls.sort_unstable();
        cls.dedup();
        let id = vertices.len();
        for &x in &cls {
            class_of[x] = id;
        }
        vertices.push(cls);
    }
    let mut edges = Vec::new();
    for (vi, cls) in vertices.iter().enumerate().skip(1) {
        let a = cls[0];
        let d = model.dual[a].expect("validated");
        let mut targets: Vec<usize> = (0..n).filter(|&b| model.fusion[a][d][b] > 0).map(|b| class_of[b]).collect();
        targets.sort_unstable();
        targets.dedup();
        for w in targets {
            edges.push((vi, w));
        }
    }
    Ok(FusionGraph { vertices, edges, class_of })
}

/// True iff the fusion graph has no cycle among non-vacuum vertices (self-loops count).
pub fn is_non_cyclic(model: &AnyonModel) -> bool {
    match build_fusion_graph(model) {
        Ok(g) => !g.has_cycle(),
        Err(_) => false,
    }
}

/// Longest directed path, in edges, from any vertex to the vacuum sink.
pub fn graph_diameter(graph: &FusionGraph) -> Result<usize, AlgebraError> {
    if graph.has_cycle() {
        return Err(AlgebraError::Cyclic);
    }
    let nv = graph.vertices.len();
    let mut memo: Vec<Option<Option<usize>>> = vec![None; nv];
    // longest path from v to vacuum, None if vacuum unreachable
    fn longest(g: &FusionGraph, v: usize, memo: &mut Vec<Option<Option<usize>>>) -> Option<usize> {
        if let Some(r) = memo[v] {
            return r;
        }
        let r = if v == g.vacuum() {
            Some(0)
        } else {
            g.successors(v)
                .collect::<Vec<_>>()
                .into_iter()
                .filter_map(|w| longest(g, w, memo).map(|d| d + 1))
                .max()
        };
        memo[v] = Some(r);
        r
    }
    Ok((0..nv).filter_map(|v| longest(graph, v, &mut memo)).max().unwrap_or(0))
}

/// Closed-form decoder constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofParameters {
    pub q: u64,
    pub b: u64,
    pub u: u64,
    pub a_sep: u64,
    pub d: u64,
    /// f_c * b as an exact integer.
    pub fc_b: u64,
    /// f_n * b as an exact integer.
    pub fn_b: u64,
    pub f_c: f64,
    pub f_n: f64,
    pub b0: u64,
    pub p_c: f64,
    pub b_at_least_b0: bool,
    pub b_above_twice_fn: bool,
    pub u_at_least_4b2: bool,
    pub q_odd: bool,
}

impl ProofParameters {
    /// Errors unless the constants can also drive a lattice (odd Q).
    pub fn check_lattice(&self) -> Result<(), AlgebraError> {
        if !self.q_odd {
            return Err(AlgebraError::Parameter(format!("Q = {} is not odd", self.q)));
        }
        Ok(())
    }
}

fn ceil_sqrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while x * x < n {
        x += 1;
    }
    x
}

/// Computes f_c b, f_n b, b0 and p_c. `b` defaults to 9(3D+1)Q.
///
/// Even Q is accepted and reported through `q_odd`, since the reference
/// instance Q = 78 is even; see [`ProofParameters::check_lattice`].
pub fn proof_parameters(q: u64, d: u64, a_sep: u64, b: Option<u64>) -> Result<ProofParameters, AlgebraError> {
    if q == 0 {
        return Err(AlgebraError::Parameter("Q must be positive".into()));
    }
    if q < 4 * (a_sep + 2) {
        return Err(AlgebraError::Parameter(format!("Q = {q} < 4(a+2) = {}", 4 * (a_sep + 2))));
    }
    let k = 3 * d + 1;
    let b = b.unwrap_or(9 * k * q);
    let fn_b = 4 * k * q + 1;
    if b <= fn_b {
        return Err(AlgebraError::Parameter(format!("b = {b} must exceed f_n b = {fn_b}")));
    }
    let fc_b = b - fn_b;
    let (k128, q128) = (k as u128, q as u128);
    let inner = 4 * k128 * k128 * q128 * q128 + 11 * k128 * q128 + 7;
    // ceil(A + 2 sqrt(B)) = A + ceil(sqrt(4B)) for integer A
    let b0 = (4 * k128 * q128 + 5 + ceil_sqrt(4 * inner)) as u64;
    let qf = q as f64;
    let bf = b as f64;
    let p_c = 1.0 / (4.0 * qf.powi(4) * bf.powi(4));
    Ok(ProofParameters {
        q,
        b,
        u: b * b,
        a_sep,
        d,
        fc_b,
        fn_b,
        f_c: fc_b as f64 / bf,
        f_n: fn_b as f64 / bf,
        b0,
        p_c,
        b_at_least_b0: b >= b0,
        b_above_twice_fn: b > 2 * fn_b,
        u_at_least_4b2: b * b >= 4 * (b + 2),
        q_odd: q % 2 == 1,
    })
}
