//! Finite two-community random graph instances: parameters, sparse
//! generation, and seed sampling.
//!
//! Node indexing is unified: community 1 occupies `[0, n1)`, community 2
//! occupies `[n1, n1 + n2)`, so community lookup is a single compare.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, CounterRng};

/// Default cap on the expected number of edges a single generation may
/// materialize.
pub const DEFAULT_EDGE_CAP: f64 = 2.0e8;

/// Community label. Communities are indexed 0 and 1 internally; display names
/// are 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Community {
    One,
    Two,
}

impl Community {
    pub const BOTH: [Community; 2] = [Community::One, Community::Two];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Community::One => 0,
            Community::Two => 1,
        }
    }

    pub fn from_index(i: usize) -> Community {
        match i {
            0 => Community::One,
            1 => Community::Two,
            _ => panic!("community index {i} out of range"),
        }
    }

    pub fn other(self) -> Community {
        match self {
            Community::One => Community::Two,
            Community::Two => Community::One,
        }
    }

    /// 1-based label for human-facing output.
    pub fn label(self) -> usize {
        self.index() + 1
    }
}

/// Finite instance description: node counts, edge probabilities, activation
/// threshold, and seed counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n1: u64,
    pub n2: u64,
    /// Intra-community edge probability of community 1.
    pub p1: f64,
    /// Intra-community edge probability of community 2.
    pub p2: f64,
    /// Inter-community edge probability.
    pub q: f64,
    /// Activation threshold (a node activates on its r-th active neighbor).
    pub r: u32,
    /// Seed count in community 1.
    pub a1: u64,
    /// Seed count in community 2.
    pub a2: u64,
}

/// Soft diagnostics produced by [`ModelParams::validate`]. The asymptotic
/// scaling window `1/n << p << n^(-1/r)` is checked heuristically
/// (`n*p > 1` and `p * n^(1/r) < 1`) and reported as a warning, never as a
/// hard error.
#[derive(Clone, Debug, Default)]
pub struct ValidityReport {
    pub window_ok: [bool; 2],
    pub warnings: Vec<String>,
}

pub(crate) fn factorial(k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 2..=k as u64 {
        acc *= i as f64;
    }
    acc
}

impl ModelParams {
    pub fn n(&self) -> u64 {
        self.n1 + self.n2
    }

    pub fn community_size(&self, c: Community) -> u64 {
        match c {
            Community::One => self.n1,
            Community::Two => self.n2,
        }
    }

    pub fn seed_count(&self, c: Community) -> u64 {
        match c {
            Community::One => self.a1,
            Community::Two => self.a2,
        }
    }

    pub fn intra_probability(&self, c: Community) -> f64 {
        match c {
            Community::One => self.p1,
            Community::Two => self.p2,
        }
    }

    pub fn community_of(&self, node: u32) -> Community {
        if (node as u64) < self.n1 {
            Community::One
        } else {
            Community::Two
        }
    }

    /// Hard validation plus the soft scaling-window report.
    pub fn validate(&self) -> Result<ValidityReport> {
        if self.n() == 0 {
            return Err(Error::InvalidParameter("n1 + n2 must be positive".into()));
        }
        if self.n() > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!(
                "n1 + n2 = {} exceeds the supported node range",
                self.n()
            )));
        }
        if self.r < 2 {
            return Err(Error::InvalidParameter(format!(
                "activation threshold r must be >= 2, got {}",
                self.r
            )));
        }
        if self.r > 60 {
            return Err(Error::InvalidParameter(format!(
                "activation threshold r = {} is outside the supported range (2..=60)",
                self.r
            )));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("q", self.q)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "probability {name} = {p} outside [0, 1]"
                )));
            }
        }
        if self.a1 > self.n1 || self.a2 > self.n2 {
            return Err(Error::InvalidParameter(format!(
                "seed counts (a1={}, a2={}) exceed community sizes (n1={}, n2={})",
                self.a1, self.a2, self.n1, self.n2
            )));
        }
        let mut report = ValidityReport {
            window_ok: [true, true],
            warnings: Vec::new(),
        };
        for (i, (n, p)) in [(self.n1, self.p1), (self.n2, self.p2)].into_iter().enumerate() {
            if n == 0 {
                continue;
            }
            let nf = n as f64;
            let lower_ok = nf * p > 1.0;
            let upper_ok = p * nf.powf(1.0 / self.r as f64) < 1.0;
            if !(lower_ok && upper_ok) {
                report.window_ok[i] = false;
                report.warnings.push(format!(
                    "community {}: p{} = {p} is outside the heuristic window 1/n < p < n^(-1/r) (n = {n})",
                    i + 1,
                    i + 1,
                ));
            }
        }
        Ok(report)
    }

    /// Critical seed scale per community and the realized normalized seed
    /// fractions:
    /// `g_i = (1 - 1/r) * ((r-1)! / (n_i p_i^r))^(1/(r-1))`, `alpha_i = a_i / g_i`.
    ///
    /// An empty community reports `g = 0`, `alpha = 0`. A non-empty community
    /// with `p = 0` has no finite critical scale and is rejected.
    pub fn critical_scale(&self) -> Result<CriticalScale> {
        let mut g = [0.0f64; 2];
        let mut alpha = [0.0f64; 2];
        for (i, (n, p, a)) in [
            (self.n1, self.p1, self.a1),
            (self.n2, self.p2, self.a2),
        ]
        .into_iter()
        .enumerate()
        {
            if n == 0 {
                continue;
            }
            if p <= 0.0 {
                return Err(Error::CriticalScaleUndefined {
                    community: i + 1,
                    n,
                });
            }
            let r = self.r as f64;
            let gi = (1.0 - 1.0 / r)
                * (factorial(self.r - 1) / (n as f64 * p.powi(self.r as i32)))
                    .powf(1.0 / (r - 1.0));
            g[i] = gi;
            alpha[i] = a as f64 / gi;
        }
        Ok(CriticalScale {
            g1: g[0],
            g2: g[1],
            alpha1: alpha[0],
            alpha2: alpha[1],
        })
    }
}

/// Output of [`ModelParams::critical_scale`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CriticalScale {
    pub g1: f64,
    pub g2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl CriticalScale {
    pub fn g(&self, c: Community) -> f64 {
        match c {
            Community::One => self.g1,
            Community::Two => self.g2,
        }
    }
}

/// Immutable sparse graph in CSR form over the unified index space.
#[derive(Clone, Debug)]
pub struct SbmGraph {
    n1: u32,
    n2: u32,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    edge_count: u64,
}

impl SbmGraph {
    pub fn node_count(&self) -> u32 {
        self.n1 + self.n2
    }

    pub fn community_sizes(&self) -> (u32, u32) {
        (self.n1, self.n2)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn community_of(&self, node: u32) -> Community {
        if node < self.n1 {
            Community::One
        } else {
            Community::Two
        }
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        let v = node as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.neighbors(node).len()
    }

    /// Build from an explicit undirected edge list (each edge listed once).
    /// Rejects self-loops, duplicates, and out-of-range endpoints.
    pub fn from_edges(n1: u32, n2: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let n = n1 as u64 + n2 as u64;
        for &(u, v) in edges {
            if u as u64 >= n || v as u64 >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
            }
        }
        let graph = Self::from_pairs(n1, n2, edges.to_vec());
        graph.check_invariants()?;
        Ok(graph)
    }

    fn from_pairs(n1: u32, n2: u32, pairs: Vec<(u32, u32)>) -> Self {
        let n = (n1 + n2) as usize;
        let mut degree = vec![0usize; n];
        for &(u, v) in &pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; acc];
        for &(u, v) in &pairs {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        SbmGraph {
            n1,
            n2,
            offsets,
            targets,
            edge_count: pairs.len() as u64,
        }
    }

    /// Structural invariants: sorted unique neighbor lists, no self-loops,
    /// symmetry. Intended for tests and post-generation sanity checks.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.node_count();
        for v in 0..n {
            let adj = self.neighbors(v);
            for (i, &w) in adj.iter().enumerate() {
                if w == v {
                    return Err(Error::InvalidParameter(format!("self-loop at {v}")));
                }
                if i > 0 && adj[i - 1] >= w {
                    return Err(Error::InvalidParameter(format!(
                        "unsorted or duplicate neighbor {w} of {v}"
                    )));
                }
                if self.neighbors(w).binary_search(&v).is_err() {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric edge ({v}, {w})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Edge-list dump: one `u v` pair per undirected edge with `u < v`,
    /// ascending, after a provenance header line.
    pub fn write_edge_list<W: Write>(&self, mut w: W, seed: u64) -> std::io::Result<()> {
        writeln!(w, "# sbm n1={} n2={} seed={}", self.n1, self.n2, seed)?;
        for u in 0..self.node_count() {
            for &v in self.neighbors(u) {
                if u < v {
                    writeln!(w, "{u} {v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Initially active nodes, one sorted id list per community.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub community1: Vec<u32>,
    pub community2: Vec<u32>,
}

impl SeedSet {
    pub fn counts(&self) -> (u64, u64) {
        (self.community1.len() as u64, self.community2.len() as u64)
    }

    pub fn total(&self) -> u64 {
        (self.community1.len() + self.community2.len()) as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.community1.iter().chain(self.community2.iter()).copied()
    }
}

/// Decode a flat intra-community pair index into `(u, v)` with `u < v`.
/// Pairs are ordered by `v`, then `u`.
fn decode_triangular(k: u64) -> (u64, u64) {
    let mut v = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as u64;
    // sqrt can land one off near representability limits
    while v * (v - 1) / 2 > k {
        v -= 1;
    }
    while (v + 1) * v / 2 <= k {
        v += 1;
    }
    let u = k - v * (v - 1) / 2;
    (u, v)
}

/// Visit each index of `[0, space)` independently kept with probability `p`,
/// in expected O(p * space) time via geometric skips.
fn sample_pair_indices(rng: &mut CounterRng, space: u64, p: f64, mut emit: impl FnMut(u64)) {
    if space == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for k in 0..space {
            emit(k);
        }
        return;
    }
    let skip = Geometric::new(p).expect("p in (0,1)");
    let mut cursor: u64 = 0;
    loop {
        let jump = skip.sample(rng);
        cursor = match cursor.checked_add(jump) {
            Some(c) => c,
            None => return,
        };
        if cursor >= space {
            return;
        }
        emit(cursor);
        cursor += 1;
    }
}

/// Generate a graph instance; deterministic given `rng_seed`.
pub fn generate_graph(params: &ModelParams, rng_seed: u64) -> Result<SbmGraph> {
    generate_graph_with_cap(params, rng_seed, DEFAULT_EDGE_CAP)
}

/// As [`generate_graph`] with an explicit cap on the expected edge count.
pub fn generate_graph_with_cap(
    params: &ModelParams,
    rng_seed: u64,
    edge_cap: f64,
) -> Result<SbmGraph> {
    params.validate()?;
    let (n1, n2) = (params.n1, params.n2);
    let m1 = n1 * n1.saturating_sub(1) / 2;
    let m2 = n2 * n2.saturating_sub(1) / 2;
    let mx = n1 * n2;
    let expected = m1 as f64 * params.p1 + m2 as f64 * params.p2 + mx as f64 * params.q;
    if expected > edge_cap {
        return Err(Error::EdgeCapExceeded {
            expected,
            cap: edge_cap,
        });
    }
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(expected.ceil() as usize + 16);

    let mut rng = CounterRng::new(derive_seed(rng_seed, &[0]));
    sample_pair_indices(&mut rng, m1, params.p1, |k| {
        let (u, v) = decode_triangular(k);
        pairs.push((u as u32, v as u32));
    });
    let mut rng = CounterRng::new(derive_seed(rng_seed, &[1]));
    sample_pair_indices(&mut rng, m2, params.p2, |k| {
        let (u, v) = decode_triangular(k);
        pairs.push(((n1 + u) as u32, (n1 + v) as u32));
    });
    let mut rng = CounterRng::new(derive_seed(rng_seed, &[2]));
    sample_pair_indices(&mut rng, mx, params.q, |k| {
        let u = k / n2;
        let w = k % n2;
        pairs.push((u as u32, (n1 + w) as u32));
    });

    Ok(SbmGraph::from_pairs(n1 as u32, n2 as u32, pairs))
}

/// Uniform without-replacement sample of `a` values from `[0, n)`
/// (Floyd's algorithm), returned sorted.
fn sample_without_replacement(rng: &mut CounterRng, n: u64, a: u64) -> Vec<u32> {
    use std::collections::HashSet;
    debug_assert!(a <= n);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(a as usize);
    for j in (n - a)..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut out: Vec<u32> = chosen.into_iter().map(|x| x as u32).collect();
    out.sort_unstable();
    out
}

/// Sample seed sets uniformly at random within each community;
/// deterministic given `rng_seed`.
pub fn sample_seeds(params: &ModelParams, rng_seed: u64) -> Result<SeedSet> {
    params.validate()?;
    let mut rng1 = CounterRng::new(derive_seed(rng_seed, &[10]));
    let mut rng2 = CounterRng::new(derive_seed(rng_seed, &[11]));
    let c1 = sample_without_replacement(&mut rng1, params.n1, params.a1);
    let c2 = sample_without_replacement(&mut rng2, params.n2, params.a2)
        .into_iter()
        .map(|x| x + params.n1 as u32)
        .collect();
    Ok(SeedSet {
        community1: c1,
        community2: c2,
    })
}
