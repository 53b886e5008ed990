//! The activation process, three ways.
//!
//! * [`run_cascade`] replays the generation-by-generation definition on a
//!   materialized graph: a node activates once `r` of its neighbors are
//!   active.
//! * [`GraphChain`] is the sequential re-description: one active-and-unused
//!   node is explored per step, its neighbors collect marks, and a node
//!   activates on its r-th mark. Stops at the first step with no explorable
//!   node; the final active count equals the cascade's exactly.
//! * [`LazyChain`] runs the same chain without materializing edges: the marks
//!   a used node sends into each community are a binomial draw over the
//!   currently inactive nodes, landing on a uniform subset. Each
//!   (used, inactive) pair is decided at most once across a run, so the
//!   deferred decisions are consistent with a fixed underlying graph and the
//!   law of the final active count matches the materialized chain.
//!
//! Time convention: `stop_time` is the first step index at which no node can
//! be explored, so `final_active = stop_time - 1` whenever seeds exist, and a
//! seedless run reports `(0, 0)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{CounterRng, RNG_ALGORITHM_ID};
use crate::sbm::{Community, ModelParams, SbmGraph, SeedSet};
use crate::strategy::{ChainObs, Strategy, StrategyState};

/// Default trajectory sampling stride when recording is enabled.
pub const DEFAULT_TRAJECTORY_STRIDE: u64 = 64;

/// Engine knobs.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChainOptions {
    /// Record a `(t, U1, U2, A1, A2)` snapshot every `stride` steps
    /// (plus the initial state). `None` disables recording.
    pub trajectory_stride: Option<u64>,
}

impl ChainOptions {
    pub fn with_trajectory(stride: u64) -> Self {
        ChainOptions {
            trajectory_stride: Some(stride.max(1)),
        }
    }
}

/// Counter snapshot `(t, U1, U2, A1, A2)`.
pub type Snapshot = (u64, u64, u64, u64, u64);

/// Outcome of one simulation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Final number of active nodes.
    pub final_active: u64,
    /// First step at which no node could be explored (0 for seedless runs).
    pub stop_time: u64,
    /// Cascade mode only: sizes of generation 0, 1, ...
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_generation_sizes: Option<Vec<u64>>,
    /// Sampled counter snapshots, if recording was enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Snapshot>>,
    /// Hybrid strategy only: first step the schedule could not be followed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<u64>,
    /// RNG seed of this run (`None` for the deterministic cascade).
    pub rng_seed: Option<u64>,
    pub strategy_name: String,
    pub rng_algorithm: String,
}

/// Set of u32 ids over a contiguous universe with O(1) insert, removal,
/// membership, and uniform random choice.
#[derive(Clone, Debug)]
struct IndexedSet {
    base: u32,
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexedSet {
    fn new(base: u32, universe: usize) -> Self {
        IndexedSet {
            base,
            items: Vec::new(),
            pos: vec![ABSENT; universe],
        }
    }

    #[inline]
    fn len(&self) -> u64 {
        self.items.len() as u64
    }

    #[inline]
    fn slot(&self, id: u32) -> usize {
        (id - self.base) as usize
    }

    fn insert(&mut self, id: u32) {
        let slot = self.slot(id);
        debug_assert_eq!(self.pos[slot], ABSENT);
        self.pos[slot] = self.items.len() as u32;
        self.items.push(id);
    }

    fn remove(&mut self, id: u32) {
        let slot = self.slot(id);
        let at = self.pos[slot];
        debug_assert_ne!(at, ABSENT);
        let last = *self.items.last().unwrap();
        self.items[at as usize] = last;
        let last_slot = self.slot(last);
        self.pos[last_slot] = at;
        self.items.pop();
        self.pos[slot] = ABSENT;
    }

    fn remove_random(&mut self, rng: &mut CounterRng) -> u32 {
        let at = rng.random_range(0..self.items.len());
        let id = self.items[at];
        self.remove(id);
        id
    }

    /// Move a uniform k-subset to the front of the backing array and copy it
    /// into `out` (partial Fisher-Yates).
    fn select_distinct(&mut self, k: usize, rng: &mut CounterRng, out: &mut Vec<u32>) {
        out.clear();
        let len = self.items.len();
        debug_assert!(k <= len);
        for j in 0..k {
            let m = rng.random_range(j..len);
            self.items.swap(j, m);
            let (a, b) = (self.items[j], self.items[m]);
            let (sa, sb) = (self.slot(a), self.slot(b));
            self.pos[sa] = j as u32;
            self.pos[sb] = m as u32;
            out.push(a);
        }
    }
}

/// Shared chain bookkeeping: step counter, per-community used/active counts,
/// per-node mark counters for inactive nodes, and the two frontiers
/// (active-and-unused node sets).
#[derive(Clone, Debug)]
pub struct ChainState {
    r: u32,
    t: u64,
    used: [u64; 2],
    active_count: [u64; 2],
    marks: Vec<u16>,
    is_active: Vec<bool>,
    frontier: [IndexedSet; 2],
    n1: u32,
}

impl ChainState {
    fn new(n1: u32, n2: u32, r: u32) -> Self {
        let n = (n1 + n2) as usize;
        ChainState {
            r,
            t: 0,
            used: [0, 0],
            active_count: [0, 0],
            marks: vec![0; n],
            is_active: vec![false; n],
            frontier: [
                IndexedSet::new(0, n1 as usize),
                IndexedSet::new(n1, n2 as usize),
            ],
            n1,
        }
    }

    #[inline]
    fn community_index(&self, id: u32) -> usize {
        usize::from(id >= self.n1)
    }

    fn activate(&mut self, id: u32) {
        debug_assert!(!self.is_active[id as usize]);
        self.is_active[id as usize] = true;
        let c = self.community_index(id);
        self.active_count[c] += 1;
        self.frontier[c].insert(id);
    }

    fn observe(&self) -> ChainObs {
        ChainObs {
            t: self.t + 1,
            used: self.used,
            active: self.active_count,
            frontier: [self.frontier[0].len(), self.frontier[1].len()],
        }
    }

    /// `(t, U1, U2, A1, A2)` after the last completed step.
    pub fn snapshot(&self) -> Snapshot {
        (
            self.t,
            self.used[0],
            self.used[1],
            self.active_count[0],
            self.active_count[1],
        )
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn used_counts(&self) -> (u64, u64) {
        (self.used[0], self.used[1])
    }

    pub fn active_counts(&self) -> (u64, u64) {
        (self.active_count[0], self.active_count[1])
    }

    pub fn frontier_sizes(&self) -> (u64, u64) {
        (self.frontier[0].len(), self.frontier[1].len())
    }

    pub fn mark_count(&self, node: u32) -> u16 {
        self.marks[node as usize]
    }

    fn check_counts(&self) {
        debug_assert_eq!(self.used[0] + self.used[1], self.t);
        debug_assert!(self.used[0] <= self.active_count[0]);
        debug_assert!(self.used[1] <= self.active_count[1]);
    }
}

struct TrajectoryRecorder {
    stride: Option<u64>,
    samples: Vec<Snapshot>,
}

impl TrajectoryRecorder {
    fn new(opts: &ChainOptions, initial: Snapshot) -> Self {
        let mut samples = Vec::new();
        if opts.trajectory_stride.is_some() {
            samples.push(initial);
        }
        TrajectoryRecorder {
            stride: opts.trajectory_stride,
            samples,
        }
    }

    #[inline]
    fn record(&mut self, snap: Snapshot) {
        if let Some(stride) = self.stride {
            if snap.0.is_multiple_of(stride) {
                self.samples.push(snap);
            }
        }
    }

    fn finish(self) -> Option<Vec<Snapshot>> {
        self.stride.map(|_| self.samples)
    }
}

fn finish_record(
    state: &ChainState,
    traj: TrajectoryRecorder,
    strat: &StrategyState,
    rng_seed: u64,
) -> RunRecord {
    let (t, u1, u2, a1, a2) = state.snapshot();
    let final_active = a1 + a2;
    debug_assert_eq!(u1 + u2, t);
    debug_assert_eq!(final_active, t, "all active nodes are used at the stop step");
    RunRecord {
        final_active,
        stop_time: if final_active == 0 { 0 } else { t + 1 },
        per_generation_sizes: None,
        trajectory: traj.finish(),
        t_prime: strat.t_prime(),
        rng_seed: Some(rng_seed),
        strategy_name: strat.strategy_name().to_string(),
        rng_algorithm: RNG_ALGORITHM_ID.to_string(),
    }
}

/// Generation-by-generation cascade on a materialized graph. Deterministic
/// in (graph, seeds, r).
pub fn run_cascade(graph: &SbmGraph, seeds: &SeedSet, r: u32) -> RunRecord {
    let n = graph.node_count() as usize;
    let mut marks = vec![0u16; n];
    let mut active = vec![false; n];
    let mut current: Vec<u32> = seeds.iter().collect();
    for &v in &current {
        active[v as usize] = true;
    }
    let mut generations = Vec::new();
    let mut total = current.len() as u64;
    if !current.is_empty() {
        generations.push(current.len() as u64);
    }
    while !current.is_empty() {
        let mut next = Vec::new();
        for &v in &current {
            for &w in graph.neighbors(v) {
                if !active[w as usize] {
                    marks[w as usize] += 1;
                    if u32::from(marks[w as usize]) >= r {
                        active[w as usize] = true;
                        next.push(w);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        generations.push(next.len() as u64);
        total += next.len() as u64;
        current = next;
    }
    RunRecord {
        final_active: total,
        stop_time: if total == 0 { 0 } else { total + 1 },
        per_generation_sizes: Some(generations),
        trajectory: None,
        t_prime: None,
        rng_seed: None,
        strategy_name: "cascade".to_string(),
        rng_algorithm: RNG_ALGORITHM_ID.to_string(),
    }
}

/// Sequential chain over a materialized graph.
pub struct GraphChain<'g> {
    graph: &'g SbmGraph,
    state: ChainState,
    strat: StrategyState,
    rng: CounterRng,
    traj: TrajectoryRecorder,
    rng_seed: u64,
}

impl<'g> GraphChain<'g> {
    pub fn new(
        graph: &'g SbmGraph,
        seeds: &SeedSet,
        r: u32,
        strategy: &Strategy,
        rng_seed: u64,
        opts: &ChainOptions,
    ) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!("r = {r} must be >= 2")));
        }
        let (n1, n2) = graph.community_sizes();
        let mut state = ChainState::new(n1, n2, r);
        for id in seeds.iter() {
            if id >= n1 + n2 {
                return Err(Error::InvalidParameter(format!(
                    "seed id {id} out of range"
                )));
            }
            if state.is_active[id as usize] {
                return Err(Error::InvalidParameter(format!("duplicate seed {id}")));
            }
            state.activate(id);
        }
        let traj = TrajectoryRecorder::new(opts, state.snapshot());
        Ok(GraphChain {
            graph,
            state,
            strat: strategy.begin(),
            rng: CounterRng::new(rng_seed),
            traj,
            rng_seed,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    /// Execute one step; `Ok(None)` means the chain has stopped.
    pub fn step(&mut self) -> Result<Option<Community>> {
        let obs = self.state.observe();
        if obs.frontier[0] + obs.frontier[1] == 0 {
            self.strat.note_stop(&obs);
            return Ok(None);
        }
        let community = self.strat.select(&obs);
        let ci = community.index();
        if self.state.frontier[ci].len() == 0 {
            return Err(Error::InfeasibleStrategy {
                community: ci + 1,
                t: obs.t,
            });
        }
        let v = self.state.frontier[ci].remove_random(&mut self.rng);
        self.state.used[ci] += 1;
        self.state.t += 1;
        let r = self.state.r;
        for &w in self.graph.neighbors(v) {
            if !self.state.is_active[w as usize] {
                let m = &mut self.state.marks[w as usize];
                *m += 1;
                if u32::from(*m) >= r {
                    self.state.activate(w);
                }
            }
        }
        self.state.check_counts();
        self.traj.record(self.state.snapshot());
        Ok(Some(community))
    }

    pub fn run(mut self) -> Result<RunRecord> {
        while self.step()?.is_some() {}
        Ok(finish_record(&self.state, self.traj, &self.strat, self.rng_seed))
    }
}

/// Run the sequential chain to completion on a materialized graph.
pub fn run_chain(
    graph: &SbmGraph,
    seeds: &SeedSet,
    r: u32,
    strategy: &Strategy,
    rng_seed: u64,
    opts: &ChainOptions,
) -> Result<RunRecord> {
    GraphChain::new(graph, seeds, r, strategy, rng_seed, opts)?.run()
}

/// Sequential chain with deferred edge decisions; never materializes the
/// graph and uses O(n) memory.
pub struct LazyChain {
    r: u32,
    intra_p: [f64; 2],
    cross_p: f64,
    state: ChainState,
    inactive: [IndexedSet; 2],
    strat: StrategyState,
    rng: CounterRng,
    scratch: Vec<u32>,
    traj: TrajectoryRecorder,
    rng_seed: u64,
}

impl LazyChain {
    /// Seed identities are irrelevant to the law of the counters (nodes are
    /// exchangeable within a community), so the first `a_i` ids of each
    /// community serve as seeds.
    pub fn new(
        params: &ModelParams,
        seed_counts: (u64, u64),
        strategy: &Strategy,
        rng_seed: u64,
        opts: &ChainOptions,
    ) -> Result<Self> {
        params.validate()?;
        let (a1, a2) = seed_counts;
        if a1 > params.n1 || a2 > params.n2 {
            return Err(Error::InvalidParameter(format!(
                "seed counts ({a1}, {a2}) exceed community sizes ({}, {})",
                params.n1, params.n2
            )));
        }
        let (n1, n2) = (params.n1 as u32, params.n2 as u32);
        let mut state = ChainState::new(n1, n2, params.r);
        let mut inactive = [
            IndexedSet::new(0, n1 as usize),
            IndexedSet::new(n1, n2 as usize),
        ];
        for id in 0..n1 {
            if u64::from(id) < a1 {
                state.activate(id);
            } else {
                inactive[0].insert(id);
            }
        }
        for id in n1..n1 + n2 {
            if u64::from(id - n1) < a2 {
                state.activate(id);
            } else {
                inactive[1].insert(id);
            }
        }
        let traj = TrajectoryRecorder::new(opts, state.snapshot());
        Ok(LazyChain {
            r: params.r,
            intra_p: [params.p1, params.p2],
            cross_p: params.q,
            state,
            inactive,
            strat: strategy.begin(),
            rng: CounterRng::new(rng_seed),
            scratch: Vec::new(),
            traj,
            rng_seed,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn step(&mut self) -> Result<Option<Community>> {
        let obs = self.state.observe();
        if obs.frontier[0] + obs.frontier[1] == 0 {
            self.strat.note_stop(&obs);
            return Ok(None);
        }
        let community = self.strat.select(&obs);
        let ci = community.index();
        if self.state.frontier[ci].len() == 0 {
            return Err(Error::InfeasibleStrategy {
                community: ci + 1,
                t: obs.t,
            });
        }
        let _v = self.state.frontier[ci].remove_random(&mut self.rng);
        self.state.used[ci] += 1;
        self.state.t += 1;

        for target in 0..2usize {
            let pool = self.inactive[target].len();
            if pool == 0 {
                continue;
            }
            let p = if target == ci {
                self.intra_p[target]
            } else {
                self.cross_p
            };
            if p <= 0.0 {
                continue;
            }
            let hits = if p >= 1.0 {
                pool
            } else {
                Binomial::new(pool, p)
                    .expect("validated probability")
                    .sample(&mut self.rng)
            };
            if hits == 0 {
                continue;
            }
            let mut scratch = std::mem::take(&mut self.scratch);
            self.inactive[target].select_distinct(hits as usize, &mut self.rng, &mut scratch);
            for &w in &scratch {
                let m = &mut self.state.marks[w as usize];
                *m += 1;
                if u32::from(*m) >= self.r {
                    self.inactive[target].remove(w);
                    self.state.activate(w);
                }
            }
            self.scratch = scratch;
        }
        self.state.check_counts();
        self.traj.record(self.state.snapshot());
        Ok(Some(community))
    }

    pub fn run(mut self) -> Result<RunRecord> {
        while self.step()?.is_some() {}
        Ok(finish_record(&self.state, self.traj, &self.strat, self.rng_seed))
    }
}

/// Run the lazy chain to completion.
pub fn run_chain_lazy(
    params: &ModelParams,
    seed_counts: (u64, u64),
    strategy: &Strategy,
    rng_seed: u64,
    opts: &ChainOptions,
) -> Result<RunRecord> {
    LazyChain::new(params, seed_counts, strategy, rng_seed, opts)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binom::binom_pmf;
    use crate::phase::b_exact;
    use crate::rng::derive_seed;
    use crate::sbm::{generate_graph, sample_seeds};
    use crate::strategy::{hybrid_strategy, DeterministicSchedule};

    fn path_graph() -> (SbmGraph, SeedSet) {
        // a - v - b with a, b seeded
        let g = SbmGraph::from_edges(3, 0, &[(0, 1), (1, 2)]).unwrap();
        let seeds = SeedSet {
            community1: vec![0, 2],
            community2: vec![],
        };
        (g, seeds)
    }

    #[test]
    fn cascade_on_path() {
        let (g, seeds) = path_graph();
        let rec = run_cascade(&g, &seeds, 2);
        assert_eq!(rec.final_active, 3);
        assert_eq!(rec.per_generation_sizes, Some(vec![2, 1]));
        assert_eq!(rec.stop_time, 4);
    }

    #[test]
    fn cascade_all_seeded() {
        let g = SbmGraph::from_edges(4, 0, &[(0, 1), (2, 3)]).unwrap();
        let seeds = SeedSet {
            community1: vec![0, 1, 2, 3],
            community2: vec![],
        };
        let rec = run_cascade(&g, &seeds, 2);
        assert_eq!(rec.final_active, 4);
        assert_eq!(rec.per_generation_sizes, Some(vec![4]));
    }

    #[test]
    fn cascade_star_two_seeded_leaves() {
        // star K_{1,5}, center 0; two leaves seeded; only the center joins
        let g = SbmGraph::from_edges(6, 0, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let seeds = SeedSet {
            community1: vec![1, 2],
            community2: vec![],
        };
        let rec = run_cascade(&g, &seeds, 2);
        assert_eq!(rec.final_active, 3);
        assert_eq!(rec.per_generation_sizes, Some(vec![2, 1]));
    }

    #[test]
    fn chain_on_path_has_stop_time_four() {
        let (g, seeds) = path_graph();
        for strategy in [Strategy::Max, Strategy::RoundRobin] {
            let rec = run_chain(&g, &seeds, 2, &strategy, 11, &ChainOptions::default()).unwrap();
            assert_eq!(rec.final_active, 3);
            assert_eq!(rec.stop_time, 4);
        }
    }

    #[test]
    fn empty_seed_convention() {
        let (g, _) = path_graph();
        let seeds = SeedSet {
            community1: vec![],
            community2: vec![],
        };
        let rec = run_chain(&g, &seeds, 2, &Strategy::Max, 3, &ChainOptions::default()).unwrap();
        assert_eq!(rec.final_active, 0);
        assert_eq!(rec.stop_time, 0);
        let casc = run_cascade(&g, &seeds, 2);
        assert_eq!(casc.final_active, 0);
        assert_eq!(casc.stop_time, 0);
    }

    #[test]
    fn lazy_zero_probability_uses_only_seeds() {
        let params = ModelParams {
            n1: 40,
            n2: 30,
            p1: 0.0,
            p2: 0.0,
            q: 0.0,
            r: 2,
            a1: 5,
            a2: 3,
        };
        let rec =
            run_chain_lazy(&params, (5, 3), &Strategy::Max, 9, &ChainOptions::default()).unwrap();
        assert_eq!(rec.final_active, 8);
        assert_eq!(rec.stop_time, 9);
    }

    #[test]
    fn fewer_seeds_than_threshold_never_grow() {
        let params = ModelParams {
            n1: 60,
            n2: 60,
            p1: 0.4,
            p2: 0.4,
            q: 0.4,
            r: 3,
            a1: 1,
            a2: 1,
        };
        for seed in 0..20 {
            let rec = run_chain_lazy(&params, (1, 1), &Strategy::Max, seed, &ChainOptions::default())
                .unwrap();
            assert_eq!(rec.final_active, 2, "each used node delivers at most one mark");
            let g = generate_graph(&params, seed).unwrap();
            let seeds = sample_seeds(&params, seed).unwrap();
            assert_eq!(run_cascade(&g, &seeds, 3).final_active, 2);
        }
    }

    #[test]
    fn snapshots_track_counters() {
        let params = ModelParams {
            n1: 10,
            n2: 10,
            p1: 0.2,
            p2: 0.2,
            q: 0.1,
            r: 2,
            a1: 3,
            a2: 2,
        };
        let mut chain =
            LazyChain::new(&params, (3, 2), &Strategy::Max, 5, &ChainOptions::default()).unwrap();
        assert_eq!(chain.state().snapshot(), (0, 0, 0, 3, 2));
        let c = chain.step().unwrap().unwrap();
        assert_eq!(c, Community::One); // max rule, frontier (3, 2)
        let (t, u1, u2, a1, _a2) = chain.state().snapshot();
        assert_eq!((t, u1, u2), (1, 1, 0));
        assert!(a1 >= 3);
        // run to the end: active == used in both communities
        while chain.step().unwrap().is_some() {}
        let (t, u1, u2, a1, a2) = chain.state().snapshot();
        assert_eq!(u1 + u2, t);
        assert_eq!((a1, a2), (u1, u2));
    }

    #[test]
    fn chain_matches_cascade_on_random_instances() {
        let mut master = CounterRng::new(0xC0FFEE);
        let diag: Vec<(f64, f64)> = (0..=80).map(|i| (i as f64 / 40.0, i as f64 / 40.0)).collect();
        let hybrid = hybrid_strategy(DeterministicSchedule::build(12.0, 12.0, &diag).unwrap());
        for case in 0..200u64 {
            let n1 = master.random_range(0..60u64);
            let n2_min = u64::from(n1 == 0);
            let n2 = master.random_range(n2_min..(121 - n1));
            let r = if case % 2 == 0 { 2 } else { 3 };
            let params = ModelParams {
                n1,
                n2,
                p1: master.uniform() * 0.2,
                p2: master.uniform() * 0.2,
                q: master.uniform() * 0.1,
                r,
                a1: master.random_range(0..=n1),
                a2: master.random_range(0..=n2),
            };
            let seed = derive_seed(1234, &[case]);
            let g = generate_graph(&params, seed).unwrap();
            let seeds = sample_seeds(&params, seed).unwrap();
            let reference = run_cascade(&g, &seeds, r).final_active;
            for strategy in [&Strategy::Max, &Strategy::RoundRobin, &hybrid] {
                let rec =
                    run_chain(&g, &seeds, r, strategy, seed ^ 0x55, &ChainOptions::default())
                        .unwrap();
                assert_eq!(
                    rec.final_active, reference,
                    "case {case} strategy {}",
                    strategy.name()
                );
                assert!(rec.final_active >= params.a1 + params.a2);
            }
        }
    }

    #[test]
    fn lazy_and_graph_chains_agree_in_distribution() {
        // two-sample mean comparison at 3 sigma
        let params = ModelParams {
            n1: 500,
            n2: 500,
            p1: 0.004,
            p2: 0.004,
            q: 0.002,
            r: 2,
            a1: 12,
            a2: 12,
        };
        let reps = 2000u64;
        let mut lazy = Vec::with_capacity(reps as usize);
        let mut graph = Vec::with_capacity(reps as usize);
        for k in 0..reps {
            let s = derive_seed(777, &[k]);
            lazy.push(
                run_chain_lazy(&params, (12, 12), &Strategy::Max, s, &ChainOptions::default())
                    .unwrap()
                    .final_active as f64,
            );
            let g = generate_graph(&params, derive_seed(888, &[k])).unwrap();
            let seeds = sample_seeds(&params, derive_seed(999, &[k])).unwrap();
            graph.push(
                run_chain(&g, &seeds, 2, &Strategy::Max, s, &ChainOptions::default())
                    .unwrap()
                    .final_active as f64,
            );
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        let (m1, m2) = (mean(&lazy), mean(&graph));
        let sigma = (var(&lazy, m1) / reps as f64 + var(&graph, m2) / reps as f64).sqrt();
        assert!(
            (m1 - m2).abs() <= 3.0 * sigma,
            "lazy mean {m1} vs graph mean {m2}, sigma {sigma}"
        );
    }

    #[test]
    fn strategies_agree_on_one_graph() {
        let params = ModelParams {
            n1: 300,
            n2: 200,
            p1: 0.01,
            p2: 0.015,
            q: 0.004,
            r: 2,
            a1: 25,
            a2: 10,
        };
        let g = generate_graph(&params, 42).unwrap();
        let seeds = sample_seeds(&params, 42).unwrap();
        let diag: Vec<(f64, f64)> = (0..=200).map(|i| (i as f64 / 100.0, i as f64 / 100.0)).collect();
        let hybrid = hybrid_strategy(DeterministicSchedule::build(20.0, 20.0, &diag).unwrap());
        let base = run_chain(&g, &seeds, 2, &Strategy::Max, 7, &ChainOptions::default())
            .unwrap()
            .final_active;
        for strategy in [&Strategy::RoundRobin, &hybrid] {
            let rec = run_chain(&g, &seeds, 2, strategy, 13, &ChainOptions::default()).unwrap();
            assert_eq!(rec.final_active, base);
        }
    }

    #[test]
    fn trajectory_counters_are_monotone_and_consistent() {
        let params = ModelParams {
            n1: 200,
            n2: 200,
            p1: 0.01,
            p2: 0.01,
            q: 0.005,
            r: 2,
            a1: 15,
            a2: 15,
        };
        let rec = run_chain_lazy(
            &params,
            (15, 15),
            &Strategy::RoundRobin,
            21,
            &ChainOptions::with_trajectory(1),
        )
        .unwrap();
        let traj = rec.trajectory.unwrap();
        assert_eq!(traj[0], (0, 0, 0, 15, 15));
        for w in traj.windows(2) {
            let (t0, u10, u20, a10, a20) = w[0];
            let (t1, u11, u21, a11, a21) = w[1];
            assert_eq!(t1, t0 + 1);
            assert_eq!(u11 + u21, t1);
            assert!(u11 >= u10 && u21 >= u20);
            assert!(a11 >= a10 && a21 >= a20);
            assert!(u11 <= a11 && u21 <= a21);
        }
    }

    #[test]
    fn frozen_used_counts_give_binomial_activation_law() {
        // Schedule the first 8 steps deterministically with seeds alone
        // covering the demand, so U(8) = w(8) = (4, 4) on every replica;
        // the fresh-activation count must then follow
        // Bin(n1 - a1, b_1((4,4))). Chi-square plus mean gate.
        let params = ModelParams {
            n1: 40,
            n2: 40,
            p1: 0.08,
            p2: 0.06,
            q: 0.05,
            r: 2,
            a1: 10,
            a2: 10,
        };
        let diag: Vec<(f64, f64)> = (0..=64).map(|i| (i as f64 / 8.0, i as f64 / 8.0)).collect();
        let sched = DeterministicSchedule::build(1.0, 1.0, &diag).unwrap();
        assert_eq!(sched.used_targets(8), (4, 4));
        let strategy = hybrid_strategy(sched);
        let t_star = 8u64;
        let reps = 4000u64;
        let mut counts = std::collections::BTreeMap::<u64, u64>::new();
        for k in 0..reps {
            let mut chain = LazyChain::new(
                &params,
                (10, 10),
                &strategy,
                derive_seed(31337, &[k]),
                &ChainOptions::default(),
            )
            .unwrap();
            for _ in 0..t_star {
                chain.step().unwrap().unwrap();
            }
            let (_, u1, u2, a1, _) = chain.state().snapshot();
            assert_eq!((u1, u2), (4, 4));
            *counts.entry(a1 - 10).or_insert(0) += 1;
        }
        let p_hit = b_exact(&params, (4, 4), Community::One);
        let trials = params.n1 - params.a1;
        // mean within 4 sigma
        let emp_mean: f64 = counts.iter().map(|(&s, &c)| s as f64 * c as f64).sum::<f64>() / reps as f64;
        let mean = trials as f64 * p_hit;
        let sd = (trials as f64 * p_hit * (1.0 - p_hit) / reps as f64).sqrt();
        assert!(
            (emp_mean - mean).abs() <= 4.0 * sd,
            "empirical {emp_mean} vs {mean} (sd {sd})"
        );
        // chi-square over pooled bins (expected >= 5)
        let mut chi2 = 0.0;
        let mut bins = 0usize;
        let mut obs_acc = 0.0;
        let mut exp_acc = 0.0;
        for s in 0..=trials {
            let e = reps as f64 * binom_pmf(trials, p_hit, s);
            let o = *counts.get(&s).unwrap_or(&0) as f64;
            exp_acc += e;
            obs_acc += o;
            if exp_acc >= 5.0 {
                chi2 += (obs_acc - exp_acc).powi(2) / exp_acc;
                bins += 1;
                obs_acc = 0.0;
                exp_acc = 0.0;
            }
        }
        if exp_acc > 0.0 {
            chi2 += (obs_acc - exp_acc).powi(2) / exp_acc;
            bins += 1;
        }
        assert!(bins >= 3, "degenerate binning");
        // 99.9% quantile of chi-square with up to ~12 dof
        assert!(chi2 < 32.9, "chi2 = {chi2} over {bins} bins");
    }
}
