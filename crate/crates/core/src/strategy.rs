//! Community-selection strategies for the sequential chain.
//!
//! A strategy maps the observable chain state (step number, used/active
//! counts, frontier sizes) to the community explored next. Any feasible
//! strategy yields the same final active set, so the engine treats the
//! strategy as a pluggable value. The hybrid strategy follows a
//! precomputed integer schedule `(w1(t), w2(t))` while the chain can honor
//! it, records the first step `T'` where it cannot (or where the schedule
//! runs out), and falls back to the max rule afterwards.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::Community;

/// Observable state offered to a strategy before step `t` executes:
/// `used`/`active` are the counts after step `t - 1`, `frontier[i] =
/// active[i] - used[i]`.
#[derive(Clone, Copy, Debug)]
pub struct ChainObs {
    pub t: u64,
    pub used: [u64; 2],
    pub active: [u64; 2],
    pub frontier: [u64; 2],
}

/// Integer exploration schedule: `w_i(t)` is the number of community-`i`
/// nodes that must have been used by step `t`.
///
/// Invariants enforced at construction: `w1(t) + w2(t) = t` for every
/// scheduled `t`, and each component is non-decreasing with unit increments.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeterministicSchedule {
    w1: Vec<u64>,
    w2: Vec<u64>,
    /// The sampled trajectory `(x1, x2)` the schedule was built from, in
    /// rescaled used-node coordinates.
    zeta_samples: Vec<(f64, f64)>,
    g1: f64,
    g2: f64,
}

impl DeterministicSchedule {
    /// Build the schedule from per-community critical scales and a sampled
    /// trajectory curve.
    ///
    /// The curve must start at `(0, 0)` and be non-decreasing in both
    /// coordinates. The discrete schedule is the right-continuous inverse of
    /// `v(x1) = floor(x1 g1) + floor(x2(x1) g2)` evaluated at integer steps;
    /// steps skipped by a simultaneous double increment are filled by
    /// advancing community 1 first.
    pub fn build(g1: f64, g2: f64, curve: &[(f64, f64)]) -> Result<Self> {
        if !(g1.is_finite() && g2.is_finite() && g1 >= 0.0 && g2 >= 0.0) {
            return Err(Error::ScheduleConstruction(format!(
                "invalid scales g1 = {g1}, g2 = {g2}"
            )));
        }
        if curve.len() < 2 {
            return Err(Error::NonMonotoneCurve);
        }
        if curve[0].0.abs() > 1e-12 || curve[0].1.abs() > 1e-12 {
            return Err(Error::NonMonotoneCurve);
        }
        for w in curve.windows(2) {
            let ((x0, z0), (x1, z1)) = (w[0], w[1]);
            if !(x1.is_finite() && z1.is_finite()) || x1 < x0 || z1 < z0 {
                return Err(Error::NonMonotoneCurve);
            }
        }

        // Piecewise-linear interpolation of the curve, restricted to one
        // segment during bisection.
        let x2_on = |seg: usize, x: f64| -> f64 {
            let (x0, z0) = curve[seg];
            let (x1, z1) = curve[seg + 1];
            if x1 <= x0 {
                z1
            } else {
                z0 + (z1 - z0) * ((x - x0) / (x1 - x0))
            }
        };
        let v_on = |seg: usize, x: f64| -> u64 {
            (x * g1).floor() as u64 + (x2_on(seg, x) * g2).floor() as u64
        };

        // v at every sample point; monotone.
        let v_at: Vec<u64> = curve
            .iter()
            .map(|&(x, z)| (x * g1).floor() as u64 + (z * g2).floor() as u64)
            .collect();
        let horizon = *v_at.last().unwrap();

        let mut w1: Vec<u64> = Vec::with_capacity(horizon as usize + 1);
        let mut w2: Vec<u64> = Vec::with_capacity(horizon as usize + 1);
        w1.push(0);
        w2.push(0);
        let mut seg_cursor = 0usize;
        let mut t = 1u64;
        while t <= horizon {
            // First sample with v >= t; v_at is monotone so scan forward.
            while v_at[seg_cursor + 1] < t {
                seg_cursor += 1;
            }
            let seg = seg_cursor;
            let (mut lo, mut hi) = (curve[seg].0, curve[seg + 1].0);
            // Right-continuous inverse: smallest x with v(x) >= t.
            for _ in 0..64 {
                if hi - lo <= 1e-15 * hi.max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if v_on(seg, mid) >= t {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let v_here = v_on(seg, hi);
            if v_here == t {
                w1.push((hi * g1).floor() as u64);
                w2.push((x2_on(seg, hi) * g2).floor() as u64);
            } else {
                // t skipped by a double increment: community 1 advances first.
                w1.push(w1[t as usize - 1] + 1);
                w2.push(w2[t as usize - 1]);
            }
            t += 1;
        }

        let schedule = DeterministicSchedule {
            w1,
            w2,
            zeta_samples: curve.to_vec(),
            g1,
            g2,
        };
        schedule.check()?;
        Ok(schedule)
    }

    fn check(&self) -> Result<()> {
        for t in 0..self.w1.len() {
            if self.w1[t] + self.w2[t] != t as u64 {
                return Err(Error::ScheduleConstruction(format!(
                    "w1({t}) + w2({t}) = {} != {t}",
                    self.w1[t] + self.w2[t]
                )));
            }
            if t > 0 {
                let d1 = self.w1[t] - self.w1[t - 1];
                let d2 = self.w2[t] - self.w2[t - 1];
                if d1 > 1 || d2 > 1 {
                    return Err(Error::ScheduleConstruction(format!(
                        "non-unit increment at t = {t}: ({d1}, {d2})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Last scheduled step.
    pub fn horizon(&self) -> u64 {
        (self.w1.len() - 1) as u64
    }

    /// Prescribed used count of community `i` (0-based) at step `t`.
    pub fn w(&self, i: usize, t: u64) -> u64 {
        let arr = if i == 0 { &self.w1 } else { &self.w2 };
        arr[t as usize]
    }

    pub fn used_targets(&self, t: u64) -> (u64, u64) {
        (self.w1[t as usize], self.w2[t as usize])
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.zeta_samples
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.g1, self.g2)
    }
}

/// A community-selection rule. Values are immutable and cheap to clone;
/// per-run mutable bookkeeping lives in [`StrategyState`].
#[derive(Clone, Debug)]
pub enum Strategy {
    /// Pick the community with the larger frontier, ties to community 1.
    Max,
    /// Alternate communities, deferring to the other side when the preferred
    /// frontier is empty.
    RoundRobin,
    /// Follow a deterministic schedule while feasible, then fall back to
    /// [`Strategy::Max`].
    Hybrid(Arc<DeterministicSchedule>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Max => "max",
            Strategy::RoundRobin => "roundrobin",
            Strategy::Hybrid(_) => "hybrid",
        }
    }

    pub fn begin(&self) -> StrategyState {
        StrategyState {
            strategy: self.clone(),
            t_prime: None,
        }
    }
}

/// The max rule: community 1 iff its frontier is at least as large.
pub fn max_strategy() -> Strategy {
    Strategy::Max
}

pub fn round_robin_strategy() -> Strategy {
    Strategy::RoundRobin
}

pub fn hybrid_strategy(schedule: DeterministicSchedule) -> Strategy {
    Strategy::Hybrid(Arc::new(schedule))
}

fn max_rule(obs: &ChainObs) -> Community {
    if obs.frontier[0] >= obs.frontier[1] {
        Community::One
    } else {
        Community::Two
    }
}

/// Per-run strategy state; records `T'` for the hybrid rule.
#[derive(Clone, Debug)]
pub struct StrategyState {
    strategy: Strategy,
    t_prime: Option<u64>,
}

impl StrategyState {
    /// Select the community for step `obs.t`. The engine guarantees at least
    /// one frontier is nonempty.
    pub fn select(&mut self, obs: &ChainObs) -> Community {
        match &self.strategy {
            Strategy::Max => max_rule(obs),
            Strategy::RoundRobin => {
                let preferred = if obs.t % 2 == 1 {
                    Community::One
                } else {
                    Community::Two
                };
                if obs.frontier[preferred.index()] > 0 {
                    preferred
                } else {
                    preferred.other()
                }
            }
            Strategy::Hybrid(schedule) => {
                if self.t_prime.is_none() {
                    let infeasible = obs.t > schedule.horizon()
                        || (0..2).any(|i| obs.active[i] < schedule.w(i, obs.t));
                    if infeasible {
                        self.t_prime = Some(obs.t);
                    }
                }
                if self.t_prime.is_some() {
                    return max_rule(obs);
                }
                if schedule.w(0, obs.t) > schedule.w(0, obs.t - 1) {
                    Community::One
                } else {
                    Community::Two
                }
            }
        }
    }

    /// Called by the engine when the chain halts with both frontiers empty
    /// at step `t`; a still-on-schedule hybrid records `T' = t` since the
    /// prescribed increment is no longer coverable.
    pub fn note_stop(&mut self, obs: &ChainObs) {
        if matches!(self.strategy, Strategy::Hybrid(_)) && self.t_prime.is_none() {
            self.t_prime = Some(obs.t);
        }
    }

    /// `T'` if the hybrid rule has fallen back (always `None` for other
    /// strategies).
    pub fn t_prime(&self) -> Option<u64> {
        self.t_prime
    }

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.name()
    }
}
