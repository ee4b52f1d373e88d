use serde::{Deserialize, Serialize};

use super::search::{all_routes, build_plan, NetState, RouteOption, StateMemo, Topology};
use super::AllocationPlan;
use crate::error::{Error, Result};
use crate::netmodel::NetworkInstance;

/// Instance-size ceiling for the exhaustive solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLimits {
    pub max_requests: usize,
    pub max_sellers: usize,
    pub max_bands: usize,
    pub max_nodes: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        Self {
            max_requests: 8,
            max_sellers: 3,
            max_bands: 4,
            max_nodes: 10,
        }
    }
}

impl SizeLimits {
    pub fn check(&self, instance: &NetworkInstance) -> Result<()> {
        let checks = [
            ("requests", instance.requests.len(), self.max_requests),
            ("sellers", instance.sellers.len(), self.max_sellers),
            ("bands", instance.bands.len(), self.max_bands),
            ("nodes", instance.nodes.len(), self.max_nodes),
        ];
        for (what, actual, limit) in checks {
            if actual > limit {
                return Err(Error::SizeLimit { what, actual, limit });
            }
        }
        Ok(())
    }
}

const MEMO_CAPACITY: usize = 1 << 21;

pub(crate) struct ExactSolution {
    pub value: f64,
    pub placed: Vec<Option<RouteOption>>,
    pub state: NetState,
}

struct BranchAndBound<'t, 'a> {
    topo: &'t Topology<'a>,
    weights: &'t [f64],
    active: &'t [bool],
    /// `suffix[d]` = total weight of active requests at positions >= d.
    suffix: Vec<f64>,
    state: NetState,
    current: Vec<Option<RouteOption>>,
    best: Option<ExactSolution>,
    memo: StateMemo,
}

impl BranchAndBound<'_, '_> {
    fn dfs(&mut self, depth: usize, value: f64) {
        let n = self.topo.request_count();
        if depth == n {
            if self.best.as_ref().is_none_or(|b| value > b.value) {
                self.best = Some(ExactSolution {
                    value,
                    placed: self.current.clone(),
                    state: self.state.clone(),
                });
            }
            return;
        }
        if let Some(best) = &self.best {
            if value + self.suffix[depth] <= best.value {
                return;
            }
        }
        if self.memo.dominated(depth, &self.state, value) {
            return;
        }
        if self.active[depth] {
            for seller in 0..self.topo.seller_count() {
                for opt in all_routes(self.topo, &self.state, depth, seller) {
                    let applied = self.state.apply(self.topo, depth, &opt);
                    self.current[depth] = Some(opt);
                    self.dfs(depth + 1, value + self.weights[depth]);
                    let opt = self.current[depth].take().expect("set above");
                    self.state.undo(&opt, applied);
                }
            }
        }
        self.dfs(depth + 1, value);
    }
}

/// Maximizes the total weight of served active requests by depth-first
/// branch and bound over assignments, simple paths and band placements.
///
/// Requests are branched in key order, sellers by ascending id before
/// "unassigned"; the first optimum found is kept, which makes the result the
/// lexicographically smallest optimal assignment under that ordering.
pub(crate) fn maximize(topo: &Topology<'_>, weights: &[f64], active: &[bool]) -> ExactSolution {
    let n = topo.request_count();
    let mut suffix = vec![0.0; n + 1];
    for d in (0..n).rev() {
        suffix[d] = suffix[d + 1] + if active[d] { weights[d].max(0.0) } else { 0.0 };
    }
    let mut bb = BranchAndBound {
        topo,
        weights,
        active,
        suffix,
        state: NetState::new(topo),
        current: vec![None; n],
        best: None,
        memo: StateMemo::new(MEMO_CAPACITY),
    };
    bb.dfs(0, 0.0);
    bb.best.expect("the empty assignment is always reached")
}

/// Exact throughput maximizer for instances within `limits`.
pub fn solve_p1_exact(instance: &NetworkInstance, limits: SizeLimits) -> Result<AllocationPlan> {
    limits.check(instance)?;
    let topo = Topology::new(instance);
    let weights: Vec<f64> = topo.qos.iter().map(|q| q.rate_mbps).collect();
    let active = vec![true; topo.request_count()];
    let best = maximize(&topo, &weights, &active);
    Ok(build_plan(&topo, &best.state, &best.placed))
}
