use super::search::{build_plan, greedy_place, order_by_score, Topology};
use super::AllocationPlan;
use crate::netmodel::NetworkInstance;

/// Greedy heuristic for the throughput-maximizing problem.
///
/// Requests are taken by descending rate (ties by ascending request key).
/// Each goes to the nearest server (by hops) with enough residual compute
/// and storage that also admits a route; the route is the shortest path
/// whose links can be granted enough conflict-free band capacity. Requests
/// that fit nowhere stay unassigned. Bids and asks are never read.
pub fn solve_p1_greedy(instance: &NetworkInstance) -> AllocationPlan {
    let topo = Topology::new(instance);
    let order = order_by_score(&topo, |i| topo.qos[i].rate_mbps);
    let (state, placed) = greedy_place(&topo, &order);
    build_plan(&topo, &state, &placed)
}
