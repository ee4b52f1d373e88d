use rayon::prelude::*;

use super::{AuctionOutcome, CandidateMatch, Mechanism, Trade};
use crate::netmodel::{NetworkInstance, RequestKey, SellerId};
use crate::netopt::search::{build_plan, first_fit, NetState, Topology};

/// Width below which the critical-bid bisection may stop.
pub const CRITICAL_BID_TOLERANCE: f64 = 1e-6;

const MAX_BISECTIONS: usize = 200;

/// Forward greedy auction with no reserve price.
pub fn forward_greedy(instance: &NetworkInstance) -> AuctionOutcome {
    forward_greedy_with_reserve(instance, 0.0)
}

/// Forward greedy auction over provider-owned servers.
///
/// Requests bidding at least `reserve` are placed in order of descending bid
/// (ties by request key) with the same first-fit rule as the throughput
/// heuristic. Each winner pays its critical bid: the lowest bid that would
/// still have won with everyone else unchanged, and never less than
/// `reserve`.
pub fn forward_greedy_with_reserve(instance: &NetworkInstance, reserve: f64) -> AuctionOutcome {
    let topo = Topology::new(instance);
    let bids = bids_of(&topo);
    let order = bid_order(&topo, &bids, reserve);

    let mut state = NetState::new(&topo);
    let mut placed = vec![None; topo.request_count()];
    for &req in &order {
        if let Some(opt) = first_fit(&topo, &state, req) {
            state.apply(&topo, req, &opt);
            placed[req] = Some(opt);
        }
    }

    let winners: Vec<usize> = order.iter().copied().filter(|&i| placed[i].is_some()).collect();
    let mut trades: Vec<Trade> = winners
        .par_iter()
        .map(|&w| {
            let seller = placed[w].as_ref().expect("winner is placed").seller as SellerId;
            Trade {
                candidate: CandidateMatch::new(topo.keys[w], seller, bids[w], 0.0),
                buyer_charge: critical_bid(&topo, &bids, w, reserve),
                seller_payment: 0.0,
            }
        })
        .collect();
    trades.sort_by_key(|t| t.candidate.request);
    let plan = build_plan(&topo, &state, &placed);
    AuctionOutcome::assemble(Mechanism::Greedy, instance, &plan, trades, None)
}

/// Charge of `key` under the forward greedy auction, or `None` when it
/// loses. Only the part of the greedy order up to `key` is evaluated.
pub(crate) fn forward_greedy_charge_of(
    instance: &NetworkInstance,
    key: RequestKey,
    reserve: f64,
) -> Option<f64> {
    let topo = Topology::new(instance);
    let agent = topo.keys.iter().position(|k| *k == key)?;
    let bids = bids_of(&topo);
    wins_with(&topo, &bids, agent, bids[agent], reserve).then(|| critical_bid(&topo, &bids, agent, reserve))
}

fn bids_of(topo: &Topology<'_>) -> Vec<f64> {
    topo.keys
        .iter()
        .map(|k| {
            topo.instance
                .request(*k)
                .expect("topology keys come from the instance")
                .bid
        })
        .collect()
}

fn bid_order(topo: &Topology<'_>, bids: &[f64], reserve: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).filter(|&i| bids[i] >= reserve).collect();
    order.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]).then(topo.keys[a].cmp(&topo.keys[b])));
    order
}

/// Whether `agent` is placed when it bids `bid` and the others keep theirs.
fn wins_with(topo: &Topology<'_>, bids: &[f64], agent: usize, bid: f64, reserve: f64) -> bool {
    if bid < reserve {
        return false;
    }
    let ahead = |i: usize| bids[i] > bid || (bids[i] == bid && topo.keys[i] < topo.keys[agent]);
    let mut before: Vec<usize> = (0..bids.len())
        .filter(|&i| i != agent && bids[i] >= reserve && ahead(i))
        .collect();
    before.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]).then(topo.keys[a].cmp(&topo.keys[b])));

    let mut state = NetState::new(topo);
    for req in before {
        if let Some(opt) = first_fit(topo, &state, req) {
            state.apply(topo, req, &opt);
        }
    }
    first_fit(topo, &state, agent).is_some()
}

/// Lowest winning bid for `agent`, found by bisection and snapped to the
/// breakpoint (another bid or the reserve) it converges to.
fn critical_bid(topo: &Topology<'_>, bids: &[f64], agent: usize, reserve: f64) -> f64 {
    let mut hi = bids[agent];
    let mut lo = reserve;
    if wins_with(topo, bids, agent, lo, reserve) {
        return reserve;
    }
    let mut breakpoints: Vec<f64> = (0..bids.len())
        .filter(|&i| i != agent && bids[i] >= reserve && bids[i] <= hi)
        .map(|i| bids[i])
        .chain(std::iter::once(reserve))
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let inside = |lo: f64, hi: f64| breakpoints.iter().filter(|&&p| p >= lo && p <= hi).count();
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= CRITICAL_BID_TOLERANCE && inside(lo, hi) <= 1 {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if wins_with(topo, bids, agent, mid, reserve) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    breakpoints
        .iter()
        .rev()
        .find(|&&p| p >= lo && p <= hi)
        .copied()
        .unwrap_or(hi)
}
