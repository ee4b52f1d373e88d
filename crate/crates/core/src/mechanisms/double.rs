use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{enumerate_candidates, AuctionOutcome, CandidateMatch, Mechanism, Trade};
use crate::error::Result;
use crate::netmodel::NetworkInstance;
use crate::netopt::{solve_p1_greedy, AllocationPlan};

/// Uniform clearing prices from the `k`-th order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub k: usize,
    /// Charged to every winning buyer: the `k`-th highest bid.
    pub buyer_price: f64,
    /// Paid to every winning seller: the `k`-th lowest ask.
    pub seller_price: f64,
}

/// Cross-sorted trade reduction.
///
/// Candidates with negative spread are dropped. Bids are ranked descending
/// and asks ascending (ties by request key); `k` is the largest rank at
/// which the `k`-th bid still covers the `k`-th ask. A candidate trades when
/// both its bid rank and its ask rank are below `k`; buyers pay the `k`-th
/// bid and sellers receive the `k`-th ask, so every trade has a nonnegative
/// margin and no trader sets its own price. With `k <= 1` nothing trades.
pub fn trade_reduction(candidates: &[CandidateMatch]) -> (Vec<Trade>, Option<Thresholds>) {
    let eligible: Vec<&CandidateMatch> = candidates.iter().filter(|c| c.spread >= 0.0).collect();
    let n = eligible.len();

    let mut by_bid: Vec<usize> = (0..n).collect();
    by_bid.sort_by(|&a, &b| {
        eligible[b]
            .bid
            .total_cmp(&eligible[a].bid)
            .then(eligible[a].request.cmp(&eligible[b].request))
    });
    let mut by_ask: Vec<usize> = (0..n).collect();
    by_ask.sort_by(|&a, &b| {
        eligible[a]
            .ask
            .total_cmp(&eligible[b].ask)
            .then(eligible[a].request.cmp(&eligible[b].request))
    });

    let k = (0..n)
        .take_while(|&i| eligible[by_bid[i]].bid.total_cmp(&eligible[by_ask[i]].ask) != Ordering::Less)
        .count();
    if k == 0 {
        return (Vec::new(), None);
    }
    let thresholds = Thresholds {
        k,
        buyer_price: eligible[by_bid[k - 1]].bid,
        seller_price: eligible[by_ask[k - 1]].ask,
    };
    if k == 1 {
        return (Vec::new(), Some(thresholds));
    }

    let mut bid_rank = vec![0; n];
    let mut ask_rank = vec![0; n];
    for (rank, &i) in by_bid.iter().enumerate() {
        bid_rank[i] = rank + 1;
    }
    for (rank, &i) in by_ask.iter().enumerate() {
        ask_rank[i] = rank + 1;
    }
    let mut trades: Vec<Trade> = (0..n)
        .filter(|&i| bid_rank[i] < k && ask_rank[i] < k)
        .map(|i| Trade {
            candidate: eligible[i].clone(),
            buyer_charge: thresholds.buyer_price,
            seller_payment: thresholds.seller_price,
        })
        .collect();
    trades.sort_by_key(|t| t.candidate.request);
    (trades, Some(thresholds))
}

/// Second step of the double auction on an already-solved plan.
pub fn clear_double_auction(instance: &NetworkInstance, plan: &AllocationPlan) -> Result<AuctionOutcome> {
    let candidates = enumerate_candidates(instance, plan)?;
    let (trades, thresholds) = trade_reduction(&candidates);
    Ok(AuctionOutcome::assemble(
        Mechanism::Double,
        instance,
        plan,
        trades,
        thresholds,
    ))
}

/// Two-step double auction: greedy network optimization, then trade
/// reduction over the candidate matches.
pub fn double_auction(instance: &NetworkInstance) -> Result<AuctionOutcome> {
    let plan = solve_p1_greedy(instance);
    clear_double_auction(instance, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::RequestKey;

    fn cands(pairs: &[(f64, f64)]) -> Vec<CandidateMatch> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(b, a))| CandidateMatch::new(RequestKey::new(i as u32, 1), 0, b, a))
            .collect()
    }

    #[test]
    fn three_candidates_one_trade() {
        let (trades, th) = trade_reduction(&cands(&[(4.0, 1.0), (3.0, 2.0), (2.0, 2.5)]));
        let th = th.unwrap();
        assert_eq!((th.k, th.buyer_price, th.seller_price), (2, 3.0, 2.0));
        assert_eq!(trades.len(), 1);
        assert_eq!(trades[0].candidate.request, RequestKey::new(0, 1));
        assert_eq!(trades[0].buyer_charge, 3.0);
        assert_eq!(trades[0].seller_payment, 2.0);
    }

    #[test]
    fn cross_sorted_ranks_exclude_expensive_ask() {
        let (trades, th) = trade_reduction(&cands(&[(5.0, 1.0), (4.0, 3.0), (3.0, 2.0), (2.0, 4.0)]));
        let th = th.unwrap();
        assert_eq!((th.k, th.buyer_price, th.seller_price), (3, 3.0, 3.0));
        assert_eq!(trades.len(), 1);
        assert_eq!(trades[0].candidate.bid, 5.0);
        assert_eq!(trades[0].buyer_charge - trades[0].seller_payment, 0.0);
    }

    #[test]
    fn sole_candidate_is_reduced_away() {
        let (trades, th) = trade_reduction(&cands(&[(2.0, 1.0)]));
        assert!(trades.is_empty());
        assert_eq!(th.unwrap().k, 1);
    }

    #[test]
    fn negative_spreads_never_trade() {
        let (trades, th) = trade_reduction(&cands(&[(1.0, 2.0), (0.5, 3.0)]));
        assert!(trades.is_empty());
        assert!(th.is_none());
        assert!(trade_reduction(&[]).0.is_empty());
    }
}
