use super::{AuctionOutcome, CandidateMatch, Mechanism, Trade};
use crate::error::Result;
use crate::netmodel::{NetworkInstance, SellerId};
use crate::netopt::exact::maximize;
use crate::netopt::search::{build_plan, Topology};
use crate::netopt::SizeLimits;

/// Forward VCG auction over provider-owned resources.
///
/// Winners maximize the sum of winning bids over all feasible plans (exact
/// search). Each winner pays the welfare the others would reach without it
/// minus the welfare the others get in the chosen plan. Refuses instances
/// beyond the exact solver's default limits.
pub fn forward_vcg(instance: &NetworkInstance) -> Result<AuctionOutcome> {
    forward_vcg_with_limits(instance, SizeLimits::default())
}

pub fn forward_vcg_with_limits(instance: &NetworkInstance, limits: SizeLimits) -> Result<AuctionOutcome> {
    limits.check(instance)?;
    let topo = Topology::new(instance);
    let n = topo.request_count();
    let bids: Vec<f64> = topo
        .keys
        .iter()
        .map(|k| {
            instance
                .request(*k)
                .expect("topology keys come from the instance")
                .bid
        })
        .collect();
    let all = vec![true; n];
    let best = maximize(&topo, &bids, &all);
    let winners: Vec<usize> = (0..n).filter(|&i| best.placed[i].is_some()).collect();

    let mut trades = Vec::with_capacity(winners.len());
    for &w in &winners {
        let mut without = all.clone();
        without[w] = false;
        let others_best = maximize(&topo, &bids, &without).value;
        let others_chosen: f64 = winners.iter().filter(|&&i| i != w).map(|&i| bids[i]).sum();
        let charge = (others_best - others_chosen).clamp(0.0, bids[w]);
        let seller = best.placed[w].as_ref().expect("winner is placed").seller as SellerId;
        trades.push(Trade {
            candidate: CandidateMatch::new(topo.keys[w], seller, bids[w], 0.0),
            buyer_charge: charge,
            seller_payment: 0.0,
        });
    }
    let plan = build_plan(&topo, &best.state, &best.placed);
    Ok(AuctionOutcome::assemble(
        Mechanism::Vcg,
        instance,
        &plan,
        trades,
        None,
    ))
}
