use super::CandidateMatch;
use crate::error::{Error, Result};
use crate::netmodel::NetworkInstance;
use crate::netopt::AllocationPlan;

/// One candidate per assigned request, pairing its bid with the assigned
/// seller's ask toward it. Ordered by request key.
pub fn enumerate_candidates(
    instance: &NetworkInstance,
    plan: &AllocationPlan,
) -> Result<Vec<CandidateMatch>> {
    plan.assignment
        .iter()
        .map(|(key, seller_id)| {
            let req = instance
                .request(*key)
                .ok_or_else(|| Error::Structural(format!("plan assigns unknown request {key}")))?;
            let seller = instance
                .seller(*seller_id)
                .ok_or_else(|| Error::Structural(format!("plan names unknown seller {seller_id}")))?;
            let ask = seller.asks.get(key).copied().ok_or(Error::MissingAsk(*key))?;
            Ok(CandidateMatch::new(*key, *seller_id, req.bid, ask))
        })
        .collect()
}
