//! Auction mechanisms cleared on top of the network optimization step.
//!
//! The double auction is two-step: a price-blind solve produces candidate
//! (request, seller) matches, then [`trade_reduction`] picks winners and
//! uniform clearing prices among them. Winners are a subset of the
//! candidates, so their QoS is met by the restricted plan. The forward
//! mechanisms treat every server as provider-owned.

mod candidates;
mod double;
mod forward_greedy;
mod split;
mod vcg;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{NetworkInstance, RequestKey, SellerId};
use crate::netopt::{check_feasibility, AllocationPlan};

pub use candidates::enumerate_candidates;
pub use double::{clear_double_auction, double_auction, trade_reduction, Thresholds};
pub(crate) use forward_greedy::forward_greedy_charge_of;
pub use forward_greedy::{forward_greedy, forward_greedy_with_reserve, CRITICAL_BID_TOLERANCE};
pub use split::split_payment;
pub use vcg::{forward_vcg, forward_vcg_with_limits};

/// Tolerance for the economic-property audits.
pub const ECONOMIC_TOLERANCE: f64 = 1e-9;

/// A (request, seller) pairing eligible for trading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMatch {
    pub request: RequestKey,
    pub seller_id: SellerId,
    pub bid: f64,
    pub ask: f64,
    /// `bid - ask`.
    pub spread: f64,
}

impl CandidateMatch {
    pub fn new(request: RequestKey, seller_id: SellerId, bid: f64, ask: f64) -> Self {
        Self {
            request,
            seller_id,
            bid,
            ask,
            spread: bid - ask,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub candidate: CandidateMatch,
    pub buyer_charge: f64,
    pub seller_payment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Vcg,
    Greedy,
    Double,
}

impl Mechanism {
    /// Runs this mechanism with its default parameters.
    pub fn run(self, instance: &NetworkInstance) -> Result<AuctionOutcome> {
        match self {
            Mechanism::Vcg => forward_vcg(instance),
            Mechanism::Greedy => Ok(forward_greedy(instance)),
            Mechanism::Double => double_auction(instance),
        }
    }

    /// Whether sellers report asks (and can be probed) under this mechanism.
    pub fn has_sellers(self) -> bool {
        self == Mechanism::Double
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Vcg => "vcg",
            Mechanism::Greedy => "greedy",
            Mechanism::Double => "double",
        })
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vcg" => Ok(Mechanism::Vcg),
            "greedy" => Ok(Mechanism::Greedy),
            "double" => Ok(Mechanism::Double),
            other => Err(Error::Validation(format!(
                "unknown mechanism `{other}` (expected vcg, greedy or double)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub mechanism: Mechanism,
    /// Winning trades in request-key order.
    pub trades: Vec<Trade>,
    /// Total buyer charges minus total seller payments.
    pub provider_revenue: f64,
    /// Uniform clearing thresholds (double auction only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    /// Plan restricted to the winners.
    pub final_plan: AllocationPlan,
    /// Requests that did not win; they pay and receive nothing.
    pub losers: Vec<RequestKey>,
}

impl AuctionOutcome {
    pub(crate) fn assemble(
        mechanism: Mechanism,
        instance: &NetworkInstance,
        plan: &AllocationPlan,
        trades: Vec<Trade>,
        thresholds: Option<Thresholds>,
    ) -> Self {
        let winners: BTreeSet<RequestKey> = trades.iter().map(|t| t.candidate.request).collect();
        let charges = trades.iter().fold(0.0, |acc, t| acc + t.buyer_charge);
        let payments = trades.iter().fold(0.0, |acc, t| acc + t.seller_payment);
        let provider_revenue = charges - payments;
        let losers = instance
            .request_keys()
            .into_iter()
            .filter(|k| !winners.contains(k))
            .collect();
        Self {
            mechanism,
            trades,
            provider_revenue,
            thresholds,
            final_plan: plan.restricted_to(&winners),
            losers,
        }
    }

    pub fn trade_for(&self, request: RequestKey) -> Option<&Trade> {
        self.trades.iter().find(|t| t.candidate.request == request)
    }

    pub fn winners(&self) -> Vec<RequestKey> {
        self.trades.iter().map(|t| t.candidate.request).collect()
    }

    /// Total rate of the winning requests.
    pub fn throughput_mbps(&self, instance: &NetworkInstance) -> f64 {
        crate::netopt::plan_throughput(&self.final_plan, instance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serialization is infallible")
    }
}

/// Result of [`audit_outcome`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeAudit {
    pub individually_rational: bool,
    pub budget_balanced: bool,
    pub qos_guaranteed: bool,
    pub problems: Vec<String>,
}

impl OutcomeAudit {
    pub fn ok(&self) -> bool {
        self.individually_rational && self.budget_balanced && self.qos_guaranteed
    }
}

/// Checks individual rationality, budget balance and the QoS guarantee of
/// an outcome against the reported bids and asks of `instance`.
pub fn audit_outcome(instance: &NetworkInstance, outcome: &AuctionOutcome) -> Result<OutcomeAudit> {
    let mut problems = Vec::new();
    let mut ir = true;
    let mut margin_ok = true;
    for t in &outcome.trades {
        let key = t.candidate.request;
        let req = instance
            .request(key)
            .ok_or_else(|| Error::Structural(format!("trade for unknown request {key}")))?;
        if t.buyer_charge > req.bid + ECONOMIC_TOLERANCE || t.buyer_charge < -ECONOMIC_TOLERANCE {
            ir = false;
            problems.push(format!(
                "buyer {key} charged {} above bid {}",
                t.buyer_charge, req.bid
            ));
        }
        let ask = if outcome.mechanism.has_sellers() {
            instance
                .seller(t.candidate.seller_id)
                .and_then(|s| s.asks.get(&key).copied())
                .ok_or(Error::MissingAsk(key))?
        } else {
            0.0
        };
        if t.seller_payment < ask - ECONOMIC_TOLERANCE {
            ir = false;
            problems.push(format!(
                "seller {} paid {} below ask {ask} for {key}",
                t.candidate.seller_id, t.seller_payment
            ));
        }
        if outcome.mechanism == Mechanism::Double && t.buyer_charge < t.seller_payment - ECONOMIC_TOLERANCE {
            margin_ok = false;
            problems.push(format!("negative margin on trade {key}"));
        }
        if outcome.final_plan.assignment.get(&key) != Some(&t.candidate.seller_id) {
            problems.push(format!(
                "winner {key} is not served by its seller in the final plan"
            ));
        }
    }
    let revenue: f64 = outcome
        .trades
        .iter()
        .map(|t| t.buyer_charge - t.seller_payment)
        .sum();
    let budget = margin_ok && outcome.provider_revenue >= -ECONOMIC_TOLERANCE;
    if !budget {
        problems.push(format!(
            "provider revenue {} is negative",
            outcome.provider_revenue
        ));
    }
    if (revenue - outcome.provider_revenue).abs() > 1e-6 {
        problems.push(format!(
            "provider revenue {} disagrees with trades ({revenue})",
            outcome.provider_revenue
        ));
    }
    let winners: BTreeSet<_> = outcome.winners().into_iter().collect();
    if outcome.losers.iter().any(|k| winners.contains(k)) {
        problems.push("a request is listed as both winner and loser".into());
    }
    let report = check_feasibility(instance, &outcome.final_plan)?;
    let served: BTreeSet<_> = outcome.final_plan.assignment.keys().copied().collect();
    let qos = report.pass && served == winners;
    if !report.pass {
        problems.push(format!("final plan infeasible: {report}"));
    }
    Ok(OutcomeAudit {
        individually_rational: ir,
        budget_balanced: budget,
        qos_guaranteed: qos,
        problems,
    })
}
