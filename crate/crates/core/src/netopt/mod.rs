//! Joint request assignment, spectrum allocation and routing.
//!
//! Solvers maximize served throughput (the sum of assigned request rates)
//! subject to the end-to-end QoS constraints audited by
//! [`check_feasibility`]. Prices never enter a solver.

pub(crate) mod exact;
mod feasibility;
mod greedy;
pub(crate) mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::netmodel::{keyed, BandId, LinkKey, NetworkInstance, NodeId, RequestKey, SellerId};

pub use exact::{solve_p1_exact, SizeLimits};
pub use feasibility::{check_feasibility, ConstraintKind, FeasibilityReport, Violation};
pub use greedy::solve_p1_greedy;

/// Absolute tolerance for every capacity comparison (Mbps, GHz, GB).
pub const CAPACITY_TOLERANCE: f64 = 1e-9;

/// Request to seller map; absent requests are unassigned.
pub type Assignment = BTreeMap<RequestKey, SellerId>;

/// Bands granted to each link.
pub type SpectrumAllocation = BTreeMap<LinkKey, BTreeSet<BandId>>;

/// Per-request flow on each link it traverses.
pub type FlowPlan = BTreeMap<RequestKey, Vec<LinkFlow>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFlow {
    pub from: NodeId,
    pub to: NodeId,
    pub rate_mbps: f64,
}

impl LinkFlow {
    pub fn link(&self) -> LinkKey {
        LinkKey::new(self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct LinkBands {
    from: NodeId,
    to: NodeId,
    bands: BTreeSet<BandId>,
}

mod spectrum_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &SpectrumAllocation, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<LinkBands> = map
            .iter()
            .map(|(k, bands)| LinkBands {
                from: k.from,
                to: k.to,
                bands: bands.clone(),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SpectrumAllocation, D::Error> {
        let entries: Vec<LinkBands> = Vec::deserialize(d)?;
        let mut map = SpectrumAllocation::new();
        for e in entries {
            let key = LinkKey::new(e.from, e.to);
            if map.insert(key, e.bands).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate spectrum entry {key}"
                )));
            }
        }
        Ok(map)
    }
}

/// A candidate solution of the joint optimization problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationPlan {
    #[serde(with = "keyed")]
    pub assignment: Assignment,
    #[serde(with = "spectrum_serde")]
    pub spectrum: SpectrumAllocation,
    #[serde(with = "keyed")]
    pub flows: FlowPlan,
    /// Node path from the buyer device to the assigned seller's host.
    #[serde(with = "keyed")]
    pub routes: BTreeMap<RequestKey, Vec<NodeId>>,
}

impl AllocationPlan {
    pub fn is_assigned(&self, key: RequestKey) -> bool {
        self.assignment.contains_key(&key)
    }

    /// The sub-plan serving only `keep`. Spectrum is kept on the links those
    /// routes use, so capacities and conflict-freeness carry over.
    pub fn restricted_to(&self, keep: &BTreeSet<RequestKey>) -> AllocationPlan {
        let assignment: Assignment = self
            .assignment
            .iter()
            .filter(|(k, _)| keep.contains(k))
            .map(|(k, v)| (*k, *v))
            .collect();
        let flows: FlowPlan = self
            .flows
            .iter()
            .filter(|(k, _)| keep.contains(k))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        let routes: BTreeMap<_, _> = self
            .routes
            .iter()
            .filter(|(k, _)| keep.contains(k))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        let used: BTreeSet<LinkKey> = routes
            .values()
            .flat_map(|path| path.windows(2).map(|w| LinkKey::new(w[0], w[1])))
            .collect();
        let spectrum = self
            .spectrum
            .iter()
            .filter(|(k, _)| used.contains(k))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        AllocationPlan {
            assignment,
            spectrum,
            flows,
            routes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization is infallible")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Objective value: total rate of the assigned requests.
pub fn plan_throughput(plan: &AllocationPlan, instance: &NetworkInstance) -> f64 {
    plan.assignment
        .keys()
        .filter_map(|k| instance.request(*k))
        .fold(0.0, |acc, r| acc + r.qos.rate_mbps)
}
