//! Independent audit of an [`AllocationPlan`] against an instance.
//!
//! Shares no code with the solvers: it recomputes link loads, capacities and
//! conflicts from the raw instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AllocationPlan, CAPACITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::netmodel::{LinkKey, NetworkInstance, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// Route does not connect buyer to server through forwarding nodes.
    Route,
    FlowConservation,
    RateSatisfaction,
    LinkCapacity,
    BandConflict,
    ComputeCapacity,
    StorageCapacity,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstraintKind::Route => "route",
            ConstraintKind::FlowConservation => "flow-conservation",
            ConstraintKind::RateSatisfaction => "rate-satisfaction",
            ConstraintKind::LinkCapacity => "link-capacity",
            ConstraintKind::BandConflict => "band-conflict",
            ConstraintKind::ComputeCapacity => "compute-capacity",
            ConstraintKind::StorageCapacity => "storage-capacity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub entity: String,
    /// Capacity minus demand; negative for capacity-type violations.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            pass: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ConstraintKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            return writeln!(f, "feasible");
        }
        writeln!(f, "infeasible: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {:<18} {:<28} slack {:.9}", v.kind, v.entity, v.slack)?;
        }
        Ok(())
    }
}

fn structural(msg: String) -> Error {
    Error::Structural(msg)
}

/// Audits `plan`: route validity, flow conservation, rate satisfaction,
/// link capacity, band conflicts and server compute/storage limits.
///
/// References to requests, sellers, links, bands or nodes missing from the
/// instance are reported as [`Error::Structural`], not as violations.
pub fn check_feasibility(instance: &NetworkInstance, plan: &AllocationPlan) -> Result<FeasibilityReport> {
    let link_set: BTreeMap<LinkKey, f64> = instance
        .links
        .iter()
        .map(|l| (l.key(), l.per_band_capacity_mbps))
        .collect();

    // Structural pass.
    for (key, seller) in &plan.assignment {
        instance
            .request(*key)
            .ok_or_else(|| structural(format!("assignment names unknown request {key}")))?;
        instance
            .seller(*seller)
            .ok_or_else(|| structural(format!("request {key} assigned to unknown seller {seller}")))?;
    }
    for (key, path) in &plan.routes {
        instance
            .request(*key)
            .ok_or_else(|| structural(format!("route for unknown request {key}")))?;
        if let Some(n) = path.iter().find(|n| instance.node(**n).is_none()) {
            return Err(structural(format!("route of {key} visits unknown node {n}")));
        }
    }
    for (key, flows) in &plan.flows {
        instance
            .request(*key)
            .ok_or_else(|| structural(format!("flows for unknown request {key}")))?;
        if let Some(f) = flows.iter().find(|f| !link_set.contains_key(&f.link())) {
            return Err(structural(format!("flow of {key} on unknown link {}", f.link())));
        }
    }
    for (link, bands) in &plan.spectrum {
        if !link_set.contains_key(link) {
            return Err(structural(format!("spectrum on unknown link {link}")));
        }
        if let Some(b) = bands.iter().find(|b| **b as usize >= instance.bands.len()) {
            return Err(structural(format!("link {link} holds unknown band {b}")));
        }
    }

    let mut violations = Vec::new();
    let mut push = |kind, entity: String, slack: f64| violations.push(Violation { kind, entity, slack });

    // Requests carrying routes or flows must be assigned.
    for key in plan.routes.keys().chain(plan.flows.keys()) {
        if !plan.assignment.contains_key(key) {
            push(ConstraintKind::Route, format!("request {key} (unassigned)"), 0.0);
        }
    }

    // (route, a, b) per assigned request.
    for (key, seller_id) in &plan.assignment {
        let req = instance.request(*key).expect("checked above");
        let host = instance.seller(*seller_id).expect("checked above").host_node;
        let entity = format!("request {key}");
        let Some(path) = plan.routes.get(key) else {
            push(ConstraintKind::Route, entity.clone(), 0.0);
            push(ConstraintKind::RateSatisfaction, entity, -req.qos.rate_mbps);
            continue;
        };
        let mut route_ok = path.len() >= 2
            && path[0] == req.buyer_id
            && *path.last().unwrap() == host
            && path.iter().collect::<BTreeSet<_>>().len() == path.len();
        if route_ok {
            route_ok = path[1..path.len() - 1]
                .iter()
                .all(|n| instance.node(*n).map(|n| n.role.forwards()).unwrap_or(false))
                && path
                    .windows(2)
                    .all(|w| link_set.contains_key(&LinkKey::new(w[0], w[1])));
        }
        if !route_ok {
            push(ConstraintKind::Route, entity.clone(), 0.0);
        }

        // Net outflow per node.
        let flows = plan.flows.get(key).map(Vec::as_slice).unwrap_or(&[]);
        let mut net: BTreeMap<NodeId, f64> = BTreeMap::new();
        let route_links: BTreeSet<LinkKey> = path.windows(2).map(|w| LinkKey::new(w[0], w[1])).collect();
        let mut off_route = false;
        for f in flows {
            if f.rate_mbps < 0.0 || !f.rate_mbps.is_finite() {
                push(
                    ConstraintKind::FlowConservation,
                    format!("{entity} on {}", f.link()),
                    f.rate_mbps,
                );
            }
            if !route_links.contains(&f.link()) && f.rate_mbps > 0.0 {
                off_route = true;
            }
            *net.entry(f.from).or_default() += f.rate_mbps;
            *net.entry(f.to).or_default() -= f.rate_mbps;
        }
        if off_route {
            push(
                ConstraintKind::FlowConservation,
                format!("{entity} (flow off route)"),
                0.0,
            );
        }
        let source = path.first().copied().unwrap_or(req.buyer_id);
        let sink = path.last().copied().unwrap_or(host);
        for (node, balance) in &net {
            if *node != source && *node != sink && balance.abs() > CAPACITY_TOLERANCE {
                push(
                    ConstraintKind::FlowConservation,
                    format!("{entity} at node {node}"),
                    -balance.abs(),
                );
            }
        }
        let delivered = -net.get(&sink).copied().unwrap_or(0.0);
        let emitted = net.get(&source).copied().unwrap_or(0.0);
        if (delivered - emitted).abs() > CAPACITY_TOLERANCE {
            push(
                ConstraintKind::FlowConservation,
                format!("{entity} source/sink"),
                -(delivered - emitted).abs(),
            );
        }
        let slack = delivered - req.qos.rate_mbps;
        if slack < -CAPACITY_TOLERANCE {
            push(ConstraintKind::RateSatisfaction, entity, slack);
        }
    }

    // (c) link capacity.
    let mut load: BTreeMap<LinkKey, f64> = BTreeMap::new();
    for flows in plan.flows.values() {
        for f in flows {
            *load.entry(f.link()).or_default() += f.rate_mbps;
        }
    }
    for (link, used) in &load {
        let bands = plan.spectrum.get(link).map(BTreeSet::len).unwrap_or(0);
        let capacity = bands as f64 * link_set[link];
        let slack = capacity - used;
        if slack < -CAPACITY_TOLERANCE {
            push(ConstraintKind::LinkCapacity, format!("link {link}"), slack);
        }
    }

    // (d) no band on two conflicting links.
    let granted: Vec<(&LinkKey, &BTreeSet<u32>)> =
        plan.spectrum.iter().filter(|(_, b)| !b.is_empty()).collect();
    for (i, (a, bands_a)) in granted.iter().enumerate() {
        for (b, bands_b) in &granted[i + 1..] {
            if !instance.links_conflict(**a, **b) {
                continue;
            }
            for band in bands_a.intersection(bands_b) {
                push(
                    ConstraintKind::BandConflict,
                    format!("links {a} & {b} band {band}"),
                    -1.0,
                );
            }
        }
    }

    // (e) server compute and storage.
    let mut compute: BTreeMap<u32, f64> = BTreeMap::new();
    let mut storage: BTreeMap<u32, f64> = BTreeMap::new();
    for (key, seller) in &plan.assignment {
        let req = instance.request(*key).expect("checked above");
        *compute.entry(*seller).or_default() += req.qos.compute_ghz;
        *storage.entry(*seller).or_default() += req.qos.storage_gb;
    }
    for (seller, used) in &compute {
        let slack = instance.sellers[*seller as usize].compute_capacity_ghz - used;
        if slack < -CAPACITY_TOLERANCE {
            push(ConstraintKind::ComputeCapacity, format!("seller {seller}"), slack);
        }
    }
    for (seller, used) in &storage {
        let slack = instance.sellers[*seller as usize].storage_capacity_gb - used;
        if slack < -CAPACITY_TOLERANCE {
            push(ConstraintKind::StorageCapacity, format!("seller {seller}"), slack);
        }
    }

    Ok(FeasibilityReport::from_violations(violations))
}
