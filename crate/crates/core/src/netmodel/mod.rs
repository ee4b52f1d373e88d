//! Physical network and market entities.
//!
//! A [`NetworkInstance`] bundles the mesh topology (nodes, links, bands) with
//! the market (buyer requests and seller asks). Node, seller and band ids are
//! dense: the entity with id `n` sits at index `n` of its vector.

mod builder;
mod config;
mod generate;
pub(crate) mod keyed;
mod topology;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builder::InstanceBuilder;
pub use config::{Area, Interval, ScenarioConfig};
pub use generate::generate_instance;
pub use topology::{band_capacity, conflicts, derive_links, distance_m, CapacityRule};

pub type NodeId = u32;
pub type SellerId = u32;
pub type BandId = u32;

/// Identifies request `index` (1-based) of buyer `buyer_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequestKey {
    pub buyer_id: NodeId,
    pub index: u32,
}

impl RequestKey {
    pub fn new(buyer_id: NodeId, index: u32) -> Self {
        Self { buyer_id, index }
    }
}

impl fmt::Display for RequestKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.buyer_id, self.index)
    }
}

/// Directed wireless link `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkKey {
    pub from: NodeId,
    pub to: NodeId,
}

impl LinkKey {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Self { from, to }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.to, self.from)
    }
}

impl fmt::Display for LinkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    BuyerDevice,
    Relay,
    ServerHost,
}

impl NodeRole {
    /// Whether traffic of other nodes may pass through a node of this role.
    pub fn forwards(self) -> bool {
        matches!(self, NodeRole::BuyerDevice | NodeRole::Relay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub position: Position,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub id: BandId,
    pub bandwidth_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    /// Capacity contributed by each band granted to this link.
    pub per_band_capacity_mbps: f64,
}

impl Link {
    pub fn key(&self) -> LinkKey {
        LinkKey::new(self.from, self.to)
    }
}

/// End-to-end QoS requirement of one service request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosSpec {
    pub compute_ghz: f64,
    pub storage_gb: f64,
    pub rate_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequest {
    pub buyer_id: NodeId,
    pub index: u32,
    pub qos: QosSpec,
    pub bid: f64,
    /// Private valuation; equals `bid` when the buyer reports truthfully.
    pub true_value: f64,
}

impl ServiceRequest {
    pub fn key(&self) -> RequestKey {
        RequestKey::new(self.buyer_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seller {
    pub id: SellerId,
    pub host_node: NodeId,
    pub compute_capacity_ghz: f64,
    pub storage_capacity_gb: f64,
    #[serde(with = "keyed")]
    pub asks: BTreeMap<RequestKey, f64>,
    /// Private costs; same shape as `asks`.
    #[serde(with = "keyed")]
    pub true_costs: BTreeMap<RequestKey, f64>,
}

/// Fractions of a buyer's payment owed to each seller category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SplitVector {
    fractions: Vec<f64>,
}

impl SplitVector {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::Validation("split vector is empty".into()));
        }
        if let Some(bad) = fractions.iter().find(|f| !f.is_finite() || **f < 0.0) {
            return Err(Error::Validation(format!(
                "split fraction {bad} is not a nonnegative number"
            )));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "split fractions sum to {sum}, expected 1"
            )));
        }
        Ok(Self { fractions })
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }
}

impl TryFrom<Vec<f64>> for SplitVector {
    type Error = Error;

    fn try_from(fractions: Vec<f64>) -> Result<Self> {
        Self::new(fractions)
    }
}

impl From<SplitVector> for Vec<f64> {
    fn from(split: SplitVector) -> Self {
        split.fractions
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkInstance {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub bands: Vec<Band>,
    pub sellers: Vec<Seller>,
    pub requests: Vec<ServiceRequest>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "keyed")]
    pub split_vectors: BTreeMap<RequestKey, SplitVector>,
    /// Configuration the instance was generated from; also carries the
    /// interference range used by every conflict test.
    pub config: ScenarioConfig,
}

impl NetworkInstance {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id as usize).filter(|n| n.id == id)
    }

    pub fn seller(&self, id: SellerId) -> Option<&Seller> {
        self.sellers.get(id as usize).filter(|s| s.id == id)
    }

    pub fn request(&self, key: RequestKey) -> Option<&ServiceRequest> {
        self.requests.iter().find(|r| r.key() == key)
    }

    pub fn request_mut(&mut self, key: RequestKey) -> Option<&mut ServiceRequest> {
        self.requests.iter_mut().find(|r| r.key() == key)
    }

    pub fn link(&self, key: LinkKey) -> Option<&Link> {
        self.links.iter().find(|l| l.key() == key)
    }

    pub fn interference_range_m(&self) -> f64 {
        self.config.interference_range_m
    }

    /// Protocol-model conflict test between two links of this instance.
    pub fn links_conflict(&self, a: LinkKey, b: LinkKey) -> bool {
        conflicts(&self.nodes, a, b, self.interference_range_m())
    }

    /// Request keys in canonical (lexicographic) order.
    pub fn request_keys(&self) -> Vec<RequestKey> {
        let mut keys: Vec<_> = self.requests.iter().map(ServiceRequest::key).collect();
        keys.sort();
        keys
    }

    /// Buyer ids that own at least one request, ascending.
    pub fn buyer_ids(&self) -> Vec<NodeId> {
        let ids: BTreeSet<_> = self.requests.iter().map(|r| r.buyer_id).collect();
        ids.into_iter().collect()
    }

    pub fn total_requested_rate_mbps(&self) -> f64 {
        self.requests.iter().fold(0.0, |acc, r| acc + r.qos.rate_mbps)
    }

    /// Checks every structural invariant of the instance.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Instance(msg));
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id as usize != i {
                return bad(format!("node at position {i} has id {}", node.id));
            }
        }
        for (i, band) in self.bands.iter().enumerate() {
            if band.id as usize != i {
                return bad(format!("band at position {i} has id {}", band.id));
            }
            if !(band.bandwidth_mhz > 0.0) {
                return bad(format!("band {} has nonpositive bandwidth", band.id));
            }
        }
        let mut link_set = BTreeSet::new();
        for link in &self.links {
            if link.from == link.to {
                return bad(format!("self-link at node {}", link.from));
            }
            if self.node(link.from).is_none() || self.node(link.to).is_none() {
                return bad(format!("link {} references a missing node", link.key()));
            }
            if !(link.per_band_capacity_mbps >= 0.0) {
                return bad(format!("link {} has negative capacity", link.key()));
            }
            if !link_set.insert(link.key()) {
                return bad(format!("duplicate link {}", link.key()));
            }
        }
        if let Some(key) = link_set.iter().find(|k| !link_set.contains(&k.reversed())) {
            return bad(format!("link {key} has no reverse link"));
        }
        for (i, seller) in self.sellers.iter().enumerate() {
            if seller.id as usize != i {
                return bad(format!("seller at position {i} has id {}", seller.id));
            }
            match self.node(seller.host_node) {
                Some(n) if n.role == NodeRole::ServerHost => {}
                _ => {
                    return bad(format!(
                        "seller {} is not hosted on a server-host node",
                        seller.id
                    ))
                }
            }
            if !(seller.compute_capacity_ghz > 0.0 && seller.storage_capacity_gb > 0.0) {
                return bad(format!("seller {} has nonpositive capacity", seller.id));
            }
            if seller
                .asks
                .values()
                .chain(seller.true_costs.values())
                .any(|a| !(*a >= 0.0))
            {
                return bad(format!("seller {} has a negative ask or cost", seller.id));
            }
        }
        let mut keys = BTreeSet::new();
        for req in &self.requests {
            if !keys.insert(req.key()) {
                return bad(format!("duplicate request {}", req.key()));
            }
            match self.node(req.buyer_id) {
                Some(n) if n.role == NodeRole::BuyerDevice => {}
                _ => return bad(format!("request {} has no buyer-device node", req.key())),
            }
            let q = req.qos;
            if !(q.compute_ghz > 0.0 && q.storage_gb > 0.0 && q.rate_mbps > 0.0) {
                return bad(format!("request {} has a nonpositive QoS entry", req.key()));
            }
            if !(req.bid >= 0.0) {
                return bad(format!("request {} has a negative bid", req.key()));
            }
        }
        Ok(())
    }

    /// Serializes to the canonical JSON form (pretty-printed, stable order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let instance: Self = serde_json::from_str(text)?;
        instance.validate()?;
        Ok(instance)
    }
}
