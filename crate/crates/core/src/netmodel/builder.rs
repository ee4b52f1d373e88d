use std::collections::BTreeMap;

use super::{
    derive_links, Band, CapacityRule, NetworkInstance, Node, NodeId, NodeRole, Position, QosSpec, RequestKey,
    ScenarioConfig, Seller, SellerId, ServiceRequest,
};
use crate::error::Result;

/// Hand-assembles small instances with explicit positions and prices.
///
/// Links are derived from the communication range at `build` time. Any
/// (seller, request) pair without an explicit ask gets ask and cost 0.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    nodes: Vec<Node>,
    sellers: Vec<Seller>,
    requests: Vec<ServiceRequest>,
    asks: BTreeMap<(SellerId, RequestKey), f64>,
    config: ScenarioConfig,
}

impl Default for InstanceBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl InstanceBuilder {
    pub fn new() -> Self {
        let config = ScenarioConfig {
            buyers: 0,
            requests_per_buyer: 0,
            sellers: 0,
            relays: 0,
            bands: 1,
            ..ScenarioConfig::reference()
        };
        Self {
            nodes: Vec::new(),
            sellers: Vec::new(),
            requests: Vec::new(),
            asks: BTreeMap::new(),
            config,
        }
    }

    pub fn bands(mut self, count: usize) -> Self {
        self.config.bands = count;
        self
    }

    pub fn band_bandwidth_mhz(mut self, mhz: f64) -> Self {
        self.config.band_bandwidth_mhz = mhz;
        self
    }

    pub fn spectral_efficiency(mut self, bps_per_hz: f64) -> Self {
        self.config.spectral_efficiency_bps_per_hz = bps_per_hz;
        self
    }

    pub fn communication_range_m(mut self, range: f64) -> Self {
        self.config.communication_range_m = range;
        self
    }

    pub fn interference_range_m(mut self, range: f64) -> Self {
        self.config.interference_range_m = range;
        self
    }

    fn add_node(&mut self, x_m: f64, y_m: f64, role: NodeRole) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            id,
            position: Position { x_m, y_m },
            role,
        });
        id
    }

    /// Adds a buyer device; the returned node id doubles as the buyer id.
    pub fn buyer(&mut self, x_m: f64, y_m: f64) -> NodeId {
        self.config.buyers += 1;
        self.add_node(x_m, y_m, NodeRole::BuyerDevice)
    }

    pub fn relay(&mut self, x_m: f64, y_m: f64) -> NodeId {
        self.config.relays += 1;
        self.add_node(x_m, y_m, NodeRole::Relay)
    }

    /// Adds a server host together with the seller that owns it.
    pub fn server(&mut self, x_m: f64, y_m: f64, compute_ghz: f64, storage_gb: f64) -> SellerId {
        self.config.sellers += 1;
        let host_node = self.add_node(x_m, y_m, NodeRole::ServerHost);
        let id = self.sellers.len() as SellerId;
        self.sellers.push(Seller {
            id,
            host_node,
            compute_capacity_ghz: compute_ghz,
            storage_capacity_gb: storage_gb,
            asks: BTreeMap::new(),
            true_costs: BTreeMap::new(),
        });
        id
    }

    /// Adds the buyer's next request (indices start at 1).
    pub fn request(&mut self, buyer: NodeId, qos: QosSpec, bid: f64) -> RequestKey {
        let index = self.requests.iter().filter(|r| r.buyer_id == buyer).count() as u32 + 1;
        self.requests.push(ServiceRequest {
            buyer_id: buyer,
            index,
            qos,
            bid,
            true_value: bid,
        });
        RequestKey::new(buyer, index)
    }

    /// Sets seller `seller`'s ask (and true cost) toward `request`.
    pub fn ask(&mut self, seller: SellerId, request: RequestKey, ask: f64) -> &mut Self {
        self.asks.insert((seller, request), ask);
        self
    }

    pub fn build(self) -> Result<NetworkInstance> {
        let Self {
            nodes,
            mut sellers,
            requests,
            asks,
            mut config,
        } = self;
        config.requests_per_buyer = requests
            .iter()
            .fold(BTreeMap::<NodeId, usize>::new(), |mut m, r| {
                *m.entry(r.buyer_id).or_default() += 1;
                m
            })
            .into_values()
            .max()
            .unwrap_or(0);
        config.validate()?;
        for seller in &mut sellers {
            for req in &requests {
                let key = req.key();
                let ask = asks.get(&(seller.id, key)).copied().unwrap_or(0.0);
                seller.asks.insert(key, ask);
                seller.true_costs.insert(key, ask);
            }
        }
        let links = derive_links(
            &nodes,
            config.communication_range_m,
            CapacityRule {
                band_bandwidth_mhz: config.band_bandwidth_mhz,
                spectral_efficiency_bps_per_hz: config.spectral_efficiency_bps_per_hz,
            },
        );
        let bands = (0..config.bands as u32)
            .map(|id| Band {
                id,
                bandwidth_mhz: config.band_bandwidth_mhz,
            })
            .collect();
        let mut requests = requests;
        requests.sort_by_key(ServiceRequest::key);
        let instance = NetworkInstance {
            nodes,
            links,
            bands,
            sellers,
            requests,
            split_vectors: BTreeMap::new(),
            config,
        };
        instance.validate()?;
        Ok(instance)
    }
}

impl QosSpec {
    pub fn new(compute_ghz: f64, storage_gb: f64, rate_mbps: f64) -> Self {
        Self {
            compute_ghz,
            storage_gb,
            rate_mbps,
        }
    }
}
