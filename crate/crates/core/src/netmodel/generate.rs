use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    derive_links, Band, CapacityRule, Interval, NetworkInstance, Node, NodeId, NodeRole, Position, QosSpec,
    RequestKey, ScenarioConfig, Seller, ServiceRequest,
};
use crate::error::Result;

fn draw(rng: &mut ChaCha8Rng, iv: Interval) -> f64 {
    rng.gen_range(iv.low..=iv.high)
}

/// Draws a random market instance from `config`.
///
/// Node ids are laid out as buyers, then relays, then server hosts; seller
/// `j` lives on the `j`-th server host. Bands are not drawn from the RNG, so
/// two configs differing only in `bands` share every random draw.
pub fn generate_instance(config: &ScenarioConfig) -> Result<NetworkInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let roles = std::iter::repeat_n(NodeRole::BuyerDevice, config.buyers)
        .chain(std::iter::repeat_n(NodeRole::Relay, config.relays))
        .chain(std::iter::repeat_n(NodeRole::ServerHost, config.sellers));
    let mut nodes = Vec::new();
    for (id, role) in roles.enumerate() {
        let x_m = draw(&mut rng, Interval::new(0.0, config.area.width_m));
        let y_m = draw(&mut rng, Interval::new(0.0, config.area.height_m));
        nodes.push(Node {
            id: id as NodeId,
            position: Position { x_m, y_m },
            role,
        });
    }

    let server_base = (config.buyers + config.relays) as NodeId;
    let mut sellers: Vec<Seller> = (0..config.sellers)
        .map(|j| Seller {
            id: j as u32,
            host_node: server_base + j as NodeId,
            compute_capacity_ghz: draw(&mut rng, config.server_compute_ghz),
            storage_capacity_gb: draw(&mut rng, config.server_storage_gb),
            asks: BTreeMap::new(),
            true_costs: BTreeMap::new(),
        })
        .collect();

    let mut requests = Vec::new();
    for buyer in 0..config.buyers as NodeId {
        for index in 1..=config.requests_per_buyer as u32 {
            let qos = QosSpec {
                rate_mbps: draw(&mut rng, config.rate_mbps),
                compute_ghz: draw(&mut rng, config.compute_ghz),
                storage_gb: draw(&mut rng, config.storage_gb),
            };
            let bid = draw(&mut rng, config.bid);
            requests.push(ServiceRequest {
                buyer_id: buyer,
                index,
                qos,
                bid,
                true_value: bid,
            });
        }
    }

    for seller in &mut sellers {
        for req in &requests {
            let ask = draw(&mut rng, config.ask);
            let key = RequestKey::new(req.buyer_id, req.index);
            seller.asks.insert(key, ask);
            seller.true_costs.insert(key, ask);
        }
    }

    let bands = (0..config.bands as u32)
        .map(|id| Band {
            id,
            bandwidth_mhz: config.band_bandwidth_mhz,
        })
        .collect();
    let links = derive_links(
        &nodes,
        config.communication_range_m,
        CapacityRule {
            band_bandwidth_mhz: config.band_bandwidth_mhz,
            spectral_efficiency_bps_per_hz: config.spectral_efficiency_bps_per_hz,
        },
    );

    Ok(NetworkInstance {
        nodes,
        links,
        bands,
        sellers,
        requests,
        split_vectors: BTreeMap::new(),
        config: config.clone(),
    })
}
