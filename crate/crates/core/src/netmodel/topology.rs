use super::{Band, Link, LinkKey, Node, NodeId};

/// Per-band link capacity rule: a fixed spectral efficiency applied to the
/// nominal band bandwidth, identical on every in-range link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityRule {
    pub band_bandwidth_mhz: f64,
    pub spectral_efficiency_bps_per_hz: f64,
}

impl CapacityRule {
    pub fn per_band_capacity_mbps(&self) -> f64 {
        self.band_bandwidth_mhz * self.spectral_efficiency_bps_per_hz
    }
}

/// Capacity in Mbps of one band at the given spectral efficiency.
pub fn band_capacity(band: &Band, spectral_efficiency_bps_per_hz: f64) -> f64 {
    band.bandwidth_mhz * spectral_efficiency_bps_per_hz
}

pub fn distance_m(a: &Node, b: &Node) -> f64 {
    let dx = a.position.x_m - b.position.x_m;
    let dy = a.position.y_m - b.position.y_m;
    dx.hypot(dy)
}

/// Directed links between every ordered pair of distinct nodes within
/// `communication_range_m`, sorted by `(from, to)`.
pub fn derive_links(nodes: &[Node], communication_range_m: f64, rule: CapacityRule) -> Vec<Link> {
    let capacity = rule.per_band_capacity_mbps();
    let mut links = Vec::new();
    for a in nodes {
        for b in nodes {
            if a.id != b.id && distance_m(a, b) <= communication_range_m {
                links.push(Link {
                    from: a.id,
                    to: b.id,
                    per_band_capacity_mbps: capacity,
                });
            }
        }
    }
    links.sort_by_key(Link::key);
    links
}

/// Protocol interference model: two links conflict when they share an
/// endpoint or when any endpoint of one lies within `interference_range_m`
/// of any endpoint of the other. Reflexive and symmetric.
pub fn conflicts(nodes: &[Node], a: LinkKey, b: LinkKey, interference_range_m: f64) -> bool {
    let ends_a = [a.from, a.to];
    let ends_b = [b.from, b.to];
    if ends_a.iter().any(|u| ends_b.contains(u)) {
        return true;
    }
    let pos = |id: NodeId| &nodes[id as usize];
    ends_a.iter().any(|&u| {
        ends_b
            .iter()
            .any(|&v| distance_m(pos(u), pos(v)) <= interference_range_m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{NodeRole, Position};

    fn node(id: NodeId, x: f64, y: f64) -> Node {
        Node {
            id,
            position: Position { x_m: x, y_m: y },
            role: NodeRole::Relay,
        }
    }

    const RULE: CapacityRule = CapacityRule {
        band_bandwidth_mhz: 10.0,
        spectral_efficiency_bps_per_hz: 1.0,
    };

    #[test]
    fn links_within_range() {
        let nodes = [node(0, 0.0, 0.0), node(1, 100.0, 0.0)];
        let links = derive_links(&nodes, 250.0, RULE);
        let keys: Vec<_> = links.iter().map(Link::key).collect();
        assert_eq!(keys, vec![LinkKey::new(0, 1), LinkKey::new(1, 0)]);
        assert!(links.iter().all(|l| l.per_band_capacity_mbps == 10.0));
    }

    #[test]
    fn no_link_beyond_range() {
        let nodes = [node(0, 0.0, 0.0), node(1, 300.0, 0.0)];
        assert!(derive_links(&nodes, 250.0, RULE).is_empty());
    }

    #[test]
    fn single_node_has_no_links() {
        assert!(derive_links(&[node(0, 5.0, 5.0)], 250.0, RULE).is_empty());
    }

    #[test]
    fn zero_range_disconnects_everything() {
        let nodes = [node(0, 0.0, 0.0), node(1, 1.0, 0.0), node(2, 0.0, 1.0)];
        assert!(derive_links(&nodes, 0.0, RULE).is_empty());
    }

    #[test]
    fn band_capacity_is_bandwidth_times_efficiency() {
        let band = Band {
            id: 0,
            bandwidth_mhz: 10.0,
        };
        assert_eq!(band_capacity(&band, 1.0), 10.0);
        assert_eq!(band_capacity(&band, 0.5), 5.0);
        assert_eq!(band_capacity(&band, 0.0), 0.0);
    }

    #[test]
    fn conflict_cases() {
        let nodes = [
            node(0, 0.0, 0.0),
            node(1, 200.0, 0.0),
            node(2, 400.0, 0.0),
            node(3, 2000.0, 0.0),
            node(4, 2200.0, 0.0),
        ];
        let a = LinkKey::new(0, 1);
        let b = LinkKey::new(1, 2);
        let far = LinkKey::new(3, 4);
        assert!(conflicts(&nodes, a, b, 500.0), "shared endpoint");
        assert!(!conflicts(&nodes, a, far, 500.0), "far apart");
        assert!(conflicts(&nodes, a, a, 500.0), "reflexive");
        assert!(conflicts(&nodes, a, a.reversed(), 0.0));
        // Distance-only conflict: nearest endpoints (1 and 2) are 200 m apart.
        assert!(conflicts(&nodes, LinkKey::new(0, 1), LinkKey::new(2, 3), 250.0));
        assert!(!conflicts(&nodes, LinkKey::new(0, 1), LinkKey::new(2, 3), 150.0));
    }
}
