#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use svcauction_core::mechanisms::{forward_greedy, AuctionOutcome};
use svcauction_core::{
    generate_instance, NetworkInstance, NodeRole, RequestKey, ScenarioConfig, ServiceRequest,
};

pub const TOL: f64 = 1e-9;

/// Small random market that both the exact solver and the brute-force
/// oracle handle quickly. The band count cycles through 1..=4.
pub fn oracle_instance(seed: u64) -> NetworkInstance {
    let config = ScenarioConfig {
        buyers: 3,
        sellers: 2,
        relays: 1,
        ..ScenarioConfig::tiny()
    }
    .with_bands(1 + (seed % 4) as usize)
    .with_seed(seed);
    generate_instance(&config).unwrap()
}

fn dist(inst: &NetworkInstance, a: u32, b: u32) -> f64 {
    let p = inst.nodes[a as usize].position;
    let q = inst.nodes[b as usize].position;
    ((p.x_m - q.x_m).powi(2) + (p.y_m - q.y_m).powi(2)).sqrt()
}

fn conflict(inst: &NetworkInstance, a: (u32, u32), b: (u32, u32)) -> bool {
    let range = inst.config.interference_range_m;
    let ends_a = [a.0, a.1];
    let ends_b = [b.0, b.1];
    ends_a
        .iter()
        .any(|&u| ends_b.iter().any(|&v| u == v || dist(inst, u, v) <= range))
}

/// Simple paths from `src` to `dst` over the instance's links whose
/// intermediate nodes are buyer devices or relays.
fn simple_paths(inst: &NetworkInstance, src: u32, dst: u32) -> Vec<Vec<u32>> {
    fn rec(inst: &NetworkInstance, path: &mut Vec<u32>, dst: u32, out: &mut Vec<Vec<u32>>) {
        let at = *path.last().unwrap();
        if at == dst {
            out.push(path.clone());
            return;
        }
        if path.len() > 1 && inst.nodes[at as usize].role == NodeRole::ServerHost {
            return;
        }
        for l in inst.links.iter().filter(|l| l.from == at) {
            if !path.contains(&l.to) {
                path.push(l.to);
                rec(inst, path, dst, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(inst, &mut vec![src], dst, &mut out);
    out
}

/// Whether each link can get `demand` bands out of `bands` with no band on
/// two conflicting links.
fn colorable(inst: &NetworkInstance, demand: &[((u32, u32), usize)], bands: usize) -> bool {
    fn rec(
        inst: &NetworkInstance,
        demand: &[((u32, u32), usize)],
        i: usize,
        bands: usize,
        chosen: &mut Vec<u64>,
    ) -> bool {
        if i == demand.len() {
            return true;
        }
        let (link, need) = demand[i];
        let mut banned = 0u64;
        for (j, mask) in chosen.iter().enumerate() {
            if conflict(inst, demand[j].0, link) {
                banned |= mask;
            }
        }
        for mask in 0u64..(1 << bands) {
            if mask.count_ones() as usize == need && mask & banned == 0 {
                chosen.push(mask);
                if rec(inst, demand, i + 1, bands, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(inst, demand, 0, bands, &mut Vec::new())
}

/// Optimal served throughput by exhaustive enumeration of assignments,
/// paths and band colorings.
pub fn brute_force_optimum(inst: &NetworkInstance) -> f64 {
    brute_force_max(inst, |r| r.qos.rate_mbps, None)
}

/// Maximum total `weight` over feasible sets of served requests, with
/// `excluded` never served.
pub fn brute_force_max(
    inst: &NetworkInstance,
    weight: impl Fn(&ServiceRequest) -> f64,
    excluded: Option<RequestKey>,
) -> f64 {
    let mut reqs = inst.requests.clone();
    reqs.retain(|r| Some(r.key()) != excluded);
    reqs.sort_by_key(|r| r.key());
    let weights: Vec<f64> = reqs.iter().map(&weight).collect();
    let paths: Vec<Vec<Vec<Vec<u32>>>> = reqs
        .iter()
        .map(|r| {
            inst.sellers
                .iter()
                .map(|s| simple_paths(inst, r.buyer_id, s.host_node))
                .collect()
        })
        .collect();
    let cap: HashMap<(u32, u32), f64> = inst
        .links
        .iter()
        .map(|l| ((l.from, l.to), l.per_band_capacity_mbps))
        .collect();

    let mut best = 0.0f64;
    let mut choice: Vec<Option<(usize, usize)>> = vec![None; reqs.len()];
    fn feasible(
        inst: &NetworkInstance,
        reqs: &[ServiceRequest],
        paths: &[Vec<Vec<Vec<u32>>>],
        cap: &HashMap<(u32, u32), f64>,
        choice: &[Option<(usize, usize)>],
    ) -> bool {
        let mut compute = vec![0.0; inst.sellers.len()];
        let mut storage = vec![0.0; inst.sellers.len()];
        let mut load: BTreeMap<(u32, u32), f64> = Default::default();
        for (i, (r, c)) in reqs.iter().zip(choice).enumerate() {
            let Some((s, p)) = c else { continue };
            compute[*s] += r.qos.compute_ghz;
            storage[*s] += r.qos.storage_gb;
            for w in paths[i][*s][*p].windows(2) {
                *load.entry((w[0], w[1])).or_insert(0.0) += r.qos.rate_mbps;
            }
        }
        for (j, s) in inst.sellers.iter().enumerate() {
            if compute[j] > s.compute_capacity_ghz + TOL || storage[j] > s.storage_capacity_gb + TOL {
                return false;
            }
        }
        let mut demand = Vec::new();
        for (link, l) in load {
            let c = cap[&link];
            if c <= 0.0 {
                return false;
            }
            let need = ((l - TOL) / c).ceil().max(0.0) as usize;
            if need > inst.bands.len() {
                return false;
            }
            demand.push((link, need));
        }
        colorable(inst, &demand, inst.bands.len())
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        inst: &NetworkInstance,
        reqs: &[ServiceRequest],
        weights: &[f64],
        paths: &[Vec<Vec<Vec<u32>>>],
        cap: &HashMap<(u32, u32), f64>,
        i: usize,
        value: f64,
        choice: &mut Vec<Option<(usize, usize)>>,
        best: &mut f64,
    ) {
        if !feasible(inst, reqs, paths, cap, choice) {
            return;
        }
        if i == reqs.len() {
            *best = best.max(value);
            return;
        }
        let rest: f64 = weights[i..].iter().sum();
        if value + rest <= *best {
            return;
        }
        for s in 0..inst.sellers.len() {
            for p in 0..paths[i][s].len() {
                choice[i] = Some((s, p));
                rec(
                    inst,
                    reqs,
                    weights,
                    paths,
                    cap,
                    i + 1,
                    value + weights[i],
                    choice,
                    best,
                );
            }
        }
        choice[i] = None;
        rec(inst, reqs, weights, paths, cap, i + 1, value, choice, best);
    }
    rec(
        inst,
        &reqs,
        &weights,
        &paths,
        &cap,
        0,
        0.0,
        &mut choice,
        &mut best,
    );
    best
}

pub fn with_bid(inst: &NetworkInstance, key: RequestKey, bid: f64) -> NetworkInstance {
    let mut inst = inst.clone();
    inst.request_mut(key).unwrap().bid = bid;
    inst
}

fn wins(out: &AuctionOutcome, key: RequestKey) -> bool {
    out.trade_for(key).is_some()
}

/// Critical bid by scanning the other bids: the smallest breakpoint above
/// which the agent keeps winning.
pub fn threshold_scan(inst: &NetworkInstance, key: RequestKey) -> f64 {
    let own = inst.request(key).unwrap().bid;
    let mut points: Vec<f64> = inst
        .requests
        .iter()
        .filter(|r| r.key() != key && r.bid < own)
        .map(|r| r.bid)
        .chain([0.0, own])
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    if wins(&forward_greedy(&with_bid(inst, key, 0.0)), key) {
        return 0.0;
    }
    let mut threshold = own;
    for w in points.windows(2).rev() {
        let probe = (w[0] + w[1]) / 2.0;
        if wins(&forward_greedy(&with_bid(inst, key, probe)), key) {
            threshold = w[0];
        } else {
            break;
        }
    }
    threshold
}
