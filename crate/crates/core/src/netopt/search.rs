//! Incremental network state and route/band search shared by the solvers.
//!
//! A request is served over one simple path from its buyer device to a
//! server host. Every link of the path must carry the full rate: existing
//! band capacity on the link is reused first, and the shortfall is covered
//! by the smallest number of extra bands that are free on the link, not held
//! by any conflicting link, and not picked for a conflicting link of the same
//! path. Enumerating every such minimal choice is complete: any feasible
//! final allocation can be reached by a sequence of these steps. Bands that
//! no link holds yet are interchangeable, so the exhaustive search only
//! tries the lowest-numbered ones among them.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{AllocationPlan, LinkFlow, CAPACITY_TOLERANCE};
use crate::netmodel::{LinkKey, NetworkInstance, NodeId, QosSpec, RequestKey, SellerId};

/// Read-only, bid-independent view of an instance's topology.
pub(crate) struct Topology<'a> {
    pub instance: &'a NetworkInstance,
    pub links: Vec<LinkKey>,
    pub per_band_capacity: Vec<f64>,
    out_links: Vec<Vec<usize>>,
    /// Conflicting links of each link, itself excluded.
    conflicts: Vec<Vec<usize>>,
    conflict_bits: Vec<Vec<u64>>,
    forwards: Vec<bool>,
    /// Hop distance from each node to each seller's host (`u32::MAX` when
    /// unreachable).
    dist_to_seller: Vec<Vec<u32>>,
    pub band_count: usize,
    /// Request keys in canonical order; solvers index requests by position.
    pub keys: Vec<RequestKey>,
    pub qos: Vec<QosSpec>,
    pub sources: Vec<NodeId>,
}

const UNREACHABLE: u32 = u32::MAX;

impl<'a> Topology<'a> {
    pub fn new(instance: &'a NetworkInstance) -> Self {
        let n = instance.nodes.len();
        let links: Vec<LinkKey> = instance.links.iter().map(|l| l.key()).collect();
        let per_band_capacity = instance.links.iter().map(|l| l.per_band_capacity_mbps).collect();
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            out_links[l.from as usize].push(i);
            in_links[l.to as usize].push(i);
        }
        for out in &mut out_links {
            out.sort_by_key(|&i| links[i].to);
        }
        let words = links.len().div_ceil(64).max(1);
        let mut conflicts = vec![Vec::new(); links.len()];
        let mut conflict_bits = vec![vec![0u64; words]; links.len()];
        for a in 0..links.len() {
            for b in (a + 1)..links.len() {
                if instance.links_conflict(links[a], links[b]) {
                    conflicts[a].push(b);
                    conflicts[b].push(a);
                    conflict_bits[a][b / 64] |= 1 << (b % 64);
                    conflict_bits[b][a / 64] |= 1 << (a % 64);
                }
            }
        }
        let forwards: Vec<bool> = instance.nodes.iter().map(|n| n.role.forwards()).collect();

        let dist_to_seller = instance
            .sellers
            .iter()
            .map(|s| {
                let mut dist = vec![UNREACHABLE; n];
                let host = s.host_node as usize;
                dist[host] = 0;
                let mut queue = VecDeque::from([host]);
                while let Some(u) = queue.pop_front() {
                    if u != host && !forwards[u] {
                        continue;
                    }
                    for &li in &in_links[u] {
                        let w = links[li].from as usize;
                        if dist[w] == UNREACHABLE {
                            dist[w] = dist[u] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                dist
            })
            .collect();

        let mut reqs: Vec<_> = instance.requests.iter().collect();
        reqs.sort_by_key(|r| r.key());
        Topology {
            instance,
            links,
            per_band_capacity,
            out_links,
            conflicts,
            conflict_bits,
            forwards,
            dist_to_seller,
            band_count: instance.bands.len(),
            keys: reqs.iter().map(|r| r.key()).collect(),
            qos: reqs.iter().map(|r| r.qos).collect(),
            sources: reqs.iter().map(|r| r.buyer_id).collect(),
        }
    }

    pub fn request_count(&self) -> usize {
        self.keys.len()
    }

    pub fn seller_count(&self) -> usize {
        self.instance.sellers.len()
    }

    fn all_bands(&self) -> u64 {
        if self.band_count >= 64 {
            u64::MAX
        } else {
            (1u64 << self.band_count) - 1
        }
    }

    fn links_conflict(&self, a: usize, b: usize) -> bool {
        self.conflict_bits[a][b / 64] & (1 << (b % 64)) != 0
    }

    /// Hops from request `req`'s buyer to seller `seller`'s host.
    pub fn hop_distance(&self, req: usize, seller: usize) -> Option<u32> {
        let d = self.dist_to_seller[seller][self.sources[req] as usize];
        (d != UNREACHABLE).then_some(d)
    }

    /// Sellers reachable from `req`, by ascending hop distance then id.
    pub fn sellers_by_distance(&self, req: usize) -> Vec<usize> {
        let mut order: Vec<(u32, usize)> = (0..self.seller_count())
            .filter_map(|s| self.hop_distance(req, s).map(|d| (d, s)))
            .collect();
        order.sort();
        order.into_iter().map(|(_, s)| s).collect()
    }
}

/// Mutable resource usage: bands per link, flow per link, server load.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NetState {
    pub alloc: Vec<u64>,
    pub flow: Vec<f64>,
    pub compute_used: Vec<f64>,
    pub storage_used: Vec<f64>,
}

/// One way to serve a request: seller, node path, and the extra bands
/// granted on each path link.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RouteOption {
    pub seller: usize,
    pub nodes: Vec<NodeId>,
    pub links: Vec<usize>,
    pub new_bands: Vec<u64>,
}

/// Undo record for [`NetState::apply`].
pub(crate) struct Applied {
    old_flows: Vec<f64>,
    old_compute: f64,
    old_storage: f64,
}

impl NetState {
    pub fn new(topo: &Topology<'_>) -> Self {
        Self {
            alloc: vec![0; topo.links.len()],
            flow: vec![0.0; topo.links.len()],
            compute_used: vec![0.0; topo.seller_count()],
            storage_used: vec![0.0; topo.seller_count()],
        }
    }

    fn blocked(&self, topo: &Topology<'_>, link: usize) -> u64 {
        topo.conflicts[link]
            .iter()
            .fold(0, |acc, &other| acc | self.alloc[other])
    }

    pub fn server_fits(&self, topo: &Topology<'_>, req: usize, seller: usize) -> bool {
        let s = &topo.instance.sellers[seller];
        let q = topo.qos[req];
        self.compute_used[seller] + q.compute_ghz <= s.compute_capacity_ghz + CAPACITY_TOLERANCE
            && self.storage_used[seller] + q.storage_gb <= s.storage_capacity_gb + CAPACITY_TOLERANCE
    }

    pub fn apply(&mut self, topo: &Topology<'_>, req: usize, opt: &RouteOption) -> Applied {
        let rate = topo.qos[req].rate_mbps;
        let applied = Applied {
            old_flows: opt.links.iter().map(|&l| self.flow[l]).collect(),
            old_compute: self.compute_used[opt.seller],
            old_storage: self.storage_used[opt.seller],
        };
        for (&l, &bands) in opt.links.iter().zip(&opt.new_bands) {
            self.alloc[l] |= bands;
            self.flow[l] += rate;
        }
        self.compute_used[opt.seller] += topo.qos[req].compute_ghz;
        self.storage_used[opt.seller] += topo.qos[req].storage_gb;
        applied
    }

    pub fn undo(&mut self, opt: &RouteOption, applied: Applied) {
        for ((&l, &bands), old) in opt.links.iter().zip(&opt.new_bands).zip(applied.old_flows) {
            self.alloc[l] &= !bands;
            self.flow[l] = old;
        }
        self.compute_used[opt.seller] = applied.old_compute;
        self.storage_used[opt.seller] = applied.old_storage;
    }

    /// Hashable snapshot for memoization.
    pub fn fingerprint(&self) -> Vec<u64> {
        let mut key = self.alloc.clone();
        key.extend(self.flow.iter().map(|f| f.to_bits()));
        key.extend(self.compute_used.iter().map(|f| f.to_bits()));
        key.extend(self.storage_used.iter().map(|f| f.to_bits()));
        key
    }

    /// Number of extra bands link `l` needs to carry `rate` more, or `None`
    /// when no finite number suffices.
    fn bands_needed(&self, topo: &Topology<'_>, l: usize, rate: f64) -> Option<u32> {
        let cap = topo.per_band_capacity[l];
        let residual = self.alloc[l].count_ones() as f64 * cap - self.flow[l];
        let shortfall = rate - residual;
        if shortfall <= CAPACITY_TOLERANCE {
            return Some(0);
        }
        if cap <= 0.0 {
            return None;
        }
        let m = ((shortfall - CAPACITY_TOLERANCE) / cap).ceil().max(1.0);
        (m <= topo.band_count as f64).then_some(m as u32)
    }
}

/// Every `m`-subset of the set bits of `mask`, in lexicographic order of
/// band ids.
fn subsets_of_size(mask: u64, m: u32, out: &mut Vec<u64>) {
    fn rec(bits: &[u64], start: usize, left: u32, acc: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..bits.len() {
            if bits.len() - i < left as usize {
                break;
            }
            rec(bits, i + 1, left - 1, acc | bits[i], out);
        }
    }
    let bits: Vec<u64> = (0..64).filter(|b| mask & (1 << b) != 0).map(|b| 1 << b).collect();
    rec(&bits, 0, m, 0, out);
}

/// `m`-subsets of `available` up to relabeling of the bands in `unused`:
/// any number of used bands, topped up with the lowest unused ones. Ordered
/// like [`subsets_of_size`].
fn canonical_subsets(available: u64, unused: u64, m: u32, out: &mut Vec<u64>) {
    let used = available & !unused;
    let fresh: Vec<u64> = (0..64)
        .filter(|b| unused & (1 << b) != 0)
        .map(|b| 1 << b)
        .collect();
    let mut part = Vec::new();
    for r in 0..=m.min(used.count_ones()) {
        let top_up = (m - r) as usize;
        if top_up > fresh.len() {
            continue;
        }
        let lowest = fresh[..top_up].iter().fold(0, |acc, b| acc | b);
        part.clear();
        subsets_of_size(used, r, &mut part);
        out.extend(part.iter().map(|p| p | lowest));
    }
    out.sort_by_key(|&mask| (0..64).filter(|b| mask & (1 << b) != 0).collect::<Vec<u32>>());
}

/// Depth-first path search from a request's buyer to one seller's host,
/// choosing bands link by link.
struct PathSearch<'t, 'a, F> {
    topo: &'t Topology<'a>,
    state: &'t NetState,
    rate: f64,
    seller: usize,
    host: usize,
    /// Exact hop count required, or `None` for any length.
    hops: Option<u32>,
    /// Skip band choices that differ only by a permutation of bands no link
    /// holds yet.
    canonical_bands: bool,
    visited: Vec<bool>,
    nodes: Vec<NodeId>,
    links: Vec<usize>,
    bands: Vec<u64>,
    /// Return `true` to stop the search.
    visit: F,
}

impl<F: FnMut(RouteOption) -> bool> PathSearch<'_, '_, F> {
    /// Bands held by no link and not picked earlier on this path.
    fn unused_bands(&self) -> u64 {
        let held = self
            .state
            .alloc
            .iter()
            .chain(&self.bands)
            .fold(0, |acc, b| acc | b);
        self.topo.all_bands() & !held
    }

    fn run(&mut self, at: usize) -> bool {
        let depth = self.links.len() as u32;
        if at == self.host {
            if self.hops.is_none_or(|h| h == depth) {
                let opt = RouteOption {
                    seller: self.seller,
                    nodes: self.nodes.clone(),
                    links: self.links.clone(),
                    new_bands: self.bands.clone(),
                };
                return (self.visit)(opt);
            }
            return false;
        }
        if depth > 0 && !self.topo.forwards[at] {
            return false;
        }
        let remaining = self.topo.dist_to_seller[self.seller][at];
        if remaining == UNREACHABLE {
            return false;
        }
        if let Some(h) = self.hops {
            if depth + remaining > h {
                return false;
            }
        }
        let mut choices = Vec::new();
        for &l in &self.topo.out_links[at] {
            let next = self.topo.links[l].to as usize;
            if self.visited[next] {
                continue;
            }
            let Some(m) = self.state.bands_needed(self.topo, l, self.rate) else {
                continue;
            };
            choices.clear();
            if m == 0 {
                choices.push(0);
            } else {
                let mut available =
                    self.topo.all_bands() & !self.state.alloc[l] & !self.state.blocked(self.topo, l);
                for (&pl, &pb) in self.links.iter().zip(&self.bands) {
                    if self.topo.links_conflict(pl, l) {
                        available &= !pb;
                    }
                }
                if available.count_ones() < m {
                    continue;
                }
                if self.canonical_bands {
                    canonical_subsets(available, self.unused_bands(), m, &mut choices);
                } else {
                    subsets_of_size(available, m, &mut choices);
                }
            }
            self.visited[next] = true;
            self.nodes.push(next as NodeId);
            self.links.push(l);
            for &choice in &choices.clone() {
                self.bands.push(choice);
                let stop = self.run(next);
                self.bands.pop();
                if stop {
                    self.links.pop();
                    self.nodes.pop();
                    self.visited[next] = false;
                    return true;
                }
            }
            self.links.pop();
            self.nodes.pop();
            self.visited[next] = false;
        }
        false
    }
}

fn search_paths<F: FnMut(RouteOption) -> bool>(
    topo: &Topology<'_>,
    state: &NetState,
    req: usize,
    seller: usize,
    hops: Option<u32>,
    canonical_bands: bool,
    visit: F,
) -> bool {
    let src = topo.sources[req] as usize;
    let mut visited = vec![false; topo.instance.nodes.len()];
    visited[src] = true;
    let mut search = PathSearch {
        topo,
        state,
        rate: topo.qos[req].rate_mbps,
        seller,
        host: topo.instance.sellers[seller].host_node as usize,
        hops,
        canonical_bands,
        visited,
        nodes: vec![src as NodeId],
        links: Vec::new(),
        bands: Vec::new(),
        visit,
    };
    search.run(src)
}

/// First route (fewest hops, then lowest node ids, then lowest bands) that
/// serves `req` at `seller` in the current state.
pub(crate) fn first_fit_route(
    topo: &Topology<'_>,
    state: &NetState,
    req: usize,
    seller: usize,
) -> Option<RouteOption> {
    let min_hops = topo.hop_distance(req, seller)?;
    let max_hops = topo.instance.nodes.len().saturating_sub(1) as u32;
    for hops in min_hops..=max_hops {
        let mut found = None;
        search_paths(topo, state, req, seller, Some(hops), false, |opt| {
            found = Some(opt);
            true
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Greedy placement: nearest server with room, first feasible route.
pub(crate) fn first_fit(topo: &Topology<'_>, state: &NetState, req: usize) -> Option<RouteOption> {
    topo.sellers_by_distance(req)
        .into_iter()
        .filter(|&s| state.server_fits(topo, req, s))
        .find_map(|s| first_fit_route(topo, state, req, s))
}

/// All ways of serving `req` at `seller` in the current state, up to
/// relabeling of bands no link holds yet.
pub(crate) fn all_routes(
    topo: &Topology<'_>,
    state: &NetState,
    req: usize,
    seller: usize,
) -> Vec<RouteOption> {
    let mut out = Vec::new();
    if topo.hop_distance(req, seller).is_none() || !state.server_fits(topo, req, seller) {
        return out;
    }
    search_paths(topo, state, req, seller, None, true, |opt| {
        out.push(opt);
        false
    });
    out
}

/// Runs greedy placement over requests in `order`, returning the options
/// taken (`None` for skipped requests) indexed by request position.
pub(crate) fn greedy_place(topo: &Topology<'_>, order: &[usize]) -> (NetState, Vec<Option<RouteOption>>) {
    let mut state = NetState::new(topo);
    let mut placed = vec![None; topo.request_count()];
    for &req in order {
        if let Some(opt) = first_fit(topo, &state, req) {
            state.apply(topo, req, &opt);
            placed[req] = Some(opt);
        }
    }
    (state, placed)
}

/// Materializes a plan from placed options and the final band state.
pub(crate) fn build_plan(
    topo: &Topology<'_>,
    state: &NetState,
    placed: &[Option<RouteOption>],
) -> AllocationPlan {
    let mut plan = AllocationPlan::default();
    for (req, opt) in placed.iter().enumerate() {
        let Some(opt) = opt else { continue };
        let key = topo.keys[req];
        plan.assignment.insert(key, opt.seller as SellerId);
        plan.routes.insert(key, opt.nodes.clone());
        let flows = opt
            .links
            .iter()
            .map(|&l| LinkFlow {
                from: topo.links[l].from,
                to: topo.links[l].to,
                rate_mbps: topo.qos[req].rate_mbps,
            })
            .collect();
        plan.flows.insert(key, flows);
    }
    let used: BTreeSet<usize> = placed
        .iter()
        .flatten()
        .flat_map(|o| o.links.iter().copied())
        .collect();
    for l in used {
        let bands: BTreeSet<u32> = (0..64u32).filter(|b| state.alloc[l] & (1 << b) != 0).collect();
        if !bands.is_empty() {
            plan.spectrum.insert(topo.links[l], bands);
        }
    }
    plan
}

/// Bounded memo of the best objective seen per (depth, state).
pub(crate) struct StateMemo {
    seen: HashMap<(usize, Vec<u64>), f64>,
    cap: usize,
}

impl StateMemo {
    pub fn new(cap: usize) -> Self {
        Self {
            seen: HashMap::new(),
            cap,
        }
    }

    /// Returns `true` when an equal or better visit of this state exists.
    pub fn dominated(&mut self, depth: usize, state: &NetState, value: f64) -> bool {
        let key = (depth, state.fingerprint());
        match self.seen.get_mut(&key) {
            Some(best) if *best >= value => true,
            Some(best) => {
                *best = value;
                false
            }
            None => {
                if self.seen.len() < self.cap {
                    self.seen.insert(key, value);
                }
                false
            }
        }
    }
}

/// Request positions sorted by descending `score`, ties by request key.
pub(crate) fn order_by_score(topo: &Topology<'_>, score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..topo.request_count()).collect();
    order.sort_by(|&a, &b| {
        score(b)
            .total_cmp(&score(a))
            .then(topo.keys[a].cmp(&topo.keys[b]))
    });
    order
}
