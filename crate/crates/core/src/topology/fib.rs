use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{LinkId, NetworkGraph, NodeId, ObjectId};
use crate::error::{Error, Result};

/// How permitted next hops are derived from hop distances to the nearest
/// source. Both rules produce a loop-free routing graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FibRule {
    /// `j ∈ O(i,k)` iff `dist(j) < dist(i)`.
    #[default]
    StrictlyCloser,
    /// Also admits a neighbour at equal distance with a higher node id, so
    /// the order `(dist, -id)` is strictly decreasing along every route.
    DistanceThenId,
}

impl FibRule {
    fn admits(self, dist: &[usize], from: NodeId, to: NodeId) -> bool {
        match self {
            FibRule::StrictlyCloser => dist[to] < dist[from],
            FibRule::DistanceThenId => {
                dist[to] < dist[from] || (dist[to] == dist[from] && to > from)
            }
        }
    }

    /// Sorts nodes so that every next hop precedes the nodes using it.
    fn order(self, dist: &[usize]) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..dist.len()).collect();
        match self {
            FibRule::StrictlyCloser => order.sort_by_key(|&i| (dist[i], i)),
            FibRule::DistanceThenId => {
                order.sort_by_key(|&i| (dist[i], std::cmp::Reverse(i)))
            }
        }
        order
    }
}

/// The FIB of a single object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibSlice {
    /// `next_hops[i]` is `O(i,k)`, ascending by node id.
    pub next_hops: Vec<Vec<NodeId>>,
    /// Nodes ordered from the sources outward.
    pub order: Vec<NodeId>,
    /// Hop distance to the nearest source.
    pub distance: Vec<usize>,
}

/// Builds the loop-free FIB for `object`.
pub fn build_fib(graph: &NetworkGraph, object: ObjectId, rule: FibRule) -> Result<FibSlice> {
    let n = graph.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &s in graph.sources(object) {
        dist[s] = 0;
        queue.push_back(s);
    }
    // Breadth-first search against link direction: dist(i) counts hops of
    // the forward path i -> ... -> source.
    while let Some(v) = queue.pop_front() {
        for &id in graph.in_links(v) {
            let u = graph.link(id).from;
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if let Some(node) = dist.iter().position(|&d| d == usize::MAX) {
        return Err(Error::UnreachableSource { object, node });
    }

    let next_hops = (0..n)
        .map(|i| {
            if graph.is_source(i, object) {
                return Vec::new();
            }
            graph
                .out_links(i)
                .iter()
                .map(|&id| graph.link(id).to)
                .filter(|&j| rule.admits(&dist, i, j))
                .collect()
        })
        .collect();

    Ok(FibSlice {
        next_hops,
        order: rule.order(&dist),
        distance: dist,
    })
}

/// FIBs for every object, flattened for the fluid computations.
///
/// Per-(object, node) quantities use the slot `k * n + i`; per-hop
/// quantities (forwarding fractions, marginal costs) use a flat hop index
/// whose range for a slot is [`RoutingGraph::hop_range`]. Hops are ordered
/// by object, then node, then next-hop id.
#[derive(Debug, Clone)]
pub struct RoutingGraph {
    node_count: usize,
    object_count: usize,
    rule: FibRule,
    offsets: Vec<usize>,
    hops: Vec<NodeId>,
    hop_links: Vec<LinkId>,
    hop_slots: Vec<usize>,
    in_offsets: Vec<usize>,
    in_nodes: Vec<NodeId>,
    orders: Vec<Vec<NodeId>>,
    link_hops: Vec<Vec<usize>>,
}

impl RoutingGraph {
    pub fn build(graph: &NetworkGraph, rule: FibRule) -> Result<Self> {
        let n = graph.node_count();
        let k_count = graph.object_count();
        let mut offsets = Vec::with_capacity(n * k_count + 1);
        let mut hops = Vec::new();
        let mut hop_links = Vec::new();
        let mut hop_slots = Vec::new();
        let mut orders = Vec::with_capacity(k_count);
        let mut incoming: Vec<Vec<NodeId>> = vec![Vec::new(); n * k_count];
        offsets.push(0);
        for k in 0..k_count {
            let fib = build_fib(graph, k, rule)?;
            for (i, next) in fib.next_hops.iter().enumerate() {
                for &j in next {
                    hops.push(j);
                    hop_links.push(graph.link_between(i, j).expect("fib hop over a link"));
                    hop_slots.push(k * n + i);
                    incoming[k * n + j].push(i);
                }
                offsets.push(hops.len());
            }
            orders.push(fib.order);
        }
        let mut in_offsets = Vec::with_capacity(n * k_count + 1);
        let mut in_nodes = Vec::new();
        in_offsets.push(0);
        for list in incoming {
            in_nodes.extend(list);
            in_offsets.push(in_nodes.len());
        }
        let mut link_hops = vec![Vec::new(); graph.links().len()];
        for (h, &l) in hop_links.iter().enumerate() {
            link_hops[l].push(h);
        }
        Ok(RoutingGraph {
            node_count: n,
            object_count: k_count,
            rule,
            offsets,
            hops,
            hop_links,
            hop_slots,
            in_offsets,
            in_nodes,
            orders,
            link_hops,
        })
    }

    pub fn rule(&self) -> FibRule {
        self.rule
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn slot(&self, object: ObjectId, node: NodeId) -> usize {
        object * self.node_count + node
    }

    pub fn slot_count(&self) -> usize {
        self.node_count * self.object_count
    }

    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn hop_range(&self, object: ObjectId, node: NodeId) -> Range<usize> {
        let s = self.slot(object, node);
        self.offsets[s]..self.offsets[s + 1]
    }

    /// `O(i,k)`, ascending by node id.
    pub fn next_hops(&self, object: ObjectId, node: NodeId) -> &[NodeId] {
        &self.hops[self.hop_range(object, node)]
    }

    pub fn hop_links(&self, object: ObjectId, node: NodeId) -> &[LinkId] {
        &self.hop_links[self.hop_range(object, node)]
    }

    /// `I(i,k)`: nodes that list `node` as a next hop for `object`.
    pub fn incoming(&self, object: ObjectId, node: NodeId) -> &[NodeId] {
        let s = self.slot(object, node);
        &self.in_nodes[self.in_offsets[s]..self.in_offsets[s + 1]]
    }

    /// Nodes ordered from the sources outward: every next hop of a node
    /// appears before the node.
    pub fn order(&self, object: ObjectId) -> &[NodeId] {
        &self.orders[object]
    }

    pub fn hop_target(&self, hop: usize) -> NodeId {
        self.hops[hop]
    }

    pub fn hop_link(&self, hop: usize) -> LinkId {
        self.hop_links[hop]
    }

    /// The `(object, node)` slot owning `hop`.
    pub fn hop_slot(&self, hop: usize) -> usize {
        self.hop_slots[hop]
    }

    /// Flat indices of all hops routed over `link`, ascending.
    pub fn link_hops(&self, link: LinkId) -> &[usize] {
        &self.link_hops[link]
    }

    /// True when the per-object union of FIB edges has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        (0..self.object_count).all(|k| {
            // Kahn's algorithm on the object's FIB edges.
            let n = self.node_count;
            let mut indeg = vec![0usize; n];
            for i in 0..n {
                for &j in self.next_hops(k, i) {
                    indeg[j] += 1;
                }
            }
            let mut stack: Vec<NodeId> = (0..n).filter(|&i| indeg[i] == 0).collect();
            let mut seen = 0;
            while let Some(i) = stack.pop() {
                seen += 1;
                for &j in self.next_hops(k, i) {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
            seen == n
        })
    }
}
