//! Network graph, object catalog, demand and per-object routing graphs.

mod builtin;
mod demand;
mod document;
mod fib;

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

pub use builtin::{builtin, builtin_names, BuiltinOptions, Preset};
pub use demand::{zipf_pmf, Demand, DemandConfig};
pub use document::{load_topology, parse_topology, NodeRef, TopologyDocument};
pub use fib::{build_fib, FibRule, FibSlice, RoutingGraph};

pub type NodeId = usize;
pub type ObjectId = usize;
pub type LinkId = usize;

/// A unidirectional link with its capacity in bits per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

/// Directed, strongly connected network with caches and an object catalog.
///
/// Every link must have a reverse link: Interests travel on `(i, j)` and the
/// matching Data retraces the path on `(j, i)`.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    names: Vec<String>,
    links: Vec<Link>,
    reverse: Vec<LinkId>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
    link_index: HashMap<(NodeId, NodeId), LinkId>,
    cache_capacity: Vec<usize>,
    object_size: f64,
    sources: Vec<Vec<NodeId>>,
    is_source: Vec<Vec<bool>>,
}

impl NetworkGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn object_count(&self) -> usize {
        self.sources.len()
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.names[node]
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn link_between(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.link_index.get(&(from, to)).copied()
    }

    /// The link carrying traffic in the opposite direction.
    pub fn reverse(&self, id: LinkId) -> LinkId {
        self.reverse[id]
    }

    /// Capacity available to the Data traffic induced by requests sent on
    /// `id`, i.e. the capacity of the reverse link.
    pub fn data_capacity(&self, id: LinkId) -> f64 {
        self.links[self.reverse[id]].capacity
    }

    /// Outgoing links of `node`, sorted by destination id.
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.in_links[node]
    }

    pub fn cache_capacity(&self, node: NodeId) -> usize {
        self.cache_capacity[node]
    }

    /// Object size L in bits.
    pub fn object_size(&self) -> f64 {
        self.object_size
    }

    pub fn sources(&self, object: ObjectId) -> &[NodeId] {
        &self.sources[object]
    }

    pub fn is_source(&self, node: NodeId, object: ObjectId) -> bool {
        self.is_source[object][node]
    }
}

/// Incremental constructor for [`NetworkGraph`]; `build` validates.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    links: Vec<Link>,
    caches: Vec<usize>,
    object_size: f64,
    sources: Vec<Vec<NodeId>>,
}

impl GraphBuilder {
    pub fn node(&mut self, name: impl Into<String>) -> NodeId {
        self.names.push(name.into());
        self.caches.push(0);
        self.names.len() - 1
    }

    pub fn nodes<I, S>(&mut self, names: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for n in names {
            self.node(n);
        }
        self
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn link(&mut self, from: NodeId, to: NodeId, capacity: f64) -> &mut Self {
        self.links.push(Link { from, to, capacity });
        self
    }

    /// Adds both `(a, b)` and `(b, a)` with the same capacity.
    pub fn duplex(&mut self, a: NodeId, b: NodeId, capacity: f64) -> &mut Self {
        self.link(a, b, capacity).link(b, a, capacity)
    }

    pub fn cache(&mut self, node: NodeId, capacity: usize) -> &mut Self {
        self.caches[node] = capacity;
        self
    }

    pub fn object_size(&mut self, bits: f64) -> &mut Self {
        self.object_size = bits;
        self
    }

    /// Sets the source sets of all objects, indexed by object id.
    pub fn sources(&mut self, sources: Vec<Vec<NodeId>>) -> &mut Self {
        self.sources = sources;
        self
    }

    pub fn build(&self) -> Result<NetworkGraph> {
        let n = self.names.len();
        if n == 0 {
            return Err(Error::config("graph has no nodes"));
        }
        for (i, a) in self.names.iter().enumerate() {
            if self.names[..i].contains(a) {
                return Err(Error::config(format!("duplicate node id `{a}`")));
            }
        }
        if !(self.object_size.is_finite() && self.object_size > 0.0) {
            return Err(Error::config(format!(
                "object size must be positive, got {}",
                self.object_size
            )));
        }
        if self.sources.is_empty() {
            return Err(Error::config("catalog has no objects"));
        }

        let mut link_index = HashMap::with_capacity(self.links.len());
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (id, l) in self.links.iter().enumerate() {
            if l.from >= n || l.to >= n {
                return Err(Error::config(format!(
                    "link {id} has a dangling endpoint ({} -> {})",
                    l.from, l.to
                )));
            }
            if l.from == l.to {
                return Err(Error::config(format!(
                    "self-loop at node `{}`",
                    self.names[l.from]
                )));
            }
            if !(l.capacity.is_finite() && l.capacity > 0.0) {
                return Err(Error::config(format!(
                    "link {} -> {} has nonpositive capacity {}",
                    self.names[l.from], self.names[l.to], l.capacity
                )));
            }
            if link_index.insert((l.from, l.to), id).is_some() {
                return Err(Error::config(format!(
                    "duplicate link {} -> {}",
                    self.names[l.from], self.names[l.to]
                )));
            }
            out_links[l.from].push(id);
            in_links[l.to].push(id);
        }
        for list in &mut out_links {
            list.sort_by_key(|&id| self.links[id].to);
        }
        for list in &mut in_links {
            list.sort_by_key(|&id| self.links[id].from);
        }

        let mut reverse = Vec::with_capacity(self.links.len());
        for l in &self.links {
            match link_index.get(&(l.to, l.from)) {
                Some(&r) => reverse.push(r),
                None => {
                    return Err(Error::config(format!(
                        "link {} -> {} has no reverse link for Data traffic",
                        self.names[l.from], self.names[l.to]
                    )))
                }
            }
        }

        // Strong connectivity: every node reaches node 0 and vice versa.
        let reach = |adj: &Vec<Vec<LinkId>>, forward: bool| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0]);
            seen[0] = true;
            while let Some(u) = queue.pop_front() {
                for &id in &adj[u] {
                    let v = if forward { self.links[id].to } else { self.links[id].from };
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            seen
        };
        let fwd = reach(&out_links, true);
        let bwd = reach(&in_links, false);
        if let Some(bad) = (0..n).find(|&i| !fwd[i] || !bwd[i]) {
            return Err(Error::config(format!(
                "graph is not strongly connected (node `{}`)",
                self.names[bad]
            )));
        }

        let mut is_source = vec![vec![false; n]; self.sources.len()];
        for (k, srcs) in self.sources.iter().enumerate() {
            if srcs.is_empty() {
                return Err(Error::config(format!("object {} has no source", k + 1)));
            }
            for &s in srcs {
                if s >= n {
                    return Err(Error::config(format!(
                        "object {} has unknown source node {s}",
                        k + 1
                    )));
                }
                is_source[k][s] = true;
            }
        }

        let mut sources = self.sources.clone();
        for s in &mut sources {
            s.sort_unstable();
            s.dedup();
        }

        Ok(NetworkGraph {
            names: self.names.clone(),
            links: self.links.clone(),
            reverse,
            out_links,
            in_links,
            link_index,
            cache_capacity: self.caches.clone(),
            object_size: self.object_size,
            sources,
            is_source,
        })
    }
}

/// A network together with its demand and FIB construction rule.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub graph: NetworkGraph,
    pub demand: DemandConfig,
    pub fib_rule: FibRule,
}

impl Instance {
    pub fn routing(&self) -> Result<RoutingGraph> {
        RoutingGraph::build(&self.graph, self.fib_rule)
    }

    pub fn demand(&self) -> Result<Demand> {
        self.demand.materialize(&self.graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> GraphBuilder {
        let mut b = NetworkGraph::builder();
        b.nodes(["1", "2", "3"]);
        b.duplex(0, 1, 10.0).duplex(1, 2, 10.0);
        b.object_size(1.0).sources(vec![vec![2]]);
        b
    }

    #[test]
    fn builds_valid_line() {
        let g = line().build().unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.links().len(), 4);
        let l = g.link_between(0, 1).unwrap();
        assert_eq!(g.link(g.reverse(l)).from, 1);
        assert!(g.is_source(2, 0));
        assert!(!g.is_source(0, 0));
    }

    #[test]
    fn rejects_zero_capacity() {
        let mut b = line();
        b.link(0, 2, 0.0).link(2, 0, 1.0);
        let err = b.build().unwrap_err();
        assert!(err.to_string().contains("nonpositive capacity"), "{err}");
    }

    #[test]
    fn rejects_dangling_endpoint() {
        let mut b = line();
        b.link(0, 7, 1.0);
        assert!(b.build().unwrap_err().to_string().contains("dangling"));
    }

    #[test]
    fn rejects_missing_reverse() {
        let mut b = line();
        b.link(0, 2, 1.0);
        assert!(b.build().unwrap_err().to_string().contains("reverse"));
    }

    #[test]
    fn rejects_disconnected() {
        let mut b = NetworkGraph::builder();
        b.nodes(["a", "b", "c", "d"]);
        b.duplex(0, 1, 1.0).duplex(2, 3, 1.0);
        b.object_size(1.0).sources(vec![vec![0]]);
        assert!(b.build().unwrap_err().to_string().contains("strongly connected"));
    }

    #[test]
    fn rejects_sourceless_object() {
        let mut b = line();
        b.sources(vec![vec![2], vec![]]);
        assert!(b.build().is_err());
    }
}
