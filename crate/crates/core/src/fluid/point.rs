//! Structured-text form of a [`ForwardingCachingPoint`].
//!
//! ```toml
//! [[forward]]
//! node = 1
//! object = 1
//! next_hop = 3
//! fraction = 1.0
//!
//! [[cache]]
//! node = 1
//! object = 2
//! value = 1.0
//! ```
//!
//! A `(node, object)` pair without `forward` entries keeps a uniform split;
//! once any entry names the pair, unlisted next hops get 0. Caching
//! variables default to 0. Object ids are 1-based.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::ForwardingCachingPoint;
use crate::error::{Error, Result};
use crate::topology::{NetworkGraph, NodeId, NodeRef, RoutingGraph};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDocument {
    #[serde(default)]
    pub forward: Vec<ForwardEntry>,
    #[serde(default)]
    pub cache: Vec<CacheEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardEntry {
    pub node: NodeRef,
    pub object: usize,
    pub next_hop: NodeRef,
    pub fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheEntry {
    pub node: NodeRef,
    pub object: usize,
    #[serde(default = "one")]
    pub value: f64,
}

fn one() -> f64 {
    1.0
}

const FEASIBILITY_TOL: f64 = 1e-9;

fn node(graph: &NetworkGraph, r: &NodeRef) -> Result<NodeId> {
    let label = r.label();
    graph
        .node_by_name(&label)
        .ok_or_else(|| Error::config(format!("unknown node `{label}`")))
}

fn object(graph: &NetworkGraph, k: usize) -> Result<usize> {
    if k == 0 || k > graph.object_count() {
        return Err(Error::config(format!(
            "object {k} out of range 1..={}",
            graph.object_count()
        )));
    }
    Ok(k - 1)
}

impl PointDocument {
    /// Resolves names against `graph` and checks feasibility.
    pub fn into_point(self, graph: &NetworkGraph, routing: &RoutingGraph) -> Result<ForwardingCachingPoint> {
        let mut point = ForwardingCachingPoint::uniform(routing);
        let mut touched = vec![false; routing.slot_count()];
        for e in &self.forward {
            let i = node(graph, &e.node)?;
            let k = object(graph, e.object)?;
            let j = node(graph, &e.next_hop)?;
            let pos = routing
                .next_hops(k, i)
                .iter()
                .position(|&h| h == j)
                .ok_or_else(|| {
                    Error::config(format!(
                        "{} is not a next hop of {} for object {}",
                        graph.node_name(j),
                        graph.node_name(i),
                        e.object
                    ))
                })?;
            let range = routing.hop_range(k, i);
            let slot = routing.slot(k, i);
            if !touched[slot] {
                point.phi[range.clone()].iter_mut().for_each(|p| *p = 0.0);
                touched[slot] = true;
            }
            point.phi[range.start + pos] = e.fraction;
        }
        for e in &self.cache {
            let i = node(graph, &e.node)?;
            let k = object(graph, e.object)?;
            point.set_rho(routing, k, i, e.value);
        }
        point.validate(graph, routing, FEASIBILITY_TOL)?;
        Ok(point)
    }
}

pub fn parse_point(text: &str, graph: &NetworkGraph, routing: &RoutingGraph) -> Result<ForwardingCachingPoint> {
    let doc: PointDocument = toml::from_str(text)?;
    doc.into_point(graph, routing)
}

pub fn load_point(
    path: impl AsRef<Path>,
    graph: &NetworkGraph,
    routing: &RoutingGraph,
) -> Result<ForwardingCachingPoint> {
    parse_point(&std::fs::read_to_string(path)?, graph, routing)
}

/// Inverse of [`parse_point`]: every nonzero forwarding fraction and
/// caching variable, nodes by name.
pub fn point_to_toml(point: &ForwardingCachingPoint, graph: &NetworkGraph, routing: &RoutingGraph) -> String {
    let quote = |i: NodeId| format!("{:?}", graph.node_name(i));
    let mut out = String::new();
    for k in 0..graph.object_count() {
        for i in 0..graph.node_count() {
            for (&j, &p) in routing.next_hops(k, i).iter().zip(point.phi(routing, k, i)) {
                if p != 0.0 {
                    let _ = writeln!(
                        out,
                        "[[forward]]\nnode = {}\nobject = {}\nnext_hop = {}\nfraction = {p:?}\n",
                        quote(i),
                        k + 1,
                        quote(j)
                    );
                }
            }
        }
    }
    for k in 0..graph.object_count() {
        for i in 0..graph.node_count() {
            let r = point.rho(routing, k, i);
            if r != 0.0 {
                let _ = writeln!(out, "[[cache]]\nnode = {}\nobject = {}\nvalue = {r:?}\n", quote(i), k + 1);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::FibRule;

    fn diamond() -> (NetworkGraph, RoutingGraph) {
        let mut b = NetworkGraph::builder();
        b.nodes(["a", "b", "c", "d"]);
        b.duplex(0, 1, 10.0).duplex(0, 2, 10.0).duplex(1, 3, 10.0).duplex(2, 3, 10.0);
        b.object_size(1.0).sources(vec![vec![3], vec![3]]).cache(1, 1);
        let g = b.build().unwrap();
        let r = RoutingGraph::build(&g, FibRule::StrictlyCloser).unwrap();
        (g, r)
    }

    #[test]
    fn partial_document_defaults_to_uniform() {
        let (g, r) = diamond();
        let text = r#"
[[forward]]
node = "a"
object = 2
next_hop = "c"
fraction = 1.0

[[cache]]
node = "b"
object = 1
"#;
        let p = parse_point(text, &g, &r).unwrap();
        assert_eq!(p.phi(&r, 0, 0), &[0.5, 0.5]);
        assert_eq!(p.phi(&r, 1, 0), &[0.0, 1.0]);
        assert_eq!(p.rho(&r, 0, 1), 1.0);
    }

    #[test]
    fn round_trip() {
        let (g, r) = diamond();
        let mut p = ForwardingCachingPoint::uniform(&r);
        p.route(&r, 1, 0, 1);
        p.set_rho(&r, 1, 1, 0.25);
        let back = parse_point(&point_to_toml(&p, &g, &r), &g, &r).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_infeasible_and_unknown() {
        let (g, r) = diamond();
        let over = "[[cache]]\nnode = \"a\"\nobject = 1\n";
        assert!(parse_point(over, &g, &r).is_err());
        let bad_hop = "[[forward]]\nnode = \"a\"\nobject = 1\nnext_hop = \"d\"\nfraction = 1.0\n";
        assert!(parse_point(bad_hop, &g, &r).is_err());
        let short = "[[forward]]\nnode = \"a\"\nobject = 1\nnext_hop = \"b\"\nfraction = 0.5\n";
        assert!(parse_point(short, &g, &r).is_err());
        assert!(parse_point("[[cache]]\nnode = \"zz\"\nobject = 1\n", &g, &r).is_err());
    }
}
