//! TOML topology documents.
//!
//! ```toml
//! name = "triangle"
//! fib_rule = "distance_then_id"      # optional, default strictly_closer
//! nodes = [1, 2, 3]
//!
//! [[links]]
//! from = 1
//! to = 2
//! capacity_mbps = 50
//! bidirectional = true
//!
//! [caches]
//! 1 = 1
//!
//! [catalog]
//! count = 2
//! size_kbytes = 500
//! source_assignment = "explicit"     # explicit | random_uniform | modulo
//! sources = [[3], [3]]
//!
//! [demand]
//! rates = [{ node = 1, object = 1, rate = 1.0 }]
//! # or: requesters = "all", rate_per_node = 2.0, zipf_alpha = 0.75
//! ```
//!
//! Object ids in documents are 1-based; kilobytes are 1000 bytes.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{DemandConfig, FibRule, Instance, NetworkGraph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NodeRef {
    Int(i64),
    Name(String),
}

impl NodeRef {
    pub fn label(&self) -> String {
        match self {
            NodeRef::Int(i) => i.to_string(),
            NodeRef::Name(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub fib_rule: FibRule,
    pub nodes: Vec<NodeRef>,
    pub links: Vec<LinkEntry>,
    #[serde(default)]
    pub caches: BTreeMap<String, usize>,
    pub catalog: CatalogEntry,
    #[serde(default)]
    pub demand: Option<DemandEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub from: NodeRef,
    pub to: NodeRef,
    pub capacity_mbps: f64,
    #[serde(default)]
    pub bidirectional: bool,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SourceAssignment {
    Explicit,
    RandomUniform,
    Modulo,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub count: usize,
    pub size_kbytes: f64,
    pub source_assignment: SourceAssignment,
    #[serde(default)]
    pub sources: Vec<Vec<NodeRef>>,
    #[serde(default)]
    pub servers: Vec<NodeRef>,
    #[serde(default)]
    pub server_groups: Vec<Vec<NodeRef>>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Requesters {
    All(AllKeyword),
    List(Vec<NodeRef>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllKeyword {
    All,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    pub node: NodeRef,
    pub object: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandEntry {
    #[serde(default)]
    pub requesters: Option<Requesters>,
    #[serde(default)]
    pub rate_per_node: Option<f64>,
    #[serde(default)]
    pub zipf_alpha: Option<f64>,
    #[serde(default)]
    pub rates: Vec<RateEntry>,
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_topology(&text)
}

pub fn parse_topology(text: &str) -> Result<Instance> {
    let doc: TopologyDocument = toml::from_str(text)?;
    doc.into_instance()
}

impl TopologyDocument {
    pub fn into_instance(self) -> Result<Instance> {
        let mut b = NetworkGraph::builder();
        for n in &self.nodes {
            b.node(n.label());
        }
        let resolve = |b: &super::GraphBuilder, r: &NodeRef| -> Result<NodeId> {
            b.node_id(&r.label())
                .ok_or_else(|| Error::config(format!("unknown node `{}`", r.label())))
        };
        for l in &self.links {
            let (from, to) = (resolve(&b, &l.from)?, resolve(&b, &l.to)?);
            let cap = l.capacity_mbps * 1e6;
            if l.bidirectional {
                b.duplex(from, to, cap);
            } else {
                b.link(from, to, cap);
            }
        }
        for (name, &units) in &self.caches {
            let i = b
                .node_id(name)
                .ok_or_else(|| Error::config(format!("cache entry for unknown node `{name}`")))?;
            b.cache(i, units);
        }

        let cat = &self.catalog;
        if cat.count == 0 {
            return Err(Error::config("catalog count must be positive"));
        }
        let n = self.nodes.len();
        let pick = |refs: &[NodeRef]| -> Result<Vec<NodeId>> {
            refs.iter().map(|r| resolve(&b, r)).collect()
        };
        let servers = if cat.servers.is_empty() {
            (0..n).collect()
        } else {
            pick(&cat.servers)?
        };
        let sources: Vec<Vec<NodeId>> = match cat.source_assignment {
            SourceAssignment::Explicit => {
                if cat.sources.len() != cat.count {
                    return Err(Error::config(format!(
                        "explicit catalog lists {} source sets for {} objects",
                        cat.sources.len(),
                        cat.count
                    )));
                }
                cat.sources.iter().map(|s| pick(s)).collect::<Result<_>>()?
            }
            SourceAssignment::Modulo => (1..=cat.count)
                .map(|k| vec![servers[k % servers.len()]])
                .collect(),
            SourceAssignment::RandomUniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(cat.seed);
                if cat.server_groups.is_empty() {
                    (0..cat.count)
                        .map(|_| vec![*servers.choose(&mut rng).expect("servers")])
                        .collect()
                } else {
                    let groups: Vec<Vec<NodeId>> =
                        cat.server_groups.iter().map(|g| pick(g)).collect::<Result<_>>()?;
                    if groups.iter().any(|g| g.is_empty()) {
                        return Err(Error::config("empty server group"));
                    }
                    (0..cat.count)
                        .map(|_| {
                            groups
                                .iter()
                                .map(|g| *g.choose(&mut rng).expect("group"))
                                .collect()
                        })
                        .collect()
                }
            }
        };
        b.object_size(cat.size_kbytes * 8000.0).sources(sources);
        let graph = b.build()?;

        let demand = match &self.demand {
            None => DemandConfig::Explicit(Vec::new()),
            Some(d) if !d.rates.is_empty() => {
                if d.requesters.is_some() || d.rate_per_node.is_some() {
                    return Err(Error::config(
                        "demand: give either explicit rates or requesters/rate_per_node",
                    ));
                }
                let mut entries = Vec::with_capacity(d.rates.len());
                for e in &d.rates {
                    if e.object == 0 || e.object > cat.count {
                        return Err(Error::config(format!(
                            "demand object {} outside 1..={}",
                            e.object, cat.count
                        )));
                    }
                    let node = graph
                        .node_by_name(&e.node.label())
                        .ok_or_else(|| Error::config(format!("unknown node `{}`", e.node.label())))?;
                    entries.push((node, e.object - 1, e.rate));
                }
                DemandConfig::Explicit(entries)
            }
            Some(d) => {
                let requesters = match &d.requesters {
                    None | Some(Requesters::All(_)) => (0..n).collect(),
                    Some(Requesters::List(list)) => list
                        .iter()
                        .map(|r| {
                            graph
                                .node_by_name(&r.label())
                                .ok_or_else(|| Error::config(format!("unknown node `{}`", r.label())))
                        })
                        .collect::<Result<_>>()?,
                };
                DemandConfig::Zipf {
                    requesters,
                    rate_per_node: d.rate_per_node.unwrap_or(0.0),
                    alpha: d.zipf_alpha.unwrap_or(0.75),
                }
            }
        };
        // Validate demand values eagerly.
        demand.materialize(&graph)?;

        Ok(Instance {
            name: self.name.clone().unwrap_or_else(|| "custom".to_string()),
            graph,
            demand,
            fib_rule: self.fib_rule,
        })
    }
}
