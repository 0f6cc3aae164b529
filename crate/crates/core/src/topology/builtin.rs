//! The six evaluation topologies.
//!
//! Abilene, Tree, Ladder and Fat Tree follow their published structure.
//! GEANT and DTelekom reproduce the node and link counts of the versions
//! used in the ICN literature (22 nodes / 33 duplex links, 68 nodes / 273
//! duplex links); their exact adjacency is not published alongside the
//! evaluation, so DTelekom is generated deterministically by preferential
//! attachment and GEANT uses a fixed hand-written mesh.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{DemandConfig, FibRule, GraphBuilder, Instance, NetworkGraph, NodeId};
use crate::error::{Error, Result};

const MBPS: f64 = 1e6;
const DEFAULT_CAPACITY_MBPS: f64 = 50.0;

/// Workload scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 100 objects, 100 s horizon, caches of 20 or 10 objects.
    #[default]
    Desk,
    /// 5000 objects, 1000 s horizon, caches of 500 or 250 objects.
    Full,
}

impl Preset {
    pub fn objects(self) -> usize {
        match self {
            Preset::Desk => 100,
            Preset::Full => 5000,
        }
    }

    pub fn horizon(self) -> f64 {
        match self {
            Preset::Desk => 100.0,
            Preset::Full => 1000.0,
        }
    }

    /// Cache size for Abilene, GEANT and DTelekom nodes.
    pub fn large_cache(self) -> usize {
        match self {
            Preset::Desk => 20,
            Preset::Full => 500,
        }
    }

    /// Cache size for Tree, Ladder and Fat Tree nodes.
    pub fn small_cache(self) -> usize {
        match self {
            Preset::Desk => 10,
            Preset::Full => 250,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(Error::config(format!("unknown preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltinOptions {
    pub objects: usize,
    pub large_cache: usize,
    pub small_cache: usize,
    /// Replaces every cache size when set.
    pub cache_override: Option<usize>,
    /// Link capacity in Mbps. Required for Abilene; replaces the 50 Mbps
    /// default elsewhere.
    pub capacity_mbps: Option<f64>,
    pub object_size_bits: f64,
    pub rate_per_node: f64,
    pub zipf_alpha: f64,
    /// Seed for random source assignment.
    pub catalog_seed: u64,
}

impl BuiltinOptions {
    pub fn from_preset(preset: Preset) -> Self {
        BuiltinOptions {
            objects: preset.objects(),
            large_cache: preset.large_cache(),
            small_cache: preset.small_cache(),
            cache_override: None,
            capacity_mbps: None,
            object_size_bits: 4_000_000.0,
            rate_per_node: 1.0,
            zipf_alpha: 0.75,
            catalog_seed: 1,
        }
    }

    fn cache(&self, large: bool) -> usize {
        self.cache_override.unwrap_or(if large {
            self.large_cache
        } else {
            self.small_cache
        })
    }

    fn capacity(&self) -> f64 {
        self.capacity_mbps.unwrap_or(DEFAULT_CAPACITY_MBPS) * MBPS
    }
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        Self::from_preset(Preset::Desk)
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["abilene", "geant", "dtelekom", "tree", "ladder", "fattree"]
}

pub fn builtin(name: &str, opts: &BuiltinOptions) -> Result<Instance> {
    if opts.objects == 0 {
        return Err(Error::config("object count must be positive"));
    }
    match name {
        "abilene" => abilene(opts),
        "geant" => geant(opts),
        "dtelekom" => dtelekom(opts),
        "tree" => tree(opts),
        "ladder" => ladder(opts),
        "fattree" => fattree(opts),
        other => Err(Error::config(format!(
            "unknown topology `{other}` (expected one of {})",
            builtin_names().join(", ")
        ))),
    }
}

fn numbered(b: &mut GraphBuilder, count: usize) {
    b.nodes((1..=count).map(|i| i.to_string()));
}

fn id(b: &GraphBuilder, name: &str) -> NodeId {
    b.node_id(name).expect("builtin node name")
}

fn finish(
    name: &str,
    b: &mut GraphBuilder,
    opts: &BuiltinOptions,
    sources: Vec<Vec<NodeId>>,
    requesters: Vec<NodeId>,
) -> Result<Instance> {
    b.object_size(opts.object_size_bits).sources(sources);
    Ok(Instance {
        name: name.to_string(),
        graph: b.build()?,
        demand: DemandConfig::Zipf {
            requesters,
            rate_per_node: opts.rate_per_node,
            alpha: opts.zipf_alpha,
        },
        fib_rule: FibRule::StrictlyCloser,
    })
}

fn abilene(opts: &BuiltinOptions) -> Result<Instance> {
    let cap = opts.capacity_mbps.ok_or_else(|| {
        Error::config("abilene link capacities are not defined; pass a capacity explicitly")
    })? * MBPS;
    let mut b = NetworkGraph::builder();
    numbered(&mut b, 11);
    // 1 Seattle, 2 Sunnyvale, 3 Los Angeles, 4 Denver, 5 Kansas City,
    // 6 Houston, 7 Indianapolis, 8 Atlanta, 9 Chicago, 10 New York,
    // 11 Washington.
    const EDGES: [(usize, usize); 14] = [
        (1, 2),
        (1, 4),
        (2, 3),
        (2, 4),
        (3, 6),
        (4, 5),
        (5, 6),
        (5, 7),
        (6, 8),
        (7, 8),
        (7, 9),
        (8, 11),
        (9, 10),
        (10, 11),
    ];
    for (a, c) in EDGES {
        b.duplex(a - 1, c - 1, cap);
    }
    let servers = [0, 4, 7];
    // Object k (1-based) is served by server (k mod 3) + 1.
    let sources = (1..=opts.objects).map(|k| vec![servers[k % 3]]).collect();
    let requesters: Vec<NodeId> = (0..11).filter(|i| !servers.contains(i)).collect();
    for &r in &requesters {
        b.cache(r, opts.cache(true));
    }
    finish("abilene", &mut b, opts, sources, requesters)
}

fn geant(opts: &BuiltinOptions) -> Result<Instance> {
    let mut b = NetworkGraph::builder();
    numbered(&mut b, 22);
    const EDGES: [(usize, usize); 33] = [
        (1, 2),
        (1, 3),
        (1, 7),
        (2, 4),
        (2, 5),
        (3, 6),
        (3, 9),
        (4, 5),
        (4, 8),
        (5, 10),
        (6, 7),
        (6, 11),
        (7, 12),
        (8, 10),
        (8, 13),
        (9, 11),
        (9, 14),
        (10, 15),
        (11, 12),
        (12, 16),
        (13, 15),
        (13, 17),
        (14, 16),
        (14, 18),
        (15, 19),
        (16, 20),
        (17, 19),
        (17, 21),
        (18, 20),
        (18, 22),
        (19, 21),
        (20, 22),
        (21, 22),
    ];
    let cap = opts.capacity();
    for (a, c) in EDGES {
        b.duplex(a - 1, c - 1, cap);
    }
    all_request_random_source("geant", b, 22, opts)
}

fn dtelekom(opts: &BuiltinOptions) -> Result<Instance> {
    const NODES: usize = 68;
    const DUPLEX_LINKS: usize = 273;
    let mut b = NetworkGraph::builder();
    numbered(&mut b, NODES);
    let cap = opts.capacity();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0d7e_1e60);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let has = |edges: &Vec<(usize, usize)>, a: usize, c: usize| {
        edges.contains(&(a.min(c), a.max(c)))
    };
    // Seed clique of five nodes, then preferential attachment with four
    // links per new node.
    for a in 0..5 {
        for c in a + 1..5 {
            edges.push((a, c));
        }
    }
    for v in 5..NODES {
        let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(a, c)| [a, c]).collect();
        endpoints.sort_unstable();
        let mut added = 0;
        while added < 4 {
            let &u = endpoints.choose(&mut rng).expect("nonempty");
            if !has(&edges, u, v) {
                edges.push((u.min(v), u.max(v)));
                added += 1;
            }
        }
    }
    while edges.len() < DUPLEX_LINKS {
        let a = rng.random_range(0..NODES);
        let c = rng.random_range(0..NODES);
        if a != c && !has(&edges, a, c) {
            edges.push((a.min(c), a.max(c)));
        }
    }
    for (a, c) in edges {
        b.duplex(a, c, cap);
    }
    all_request_random_source("dtelekom", b, NODES, opts)
}

fn all_request_random_source(
    name: &str,
    mut b: GraphBuilder,
    nodes: usize,
    opts: &BuiltinOptions,
) -> Result<Instance> {
    for i in 0..nodes {
        b.cache(i, opts.cache(true));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.catalog_seed);
    let sources = (0..opts.objects)
        .map(|_| vec![rng.random_range(0..nodes)])
        .collect();
    finish(name, &mut b, opts, sources, (0..nodes).collect())
}

fn tree(opts: &BuiltinOptions) -> Result<Instance> {
    let mut b = NetworkGraph::builder();
    b.nodes(["S1", "S2", "E1", "E2", "E3", "C1", "C2", "C3", "C4"]);
    let cap = opts.capacity();
    for (x, y) in [
        ("S1", "E1"),
        ("S2", "E1"),
        ("E1", "E2"),
        ("E1", "E3"),
        ("E2", "C1"),
        ("E2", "C2"),
        ("E3", "C3"),
        ("E3", "C4"),
    ] {
        let (x, y) = (id(&b, x), id(&b, y));
        b.duplex(x, y, cap);
    }
    for name in ["E1", "E2", "E3", "C1", "C2", "C3", "C4"] {
        let i = id(&b, name);
        b.cache(i, opts.cache(false));
    }
    let servers = [id(&b, "S1"), id(&b, "S2")];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.catalog_seed);
    let sources = (0..opts.objects)
        .map(|_| vec![*servers.choose(&mut rng).expect("servers")])
        .collect();
    let requesters = ["C1", "C2", "C3", "C4"].iter().map(|n| id(&b, n)).collect();
    finish("tree", &mut b, opts, sources, requesters)
}

fn ladder(opts: &BuiltinOptions) -> Result<Instance> {
    let mut b = NetworkGraph::builder();
    for col in ["A", "B", "C", "D"] {
        for row in 1..=3 {
            b.node(format!("{col}{row}"));
        }
    }
    let cap = opts.capacity();
    let cols = ["A", "B", "C", "D"];
    for row in 1..=3 {
        for w in cols.windows(2) {
            let (x, y) = (id(&b, &format!("{}{row}", w[0])), id(&b, &format!("{}{row}", w[1])));
            b.duplex(x, y, cap);
        }
    }
    for col in cols {
        for row in 1..3 {
            let (x, y) = (
                id(&b, &format!("{col}{row}")),
                id(&b, &format!("{col}{}", row + 1)),
            );
            b.duplex(x, y, cap);
        }
    }
    let source = id(&b, "D3");
    for i in 0..12 {
        if i != source {
            b.cache(i, opts.cache(false));
        }
    }
    let requesters = ["A1", "A2", "A3"].iter().map(|n| id(&b, n)).collect();
    finish("ladder", &mut b, opts, vec![vec![source]; opts.objects], requesters)
}

fn fattree(opts: &BuiltinOptions) -> Result<Instance> {
    // k = 4 fat tree: 4 cores, 4 pods of 2 aggregation + 2 edge switches,
    // 2 servers per edge switch.
    let mut b = NetworkGraph::builder();
    let cores: Vec<NodeId> = (1..=4).map(|i| b.node(format!("C{i}"))).collect();
    let aggs: Vec<NodeId> = (1..=8).map(|i| b.node(format!("A{i}"))).collect();
    let edges: Vec<NodeId> = (1..=8).map(|i| b.node(format!("E{i}"))).collect();
    let servers: Vec<NodeId> = (1..=16).map(|i| b.node(format!("S{i}"))).collect();
    let cap = opts.capacity();
    for pod in 0..4 {
        for a in 0..2 {
            let agg = aggs[2 * pod + a];
            for c in 0..2 {
                b.duplex(cores[2 * a + c], agg, cap);
            }
            for e in 0..2 {
                b.duplex(agg, edges[2 * pod + e], cap);
            }
        }
    }
    for (e, &edge) in edges.iter().enumerate() {
        b.duplex(edge, servers[2 * e], cap);
        b.duplex(edge, servers[2 * e + 1], cap);
    }
    for &i in cores.iter().chain(&aggs).chain(&edges) {
        b.cache(i, opts.cache(false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.catalog_seed);
    let sources = (0..opts.objects)
        .map(|_| {
            vec![
                *servers[..8].choose(&mut rng).expect("servers"),
                *servers[8..].choose(&mut rng).expect("servers"),
            ]
        })
        .collect();
    finish("fattree", &mut b, opts, sources, cores)
}
