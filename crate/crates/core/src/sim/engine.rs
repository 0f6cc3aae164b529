use std::collections::{HashMap, VecDeque};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::event::{EventKind, EventQueue};
use super::metrics::{HitRecord, MetricsLog, RequestRecord};
use super::packet::{DataPacket, InterestPacket, Packet, PitEntry, PitKey, DEFAULT_INTEREST_BITS};
use super::store::{CacheDecision, ContentStore};
use super::strategy::{SimNetwork, Strategy, StrategyKind, StrategyParams};
use super::workload::{generate_requests, Request};
use crate::error::{Error, Result};
use crate::topology::{Demand, LinkId, NetworkGraph, NodeId, RoutingGraph};

const WORKLOAD_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Requests are generated over `[0, horizon)`; the run then drains.
    pub horizon: f64,
    pub seed: u64,
    pub params: StrategyParams,
    pub interest_bits: f64,
    /// Per-link propagation delay, seconds.
    pub propagation_delay: f64,
    /// Abort after this many events.
    pub max_events: Option<u64>,
    /// Abort when the run takes longer than this in wall-clock time.
    pub wall_clock_limit: Option<Duration>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1000.0,
            seed: 0,
            params: StrategyParams::default(),
            interest_bits: DEFAULT_INTEREST_BITS,
            propagation_delay: 0.0,
            max_events: None,
            wall_clock_limit: None,
        }
    }
}

/// Runs one simulation with a built-in strategy.
pub fn run(
    graph: &NetworkGraph,
    routing: &RoutingGraph,
    demand: &Demand,
    strategy: StrategyKind,
    config: &SimConfig,
) -> Result<MetricsLog> {
    let net = network(graph, routing, config);
    let boxed = strategy.build(&net, &config.params);
    run_with_strategy(graph, routing, demand, boxed, strategy.stream(), config)
}

/// Runs one simulation with any strategy. `stream` selects the strategy's
/// random stream; stream 0 is reserved for the workload.
pub fn run_with_strategy(
    graph: &NetworkGraph,
    routing: &RoutingGraph,
    demand: &Demand,
    strategy: Box<dyn Strategy>,
    stream: u64,
    config: &SimConfig,
) -> Result<MetricsLog> {
    validate(config)?;
    assert_ne!(stream, WORKLOAD_STREAM, "stream 0 is the workload stream");
    let mut workload_rng = ChaCha8Rng::seed_from_u64(config.seed);
    workload_rng.set_stream(WORKLOAD_STREAM);
    let requests = generate_requests(demand, config.horizon, &mut workload_rng);
    let mut strategy_rng = ChaCha8Rng::seed_from_u64(config.seed);
    strategy_rng.set_stream(stream);
    Engine::new(graph, routing, strategy, strategy_rng, requests, config).run()
}

fn network<'a>(graph: &'a NetworkGraph, routing: &'a RoutingGraph, config: &SimConfig) -> SimNetwork<'a> {
    SimNetwork {
        graph,
        routing,
        interest_bits: config.interest_bits,
        data_bits: graph.object_size(),
    }
}

fn validate(config: &SimConfig) -> Result<()> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !(config.horizon.is_finite() && config.horizon >= 0.0) {
        return Err(Error::config("horizon must be finite and nonnegative"));
    }
    if !positive(config.params.update_interval) {
        return Err(Error::config("update interval must be positive"));
    }
    if !positive(config.interest_bits) {
        return Err(Error::config("Interest size must be positive"));
    }
    if !(config.propagation_delay.is_finite() && config.propagation_delay >= 0.0) {
        return Err(Error::config("propagation delay must be nonnegative"));
    }
    if !(config.params.rtt_beta > 0.0 && config.params.rtt_beta <= 1.0) {
        return Err(Error::config("RTT smoothing factor must be in (0, 1]"));
    }
    Ok(())
}

#[derive(Debug, Default)]
struct LinkQueue {
    waiting: VecDeque<Packet>,
    in_flight: Option<Packet>,
}

struct Engine<'a> {
    net: SimNetwork<'a>,
    config: &'a SimConfig,
    strategy: Box<dyn Strategy>,
    rng: ChaCha8Rng,
    requests: Vec<Request>,
    queue: EventQueue,
    links: Vec<LinkQueue>,
    caches: Vec<ContentStore>,
    pits: Vec<HashMap<PitKey, PitEntry>>,
    outstanding: usize,
    issued: usize,
    now: f64,
    hasher: DefaultHasher,
    log: MetricsLog,
}

impl<'a> Engine<'a> {
    fn new(
        graph: &'a NetworkGraph,
        routing: &'a RoutingGraph,
        strategy: Box<dyn Strategy>,
        rng: ChaCha8Rng,
        requests: Vec<Request>,
        config: &'a SimConfig,
    ) -> Self {
        let n = graph.node_count();
        let mut log = MetricsLog::empty(config.horizon, graph.node_names().to_vec());
        log.generated = requests.len();
        Engine {
            net: network(graph, routing, config),
            config,
            strategy,
            rng,
            requests,
            queue: EventQueue::new(),
            links: (0..graph.links().len()).map(|_| LinkQueue::default()).collect(),
            caches: (0..n).map(|i| ContentStore::new(graph.cache_capacity(i))).collect(),
            pits: vec![HashMap::new(); n],
            outstanding: 0,
            issued: 0,
            now: 0.0,
            hasher: DefaultHasher::new(),
            log,
        }
    }

    fn run(mut self) -> Result<MetricsLog> {
        if !self.requests.is_empty() {
            self.queue.push(self.requests[0].time, EventKind::Request(0));
            self.queue.push(self.config.params.update_interval, EventKind::IntervalUpdate);
        }
        let started = Instant::now();
        while let Some(event) = self.queue.pop() {
            debug_assert!(event.time >= self.now, "time went backwards");
            self.now = event.time;
            self.log.events += 1;
            self.trace(&event.kind);
            self.guard(started)?;
            match event.kind {
                EventKind::Request(n) => self.on_request(n),
                EventKind::TransmissionComplete(link) => self.on_transmission_complete(link),
                EventKind::Arrival { link, packet } => self.on_arrival(link, packet),
                EventKind::IntervalUpdate => self.on_interval(),
            }
        }
        if self.outstanding > 0 {
            return Err(Error::Stalled {
                time: self.now,
                outstanding: self.outstanding,
            });
        }
        self.log.end_time = self.now;
        self.log.pit_remaining = self.pits.iter().map(HashMap::len).sum();
        self.log.trace_hash = self.hasher.finish();
        Ok(self.log)
    }

    fn guard(&self, started: Instant) -> Result<()> {
        let tripped = self.config.max_events.is_some_and(|m| self.log.events > m)
            || (self.log.events.is_multiple_of(1024)
                && self.config.wall_clock_limit.is_some_and(|l| started.elapsed() > l));
        if tripped {
            return Err(Error::Livelock {
                time: self.now,
                events: self.log.events,
                outstanding: self.outstanding,
            });
        }
        Ok(())
    }

    fn trace(&mut self, kind: &EventKind) {
        let h = &mut self.hasher;
        self.now.to_bits().hash(h);
        match kind {
            EventKind::Request(n) => (0u8, *n).hash(h),
            EventKind::TransmissionComplete(l) => (1u8, *l).hash(h),
            EventKind::Arrival { link, packet } => {
                let key = packet.key();
                let tag = matches!(packet, Packet::Data(_)) as u8;
                (2u8, *link, tag, key.object, key.nonce).hash(h);
            }
            EventKind::IntervalUpdate => 3u8.hash(h),
        }
    }

    fn on_request(&mut self, n: usize) {
        let req = self.requests[n];
        self.issued += 1;
        self.outstanding += 1;
        if let Some(next) = self.requests.get(n + 1) {
            self.queue.push(next.time, EventKind::Request(n + 1));
        }
        self.strategy.on_request(&self.net, req.node, req.object, self.now);
        let interest = InterestPacket {
            object: req.object,
            nonce: req.nonce,
            created: self.now,
            size: self.config.interest_bits,
        };
        self.handle_interest(req.node, interest, None);
    }

    fn on_interval(&mut self) {
        self.strategy.on_interval(&self.net, self.now, &mut self.caches);
        if self.issued < self.requests.len() || self.outstanding > 0 {
            let next = self.now + self.config.params.update_interval;
            self.queue.push(next, EventKind::IntervalUpdate);
        }
    }

    fn on_transmission_complete(&mut self, link: LinkId) {
        let packet = self.links[link].in_flight.take().expect("completion of a busy link");
        let arrival = self.now + self.config.propagation_delay;
        self.queue.push(arrival, EventKind::Arrival { link, packet });
        if let Some(next) = self.links[link].waiting.pop_front() {
            self.start_transmission(link, next);
        }
    }

    fn on_arrival(&mut self, link: LinkId, packet: Packet) {
        let l = self.net.graph.link(link);
        let (from, to) = (l.from, l.to);
        match packet {
            Packet::Interest(p) => self.handle_interest(to, p, Some(from)),
            Packet::Data(p) => self.handle_data(to, p),
        }
    }

    fn enqueue(&mut self, link: LinkId, packet: Packet) {
        if self.links[link].in_flight.is_none() {
            self.start_transmission(link, packet);
        } else {
            self.links[link].waiting.push_back(packet);
        }
    }

    fn start_transmission(&mut self, link: LinkId, packet: Packet) {
        let capacity = self.net.graph.link(link).capacity;
        let done = self.now + packet.size() / capacity;
        self.links[link].in_flight = Some(packet);
        self.queue.push(done, EventKind::TransmissionComplete(link));
    }

    /// Sends Data for `interest` back over the interface it came from, or
    /// fulfils it at the requester.
    fn respond(&mut self, node: NodeId, interest: InterestPacket, from: Option<NodeId>) {
        match from {
            None => self.fulfil(node, interest.object, interest.created),
            Some(prev) => {
                let link = self.net.graph.link_between(node, prev).expect("reverse link exists");
                let data = DataPacket {
                    object: interest.object,
                    nonce: interest.nonce,
                    size: self.net.data_bits,
                };
                self.enqueue(link, Packet::Data(data));
            }
        }
    }

    fn fulfil(&mut self, requester: NodeId, object: usize, created: f64) {
        self.outstanding -= 1;
        self.log.requests.push(RequestRecord {
            creation: created,
            fulfill: self.now,
            object,
            requester,
        });
    }

    fn drop_request(&mut self) {
        // The request can never complete; keep the run terminating.
        self.outstanding -= 1;
    }

    fn handle_interest(&mut self, node: NodeId, interest: InterestPacket, from: Option<NodeId>) {
        let k = interest.object;
        self.strategy.on_interest(&self.net, node, k, self.now);
        let graph = self.net.graph;
        if graph.is_source(node, k) {
            self.respond(node, interest, from);
            return;
        }
        if self.caches[node].contains(k) {
            self.log.hits.push(HitRecord {
                time: self.now,
                node,
                object: k,
            });
            self.respond(node, interest, from);
            return;
        }
        let range = self.net.routing.hop_range(k, node);
        if range.is_empty() {
            self.log.anomalies.no_route += 1;
            self.drop_request();
            return;
        }
        let key = PitKey { object: k, nonce: interest.nonce };
        if self.pits[node].contains_key(&key) {
            self.log.anomalies.nonce_collisions += 1;
            self.drop_request();
            return;
        }
        let hop = self.strategy.select_hop(&self.net, node, k, &mut self.rng);
        if !range.contains(&hop) {
            self.log.anomalies.invalid_hops += 1;
            self.drop_request();
            return;
        }
        self.pits[node].insert(
            key,
            PitEntry {
                from,
                hop,
                forwarded_at: self.now,
                created: interest.created,
            },
        );
        self.strategy.on_forward(&self.net, hop, self.now);
        let link = self.net.routing.hop_link(hop);
        self.enqueue(link, Packet::Interest(interest));
    }

    fn handle_data(&mut self, node: NodeId, data: DataPacket) {
        let key = PitKey {
            object: data.object,
            nonce: data.nonce,
        };
        let Some(&entry) = self.pits[node].get(&key) else {
            self.log.anomalies.orphan_data += 1;
            return;
        };
        self.strategy.on_data(&self.net, entry.hop, self.now - entry.forwarded_at, self.now);
        let k = data.object;
        if !self.caches[node].contains(k) {
            let decision = self.strategy.cache_decision(&self.net, node, k, &self.caches[node], self.now);
            if decision != CacheDecision::Keep && !self.caches[node].apply(k, decision) {
                self.log.anomalies.cache_violations += 1;
            }
        }
        self.pits[node].remove(&key);
        let interest = InterestPacket {
            object: k,
            nonce: data.nonce,
            created: entry.created,
            size: self.config.interest_bits,
        };
        self.respond(node, interest, entry.from);
    }
}
