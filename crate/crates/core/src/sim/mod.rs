//! Deterministic discrete-event simulator.
//!
//! Events are ordered by time, then by class (node starts, crashes,
//! deliveries, wishes, timers), then by insertion order. Delivering before
//! timers at equal times makes a timeout of exactly 2δ see a reply that took
//! exactly 2δ.

pub mod adversary;
pub mod delay;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cert::{verify_certificate, ContributionLedger};
use crate::config::{Behavior, ScenarioConfig};
use crate::error::{Error, Result};
use crate::leader::LeaderMap;
use crate::sync::{self, NodeParams, SyncKind, Synchronizer};
use crate::time::Time;
use crate::trace::{Trace, TraceEvent, TraceMeta, TraceRecord};
use crate::types::{Action, Message, NodeId, Payload, TimerId, View};

pub use delay::DelayPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Start,
    Crash,
    Deliver,
    Script,
    Wish,
    Timer,
}

#[derive(Debug)]
enum Event {
    Start(NodeId),
    Crash(NodeId),
    Deliver { to: NodeId, msg_id: u64, msg: Message },
    Script { node: NodeId, step: usize },
    Wish(NodeId),
    Timer { node: NodeId, timer: TimerId, generation: u64 },
}

impl Event {
    fn class(&self) -> Class {
        match self {
            Event::Start(_) => Class::Start,
            Event::Crash(_) => Class::Crash,
            Event::Deliver { .. } => Class::Deliver,
            Event::Script { .. } => Class::Script,
            Event::Wish(_) => Class::Wish,
            Event::Timer { .. } => Class::Timer,
        }
    }
}

struct Node {
    sync: Box<dyn Synchronizer + Send>,
    behavior: Option<Behavior>,
    start: Time,
    started: bool,
    crashed: bool,
    timers: BTreeMap<TimerId, u64>,
    amplified: BTreeSet<View>,
}

struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    leaders: LeaderMap,
    nodes: Vec<Node>,
    first_honest: NodeId,
    queue: BTreeMap<(Time, Class, u64), Event>,
    seq: u64,
    next_msg: u64,
    delays: DelayPolicy,
    ledger: ContributionLedger,
    records: Vec<TraceRecord>,
    now: Time,
}

/// Runs one scenario to its horizon and returns the full trace.
pub fn run(cfg: &ScenarioConfig) -> Result<Trace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // The adversary is fixed first; a random leader order is drawn after.
    let corrupt = match cfg.static_leader_map()? {
        Some(map) => cfg.adversary.resolve(&map),
        None => cfg.adversary.resolve(&LeaderMap::round_robin(cfg.n)),
    };
    let leaders = match cfg.static_leader_map()? {
        Some(map) => map,
        None => LeaderMap::random(cfg.n, &mut rng),
    };
    let delay_rng = ChaCha8Rng::seed_from_u64(rand::Rng::gen(&mut rng));
    let first_honest = NodeId::all(cfg.n).find(|p| !corrupt.contains_key(p)).expect("n > f ensures an honest node");

    let nodes = NodeId::all(cfg.n)
        .map(|id| {
            let params = NodeParams {
                id,
                n: cfg.n,
                f: cfg.f,
                delta: cfg.delta,
                leaders: leaders.clone(),
                beta: cfg.beta,
                initial_view: cfg.initial_view(id),
            };
            Node {
                sync: sync::build(cfg.synchronizer, params),
                behavior: corrupt.get(&id).cloned(),
                start: cfg.start_time(id),
                started: false,
                crashed: false,
                timers: BTreeMap::new(),
                amplified: BTreeSet::new(),
            }
        })
        .collect();

    let mut sim = Simulator {
        cfg,
        leaders,
        nodes,
        first_honest,
        queue: BTreeMap::new(),
        seq: 0,
        next_msg: 0,
        delays: DelayPolicy::new(cfg.delay_mode, cfg.gst, cfg.delta, delay_rng),
        ledger: ContributionLedger::new(corrupt.keys().copied()),
        records: Vec::new(),
        now: Time::ZERO,
    };
    sim.schedule_initial();
    sim.run_loop()?;

    let meta = TraceMeta {
        synchronizer: cfg.synchronizer,
        n: cfg.n,
        f: cfg.f,
        delta: cfg.delta,
        gst: cfg.gst,
        horizon: cfg.horizon,
        c: cfg.c,
        wish_interval: cfg.wish_interval(),
        beta: cfg.beta,
        seed: cfg.seed,
        delay_mode: cfg.delay_mode,
        leaders: sim.leaders,
        corrupt: corrupt.iter().map(|(&id, b)| (id, b.name().to_string())).collect(),
        start_times: NodeId::all(cfg.n).map(|p| cfg.start_time(p)).collect(),
        initial_views: NodeId::all(cfg.n).map(|p| cfg.initial_view(p)).collect(),
    };
    Ok(Trace { meta, records: sim.records })
}

impl Simulator<'_> {
    fn schedule(&mut self, at: Time, event: Event) {
        if at > self.cfg.horizon {
            return;
        }
        self.seq += 1;
        self.queue.insert((at, event.class(), self.seq), event);
    }

    fn record(&mut self, node: NodeId, event: TraceEvent) {
        self.records.push(TraceRecord { time: self.now, node, event });
    }

    fn node(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.slot()]
    }

    fn schedule_initial(&mut self) {
        for id in NodeId::all(self.cfg.n) {
            let start = self.node(id).start;
            self.schedule(start, Event::Start(id));
            let behavior = self.node(id).behavior.clone();
            if adversary::runs_protocol(behavior.as_ref()) {
                self.schedule(start, Event::Wish(id));
            }
            match behavior {
                Some(Behavior::Crash { at }) => self.schedule(at.max(start), Event::Crash(id)),
                Some(Behavior::Scripted(steps)) => {
                    for (i, step) in steps.iter().enumerate().filter(|(_, s)| s.msg.sender == id) {
                        self.schedule(step.at.max(start), Event::Script { node: id, step: i });
                    }
                }
                _ => {}
            }
        }
    }

    fn run_loop(&mut self) -> Result<()> {
        let mut out = Vec::new();
        while let Some(((at, _, _), event)) = self.queue.pop_first() {
            self.now = at;
            let id = match &event {
                Event::Start(id) | Event::Crash(id) | Event::Wish(id) => *id,
                Event::Deliver { to, .. } => *to,
                Event::Script { node, .. } | Event::Timer { node, .. } => *node,
            };
            if self.node(id).crashed {
                continue;
            }
            let runs = adversary::runs_protocol(self.node(id).behavior.as_ref());
            let now = self.now;
            match event {
                Event::Start(_) => {
                    let node = self.node(id);
                    node.started = true;
                    let view = node.sync.current_view();
                    self.record(id, TraceEvent::Start { view });
                    if runs {
                        self.node(id).sync.start(now, &mut out);
                    }
                }
                Event::Crash(_) => {
                    self.node(id).crashed = true;
                    self.record(id, TraceEvent::Crash);
                }
                Event::Wish(_) => {
                    let view = self.node(id).sync.current_view();
                    self.record(id, TraceEvent::Wish { view });
                    self.node(id).sync.wish_to_advance(now, &mut out);
                    self.schedule(now + self.cfg.wish_interval(), Event::Wish(id));
                }
                Event::Timer { timer, generation, .. } => {
                    if self.node(id).timers.get(&timer) != Some(&generation) {
                        continue;
                    }
                    self.record(id, TraceEvent::Timer { timer });
                    self.node(id).sync.timer_fired(now, timer, &mut out);
                }
                Event::Deliver { msg_id, msg, .. } => {
                    self.record(id, TraceEvent::Deliver { msg_id, from: msg.sender, kind: msg.kind(), view: msg.view });
                    if runs {
                        self.node(id).sync.deliver(now, &msg, &mut out);
                    }
                    self.amplify(id, &msg)?;
                }
                Event::Script { step, .. } => {
                    let Some(Behavior::Scripted(steps)) = &self.node(id).behavior else { unreachable!() };
                    let step = steps[step].clone();
                    let to = match step.to {
                        Some(to) => vec![to],
                        None => NodeId::all(self.cfg.n).collect(),
                    };
                    self.transmit(id, to, step.msg)?;
                }
            }
            let actions = std::mem::take(&mut out);
            self.apply(id, actions)?;
        }
        Ok(())
    }

    fn apply(&mut self, id: NodeId, actions: Vec<Action>) -> Result<()> {
        for action in actions {
            match action {
                Action::Send { to, msg } => self.transmit(id, vec![to], msg)?,
                Action::Multicast { msg } => {
                    let (n, first_honest) = (self.cfg.n, self.first_honest);
                    let to = adversary::multicast_recipients(self.node(id).behavior.as_ref(), &msg, n, first_honest);
                    self.transmit(id, to, msg)?;
                }
                Action::SetTimer { timer, deadline } => {
                    let generation = self.bump_timer(id, timer);
                    self.schedule(deadline.max(self.now), Event::Timer { node: id, timer, generation });
                }
                Action::CancelTimer { timer } => {
                    self.bump_timer(id, timer);
                }
                Action::ProposeView { view } => self.record(id, TraceEvent::ProposeView { view }),
            }
        }
        Ok(())
    }

    fn bump_timer(&mut self, id: NodeId, timer: TimerId) -> u64 {
        let generation = self.node(id).timers.entry(timer).or_insert(0);
        *generation += 1;
        *generation
    }

    /// A corrupt relayer forwards each TC it sees, once per view, to the
    /// leaders of the next f+1 views.
    fn amplify(&mut self, id: NodeId, msg: &Message) -> Result<()> {
        if !matches!(self.node(id).behavior, Some(Behavior::TcAmplify)) {
            return Ok(());
        }
        let Payload::Tc { cert, .. } = &msg.payload else { return Ok(()) };
        if !self.node(id).amplified.insert(cert.view) {
            return Ok(());
        }
        let targets = adversary::amplify_targets(&self.leaders, id, cert.view, self.cfg.f);
        let relay = Message::tc(id, cert.clone(), true);
        self.transmit(id, targets, relay)
    }

    fn transmit(&mut self, from: NodeId, to: Vec<NodeId>, msg: Message) -> Result<()> {
        if to.is_empty() {
            return Ok(());
        }
        let corrupt = self.node(from).behavior.is_some();
        if let Some(cert) = msg.certificate() {
            if cert.view != msg.view || !verify_certificate(cert, self.cfg.f, &self.ledger) {
                if corrupt {
                    self.record(from, TraceEvent::ForgeryRejected { kind: msg.kind(), view: msg.view });
                    return Ok(());
                }
                return Err(Error::Invariant(format!("honest node {from} produced an invalid {}({})", msg.kind(), msg.view)));
            }
        }
        self.ledger.record(from, msg.kind(), msg.view);
        self.next_msg += 1;
        let msg_id = self.next_msg;
        let signers = msg.certificate().map(|c| c.signers.iter().copied().collect::<Vec<_>>());
        let to_leader = match msg.payload {
            Payload::Tc { to_leader, .. } => Some(to_leader),
            _ => None,
        };
        for recipient in to {
            let arrival = self.delays.delivery_time(self.now, corrupt);
            let deliver_at = arrival.max(self.node(recipient).start);
            self.record(
                from,
                TraceEvent::Send {
                    msg_id,
                    to: recipient,
                    kind: msg.kind(),
                    view: msg.view,
                    signers: signers.clone(),
                    to_leader,
                    deliver_at,
                },
            );
            self.schedule(deliver_at, Event::Deliver { to: recipient, msg_id, msg: msg.clone() });
        }
        Ok(())
    }
}

/// Convenience for tests and examples: the default scenario for `kind`.
pub fn run_default(kind: SyncKind, n: usize, f: usize) -> Result<Trace> {
    run(&ScenarioConfig::new(kind, n, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MessageKind;

    fn cfg(kind: SyncKind) -> ScenarioConfig {
        ScenarioConfig { horizon: Time::units(30), ..ScenarioConfig::new(kind, 4, 1) }
    }

    #[test]
    fn rejects_invalid_config() {
        let bad = ScenarioConfig::new(SyncKind::Cogsworth, 3, 1);
        assert!(matches!(run(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn doubling_sends_nothing() {
        let trace = run(&cfg(SyncKind::Doubling)).unwrap();
        assert_eq!(trace.honest_sends(), 0);
        trace.check_all().unwrap();
        let views: Vec<View> = trace.honest_proposals().filter(|p| p.2 == NodeId(1)).map(|p| p.3).collect();
        // β = 10: views 1 and 2 begin at 10 and 30.
        assert_eq!(views, vec![1, 2]);
    }

    #[test]
    fn cogsworth_first_view_after_four_delta() {
        let trace = run(&cfg(SyncKind::Cogsworth)).unwrap();
        trace.check_all().unwrap();
        let first: Vec<(Time, NodeId)> = trace.honest_proposals().filter(|p| p.3 == 1).map(|p| (p.1, p.2)).collect();
        assert_eq!(first.len(), 4);
        assert!(first.iter().all(|&(t, _)| t == Time::units(4)));
    }

    #[test]
    fn broadcast_first_view_after_one_delta() {
        let trace = run(&cfg(SyncKind::Broadcast)).unwrap();
        trace.check_all().unwrap();
        assert!(trace.honest_proposals().filter(|p| p.3 == 1).all(|p| p.1 == Time::units(1)));
    }

    #[test]
    fn forged_certificate_is_rejected_and_recorded() {
        use crate::cert::{CertKind, Certificate};
        use crate::config::{AdversarySpec, ScriptStep, Target};
        // Node 4 claims honest nodes 1 and 2 wished for view 9.
        let cert = Certificate { kind: CertKind::Tc, view: 9, signers: [NodeId(1), NodeId(2)].into() };
        let step = ScriptStep { at: Time::units(1), to: None, msg: Message::tc(NodeId(4), cert, false) };
        let adversary = AdversarySpec::group(Behavior::Scripted(vec![step]), vec![Target::Node(NodeId(4))]);
        let trace = run(&ScenarioConfig { adversary, ..cfg(SyncKind::Cogsworth) }).unwrap();
        assert!(trace.records.iter().any(|r| matches!(r.event, TraceEvent::ForgeryRejected { kind: MessageKind::Tc, view: 9 })));
        assert!(!trace.honest_proposals().any(|p| p.3 == 9));
        trace.check_all().unwrap();
    }

    #[test]
    fn delivery_waits_for_late_start() {
        let mut c = cfg(SyncKind::Broadcast);
        c.start_times = Some(vec![Time::ZERO, Time::ZERO, Time::ZERO, Time::units(5)]);
        let trace = run(&c).unwrap();
        trace.check_all().unwrap();
        let late = trace.records.iter().filter(|r| r.node == NodeId(4) && matches!(r.event, TraceEvent::Deliver { .. }));
        assert!(late.clone().count() > 0);
        assert!(late.into_iter().all(|r| r.time >= Time::units(5)));
    }

    #[test]
    fn same_seed_same_trace() {
        let mut c = cfg(SyncKind::Cogsworth);
        c.delay_mode = crate::config::DelayMode::UniformRandom;
        c.seed = 99;
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }
}
