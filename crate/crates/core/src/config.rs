//! Scenario configuration, adversary description and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ParseError};
use crate::leader::LeaderMap;
use crate::sync::SyncKind;
use crate::time::Time;
use crate::types::{Message, NodeId, View};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    /// Every message takes the longest delay the model allows.
    WorstCase,
    /// Delivery drawn uniformly from `(send, max(send, GST) + δ]`.
    UniformRandom,
    /// Corrupt senders are delivered as early as possible, honest traffic as
    /// late as possible.
    AdversaryChosen,
}

impl DelayMode {
    pub fn name(self) -> &'static str {
        match self {
            DelayMode::WorstCase => "worst",
            DelayMode::UniformRandom => "uniform",
            DelayMode::AdversaryChosen => "adversary",
        }
    }
}

impl FromStr for DelayMode {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst" | "worst_case" => Ok(DelayMode::WorstCase),
            "uniform" | "uniform_random" => Ok(DelayMode::UniformRandom),
            "adversary" | "adversary_chosen" => Ok(DelayMode::AdversaryChosen),
            _ => Err(ParseError::Value {
                key: "delay".into(),
                value: s.into(),
                reason: "expected worst, uniform or adversary".into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderMapSpec {
    RoundRobin,
    /// A permutation drawn from the run's seed after the adversary is fixed.
    Random,
    Permutation(Vec<usize>),
}

impl fmt::Display for LeaderMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeaderMapSpec::RoundRobin => f.write_str("roundrobin"),
            LeaderMapSpec::Random => f.write_str("random"),
            LeaderMapSpec::Permutation(p) => {
                let items: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "perm:{}", items.join(","))
            }
        }
    }
}

impl FromStr for LeaderMapSpec {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roundrobin" | "round-robin" => Ok(LeaderMapSpec::RoundRobin),
            "random" => Ok(LeaderMapSpec::Random),
            other => {
                let list = other.strip_prefix("perm:").unwrap_or(other);
                parse_list::<usize>("leader_map", list).map(LeaderMapSpec::Permutation)
            }
        }
    }
}

/// Who a group of adversarial behavior applies to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Node(NodeId),
    /// The leaders of views `first..first+count`.
    Leaders { first: View, count: usize },
}

/// A message a scripted corrupt node sends at a fixed time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub at: Time,
    /// `None` multicasts to every node.
    pub to: Option<NodeId>,
    pub msg: Message,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    /// Follows the protocol, then stops for good at `at`.
    Crash { at: Time },
    /// Never sends anything.
    Silent,
    /// Acts honestly but, as a leader, delivers its QC to a single honest node.
    QcWithhold,
    /// Acts honestly and additionally relays every TC it sees to the leaders
    /// of the f+1 following views.
    TcAmplify,
    /// Sends exactly the scripted messages and nothing else.
    Scripted(Vec<ScriptStep>),
}

impl Behavior {
    pub fn name(&self) -> &'static str {
        match self {
            Behavior::Crash { .. } => "crash",
            Behavior::Silent => "silent",
            Behavior::QcWithhold => "withhold",
            Behavior::TcAmplify => "amplify",
            Behavior::Scripted(_) => "scripted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryGroup {
    pub behavior: Behavior,
    pub targets: Vec<Target>,
}

/// The corrupt nodes and what they do, fixed before the run starts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub groups: Vec<AdversaryGroup>,
}

impl AdversarySpec {
    pub fn none() -> Self {
        AdversarySpec::default()
    }

    pub fn group(behavior: Behavior, targets: Vec<Target>) -> Self {
        AdversarySpec { groups: vec![AdversaryGroup { behavior, targets }] }
    }

    /// The leaders of views `1..=count` crash at `at`.
    pub fn crash_leaders(count: usize, at: Time) -> Self {
        Self::group(Behavior::Crash { at }, vec![Target::Leaders { first: 1, count }])
    }

    pub fn refers_to_leaders(&self) -> bool {
        self.groups.iter().flat_map(|g| &g.targets).any(|t| matches!(t, Target::Leaders { .. }))
    }

    /// Sets the number of faulty leaders in the first leader-relative target
    /// (or adds one to the first group). Used by sweeps over `t`.
    pub fn with_fault_count(mut self, t: usize) -> Self {
        let Some(group) = self.groups.first_mut() else {
            return Self::crash_leaders(t, Time::ZERO);
        };
        match group.targets.iter_mut().find(|t| matches!(t, Target::Leaders { .. })) {
            Some(Target::Leaders { count, .. }) => *count = t,
            _ => group.targets = vec![Target::Leaders { first: 1, count: t }],
        }
        self
    }

    /// Maps every corrupt node to its behavior. The first group naming a
    /// node wins.
    pub fn resolve(&self, leaders: &LeaderMap) -> BTreeMap<NodeId, Behavior> {
        let mut out = BTreeMap::new();
        for group in &self.groups {
            for target in &group.targets {
                let nodes: Vec<NodeId> = match *target {
                    Target::Node(id) => vec![id],
                    Target::Leaders { first, count } => {
                        (first..first + count as u64).map(|v| leaders.leader_of(v)).collect()
                    }
                };
                for node in nodes {
                    out.entry(node).or_insert_with(|| group.behavior.clone());
                }
            }
        }
        out
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| {
                let targets: Vec<String> = g
                    .targets
                    .iter()
                    .map(|t| match *t {
                        Target::Node(id) => id.to_string(),
                        Target::Leaders { first: 1, count: 1 } => "leader".to_string(),
                        Target::Leaders { first, count: 1 } => format!("leader{first}"),
                        Target::Leaders { first, count } => format!("leaders{first}-{}", first + count as u64 - 1),
                    })
                    .collect();
                match &g.behavior {
                    Behavior::Crash { at } => format!("crash:{}@{at}", targets.join(",")),
                    Behavior::Scripted(steps) => format!("scripted:{}#{}", targets.join(","), steps.len()),
                    other => format!("{}:{}", other.name(), targets.join(",")),
                }
            })
            .collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for AdversarySpec {
    type Err = ParseError;

    /// Grammar: `none`, or groups joined by `+`, each
    /// `crash:<targets>@<time>`, `silent:<targets>`, `withhold:<targets>` or
    /// `amplify:<targets>`. Targets are comma-separated node ids, `leader`
    /// (leader of view 1), `leader<v>` or `leaders<a>-<b>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ParseError::Adversary { spec: s.to_string(), reason: reason.to_string() };
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(AdversarySpec::none());
        }
        let mut groups = Vec::new();
        for part in s.split('+') {
            let (name, rest) = part.split_once(':').ok_or_else(|| err("expected <behavior>:<targets>"))?;
            let (targets, behavior) = match name {
                "crash" => {
                    let (targets, at) = rest.split_once('@').ok_or_else(|| err("crash needs @<time>"))?;
                    let at: Time = at.parse().map_err(|_| err("bad crash time"))?;
                    (targets, Behavior::Crash { at })
                }
                "silent" => (rest, Behavior::Silent),
                "withhold" => (rest, Behavior::QcWithhold),
                "amplify" => (rest, Behavior::TcAmplify),
                _ => return Err(err("unknown behavior; expected crash, silent, withhold or amplify")),
            };
            let targets = targets
                .split(',')
                .map(|t| parse_target(t.trim()).ok_or_else(|| err("bad target")))
                .collect::<Result<Vec<_>, _>>()?;
            groups.push(AdversaryGroup { behavior, targets });
        }
        Ok(AdversarySpec { groups })
    }
}

fn parse_target(t: &str) -> Option<Target> {
    if t == "leader" {
        return Some(Target::Leaders { first: 1, count: 1 });
    }
    if let Some(range) = t.strip_prefix("leaders") {
        let (a, b) = range.split_once('-')?;
        let (a, b): (View, View) = (a.parse().ok()?, b.parse().ok()?);
        if b < a {
            return None;
        }
        return Some(Target::Leaders { first: a, count: (b - a + 1) as usize });
    }
    if let Some(v) = t.strip_prefix("leader") {
        return Some(Target::Leaders { first: v.parse().ok()?, count: 1 });
    }
    t.parse().ok().map(|id| Target::Node(NodeId(id)))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>, ParseError> {
    s.split(',')
        .map(|x| {
            x.trim().parse::<T>().map_err(|_| ParseError::Value {
                key: key.into(),
                value: s.into(),
                reason: "expected a comma-separated list".into(),
            })
        })
        .collect()
}

/// A fully specified simulation run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub synchronizer: SyncKind,
    pub n: usize,
    pub f: usize,
    pub delta: Time,
    pub gst: Time,
    /// Δ, the spacing of `wish_to_advance` calls. `None` picks the
    /// synchronizer's smallest admissible value.
    pub wish_interval: Option<Time>,
    pub beta: Time,
    /// Minimum overlap for a view to count as synchronized.
    pub c: Time,
    pub horizon: Time,
    pub seed: u64,
    pub leader_map: LeaderMapSpec,
    pub adversary: AdversarySpec,
    pub delay_mode: DelayMode,
    /// Per-node starting views (view doubling only).
    pub initial_views: Option<Vec<View>>,
    pub start_times: Option<Vec<Time>>,
    /// Reject wish intervals outside the range the correctness argument needs.
    pub enforce_wish_floor: bool,
}

impl ScenarioConfig {
    pub fn new(synchronizer: SyncKind, n: usize, f: usize) -> Self {
        ScenarioConfig {
            synchronizer,
            n,
            f,
            delta: Time::units(1),
            gst: Time::ZERO,
            wish_interval: None,
            beta: Time::units(10),
            c: Time::ratio(1, 2),
            horizon: Time::units(200),
            seed: 0,
            leader_map: LeaderMapSpec::RoundRobin,
            adversary: AdversarySpec::none(),
            delay_mode: DelayMode::WorstCase,
            initial_views: None,
            start_times: None,
            enforce_wish_floor: true,
        }
    }

    /// Lower bound on Δ for broadcast (2δ + c) and Cogsworth (4δ + c). View
    /// doubling has an upper bound instead (Δ ≤ β) and no floor.
    pub fn wish_floor(&self) -> Option<Time> {
        match self.synchronizer {
            SyncKind::Doubling => None,
            SyncKind::Broadcast => Some(self.delta * 2 + self.c),
            SyncKind::Cogsworth => Some(self.delta * 4 + self.c),
        }
    }

    pub fn wish_interval(&self) -> Time {
        self.wish_interval.unwrap_or_else(|| match self.synchronizer {
            SyncKind::Doubling => self.beta,
            _ => self.wish_floor().expect("floor exists"),
        })
    }

    pub fn start_time(&self, node: NodeId) -> Time {
        self.start_times.as_ref().map_or(Time::ZERO, |s| s[node.slot()])
    }

    pub fn initial_view(&self, node: NodeId) -> View {
        self.initial_views.as_ref().map_or(0, |v| v[node.slot()])
    }

    /// Leader map fixed before the run, unless it is drawn at random.
    pub fn static_leader_map(&self) -> Result<Option<LeaderMap>, ConfigError> {
        match &self.leader_map {
            LeaderMapSpec::RoundRobin => Ok(Some(LeaderMap::round_robin(self.n.max(1)))),
            LeaderMapSpec::Random => Ok(None),
            LeaderMapSpec::Permutation(p) => {
                if p.len() != self.n {
                    return Err(ConfigError::BadPermutation { n: self.n });
                }
                LeaderMap::from_permutation(p).map(Some)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.n;
        if n == 0 {
            return Err(ConfigError::NoNodes);
        }
        if n < 3 * self.f + 1 {
            return Err(ConfigError::TooManyFaults { n, f: self.f });
        }
        if self.delta.is_zero() {
            return Err(ConfigError::ZeroDelta);
        }
        if self.wish_interval().is_zero() {
            return Err(ConfigError::ZeroWishInterval);
        }
        if self.synchronizer == SyncKind::Doubling && self.beta.is_zero() {
            return Err(ConfigError::ZeroBeta);
        }
        if self.enforce_wish_floor {
            let wi = self.wish_interval();
            if let Some(floor) = self.wish_floor() {
                if wi < floor {
                    return Err(ConfigError::WishIntervalBelowFloor {
                        synchronizer: self.synchronizer.to_string(),
                        wish_interval: wi.to_string(),
                        floor: floor.to_string(),
                    });
                }
            } else if wi > self.beta {
                return Err(ConfigError::WishIntervalAboveBeta { wish_interval: wi.to_string(), beta: self.beta.to_string() });
            }
        }
        if self.horizon <= self.gst {
            return Err(ConfigError::HorizonNotAfterGst { horizon: self.horizon.to_string(), gst: self.gst.to_string() });
        }
        let static_map = self.static_leader_map()?;
        if self.adversary.refers_to_leaders() && static_map.is_none() {
            return Err(ConfigError::LeaderTargetsWithRandomMap);
        }
        for target in self.adversary.groups.iter().flat_map(|g| &g.targets) {
            if let Target::Node(id) = target {
                if id.index() == 0 || id.index() > n {
                    return Err(ConfigError::NodeOutOfRange { node: id.index(), n });
                }
            }
        }
        for group in &self.adversary.groups {
            let applicable = match group.behavior {
                Behavior::QcWithhold | Behavior::TcAmplify => self.synchronizer == SyncKind::Cogsworth,
                _ => true,
            };
            if !applicable {
                return Err(ConfigError::BehaviorNotApplicable {
                    behavior: group.behavior.name().into(),
                    synchronizer: self.synchronizer.to_string(),
                });
            }
        }
        // Leader targets resolve against the static map; with a random map
        // only explicit node ids are allowed, so the identity map suffices.
        let map = static_map.unwrap_or_else(|| LeaderMap::round_robin(n));
        let corrupt = self.adversary.resolve(&map);
        if corrupt.len() > self.f {
            return Err(ConfigError::TooManyCorrupt { count: corrupt.len(), f: self.f });
        }
        for (node, behavior) in &corrupt {
            if let Behavior::Scripted(steps) = behavior {
                for step in steps {
                    let from = step.msg.sender;
                    if corrupt.get(&from).is_none_or(|b| !matches!(b, Behavior::Scripted(_))) {
                        return Err(ConfigError::ScriptedFromHonest { node: from.index() });
                    }
                    if let Some(to) = step.to {
                        if to.index() == 0 || to.index() > n {
                            return Err(ConfigError::NodeOutOfRange { node: to.index(), n });
                        }
                    }
                }
            }
            let _ = node;
        }
        if let Some(views) = &self.initial_views {
            if self.synchronizer != SyncKind::Doubling || views.len() != n || views.iter().any(|&v| v >= 63) {
                return Err(ConfigError::BadInitialViews { n });
            }
        }
        if let Some(starts) = &self.start_times {
            if starts.len() != n {
                return Err(ConfigError::BadStartTimes { n });
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting, as found in config files and CLI
    /// overrides.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ParseError> {
        let bad = |reason: &str| ParseError::Value { key: key.into(), value: value.into(), reason: reason.into() };
        let value = value.trim();
        match key.trim() {
            "sync" | "synchronizer" => self.synchronizer = value.parse()?,
            "n" => self.n = value.parse().map_err(|_| bad("expected an integer"))?,
            "f" => self.f = value.parse().map_err(|_| bad("expected an integer"))?,
            "delta" => self.delta = value.parse()?,
            "gst" => self.gst = value.parse()?,
            "wish_interval" | "wish-interval" => self.wish_interval = Some(value.parse()?),
            "beta" => self.beta = value.parse()?,
            "c" => self.c = value.parse()?,
            "horizon" => self.horizon = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an integer"))?,
            "leader_map" | "leader-map" => self.leader_map = value.parse()?,
            "adversary" => self.adversary = value.parse()?,
            "delay" | "delay_mode" => self.delay_mode = value.parse()?,
            "initial_views" | "initial-views" => self.initial_views = Some(parse_list(key, value)?),
            "start_times" | "start-times" => self.start_times = Some(parse_list(key, value)?),
            "enforce_wish_floor" => self.enforce_wish_floor = value.parse().map_err(|_| bad("expected true or false"))?,
            other => return Err(ParseError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file into `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), ParseError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ParseError::Line { line: i + 1, text: line.to_string() })?;
            self.apply(key, value)?;
        }
        Ok(())
    }

    /// The same settings in the file format understood by
    /// [`apply_file_contents`](Self::apply_file_contents).
    pub fn to_file_contents(&self) -> String {
        let mut lines = vec![
            format!("sync = {}", self.synchronizer),
            format!("n = {}", self.n),
            format!("f = {}", self.f),
            format!("delta = {}", self.delta),
            format!("gst = {}", self.gst),
            format!("wish_interval = {}", self.wish_interval()),
            format!("beta = {}", self.beta),
            format!("c = {}", self.c),
            format!("horizon = {}", self.horizon),
            format!("seed = {}", self.seed),
            format!("leader_map = {}", self.leader_map),
            format!("adversary = {}", self.adversary),
            format!("delay = {}", self.delay_mode.name()),
            format!("enforce_wish_floor = {}", self.enforce_wish_floor),
        ];
        if let Some(v) = &self.initial_views {
            lines.push(format!("initial_views = {}", join(v)));
        }
        if let Some(s) = &self.start_times {
            lines.push(format!("start_times = {}", join(s)));
        }
        lines.join("\n") + "\n"
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
