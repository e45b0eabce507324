// SPDX-License-Identifier: Apache-2.0

//! Every source of randomness in a run: stubbornness `alpha(t)`, the
//! schedule draw `U_t`, the social graph `G(t)` and the initial opinions.
//!
//! Each source reads from its own generator, seeded from a lane of the run
//! seed (see [`StreamSeeds`]), so changing one specification never perturbs
//! the draws of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::model::{InteractionMode, OpinionState, StubbornnessDraw};

pub type StreamRng = ChaCha8Rng;

/// Lane offsets added to the run seed before mixing.
const LANE_OFFSETS: [u64; 4] = [
    0x9E37_79B9_7F4A_7C15, // alpha
    0x3C6E_F372_FE94_F82A, // schedule
    0xDAA6_6D2C_7DDF_743F, // social
    0x78DD_E6E5_FD29_F054, // initial opinions
];

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-source seeds derived from one run seed as
/// `splitmix64(seed + LANE_OFFSETS[k])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeeds {
    pub alpha: u64,
    pub schedule: u64,
    pub social: u64,
    pub initial: u64,
}

impl StreamSeeds {
    pub fn derive(seed: u64) -> Self {
        let lane = |k: usize| splitmix64(seed.wrapping_add(LANE_OFFSETS[k]));
        Self {
            alpha: lane(0),
            schedule: lane(1),
            social: lane(2),
            initial: lane(3),
        }
    }
}

/// The four generators of one run.
#[derive(Debug, Clone)]
pub struct Streams {
    pub alpha: StreamRng,
    pub schedule: StreamRng,
    pub social: StreamRng,
    pub initial: StreamRng,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        let s = StreamSeeds::derive(seed);
        Self {
            alpha: StreamRng::seed_from_u64(s.alpha),
            schedule: StreamRng::seed_from_u64(s.schedule),
            social: StreamRng::seed_from_u64(s.social),
            initial: StreamRng::seed_from_u64(s.initial),
        }
    }
}

/// Distribution of a non-stubborn agent's `alpha_i(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaDistribution {
    Constant {
        value: f64,
    },
    UniformInterval {
        low: f64,
        high: f64,
    },
    TwoPoint {
        low: f64,
        high: f64,
        p_high: f64,
    },
    /// Fixed value per agent, listed in agent order.
    PerAgentTable {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubbornnessSpec {
    pub distribution: AlphaDistribution,
    /// Bound on every sampled `alpha_i < 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
}

impl StubbornnessSpec {
    pub fn constant(value: f64) -> Self {
        Self {
            distribution: AlphaDistribution::Constant { value },
            gamma_max: None,
        }
    }

    /// Values the sampler can emit, as closed intervals.
    fn support(&self) -> Vec<(f64, f64)> {
        match &self.distribution {
            AlphaDistribution::Constant { value } => vec![(*value, *value)],
            AlphaDistribution::UniformInterval { low, high } => vec![(*low, *high)],
            AlphaDistribution::TwoPoint { low, high, p_high } => {
                let mut s = Vec::new();
                if *p_high < 1.0 {
                    s.push((*low, *low));
                }
                if *p_high > 0.0 {
                    s.push((*high, *high));
                }
                s
            }
            AlphaDistribution::PerAgentTable { values } => {
                values.iter().map(|v| (*v, *v)).collect()
            }
        }
    }

    fn is_fixed(&self) -> bool {
        matches!(
            self.distribution,
            AlphaDistribution::Constant { .. } | AlphaDistribution::PerAgentTable { .. }
        )
    }

    /// Largest non-stubborn value the sampler can emit, if any.
    pub fn sup_below_one(&self) -> Option<f64> {
        self.support()
            .into_iter()
            .filter_map(|(lo, hi)| {
                if hi < 1.0 {
                    Some(hi)
                } else if lo < 1.0 {
                    Some(1.0)
                } else {
                    None
                }
            })
            .reduce(f64::max)
    }

    pub fn violations(&self, n: usize) -> Vec<String> {
        let mut v = Vec::new();
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        match &self.distribution {
            AlphaDistribution::Constant { value } if !unit(*value) => {
                v.push(format!("constant stubbornness {value} is outside [0, 1]"))
            }
            AlphaDistribution::UniformInterval { low, high }
                if !(unit(*low) && unit(*high) && low <= high) =>
            {
                v.push(format!(
                    "stubbornness interval [{low}, {high}] is not inside [0, 1]"
                ))
            }
            AlphaDistribution::TwoPoint { low, high, p_high } => {
                if !(unit(*low) && unit(*high)) {
                    v.push("two-point stubbornness values must lie in [0, 1]".to_string());
                }
                if !unit(*p_high) {
                    v.push(format!("two-point probability {p_high} is outside [0, 1]"));
                }
            }
            AlphaDistribution::PerAgentTable { values } => {
                if values.len() != n {
                    v.push(format!(
                        "stubbornness table has {} entries for {n} agents",
                        values.len()
                    ));
                }
                if values.iter().any(|x| !unit(*x)) {
                    v.push("stubbornness table entries must lie in [0, 1]".to_string());
                }
            }
            _ => {}
        }
        if let Some(g) = self.gamma_max {
            if !(0.0..1.0).contains(&g) {
                v.push(format!("gamma_max {g} must lie in [0, 1)"));
            } else if self.is_fixed() && self.support().iter().any(|&(lo, hi)| lo < 1.0 && hi > g) {
                // Random draws are clamped; explicit values are never rewritten.
                v.push(format!(
                    "fixed stubbornness value lies above gamma_max = {g}"
                ));
            }
        }
        v
    }

    fn sample_for(&self, agent: usize, rng: &mut StreamRng) -> f64 {
        let a = match &self.distribution {
            AlphaDistribution::Constant { value } => *value,
            AlphaDistribution::UniformInterval { low, high } => {
                if low < high {
                    rng.gen_range(*low..=*high)
                } else {
                    *low
                }
            }
            AlphaDistribution::TwoPoint { low, high, p_high } => {
                if rng.gen_bool(*p_high) {
                    *high
                } else {
                    *low
                }
            }
            AlphaDistribution::PerAgentTable { values } => values[agent],
        };
        match self.gamma_max {
            Some(g) if a < 1.0 => a.min(g),
            _ => a,
        }
    }
}

/// One support element of the schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleElement {
    /// Agent subset, 0-based, sorted.
    Agents(Vec<usize>),
    /// Matching as 0-based `(min, max)` pairs.
    Matching(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry {
    pub element: ScheduleElement,
    pub prob: f64,
}

/// Finite support `S` with selection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::io::ScheduleSpecWire",
    into = "crate::io::ScheduleSpecWire"
)]
pub struct ScheduleSpec {
    pub mode: InteractionMode,
    pub support: Vec<ScheduleEntry>,
}

/// Realized `U_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleDraw {
    Group(Vec<usize>),
    Pair(Vec<(usize, usize)>),
}

impl ScheduleDraw {
    /// Agents touched by the draw, sorted.
    pub fn agents(&self) -> Vec<usize> {
        match self {
            ScheduleDraw::Group(a) => a.clone(),
            ScheduleDraw::Pair(m) => {
                let mut v: Vec<usize> = m.iter().flat_map(|&(i, j)| [i, j]).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn mode(&self) -> InteractionMode {
        match self {
            ScheduleDraw::Group(_) => InteractionMode::Group,
            ScheduleDraw::Pair(_) => InteractionMode::Pair,
        }
    }
}

/// A graph given by edge list or by name; sized when materialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphLiteral {
    Edges(Vec<[usize; 2]>),
    Named(NamedGraph),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGraph {
    Complete,
    Empty,
    Path,
    Cycle,
}

impl GraphLiteral {
    pub fn materialize(&self, n: usize) -> Result<SimpleGraph> {
        match self {
            GraphLiteral::Edges(e) => SimpleGraph::from_one_based(n, e),
            GraphLiteral::Named(NamedGraph::Complete) => Ok(SimpleGraph::complete(n)),
            GraphLiteral::Named(NamedGraph::Empty) => Ok(SimpleGraph::empty(n)),
            GraphLiteral::Named(NamedGraph::Path) => Ok(SimpleGraph::path(n)),
            GraphLiteral::Named(NamedGraph::Cycle) => Ok(SimpleGraph::cycle(n)),
        }
    }

    pub fn of(g: &SimpleGraph) -> Self {
        GraphLiteral::Edges(g.to_one_based())
    }
}

/// Evolution of the social graph `G(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SocialSpec {
    Static {
        graph: GraphLiteral,
    },
    /// `graphs[t mod len]`.
    Sequence {
        graphs: Vec<GraphLiteral>,
    },
    /// Fresh Erdos-Renyi graph each step. Not part of the model proper; an
    /// extension point for time-varying experiments.
    RandomEr {
        p: f64,
    },
}

impl SocialSpec {
    pub fn violations(&self, n: usize) -> Vec<String> {
        match self {
            SocialSpec::Static { graph } => graph
                .materialize(n)
                .err()
                .map(|e| vec![format!("social graph: {e}")])
                .unwrap_or_default(),
            SocialSpec::Sequence { graphs } => {
                if graphs.is_empty() {
                    return vec!["social graph sequence is empty".to_string()];
                }
                graphs
                    .iter()
                    .enumerate()
                    .filter_map(|(k, g)| {
                        g.materialize(n)
                            .err()
                            .map(|e| format!("social graph {}: {e}", k + 1))
                    })
                    .collect()
            }
            SocialSpec::RandomEr { p } => {
                if (0.0..=1.0).contains(p) {
                    vec![]
                } else {
                    vec![format!("edge probability {p} is outside [0, 1]")]
                }
            }
        }
    }

    /// `G(0)` when it is deterministic.
    pub fn initial_graph(&self, n: usize) -> Option<SimpleGraph> {
        match self {
            SocialSpec::Static { graph } => graph.materialize(n).ok(),
            SocialSpec::Sequence { graphs } => graphs.first().and_then(|g| g.materialize(n).ok()),
            SocialSpec::RandomEr { .. } => None,
        }
    }
}

/// How the step-0 opinions are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Explicit {
        opinions: Vec<Vec<f64>>,
    },
    /// Every coordinate i.i.d. uniform on `[low, high]`.
    Uniform {
        low: f64,
        high: f64,
    },
}

impl InitialSpec {
    pub fn violations(&self, n: usize, d: usize) -> Vec<String> {
        match self {
            InitialSpec::Explicit { opinions } => {
                let mut v = Vec::new();
                if opinions.len() != n {
                    v.push(format!(
                        "{} initial opinions given for {n} agents",
                        opinions.len()
                    ));
                }
                if opinions.iter().any(|r| r.len() != d) {
                    v.push(format!("initial opinions must have dimension {d}"));
                }
                if opinions.iter().flatten().any(|x| !x.is_finite()) {
                    v.push("initial opinions must be finite".to_string());
                }
                v
            }
            InitialSpec::Uniform { low, high } => {
                if low.is_finite() && high.is_finite() && low <= high {
                    vec![]
                } else {
                    vec![format!("initial interval [{low}, {high}] is invalid")]
                }
            }
        }
    }

    pub fn sample(&self, n: usize, d: usize, rng: &mut StreamRng) -> Result<OpinionState> {
        match self {
            InitialSpec::Explicit { opinions } => {
                let st = OpinionState::from_rows(opinions)?;
                if st.n() != n || st.d() != d {
                    return Err(Error::shape("initial opinions do not match n x d"));
                }
                Ok(st)
            }
            InitialSpec::Uniform { low, high } => {
                let values = (0..n * d)
                    .map(|_| {
                        if low < high {
                            rng.gen_range(*low..=*high)
                        } else {
                            *low
                        }
                    })
                    .collect();
                OpinionState::new(0, n, d, values)
            }
        }
    }
}

/// Stubbornness for one step: agents touched by the draw get a sampled value,
/// every other agent is absolutely stubborn.
pub fn sample_alpha(
    spec: &StubbornnessSpec,
    draw: &ScheduleDraw,
    n: usize,
    rng: &mut StreamRng,
) -> StubbornnessDraw {
    let mut alphas = vec![1.0; n];
    for i in draw.agents() {
        alphas[i] = spec.sample_for(i, rng);
    }
    StubbornnessDraw::new(alphas).expect("validated specs sample inside [0, 1]")
}

pub fn sample_schedule(spec: &ScheduleSpec, rng: &mut StreamRng) -> ScheduleDraw {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = spec.support.last().expect("validated support is non-empty");
    for entry in &spec.support {
        acc += entry.prob;
        if u < acc {
            chosen = entry;
            break;
        }
    }
    match &chosen.element {
        ScheduleElement::Agents(a) => ScheduleDraw::Group(a.clone()),
        ScheduleElement::Matching(m) => ScheduleDraw::Pair(m.clone()),
    }
}

/// `G(t)`. Only `random_er` consumes randomness.
pub fn sample_social(
    spec: &SocialSpec,
    n: usize,
    t: u64,
    rng: &mut StreamRng,
) -> Result<SimpleGraph> {
    match spec {
        SocialSpec::Static { graph } => graph.materialize(n),
        SocialSpec::Sequence { graphs } => {
            graphs[(t % graphs.len() as u64) as usize].materialize(n)
        }
        SocialSpec::RandomEr { p } => {
            let mut g = SimpleGraph::empty(n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(*p) {
                        g.insert_edge(i, j);
                    }
                }
            }
            Ok(g)
        }
    }
}

/// Named reductions of the mixed model.
#[derive(Debug, Clone, PartialEq)]
pub enum PresetParams {
    /// Synchronous HK: complete graph, `S = {[n]}`, `alpha = 0`.
    SyncHk { n: usize },
    /// Asynchronous HK: complete graph, one uniformly chosen agent updates.
    AsyncHk { n: usize },
    /// Deffuant on a fixed host graph: one uniformly chosen edge, both
    /// endpoints with `alpha = 1 - 2 mu`.
    Deffuant { host: SimpleGraph, mu: f64 },
}

impl PresetParams {
    pub fn mode(&self) -> InteractionMode {
        match self {
            PresetParams::Deffuant { .. } => InteractionMode::Pair,
            _ => InteractionMode::Group,
        }
    }
}

pub fn preset(params: &PresetParams) -> Result<(StubbornnessSpec, ScheduleSpec, SocialSpec)> {
    let complete = SocialSpec::Static {
        graph: GraphLiteral::Named(NamedGraph::Complete),
    };
    match params {
        PresetParams::SyncHk { n } => Ok((
            StubbornnessSpec::constant(0.0),
            ScheduleSpec {
                mode: InteractionMode::Group,
                support: vec![ScheduleEntry {
                    element: ScheduleElement::Agents((0..*n).collect()),
                    prob: 1.0,
                }],
            },
            complete,
        )),
        PresetParams::AsyncHk { n } => Ok((
            StubbornnessSpec::constant(0.0),
            ScheduleSpec {
                mode: InteractionMode::Group,
                support: (0..*n)
                    .map(|i| ScheduleEntry {
                        element: ScheduleElement::Agents(vec![i]),
                        prob: 1.0 / *n as f64,
                    })
                    .collect(),
            },
            complete,
        )),
        PresetParams::Deffuant { host, mu } => {
            if !(0.0..=0.5).contains(mu) {
                return Err(Error::domain(format!(
                    "Deffuant rate mu = {mu} is outside [0, 1/2]"
                )));
            }
            let m = host.edge_count();
            Ok((
                StubbornnessSpec::constant(1.0 - 2.0 * mu),
                ScheduleSpec {
                    mode: InteractionMode::Pair,
                    support: host
                        .edges()
                        .map(|e| ScheduleEntry {
                            element: ScheduleElement::Matching(vec![e]),
                            prob: 1.0 / m as f64,
                        })
                        .collect(),
                },
                SocialSpec::Static {
                    graph: GraphLiteral::of(host),
                },
            ))
        }
    }
}
