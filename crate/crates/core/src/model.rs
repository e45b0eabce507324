// SPDX-License-Identifier: Apache-2.0

//! State records shared across the engine: opinions, stubbornness draws,
//! the run configuration and the per-step trace snapshot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::stochastic::{InitialSpec, ScheduleElement, ScheduleSpec, SocialSpec, StubbornnessSpec};

/// Largest population accepted by [`validate_config`]. Mixing matrices and
/// Laplacians are stored densely.
pub const MAX_AGENTS: usize = 4096;

const ENVELOPE_TOL: f64 = 1e-12;

/// Opinions of `n` agents in `R^d` at step `t`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    t: u64,
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl OpinionState {
    pub fn new(t: u64, n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::shape(format!(
                "opinion state needs n, d >= 1 (got n={n}, d={d})"
            )));
        }
        if values.len() != n * d {
            return Err(Error::shape(format!(
                "expected {} opinion coordinates for n={n}, d={d}, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::shape(format!(
                "opinion coordinate {} of agent {} is not finite",
                pos % d + 1,
                pos / d + 1
            )));
        }
        Ok(Self { t, n, d, values })
    }

    /// Builds a state at step 0 from one row per agent.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != d) {
            return Err(Error::shape("opinion rows have differing dimensions"));
        }
        let values = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(0, n, d, values)
    }

    /// One-dimensional convenience constructor.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(0, xs.len(), 1, xs.to_vec())
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn advanced(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            t: self.t + 1,
            n: self.n,
            d: self.d,
            values,
        }
    }

    /// Squared Euclidean distance between the opinions of agents `i` and `j`.
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Euclidean distance between the opinions of agents `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        if self.d == 1 {
            (self.values[i] - self.values[j]).abs()
        } else {
            self.dist2(i, j).sqrt()
        }
    }
}

/// Per-agent stubbornness `alpha(t)`, each entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StubbornnessDraw(Vec<f64>);

impl StubbornnessDraw {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(i) = alphas.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::domain(format!(
                "stubbornness of agent {} is {}, outside [0, 1]",
                i + 1,
                alphas[i]
            )));
        }
        Ok(Self(alphas))
    }

    pub fn uniform(n: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Largest entry over `agents`, or 0 when `agents` is empty.
    pub fn max_over(&self, agents: &[usize]) -> f64 {
        agents.iter().map(|&i| self.0[i]).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionMode {
    Group,
    Pair,
}

/// How an agent weights its update neighbours.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingRule {
    /// Average over the neighbours and the agent itself, weight `1 / (1 + d_i)`.
    #[default]
    SelfInclusive,
    /// Average over the neighbours only, weight `1 / d_i`; isolated agents
    /// keep their opinion.
    NeighborsOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub epsilon: f64,
    pub mode: InteractionMode,
    pub n: usize,
    pub d: usize,
    pub horizon: u64,
    pub seed: u64,
    pub initial: InitialSpec,
    pub stubbornness: StubbornnessSpec,
    pub schedule: ScheduleSpec,
    pub social: SocialSpec,
    pub averaging: AveragingRule,
}

/// Snapshot of one step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub opinions: Vec<Vec<f64>>,
    pub energy: f64,
    /// Components of the profile at `t`, 0-based, each sorted ascending and
    /// ordered by smallest member.
    pub components: Vec<Vec<usize>>,
    pub max_component_diameter: f64,
    pub all_delta_trivial: bool,
}

impl TraceRecord {
    pub fn state(&self) -> Result<OpinionState> {
        let mut st = OpinionState::from_rows(&self.opinions)?;
        st.t = self.t;
        Ok(st)
    }
}

/// True iff every coordinate of `state_t` lies within the per-coordinate
/// `[min, max]` range of `state0`, up to 1e-12.
pub fn envelope_check(state0: &OpinionState, state_t: &OpinionState) -> Result<bool> {
    if state0.n() != state_t.n() || state0.d() != state_t.d() {
        return Err(Error::shape(format!(
            "envelope check on mismatched states ({}x{} vs {}x{})",
            state0.n(),
            state0.d(),
            state_t.n(),
            state_t.d()
        )));
    }
    let d = state0.d();
    for k in 0..d {
        let (lo, hi) = state0
            .rows()
            .map(|r| r[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if state_t
            .rows()
            .any(|r| r[k] < lo - ENVELOPE_TOL || r[k] > hi + ENVELOPE_TOL)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Collects every violated invariant of `cfg`. An empty list means the
/// configuration is runnable.
pub fn validate_config(cfg: &ModelConfig) -> Vec<String> {
    let mut v = structural_violations(cfg);
    if cfg.horizon == 0 {
        v.push("horizon must be at least 1".to_string());
    }
    v
}

/// All checks of [`validate_config`] except the horizon bound; a run with a
/// zero horizon just records its initial state.
pub(crate) fn structural_violations(cfg: &ModelConfig) -> Vec<String> {
    let mut v = Vec::new();
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        v.push("epsilon must be positive".to_string());
    }
    if cfg.n == 0 {
        v.push("n must be at least 1".to_string());
    }
    if cfg.n > MAX_AGENTS {
        v.push(format!(
            "n = {} exceeds the limit of {MAX_AGENTS} agents",
            cfg.n
        ));
    }
    if cfg.d == 0 {
        v.push("d must be at least 1".to_string());
    }
    if cfg.n == 0 || cfg.d == 0 || cfg.n > MAX_AGENTS {
        return v;
    }

    v.extend(cfg.initial.violations(cfg.n, cfg.d));
    v.extend(cfg.stubbornness.violations(cfg.n));
    v.extend(cfg.social.violations(cfg.n));

    if cfg.schedule.mode != cfg.mode {
        v.push(format!(
            "schedule mode {:?} does not match model mode {:?}",
            cfg.schedule.mode, cfg.mode
        ));
    }
    let host = cfg.social.initial_graph(cfg.n);
    v.extend(schedule_violations(&cfg.schedule, cfg.n, host.as_ref()));
    v
}

fn schedule_violations(spec: &ScheduleSpec, n: usize, host: Option<&SimpleGraph>) -> Vec<String> {
    let mut v = Vec::new();
    if spec.support.is_empty() {
        v.push(match spec.mode {
            InteractionMode::Pair => "pair mode requires a non-empty matching support".to_string(),
            InteractionMode::Group => {
                "group mode requires a non-empty agent-set support".to_string()
            }
        });
        return v;
    }
    if let Some(p) = spec
        .support
        .iter()
        .map(|e| e.prob)
        .find(|p| !p.is_finite() || *p <= 0.0)
    {
        v.push(format!(
            "schedule probabilities must be positive (found {p})"
        ));
    }
    let total: f64 = spec.support.iter().map(|e| e.prob).sum();
    if (total - 1.0).abs() > 1e-12 {
        v.push(format!("schedule probabilities sum to {total}, not 1"));
    }

    let mut covered = vec![false; n];
    for (k, entry) in spec.support.iter().enumerate() {
        match (&entry.element, spec.mode) {
            (ScheduleElement::Agents(agents), InteractionMode::Group) => {
                for &a in agents {
                    if a < n {
                        covered[a] = true;
                    } else {
                        v.push(format!(
                            "support element {} names agent {} outside [n]",
                            k + 1,
                            a + 1
                        ));
                    }
                }
            }
            (ScheduleElement::Matching(edges), InteractionMode::Pair) => {
                if edges.iter().any(|&(i, j)| i >= n || j >= n) {
                    v.push(format!(
                        "support element {} names an agent outside [n]",
                        k + 1
                    ));
                    continue;
                }
                let ok = match host {
                    Some(g) => crate::graph::is_matching(edges, g),
                    None => crate::graph::is_matching(edges, &SimpleGraph::complete(n)),
                };
                if !ok {
                    v.push(format!(
                        "support element {} is not a matching in G(0)",
                        k + 1
                    ));
                }
            }
            _ => v.push(format!(
                "support element {} does not fit the {:?} mode",
                k + 1,
                spec.mode
            )),
        }
    }
    if spec.mode == InteractionMode::Group && covered.iter().any(|c| !c) {
        v.push("support must cover all agents".to_string());
    }
    v
}
