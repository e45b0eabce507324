// SPDX-License-Identifier: Apache-2.0

//! One synchronous update `x(t+1) = B(t) x(t)` and the seeded run loop.

use crate::diagnostics::{consensus_diameter_of, energy};
use crate::error::{Error, Result};
use crate::graph::{
    build_opinion_graph, build_update_graph, component_diameter, connected_components,
    is_delta_trivial, profile, SimpleGraph,
};
use crate::model::{
    structural_violations, AveragingRule, InteractionMode, ModelConfig, OpinionState,
    StubbornnessDraw, TraceRecord,
};
use crate::stochastic::{sample_alpha, sample_schedule, sample_social, ScheduleDraw, Streams};

/// Update neighbours `N_i(t)` per agent: the profile-adjacent vertices,
/// never including `i` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    neighbors: Vec<Vec<usize>>,
}

impl Neighborhood {
    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// `N_i ∪ {i}`, sorted.
    pub fn effective_set(&self, i: usize) -> Vec<usize> {
        let mut s = self.neighbors[i].clone();
        let pos = s.partition_point(|&j| j < i);
        s.insert(pos, i);
        s
    }
}

pub fn neighborhoods(prof: &SimpleGraph) -> Neighborhood {
    Neighborhood {
        neighbors: prof.adjacency(),
    }
}

/// Averaging weights `A(t)` and the full update `B = diag(alpha) + (I - diag(alpha)) A`,
/// both dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    /// Rows of `B` that are exactly `e_i` (absolutely stubborn or isolated).
    fixed: Vec<bool>,
}

impl MixingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.n + j]
    }

    pub fn a_row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn b_row(&self, i: usize) -> &[f64] {
        &self.b[i * self.n..(i + 1) * self.n]
    }

    /// `B x`, row by row. Identity rows copy the agent's opinion unchanged.
    pub fn apply(&self, state: &OpinionState) -> Vec<f64> {
        let n = self.n;
        let d = state.d();
        let mut out = vec![0.0; n * d];
        for i in 0..n {
            let row = self.b_row(i);
            let dst = &mut out[i * d..(i + 1) * d];
            if self.fixed[i] {
                dst.copy_from_slice(state.row(i));
                continue;
            }
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    for (o, x) in dst.iter_mut().zip(state.row(j)) {
                        *o += w * x;
                    }
                }
            }
        }
        out
    }

    /// Scales row `i` of `B` by `factor`. Used to exercise the verifier's
    /// row-sum check with a known-bad matrix.
    pub fn corrupt_row(&mut self, i: usize, factor: f64) {
        for w in &mut self.b[i * self.n..(i + 1) * self.n] {
            *w *= factor;
        }
        self.fixed[i] = false;
    }
}

pub fn mixing_matrix(nbhd: &Neighborhood, alpha: &StubbornnessDraw) -> Result<MixingMatrix> {
    mixing_matrix_with(nbhd, alpha, AveragingRule::SelfInclusive)
}

pub fn mixing_matrix_with(
    nbhd: &Neighborhood,
    alpha: &StubbornnessDraw,
    rule: AveragingRule,
) -> Result<MixingMatrix> {
    let n = nbhd.n();
    if alpha.len() != n {
        return Err(Error::shape(format!(
            "stubbornness has {} entries for {n} agents",
            alpha.len()
        )));
    }
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    let mut fixed = vec![false; n];
    for i in 0..n {
        let nb = nbhd.neighbors(i);
        let ai = alpha.get(i);
        let row_a = &mut a[i * n..(i + 1) * n];
        let row_b = &mut b[i * n..(i + 1) * n];
        if nb.is_empty() || ai == 1.0 {
            fixed[i] = true;
        }
        if nb.is_empty() {
            row_a[i] = 1.0;
            row_b[i] = 1.0;
            continue;
        }
        let members = match rule {
            AveragingRule::SelfInclusive => nbhd.effective_set(i),
            AveragingRule::NeighborsOnly => nb.to_vec(),
        };
        let w = 1.0 / members.len() as f64;
        for &j in &members {
            row_a[j] = w;
            row_b[j] = (1.0 - ai) * w;
        }
        row_b[i] += ai;
    }
    Ok(MixingMatrix { n, a, b, fixed })
}

/// The parts of a configuration a single update depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub epsilon: f64,
    pub mode: InteractionMode,
    pub averaging: AveragingRule,
}

impl From<&ModelConfig> for StepParams {
    fn from(cfg: &ModelConfig) -> Self {
        Self {
            epsilon: cfg.epsilon,
            mode: cfg.mode,
            averaging: cfg.averaging,
        }
    }
}

/// Every intermediate of one update.
#[derive(Debug, Clone)]
pub struct StepDetail {
    pub opinion_graph: SimpleGraph,
    pub update_graph: SimpleGraph,
    pub profile: SimpleGraph,
    pub neighborhood: Neighborhood,
    pub mixing: MixingMatrix,
    pub next: OpinionState,
}

/// Profile `G~(t) ∩ 𝒢(t)` for the given draws.
pub fn profile_at(
    state: &OpinionState,
    draw: &ScheduleDraw,
    social: &SimpleGraph,
    params: &StepParams,
) -> Result<(SimpleGraph, SimpleGraph, SimpleGraph)> {
    if social.n() != state.n() {
        return Err(Error::shape("social graph and opinion state differ in n"));
    }
    let opinion = build_opinion_graph(state, params.epsilon);
    let update = build_update_graph(social, draw, params.mode)?;
    let prof = profile(&update, &opinion)?;
    Ok((opinion, update, prof))
}

pub fn step_detailed(
    state: &OpinionState,
    alpha: &StubbornnessDraw,
    draw: &ScheduleDraw,
    social: &SimpleGraph,
    params: &StepParams,
) -> Result<StepDetail> {
    let (opinion_graph, update_graph, prof) = profile_at(state, draw, social, params)?;
    detail_from(
        state,
        alpha,
        opinion_graph,
        update_graph,
        prof,
        params.averaging,
    )
}

fn detail_from(
    state: &OpinionState,
    alpha: &StubbornnessDraw,
    opinion_graph: SimpleGraph,
    update_graph: SimpleGraph,
    prof: SimpleGraph,
    averaging: AveragingRule,
) -> Result<StepDetail> {
    let neighborhood = neighborhoods(&prof);
    let mixing = mixing_matrix_with(&neighborhood, alpha, averaging)?;
    let next = state.advanced(mixing.apply(state));
    Ok(StepDetail {
        opinion_graph,
        update_graph,
        profile: prof,
        neighborhood,
        mixing,
        next,
    })
}

/// `x(t+1) = diag(alpha) x(t) + (I - diag(alpha)) A(t) x(t)`.
pub fn step(
    state: &OpinionState,
    alpha: &StubbornnessDraw,
    draw: &ScheduleDraw,
    social: &SimpleGraph,
    params: &StepParams,
) -> Result<OpinionState> {
    step_detailed(state, alpha, draw, social, params).map(|d| d.next)
}

/// When a run may end before its horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Never,
    /// Every profile component is delta-trivial.
    AllDeltaTrivial,
    /// Largest pairwise opinion distance is below the tolerance.
    DiameterBelow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Horizon,
    AllDeltaTrivial,
    DiameterBelow,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Horizon => "horizon",
            StopReason::AllDeltaTrivial => "all_delta_trivial",
            StopReason::DiameterBelow => "diameter_below",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// Threshold behind `TraceRecord::all_delta_trivial`.
    pub delta: f64,
    pub stop: StopRule,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            stop: StopRule::Never,
        }
    }
}

/// Everything observed at one step of a run.
#[derive(Debug, Clone)]
pub struct StepEvent {
    pub record: TraceRecord,
    pub state: OpinionState,
    pub social: SimpleGraph,
    pub draw: ScheduleDraw,
    pub alpha: StubbornnessDraw,
    /// Present when the run advanced past this step.
    pub detail: Option<StepDetail>,
    /// Present on the final event.
    pub stop: Option<StopReason>,
}

/// Step-by-step driver. Each call to [`advance`](Self::advance) samples the
/// draws for the current step, records it, and moves to the next state
/// unless the horizon or the stop rule ends the run.
#[derive(Debug)]
pub struct Simulation {
    cfg: ModelConfig,
    params: StepParams,
    settings: RunSettings,
    streams: Streams,
    state: OpinionState,
    finished: bool,
}

impl Simulation {
    /// Validates `cfg` (a zero horizon is allowed here) and samples the
    /// initial opinions.
    pub fn new(cfg: &ModelConfig, settings: RunSettings) -> Result<Self> {
        let violations = structural_violations(cfg);
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        let mut streams = Streams::from_seed(cfg.seed);
        let state = cfg.initial.sample(cfg.n, cfg.d, &mut streams.initial)?;
        Ok(Self {
            cfg: cfg.clone(),
            params: StepParams::from(cfg),
            settings,
            streams,
            state,
            finished: false,
        })
    }

    pub fn state(&self) -> &OpinionState {
        &self.state
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn advance(&mut self) -> Result<Option<StepEvent>> {
        if self.finished {
            return Ok(None);
        }
        let t = self.state.t();
        let n = self.cfg.n;
        let social = sample_social(&self.cfg.social, n, t, &mut self.streams.social)?;
        let draw = sample_schedule(&self.cfg.schedule, &mut self.streams.schedule);
        let alpha = sample_alpha(&self.cfg.stubbornness, &draw, n, &mut self.streams.alpha);
        let (opinion, update, prof) = profile_at(&self.state, &draw, &social, &self.params)?;
        let record = make_record(&self.state, &prof, self.cfg.epsilon, self.settings.delta);

        let stop = match self.settings.stop {
            StopRule::AllDeltaTrivial if record.all_delta_trivial => {
                Some(StopReason::AllDeltaTrivial)
            }
            StopRule::DiameterBelow(tol) if consensus_diameter_of(&self.state) < tol => {
                Some(StopReason::DiameterBelow)
            }
            _ if t >= self.cfg.horizon => Some(StopReason::Horizon),
            _ => None,
        };

        let state = self.state.clone();
        let detail = if stop.is_none() {
            let detail = detail_from(
                &self.state,
                &alpha,
                opinion,
                update,
                prof,
                self.params.averaging,
            )?;
            self.state = detail.next.clone();
            Some(detail)
        } else {
            self.finished = true;
            None
        };
        Ok(Some(StepEvent {
            record,
            state,
            social,
            draw,
            alpha,
            detail,
            stop,
        }))
    }
}

fn make_record(state: &OpinionState, prof: &SimpleGraph, epsilon: f64, delta: f64) -> TraceRecord {
    let components = connected_components(prof).components;
    let max_component_diameter = components
        .iter()
        .map(|c| component_diameter(c, state))
        .fold(0.0, f64::max);
    let all_delta_trivial = components.iter().all(|c| is_delta_trivial(c, state, delta));
    TraceRecord {
        t: state.t(),
        opinions: state.to_rows(),
        energy: energy(state, epsilon).z,
        components,
        max_component_diameter,
        all_delta_trivial,
    }
}

/// Records of a complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub stop: StopReason,
}

/// Runs `cfg` from step 0 to its horizon (or until the stop rule fires),
/// recording every step including the initial one.
pub fn run(cfg: &ModelConfig, settings: RunSettings) -> Result<Trace> {
    let mut sim = Simulation::new(cfg, settings)?;
    let mut records = Vec::with_capacity(cfg.horizon.min(1 << 16) as usize + 1);
    let mut stop = StopReason::Horizon;
    while let Some(ev) = sim.advance()? {
        records.push(ev.record);
        if let Some(s) = ev.stop {
            stop = s;
        }
    }
    Ok(Trace { records, stop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{preset, InitialSpec, PresetParams};

    fn col(xs: &[f64]) -> OpinionState {
        OpinionState::from_scalars(xs).unwrap()
    }

    fn group() -> StepParams {
        StepParams {
            epsilon: 0.7,
            mode: InteractionMode::Group,
            averaging: AveragingRule::SelfInclusive,
        }
    }

    #[test]
    fn neighborhood_examples() {
        let nb = neighborhoods(&SimpleGraph::empty(3));
        for i in 0..3 {
            assert!(nb.neighbors(i).is_empty());
            assert_eq!(nb.effective_set(i), vec![i]);
        }
        let nb = neighborhoods(&SimpleGraph::path(3));
        assert_eq!(nb.neighbors(1), &[0, 2]);
        assert_eq!(nb.effective_set(1), vec![0, 1, 2]);
        let nb = neighborhoods(&SimpleGraph::from_edges(3, &[(0, 1)]).unwrap());
        assert_eq!(nb.effective_set(2), vec![2]);
    }

    #[test]
    fn mixing_examples() {
        let nb = neighborhoods(&SimpleGraph::path(3));
        let m = mixing_matrix(&nb, &StubbornnessDraw::uniform(3, 1.0).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.b(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let m = mixing_matrix(&nb, &StubbornnessDraw::uniform(3, 0.0).unwrap()).unwrap();
        assert_eq!(m.a_row(1), &[1.0 / 3.0; 3]);

        let nb = neighborhoods(&SimpleGraph::complete(2));
        let m = mixing_matrix(&nb, &StubbornnessDraw::uniform(2, 0.5).unwrap()).unwrap();
        assert_eq!(m.b_row(0), &[0.75, 0.25]);
    }

    #[test]
    fn mixing_rows_are_stochastic() {
        let nb = neighborhoods(&SimpleGraph::cycle(5));
        let alpha = StubbornnessDraw::new(vec![0.0, 0.3, 0.99, 1.0, 0.5]).unwrap();
        let m = mixing_matrix(&nb, &alpha).unwrap();
        for i in 0..5 {
            assert!((m.a_row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!((m.b_row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn neighbors_only_rule() {
        let nb = neighborhoods(&SimpleGraph::path(3));
        let m = mixing_matrix_with(
            &nb,
            &StubbornnessDraw::uniform(3, 0.0).unwrap(),
            AveragingRule::NeighborsOnly,
        )
        .unwrap();
        assert_eq!(m.a_row(0), &[0.0, 1.0, 0.0]);
        assert_eq!(m.a_row(1), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn step_hk_line() {
        let next = step(
            &col(&[0.0, 0.6, 1.2]),
            &StubbornnessDraw::uniform(3, 0.0).unwrap(),
            &ScheduleDraw::Group(vec![0, 1, 2]),
            &SimpleGraph::complete(3),
            &group(),
        )
        .unwrap();
        assert_eq!(next.t(), 1);
        let want = [0.3, 0.6, 0.9];
        for (x, w) in next.values().iter().zip(want) {
            assert!((x - w).abs() <= 1e-15, "{x} vs {w}");
        }
    }

    #[test]
    fn step_deffuant_pair() {
        let params = StepParams {
            epsilon: 1.0,
            mode: InteractionMode::Pair,
            averaging: AveragingRule::SelfInclusive,
        };
        let next = step(
            &col(&[0.0, 0.5]),
            &StubbornnessDraw::uniform(2, 0.5).unwrap(),
            &ScheduleDraw::Pair(vec![(0, 1)]),
            &SimpleGraph::complete(2),
            &params,
        )
        .unwrap();
        assert_eq!(next.values(), &[0.125, 0.375]);
    }

    #[test]
    fn step_without_opinion_edges_is_identity() {
        let params = StepParams {
            epsilon: 1.0,
            ..group()
        };
        let x = col(&[0.0, 2.0]);
        for a in [0.0, 0.4] {
            let next = step(
                &x,
                &StubbornnessDraw::uniform(2, a).unwrap(),
                &ScheduleDraw::Group(vec![0, 1]),
                &SimpleGraph::complete(2),
                &params,
            )
            .unwrap();
            assert_eq!(next.values(), x.values());
        }
    }

    #[test]
    fn uncovered_agents_are_bit_identical() {
        let params = StepParams {
            epsilon: 10.0,
            mode: InteractionMode::Pair,
            averaging: AveragingRule::SelfInclusive,
        };
        let x = col(&[0.1, 0.7, 0.123456789, 0.3]);
        let alpha = StubbornnessDraw::new(vec![0.2, 0.2, 1.0, 1.0]).unwrap();
        let next = step(
            &x,
            &alpha,
            &ScheduleDraw::Pair(vec![(0, 1)]),
            &SimpleGraph::complete(4),
            &params,
        )
        .unwrap();
        assert_eq!(next.values()[2].to_bits(), x.values()[2].to_bits());
        assert_eq!(next.values()[3].to_bits(), x.values()[3].to_bits());
    }

    fn two_agent_cfg(horizon: u64) -> ModelConfig {
        let (stubbornness, schedule, social) = preset(&PresetParams::SyncHk { n: 2 }).unwrap();
        ModelConfig {
            epsilon: 1.0,
            mode: InteractionMode::Group,
            n: 2,
            d: 1,
            horizon,
            seed: 9,
            initial: InitialSpec::Explicit {
                opinions: vec![vec![0.0], vec![0.5]],
            },
            stubbornness,
            schedule,
            social,
            averaging: AveragingRule::SelfInclusive,
        }
    }

    #[test]
    fn run_zero_horizon() {
        let trace = run(&two_agent_cfg(0), RunSettings::default()).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].t, 0);
        assert_eq!(trace.stop, StopReason::Horizon);
    }

    #[test]
    fn run_two_agents_reach_consensus() {
        let settings = RunSettings {
            delta: 0.1,
            stop: StopRule::Never,
        };
        let trace = run(&two_agent_cfg(3), settings).unwrap();
        assert_eq!(trace.records.len(), 4);
        assert!(!trace.records[0].all_delta_trivial);
        assert!(trace.records[1].all_delta_trivial);
        assert_eq!(trace.records[1].opinions, vec![vec![0.25], vec![0.25]]);
    }

    #[test]
    fn stop_rule_ends_run() {
        let settings = RunSettings {
            delta: 0.1,
            stop: StopRule::AllDeltaTrivial,
        };
        let trace = run(&two_agent_cfg(50), settings).unwrap();
        assert_eq!(trace.records.len(), 2);
        assert_eq!(trace.stop, StopReason::AllDeltaTrivial);
    }

    #[test]
    fn run_is_deterministic() {
        let mut cfg = two_agent_cfg(20);
        cfg.initial = InitialSpec::Uniform {
            low: 0.0,
            high: 1.0,
        };
        let a = run(&cfg, RunSettings::default()).unwrap();
        let b = run(&cfg, RunSettings::default()).unwrap();
        assert_eq!(a, b);
    }
}
