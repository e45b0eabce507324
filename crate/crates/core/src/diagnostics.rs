// SPDX-License-Identifier: Apache-2.0

//! Energy function, per-step inequality checks and stopping-time estimators.
//!
//! Non-strict inequalities are checked with an additive slack of 1e-9;
//! strict ones must hold with a margin above 1e-12.

use serde::Serialize;

use crate::dynamics::Neighborhood;
use crate::error::{Error, Result};
use crate::graph::{component_diameter, connected_components, is_delta_trivial, SimpleGraph};
use crate::model::{OpinionState, StubbornnessDraw, TraceRecord};

pub const SLACK: f64 = 1e-9;
pub const STRICT_MARGIN: f64 = 1e-12;

/// `Z = sum over ordered pairs (i, j) of min(|x_i - x_j|^2, epsilon^2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EnergyValue {
    pub z: f64,
}

pub fn energy(state: &OpinionState, epsilon: f64) -> EnergyValue {
    let cap = epsilon * epsilon;
    let n = state.n();
    let mut half = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            half += state.dist2(i, j).min(cap);
        }
    }
    EnergyValue { z: 2.0 * half }
}

/// Largest pairwise opinion distance.
pub fn consensus_diameter(state: &OpinionState) -> f64 {
    let all: Vec<usize> = (0..state.n()).collect();
    component_diameter(&all, state)
}

pub(crate) use consensus_diameter as consensus_diameter_of;

fn displacement2(before: &OpinionState, after: &OpinionState, i: usize) -> f64 {
    before
        .row(i)
        .iter()
        .zip(after.row(i))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn check_same_shape(before: &OpinionState, after: &OpinionState, n: usize) -> Result<()> {
    if before.n() != after.n() || before.d() != after.d() || before.n() != n {
        return Err(Error::shape(
            "before/after states and step inputs disagree in size",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecrementReport {
    /// `Z(t) - Z(t+1)`.
    pub lhs: f64,
    /// `4 sum_i (1 + |N_i| alpha_i / (1 - alpha_i)) |x_i(t) - x_i(t+1)|^2`.
    pub rhs: f64,
    pub pass: bool,
}

/// Energy drop of one step against the weighted squared displacement.
pub fn check_decrement(
    before: &OpinionState,
    after: &OpinionState,
    nbhd: &Neighborhood,
    alpha: &StubbornnessDraw,
    epsilon: f64,
) -> Result<DecrementReport> {
    check_same_shape(before, after, nbhd.n())?;
    if alpha.len() != nbhd.n() {
        return Err(Error::shape("stubbornness length differs from n"));
    }
    let lhs = energy(before, epsilon).z - energy(after, epsilon).z;
    let rhs = 4.0
        * (0..before.n())
            .map(|i| {
                let a = alpha.get(i);
                let weight = if a < 1.0 {
                    1.0 + nbhd.degree(i) as f64 * a / (1.0 - a)
                } else {
                    1.0
                };
                weight * displacement2(before, after, i)
            })
            .sum::<f64>();
    Ok(DecrementReport {
        lhs,
        rhs,
        pass: lhs >= rhs - SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Component is delta-trivial (always the case for singletons).
    DeltaTrivial,
    /// Some member has `alpha_i = 1`.
    StubbornMember,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ComponentVerdict {
    Checked {
        lhs: f64,
        rhs: f64,
        margin: f64,
        pass: bool,
    },
    Skipped {
        reason: SkipReason,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCheck {
    #[serde(serialize_with = "crate::io::one_based_list")]
    pub vertices: Vec<usize>,
    #[serde(flatten)]
    pub verdict: ComponentVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementReport {
    pub components: Vec<ComponentCheck>,
    pub pass: bool,
}

impl DisplacementReport {
    pub fn checked(&self) -> usize {
        self.components
            .iter()
            .filter(|c| matches!(c.verdict, ComponentVerdict::Checked { .. }))
            .count()
    }
}

/// For every profile component that is delta-nontrivial with all
/// `alpha_i < 1`: `sum_{i in C} |x_i(t) - x_i(t+1)|^2 > 2 delta^2 (1 - max alpha)^2 / |C|^8`.
pub fn check_displacement_bound(
    before: &OpinionState,
    after: &OpinionState,
    prof: &SimpleGraph,
    alpha: &StubbornnessDraw,
    delta: f64,
) -> Result<DisplacementReport> {
    check_same_shape(before, after, prof.n())?;
    if alpha.len() != prof.n() {
        return Err(Error::shape("stubbornness length differs from n"));
    }
    let mut components = Vec::new();
    for comp in connected_components(prof).components {
        let verdict = if is_delta_trivial(&comp, before, delta) {
            ComponentVerdict::Skipped {
                reason: SkipReason::DeltaTrivial,
            }
        } else if comp.iter().any(|&i| alpha.get(i) >= 1.0) {
            ComponentVerdict::Skipped {
                reason: SkipReason::StubbornMember,
            }
        } else {
            let lhs: f64 = comp.iter().map(|&i| displacement2(before, after, i)).sum();
            let m = comp.len() as f64;
            let rhs = 2.0 * delta * delta * (1.0 - alpha.max_over(&comp)).powi(2) / m.powi(8);
            let margin = lhs - rhs;
            ComponentVerdict::Checked {
                lhs,
                rhs,
                margin,
                pass: margin > STRICT_MARGIN,
            }
        };
        components.push(ComponentCheck {
            vertices: comp,
            verdict,
        });
    }
    let pass = components
        .iter()
        .all(|c| !matches!(c.verdict, ComponentVerdict::Checked { pass: false, .. }));
    Ok(DisplacementReport { components, pass })
}

/// First step at which every profile component is delta-trivial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingRecord {
    /// `None` when not reached within the trace.
    pub tau_delta: Option<u64>,
    pub delta: f64,
    pub horizon: u64,
}

pub fn tau_delta(trace: &[TraceRecord], delta: f64) -> Result<StoppingRecord> {
    let last = trace
        .last()
        .ok_or_else(|| Error::precondition("tau_delta needs a non-empty trace"))?;
    let mut tau = None;
    for rec in trace {
        let st = rec.state()?;
        if rec
            .components
            .iter()
            .all(|c| is_delta_trivial(c, &st, delta))
        {
            tau = Some(rec.t);
            break;
        }
    }
    Ok(StoppingRecord {
        tau_delta: tau,
        delta,
        horizon: last.t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeViolation {
    pub delta: f64,
    pub t: u64,
    pub diameter_before: f64,
    pub diameter_after: f64,
    pub opinions_before: Vec<Vec<f64>>,
    pub opinions_after: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    /// Number of `(delta, t)` pairs where the hypothesis held.
    pub applicable: usize,
    pub violations: Vec<ProbeViolation>,
    pub pass: bool,
}

/// Whenever the whole opinion graph is delta-trivial at `t`, it must still
/// be delta-trivial at `t + 1`, for each `delta` in `grid`.
pub fn triviality_preservation_probe(trace: &[TraceRecord], grid: &[f64]) -> Result<ProbeReport> {
    let diam: Vec<f64> = trace
        .iter()
        .map(|r| r.state().map(|s| consensus_diameter(&s)))
        .collect::<Result<_>>()?;
    let mut applicable = 0;
    let mut violations = Vec::new();
    for &delta in grid {
        for k in 1..trace.len() {
            if diam[k - 1] <= delta {
                applicable += 1;
                if diam[k] > delta + SLACK {
                    violations.push(ProbeViolation {
                        delta,
                        t: trace[k - 1].t,
                        diameter_before: diam[k - 1],
                        diameter_after: diam[k],
                        opinions_before: trace[k - 1].opinions.clone(),
                        opinions_after: trace[k].opinions.clone(),
                    });
                }
            }
        }
    }
    Ok(ProbeReport {
        applicable,
        pass: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{neighborhoods, step_detailed, StepParams};
    use crate::model::{AveragingRule, InteractionMode};
    use crate::stochastic::ScheduleDraw;

    fn col(xs: &[f64]) -> OpinionState {
        OpinionState::from_scalars(xs).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&col(&[0.3, 0.3, 0.3]), 1.0).z, 0.0);
        assert_eq!(energy(&col(&[0.0, 0.5]), 1.0).z, 0.5);
        assert_eq!(energy(&col(&[0.0, 2.0]), 1.0).z, 2.0);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(consensus_diameter(&col(&[0.4, 0.4])), 0.0);
        assert!((consensus_diameter(&col(&[0.0, 0.6, 1.2])) - 1.2).abs() < 1e-15);
        assert_eq!(consensus_diameter(&col(&[0.7])), 0.0);
    }

    fn hk_line() -> (OpinionState, crate::dynamics::StepDetail, StubbornnessDraw) {
        let x = col(&[0.0, 0.6, 1.2]);
        let alpha = StubbornnessDraw::uniform(3, 0.0).unwrap();
        let params = StepParams {
            epsilon: 0.7,
            mode: InteractionMode::Group,
            averaging: AveragingRule::SelfInclusive,
        };
        let det = step_detailed(
            &x,
            &alpha,
            &ScheduleDraw::Group(vec![0, 1, 2]),
            &SimpleGraph::complete(3),
            &params,
        )
        .unwrap();
        (x, det, alpha)
    }

    #[test]
    fn decrement_hk_line() {
        let (x, det, alpha) = hk_line();
        let r = check_decrement(&x, &det.next, &det.neighborhood, &alpha, 0.7).unwrap();
        assert!((r.lhs - 1.34).abs() < 1e-12, "{}", r.lhs);
        assert!((r.rhs - 0.72).abs() < 1e-12, "{}", r.rhs);
        assert!(r.pass);
    }

    #[test]
    fn decrement_noop_step() {
        let x = col(&[0.0, 0.3, 0.5]);
        let nb = neighborhoods(&SimpleGraph::complete(3));
        let alpha = StubbornnessDraw::uniform(3, 1.0).unwrap();
        let r = check_decrement(&x, &x, &nb, &alpha, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, true));
    }

    /// A pair update can push one endpoint away from an agent it does not
    /// interact with, so `Z` may rise when the profile omits opinion edges.
    #[test]
    fn energy_can_rise_when_opinion_neighbors_do_not_interact() {
        let x = col(&[0.0, 0.95, 1.05]);
        let alpha = StubbornnessDraw::new(vec![1.0, 0.5, 0.5]).unwrap();
        let params = StepParams {
            epsilon: 1.0,
            mode: InteractionMode::Pair,
            averaging: AveragingRule::SelfInclusive,
        };
        let det = step_detailed(
            &x,
            &alpha,
            &ScheduleDraw::Pair(vec![(1, 2)]),
            &SimpleGraph::complete(3),
            &params,
        )
        .unwrap();
        assert!(energy(&det.next, 1.0).z > energy(&x, 1.0).z);
        let r = check_decrement(&x, &det.next, &det.neighborhood, &alpha, 1.0).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn displacement_hk_line() {
        let (x, det, alpha) = hk_line();
        let r = check_displacement_bound(&x, &det.next, &det.profile, &alpha, 1.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.checked(), 1);
        match &r.components[0].verdict {
            ComponentVerdict::Checked { lhs, rhs, .. } => {
                assert!((lhs - 0.18).abs() < 1e-12);
                assert!((rhs - 2.0 / 6561.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn displacement_skips() {
        let (x, det, alpha) = hk_line();
        let r = check_displacement_bound(&x, &det.next, &det.profile, &alpha, 1.5).unwrap();
        assert_eq!(
            r.components[0].verdict,
            ComponentVerdict::Skipped {
                reason: SkipReason::DeltaTrivial
            }
        );
        let stubborn = StubbornnessDraw::new(vec![0.0, 1.0, 0.0]).unwrap();
        let r = check_displacement_bound(&x, &det.next, &det.profile, &stubborn, 1.0).unwrap();
        assert_eq!(
            r.components[0].verdict,
            ComponentVerdict::Skipped {
                reason: SkipReason::StubbornMember
            }
        );
    }

    fn record(t: u64, xs: &[f64], components: Vec<Vec<usize>>) -> TraceRecord {
        TraceRecord {
            t,
            opinions: xs.iter().map(|&x| vec![x]).collect(),
            energy: 0.0,
            components,
            max_component_diameter: 0.0,
            all_delta_trivial: false,
        }
    }

    #[test]
    fn tau_examples() {
        let trace = vec![
            record(0, &[0.0, 0.5], vec![vec![0, 1]]),
            record(1, &[0.25, 0.25], vec![vec![0, 1]]),
        ];
        assert_eq!(tau_delta(&trace, 0.1).unwrap().tau_delta, Some(1));
        assert_eq!(tau_delta(&trace, 0.6).unwrap().tau_delta, Some(0));
        let clusters = vec![record(
            0,
            &[0.0, 0.0, 5.0, 5.0],
            vec![vec![0, 1], vec![2, 3]],
        )];
        assert_eq!(tau_delta(&clusters, 1e-9).unwrap().tau_delta, Some(0));
        let stuck = vec![record(0, &[0.0, 0.5], vec![vec![0, 1]])];
        let s = tau_delta(&stuck, 0.1).unwrap();
        assert_eq!((s.tau_delta, s.horizon), (None, 0));
        assert!(tau_delta(&[], 0.1).is_err());
    }

    #[test]
    fn probe_examples() {
        let single = vec![
            record(0, &[0.2], vec![vec![0]]),
            record(1, &[0.2], vec![vec![0]]),
        ];
        assert!(triviality_preservation_probe(&single, &[0.1]).unwrap().pass);
        let pair = vec![
            record(0, &[0.2, 0.2], vec![vec![0, 1]]),
            record(1, &[0.2, 0.2], vec![vec![0, 1]]),
        ];
        let r = triviality_preservation_probe(&pair, &[1e-6, 1.0]).unwrap();
        assert!(r.pass && r.applicable == 2);
        let broken = vec![
            record(0, &[0.0, 0.1], vec![]),
            record(1, &[0.0, 0.3], vec![]),
        ];
        let r = triviality_preservation_probe(&broken, &[0.2]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations[0].t, 0);
    }
}
