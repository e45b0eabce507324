// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use serde::Serialize;
use serde_json::{json, Value};

use super::runner::Hypothesis;
use super::{write_json, VerifyArgs, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::diagnostics::{
    check_decrement, check_displacement_bound, energy, triviality_preservation_probe,
    ComponentVerdict, SLACK,
};
use crate::dynamics::{MixingMatrix, RunSettings, Simulation, StepDetail, StopRule};
use crate::error::Result;
use crate::graph::{connected_components, SimpleGraph};
use crate::io::{ConfigDocument, LoadedConfig};
use crate::model::{envelope_check, AveragingRule, ModelConfig, OpinionState, StubbornnessDraw};
use crate::reference::{async_hk_step, deffuant_step, max_abs_diff, sync_hk_step};
use crate::spectral::{
    check_cheeger_sandwich, check_lambda2_qq, check_perron_frobenius, laplacian, SymmetricMatrix,
};
use crate::stochastic::{preset, PresetParams, ScheduleDraw};

/// Row sums of `B` and the reduction oracles must agree to this.
const EXACT: f64 = 1e-12;
const DEFFUANT_MU: f64 = 0.25;
const REDUCTION_STEPS: u64 = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub replicates: u64,
    pub spectral_max_n: usize,
    pub inject_fault: bool,
}

impl VerifyOptions {
    pub fn from_config(loaded: &LoadedConfig) -> Self {
        Self {
            replicates: loaded.diagnostics.verify.replicates,
            spectral_max_n: loaded.diagnostics.verify.spectral_max_n,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Nothing satisfied the check's hypothesis.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub evaluated: u64,
    pub failures: u64,
    pub skipped: u64,
    /// Violations on steps outside the check's hypothesis; reported, not failed.
    pub out_of_scope_violations: u64,
    /// Smallest observed margin (positive means satisfied).
    pub worst_margin: Option<f64>,
    pub counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_of_scope_example: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub replicates: u64,
    pub first_seed: u64,
    pub hypothesis: Hypothesis,
    pub checks: Vec<CheckResult>,
    pub config: ConfigDocument,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Acc {
    evaluated: u64,
    failures: u64,
    skipped: u64,
    out_of_scope: u64,
    worst: Option<f64>,
    counterexample: Option<Value>,
    out_of_scope_example: Option<Value>,
}

impl Acc {
    fn record(&mut self, margin: Option<f64>, pass: bool, cex: impl FnOnce() -> Value) {
        self.evaluated += 1;
        if let Some(m) = margin {
            self.worst = Some(self.worst.map_or(m, |w: f64| w.min(m)));
        }
        if !pass {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(cex());
            }
        }
    }

    fn out_of_scope(&mut self, pass: bool, cex: impl FnOnce() -> Value) {
        self.skipped += 1;
        if !pass {
            self.out_of_scope += 1;
            if self.out_of_scope_example.is_none() {
                self.out_of_scope_example = Some(cex());
            }
        }
    }

    fn finish(self, name: &'static str, note: Option<&'static str>) -> CheckResult {
        let status = if self.failures > 0 {
            CheckStatus::Fail
        } else if self.evaluated == 0 {
            CheckStatus::Vacuous
        } else {
            CheckStatus::Pass
        };
        CheckResult {
            name,
            status,
            evaluated: self.evaluated,
            failures: self.failures,
            skipped: self.skipped,
            out_of_scope_violations: self.out_of_scope,
            worst_margin: self.worst,
            counterexample: self.counterexample,
            out_of_scope_example: self.out_of_scope_example,
            note,
        }
    }
}

/// Edge list and weight bit patterns of a generalized Laplacian already checked.
type WeightedKey = (Vec<(usize, usize)>, Vec<u64>);

#[derive(Default)]
struct Suite {
    monotonicity: Acc,
    decrement: Acc,
    displacement: Acc,
    row_stochastic: Acc,
    envelope: Acc,
    reduction: Acc,
    sandwich: Acc,
    perron_frobenius: Acc,
    lambda2_qq: Acc,
    triviality: Acc,
    seen_graphs: HashSet<(usize, Vec<(usize, usize)>)>,
    seen_weighted: HashSet<WeightedKey>,
}

/// Every opinion-graph edge touching a non-stubborn agent is in the profile,
/// so each moving agent averages over all its opinion neighbours. The energy
/// inequalities are only guaranteed on such steps.
fn full_neighbourhood_step(det: &StepDetail, alpha: &StubbornnessDraw) -> bool {
    det.opinion_graph
        .edges()
        .all(|(i, j)| (alpha.get(i) >= 1.0 && alpha.get(j) >= 1.0) || det.profile.has_edge(i, j))
}

fn one_based_draw(draw: &ScheduleDraw) -> Value {
    match draw {
        ScheduleDraw::Group(a) => json!({"agents": a.iter().map(|i| i + 1).collect::<Vec<_>>()}),
        ScheduleDraw::Pair(m) => {
            json!({"matching": m.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>()})
        }
    }
}

struct StepCtx<'a> {
    seed: u64,
    state: &'a OpinionState,
    next: &'a OpinionState,
    alpha: &'a StubbornnessDraw,
    draw: &'a ScheduleDraw,
}

impl StepCtx<'_> {
    fn dump(&self, extra: Value) -> Value {
        json!({
            "seed": self.seed,
            "t": self.state.t(),
            "draw": one_based_draw(self.draw),
            "alpha": self.alpha.as_slice(),
            "opinions_before": self.state.to_rows(),
            "opinions_after": self.next.to_rows(),
            "detail": extra,
        })
    }
}

impl Suite {
    fn row_sums(&mut self, mix: &MixingMatrix, ctx: &StepCtx) {
        let n = mix.n();
        for i in 0..n {
            let row = mix.b_row(i);
            let sum: f64 = row.iter().sum();
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            let a_sum: f64 = mix.a_row(i).iter().sum();
            let dev = (sum - 1.0).abs().max((a_sum - 1.0).abs());
            let pass = dev <= EXACT && min >= 0.0;
            self.row_stochastic.record(Some(EXACT - dev), pass, || {
                ctx.dump(
                    json!({"row": i + 1, "row_sum": sum, "a_row_sum": a_sum, "min_entry": min}),
                )
            });
        }
    }

    fn energy_checks(&mut self, det: &StepDetail, ctx: &StepCtx, eps: f64) -> Result<()> {
        let in_scope = full_neighbourhood_step(det, ctx.alpha);
        let z0 = energy(ctx.state, eps).z;
        let z1 = energy(ctx.next, eps).z;
        let margin = z0 - z1;
        let mono_pass = margin >= -SLACK;
        let mono_cex = || ctx.dump(json!({"z_before": z0, "z_after": z1}));
        let dec = check_decrement(ctx.state, ctx.next, &det.neighborhood, ctx.alpha, eps)?;
        let dec_cex = || ctx.dump(json!({"lhs": dec.lhs, "rhs": dec.rhs}));
        if in_scope {
            self.monotonicity.record(Some(margin), mono_pass, mono_cex);
            self.decrement
                .record(Some(dec.lhs - dec.rhs), dec.pass, dec_cex);
        } else {
            self.monotonicity.out_of_scope(mono_pass, mono_cex);
            self.decrement.out_of_scope(dec.pass, dec_cex);
        }
        Ok(())
    }

    fn displacement(&mut self, det: &StepDetail, ctx: &StepCtx, delta: f64) -> Result<()> {
        let report = check_displacement_bound(ctx.state, ctx.next, &det.profile, ctx.alpha, delta)?;
        for comp in &report.components {
            match comp.verdict {
                ComponentVerdict::Checked {
                    lhs,
                    rhs,
                    margin,
                    pass,
                } => self.displacement.record(Some(margin), pass, || {
                    ctx.dump(json!({
                        "component": comp.vertices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                        "lhs": lhs, "rhs": rhs, "delta": delta,
                    }))
                }),
                ComponentVerdict::Skipped { .. } => self.displacement.skipped += 1,
            }
        }
        Ok(())
    }

    fn spectral(&mut self, det: &StepDetail, ctx: &StepCtx, max_n: usize) -> Result<()> {
        for comp in connected_components(&det.profile).components {
            if comp.len() < 2 || comp.len() > max_n {
                self.sandwich.skipped += 1;
                continue;
            }
            let g = det.profile.induced(&comp);
            let edges: Vec<(usize, usize)> = g.edges().collect();
            if self.seen_graphs.insert((g.n(), edges.clone())) {
                let s = check_cheeger_sandwich(&g)?;
                self.sandwich.record(
                    Some((s.upper - s.lambda2).min(s.lambda2 - s.lower)),
                    s.pass,
                    || json!({"edges": g.to_one_based(), "report": s}),
                );
                let pf = check_perron_frobenius(&laplacian(&g), &g)?;
                self.perron_frobenius.record(
                    Some(pf.min_entry),
                    pf.pass,
                    || json!({"edges": g.to_one_based(), "matrix": "laplacian", "report": pf}),
                );
            }
            let alpha_c: Vec<f64> = comp.iter().map(|&i| ctx.alpha.get(i)).collect();
            let key = (
                edges,
                alpha_c.iter().map(|a| a.to_bits()).collect::<Vec<_>>(),
            );
            if !self.seen_weighted.insert(key) {
                continue;
            }
            let m = weighted_laplacian(&g, &comp, ctx.state, &alpha_c)?;
            let pf = check_perron_frobenius(&m, &g)?;
            self.perron_frobenius.record(
                Some(pf.min_entry),
                pf.pass,
                || json!({"edges": g.to_one_based(), "matrix": m.entries(), "report": pf}),
            );
            if alpha_c.iter().all(|&a| a < 1.0) {
                let draw = StubbornnessDraw::new(alpha_c)?;
                let qq = check_lambda2_qq(&g, &draw)?;
                self.lambda2_qq.record(
                    Some(qq.lambda2_qq - qq.bound),
                    qq.pass,
                    || json!({"edges": g.to_one_based(), "alpha": draw.as_slice(), "report": qq}),
                );
            } else {
                self.lambda2_qq.skipped += 1;
            }
        }
        Ok(())
    }
}

/// Generalized Laplacian of `g` with edge weights `1 + |x_i - x_j|` and the
/// component's stubbornness added on the diagonal.
fn weighted_laplacian(
    g: &SimpleGraph,
    comp: &[usize],
    state: &OpinionState,
    alpha: &[f64],
) -> Result<SymmetricMatrix> {
    let n = g.n();
    let mut m = vec![0.0; n * n];
    for (a, b) in g.edges() {
        let w = 1.0 + state.dist(comp[a], comp[b]);
        m[a * n + b] = -w;
        m[b * n + a] = -w;
        m[a * n + a] += w;
        m[b * n + b] += w;
    }
    for (i, al) in alpha.iter().enumerate() {
        m[i * n + i] += al;
    }
    SymmetricMatrix::new(n, m)
}

fn reduction_checks(base: &ModelConfig, acc: &mut Acc) -> Result<()> {
    let n = base.n;
    let mut cases = vec![
        ("sync_hk", PresetParams::SyncHk { n }),
        ("async_hk", PresetParams::AsyncHk { n }),
    ];
    if n >= 2 {
        cases.push((
            "deffuant",
            PresetParams::Deffuant {
                host: SimpleGraph::complete(n),
                mu: DEFFUANT_MU,
            },
        ));
    }
    for (name, params) in cases {
        let (stubbornness, schedule, social) = preset(&params)?;
        let cfg = ModelConfig {
            mode: params.mode(),
            stubbornness,
            schedule,
            social,
            averaging: AveragingRule::SelfInclusive,
            horizon: base.horizon.min(REDUCTION_STEPS),
            ..base.clone()
        };
        let mut sim = Simulation::new(&cfg, RunSettings::default())?;
        while let Some(ev) = sim.advance()? {
            let Some(det) = ev.detail else { continue };
            let x = ev.state.to_rows();
            let oracle = match &ev.draw {
                ScheduleDraw::Group(a) if name == "sync_hk" => {
                    debug_assert_eq!(a.len(), n);
                    sync_hk_step(&x, cfg.epsilon)
                }
                ScheduleDraw::Group(a) => async_hk_step(&x, cfg.epsilon, a[0]),
                ScheduleDraw::Pair(m) => {
                    deffuant_step(&x, cfg.epsilon, DEFFUANT_MU, m[0].0, m[0].1)
                }
            };
            let got = det.next.to_rows();
            let diff = max_abs_diff(&got, &oracle);
            acc.record(Some(EXACT - diff), diff <= EXACT, || {
                json!({
                    "reduction": name, "seed": cfg.seed, "t": ev.state.t(),
                    "draw": one_based_draw(&ev.draw), "opinions_before": x,
                    "engine": got, "oracle": oracle, "max_abs_diff": diff,
                })
            });
        }
    }
    Ok(())
}

/// Runs the full check suite over seeds `seed .. seed + replicates`.
pub fn verify(loaded: &LoadedConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    let base = &loaded.model;
    let delta = loaded.diagnostics.delta;
    let mut suite = Suite::default();
    let mut fault_pending = opts.inject_fault;
    for r in 0..opts.replicates {
        let mut cfg = base.clone();
        cfg.seed = base.seed.wrapping_add(r);
        let settings = RunSettings {
            delta,
            stop: StopRule::Never,
        };
        let mut sim = Simulation::new(&cfg, settings)?;
        let x0 = sim.state().clone();
        let mut records = Vec::new();
        while let Some(ev) = sim.advance()? {
            records.push(ev.record);
            let Some(det) = ev.detail else { continue };
            let faulty;
            let (mix, next) = if fault_pending {
                fault_pending = false;
                let mut m = det.mixing.clone();
                m.corrupt_row(0, 1.5);
                let next = OpinionState::new(ev.state.t() + 1, cfg.n, cfg.d, m.apply(&ev.state))?;
                faulty = (m, next);
                (&faulty.0, &faulty.1)
            } else {
                (&det.mixing, &det.next)
            };
            let ctx = StepCtx {
                seed: cfg.seed,
                state: &ev.state,
                next,
                alpha: &ev.alpha,
                draw: &ev.draw,
            };
            suite.row_sums(mix, &ctx);
            suite.energy_checks(&det, &ctx, cfg.epsilon)?;
            suite.displacement(&det, &ctx, delta)?;
            let inside = envelope_check(&x0, next)?;
            suite
                .envelope
                .record(None, inside, || ctx.dump(json!({"initial": x0.to_rows()})));
            suite.spectral(&det, &ctx, opts.spectral_max_n)?;
        }
        let probe = triviality_preservation_probe(&records, &loaded.diagnostics.delta_grid)?;
        if probe.applicable > 0 {
            suite.triviality.record(
                None,
                probe.pass,
                || json!({"seed": cfg.seed, "violations": probe.violations}),
            );
        }
        reduction_checks(&cfg, &mut suite.reduction)?;
    }

    const SCOPE: &str =
        "scored on steps where every opinion-graph edge at a non-stubborn agent is in the \
                         profile; violations on other steps are counted as out of scope";
    let checks = vec![
        suite.monotonicity.finish("monotonicity", Some(SCOPE)),
        suite.decrement.finish("decrement", Some(SCOPE)),
        suite.displacement.finish(
            "displacement",
            Some("components that are delta-trivial or contain an absolutely stubborn agent are skipped"),
        ),
        suite.row_stochastic.finish("row_stochasticity", None),
        suite.envelope.finish("envelope", None),
        suite.reduction.finish(
            "reduction_equivalence",
            Some("sync HK, async HK and Deffuant (mu = 0.25, complete host) presets against textbook updates"),
        ),
        suite.sandwich.finish("cheeger_sandwich", Some("distinct connected profile components")),
        suite.perron_frobenius.finish(
            "perron_frobenius",
            Some("on each component's Laplacian and a weighted generalized Laplacian"),
        ),
        suite.lambda2_qq.finish("lambda2_qq", Some("components whose agents all have alpha < 1")),
        suite.triviality.finish("triviality_preservation", None),
    ];
    Ok(VerifyReport {
        pass: checks.iter().all(|c| c.status != CheckStatus::Fail),
        replicates: opts.replicates,
        first_seed: base.seed,
        hypothesis: Hypothesis::of(&base.stubbornness),
        checks,
        config: loaded.effective_document(),
    })
}

pub(super) fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let loaded = args.cfg.load()?;
    let mut opts = VerifyOptions::from_config(&loaded);
    if let Some(r) = args.replicates {
        opts.replicates = r.max(1);
    }
    opts.inject_fault = args.inject_fault;
    let report = verify(&loaded, &opts)?;
    for c in &report.checks {
        eprintln!(
            "{:<24} {:<8} evaluated {:>8}  failures {:>4}  out-of-scope {:>4}",
            c.name,
            format!("{:?}", c.status).to_lowercase(),
            c.evaluated,
            c.failures,
            c.out_of_scope_violations
        );
    }
    write_json(args.out.as_deref(), &report)?;
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}
