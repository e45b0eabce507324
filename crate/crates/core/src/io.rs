// SPDX-License-Identifier: Apache-2.0

//! External formats: the JSON config document, JSON Lines traces, and the
//! wire form of schedule supports. Every vertex label outside this crate is
//! 1-based.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::dynamics::{RunSettings, StopRule};
use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::model::{validate_config, AveragingRule, InteractionMode, ModelConfig, TraceRecord};
use crate::stochastic::{
    preset, GraphLiteral, InitialSpec, PresetParams, ScheduleElement, ScheduleEntry, ScheduleSpec,
    SocialSpec, StubbornnessSpec,
};

/// Serializes 0-based indices as 1-based.
pub fn one_based_list<S: Serializer>(v: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &i in v {
        seq.serialize_element(&(i + 1))?;
    }
    seq.end()
}

fn to_zero_based(i: usize, what: &str) -> std::result::Result<usize, String> {
    i.checked_sub(1)
        .ok_or_else(|| format!("{what}: agent labels are 1-based, found 0"))
}

// ---------------------------------------------------------------------------
// Schedule wire form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntryWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Vec<[usize; 2]>>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpecWire {
    pub mode: InteractionMode,
    pub support: Vec<ScheduleEntryWire>,
}

impl TryFrom<ScheduleSpecWire> for ScheduleSpec {
    type Error = String;

    fn try_from(w: ScheduleSpecWire) -> std::result::Result<Self, String> {
        let mut support = Vec::with_capacity(w.support.len());
        for (k, e) in w.support.into_iter().enumerate() {
            let what = format!("schedule support element {}", k + 1);
            let element = match (e.agents, e.matching) {
                (Some(agents), None) => {
                    let mut a = agents
                        .into_iter()
                        .map(|i| to_zero_based(i, &what))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    a.sort_unstable();
                    if a.windows(2).any(|p| p[0] == p[1]) {
                        return Err(format!("{what}: duplicate agent"));
                    }
                    ScheduleElement::Agents(a)
                }
                (None, Some(pairs)) => {
                    let mut m = Vec::with_capacity(pairs.len());
                    for [i, j] in pairs {
                        let (i, j) = (to_zero_based(i, &what)?, to_zero_based(j, &what)?);
                        if i == j {
                            return Err(format!("{what}: self-pair ({}, {})", i + 1, j + 1));
                        }
                        m.push((i.min(j), i.max(j)));
                    }
                    ScheduleElement::Matching(m)
                }
                _ => {
                    return Err(format!(
                        "{what}: give exactly one of \"agents\" or \"matching\""
                    ))
                }
            };
            support.push(ScheduleEntry {
                element,
                prob: e.prob,
            });
        }
        Ok(ScheduleSpec {
            mode: w.mode,
            support,
        })
    }
}

impl From<ScheduleSpec> for ScheduleSpecWire {
    fn from(s: ScheduleSpec) -> Self {
        let support = s
            .support
            .into_iter()
            .map(|e| match e.element {
                ScheduleElement::Agents(a) => ScheduleEntryWire {
                    agents: Some(a.into_iter().map(|i| i + 1).collect()),
                    matching: None,
                    prob: e.prob,
                },
                ScheduleElement::Matching(m) => ScheduleEntryWire {
                    agents: None,
                    matching: Some(m.into_iter().map(|(i, j)| [i + 1, j + 1]).collect()),
                    prob: e.prob,
                },
            })
            .collect();
        ScheduleSpecWire {
            mode: s.mode,
            support,
        }
    }
}

// ---------------------------------------------------------------------------
// Trace JSON Lines

/// `x` with 17 significant digits, which round-trips every finite f64.
fn exact_number(x: f64) -> Result<Box<RawValue>> {
    if !x.is_finite() {
        return Err(Error::Numerical {
            message: format!("non-finite opinion {x} cannot be written"),
            residual: x,
        });
    }
    RawValue::from_string(format!("{x:.16e}")).map_err(|e| Error::Numerical {
        message: e.to_string(),
        residual: x,
    })
}

#[derive(Serialize)]
struct TraceLineOut {
    t: u64,
    opinions: Vec<Vec<Box<RawValue>>>,
    energy: f64,
    components: Vec<Vec<usize>>,
    max_component_diameter: f64,
    all_delta_trivial: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLineIn {
    t: u64,
    opinions: Vec<Vec<f64>>,
    energy: f64,
    components: Vec<Vec<usize>>,
    max_component_diameter: f64,
    all_delta_trivial: bool,
}

/// One trace record as a single JSON line (no trailing newline).
pub fn trace_line(rec: &TraceRecord) -> Result<String> {
    let opinions = rec
        .opinions
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| exact_number(x))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let line = TraceLineOut {
        t: rec.t,
        opinions,
        energy: rec.energy,
        components: rec
            .components
            .iter()
            .map(|c| c.iter().map(|i| i + 1).collect())
            .collect(),
        max_component_diameter: rec.max_component_diameter,
        all_delta_trivial: rec.all_delta_trivial,
    };
    serde_json::to_string(&line).map_err(|e| Error::Numerical {
        message: e.to_string(),
        residual: f64::NAN,
    })
}

pub fn parse_trace_line(line: &str, line_no: usize) -> Result<TraceRecord> {
    let raw: TraceLineIn = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        column: e.column(),
        message: e.to_string(),
    })?;
    let components = raw
        .components
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|i| to_zero_based(i, "trace component"))
                .collect()
        })
        .collect::<std::result::Result<Vec<Vec<usize>>, String>>()
        .map_err(|message| Error::Parse {
            line: line_no,
            column: 0,
            message,
        })?;
    Ok(TraceRecord {
        t: raw.t,
        opinions: raw.opinions,
        energy: raw.energy,
        components,
        max_component_diameter: raw.max_component_diameter,
        all_delta_trivial: raw.all_delta_trivial,
    })
}

pub fn write_trace<W: Write>(out: &mut W, records: &[TraceRecord]) -> Result<()> {
    for rec in records {
        writeln!(out, "{}", trace_line(rec)?).map_err(|e| io_err("<trace>", e))?;
    }
    Ok(())
}

pub fn write_trace_file(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_trace(&mut w, records)?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| io_err("<trace>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_trace_line(&line, k + 1)?);
    }
    Ok(out)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRecord>> {
    let f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_trace(BufReader::new(f))
}

pub(crate) fn io_err(path: impl AsRef<Path>, source: std::io::Error) -> Error {
    Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Config document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    pub epsilon: f64,
    /// Taken from the schedule or preset when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<InteractionMode>,
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    pub initial: InitialSpec,
    #[serde(default)]
    pub averaging: AveragingRule,
}

fn default_d() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    SyncHk,
    AsyncHk,
    Deffuant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSection {
    pub name: PresetName,
    /// Deffuant convergence rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Deffuant host graph; complete when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<GraphLiteral>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopWire {
    Never,
    AllDeltaTrivial,
    DiameterBelow(f64),
}

impl From<StopWire> for StopRule {
    fn from(s: StopWire) -> Self {
        match s {
            StopWire::Never => StopRule::Never,
            StopWire::AllDeltaTrivial => StopRule::AllDeltaTrivial,
            StopWire::DiameterBelow(t) => StopRule::DiameterBelow(t),
        }
    }
}

/// Parameters of the `verify` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Seeds `seed .. seed + replicates` are checked.
    #[serde(default = "default_verify_replicates")]
    pub replicates: u64,
    /// Profile components larger than this skip the spectral checks.
    #[serde(default = "default_spectral_max_n")]
    pub spectral_max_n: usize,
}

fn default_verify_replicates() -> u64 {
    5
}

fn default_spectral_max_n() -> usize {
    10
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            replicates: default_verify_replicates(),
            spectral_max_n: default_spectral_max_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSettings {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Stop rule shared by `run` and `batch`.
    #[serde(default = "default_stop")]
    pub stop: StopWire,
    /// Thresholds for the triviality-preservation probe.
    #[serde(default = "default_grid")]
    pub delta_grid: Vec<f64>,
    #[serde(default)]
    pub verify: VerifySection,
}

fn default_delta() -> f64 {
    1e-3
}

fn default_stop() -> StopWire {
    StopWire::Never
}

fn default_grid() -> Vec<f64> {
    vec![1e-6, 1e-3, 1e-2, 1e-1, 0.5]
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            stop: default_stop(),
            delta_grid: default_grid(),
            verify: VerifySection::default(),
        }
    }
}

impl DiagnosticsSettings {
    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            delta: self.delta,
            stop: self.stop.into(),
        }
    }
}

/// The on-disk configuration. With a `preset` the `stubbornness`,
/// `schedule` and `social` sections are generated and must be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stubbornness: Option<StubbornnessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social: Option<SocialSpec>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSettings,
}

/// A validated configuration plus its diagnostics settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub model: ModelConfig,
    pub diagnostics: DiagnosticsSettings,
    /// Name of the preset the model was expanded from, if any.
    pub preset: Option<PresetName>,
}

impl LoadedConfig {
    /// Fully explicit document, suitable for echoing into outputs.
    pub fn effective_document(&self) -> ConfigDocument {
        let m = &self.model;
        ConfigDocument {
            model: ModelSection {
                n: m.n,
                d: m.d,
                epsilon: m.epsilon,
                mode: Some(m.mode),
                horizon: m.horizon,
                seed: m.seed,
                initial: m.initial.clone(),
                averaging: m.averaging,
            },
            preset: None,
            stubbornness: Some(m.stubbornness.clone()),
            schedule: Some(m.schedule.clone()),
            social: Some(m.social.clone()),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

impl ConfigDocument {
    /// Expands a preset if present, without validating the result.
    pub fn expand(self) -> Result<LoadedConfig> {
        let ConfigDocument {
            model,
            preset: preset_section,
            stubbornness,
            schedule,
            social,
            diagnostics,
        } = self;
        let preset_name = preset_section.as_ref().map(|p| p.name);
        let (stubbornness, schedule, social) = match preset_section {
            Some(p) => {
                if stubbornness.is_some() || schedule.is_some() || social.is_some() {
                    return Err(Error::Config(vec![
                        "a preset generates stubbornness, schedule and social; remove those sections".into(),
                    ]));
                }
                if p.name != PresetName::Deffuant && (p.mu.is_some() || p.host.is_some()) {
                    return Err(Error::Config(vec![format!(
                        "mu and host only apply to the deffuant preset, not {:?}",
                        p.name
                    )]));
                }
                let params = match p.name {
                    PresetName::SyncHk => PresetParams::SyncHk { n: model.n },
                    PresetName::AsyncHk => PresetParams::AsyncHk { n: model.n },
                    PresetName::Deffuant => {
                        let mu = p.mu.ok_or_else(|| {
                            Error::Config(vec!["preset deffuant requires mu".into()])
                        })?;
                        let host = p
                            .host
                            .unwrap_or(GraphLiteral::Named(crate::stochastic::NamedGraph::Complete))
                            .materialize(model.n)?;
                        PresetParams::Deffuant { host, mu }
                    }
                };
                preset(&params)?
            }
            None => {
                let mut missing = Vec::new();
                for (name, present) in [
                    ("stubbornness", stubbornness.is_some()),
                    ("schedule", schedule.is_some()),
                    ("social", social.is_some()),
                ] {
                    if !present {
                        missing.push(format!("missing section \"{name}\" (or give a preset)"));
                    }
                }
                if !missing.is_empty() {
                    return Err(Error::Config(missing));
                }
                (stubbornness.unwrap(), schedule.unwrap(), social.unwrap())
            }
        };
        let mode = model.mode.unwrap_or(schedule.mode);
        Ok(LoadedConfig {
            model: ModelConfig {
                epsilon: model.epsilon,
                mode,
                n: model.n,
                d: model.d,
                horizon: model.horizon,
                seed: model.seed,
                initial: model.initial,
                stubbornness,
                schedule,
                social,
                averaging: model.averaging,
            },
            diagnostics,
            preset: preset_name,
        })
    }
}

fn diagnostics_violations(d: &DiagnosticsSettings) -> Vec<String> {
    let mut v = Vec::new();
    if !(d.delta > 0.0 && d.delta.is_finite()) {
        v.push(format!(
            "diagnostics.delta must be positive (found {})",
            d.delta
        ));
    }
    if d.delta_grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        v.push("diagnostics.delta_grid entries must be positive".into());
    }
    if let StopWire::DiameterBelow(t) = d.stop {
        if !(t > 0.0 && t.is_finite()) {
            v.push(format!(
                "diagnostics.stop diameter_below must be positive (found {t})"
            ));
        }
    }
    if d.verify.replicates == 0 {
        v.push("diagnostics.verify.replicates must be at least 1".into());
    }
    v
}

/// Parses, expands and validates a config document.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let doc: ConfigDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let loaded = doc.expand()?;
    loaded.validate()?;
    Ok(loaded)
}

impl LoadedConfig {
    pub fn validate(&self) -> Result<()> {
        let mut v = validate_config(&self.model);
        v.extend(diagnostics_violations(&self.diagnostics));
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text)
}

/// Graph given inline (`[[1,2],[2,3]]` or `{"n":3,"edges":[[1,2]]}`) or by
/// a path to a file holding either form.
pub fn parse_graph_argument(arg: &str) -> Result<SimpleGraph> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg).map_err(|e| io_err(arg, e))?
    } else {
        arg.to_string()
    };
    parse_graph_text(&text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    n: usize,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GraphInput {
    Doc(GraphDoc),
    Edges(Vec<[usize; 2]>),
}

pub fn parse_graph_text(text: &str) -> Result<SimpleGraph> {
    let parsed: GraphInput = serde_json::from_str(text.trim()).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: format!("expected an edge list or {{\"n\":..,\"edges\":..}}: {e}"),
    })?;
    match parsed {
        GraphInput::Doc(d) => SimpleGraph::from_one_based(d.n, &d.edges),
        GraphInput::Edges(e) => {
            let n = e.iter().flatten().copied().max().unwrap_or(0);
            SimpleGraph::from_one_based(n, &e)
        }
    }
}
