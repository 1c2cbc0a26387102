//! End-to-end pipelines: token emissions through framing, the network, and
//! the observation boundary into metadata traces, plus labeled dataset
//! builders for the topic and language experiments and idempotent
//! metric persistence.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capture::{ipd, Trace};
use crate::error::{Error, Result};
use crate::harness::workload::{token_payload_len, LanguagePreset, TopicPreset};
use crate::specsim::{
    answer_with_gap, planted_generate, GenEvent, PlantedRounds, ScriptedGapResponder,
    SpeculativeConfig, TokenId,
};
use crate::util::{stream_rng, tag};
use crate::wirechan::{frame, observe, transmit, FrameSpec, NetModel};
use crate::Nanos;

/// Everything between the serving loop and the attacker's capture file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pipeline {
    pub spec: SpeculativeConfig,
    pub frame: FrameSpec,
    pub net: NetModel,
}

impl Pipeline {
    /// One packet per token, zero network latency: the cleanest view.
    pub fn ideal() -> Self {
        Self {
            spec: SpeculativeConfig::default(),
            frame: FrameSpec::openai_like(),
            net: NetModel::ideal(),
        }
    }

    pub fn lan(seed: u64) -> Self {
        Self {
            spec: SpeculativeConfig::default(),
            frame: FrameSpec::openai_like(),
            net: NetModel::default_lan(seed),
        }
    }

    /// Re-seed both jitter sources from one trial seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut p = self.clone();
        p.spec.seed = seed;
        p.net.seed = seed.wrapping_add(0x9e3779b97f4a7c15);
        p
    }
}

/// Run emissions through framing, the network, and observation.
pub fn trace_from_events(
    events: &[GenEvent],
    pipe: &Pipeline,
    payload_len: &dyn Fn(TokenId) -> u32,
    stream_id: &str,
    meta: &str,
) -> Trace {
    let packets = frame(events, &pipe.frame, payload_len, stream_id);
    let delivered = transmit(&packets, &pipe.net);
    observe(&delivered, meta)
}

/// One observed response with a planted acceptance rate.
pub fn planted_trace(
    n_tokens: usize,
    alpha: f64,
    pattern_seed: u64,
    pipe: &Pipeline,
    payload_len: &dyn Fn(TokenId) -> u32,
    stream_id: &str,
) -> Result<Trace> {
    let tokens: Vec<TokenId> = (0..n_tokens as TokenId).collect();
    let rounds = PlantedRounds::Bernoulli { alpha, pattern_seed };
    let events = planted_generate(&tokens, &rounds, &pipe.spec)?;
    Ok(trace_from_events(&events, pipe, payload_len, stream_id, stream_id))
}

fn mix(parts: &[u64]) -> u64 {
    let mut rng = stream_rng(parts[0], &parts[1..]);
    rand::Rng::gen(&mut rng)
}

/// Labeled single-turn traces, one class per topic preset. Every trial
/// gets its own acceptance pattern and jitter seeds.
pub fn topic_dataset(
    presets: &[TopicPreset],
    n_per_class: usize,
    n_tokens: usize,
    seed: u64,
    pipe: &Pipeline,
) -> Result<Vec<(String, Vec<Trace>)>> {
    presets
        .iter()
        .enumerate()
        .map(|(ci, preset)| {
            let traces = (0..n_per_class)
                .map(|trial| {
                    let s = mix(&[seed, tag("topic"), ci as u64, trial as u64]);
                    planted_trace(
                        n_tokens,
                        preset.alpha,
                        s,
                        &pipe.with_seed(s),
                        &|_| 4,
                        &format!("{}-{trial}", preset.name),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preset.name.clone(), traces))
        })
        .collect()
}

/// Multi-turn sessions for the topic experiment: each session belongs to
/// one topic and contains `turns` independent replies on fresh streams.
/// Stream ids are unique across the whole batch so turns can never be
/// cross-attributed.
pub fn multi_turn_sessions(
    presets: &[TopicPreset],
    sessions_per_class: usize,
    turns: usize,
    n_tokens: usize,
    seed: u64,
    pipe: &Pipeline,
) -> Result<Vec<(Vec<Trace>, usize)>> {
    if turns == 0 {
        return Err(Error::BadConfig("turns must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(presets.len() * sessions_per_class);
    let mut seen = std::collections::HashSet::new();
    for (ci, preset) in presets.iter().enumerate() {
        for sess in 0..sessions_per_class {
            let mut turns_v = Vec::with_capacity(turns);
            for turn in 0..turns {
                let s = mix(&[seed, tag("session"), ci as u64, sess as u64, turn as u64]);
                let stream = format!("{}-s{sess}-t{turn}", preset.name);
                assert!(seen.insert(stream.clone()), "duplicate stream id {stream}");
                turns_v.push(planted_trace(
                    n_tokens,
                    preset.alpha,
                    s,
                    &pipe.with_seed(s),
                    &|_| 4,
                    &stream,
                )?);
            }
            out.push((turns_v, ci));
        }
    }
    Ok(out)
}

/// Labeled traces per language: payload sizes follow the language's
/// script profile and timing follows its acceptance rate.
pub fn language_dataset(
    presets: &[LanguagePreset],
    n_per_class: usize,
    n_tokens: usize,
    seed: u64,
    pipe: &Pipeline,
) -> Result<Vec<(String, Vec<Trace>)>> {
    presets
        .iter()
        .enumerate()
        .map(|(ci, preset)| {
            let traces = (0..n_per_class)
                .map(|trial| {
                    let s = mix(&[seed, tag("lang"), ci as u64, trial as u64]);
                    planted_trace(
                        n_tokens,
                        preset.alpha,
                        s,
                        &pipe.with_seed(s),
                        &|t| token_payload_len(preset, t),
                        &format!("{}-{trial}", preset.name),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preset.name.clone(), traces))
        })
        .collect()
}

/// Run one digit probe end to end (emission, wire, observation) and
/// return the attacker-visible delay between the first two packets.
pub fn second_token_delay_via_wire(
    responder: &ScriptedGapResponder,
    template: &str,
    pos: usize,
    guess: u8,
    rep: u64,
    pipe: &Pipeline,
) -> Result<Nanos> {
    let s = mix(&[pipe.spec.seed, tag("probe"), pos as u64, guess as u64, rep]);
    let pipe = pipe.with_seed(s);
    let events = answer_with_gap(responder, template, pos, guess, rep, &pipe.spec, 2)?;
    let trace = trace_from_events(&events, &pipe, &|_| 3, "probe", "probe");
    Ok(ipd(&trace)?[0])
}

/// A flat name -> value metric map, the unit of experiment output.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub values: BTreeMap<String, f64>,
}

impl Metrics {
    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.values.get(name).copied().ok_or(Error::NoMetrics)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Run an experiment once per (name, seed): if its metrics file already
/// exists the stored result is returned and `body` is not run again.
pub fn run_experiment(
    out_dir: &Path,
    name: &str,
    seed: u64,
    body: impl FnOnce() -> Result<Metrics>,
) -> Result<Metrics> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}-seed{seed}.json"));
    if path.exists() {
        return Metrics::load(&path);
    }
    let m = body()?;
    m.save(&path)?;
    Ok(m)
}
