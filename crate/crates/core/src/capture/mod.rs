//! The adversary's sensing layer: trace ingestion, inter-packet-delay
//! extraction, packet-size declustering into token counts, and
//! inter-token-delay reconstruction.

mod pcap;

pub use pcap::{export_pcap, import_pcap, EndpointFilter, ImportOptions};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{fit_gmm_1d, EmOptions, Gmm1d};
use crate::wirechan::{Dir, PacketRecord};
use crate::Nanos;

/// Metadata-only packet stream: the adversary's entire view of one
/// response. No payload ever crosses into this type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<PacketRecord>,
    pub meta: String,
}

impl Trace {
    /// Server-to-client records only; client packets are requests.
    pub fn s2c(&self) -> Vec<&PacketRecord> {
        self.records.iter().filter(|r| r.dir == Dir::ServerToClient).collect()
    }

    /// Write as JSONL, one `{"ts_ns":..,"size":..,"dir":..,"stream":..}`
    /// record per line.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for r in &self.records {
            let line = serde_json::json!({
                "ts_ns": r.ts_ns,
                "size": r.size_bytes,
                "dir": r.dir,
                "stream": r.stream_id,
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, meta: &str) -> Result<Trace> {
        let mut records = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value = serde_json::from_str(&line)?;
            let rec = PacketRecord {
                ts_ns: v["ts_ns"]
                    .as_u64()
                    .ok_or_else(|| Error::BadTrace("missing ts_ns".into()))?,
                size_bytes: v["size"]
                    .as_u64()
                    .ok_or_else(|| Error::BadTrace("missing size".into()))?
                    as u32,
                dir: serde_json::from_value(v["dir"].clone())
                    .map_err(|_| Error::BadTrace("bad dir".into()))?,
                stream_id: v["stream"]
                    .as_str()
                    .ok_or_else(|| Error::BadTrace("missing stream".into()))?
                    .to_string(),
            };
            records.push(rec);
        }
        Ok(Trace { records, meta: meta.to_string() })
    }

    pub fn save_jsonl(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut f)
    }

    pub fn load_jsonl(path: &std::path::Path) -> Result<Trace> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Trace::read_jsonl(f, &path.display().to_string())
    }
}

/// Inter-packet delays of the server-to-client stream.
pub fn ipd(trace: &Trace) -> Result<Vec<Nanos>> {
    let recs = trace.s2c();
    if recs.len() < 2 {
        return Err(Error::TraceTooShort);
    }
    Ok(recs.windows(2).map(|w| w[1].ts_ns - w[0].ts_ns).collect())
}

/// k-Gaussian packet-size model used to recover tokens-per-packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeClusterModel {
    /// Max tokens per packet; cluster i (1-based) means i tokens.
    pub b: usize,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub fitted_on: usize,
}

impl SizeClusterModel {
    /// Smallest gap between adjacent cluster means.
    pub fn min_separation(&self) -> f64 {
        self.means.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_sd(&self) -> f64 {
        self.sds.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fit B size clusters over all server-to-client packet sizes by 1-D EM.
pub fn fit_size_clusters(traces: &[Trace], b: usize, opts: &EmOptions) -> Result<SizeClusterModel> {
    let sizes: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.s2c().into_iter().map(|r| r.size_bytes as f64).collect::<Vec<_>>())
        .collect();
    if sizes.is_empty() {
        return Err(Error::TraceTooShort);
    }
    let gmm: Gmm1d = fit_gmm_1d(&sizes, b, opts)?;
    debug_assert!(crate::gmm::is_monotone(&gmm.loglik_history, 1e-6));
    Ok(SizeClusterModel {
        b,
        means: gmm.means.clone(),
        sds: gmm.vars.iter().map(|v| v.sqrt()).collect(),
        fitted_on: sizes.len(),
    })
}

/// Pick B for the size model by BIC over 1..=max_b.
pub fn select_b_by_bic(traces: &[Trace], max_b: usize, opts: &EmOptions) -> Result<usize> {
    let sizes: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.s2c().into_iter().map(|r| r.size_bytes as f64).collect::<Vec<_>>())
        .collect();
    if sizes.is_empty() {
        return Err(Error::TraceTooShort);
    }
    let n = sizes.len() as f64;
    let mut best = (1, f64::INFINITY);
    for b in 1..=max_b {
        let Ok(g) = fit_gmm_1d(&sizes, b, opts) else { continue };
        let ll = *g.loglik_history.last().unwrap();
        let params = (3 * b - 1) as f64;
        let bic = params * n.ln() - 2.0 * ll;
        if bic < best.1 {
            best = (b, bic);
        }
    }
    Ok(best.0)
}

/// Tokens carried by a packet of size `s`: the Gaussian (1-based index)
/// with the highest density at `s`; ties break to the smaller count.
pub fn tokens_in_packet(s: f64, model: &SizeClusterModel) -> usize {
    let mut best = 0;
    let mut best_ld = f64::NEG_INFINITY;
    for i in 0..model.b {
        let var = model.sds[i] * model.sds[i];
        let ld = -0.5 * (var.ln() + (s - model.means[i]) * (s - model.means[i]) / var);
        if ld > best_ld {
            best_ld = ld;
            best = i;
        }
    }
    best + 1
}

/// Declustered timing view: token counts per packet plus inter-token
/// delays, aligned across runs even when packets merge differently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTimingSignature {
    pub inter_token_delays: Vec<Nanos>,
    pub token_counts_per_packet: Vec<usize>,
}

impl TokenTimingSignature {
    pub fn total_tokens(&self) -> usize {
        self.token_counts_per_packet.iter().sum()
    }
}

/// Expand each packet into its token count; tokens inside one packet get
/// delay 0 (the channel destroyed their spacing), inter-packet gaps attach
/// to the first token of the later packet.
pub fn reconstruct_token_delays(trace: &Trace, model: &SizeClusterModel) -> Result<TokenTimingSignature> {
    let recs = trace.s2c();
    if recs.is_empty() {
        return Err(Error::TraceTooShort);
    }
    let mut counts = Vec::with_capacity(recs.len());
    let mut delays = Vec::new();
    let mut prev_ts: Option<Nanos> = None;
    for r in recs {
        let n = tokens_in_packet(r.size_bytes as f64, model);
        counts.push(n);
        if let Some(p) = prev_ts {
            delays.push(r.ts_ns - p);
            delays.extend(std::iter::repeat(0).take(n - 1));
        } else {
            delays.extend(std::iter::repeat(0).take(n - 1));
        }
        prev_ts = Some(r.ts_ns);
    }
    Ok(TokenTimingSignature { inter_token_delays: delays, token_counts_per_packet: counts })
}
