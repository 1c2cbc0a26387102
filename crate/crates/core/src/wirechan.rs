//! Token emissions to observable packets: per-token JSON-style framing with
//! fixed overhead, flush-interval merging, network latency injection, and
//! the metadata-only observation boundary.
//!
//! `PacketRecord` deliberately has no payload field; everything downstream
//! of `observe` sees timestamps, sizes, and directions only.

use serde::{Deserialize, Serialize};

use crate::specsim::{GenEvent, TokenId};
use crate::util::{lognormal_factor, scale_ns, stream_rng, tag};
use crate::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "c2s")]
    ClientToServer,
    #[serde(rename = "s2c")]
    ServerToClient,
}

/// One observable packet: the adversary's entire per-packet view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub ts_ns: Nanos,
    pub size_bytes: u32,
    pub dir: Dir,
    pub stream_id: String,
}

/// Wire framing parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSpec {
    /// Fixed per-token envelope (the JSON object wrapping each token).
    pub per_token_overhead_bytes: u32,
    /// Per-packet transport framing.
    pub header_bytes: u32,
    /// Timer-based merge window; 0 means one packet per token.
    pub flush_interval_ns: Nanos,
}

impl FrameSpec {
    /// One packet per token, as OpenAI-style streaming behaves.
    pub fn openai_like() -> Self {
        Self { per_token_overhead_bytes: 150, header_bytes: 40, flush_interval_ns: 0 }
    }

    /// 30 ms flush timer that merges token bursts, as Claude-style
    /// streaming behaves.
    pub fn claude_like() -> Self {
        Self {
            per_token_overhead_bytes: 150,
            header_bytes: 40,
            flush_interval_ns: crate::util::ms_to_ns(30.0),
        }
    }

    /// Wire size of a packet carrying one token with `payload` text bytes.
    pub fn one_token_packet_size(&self, payload: u32) -> u32 {
        self.header_bytes + self.per_token_overhead_bytes + payload
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self::openai_like()
    }
}

/// One-way network latency model with mean-one lognormal jitter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetModel {
    pub one_way_base_ns: Nanos,
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl NetModel {
    pub fn ideal() -> Self {
        Self { one_way_base_ns: 0, jitter_sigma: 0.0, seed: 0 }
    }

    pub fn default_lan(seed: u64) -> Self {
        Self { one_way_base_ns: crate::util::ms_to_ns(20.0), jitter_sigma: 0.05, seed }
    }
}

/// Frame token emissions into server-to-client packets.
///
/// With a flush interval, tokens whose emission times land in the same
/// window coalesce into one packet stamped at the window close; with flush
/// 0 every token gets its own packet at its emission time.
pub fn frame(
    events: &[GenEvent],
    spec: &FrameSpec,
    payload_len: &dyn Fn(TokenId) -> u32,
    stream_id: &str,
) -> Vec<PacketRecord> {
    let mut packets = Vec::new();
    if spec.flush_interval_ns == 0 {
        for e in events {
            packets.push(PacketRecord {
                ts_ns: e.t_emit,
                size_bytes: spec.one_token_packet_size(payload_len(e.token)),
                dir: Dir::ServerToClient,
                stream_id: stream_id.to_string(),
            });
        }
        return packets;
    }
    let flush = spec.flush_interval_ns;
    let mut i = 0;
    while i < events.len() {
        let window = events[i].t_emit / flush;
        let mut size = spec.header_bytes;
        let mut j = i;
        while j < events.len() && events[j].t_emit / flush == window {
            size += spec.per_token_overhead_bytes + payload_len(events[j].token);
            j += 1;
        }
        packets.push(PacketRecord {
            ts_ns: (window + 1) * flush,
            size_bytes: size,
            dir: Dir::ServerToClient,
            stream_id: stream_id.to_string(),
        });
        i = j;
    }
    packets
}

/// Add one-way latency with jitter, preserving per-stream FIFO order.
pub fn transmit(packets: &[PacketRecord], net: &NetModel) -> Vec<PacketRecord> {
    let mut rng = stream_rng(net.seed, &[tag("net")]);
    let mut out = Vec::with_capacity(packets.len());
    let mut last_by_stream: std::collections::HashMap<&str, Nanos> =
        std::collections::HashMap::new();
    for p in packets {
        let delay = scale_ns(net.one_way_base_ns, lognormal_factor(&mut rng, net.jitter_sigma));
        let mut ts = p.ts_ns + delay;
        if let Some(&last) = last_by_stream.get(p.stream_id.as_str()) {
            // A packet cannot overtake its predecessor on the same stream.
            ts = ts.max(last);
        }
        last_by_stream.insert(p.stream_id.as_str(), ts);
        out.push(PacketRecord { ts_ns: ts, ..p.clone() });
    }
    out
}

/// The observation boundary: whatever carried the packets is discarded and
/// only (timestamp, size, direction, stream) survives into a `Trace`.
pub fn observe(packets: &[PacketRecord], meta: &str) -> crate::capture::Trace {
    crate::capture::Trace { records: packets.to_vec(), meta: meta.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specsim::EventKind;
    use crate::util::ms_to_ns;

    fn ev(t_ms: f64) -> GenEvent {
        GenEvent { token: 0, t_emit: ms_to_ns(t_ms), round: 0, kind: EventKind::AcceptedDraft }
    }

    #[test]
    fn flush_window_merging_hand_walk() {
        let events = vec![ev(0.0), ev(0.0), ev(24.0)];
        let spec = FrameSpec {
            per_token_overhead_bytes: 150,
            header_bytes: 40,
            flush_interval_ns: ms_to_ns(5.0),
        };
        let p = frame(&events, &spec, &|_| 3, "s");
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].ts_ns, p[0].size_bytes), (ms_to_ns(5.0), 40 + 306));
        assert_eq!((p[1].ts_ns, p[1].size_bytes), (ms_to_ns(25.0), 40 + 153));
    }

    #[test]
    fn flush_zero_one_packet_per_token() {
        let events = vec![ev(0.0), ev(1.0), ev(2.0)];
        let spec = FrameSpec::openai_like();
        let lens = [0u32, 3, 5];
        let mut it = lens.iter().cycle();
        // payload_len is keyed by token id in real use; fake it positionally.
        let sized: Vec<GenEvent> = events
            .iter()
            .enumerate()
            .map(|(i, e)| GenEvent { token: i as u32, ..e.clone() })
            .collect();
        let p = frame(&sized, &spec, &|t| lens[t as usize], "s");
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].size_bytes, 190);
        assert_eq!(p[1].size_bytes, 193);
        let _ = it.next();
    }

    #[test]
    fn burst_merges_into_bucket_sizes() {
        let events: Vec<GenEvent> = (0..5).map(|_| ev(10.0)).collect();
        let p = frame(&events, &FrameSpec::claude_like(), &|_| 3, "s");
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].size_bytes, 40 + 5 * 153);
    }

    #[test]
    fn transmit_shifts_by_base() {
        let spec = FrameSpec::openai_like();
        let pkts = frame(&[ev(0.0), ev(10.0)], &spec, &|_| 1, "s");
        let net = NetModel { one_way_base_ns: ms_to_ns(20.0), jitter_sigma: 0.0, seed: 0 };
        let out = transmit(&pkts, &net);
        assert_eq!(out[0].ts_ns, ms_to_ns(20.0));
        assert_eq!(out[1].ts_ns, ms_to_ns(30.0));
    }

    #[test]
    fn transmit_mean_shift_matches_lognormal_mean() {
        let pkts: Vec<PacketRecord> = (0..10_000)
            .map(|i| PacketRecord {
                ts_ns: i * 100_000_000, // spaced wider than the delay so FIFO never clamps
                size_bytes: 100,
                dir: Dir::ServerToClient,
                stream_id: "s".into(),
            })
            .collect();
        let net = NetModel { one_way_base_ns: ms_to_ns(20.0), jitter_sigma: 0.1, seed: 1 };
        let out = transmit(&pkts, &net);
        let mean_shift: f64 = out
            .iter()
            .zip(&pkts)
            .map(|(o, p)| (o.ts_ns - p.ts_ns) as f64)
            .sum::<f64>()
            / pkts.len() as f64;
        let base = ms_to_ns(20.0) as f64;
        assert!((mean_shift - base).abs() / base < 0.05, "shift {mean_shift}");
    }

    #[test]
    fn transmit_preserves_fifo() {
        let pkts = vec![
            PacketRecord { ts_ns: 0, size_bytes: 1, dir: Dir::ServerToClient, stream_id: "s".into() },
            PacketRecord { ts_ns: 1, size_bytes: 1, dir: Dir::ServerToClient, stream_id: "s".into() },
        ];
        let net = NetModel { one_way_base_ns: ms_to_ns(5.0), jitter_sigma: 1.0, seed: 3 };
        for seed in 0..50 {
            let out = transmit(&pkts, &NetModel { seed, ..net.clone() });
            assert!(out[1].ts_ns >= out[0].ts_ns);
        }
    }

    #[test]
    fn empty_in_empty_out() {
        assert!(frame(&[], &FrameSpec::openai_like(), &|_| 1, "s").is_empty());
        assert!(transmit(&[], &NetModel::ideal()).is_empty());
    }

    #[test]
    fn observe_preserves_count() {
        let p = frame(&[ev(0.0), ev(1.0)], &FrameSpec::openai_like(), &|_| 1, "s");
        let t = observe(&p, "meta");
        assert_eq!(t.records.len(), 2);
    }
}
