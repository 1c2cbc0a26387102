//! Constant-rate pacing and padding defense. The server-to-client stream
//! is re-emitted on a fixed slot grid (slot times are exact multiples of
//! the interval, starting at zero) and every slot carries exactly one
//! packet of a fixed padded size, whether or not real data is waiting.
//! An observer then sees a packet train whose timing and sizes depend
//! only on the stream duration, not on its content.

use serde::{Deserialize, Serialize};

use crate::capture::Trace;
use crate::error::{Error, Result};
use crate::wirechan::{Dir, PacketRecord};
use crate::Nanos;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefensePolicy {
    pub interval_ns: Nanos,
    pub pad_packet_size: u32,
    /// Fixed stream horizon. When set, the slot grid always covers
    /// [0, horizon] regardless of when the last real packet arrived, so
    /// two streams defended under the same policy produce byte-identical
    /// packet trains.
    pub horizon_ns: Option<Nanos>,
}

impl DefensePolicy {
    pub fn new(interval_ns: Nanos, pad_packet_size: u32) -> Self {
        Self { interval_ns, pad_packet_size, horizon_ns: None }
    }

    pub fn with_horizon(mut self, horizon_ns: Nanos) -> Self {
        self.horizon_ns = Some(horizon_ns);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval_ns == 0 {
            return Err(Error::BadConfig("pacing interval must be positive".into()));
        }
        if self.pad_packet_size == 0 {
            return Err(Error::BadConfig("pad packet size must be positive".into()));
        }
        Ok(())
    }
}

/// Cost accounting for one defended stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverheadReport {
    pub real_packets: usize,
    pub slot_packets: usize,
    pub pad_slots: usize,
    /// Pad packets per real packet (1.0 = 100% extra packets).
    pub packet_overhead: f64,
    pub bytes_real: u64,
    pub bytes_sent: u64,
    /// Extra bytes on the wire per real byte.
    pub byte_overhead: f64,
    pub mean_added_delay_ns: f64,
    pub max_added_delay_ns: Nanos,
}

/// Re-emit the server-to-client side of `trace` on the policy's slot grid.
/// Slot t_i = i * interval; a real packet arriving at time t ships in the
/// first slot at or after t, and unused slots ship pure padding.
pub fn pace(trace: &Trace, policy: &DefensePolicy) -> Result<(Trace, OverheadReport)> {
    policy.validate()?;
    let real: Vec<&PacketRecord> = trace.s2c();
    if real.is_empty() {
        return Err(Error::TraceTooShort);
    }
    let iv = policy.interval_ns;
    let last_real = real.iter().map(|r| r.ts_ns).max().unwrap();
    let last_slot_needed = last_real.div_ceil(iv);
    let last_slot = match policy.horizon_ns {
        Some(h) => last_slot_needed.max(h / iv),
        None => last_slot_needed,
    };
    let n_slots = (last_slot + 1) as usize;

    let stream_id = real[0].stream_id.clone();
    let mut occupied = vec![false; n_slots];
    let mut added = Vec::with_capacity(real.len());
    for r in &real {
        let slot = r.ts_ns.div_ceil(iv);
        occupied[slot as usize] = true;
        added.push(slot * iv - r.ts_ns);
    }
    let records: Vec<PacketRecord> = (0..n_slots as Nanos)
        .map(|slot| PacketRecord {
            ts_ns: slot * iv,
            size_bytes: policy.pad_packet_size,
            dir: Dir::ServerToClient,
            stream_id: stream_id.clone(),
        })
        .collect();

    let real_packets = real.len();
    let pad_slots = occupied.iter().filter(|&&o| !o).count();
    let bytes_real: u64 = real.iter().map(|r| r.size_bytes as u64).sum();
    let bytes_sent = policy.pad_packet_size as u64 * n_slots as u64;
    let report = OverheadReport {
        real_packets,
        slot_packets: n_slots,
        pad_slots,
        packet_overhead: pad_slots as f64 / real_packets as f64,
        bytes_real,
        bytes_sent,
        byte_overhead: (bytes_sent as f64 - bytes_real as f64) / bytes_real as f64,
        mean_added_delay_ns: added.iter().map(|&d| d as f64).sum::<f64>() / real.len() as f64,
        max_added_delay_ns: added.iter().copied().max().unwrap_or(0),
    };
    let paced = Trace { records, meta: format!("{} paced@{}ns", trace.meta, iv) };
    Ok((paced, report))
}

/// One point of the privacy/overhead trade-off curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub interval_ns: Nanos,
    pub packet_overhead: f64,
    pub mean_added_delay_ns: f64,
    /// Attack accuracy measured against the defended traces, if the
    /// caller evaluated one.
    pub attack_accuracy: Option<f64>,
}

/// Pace every trace at each interval and average the overhead. The
/// optional `attack` closure receives the defended traces for one
/// interval and returns the attack accuracy against them.
pub fn tradeoff_sweep(
    traces: &[Trace],
    intervals_ns: &[Nanos],
    base: &DefensePolicy,
    mut attack: Option<&mut dyn FnMut(&[Trace]) -> Result<f64>>,
) -> Result<Vec<TradeoffPoint>> {
    if traces.is_empty() || intervals_ns.is_empty() {
        return Err(Error::BadConfig("need traces and intervals to sweep".into()));
    }
    let mut points = Vec::with_capacity(intervals_ns.len());
    for &iv in intervals_ns {
        let policy = DefensePolicy { interval_ns: iv, ..base.clone() };
        let mut paced = Vec::with_capacity(traces.len());
        let mut overhead = 0.0;
        let mut delay = 0.0;
        for t in traces {
            let (p, rep) = pace(t, &policy)?;
            overhead += rep.packet_overhead;
            delay += rep.mean_added_delay_ns;
            paced.push(p);
        }
        let n = traces.len() as f64;
        let attack_accuracy = match attack.as_mut() {
            Some(f) => Some(f(&paced)?),
            None => None,
        };
        points.push(TradeoffPoint {
            interval_ns: iv,
            packet_overhead: overhead / n,
            mean_added_delay_ns: delay / n,
            attack_accuracy,
        });
    }
    Ok(points)
}
