//! Classic pcap import/export for trace files.
//!
//! Export synthesizes minimal Ethernet/IPv4/TCP headers (the payload is
//! zeros; only metadata matters here) and uses the nanosecond-resolution
//! magic so record headers round-trip bit-exact. Import accepts native and
//! byte-swapped files in both microsecond and nanosecond variants.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::Ipv4Addr;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian, WriteBytesExt};

use crate::error::{Error, Result};
use crate::wirechan::{Dir, PacketRecord};
use crate::Nanos;

use super::Trace;

const MAGIC_MICRO: u32 = 0xa1b2_c3d4;
const MAGIC_NANO: u32 = 0xa1b2_3c4d;
const LINK_HEADERS: u32 = 14 + 20 + 20; // eth + ipv4 + tcp

/// "A.B.C.D:port" — the language-model server endpoint used to orient
/// packet direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndpointFilter {
    pub ip: Ipv4Addr,
    pub port: u16,
}

impl EndpointFilter {
    pub fn parse(s: &str) -> Result<Self> {
        let (ip, port) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::BadConfig(format!("bad filter {s:?}, want A.B.C.D:port")))?;
        Ok(Self {
            ip: ip.parse().map_err(|_| Error::BadConfig(format!("bad ip {ip:?}")))?,
            port: port.parse().map_err(|_| Error::BadConfig(format!("bad port {port:?}")))?,
        })
    }

    pub fn default_server() -> Self {
        Self { ip: Ipv4Addr::new(10, 0, 0, 1), port: 443 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ImportOptions {
    /// When set, keep only the first N packets per stream and discard
    /// streams that have fewer than N.
    pub first_packets: Option<usize>,
}

/// Write traces as one classic pcap file. Each input trace becomes one TCP
/// 4-tuple; a synthetic client endpoint 10.0.0.2:(40000+index) pairs with
/// the given server endpoint.
pub fn export_pcap(traces: &[Trace], path: &Path, server: EndpointFilter) -> Result<()> {
    let client_ip = Ipv4Addr::new(10, 0, 0, 2);
    // Merge all records, time-ordered, remembering each record's stream.
    let mut all: Vec<(usize, &PacketRecord)> = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        for r in &t.records {
            all.push((i, r));
        }
    }
    all.sort_by_key(|(_, r)| r.ts_ns);

    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_u32::<LittleEndian>(MAGIC_NANO)?;
    w.write_u16::<LittleEndian>(2)?; // version major
    w.write_u16::<LittleEndian>(4)?; // version minor
    w.write_i32::<LittleEndian>(0)?; // thiszone
    w.write_u32::<LittleEndian>(0)?; // sigfigs
    w.write_u32::<LittleEndian>(65_535)?; // snaplen
    w.write_u32::<LittleEndian>(1)?; // LINKTYPE_ETHERNET

    for (stream_idx, r) in all {
        if r.size_bytes < LINK_HEADERS {
            return Err(Error::PacketTooSmall(r.size_bytes));
        }
        let client_port = 40_000 + stream_idx as u16;
        w.write_u32::<LittleEndian>((r.ts_ns / 1_000_000_000) as u32)?;
        w.write_u32::<LittleEndian>((r.ts_ns % 1_000_000_000) as u32)?;
        w.write_u32::<LittleEndian>(r.size_bytes)?;
        w.write_u32::<LittleEndian>(r.size_bytes)?;

        let (src_ip, src_port, dst_ip, dst_port) = match r.dir {
            Dir::ServerToClient => (server.ip, server.port, client_ip, client_port),
            Dir::ClientToServer => (client_ip, client_port, server.ip, server.port),
        };
        let mut frame = vec![0u8; r.size_bytes as usize];
        // Ethernet
        frame[12] = 0x08; // ethertype IPv4
        // IPv4
        frame[14] = 0x45;
        BigEndian::write_u16(&mut frame[16..18], (r.size_bytes - 14) as u16);
        frame[22] = 64; // ttl
        frame[23] = 6; // TCP
        frame[26..30].copy_from_slice(&src_ip.octets());
        frame[30..34].copy_from_slice(&dst_ip.octets());
        // TCP
        BigEndian::write_u16(&mut frame[34..36], src_port);
        BigEndian::write_u16(&mut frame[36..38], dst_port);
        frame[46] = 0x50; // data offset 5 words
        w.write_all(&frame)?;
    }
    Ok(())
}

struct PcapFormat {
    little_endian: bool,
    nanos: bool,
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], err: Error) -> Result<()> {
    r.read_exact(buf).map_err(|_| err)
}

/// Parse a classic pcap file into traces grouped by TCP 4-tuple.
///
/// Packets are oriented against `filter`: destination match is
/// client-to-server, source match is server-to-client, anything else is
/// dropped.
pub fn import_pcap(path: &Path, filter: EndpointFilter, opts: &ImportOptions) -> Result<Vec<Trace>> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact_or(&mut f, &mut magic, Error::NotPcap)?;
    let fmt = match LittleEndian::read_u32(&magic) {
        MAGIC_MICRO => PcapFormat { little_endian: true, nanos: false },
        MAGIC_NANO => PcapFormat { little_endian: true, nanos: true },
        m if m.swap_bytes() == MAGIC_MICRO => PcapFormat { little_endian: false, nanos: false },
        m if m.swap_bytes() == MAGIC_NANO => PcapFormat { little_endian: false, nanos: true },
        _ => return Err(Error::NotPcap),
    };
    let rd32 = |b: &[u8]| -> u32 {
        if fmt.little_endian {
            LittleEndian::read_u32(b)
        } else {
            BigEndian::read_u32(b)
        }
    };
    let mut rest_header = [0u8; 20];
    read_exact_or(&mut f, &mut rest_header, Error::TruncatedPcap)?;

    // 4-tuple -> ordered records. BTreeMap keeps stream order stable.
    let mut streams: BTreeMap<String, Vec<PacketRecord>> = BTreeMap::new();
    let mut rec_header = [0u8; 16];
    loop {
        match f.read_exact(&mut rec_header) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let ts_sec = rd32(&rec_header[0..4]) as Nanos;
        let ts_frac = rd32(&rec_header[4..8]) as Nanos;
        let incl_len = rd32(&rec_header[8..12]);
        let ts_ns = ts_sec * 1_000_000_000 + if fmt.nanos { ts_frac } else { ts_frac * 1_000 };

        let mut data = vec![0u8; incl_len as usize];
        read_exact_or(&mut f, &mut data, Error::TruncatedPcap)?;
        if data.len() < LINK_HEADERS as usize || data[12] != 0x08 || data[23] != 6 {
            continue; // not IPv4/TCP
        }
        let src_ip = Ipv4Addr::new(data[26], data[27], data[28], data[29]);
        let dst_ip = Ipv4Addr::new(data[30], data[31], data[32], data[33]);
        let src_port = BigEndian::read_u16(&data[34..36]);
        let dst_port = BigEndian::read_u16(&data[36..38]);

        let (dir, client) = if dst_ip == filter.ip && dst_port == filter.port {
            (Dir::ClientToServer, (src_ip, src_port))
        } else if src_ip == filter.ip && src_port == filter.port {
            (Dir::ServerToClient, (dst_ip, dst_port))
        } else {
            continue;
        };
        let stream_id = format!("{}:{}-{}:{}", client.0, client.1, filter.ip, filter.port);
        streams.entry(stream_id.clone()).or_default().push(PacketRecord {
            ts_ns,
            size_bytes: incl_len,
            dir,
            stream_id,
        });
    }

    let mut traces = Vec::new();
    for (id, mut records) in streams {
        if let Some(cap) = opts.first_packets {
            if records.len() < cap {
                continue;
            }
            records.truncate(cap);
        }
        traces.push(Trace { records, meta: id });
    }
    Ok(traces)
}
