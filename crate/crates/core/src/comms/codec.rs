//! Bit-exact wire format for telemetry, command and ack frames.
//!
//! ```text
//! 0x55 0x53 | version u8 | type u8 | seq u16 | timestamp u32 | payload | crc32 u32
//! ```
//!
//! Multi-byte fields are big-endian. The CRC is CRC-32/IEEE over every
//! preceding byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: [u8; 2] = [0x55, 0x53];
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
pub const CRC_LEN: usize = 4;
pub const TELEMETRY_PAYLOAD_LEN: usize = 25;
pub const TELEMETRY_FRAME_LEN: usize = HEADER_LEN + TELEMETRY_PAYLOAD_LEN + CRC_LEN;
pub const ACK_FRAME_LEN: usize = HEADER_LEN + 1 + CRC_LEN;
pub const COMMAND_ENTRY_LEN: usize = 10;
pub const MAX_COMMAND_ENTRIES: usize = 25;

/// Encoded size of a command frame carrying `count` waypoints.
pub const fn command_frame_len(count: usize) -> usize {
    HEADER_LEN + 1 + COMMAND_ENTRY_LEN * count + CRC_LEN
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("command carries {0} waypoints, at most {MAX_COMMAND_ENTRIES} fit a frame")]
    TooManyEntries(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("frame truncated at {len} bytes (need {need})")]
    Truncated { len: usize, need: usize },
    #[error("CRC mismatch: frame says {expected:#010x}, computed {computed:#010x}")]
    CrcMismatch { expected: u32, computed: u32 },
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("frame is {got} bytes, type requires {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("command count {0} exceeds {MAX_COMMAND_ENTRIES}")]
    TooManyEntries(u8),
    #[error("unknown ack status {0}")]
    BadAckStatus(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum MsgType {
    Telemetry = 1,
    Command = 2,
    Ack = 3,
}

impl MsgType {
    fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(MsgType::Telemetry),
            2 => Some(MsgType::Command),
            3 => Some(MsgType::Ack),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Flags {
    pub capsized: bool,
    pub thruster_on: bool,
    pub on_backup: bool,
    pub load_shed: bool,
}

impl Flags {
    pub fn to_byte(self) -> u8 {
        self.capsized as u8
            | (self.thruster_on as u8) << 1
            | (self.on_backup as u8) << 2
            | (self.load_shed as u8) << 3
    }

    /// Reserved bits are ignored.
    pub fn from_byte(b: u8) -> Self {
        Self {
            capsized: b & 1 != 0,
            thruster_on: b & 2 != 0,
            on_backup: b & 4 != 0,
            load_shed: b & 8 != 0,
        }
    }
}

/// Telemetry in wire units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TelemetryFrame {
    pub seq: u16,
    pub timestamp: u32,
    /// 1e-7 degrees.
    pub lat: i32,
    pub lon: i32,
    /// Compass heading, 0.01 degrees clockwise from north.
    pub heading: u16,
    /// mm/s.
    pub speed: u16,
    /// 0.01 %.
    pub soc: u16,
    /// 0.01 °C.
    pub temperature: i16,
    /// µS/cm.
    pub conductivity: u32,
    /// 0.01 mg/L.
    pub dissolved_oxygen: u16,
    /// 0.001 pH.
    pub ph: u16,
    pub flags: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub hour_index: u16,
    pub lat: i32,
    pub lon: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandFrame {
    pub seq: u16,
    pub timestamp: u32,
    entries: Vec<CommandEntry>,
}

impl CommandFrame {
    pub fn new(seq: u16, timestamp: u32, entries: Vec<CommandEntry>) -> Result<Self, CodecError> {
        if entries.len() > MAX_COMMAND_ENTRIES {
            return Err(CodecError::TooManyEntries(entries.len()));
        }
        Ok(Self { seq, timestamp, entries })
    }

    pub fn entries(&self) -> &[CommandEntry] {
        &self.entries
    }

    pub fn encoded_len(&self) -> usize {
        command_frame_len(self.entries.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum AckStatus {
    #[default]
    Applied = 0,
    Rejected = 1,
}

/// Acknowledges the command whose seq (the mission version) it echoes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AckFrame {
    pub seq: u16,
    pub timestamp: u32,
    pub status: AckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Telemetry(TelemetryFrame),
    Command(CommandFrame),
    Ack(AckFrame),
}

impl Frame {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Frame::Telemetry(_) => MsgType::Telemetry,
            Frame::Command(_) => MsgType::Command,
            Frame::Ack(_) => MsgType::Ack,
        }
    }

    pub fn seq(&self) -> u16 {
        match self {
            Frame::Telemetry(f) => f.seq,
            Frame::Command(f) => f.seq,
            Frame::Ack(f) => f.seq,
        }
    }
}

fn header(buf: &mut Vec<u8>, kind: MsgType, seq: u16, timestamp: u32) {
    buf.extend_from_slice(&MAGIC);
    buf.push(VERSION);
    buf.push(kind as u8);
    buf.extend_from_slice(&seq.to_be_bytes());
    buf.extend_from_slice(&timestamp.to_be_bytes());
}

fn seal(mut buf: Vec<u8>) -> Vec<u8> {
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_be_bytes());
    buf
}

pub fn encode_telemetry(f: &TelemetryFrame) -> Vec<u8> {
    let mut b = Vec::with_capacity(TELEMETRY_FRAME_LEN);
    header(&mut b, MsgType::Telemetry, f.seq, f.timestamp);
    b.extend_from_slice(&f.lat.to_be_bytes());
    b.extend_from_slice(&f.lon.to_be_bytes());
    b.extend_from_slice(&f.heading.to_be_bytes());
    b.extend_from_slice(&f.speed.to_be_bytes());
    b.extend_from_slice(&f.soc.to_be_bytes());
    b.extend_from_slice(&f.temperature.to_be_bytes());
    b.extend_from_slice(&f.conductivity.to_be_bytes());
    b.extend_from_slice(&f.dissolved_oxygen.to_be_bytes());
    b.extend_from_slice(&f.ph.to_be_bytes());
    b.push(f.flags);
    seal(b)
}

pub fn encode_command(f: &CommandFrame) -> Result<Vec<u8>, CodecError> {
    let n = f.entries.len();
    if n > MAX_COMMAND_ENTRIES {
        return Err(CodecError::TooManyEntries(n));
    }
    let mut b = Vec::with_capacity(command_frame_len(n));
    header(&mut b, MsgType::Command, f.seq, f.timestamp);
    b.push(n as u8);
    for e in &f.entries {
        b.extend_from_slice(&e.hour_index.to_be_bytes());
        b.extend_from_slice(&e.lat.to_be_bytes());
        b.extend_from_slice(&e.lon.to_be_bytes());
    }
    Ok(seal(b))
}

pub fn encode_ack(f: &AckFrame) -> Vec<u8> {
    let mut b = Vec::with_capacity(ACK_FRAME_LEN);
    header(&mut b, MsgType::Ack, f.seq, f.timestamp);
    b.push(f.status as u8);
    seal(b)
}

pub fn encode(frame: &Frame) -> Result<Vec<u8>, CodecError> {
    match frame {
        Frame::Telemetry(f) => Ok(encode_telemetry(f)),
        Frame::Command(f) => encode_command(f),
        Frame::Ack(f) => Ok(encode_ack(f)),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut out = [0u8; N];
        out.copy_from_slice(&self.buf[self.pos..self.pos + N]);
        self.pos += N;
        out
    }
    fn u8(&mut self) -> u8 {
        self.take::<1>()[0]
    }
    fn u16(&mut self) -> u16 {
        u16::from_be_bytes(self.take())
    }
    fn i16(&mut self) -> i16 {
        i16::from_be_bytes(self.take())
    }
    fn u32(&mut self) -> u32 {
        u32::from_be_bytes(self.take())
    }
    fn i32(&mut self) -> i32 {
        i32::from_be_bytes(self.take())
    }
}

/// Parses one frame. The checksum is verified before any field is
/// interpreted, so corruption anywhere surfaces as a CRC mismatch.
pub fn decode(bytes: &[u8]) -> Result<Frame, DecodeError> {
    let min = HEADER_LEN + CRC_LEN;
    if bytes.len() < min {
        return Err(DecodeError::Truncated {
            len: bytes.len(),
            need: min,
        });
    }
    let (body, tail) = bytes.split_at(bytes.len() - CRC_LEN);
    let expected = u32::from_be_bytes([tail[0], tail[1], tail[2], tail[3]]);
    let computed = crc32fast::hash(body);
    if expected != computed {
        return Err(DecodeError::CrcMismatch { expected, computed });
    }
    if body[0..2] != MAGIC {
        return Err(DecodeError::BadMagic([body[0], body[1]]));
    }
    if body[2] != VERSION {
        return Err(DecodeError::BadVersion(body[2]));
    }
    let kind = MsgType::from_u8(body[3]).ok_or(DecodeError::UnknownType(body[3]))?;
    let need = match kind {
        MsgType::Telemetry => TELEMETRY_FRAME_LEN,
        MsgType::Ack => ACK_FRAME_LEN,
        MsgType::Command => {
            if bytes.len() < command_frame_len(0) {
                return Err(DecodeError::Truncated {
                    len: bytes.len(),
                    need: command_frame_len(0),
                });
            }
            let count = body[HEADER_LEN];
            if count as usize > MAX_COMMAND_ENTRIES {
                return Err(DecodeError::TooManyEntries(count));
            }
            command_frame_len(count as usize)
        }
    };
    if bytes.len() < need {
        return Err(DecodeError::Truncated { len: bytes.len(), need });
    }
    if bytes.len() > need {
        return Err(DecodeError::LengthMismatch {
            expected: need,
            got: bytes.len(),
        });
    }

    let mut r = Reader { buf: body, pos: 4 };
    let seq = r.u16();
    let timestamp = r.u32();
    Ok(match kind {
        MsgType::Telemetry => Frame::Telemetry(TelemetryFrame {
            seq,
            timestamp,
            lat: r.i32(),
            lon: r.i32(),
            heading: r.u16(),
            speed: r.u16(),
            soc: r.u16(),
            temperature: r.i16(),
            conductivity: r.u32(),
            dissolved_oxygen: r.u16(),
            ph: r.u16(),
            flags: r.u8(),
        }),
        MsgType::Command => {
            let count = r.u8() as usize;
            let entries = (0..count)
                .map(|_| CommandEntry {
                    hour_index: r.u16(),
                    lat: r.i32(),
                    lon: r.i32(),
                })
                .collect();
            Frame::Command(CommandFrame { seq, timestamp, entries })
        }
        MsgType::Ack => {
            let status = match r.u8() {
                0 => AckStatus::Applied,
                1 => AckStatus::Rejected,
                other => return Err(DecodeError::BadAckStatus(other)),
            };
            Frame::Ack(AckFrame { seq, timestamp, status })
        }
    })
}

/// Rounds half away from zero and saturates into the integer range.
fn quantize<T: TryFrom<i64>>(value: f64, scale: f64, min: i64, max: i64) -> T
where
    <T as TryFrom<i64>>::Error: std::fmt::Debug,
{
    let q = (value * scale).round();
    let q = if q.is_nan() { 0 } else { (q.clamp(min as f64, max as f64)) as i64 };
    T::try_from(q).expect("clamped into range")
}

/// Physical-unit view of a telemetry frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TelemetryValues {
    pub timestamp: u32,
    /// Degrees.
    pub lat: f64,
    pub lon: f64,
    /// Compass degrees, clockwise from north.
    pub heading_deg: f64,
    /// m/s.
    pub speed: f64,
    /// Fraction in [0, 1].
    pub soc: f64,
    /// °C.
    pub temperature: f64,
    /// µS/cm.
    pub conductivity: f64,
    /// mg/L.
    pub dissolved_oxygen: f64,
    pub ph: f64,
    pub flags: Flags,
}

/// Compass degrees in [0, 360) from a planar heading (radians, CCW from east).
pub fn compass_degrees(planar_heading: f64) -> f64 {
    (90.0 - planar_heading.to_degrees()).rem_euclid(360.0)
}

impl TelemetryFrame {
    pub fn quantize(seq: u16, v: &TelemetryValues) -> Self {
        let heading: i64 = quantize::<i64>(v.heading_deg.rem_euclid(360.0), 100.0, 0, 36_000) % 36_000;
        Self {
            seq,
            timestamp: v.timestamp,
            lat: quantize(v.lat, 1e7, i32::MIN as i64, i32::MAX as i64),
            lon: quantize(v.lon, 1e7, i32::MIN as i64, i32::MAX as i64),
            heading: heading as u16,
            speed: quantize(v.speed, 1000.0, 0, u16::MAX as i64),
            soc: quantize(v.soc, 10_000.0, 0, 10_000),
            temperature: quantize(v.temperature, 100.0, i16::MIN as i64, i16::MAX as i64),
            conductivity: quantize(v.conductivity, 1.0, 0, u32::MAX as i64),
            dissolved_oxygen: quantize(v.dissolved_oxygen, 100.0, 0, u16::MAX as i64),
            ph: quantize(v.ph, 1000.0, 0, u16::MAX as i64),
            flags: v.flags.to_byte(),
        }
    }

    pub fn values(&self) -> TelemetryValues {
        TelemetryValues {
            timestamp: self.timestamp,
            lat: self.lat as f64 / 1e7,
            lon: self.lon as f64 / 1e7,
            heading_deg: self.heading as f64 / 100.0,
            speed: self.speed as f64 / 1000.0,
            soc: self.soc as f64 / 10_000.0,
            temperature: self.temperature as f64 / 100.0,
            conductivity: self.conductivity as f64,
            dissolved_oxygen: self.dissolved_oxygen as f64 / 100.0,
            ph: self.ph as f64 / 1000.0,
            flags: Flags::from_byte(self.flags),
        }
    }
}

impl CommandEntry {
    pub fn from_degrees(hour_index: u16, lat: f64, lon: f64) -> Self {
        Self {
            hour_index,
            lat: quantize(lat, 1e7, i32::MIN as i64, i32::MAX as i64),
            lon: quantize(lon, 1e7, i32::MIN as i64, i32::MAX as i64),
        }
    }

    pub fn degrees(&self) -> (f64, f64) {
        (self.lat as f64 / 1e7, self.lon as f64 / 1e7)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_telemetry() -> TelemetryFrame {
        TelemetryFrame {
            seq: 513,
            timestamp: 1_700_000_000,
            lat: 599_000_000,
            lon: -107_000_000,
            heading: 27_012,
            speed: 412,
            soc: 8_750,
            temperature: -123,
            conductivity: 51_234,
            dissolved_oxygen: 812,
            ph: 8_105,
            flags: 0b1010,
        }
    }

    #[test]
    fn field_widths() {
        assert_eq!(TELEMETRY_FRAME_LEN, 2 + 1 + 1 + 2 + 4 + 25 + 4);
        assert_eq!(TELEMETRY_FRAME_LEN, 39);
        assert_eq!(ACK_FRAME_LEN, 15);
        assert_eq!(command_frame_len(25), 265);
        assert_eq!(command_frame_len(26), 275);
    }

    #[test]
    fn telemetry_layout() {
        let b = encode_telemetry(&sample_telemetry());
        assert_eq!(b.len(), 39);
        assert_eq!(&b[0..4], &[0x55, 0x53, 1, 1]);
        assert_eq!(&b[4..6], &513u16.to_be_bytes());
        assert_eq!(&b[6..10], &1_700_000_000u32.to_be_bytes());
        assert_eq!(b[34], 0b1010);
        assert_eq!(&b[35..], &crc32fast::hash(&b[..35]).to_be_bytes());
    }

    #[test]
    fn crc_is_ieee() {
        // check value of CRC-32/ISO-HDLC
        assert_eq!(crc32fast::hash(b"123456789"), 0xCBF4_3926);
    }

    #[test]
    fn round_trips() {
        let t = Frame::Telemetry(sample_telemetry());
        assert_eq!(decode(&encode(&t).unwrap()).unwrap(), t);
        let c = Frame::Command(
            CommandFrame::new(
                7,
                42,
                vec![
                    CommandEntry { hour_index: 0, lat: 1, lon: -1 },
                    CommandEntry { hour_index: 3, lat: i32::MAX, lon: i32::MIN },
                ],
            )
            .unwrap(),
        );
        let cb = encode(&c).unwrap();
        assert_eq!(cb.len(), 11 + 20 + 4);
        assert_eq!(decode(&cb).unwrap(), c);
        let a = Frame::Ack(AckFrame { seq: 9, timestamp: 5, status: AckStatus::Rejected });
        let ab = encode(&a).unwrap();
        assert_eq!(ab.len(), 15);
        assert_eq!(decode(&ab).unwrap(), a);
    }

    #[test]
    fn oversize_command_rejected_at_construction() {
        let e = CommandEntry { hour_index: 0, lat: 0, lon: 0 };
        assert_eq!(CommandFrame::new(1, 0, vec![e; 26]), Err(CodecError::TooManyEntries(26)));
        assert!(CommandFrame::new(1, 0, vec![e; 25]).is_ok());
    }

    #[test]
    fn every_single_byte_flip_is_a_crc_error() {
        let b = encode_telemetry(&sample_telemetry());
        for i in 0..b.len() {
            for x in 1..=255u8 {
                let mut c = b.clone();
                c[i] ^= x;
                assert!(matches!(decode(&c), Err(DecodeError::CrcMismatch { .. })), "byte {i} xor {x}");
            }
        }
    }

    fn reseal(mut body: Vec<u8>) -> Vec<u8> {
        body.truncate(body.len() - 4);
        seal(body)
    }

    #[test]
    fn distinct_structural_errors() {
        let good = encode_telemetry(&sample_telemetry());
        let mut m = good.clone();
        m[0] = 0x00;
        assert_eq!(decode(&reseal(m)), Err(DecodeError::BadMagic([0x00, 0x53])));
        let mut v = good.clone();
        v[2] = 2;
        assert_eq!(decode(&reseal(v)), Err(DecodeError::BadVersion(2)));
        let mut k = good.clone();
        k[3] = 9;
        assert_eq!(decode(&reseal(k)), Err(DecodeError::UnknownType(9)));
        assert!(matches!(decode(&good[..10]), Err(DecodeError::Truncated { len: 10, .. })));
        let short = seal(good[..30].to_vec());
        assert!(matches!(decode(&short), Err(DecodeError::Truncated { need: 39, .. })));
        let mut long = good[..35].to_vec();
        long.push(0);
        assert!(matches!(decode(&seal(long)), Err(DecodeError::LengthMismatch { expected: 39, got: 40 })));
    }

    #[test]
    fn quantization_rounds_half_away_from_zero() {
        let v = TelemetryValues {
            temperature: 12.345,
            ..Default::default()
        };
        let t = TelemetryFrame::quantize(0, &v).temperature;
        assert!(t == 1234 || t == 1235);
        let v = TelemetryValues {
            temperature: -0.125,
            ph: 7.0005,
            ..Default::default()
        };
        let f = TelemetryFrame::quantize(0, &v);
        assert_eq!(f.temperature, -13);
        assert_eq!(f.ph, 7001);
    }

    #[test]
    fn quantization_saturates() {
        let v = TelemetryValues {
            temperature: 850.0,
            speed: -1.0,
            soc: 1.2,
            heading_deg: 359.999,
            ..Default::default()
        };
        let f = TelemetryFrame::quantize(0, &v);
        assert_eq!(f.temperature, i16::MAX);
        assert_eq!(f.speed, 0);
        assert_eq!(f.soc, 10_000);
        assert_eq!(f.heading, 0);
    }

    #[test]
    fn compass_conversion() {
        assert_eq!(compass_degrees(0.0), 90.0);
        assert_eq!(compass_degrees(std::f64::consts::FRAC_PI_2), 0.0);
        assert!((compass_degrees(std::f64::consts::PI) - 270.0).abs() < 1e-12);
    }

    #[test]
    fn flags_round_trip() {
        for b in 0..16u8 {
            assert_eq!(Flags::from_byte(b).to_byte(), b);
        }
    }
}
