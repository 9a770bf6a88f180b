//! Telemetry history, mission versions and the command outbox.
//!
//! Every mutation is first appended to an optional JSON-lines journal so a
//! restarted station replays to the same state.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::codec::{
    command_frame_len, decode, encode_command, AckFrame, AckStatus, CommandEntry, CommandFrame, Frame, TelemetryFrame,
    MAX_COMMAND_ENTRIES,
};
use crate::comms::sat::{Direction, SatError, SatLink};
use crate::sensors::SensorKind;

pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    PayloadTooLarge(String),
    #[error("journal {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("journal line {line}: {detail}")]
    Journal { line: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionWaypoint {
    pub hour: u16,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionVersion {
    pub version: u16,
    pub posted_at: u32,
    pub waypoints: Vec<MissionWaypoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutboxStatus {
    Queued,
    Sent,
    Acked,
    FailedValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutboxEntry {
    pub version: u16,
    pub status: OutboxStatus,
    pub queued_at: f64,
    pub sent_at: Option<f64>,
    pub deliver_at: Option<f64>,
    pub acked_at: Option<f64>,
    /// Encoded command frame, hex.
    pub frame: String,
}

/// Telemetry as stored, in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub seq: u16,
    pub t: u32,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
    pub speed: f64,
    pub soc: f64,
    pub temperature: f64,
    pub conductivity: f64,
    pub dissolved_oxygen: f64,
    pub ph: f64,
    pub capsized: bool,
    pub thruster_on: bool,
    pub on_backup: bool,
    pub load_shed: bool,
    #[serde(skip)]
    wire: TelemetryFrame,
}

impl TelemetryRecord {
    pub fn from_frame(f: &TelemetryFrame) -> Self {
        let v = f.values();
        Self {
            seq: f.seq,
            t: f.timestamp,
            lat: v.lat,
            lon: v.lon,
            heading_deg: v.heading_deg,
            speed: v.speed,
            soc: v.soc,
            temperature: v.temperature,
            conductivity: v.conductivity,
            dissolved_oxygen: v.dissolved_oxygen,
            ph: v.ph,
            capsized: v.flags.capsized,
            thruster_on: v.flags.thruster_on,
            on_backup: v.flags.on_backup,
            load_shed: v.flags.load_shed,
            wire: *f,
        }
    }

    pub fn frame(&self) -> &TelemetryFrame {
        &self.wire
    }

    pub fn reading(&self, kind: SensorKind) -> f64 {
        match kind {
            SensorKind::Conductivity => self.conductivity,
            SensorKind::Temperature => self.temperature,
            SensorKind::DissolvedOxygen => self.dissolved_oxygen,
            SensorKind::Ph => self.ph,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub t: u32,
    pub seq: u16,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    pub t: u32,
    pub seq: u16,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestOutcome {
    Inserted,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct VehicleRecord {
    pub telemetry: BTreeMap<u16, TelemetryRecord>,
    pub missions: Vec<MissionVersion>,
    pub outbox: Vec<OutboxEntry>,
}

impl VehicleRecord {
    /// Most recent telemetry by timestamp, then sequence.
    pub fn latest(&self) -> Option<&TelemetryRecord> {
        self.telemetry.values().max_by_key(|r| (r.t, r.seq))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum JournalEvent {
    Telemetry { vehicle: String, frame: String },
    Mission { vehicle: String, mission: MissionVersion, queued_at: f64, frame: String },
    Sent { vehicle: String, version: u16, t: f64, deliver_at: f64 },
    Failed { vehicle: String, version: u16, t: f64 },
    Acked { vehicle: String, version: u16, t: f64 },
}

#[derive(Debug, Default)]
pub struct StationStore {
    vehicles: BTreeMap<String, VehicleRecord>,
    /// Outbox in posting order across vehicles, as (vehicle, version).
    post_order: Vec<(String, u16)>,
    journal: Option<(PathBuf, File)>,
}

fn hex_frame(bytes: &[u8]) -> String {
    hex::encode(bytes)
}

fn validate_vehicle_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadRequest(format!("invalid vehicle id {id:?}")))
    }
}

impl StationStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) the journal in `dir` and replays it.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let path = dir.join(JOURNAL_FILE);
        let io = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut store = Self::in_memory();
        if path.exists() {
            let file = File::open(&path).map_err(io)?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let ev: JournalEvent = serde_json::from_str(&line).map_err(|e| StoreError::Journal {
                    line: i + 1,
                    detail: e.to_string(),
                })?;
                store.apply(&ev).map_err(|e| StoreError::Journal {
                    line: i + 1,
                    detail: e.to_string(),
                })?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        store.journal = Some((path, file));
        Ok(store)
    }

    fn record(&mut self, ev: &JournalEvent) -> Result<(), StoreError> {
        if let Some((path, file)) = &mut self.journal {
            let mut line = serde_json::to_string(ev).expect("journal events serialize");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| StoreError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        Ok(())
    }

    fn apply(&mut self, ev: &JournalEvent) -> Result<(), StoreError> {
        match ev {
            JournalEvent::Telemetry { vehicle, frame } => {
                let bytes = hex::decode(frame).map_err(|e| StoreError::BadRequest(e.to_string()))?;
                match decode(&bytes) {
                    Ok(Frame::Telemetry(f)) => {
                        self.insert_telemetry(vehicle, &f)?;
                    }
                    _ => return Err(StoreError::BadRequest("journal telemetry frame invalid".into())),
                }
            }
            JournalEvent::Mission {
                vehicle,
                mission,
                queued_at,
                frame,
            } => {
                let v = self.vehicles.entry(vehicle.clone()).or_default();
                v.outbox.push(OutboxEntry {
                    version: mission.version,
                    status: OutboxStatus::Queued,
                    queued_at: *queued_at,
                    sent_at: None,
                    deliver_at: None,
                    acked_at: None,
                    frame: frame.clone(),
                });
                v.missions.push(mission.clone());
                self.post_order.push((vehicle.clone(), mission.version));
            }
            JournalEvent::Sent {
                vehicle,
                version,
                t,
                deliver_at,
            } => {
                let e = self.outbox_entry(vehicle, *version)?;
                e.status = OutboxStatus::Sent;
                e.sent_at = Some(*t);
                e.deliver_at = Some(*deliver_at);
            }
            JournalEvent::Failed { vehicle, version, t } => {
                let e = self.outbox_entry(vehicle, *version)?;
                e.status = OutboxStatus::FailedValidation;
                e.sent_at = Some(*t);
            }
            JournalEvent::Acked { vehicle, version, t } => {
                let e = self.outbox_entry(vehicle, *version)?;
                e.status = OutboxStatus::Acked;
                e.acked_at = Some(*t);
            }
        }
        Ok(())
    }

    fn commit(&mut self, ev: JournalEvent) -> Result<(), StoreError> {
        self.record(&ev)?;
        self.apply(&ev)
    }

    fn outbox_entry(&mut self, vehicle: &str, version: u16) -> Result<&mut OutboxEntry, StoreError> {
        self.vehicles
            .get_mut(vehicle)
            .and_then(|v| v.outbox.iter_mut().find(|e| e.version == version))
            .ok_or_else(|| StoreError::NotFound(format!("no outbox entry {version} for {vehicle}")))
    }

    fn insert_telemetry(&mut self, vehicle: &str, f: &TelemetryFrame) -> Result<IngestOutcome, StoreError> {
        let v = self.vehicles.entry(vehicle.to_string()).or_default();
        if let Some(existing) = v.telemetry.get(&f.seq) {
            if existing.frame() == f {
                return Ok(IngestOutcome::Duplicate);
            }
            return Err(StoreError::Conflict(format!(
                "seq {} already stored for {vehicle} with different contents",
                f.seq
            )));
        }
        v.telemetry.insert(f.seq, TelemetryRecord::from_frame(f));
        Ok(IngestOutcome::Inserted)
    }

    /// Stores a telemetry frame. Re-ingesting an identical frame is a no-op.
    pub fn ingest(&mut self, vehicle: &str, f: &TelemetryFrame) -> Result<IngestOutcome, StoreError> {
        validate_vehicle_id(vehicle)?;
        if let Some(existing) = self.vehicles.get(vehicle).and_then(|v| v.telemetry.get(&f.seq)) {
            if existing.frame() == f {
                return Ok(IngestOutcome::Duplicate);
            }
            return Err(StoreError::Conflict(format!(
                "seq {} already stored for {vehicle} with different contents",
                f.seq
            )));
        }
        self.commit(JournalEvent::Telemetry {
            vehicle: vehicle.to_string(),
            frame: hex_frame(&crate::comms::codec::encode_telemetry(f)),
        })?;
        Ok(IngestOutcome::Inserted)
    }

    /// Marks the command with the acknowledged version as acked.
    pub fn acknowledge(&mut self, vehicle: &str, ack: &AckFrame, t: f64) -> Result<bool, StoreError> {
        let Some(entry) = self
            .vehicles
            .get(vehicle)
            .and_then(|v| v.outbox.iter().find(|e| e.version == ack.seq))
        else {
            return Err(StoreError::NotFound(format!("no command {} for {vehicle}", ack.seq)));
        };
        if entry.status != OutboxStatus::Sent || ack.status != AckStatus::Applied {
            return Ok(false);
        }
        self.commit(JournalEvent::Acked {
            vehicle: vehicle.to_string(),
            version: ack.seq,
            t,
        })?;
        Ok(true)
    }

    /// Decodes a delivered frame and routes it to ingest or acknowledge.
    pub fn ingest_bytes(&mut self, vehicle: &str, bytes: &[u8], t: f64) -> Result<IngestOutcome, StoreError> {
        match decode(bytes) {
            Ok(Frame::Telemetry(f)) => self.ingest(vehicle, &f),
            Ok(Frame::Ack(a)) => {
                validate_vehicle_id(vehicle)?;
                let changed = self.acknowledge(vehicle, &a, t)?;
                Ok(if changed {
                    IngestOutcome::Inserted
                } else {
                    IngestOutcome::Duplicate
                })
            }
            Ok(Frame::Command(_)) => Err(StoreError::BadRequest("command frames flow to the vehicle, not the station".into())),
            Err(e) => Err(StoreError::BadRequest(format!("undecodable frame: {e}"))),
        }
    }

    /// Records a new mission version and queues its command frame.
    pub fn post_mission(
        &mut self,
        vehicle: &str,
        waypoints: &[MissionWaypoint],
        now: u32,
        downlink_mtu: usize,
    ) -> Result<u16, StoreError> {
        validate_vehicle_id(vehicle)?;
        if waypoints.is_empty() {
            return Err(StoreError::BadRequest("mission has no waypoints".into()));
        }
        let len = command_frame_len(waypoints.len());
        if waypoints.len() > MAX_COMMAND_ENTRIES || len > downlink_mtu {
            return Err(StoreError::PayloadTooLarge(format!(
                "{} waypoints encode to {len} bytes, downlink MTU is {downlink_mtu}",
                waypoints.len()
            )));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if !(w.lat.is_finite() && (-90.0..=90.0).contains(&w.lat) && w.lon.is_finite() && (-180.0..=180.0).contains(&w.lon)) {
                return Err(StoreError::BadRequest(format!("waypoint {i} has invalid coordinates")));
            }
            if i > 0 && w.hour <= waypoints[i - 1].hour {
                return Err(StoreError::BadRequest(format!(
                    "waypoint {i}: hours must be strictly increasing"
                )));
            }
        }
        let version = self
            .vehicles
            .get(vehicle)
            .and_then(|v| v.missions.last())
            .map_or(1, |m| m.version.wrapping_add(1));
        if version == 0 {
            return Err(StoreError::Conflict("mission version space exhausted".into()));
        }
        let entries = waypoints
            .iter()
            .map(|w| CommandEntry::from_degrees(w.hour, w.lat, w.lon))
            .collect();
        let frame = CommandFrame::new(version, now, entries).map_err(|e| StoreError::PayloadTooLarge(e.to_string()))?;
        let bytes = encode_command(&frame).map_err(|e| StoreError::PayloadTooLarge(e.to_string()))?;
        let waypoints = frame
            .entries()
            .iter()
            .map(|e| {
                let (lat, lon) = e.degrees();
                MissionWaypoint {
                    hour: e.hour_index,
                    lat,
                    lon,
                }
            })
            .collect();
        self.commit(JournalEvent::Mission {
            vehicle: vehicle.to_string(),
            mission: MissionVersion {
                version,
                posted_at: now,
                waypoints,
            },
            queued_at: now as f64,
            frame: hex_frame(&bytes),
        })?;
        Ok(version)
    }

    /// Hands queued commands to the link, oldest first, while it is open.
    pub fn relay_step(&mut self, t: f64, link: &mut SatLink) -> Result<Vec<(String, u16)>, StoreError> {
        let mut sent = Vec::new();
        if !link.spec().is_open(t) {
            return Ok(sent);
        }
        let queued: Vec<(String, u16, String)> = self
            .post_order
            .iter()
            .filter_map(|(vehicle, version)| {
                let e = self.vehicles.get(vehicle)?.outbox.iter().find(|e| e.version == *version)?;
                (e.status == OutboxStatus::Queued).then(|| (vehicle.clone(), *version, e.frame.clone()))
            })
            .collect();
        for (vehicle, version, frame) in queued {
            let bytes = hex::decode(&frame).expect("outbox frames are stored as hex");
            match link.transmit(Direction::Downlink, &bytes, t) {
                Ok(d) => {
                    self.commit(JournalEvent::Sent {
                        vehicle: vehicle.clone(),
                        version,
                        t,
                        deliver_at: d.deliver_at,
                    })?;
                    sent.push((vehicle, version));
                }
                Err(SatError::Mtu { .. }) | Err(SatError::Config(_)) => {
                    self.commit(JournalEvent::Failed { vehicle, version, t })?;
                }
            }
        }
        Ok(sent)
    }

    pub fn has_queued(&self) -> bool {
        self.vehicles
            .values()
            .any(|v| v.outbox.iter().any(|e| e.status == OutboxStatus::Queued))
    }

    fn vehicle(&self, id: &str) -> Result<&VehicleRecord, StoreError> {
        self.vehicles
            .get(id)
            .ok_or_else(|| StoreError::NotFound(format!("unknown vehicle {id:?}")))
    }

    pub fn vehicle_ids(&self) -> impl Iterator<Item = &str> {
        self.vehicles.keys().map(String::as_str)
    }

    pub fn query_track(&self, vehicle: &str, from: u32, to: u32) -> Result<Vec<TrackPoint>, StoreError> {
        if from > to {
            return Err(StoreError::BadRequest(format!("from {from} is after to {to}")));
        }
        let mut out: Vec<TrackPoint> = self
            .vehicle(vehicle)?
            .telemetry
            .values()
            .filter(|r| (from..=to).contains(&r.t))
            .map(|r| TrackPoint {
                t: r.t,
                seq: r.seq,
                lat: r.lat,
                lon: r.lon,
                heading_deg: r.heading_deg,
                speed: r.speed,
            })
            .collect();
        out.sort_by_key(|p| (p.t, p.seq));
        Ok(out)
    }

    pub fn query_readings(&self, vehicle: &str, kind: SensorKind, from: u32, to: u32) -> Result<Vec<Reading>, StoreError> {
        if from > to {
            return Err(StoreError::BadRequest(format!("from {from} is after to {to}")));
        }
        let mut out: Vec<Reading> = self
            .vehicle(vehicle)?
            .telemetry
            .values()
            .filter(|r| (from..=to).contains(&r.t))
            .map(|r| Reading {
                t: r.t,
                seq: r.seq,
                value: r.reading(kind),
            })
            .collect();
        out.sort_by_key(|p| (p.t, p.seq));
        Ok(out)
    }

    pub fn latest(&self, vehicle: &str) -> Result<Option<&TelemetryRecord>, StoreError> {
        Ok(self.vehicle(vehicle)?.latest())
    }

    pub fn outbox(&self, vehicle: &str) -> Result<&[OutboxEntry], StoreError> {
        Ok(&self.vehicle(vehicle)?.outbox)
    }

    pub fn missions(&self, vehicle: &str) -> Result<&[MissionVersion], StoreError> {
        Ok(&self.vehicle(vehicle)?.missions)
    }

    pub fn telemetry_count(&self) -> usize {
        self.vehicles.values().map(|v| v.telemetry.len()).sum()
    }

    /// Deterministic snapshot of the whole store.
    pub fn export(&self) -> String {
        serde_json::to_string_pretty(&self.vehicles).expect("store serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::codec::encode_ack;
    use crate::comms::sat::{SatLinkSpec};

    fn frame(seq: u16, t: u32) -> TelemetryFrame {
        TelemetryFrame {
            seq,
            timestamp: t,
            lat: 599_000_000 + seq as i32,
            lon: 107_000_000,
            ..Default::default()
        }
    }

    fn wps(n: usize) -> Vec<MissionWaypoint> {
        (0..n)
            .map(|i| MissionWaypoint {
                hour: i as u16,
                lat: 59.9 + i as f64 * 1e-3,
                lon: 10.7,
            })
            .collect()
    }

    #[test]
    fn ingest_is_idempotent() {
        let mut s = StationStore::in_memory();
        assert_eq!(s.ingest("usv-1", &frame(1, 10)).unwrap(), IngestOutcome::Inserted);
        assert_eq!(s.ingest("usv-1", &frame(1, 10)).unwrap(), IngestOutcome::Duplicate);
        assert_eq!(s.telemetry_count(), 1);
        let mut other = frame(1, 10);
        other.speed = 5;
        assert!(matches!(s.ingest("usv-1", &other), Err(StoreError::Conflict(_))));
    }

    #[test]
    fn track_is_time_sorted_and_inclusive() {
        let mut s = StationStore::in_memory();
        for (seq, t) in [(3, 30), (1, 10), (2, 20)] {
            s.ingest("usv-1", &frame(seq, t)).unwrap();
        }
        let tr = s.query_track("usv-1", 10, 30).unwrap();
        assert_eq!(tr.iter().map(|p| p.t).collect::<Vec<_>>(), vec![10, 20, 30]);
        assert!(s.query_track("usv-1", 31, 40).unwrap().is_empty());
        assert!(matches!(s.query_track("usv-1", 5, 4), Err(StoreError::BadRequest(_))));
        assert!(matches!(s.query_track("nope", 0, 1), Err(StoreError::NotFound(_))));
        assert_eq!(s.latest("usv-1").unwrap().unwrap().seq, 3);
    }

    #[test]
    fn missions_version_and_validate() {
        let mut s = StationStore::in_memory();
        assert_eq!(s.post_mission("usv-1", &wps(3), 100, 270).unwrap(), 1);
        assert_eq!(s.outbox("usv-1").unwrap()[0].status, OutboxStatus::Queued);
        assert_eq!(s.post_mission("usv-1", &wps(2), 200, 270).unwrap(), 2);
        assert!(matches!(s.post_mission("usv-1", &wps(26), 0, 270), Err(StoreError::PayloadTooLarge(_))));
        let mut bad = wps(3);
        bad.swap(0, 1);
        assert!(matches!(s.post_mission("usv-1", &bad, 0, 270), Err(StoreError::BadRequest(_))));
        assert!(matches!(s.post_mission("usv-1", &[], 0, 270), Err(StoreError::BadRequest(_))));
    }

    #[test]
    fn relay_waits_for_window_then_sends_in_order() {
        let mut s = StationStore::in_memory();
        s.post_mission("a", &wps(1), 0, 270).unwrap();
        s.post_mission("b", &wps(2), 0, 270).unwrap();
        let mut link = SatLink::new(SatLinkSpec {
            outages: vec![(0.0, 3600.0)],
            ..Default::default()
        });
        assert!(s.relay_step(10.0, &mut link).unwrap().is_empty());
        assert_eq!(s.outbox("a").unwrap()[0].status, OutboxStatus::Queued);
        let sent = s.relay_step(3600.0, &mut link).unwrap();
        assert_eq!(sent, vec![("a".to_string(), 1), ("b".to_string(), 1)]);
        let delivered = link.poll(Direction::Downlink, 1e9);
        assert_eq!(delivered.len(), 2);
        assert_eq!(delivered[0].bytes.len(), command_frame_len(1));
    }

    #[test]
    fn ack_moves_forward_only() {
        let mut s = StationStore::in_memory();
        s.post_mission("a", &wps(1), 0, 270).unwrap();
        let ack = AckFrame {
            seq: 1,
            timestamp: 5,
            status: AckStatus::Applied,
        };
        // not yet sent
        assert_eq!(s.ingest_bytes("a", &encode_ack(&ack), 5.0).unwrap(), IngestOutcome::Duplicate);
        let mut link = SatLink::new(SatLinkSpec::default());
        s.relay_step(1.0, &mut link).unwrap();
        assert_eq!(s.ingest_bytes("a", &encode_ack(&ack), 70.0).unwrap(), IngestOutcome::Inserted);
        assert_eq!(s.outbox("a").unwrap()[0].status, OutboxStatus::Acked);
        assert_eq!(s.ingest_bytes("a", &encode_ack(&ack), 80.0).unwrap(), IngestOutcome::Duplicate);
    }

    #[test]
    fn journal_replay_matches() {
        let dir = tempfile::tempdir().unwrap();
        let export = {
            let mut s = StationStore::open(dir.path()).unwrap();
            s.ingest("usv-1", &frame(1, 10)).unwrap();
            s.post_mission("usv-1", &wps(2), 50, 270).unwrap();
            let mut link = SatLink::new(SatLinkSpec::default());
            s.relay_step(60.0, &mut link).unwrap();
            s.export()
        };
        let s = StationStore::open(dir.path()).unwrap();
        assert_eq!(s.export(), export);
    }
}
