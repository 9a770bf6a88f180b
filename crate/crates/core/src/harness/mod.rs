//! Deterministic run loop wiring the vehicle, power plant, sensors,
//! autopilot, links and an in-process ground station on one step grid.

pub mod report;
pub mod sweep;

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::comms::codec::{
    compass_degrees, decode, encode_ack, encode_telemetry, AckFrame, AckStatus, CommandFrame, Flags, Frame,
    TelemetryValues,
};
use crate::comms::logbook::{LogRecord, Logbook};
use crate::comms::rf::{rf_transmit, RfOutcome};
use crate::comms::sat::{Direction, SatLink};
use crate::comms::uplink::UplinkPolicy;
use crate::guidance::{
    detect_capsize, estimate_sea_state, guide, AccelWindow, Fix, GuidanceOutput, MissionTracker, NavState, Target,
    Waypoint,
};
use crate::power::{mppt_step, solar_power, BatteryBank, Loads, PowerTick};
use crate::scenario::{MissionUpload, ScenarioConfig, ScenarioError};
use crate::sensors::{sample, EnvField, SensorKind, SensorSpec, SensorState};
use crate::station::store::{IngestOutcome, MissionWaypoint, StationStore};
use crate::vehicle::{self, ActuatorCommand, TetherState, VehicleError, VehicleState, WinchDirection};

pub use report::{summarize, Summary};

pub const STATE_FILE: &str = "state.csv";
pub const ENERGY_FILE: &str = "energy.csv";
pub const LINKS_FILE: &str = "links.csv";
pub const LOGBOOK_FILE: &str = "logbook.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";
pub const STATION_FILE: &str = "station.json";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("step {step}: non-finite value in {module} ({detail})")]
    NonFinite {
        step: u64,
        module: &'static str,
        detail: String,
    },
    #[error("step {step}: {module} failed: {detail}")]
    Module {
        step: u64,
        module: &'static str,
        detail: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("replay: {0}")]
    Replay(String),
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    /// True for failures that point at a bug rather than at the input.
    pub fn is_defect(&self) -> bool {
        matches!(self, HarnessError::NonFinite { .. } | HarnessError::Module { .. })
    }

    fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Everything one run leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub state_csv: String,
    pub energy_csv: String,
    pub links_csv: String,
    /// NDJSON, one record per line.
    pub logbook: String,
    pub summary: Summary,
    pub station_export: String,
}

impl RunArtifacts {
    pub fn files(&self) -> [(&'static str, String); 6] {
        [
            (STATE_FILE, self.state_csv.clone()),
            (ENERGY_FILE, self.energy_csv.clone()),
            (LINKS_FILE, self.links_csv.clone()),
            (LOGBOOK_FILE, self.logbook.clone()),
            (SUMMARY_FILE, self.summary.to_json()),
            (STATION_FILE, self.station_export.clone()),
        ]
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, body) in self.files() {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }
}

/// Recomputes the summary of an artifact directory and checks it against
/// the stored one when present.
pub fn replay(dir: &Path) -> Result<Summary, HarnessError> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))
    };
    let summary = summarize(&read(STATE_FILE)?, &read(ENERGY_FILE)?, &read(LINKS_FILE)?)?;
    let stored = dir.join(SUMMARY_FILE);
    if stored.exists() {
        let text = read(SUMMARY_FILE)?;
        if text != summary.to_json() {
            return Err(HarnessError::Replay(format!(
                "{} differs from the summary recomputed from the CSV files",
                stored.display()
            )));
        }
    }
    Ok(summary)
}

/// Runs a validated scenario to completion.
pub fn run(cfg: &ScenarioConfig) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    let mut world = World::new(cfg)?;
    for k in 1..=cfg.step_count() {
        world.step(k)?;
    }
    world.finish()
}

fn fmt_t(t: f64) -> String {
    format!("{}", (t * 1e6).round() / 1e6)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn event_step(t: f64, dt: f64) -> u64 {
    (t / dt - 1e-9).ceil().max(0.0) as u64
}

#[derive(Debug, Clone, Copy, Default)]
struct EnergyAcc {
    steps: u64,
    interval: f64,
    solar_available: f64,
    solar_in: f64,
    solar_bus: f64,
    load: Loads,
    load_wh: f64,
    delta: f64,
    loss: f64,
    shed: u64,
}

impl EnergyAcc {
    fn add(&mut self, tick: &PowerTick, eta: f64) {
        let h = tick.dt / 3600.0;
        self.steps += 1;
        self.interval += tick.dt;
        self.solar_available += tick.solar_available_w * h;
        self.solar_in += tick.solar_in_w * h;
        self.solar_bus += tick.solar_bus_wh(eta);
        self.load.servo += tick.load.servo * h;
        self.load.thruster += tick.load.thruster * h;
        self.load.winch += tick.load.winch * h;
        self.load.electronics += tick.load.electronics * h;
        self.load.comms += tick.load.comms * h;
        self.load_wh += tick.load_wh();
        self.delta += tick.battery_delta_wh;
        self.loss += tick.charge_loss_wh;
        self.shed += tick.load_shed as u64;
    }
}

struct Probe {
    spec: SensorSpec,
    state: SensorState,
    field: EnvField,
    reading: f64,
}

struct World<'a> {
    cfg: &'a ScenarioConfig,
    record_steps: u64,
    sample_steps: u64,
    sea_steps: u64,
    state: VehicleState,
    bank: BatteryBank,
    last_tick: PowerTick,
    tracker: MissionTracker,
    nav: NavState,
    last_desired: f64,
    guidance: Option<GuidanceOutput>,
    sea_state: Option<f64>,
    probes: Vec<Probe>,
    rng: ChaCha8Rng,
    uplink: UplinkPolicy,
    sat: SatLink,
    station: StationStore,
    logbook: Logbook,
    acc: EnergyAcc,
    capsizes: Vec<u64>,
    uploads: Vec<(u64, &'a MissionUpload)>,
    state_w: csv::Writer<Vec<u8>>,
    energy_w: csv::Writer<Vec<u8>>,
    links_w: csv::Writer<Vec<u8>>,
    /// Modem air time still owed, s.
    tx_backlog: f64,
}

impl<'a> World<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, HarnessError> {
        let steps = |v: f64| cfg.steps_in(v).expect("validated interval");
        let state = VehicleState::initial(&cfg.vehicle, cfg.initial_heading, &cfg.wave);
        let tracker = MissionTracker::new(cfg.mission.clone(), 0).map_err(|e| HarnessError::Module {
            step: 0,
            module: "guidance",
            detail: e.to_string(),
        })?;
        let probes = SensorKind::ALL
            .iter()
            .map(|&kind| {
                let mut spec = SensorSpec::default_for(kind);
                spec.noise_enabled = cfg.sensors.noise;
                let field = EnvField::new(*cfg.env_for(kind));
                let initial = field.value(state.x, state.y, 0.0);
                let st = SensorState::new(&spec, initial, 0.0);
                Probe {
                    spec,
                    state: st,
                    field,
                    reading: st.internal_value,
                }
            })
            .collect();
        let mut sat_spec = cfg.sat.clone();
        sat_spec.outages.extend(cfg.events.link_outages.iter().copied());
        let mut capsizes: Vec<u64> = cfg.events.capsize_at.iter().map(|&t| event_step(t, cfg.dt)).collect();
        capsizes.sort_unstable();
        let uploads = cfg
            .events
            .mission_uploads
            .iter()
            .map(|u| (event_step(u.t, cfg.dt), u))
            .collect();
        let bank = BatteryBank::new(cfg.battery, cfg.initial_soc);
        let energy_meta = format!(
            "installed_wh={} cycling_wh={} initial_soc={}",
            cfg.battery.installed_energy_wh(),
            cfg.battery.cycling_energy_wh(),
            bank.soc
        );
        Ok(Self {
            cfg,
            record_steps: steps(cfg.record_interval),
            sample_steps: steps(cfg.sensors.sample_interval),
            sea_steps: steps(cfg.sea_state_interval),
            nav: NavState {
                fix: Fix::at(state.x, state.y),
                heading: state.heading,
                roll: state.roll,
                pitch: state.pitch_attitude,
                heave_accel_window: AccelWindow::new(cfg.sea_state_window),
            },
            last_desired: state.heading,
            state,
            bank,
            last_tick: PowerTick::default(),
            tracker,
            guidance: None,
            sea_state: None,
            probes,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            uplink: UplinkPolicy::new(cfg.uplink_cadence, cfg.dt).expect("validated cadence"),
            sat: SatLink::new(sat_spec),
            station: StationStore::in_memory(),
            logbook: Logbook::in_memory(),
            acc: EnergyAcc::default(),
            capsizes,
            uploads,
            state_w: report::csv_writer(report::STATE_SCHEMA, "", report::STATE_COLUMNS),
            energy_w: report::csv_writer(report::ENERGY_SCHEMA, &energy_meta, report::ENERGY_COLUMNS),
            links_w: report::csv_writer(report::LINKS_SCHEMA, "", report::LINK_COLUMNS),
            tx_backlog: 0.0,
        })
    }

    fn log(&mut self, step: u64, record: LogRecord) -> Result<(), HarnessError> {
        self.logbook.append(&record).map_err(|e| HarnessError::Module {
            step,
            module: "comms",
            detail: e.to_string(),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn link_row(
        &mut self,
        t: f64,
        channel: &str,
        direction: &str,
        event: &str,
        msg_type: &str,
        seq: Option<u16>,
        bytes: usize,
        deliver_at: Option<f64>,
        cost: f64,
        detail: &str,
    ) {
        let seq = seq.map(|s| s.to_string()).unwrap_or_default();
        let deliver_at = deliver_at.map(fmt_t).unwrap_or_default();
        self.links_w
            .write_record([
                fmt_t(t).as_str(),
                channel,
                direction,
                event,
                msg_type,
                &seq,
                &bytes.to_string(),
                &deliver_at,
                &num(cost),
                detail,
            ])
            .expect("writing to memory");
    }

    fn timestamp(&self, t: f64) -> u32 {
        self.cfg.start_time.saturating_add(t.floor() as u32)
    }

    fn step(&mut self, k: u64) -> Result<(), HarnessError> {
        let cfg = self.cfg;
        let dt = cfg.dt;
        let t0 = (k - 1) as f64 * dt;
        let t = k as f64 * dt;

        self.fire_events(k, t0)?;
        if k == 1 {
            self.send_telemetry(k, t0)?;
        }

        let sim_hour = (t0 / 3600.0).floor() as u32;
        let out = guide(
            &mut self.tracker,
            &self.nav,
            self.state.yaw_rate,
            sim_hour,
            self.last_desired,
            &cfg.autopilot,
        );
        self.last_desired = out.desired_heading;
        self.guidance = Some(out);
        let cmd = ActuatorCommand {
            rudder: out.rudder,
            thruster_level: cfg.thruster_level,
            winch: WinchDirection::Hold,
        };
        let (mut next, vtick) = vehicle::step(&self.state, &cfg.wave, &cmd, &cfg.vehicle, dt).map_err(|e| match e {
            VehicleError::NonFinite(name) => HarnessError::NonFinite {
                step: k,
                module: "vehicle_dynamics",
                detail: name.to_string(),
            },
            other => HarnessError::Module {
                step: k,
                module: "vehicle_dynamics",
                detail: other.to_string(),
            },
        })?;
        next.capsized = detect_capsize(next.roll, next.pitch_attitude, cfg.autopilot.capsize_threshold);
        self.state = next;
        self.nav.fix = Fix::at(self.state.x, self.state.y);
        self.nav.heading = self.state.heading;
        self.nav.roll = self.state.roll;
        self.nav.pitch = self.state.pitch_attitude;

        if k % self.sea_steps == 0 {
            let a = cfg.wave.vertical_acceleration(t);
            if !a.is_finite() {
                return Err(HarnessError::NonFinite {
                    step: k,
                    module: "guidance",
                    detail: "heave acceleration".into(),
                });
            }
            self.nav.heave_accel_window.push(a);
        }
        if k % self.sample_steps == 0 {
            self.sample_sensors(k, t)?;
        }

        self.vehicle_receive(k, t)?;
        if self.uplink.is_due(k) {
            self.send_telemetry(k, t)?;
        }
        self.station_side(k, t)?;

        self.power(k, t, vtick)?;

        if k % self.record_steps == 0 || k == cfg.step_count() {
            self.record(k, t)?;
        }
        Ok(())
    }

    fn fire_events(&mut self, k: u64, t0: f64) -> Result<(), HarnessError> {
        while self.capsizes.first().is_some_and(|&e| e < k) {
            self.capsizes.remove(0);
            self.state.roll = PI;
            self.nav.roll = PI;
            self.log(
                k,
                LogRecord::Event {
                    t: t0,
                    name: "capsize_injected".into(),
                },
            )?;
        }
        while self.uploads.first().is_some_and(|(e, _)| *e < k) {
            let (_, upload) = self.uploads.remove(0);
            let wps: Vec<MissionWaypoint> = upload
                .waypoints
                .iter()
                .map(|w| {
                    let (lat, lon) = self.cfg.origin.to_geo(w.x, w.y);
                    MissionWaypoint {
                        hour: w.hour_index as u16,
                        lat,
                        lon,
                    }
                })
                .collect();
            let now = self.timestamp(t0);
            match self
                .station
                .post_mission(&self.cfg.vehicle_id, &wps, now, self.cfg.sat.downlink_mtu)
            {
                Ok(version) => {
                    self.link_row(t0, "station", "downlink", "posted", "command", Some(version), 0, None, 0.0, "queued");
                    self.log(
                        k,
                        LogRecord::Event {
                            t: t0,
                            name: format!("mission_posted v{version}"),
                        },
                    )?;
                }
                Err(e) => {
                    let detail = e.to_string();
                    self.link_row(t0, "station", "downlink", "rejected", "command", None, 0, None, 0.0, &detail);
                    self.log(
                        k,
                        LogRecord::Event {
                            t: t0,
                            name: "mission_upload_rejected".into(),
                        },
                    )?;
                }
            }
        }
        Ok(())
    }

    fn sample_sensors(&mut self, k: u64, t: f64) -> Result<(), HarnessError> {
        let (x, y) = (self.state.x, self.state.y);
        let depth = self.cfg.sensors.mount.sample_depth(self.state.glider_depth);
        for i in 0..self.probes.len() {
            let p = &mut self.probes[i];
            let truth = p.field.value(x, y, t);
            let (st, value) = sample(&p.spec, p.state, truth, t, &mut self.rng).map_err(|e| HarnessError::NonFinite {
                step: k,
                module: "environment_sensors",
                detail: e.to_string(),
            })?;
            if !value.is_finite() {
                return Err(HarnessError::NonFinite {
                    step: k,
                    module: "environment_sensors",
                    detail: p.spec.kind.name().into(),
                });
            }
            p.state = st;
            p.reading = value;
            let kind = p.spec.kind;
            self.log(
                k,
                LogRecord::Sample {
                    t,
                    kind,
                    value,
                    x,
                    y,
                    depth,
                },
            )?;
        }
        Ok(())
    }

    fn reading(&self, kind: SensorKind) -> f64 {
        self.probes[kind as usize].reading
    }

    fn send_uplink(&mut self, k: u64, t: f64, msg_type: &str, seq: u16, bytes: &[u8]) -> Result<(), HarnessError> {
        self.tx_backlog += self.cfg.comms_power.tx_duration;
        match self.sat.transmit(Direction::Uplink, bytes, t) {
            Ok(d) => self.link_row(t, "sat", "uplink", "sent", msg_type, Some(seq), bytes.len(), Some(d.deliver_at), d.cost, ""),
            Err(e) => self.link_row(t, "sat", "uplink", "rejected", msg_type, Some(seq), bytes.len(), None, 0.0, &e.to_string()),
        }
        self.log(
            k,
            LogRecord::Frame {
                t,
                direction: "uplink".into(),
                msg_type: msg_type.into(),
                seq,
                bytes: hex::encode(bytes),
            },
        )
    }

    fn send_telemetry(&mut self, k: u64, t: f64) -> Result<(), HarnessError> {
        let (lat, lon) = self.cfg.origin.to_geo(self.state.x, self.state.y);
        let values = TelemetryValues {
            timestamp: self.timestamp(t),
            lat,
            lon,
            heading_deg: compass_degrees(self.state.heading),
            speed: self.state.surge_speed.max(0.0),
            soc: self.bank.soc,
            temperature: self.reading(SensorKind::Temperature),
            conductivity: self.reading(SensorKind::Conductivity),
            dissolved_oxygen: self.reading(SensorKind::DissolvedOxygen),
            ph: self.reading(SensorKind::Ph),
            flags: Flags {
                capsized: self.state.capsized,
                thruster_on: self.state.thruster_on,
                on_backup: self.last_tick.on_backup,
                load_shed: self.last_tick.load_shed,
            },
        };
        let frame = self.uplink.frame(&values);
        let bytes = encode_telemetry(&frame);
        self.send_uplink(k, t, "telemetry", frame.seq, &bytes)?;

        if self.cfg.rf.enabled {
            let rf = &self.cfg.rf;
            match rf_transmit(
                &bytes,
                &rf.vehicle_key,
                &rf.link,
                (self.state.x, self.state.y),
                (rf.station[0], rf.station[1]),
            ) {
                RfOutcome::Delivered(payload) => {
                    let outcome = self.station_ingest(k, &payload, t)?;
                    self.link_row(t, "rf", "uplink", "delivered", "telemetry", Some(frame.seq), bytes.len(), Some(t), 0.0, outcome);
                }
                RfOutcome::Dropped(reason) => {
                    self.link_row(t, "rf", "uplink", "dropped", "telemetry", Some(frame.seq), bytes.len(), None, 0.0, reason.name());
                }
            }
        }
        Ok(())
    }

    fn station_ingest(&mut self, k: u64, bytes: &[u8], t: f64) -> Result<&'static str, HarnessError> {
        match self.station.ingest_bytes(&self.cfg.vehicle_id, bytes, t) {
            Ok(IngestOutcome::Inserted) => Ok("inserted"),
            Ok(IngestOutcome::Duplicate) => Ok("duplicate"),
            Err(e) => Err(HarnessError::Module {
                step: k,
                module: "ground_station",
                detail: e.to_string(),
            }),
        }
    }

    fn vehicle_receive(&mut self, k: u64, t: f64) -> Result<(), HarnessError> {
        for f in self.sat.poll(Direction::Downlink, t) {
            let (seq, detail, status) = match decode(&f.bytes) {
                Ok(Frame::Command(cmd)) => {
                    let (detail, status) = self.apply_command(k, t, &cmd)?;
                    (Some(cmd.seq), detail, Some((cmd.seq, status)))
                }
                Ok(other) => (Some(other.seq()), "unexpected frame type", None),
                Err(_) => (None, "undecodable", None),
            };
            self.link_row(t, "sat", "downlink", "delivered", "command", seq, f.bytes.len(), Some(f.deliver_at), 0.0, detail);
            self.log(
                k,
                LogRecord::Frame {
                    t,
                    direction: "downlink".into(),
                    msg_type: "command".into(),
                    seq: seq.unwrap_or(0),
                    bytes: hex::encode(&f.bytes),
                },
            )?;
            if let Some((seq, status)) = status {
                let ack = AckFrame {
                    seq,
                    timestamp: self.timestamp(t),
                    status,
                };
                self.send_uplink(k, t, "ack", seq, &encode_ack(&ack))?;
            }
        }
        Ok(())
    }

    fn apply_command(&mut self, k: u64, t: f64, cmd: &CommandFrame) -> Result<(&'static str, AckStatus), HarnessError> {
        if cmd.seq < self.tracker.version() {
            return Ok(("rejected_stale", AckStatus::Rejected));
        }
        let wps: Vec<Waypoint> = cmd
            .entries()
            .iter()
            .map(|e| {
                let (lat, lon) = e.degrees();
                let (x, y) = self.cfg.origin.to_local(lat, lon);
                Waypoint {
                    hour_index: e.hour_index as u32,
                    x,
                    y,
                }
            })
            .collect();
        let n = wps.len();
        if self.tracker.replace(wps, cmd.seq).is_err() {
            return Ok(("rejected_unsorted", AckStatus::Rejected));
        }
        self.log(
            k,
            LogRecord::Mission {
                t,
                version: cmd.seq,
                waypoints: n,
            },
        )?;
        Ok(("applied", AckStatus::Applied))
    }

    fn station_side(&mut self, k: u64, t: f64) -> Result<(), HarnessError> {
        let sent = self
            .station
            .relay_step(t, &mut self.sat)
            .map_err(|e| HarnessError::Module {
                step: k,
                module: "ground_station",
                detail: e.to_string(),
            })?;
        for (vehicle, version) in sent {
            let entry = self
                .station
                .outbox(&vehicle)
                .ok()
                .and_then(|o| o.iter().find(|e| e.version == version))
                .map(|e| (e.deliver_at, e.frame.len() / 2));
            let (deliver_at, len) = entry.unwrap_or((None, 0));
            let cost = self.sat.spec().per_message_cost;
            self.link_row(t, "sat", "downlink", "sent", "command", Some(version), len, deliver_at, cost, "");
        }
        for f in self.sat.poll(Direction::Uplink, t) {
            let (msg_type, seq) = match decode(&f.bytes) {
                Ok(Frame::Telemetry(tf)) => ("telemetry", Some(tf.seq)),
                Ok(Frame::Ack(a)) => ("ack", Some(a.seq)),
                Ok(other) => ("command", Some(other.seq())),
                Err(_) => ("unknown", None),
            };
            let outcome = self.station_ingest(k, &f.bytes, t)?;
            self.link_row(t, "sat", "uplink", "delivered", msg_type, seq, f.bytes.len(), Some(f.deliver_at), 0.0, outcome);
        }
        Ok(())
    }

    fn power(&mut self, k: u64, t: f64, vtick: PowerTick) -> Result<(), HarnessError> {
        let cfg = self.cfg;
        let defect = |detail: String| HarnessError::Module {
            step: k,
            module: "power_plant",
            detail,
        };
        let t0 = t - cfg.dt;
        let irradiance = cfg.irradiance.at(t0);
        let solar_w = solar_power(irradiance, &cfg.solar).map_err(|e| defect(e.to_string()))?;
        let mut loads = vtick.load;
        let on_air = self.tx_backlog.min(cfg.dt);
        self.tx_backlog -= on_air;
        loads.comms = cfg.comms_power.standby + cfg.comms_power.tx_power * on_air / cfg.dt;
        let (bank, tick) = mppt_step(solar_w, loads, self.bank, &cfg.mppt, t, cfg.dt).map_err(|e| defect(e.to_string()))?;
        if !(bank.soc.is_finite() && bank.backup_soc.is_finite() && tick.battery_delta_wh.is_finite()) {
            return Err(HarnessError::NonFinite {
                step: k,
                module: "power_plant",
                detail: "battery state".into(),
            });
        }
        self.bank = bank;
        self.last_tick = tick;
        self.acc.add(&tick, cfg.mppt.conversion_efficiency);
        Ok(())
    }

    fn record(&mut self, k: u64, t: f64) -> Result<(), HarnessError> {
        if self.nav.heave_accel_window.len() >= self.cfg.sea_state_window {
            let window = self.nav.heave_accel_window.to_vec();
            self.sea_state = estimate_sea_state(&window, self.cfg.sea_state_interval).ok();
        }
        let s = &self.state;
        let (lat, lon) = self.cfg.origin.to_geo(s.x, s.y);
        let g = self.guidance.expect("guidance runs before the first record");
        let (mode, target_index) = match g.target {
            Target::Waypoint { index, .. } => ("waypoint", index.to_string()),
            Target::StationKeeping { .. } => ("station_keeping", String::new()),
        };
        let arrived = self.tracker.arrived().iter().filter(|a| **a).count();
        let foil_pitch = s.foil_pitch.first().map_or(0.0, |p| p.angle.to_degrees());
        let row = [
            fmt_t(t),
            num(s.x),
            num(s.y),
            num(lat),
            num(lon),
            num(s.heading.to_degrees()),
            num(s.yaw_rate),
            num(s.surge_speed),
            num(s.heave),
            num(s.heave_rate),
            num(s.glider_heave_rate),
            num(s.glider_depth),
            num(s.tether_tension),
            bit(s.tether == TetherState::Taut).into(),
            num(s.rudder_angle.to_degrees()),
            num(g.desired_heading.to_degrees()),
            num(g.heading_error.to_degrees()),
            num(foil_pitch),
            num(s.foil_thrust),
            num(s.roll.to_degrees()),
            bit(s.capsized).into(),
            mode.into(),
            target_index,
            arrived.to_string(),
            self.tracker.version().to_string(),
            self.sea_state.map(num).unwrap_or_default(),
            num(self.bank.soc),
            num(self.reading(SensorKind::Conductivity)),
            num(self.reading(SensorKind::Temperature)),
            num(self.reading(SensorKind::DissolvedOxygen)),
            num(self.reading(SensorKind::Ph)),
        ];
        if let Some(cell) = row.iter().find(|c| c.contains("NaN") || c.contains("inf")) {
            return Err(HarnessError::NonFinite {
                step: k,
                module: "sim_harness",
                detail: format!("state cell `{cell}`"),
            });
        }
        self.state_w.write_record(&row).expect("writing to memory");

        let a = std::mem::take(&mut self.acc);
        let tick = &self.last_tick;
        self.energy_w
            .write_record([
                fmt_t(t),
                num(a.interval),
                num(a.solar_available),
                num(a.solar_in),
                num(a.solar_bus),
                num(a.load.servo),
                num(a.load.thruster),
                num(a.load.winch),
                num(a.load.electronics),
                num(a.load.comms),
                num(a.load_wh),
                num(a.delta),
                num(a.loss),
                num(tick.soc_after),
                num(tick.backup_soc_after),
                bit(tick.on_backup).into(),
                a.shed.to_string(),
            ])
            .expect("writing to memory");

        let record = LogRecord::State {
            t,
            x: s.x,
            y: s.y,
            heading: s.heading,
            surge_speed: s.surge_speed,
            heave: s.heave,
            rudder: s.rudder_angle,
            tension: s.tether_tension,
            soc: self.bank.soc,
            sea_state: self.sea_state,
            capsized: s.capsized,
        };
        self.log(k, record)
    }

    fn finish(self) -> Result<RunArtifacts, HarnessError> {
        let state_csv = report::finish(self.state_w);
        let energy_csv = report::finish(self.energy_w);
        let links_csv = report::finish(self.links_w);
        let summary = summarize(&state_csv, &energy_csv, &links_csv)?;
        let mut logbook = self.logbook.lines().join("\n");
        if !logbook.is_empty() {
            logbook.push('\n');
        }
        Ok(RunArtifacts {
            state_csv,
            energy_csv,
            links_csv,
            logbook,
            summary,
            station_export: self.station.export(),
        })
    }
}
