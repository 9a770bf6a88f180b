//! Scenario files: flat `key = value` lines with `#` comments.
//!
//! Absent keys take their defaults, unknown keys are rejected and every
//! violated invariant is reported in one pass.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::rf::{RfLinkSpec, KEY_LEN};
use crate::comms::sat::{Availability, SatLinkSpec};
use crate::comms::codec::MAX_COMMAND_ENTRIES;
use crate::foil::MAX_PITCH_DT;
use crate::geo::GeoOrigin;
use crate::guidance::{AutopilotSpec, Waypoint, MIN_SEA_STATE_SAMPLES};
use crate::power::{BatterySpec, MpptSpec, PowerError, SolarArraySpec};
use crate::sensors::{EnvFieldSpec, SensorKind, SensorMount};
use crate::vehicle::VehicleSpec;
use crate::wave::{WaveComponent, WaveSpec};

/// One problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

fn list(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("\n  {i}")).collect()
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario does not parse:{}", list(.0))]
    Parse(Vec<Issue>),
    #[error("scenario is invalid:{}", list(.0))]
    Invalid(Vec<Issue>),
}

impl ScenarioError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ScenarioError::Io { .. } => &[],
            ScenarioError::Parse(v) | ScenarioError::Invalid(v) => v,
        }
    }
}

/// Fraction of full sun over a repeating day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrradianceProfile {
    pub peak: f64,
    /// Hours after midnight.
    pub sunrise: f64,
    pub day_length: f64,
    /// Clock hour at simulation time zero.
    pub start_hour: f64,
}

impl Default for IrradianceProfile {
    fn default() -> Self {
        Self {
            peak: 0.8,
            sunrise: 6.0,
            day_length: 12.0,
            start_hour: 10.0,
        }
    }
}

impl IrradianceProfile {
    pub fn at(&self, t: f64) -> f64 {
        let hour = (self.start_hour + t / 3600.0).rem_euclid(24.0);
        let since = hour - self.sunrise;
        if since <= 0.0 || since >= self.day_length {
            return 0.0;
        }
        (self.peak * (PI * since / self.day_length).sin()).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub mount: SensorMount,
    pub noise: bool,
    pub sample_interval: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            mount: SensorMount::Float,
            noise: true,
            sample_interval: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommsPower {
    /// Continuous modem draw, W.
    pub standby: f64,
    /// Extra modem draw while a satellite message is on air, W.
    pub tx_power: f64,
    /// Air time per satellite message, s.
    pub tx_duration: f64,
}

impl Default for CommsPower {
    fn default() -> Self {
        Self {
            standby: 0.3,
            tx_power: 1.5,
            tx_duration: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfConfig {
    pub enabled: bool,
    pub link: RfLinkSpec,
    /// Key the vehicle signs with.
    pub vehicle_key: [u8; KEY_LEN],
    pub station: [f64; 2],
}

impl Default for RfConfig {
    fn default() -> Self {
        let link = RfLinkSpec::default();
        Self {
            enabled: false,
            vehicle_key: link.key,
            link,
            station: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionUpload {
    pub t: f64,
    pub waypoints: Vec<Waypoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Events {
    pub capsize_at: Vec<f64>,
    pub link_outages: Vec<(f64, f64)>,
    pub mission_uploads: Vec<MissionUpload>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Captive tow speed; zero tows at the peak heave rate.
    pub tow_speed: f64,
    pub settle: f64,
    pub window: f64,
    pub dt: f64,
    /// Free-running simulation per sweep value.
    pub run_duration: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tow_speed: 0.0,
            settle: 20.0,
            window: 40.0,
            dt: 0.005,
            run_duration: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub record_interval: f64,
    /// Unix seconds at simulation time zero.
    pub start_time: u32,
    pub vehicle_id: String,
    pub origin: GeoOrigin,
    /// Planar heading, radians counter-clockwise from east.
    pub initial_heading: f64,
    pub initial_soc: f64,
    pub wave: WaveSpec,
    pub irradiance: IrradianceProfile,
    /// Indexed in [`SensorKind::ALL`] order.
    pub env: [EnvFieldSpec; 4],
    pub sensors: SensorConfig,
    pub vehicle: VehicleSpec,
    pub thruster_level: f64,
    pub solar: SolarArraySpec,
    pub battery: BatterySpec,
    pub mppt: MpptSpec,
    pub comms_power: CommsPower,
    pub autopilot: AutopilotSpec,
    pub sea_state_interval: f64,
    pub sea_state_window: usize,
    pub uplink_cadence: f64,
    pub sat: SatLinkSpec,
    pub rf: RfConfig,
    pub mission: Vec<Waypoint>,
    pub events: Events,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration: 3600.0,
            dt: 0.02,
            record_interval: 1.0,
            start_time: 1_700_000_000,
            vehicle_id: "usv-1".into(),
            origin: GeoOrigin::default(),
            initial_heading: 0.0,
            initial_soc: 0.8,
            wave: WaveSpec::default(),
            irradiance: IrradianceProfile::default(),
            env: SensorKind::ALL.map(EnvFieldSpec::default_for),
            sensors: SensorConfig::default(),
            vehicle: VehicleSpec::with_defaults(),
            thruster_level: 0.0,
            solar: SolarArraySpec::default(),
            battery: BatterySpec::default(),
            mppt: MpptSpec::default(),
            comms_power: CommsPower::default(),
            autopilot: AutopilotSpec::default(),
            sea_state_interval: 0.1,
            sea_state_window: 600,
            uplink_cadence: 600.0,
            sat: SatLinkSpec::default(),
            rf: RfConfig::default(),
            mission: Vec::new(),
            events: Events::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn env_for(&self, kind: SensorKind) -> &EnvFieldSpec {
        &self.env[kind as usize]
    }

    /// Whole steps in the run.
    pub fn step_count(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    /// Whole steps in `interval`, when it is a positive multiple of `dt`.
    pub fn steps_in(&self, interval: f64) -> Option<u64> {
        whole_steps(interval, self.dt)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        apply(self, key, value.trim())
    }

    /// Every violated invariant.
    pub fn issues(&self) -> Vec<Issue> {
        validate(self)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }
}

fn whole_steps(interval: f64, dt: f64) -> Option<u64> {
    if !(interval > 0.0 && dt > 0.0 && interval.is_finite()) {
        return None;
    }
    let n = (interval / dt).round();
    (n >= 1.0 && (n * dt - interval).abs() <= 1e-9 * interval.max(1.0)).then_some(n as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetError {
    UnknownKey,
    BadValue(String),
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

/// Parses scenario text on top of the defaults and validates the result.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::default();
    let mut issues = Vec::new();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issues.push(Issue {
                line: Some(n),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim();
        let value = unquote(value.trim());
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            issues.push(Issue {
                line: Some(n),
                key: key.to_string(),
                message: format!("already set on line {first}"),
            });
            continue;
        }
        seen.push((key.to_string(), n));
        match cfg.set(key, value) {
            Ok(()) => {}
            Err(SetError::UnknownKey) => issues.push(Issue {
                line: Some(n),
                key: key.to_string(),
                message: "unknown key".into(),
            }),
            Err(SetError::BadValue(m)) => issues.push(Issue {
                line: Some(n),
                key: key.to_string(),
                message: m,
            }),
        }
    }
    if !issues.is_empty() {
        return Err(ScenarioError::Parse(issues));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn num(v: &str) -> Result<f64, SetError> {
    v.parse::<f64>()
        .map_err(|_| SetError::BadValue(format!("`{v}` is not a number")))
}

fn int<T: std::str::FromStr>(v: &str) -> Result<T, SetError> {
    v.parse::<T>()
        .map_err(|_| SetError::BadValue(format!("`{v}` is not a non-negative integer in range")))
}

fn flag(v: &str) -> Result<bool, SetError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(SetError::BadValue(format!("`{v}` is not a boolean"))),
    }
}

fn deg(v: &str) -> Result<f64, SetError> {
    num(v).map(f64::to_radians)
}

fn key16(v: &str) -> Result<[u8; KEY_LEN], SetError> {
    let bytes = hex::decode(v).map_err(|_| SetError::BadValue("key must be hex".into()))?;
    bytes
        .try_into()
        .map_err(|_| SetError::BadValue(format!("key must be {KEY_LEN} bytes ({} hex digits)", 2 * KEY_LEN)))
}

fn fields(item: &str, n: usize, what: &str) -> Result<Vec<f64>, SetError> {
    let parts: Vec<&str> = item.split(':').map(str::trim).collect();
    if parts.len() != n {
        return Err(SetError::BadValue(format!("`{item}` is not `{what}`")));
    }
    parts.into_iter().map(num).collect()
}

fn items(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `hour:x:y, hour:x:y, ...` in local metres.
pub fn parse_waypoints(v: &str) -> Result<Vec<Waypoint>, SetError> {
    items(v)
        .map(|item| {
            let f = fields(item, 3, "hour:x:y")?;
            if !(f[0] >= 0.0 && f[0].fract() == 0.0 && f[0] <= u16::MAX as f64) {
                return Err(SetError::BadValue(format!("hour `{}` must be a whole number", f[0])));
            }
            Ok(Waypoint {
                hour_index: f[0] as u32,
                x: f[1],
                y: f[2],
            })
        })
        .collect()
}

fn intervals(v: &str) -> Result<Vec<(f64, f64)>, SetError> {
    items(v)
        .map(|item| fields(item, 2, "start:end").map(|f| (f[0], f[1])))
        .collect()
}

fn env_field(spec: &mut EnvFieldSpec, field: &str, v: &str) -> Result<(), SetError> {
    match field {
        "base" => spec.base = num(v)?,
        "gradient_x" => spec.gradient[0] = num(v)?,
        "gradient_y" => spec.gradient[1] = num(v)?,
        "diurnal_amplitude" => spec.diurnal_amplitude = num(v)?,
        "diurnal_period" => spec.diurnal_period = num(v)?,
        "noise" => spec.noise_amplitude = num(v)?,
        "seed" => spec.noise_seed = int(v)?,
        _ => return Err(SetError::UnknownKey),
    }
    Ok(())
}

fn window(cfg: &mut ScenarioConfig) -> (&mut f64, &mut f64, &mut f64) {
    if cfg.sat.availability == Availability::Always {
        cfg.sat.availability = Availability::Periodic {
            period: 0.0,
            open: 0.0,
            offset: 0.0,
        };
    }
    match &mut cfg.sat.availability {
        Availability::Periodic { period, open, offset } => (period, open, offset),
        Availability::Always => unreachable!(),
    }
}

fn apply(cfg: &mut ScenarioConfig, key: &str, v: &str) -> Result<(), SetError> {
    let veh = &mut cfg.vehicle;
    let unit = &mut veh.glider.foil;
    match key {
        "seed" => cfg.seed = int(v)?,
        "duration" => cfg.duration = num(v)?,
        "dt" => cfg.dt = num(v)?,
        "record_interval" => cfg.record_interval = num(v)?,
        "start_time" => cfg.start_time = int(v)?,
        "vehicle_id" => cfg.vehicle_id = v.to_string(),
        "origin.lat" => cfg.origin.lat = num(v)?,
        "origin.lon" => cfg.origin.lon = num(v)?,
        "initial.heading" => cfg.initial_heading = deg(v)?,
        "initial.soc" => cfg.initial_soc = num(v)?,

        "wave.amplitude" => first_wave(cfg).amplitude = num(v)?,
        "wave.period" => first_wave(cfg).period = num(v)?,
        "wave.phase" => first_wave(cfg).phase = deg(v)?,
        "wave.height" => first_wave(cfg).amplitude = num(v)? / 2.0,
        "wave.components" => {
            cfg.wave.components = items(v)
                .map(|item| {
                    fields(item, 3, "amplitude:period:phase_deg").map(|f| WaveComponent {
                        amplitude: f[0],
                        period: f[1],
                        phase: f[2].to_radians(),
                    })
                })
                .collect::<Result<_, _>>()?
        }

        "irradiance.peak" => cfg.irradiance.peak = num(v)?,
        "irradiance.sunrise" => cfg.irradiance.sunrise = num(v)?,
        "irradiance.day_length" => cfg.irradiance.day_length = num(v)?,
        "irradiance.start_hour" => cfg.irradiance.start_hour = num(v)?,

        "sensors.mount" => {
            cfg.sensors.mount = match v {
                "float" => SensorMount::Float,
                "glider" => SensorMount::Glider,
                _ => return Err(SetError::BadValue("mount is `float` or `glider`".into())),
            }
        }
        "sensors.noise" => cfg.sensors.noise = flag(v)?,
        "sensors.sample_interval" => cfg.sensors.sample_interval = num(v)?,

        "float.hull_length" => veh.float.hull_length = num(v)?,
        "float.hull_separation" => veh.float.hull_separation = num(v)?,
        "float.mass" => veh.float.mass = num(v)?,
        "float.max_payload" => veh.float.max_payload = num(v)?,
        "float.net_buoyancy" => veh.float.net_buoyancy = num(v)?,
        "float.surge_drag_area" => veh.float.surge_drag_area = num(v)?,
        "float.surge_drag_coeff" => veh.float.surge_drag_coeff = num(v)?,
        "glider.length" => veh.glider.frame_dims[0] = num(v)?,
        "glider.width" => veh.glider.frame_dims[1] = num(v)?,
        "glider.thickness" => veh.glider.frame_dims[2] = num(v)?,
        "glider.mass" => veh.glider.mass = num(v)?,
        "glider.net_buoyancy" => veh.glider.net_buoyancy = num(v)?,
        "glider.vertical_drag_area" => veh.glider.vertical_drag_area = num(v)?,
        "glider.vertical_drag_coeff" => veh.glider.vertical_drag_coeff = num(v)?,

        "foil.chord" => unit.foil.chord = num(v)?,
        "foil.span" => unit.foil.span = num(v)?,
        "foil.zero_lift_drag_coeff" => unit.foil.zero_lift_drag_coeff = num(v)?,
        "foil.stall_angle" => unit.foil.stall_angle = deg(v)?,
        "foil.oswald_efficiency" => unit.foil.oswald_efficiency = num(v)?,
        "foil.post_stall_lift_fraction" => unit.foil.post_stall_lift_fraction = num(v)?,
        "foil.flat_plate_drag_coeff" => unit.foil.flat_plate_drag_coeff = num(v)?,
        "spring.rate" => unit.spring.rate = num(v)?,
        "spring.neutral_angle" => unit.spring.neutral_angle = deg(v)?,
        "spring.lever_arm" => unit.spring.lever_arm = num(v)?,
        "spring.damping" => unit.spring.damping = num(v)?,
        "hinge.inertia" => unit.hinge.inertia = num(v)?,
        "hinge.pivot_arm" => unit.hinge.pivot_arm = num(v)?,
        "hinge.limit_angle" => unit.hinge.limit_angle = deg(v)?,
        "hinge.relief_stop" => unit.hinge.relief_stop = deg(v)?,
        "hinge.relief_moment" => unit.hinge.relief_moment = num(v)?,
        "array.count" => veh.glider.array.count = int(v)?,
        // millimetres, like the sweep
        "array.spacing" => veh.glider.array.spacing = num(v)? / 1000.0,
        "array.reference_spacing" => veh.glider.array.reference_spacing = num(v)? / 1000.0,
        "array.interference_gain" => veh.glider.array.interference_gain = num(v)?,
        "array.spacing_exponent" => veh.glider.array.spacing_exponent = num(v)?,

        "tether.length" => veh.tether.length = num(v)?,
        "rudder.height" => veh.rudder.height = num(v)?,
        "rudder.chord" => veh.rudder.chord = num(v)?,
        "rudder.max_angle" => veh.rudder.max_angle = deg(v)?,
        "rudder.servo_rate" => veh.rudder.servo_rate = deg(v)?,
        "yaw.gain" => veh.yaw.gain = num(v)?,
        "yaw.time_constant" => veh.yaw.time_constant = num(v)?,
        "yaw.reference_speed" => veh.yaw.reference_speed = num(v)?,
        "thruster.level" => cfg.thruster_level = num(v)?,
        "thruster.max_force" => veh.thruster.max_force = num(v)?,
        "thruster.max_power" => veh.thruster.max_power = num(v)?,
        "winch.rated_power" => veh.winch.rated_power = num(v)?,
        "winch.rated_pull" => veh.winch.rated_pull = num(v)?,
        "winch.line_speed" => veh.winch.line_speed = num(v)?,
        "winch.efficiency" => veh.winch.efficiency = num(v)?,
        "electrical.electronics" => veh.electrical.electronics = num(v)?,
        "electrical.servo_hold" => veh.electrical.servo_hold = num(v)?,
        "electrical.servo_slew" => veh.electrical.servo_slew = num(v)?,
        "water.density" => veh.water_density = num(v)?,
        "current.east" => veh.current[0] = num(v)?,
        "current.north" => veh.current[1] = num(v)?,

        "solar.panel_count" => cfg.solar.panel_count = int(v)?,
        "solar.panel_open_voltage" => cfg.solar.panel_open_voltage = num(v)?,
        "solar.panel_peak_power" => cfg.solar.panel_peak_power = num(v)?,
        "solar.diode_drop" => cfg.solar.diode_drop = num(v)?,
        "battery.pack_count" => cfg.battery.pack_count = int(v)?,
        "battery.total_capacity" => cfg.battery.total_capacity = num(v)?,
        "battery.nominal_voltage" => cfg.battery.nominal_voltage = num(v)?,
        "battery.charge_efficiency" => cfg.battery.charge_efficiency = num(v)?,
        "battery.recharge_backup" => cfg.battery.recharge_backup = flag(v)?,
        "mppt.efficiency" => cfg.mppt.conversion_efficiency = num(v)?,
        "mppt.load_current_limit" => cfg.mppt.load_current_limit = num(v)?,
        "comms.standby_power" => cfg.comms_power.standby = num(v)?,
        "comms.tx_power" => cfg.comms_power.tx_power = num(v)?,
        "comms.tx_duration" => cfg.comms_power.tx_duration = num(v)?,

        "guidance.kp" => cfg.autopilot.gains.kp = num(v)?,
        "guidance.kd" => cfg.autopilot.gains.kd = num(v)?,
        "guidance.max_rudder" => cfg.autopilot.gains.max_rudder = deg(v)?,
        "guidance.arrival_radius" => cfg.autopilot.arrival_radius = num(v)?,
        "guidance.capsize_threshold" => cfg.autopilot.capsize_threshold = deg(v)?,
        "guidance.sea_state_interval" => cfg.sea_state_interval = num(v)?,
        "guidance.sea_state_window" => cfg.sea_state_window = int(v)?,

        "uplink.cadence" => cfg.uplink_cadence = num(v)?,
        "sat.uplink_mtu" => cfg.sat.uplink_mtu = int(v)?,
        "sat.downlink_mtu" => cfg.sat.downlink_mtu = int(v)?,
        "sat.latency" => cfg.sat.latency = num(v)?,
        "sat.cost" => cfg.sat.per_message_cost = num(v)?,
        "sat.window_period" => *window(cfg).0 = num(v)?,
        "sat.window_open" => *window(cfg).1 = num(v)?,
        "sat.window_offset" => *window(cfg).2 = num(v)?,

        "rf.enabled" => cfg.rf.enabled = flag(v)?,
        "rf.max_range" => cfg.rf.link.max_range = num(v)?,
        "rf.key" => cfg.rf.link.key = key16(v)?,
        "rf.vehicle_key" => cfg.rf.vehicle_key = key16(v)?,
        "rf.station_x" => cfg.rf.station[0] = num(v)?,
        "rf.station_y" => cfg.rf.station[1] = num(v)?,

        "mission.waypoints" => cfg.mission = parse_waypoints(v)?,
        "events.capsize_at" => cfg.events.capsize_at = items(v).map(num).collect::<Result<_, _>>()?,
        "events.link_outage" => cfg.events.link_outages = intervals(v)?,

        "sweep.tow_speed" => cfg.sweep.tow_speed = num(v)?,
        "sweep.settle" => cfg.sweep.settle = num(v)?,
        "sweep.window" => cfg.sweep.window = num(v)?,
        "sweep.dt" => cfg.sweep.dt = num(v)?,
        "sweep.run_duration" => cfg.sweep.run_duration = num(v)?,

        _ => {
            if let Some(rest) = key.strip_prefix("env.") {
                let (kind, field) = rest.split_once('.').ok_or(SetError::UnknownKey)?;
                let kind = SensorKind::from_name(kind).ok_or(SetError::UnknownKey)?;
                return env_field(&mut cfg.env[kind as usize], field, v);
            }
            if let Some(tag) = key.strip_prefix("events.mission_upload.") {
                if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(SetError::UnknownKey);
                }
                let (t, wps) = v
                    .split_once(';')
                    .ok_or_else(|| SetError::BadValue("expected `t ; hour:x:y, ...`".into()))?;
                cfg.events.mission_uploads.push(MissionUpload {
                    t: num(t.trim())?,
                    waypoints: parse_waypoints(wps)?,
                });
                cfg.events.mission_uploads.sort_by(|a, b| a.t.total_cmp(&b.t));
                return Ok(());
            }
            return Err(SetError::UnknownKey);
        }
    }
    Ok(())
}

fn first_wave(cfg: &mut ScenarioConfig) -> &mut WaveComponent {
    if cfg.wave.components.is_empty() {
        cfg.wave.components.push(WaveComponent {
            amplitude: 0.0,
            period: 4.0,
            phase: 0.0,
        });
    }
    &mut cfg.wave.components[0]
}

fn config_key(e: &PowerError, fallback: &str) -> (String, String) {
    let msg = e.to_string();
    let body = msg.strip_prefix("invalid power configuration: ").unwrap_or(&msg);
    match body.split_once(' ') {
        Some((k, rest)) if k.contains('.') => (k.to_string(), rest.to_string()),
        _ => (fallback.to_string(), body.to_string()),
    }
}

fn validate(cfg: &ScenarioConfig) -> Vec<Issue> {
    let mut out = Vec::new();
    let mut bad = |key: &str, message: String| {
        out.push(Issue {
            line: None,
            key: key.to_string(),
            message,
        })
    };
    let finite = |v: f64| v.is_finite();

    if !(cfg.dt > 0.0 && cfg.dt <= MAX_PITCH_DT) {
        bad("dt", format!("must lie in (0, {MAX_PITCH_DT}] s, got {}", cfg.dt));
    }
    let dt_ok = cfg.dt > 0.0 && cfg.dt <= MAX_PITCH_DT;
    if !(cfg.duration >= 0.0 && finite(cfg.duration)) {
        bad("duration", format!("must be >= 0, got {}", cfg.duration));
    } else if dt_ok && cfg.duration > 0.0 && whole_steps(cfg.duration, cfg.dt).is_none() {
        bad("duration", format!("{} s is not a whole number of {} s steps", cfg.duration, cfg.dt));
    }
    if dt_ok {
        for (key, interval) in [
            ("record_interval", cfg.record_interval),
            ("sensors.sample_interval", cfg.sensors.sample_interval),
            ("guidance.sea_state_interval", cfg.sea_state_interval),
            ("uplink.cadence", cfg.uplink_cadence),
        ] {
            if whole_steps(interval, cfg.dt).is_none() {
                bad(key, format!("{interval} s is not a positive whole number of {} s steps", cfg.dt));
            }
        }
    }
    if cfg.vehicle_id.is_empty()
        || cfg.vehicle_id.len() > 64
        || !cfg.vehicle_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        bad("vehicle_id", "must be 1-64 characters of [A-Za-z0-9_-]".into());
    }
    if !((-89.0..=89.0).contains(&cfg.origin.lat)) {
        bad("origin.lat", "must lie in [-89, 89] degrees".into());
    }
    if !((-180.0..=180.0).contains(&cfg.origin.lon)) {
        bad("origin.lon", "must lie in [-180, 180] degrees".into());
    }
    if !finite(cfg.initial_heading) {
        bad("initial.heading", "must be finite".into());
    }
    if !((0.0..=1.0).contains(&cfg.initial_soc)) {
        bad("initial.soc", "must lie in [0, 1]".into());
    }

    for c in &cfg.wave.components {
        if !(c.amplitude >= 0.0 && finite(c.amplitude)) {
            bad("wave.amplitude", format!("must be >= 0, got {}", c.amplitude));
        }
        if !(c.period > 0.0 && finite(c.period)) {
            bad("wave.period", format!("must be positive, got {}", c.period));
        }
        if !finite(c.phase) {
            bad("wave.phase", "must be finite".into());
        }
    }

    let irr = &cfg.irradiance;
    if !((0.0..=1.0).contains(&irr.peak)) {
        bad("irradiance.peak", "must lie in [0, 1]".into());
    }
    if !((0.0..24.0).contains(&irr.sunrise)) {
        bad("irradiance.sunrise", "must lie in [0, 24) hours".into());
    }
    if !(irr.day_length > 0.0 && irr.day_length <= 24.0) {
        bad("irradiance.day_length", "must lie in (0, 24] hours".into());
    }
    if !finite(irr.start_hour) {
        bad("irradiance.start_hour", "must be finite".into());
    }

    for kind in SensorKind::ALL {
        if let Err(e) = cfg.env_for(kind).validate() {
            bad(&format!("env.{}", kind.name()), e.to_string());
        }
    }

    for (key, msg) in cfg.vehicle.violations() {
        bad(&key, msg);
    }
    if !((0.0..=1.0).contains(&cfg.thruster_level)) {
        bad("thruster.level", "must lie in [0, 1]".into());
    }
    if let Err(e) = cfg.solar.validate() {
        let (k, m) = config_key(&e, "solar");
        bad(&k, m);
    }
    if let Err(e) = cfg.battery.validate() {
        let (k, m) = config_key(&e, "battery");
        bad(&k, m);
    }
    if let Err(e) = cfg.mppt.validate() {
        let (k, m) = config_key(&e, "mppt");
        bad(&k, m);
    }
    if !(cfg.comms_power.standby >= 0.0 && finite(cfg.comms_power.standby)) {
        bad("comms.standby_power", "must be >= 0".into());
    }
    if !(cfg.comms_power.tx_power >= 0.0 && finite(cfg.comms_power.tx_power)) {
        bad("comms.tx_power", "must be >= 0".into());
    }
    if !(cfg.comms_power.tx_duration >= 0.0 && finite(cfg.comms_power.tx_duration)) {
        bad("comms.tx_duration", "must be >= 0".into());
    }

    let ap = &cfg.autopilot;
    if !(ap.gains.kp >= 0.0 && finite(ap.gains.kp)) {
        bad("guidance.kp", "must be >= 0".into());
    }
    if !(ap.gains.kd >= 0.0 && finite(ap.gains.kd)) {
        bad("guidance.kd", "must be >= 0".into());
    }
    if !(ap.gains.max_rudder > 0.0 && ap.gains.max_rudder < PI / 2.0) {
        bad("guidance.max_rudder", "must lie in (0, 90) degrees".into());
    }
    if !(ap.arrival_radius > 0.0 && finite(ap.arrival_radius)) {
        bad("guidance.arrival_radius", "must be positive".into());
    }
    if !(ap.capsize_threshold > 0.0 && ap.capsize_threshold <= PI) {
        bad("guidance.capsize_threshold", "must lie in (0, 180] degrees".into());
    }
    if cfg.sea_state_window < MIN_SEA_STATE_SAMPLES {
        bad(
            "guidance.sea_state_window",
            format!("needs at least {MIN_SEA_STATE_SAMPLES} samples"),
        );
    }

    if let Err(e) = cfg.sat.validate() {
        bad("sat", e.to_string());
    }
    if !(cfg.rf.link.max_range >= 0.0 && finite(cfg.rf.link.max_range)) {
        bad("rf.max_range", "must be >= 0".into());
    }
    if !cfg.rf.station.iter().all(|v| finite(*v)) {
        bad("rf.station_x", "station position must be finite".into());
    }

    check_mission(&cfg.mission, "mission.waypoints", &mut bad);
    for &t in &cfg.events.capsize_at {
        if !(t >= 0.0 && finite(t)) {
            bad("events.capsize_at", format!("time {t} must be >= 0"));
        }
    }
    for &(a, b) in &cfg.events.link_outages {
        if !(finite(a) && finite(b) && a < b) {
            bad("events.link_outage", format!("[{a}, {b}) is empty or not finite"));
        }
    }
    for up in &cfg.events.mission_uploads {
        if !(up.t >= 0.0 && finite(up.t)) {
            bad("events.mission_upload", format!("time {} must be >= 0", up.t));
        }
        if up.waypoints.is_empty() {
            bad("events.mission_upload", "needs at least one waypoint".into());
        }
        if up.waypoints.len() > MAX_COMMAND_ENTRIES {
            bad(
                "events.mission_upload",
                format!("{} waypoints, at most {MAX_COMMAND_ENTRIES} fit a command", up.waypoints.len()),
            );
        }
        check_mission(&up.waypoints, "events.mission_upload", &mut bad);
    }

    let sw = &cfg.sweep;
    if !(sw.tow_speed >= 0.0 && finite(sw.tow_speed)) {
        bad("sweep.tow_speed", "must be >= 0".into());
    }
    if !(sw.settle >= 0.0 && finite(sw.settle)) {
        bad("sweep.settle", "must be >= 0".into());
    }
    if !(sw.window > 0.0 && finite(sw.window)) {
        bad("sweep.window", "must be positive".into());
    }
    if !(sw.dt > 0.0 && sw.dt <= MAX_PITCH_DT) {
        bad("sweep.dt", format!("must lie in (0, {MAX_PITCH_DT}]"));
    }
    if !(sw.run_duration >= 0.0 && finite(sw.run_duration)) {
        bad("sweep.run_duration", "must be >= 0".into());
    } else if dt_ok && sw.run_duration > 0.0 && whole_steps(sw.run_duration, cfg.dt).is_none() {
        bad("sweep.run_duration", "is not a whole number of steps".into());
    }
    out
}

fn check_mission(wps: &[Waypoint], key: &str, bad: &mut impl FnMut(&str, String)) {
    for (i, w) in wps.iter().enumerate() {
        if !(w.x.is_finite() && w.y.is_finite()) {
            bad(key, format!("waypoint {i} is not finite"));
        }
        if i > 0 && w.hour_index <= wps[i - 1].hour_index {
            bad(key, format!("waypoint {i}: hours must be strictly increasing"));
        }
    }
}
