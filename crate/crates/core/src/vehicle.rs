//! Coupled surface float and submerged glider.
//!
//! The float follows the sea surface. The glider hangs below it on the
//! tether and carries the foil array, the rudder and the thruster.
//! Planar axes are x east and y north; heading is measured
//! counter-clockwise from +x.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foil::{array_thrust, foil_thrust, FoilArraySpec, FoilError, FoilUnit, PitchState, MAX_PITCH_DT};
use crate::power::{Loads, PowerTick};
use crate::wave::WaveSpec;

const GRAVITY: f64 = 9.80665;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("time step {0} s outside (0, {MAX_PITCH_DT}] s")]
    TimeStep(f64),
    #[error("invalid vehicle configuration: {0}")]
    Config(String),
    #[error("thruster level {0} outside [0, 1]")]
    ThrusterLevel(f64),
    #[error("deployed tether {depth} m outside [0, {max}] m")]
    Depth { depth: f64, max: f64 },
    #[error("non-finite {0} in vehicle state")]
    NonFinite(&'static str),
    #[error(transparent)]
    Foil(#[from] FoilError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatSpec {
    pub hull_length: f64,
    pub hull_separation: f64,
    pub mass: f64,
    pub max_payload: f64,
    /// Newtons, positive up.
    pub net_buoyancy: f64,
    pub surge_drag_area: f64,
    pub surge_drag_coeff: f64,
}

impl Default for FloatSpec {
    fn default() -> Self {
        Self {
            hull_length: 1.2,
            hull_separation: 0.6,
            mass: 20.0,
            max_payload: 75.0,
            net_buoyancy: 400.0,
            surge_drag_area: 0.3,
            surge_drag_coeff: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GliderSpec {
    /// Length, width and thickness of the frame, m.
    pub frame_dims: [f64; 3],
    pub mass: f64,
    /// Newtons, negative (the glider sinks).
    pub net_buoyancy: f64,
    pub vertical_drag_area: f64,
    pub vertical_drag_coeff: f64,
    pub array: FoilArraySpec,
    pub foil: FoilUnit,
}

impl Default for GliderSpec {
    fn default() -> Self {
        Self {
            frame_dims: [0.950, 0.185, 0.020],
            mass: 9.0,
            net_buoyancy: -60.0,
            vertical_drag_area: 0.2,
            vertical_drag_coeff: 1.2,
            array: FoilArraySpec::default(),
            foil: FoilUnit::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TetherState {
    #[default]
    Taut,
    Slack,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetherSpec {
    pub length: f64,
}

impl Default for TetherSpec {
    fn default() -> Self {
        Self { length: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RudderSpec {
    pub height: f64,
    pub chord: f64,
    /// Radians.
    pub max_angle: f64,
    /// rad/s.
    pub servo_rate: f64,
}

impl Default for RudderSpec {
    fn default() -> Self {
        Self {
            height: 0.090,
            chord: 0.130,
            max_angle: 35f64.to_radians(),
            servo_rate: 60f64.to_radians(),
        }
    }
}

/// First-order yaw response `T·ṙ + r = K·(v/v_ref)²·sin δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YawSpec {
    pub gain: f64,
    pub time_constant: f64,
    pub reference_speed: f64,
}

impl Default for YawSpec {
    fn default() -> Self {
        Self {
            gain: 0.4,
            time_constant: 3.0,
            reference_speed: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterSpec {
    pub max_force: f64,
    pub max_power: f64,
}

impl Default for ThrusterSpec {
    fn default() -> Self {
        Self {
            max_force: 20.0,
            max_power: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinchSpec {
    pub rated_power: f64,
    /// kg-force.
    pub rated_pull: f64,
    pub line_speed: f64,
    pub efficiency: f64,
}

impl Default for WinchSpec {
    fn default() -> Self {
        Self {
            rated_power: 1800.0,
            rated_pull: 900.0,
            line_speed: 0.1,
            efficiency: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WinchDirection {
    Retract,
    Deploy,
    #[default]
    Hold,
}

/// Steady electrical draw of the onboard systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalSpec {
    pub electronics: f64,
    pub servo_hold: f64,
    /// Servo draw while slewing at full rate.
    pub servo_slew: f64,
}

impl Default for ElectricalSpec {
    fn default() -> Self {
        Self {
            electronics: 3.0,
            servo_hold: 0.2,
            servo_slew: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct VehicleSpec {
    pub float: FloatSpec,
    pub glider: GliderSpec,
    pub tether: TetherSpec,
    pub rudder: RudderSpec,
    pub yaw: YawSpec,
    pub thruster: ThrusterSpec,
    pub winch: WinchSpec,
    pub electrical: ElectricalSpec,
    pub water_density: f64,
    /// Ambient current (east, north), m/s.
    pub current: [f64; 2],
}

impl VehicleSpec {
    pub fn with_defaults() -> Self {
        Self {
            water_density: 1025.0,
            ..Default::default()
        }
    }

    /// Every violated invariant, keyed by dotted parameter name.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut need = |ok: bool, key: &str, msg: &str| {
            if !ok {
                out.push((key.to_string(), msg.to_string()));
            }
        };
        let pos = |v: f64| v > 0.0 && v.is_finite();
        need(pos(self.float.hull_length), "float.hull_length", "must be positive");
        need(pos(self.float.hull_separation), "float.hull_separation", "must be positive");
        need(pos(self.float.mass), "float.mass", "must be positive");
        need(self.float.max_payload >= 0.0, "float.max_payload", "must be >= 0");
        need(pos(self.float.net_buoyancy), "float.net_buoyancy", "must be positive");
        need(pos(self.float.surge_drag_area), "float.surge_drag_area", "must be positive");
        need(pos(self.float.surge_drag_coeff), "float.surge_drag_coeff", "must be positive");
        need(self.glider.frame_dims.iter().all(|&d| pos(d)), "glider.frame_dims", "must be positive");
        need(pos(self.glider.mass), "glider.mass", "must be positive");
        need(
            self.glider.net_buoyancy < 0.0 && self.glider.net_buoyancy.is_finite(),
            "glider.net_buoyancy",
            "must be negative",
        );
        need(pos(self.glider.vertical_drag_area), "glider.vertical_drag_area", "must be positive");
        need(pos(self.glider.vertical_drag_coeff), "glider.vertical_drag_coeff", "must be positive");
        need(pos(self.tether.length), "tether.length", "must be positive");
        need(pos(self.rudder.height), "rudder.height", "must be positive");
        need(pos(self.rudder.chord), "rudder.chord", "must be positive");
        need(
            pos(self.rudder.max_angle) && self.rudder.max_angle < PI / 2.0,
            "rudder.max_angle",
            "must lie in (0, 90) degrees",
        );
        need(pos(self.rudder.servo_rate), "rudder.servo_rate", "must be positive");
        need(self.yaw.gain >= 0.0 && self.yaw.gain.is_finite(), "yaw.gain", "must be >= 0");
        need(pos(self.yaw.time_constant), "yaw.time_constant", "must be positive");
        need(pos(self.yaw.reference_speed), "yaw.reference_speed", "must be positive");
        need(self.thruster.max_force >= 0.0, "thruster.max_force", "must be >= 0");
        need(self.thruster.max_power >= 0.0, "thruster.max_power", "must be >= 0");
        need(pos(self.winch.rated_power), "winch.rated_power", "must be positive");
        need(pos(self.winch.rated_pull), "winch.rated_pull", "must be positive");
        need(pos(self.winch.line_speed), "winch.line_speed", "must be positive");
        need(
            self.winch.efficiency > 0.0 && self.winch.efficiency <= 1.0,
            "winch.efficiency",
            "must lie in (0, 1]",
        );
        need(self.electrical.electronics >= 0.0, "electrical.electronics", "must be >= 0");
        need(self.electrical.servo_hold >= 0.0, "electrical.servo_hold", "must be >= 0");
        need(self.electrical.servo_slew >= 0.0, "electrical.servo_slew", "must be >= 0");
        need(pos(self.water_density), "water.density", "must be positive");
        need(self.current.iter().all(|c| c.is_finite()), "current", "must be finite");
        let unit = &self.glider.foil;
        for e in [
            unit.foil.validate().err(),
            unit.spring.validate().err(),
            unit.hinge.validate().err(),
            self.glider.array.validate().err(),
        ]
        .into_iter()
        .flatten()
        {
            out.push(foil_violation(e));
        }
        out
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        match self.violations().first() {
            None => Ok(()),
            Some((k, m)) => Err(VehicleError::Config(format!("{k} {m}"))),
        }
    }
}

fn foil_violation(e: FoilError) -> (String, String) {
    let msg = e.to_string();
    let key = match &e {
        FoilError::NonFinite { name, .. } | FoilError::NonPositive { name, .. } => name.to_string(),
        FoilError::Config(m) => m.split_whitespace().next().unwrap_or("foil").to_string(),
        FoilError::TimeStep(_) => "dt".to_string(),
    };
    let rest = msg.strip_prefix(key.as_str()).map(str::trim_start).unwrap_or(&msg).to_string();
    (key, rest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ActuatorCommand {
    /// Commanded rudder angle, radians; clamped to the rudder limit.
    pub rudder: f64,
    pub thruster_level: f64,
    pub winch: WinchDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Radians in (−π, π].
    pub heading: f64,
    pub yaw_rate: f64,
    pub surge_speed: f64,
    pub heave: f64,
    pub heave_rate: f64,
    pub glider_heave_rate: f64,
    pub roll: f64,
    pub pitch_attitude: f64,
    pub rudder_angle: f64,
    pub foil_pitch: Vec<PitchState>,
    pub foil_thrust: f64,
    pub tether_tension: f64,
    pub tether: TetherState,
    pub tether_deployed: f64,
    /// Vertical separation between float and glider.
    pub glider_depth: f64,
    pub thruster_on: bool,
    pub capsized: bool,
}

impl VehicleState {
    /// At rest at the origin with the glider hanging on the full tether.
    pub fn initial(spec: &VehicleSpec, heading: f64, wave: &WaveSpec) -> Self {
        let heave = wave.elevation(0.0);
        let w = wave.vertical_velocity(0.0);
        let length = spec.tether.length;
        Self {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            heading: normalize_angle(heading),
            yaw_rate: 0.0,
            surge_speed: 0.0,
            heave,
            heave_rate: w,
            glider_heave_rate: w,
            roll: 0.0,
            pitch_attitude: 0.0,
            rudder_angle: 0.0,
            foil_pitch: vec![PitchState::default(); spec.glider.array.count as usize],
            foil_thrust: 0.0,
            tether_tension: (-spec.glider.net_buoyancy).max(0.0),
            tether: TetherState::Taut,
            tether_deployed: length,
            glider_depth: length,
            thruster_on: false,
            capsized: false,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Force (N) and electrical power (W) of the thruster at `level`.
pub fn thruster_force(level: f64, spec: &ThrusterSpec) -> Result<(f64, f64), VehicleError> {
    if !(0.0..=1.0).contains(&level) {
        return Err(VehicleError::ThrusterLevel(level));
    }
    Ok((level * spec.max_force, level.powi(3) * spec.max_power))
}

/// Moves the tether by one step and returns the new deployed length and
/// the electrical draw in watts. `load` is the line tension in newtons.
pub fn winch_step(
    depth: f64,
    direction: WinchDirection,
    spec: &WinchSpec,
    max_depth: f64,
    load: f64,
    dt: f64,
) -> Result<(f64, f64), VehicleError> {
    if !(0.0..=max_depth).contains(&depth) {
        return Err(VehicleError::Depth { depth, max: max_depth });
    }
    if !(dt > 0.0) {
        return Err(VehicleError::TimeStep(dt));
    }
    let target = match direction {
        WinchDirection::Hold => return Ok((depth, 0.0)),
        WinchDirection::Retract => 0.0,
        WinchDirection::Deploy => max_depth,
    };
    let travel = (target - depth).abs().min(spec.line_speed * dt);
    if travel == 0.0 {
        return Ok((depth, 0.0));
    }
    let next = if target < depth { depth - travel } else { depth + travel };
    let speed = travel / dt;
    let pull = load.max(0.0).min(spec.rated_pull * GRAVITY);
    let power = (pull * speed / spec.efficiency).min(spec.rated_power);
    Ok((next, power))
}

/// Advances the vehicle by `dt` seconds and reports the actuator draw.
pub fn step(
    state: &VehicleState,
    wave: &WaveSpec,
    cmd: &ActuatorCommand,
    spec: &VehicleSpec,
    dt: f64,
) -> Result<(VehicleState, PowerTick), VehicleError> {
    if !(dt > 0.0 && dt <= MAX_PITCH_DT) {
        return Err(VehicleError::TimeStep(dt));
    }
    if state.foil_pitch.len() != spec.glider.array.count as usize {
        return Err(VehicleError::Config(format!(
            "state carries {} foils but the array has {}",
            state.foil_pitch.len(),
            spec.glider.array.count
        )));
    }
    let (thrust_force, thruster_w) = thruster_force(cmd.thruster_level, &spec.thruster)?;

    let rho = spec.water_density;
    let t1 = state.t + dt;
    let mut next = state.clone();
    next.t = t1;

    // float
    next.heave = wave.elevation(t1);
    next.heave_rate = wave.vertical_velocity(t1);
    let w_float = next.heave_rate;

    // winch
    let (deployed, winch_w) = winch_step(
        state.tether_deployed,
        cmd.winch,
        &spec.winch,
        spec.tether.length,
        state.tether_tension,
        dt,
    )?;
    let reel_rate = (deployed - state.tether_deployed) / dt;
    next.tether_deployed = deployed;

    // tether and glider heave
    let glider = &spec.glider;
    let k_vert = 0.5 * rho * glider.vertical_drag_coeff * glider.vertical_drag_area;
    let taut_tension = |w: f64| -glider.net_buoyancy + k_vert * w * w.abs();
    let mut resolved = false;
    if state.tether == TetherState::Taut {
        let w_g = w_float - reel_rate;
        let tension = taut_tension(w_g);
        if tension >= 0.0 {
            next.glider_heave_rate = w_g;
            next.glider_depth = deployed;
            next.tether_tension = tension;
            next.tether = TetherState::Taut;
            resolved = true;
        }
    }
    if !resolved {
        let w0 = state.glider_heave_rate;
        let w_g = (w0 + dt * glider.net_buoyancy / glider.mass) / (1.0 + dt * k_vert * w0.abs() / glider.mass);
        let sep = state.glider_depth + (w_float - w_g) * dt;
        if sep >= deployed {
            let w_taut = w_float - reel_rate;
            let tension = taut_tension(w_taut);
            next.glider_depth = deployed;
            if tension >= 0.0 {
                next.glider_heave_rate = w_taut;
                next.tether_tension = tension;
                next.tether = TetherState::Taut;
            } else {
                next.glider_heave_rate = w_g.max(w_taut);
                next.tether_tension = 0.0;
                next.tether = TetherState::Slack;
            }
        } else if sep <= 0.0 {
            next.glider_depth = 0.0;
            next.glider_heave_rate = w_float;
            next.tether_tension = 0.0;
            next.tether = TetherState::Slack;
        } else {
            next.glider_depth = sep;
            next.glider_heave_rate = w_g;
            next.tether_tension = 0.0;
            next.tether = TetherState::Slack;
        }
    }

    // foils
    let w_g = next.glider_heave_rate;
    let v = state.surge_speed;
    let unit = &glider.foil;
    let mut stepped: Vec<PitchState> = Vec::with_capacity(state.foil_pitch.len());
    let mut thrust_sum = 0.0;
    for (i, p) in state.foil_pitch.iter().enumerate() {
        if i > 0 && *p == state.foil_pitch[i - 1] {
            let prev = stepped[i - 1];
            stepped.push(prev);
            thrust_sum += foil_thrust(prev.angle, w_g, v, &unit.foil, rho)?;
            continue;
        }
        let s = unit.pitch_step(*p, w_g, v, rho, dt)?;
        stepped.push(s);
        thrust_sum += foil_thrust(s.angle, w_g, v, &unit.foil, rho)?;
    }
    let per_foil = if stepped.is_empty() {
        0.0
    } else {
        thrust_sum / stepped.len() as f64
    };
    let foil_force = array_thrust(per_foil, &glider.array)?;
    next.foil_pitch = stepped;
    next.foil_thrust = foil_force;

    // surge
    let m_total = spec.float.mass + glider.mass;
    let k_surge = 0.5 * rho * spec.float.surge_drag_coeff * spec.float.surge_drag_area;
    next.surge_speed = (v + dt * (foil_force + thrust_force) / m_total) / (1.0 + dt * k_surge * v.abs() / m_total);
    next.thruster_on = cmd.thruster_level > 0.0;

    // rudder
    let max = spec.rudder.max_angle;
    let target = cmd.rudder.clamp(-max, max);
    let slew_limit = spec.rudder.servo_rate * dt;
    let delta = (target - state.rudder_angle).clamp(-slew_limit, slew_limit);
    next.rudder_angle = (state.rudder_angle + delta).clamp(-max, max);

    // yaw
    let yaw = &spec.yaw;
    let u = next.surge_speed / yaw.reference_speed;
    let r_ss = yaw.gain * u * u * next.rudder_angle.sin();
    let a = dt / yaw.time_constant;
    next.yaw_rate = (state.yaw_rate + a * r_ss) / (1.0 + a);
    next.heading = normalize_angle(state.heading + next.yaw_rate * dt);

    // kinematics
    next.x = state.x + (next.surge_speed * next.heading.cos() + spec.current[0]) * dt;
    next.y = state.y + (next.surge_speed * next.heading.sin() + spec.current[1]) * dt;

    for (name, value) in [
        ("x", next.x),
        ("y", next.y),
        ("heading", next.heading),
        ("surge_speed", next.surge_speed),
        ("yaw_rate", next.yaw_rate),
        ("glider_heave_rate", next.glider_heave_rate),
        ("tether_tension", next.tether_tension),
        ("foil_thrust", next.foil_thrust),
    ] {
        if !value.is_finite() {
            return Err(VehicleError::NonFinite(name));
        }
    }

    let slew_fraction = if slew_limit > 0.0 { delta.abs() / slew_limit } else { 0.0 };
    let load = Loads {
        servo: spec.electrical.servo_hold + spec.electrical.servo_slew * slew_fraction,
        thruster: thruster_w,
        winch: winch_w,
        electronics: spec.electrical.electronics,
        comms: 0.0,
    };
    let tick = PowerTick {
        t: t1,
        dt,
        load,
        ..Default::default()
    };
    Ok((next, tick))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> VehicleSpec {
        VehicleSpec::with_defaults()
    }

    #[test]
    fn defaults_validate() {
        assert!(spec().violations().is_empty());
        assert!((spec().float.hull_separation - spec().float.hull_length / 2.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_wraps_into_half_open_interval() {
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn thruster_affinity() {
        let s = ThrusterSpec::default();
        assert_eq!(thruster_force(0.0, &s).unwrap(), (0.0, 0.0));
        assert_eq!(thruster_force(1.0, &s).unwrap(), (20.0, 120.0));
        let (f, p) = thruster_force(0.5, &s).unwrap();
        assert!((f - 10.0).abs() < 1e-12 && (p - 15.0).abs() < 1e-12);
        assert!(thruster_force(1.01, &s).is_err());
    }

    #[test]
    fn winch_retracts_in_fifty_seconds() {
        let w = WinchSpec::default();
        let mut d = 5.0;
        let mut t: f64 = 0.0;
        while d > 0.0 {
            let (nd, p) = winch_step(d, WinchDirection::Retract, &w, 5.0, 60.0, 0.05).unwrap();
            assert!(p > 0.0 && p <= 1800.0);
            d = nd;
            t += 0.05;
        }
        assert!((t - 50.0).abs() < 0.05 + 1e-9);
        assert_eq!(winch_step(0.0, WinchDirection::Retract, &w, 5.0, 60.0, 0.05).unwrap(), (0.0, 0.0));
        assert_eq!(winch_step(2.5, WinchDirection::Hold, &w, 5.0, 60.0, 0.05).unwrap(), (2.5, 0.0));
        assert!(winch_step(5.5, WinchDirection::Hold, &w, 5.0, 60.0, 0.05).is_err());
    }

    #[test]
    fn winch_power_is_capped() {
        let w = WinchSpec::default();
        let (_, p) = winch_step(3.0, WinchDirection::Retract, &w, 5.0, 1e6, 0.05).unwrap();
        // rated pull at line speed
        assert!((p - 900.0 * GRAVITY * 0.1 / 0.6).abs() < 1e-9);
        let fast = WinchSpec { line_speed: 0.5, ..w };
        let (_, p) = winch_step(3.0, WinchDirection::Retract, &fast, 5.0, 1e6, 0.05).unwrap();
        assert_eq!(p, 1800.0);
    }

    #[test]
    fn flat_sea_is_static() {
        let s = spec();
        let wave = WaveSpec::calm();
        let mut st = VehicleState::initial(&s, 0.3, &wave);
        let cmd = ActuatorCommand::default();
        for _ in 0..500 {
            let (n, tick) = step(&st, &wave, &cmd, &s, 0.02).unwrap();
            assert_eq!(tick.load.thruster, 0.0);
            assert_eq!(tick.load.winch, 0.0);
            assert_eq!(tick.load.comms, 0.0);
            st = n;
        }
        assert_eq!(st.x, 0.0);
        assert_eq!(st.y, 0.0);
        assert_eq!(st.surge_speed, 0.0);
        assert_eq!(st.heading, normalize_angle(0.3));
        assert!((st.tether_tension - 60.0).abs() < 1e-12);
    }

    #[test]
    fn rudder_slew_is_rate_limited() {
        let s = spec();
        let wave = WaveSpec::calm();
        let mut st = VehicleState::initial(&s, 0.0, &wave);
        st.surge_speed = 0.5;
        let cmd = ActuatorCommand {
            rudder: 35f64.to_radians(),
            thruster_level: 0.3,
            ..Default::default()
        };
        let dt = 0.02;
        let max_step = s.rudder.servo_rate * dt;
        let mut reached_at = None;
        for i in 0..200 {
            let (n, _) = step(&st, &wave, &cmd, &s, dt).unwrap();
            assert!((n.rudder_angle - st.rudder_angle).abs() <= max_step + 1e-12);
            assert!(n.rudder_angle.abs() <= s.rudder.max_angle + 1e-15);
            if reached_at.is_none() && (n.rudder_angle - s.rudder.max_angle).abs() < 1e-12 {
                reached_at = Some((i + 1) as f64 * dt);
            }
            st = n;
        }
        assert!(st.yaw_rate > 0.0);
        let earliest = s.rudder.max_angle / s.rudder.servo_rate;
        assert!(reached_at.unwrap() >= earliest - 1e-9);
    }

    #[test]
    fn regular_wave_propels_forward_with_tension() {
        let s = spec();
        let wave = WaveSpec::regular(0.25, 4.0);
        let mut st = VehicleState::initial(&s, 0.0, &wave);
        let cmd = ActuatorCommand::default();
        let dt = 0.02;
        let n = (600.0 / dt) as usize;
        let mut sum = 0.0;
        for _ in 0..n {
            let (next, _) = step(&st, &wave, &cmd, &s, dt).unwrap();
            assert!(next.tether_tension >= 0.0);
            assert!((0.0..=s.tether.length).contains(&next.glider_depth));
            sum += next.surge_speed;
            st = next;
        }
        assert!(sum / n as f64 > 0.0);
    }

    #[test]
    fn no_foils_means_no_forward_progress() {
        let mut s = spec();
        s.glider.array.count = 0;
        let wave = WaveSpec::regular(0.25, 4.0);
        let mut st = VehicleState::initial(&s, 0.0, &wave);
        let cmd = ActuatorCommand::default();
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let (next, _) = step(&st, &wave, &cmd, &s, 0.02).unwrap();
            sum += next.surge_speed;
            st = next;
        }
        assert!(sum <= 0.0);
    }

    #[test]
    fn zero_rudder_holds_heading_exactly() {
        let s = spec();
        let wave = WaveSpec::regular(0.25, 4.0);
        let mut st = VehicleState::initial(&s, 1.0, &wave);
        let cmd = ActuatorCommand::default();
        for _ in 0..10_000 {
            st = step(&st, &wave, &cmd, &s, 0.02).unwrap().0;
        }
        assert!((st.heading - 1.0).abs() < 1e-9);
    }

    #[test]
    fn large_waves_slacken_but_never_push() {
        let s = spec();
        let wave = WaveSpec::regular(1.0, 4.0);
        let mut st = VehicleState::initial(&s, 0.0, &wave);
        let cmd = ActuatorCommand::default();
        let mut slack = 0;
        for _ in 0..20_000 {
            st = step(&st, &wave, &cmd, &s, 0.02).unwrap().0;
            assert!(st.tether_tension >= 0.0);
            assert!((0.0..=5.0).contains(&st.glider_depth));
            if st.tether == TetherState::Slack {
                slack += 1;
            }
        }
        assert!(slack > 0);
    }

    #[test]
    fn bad_time_step_rejected() {
        let s = spec();
        let wave = WaveSpec::calm();
        let st = VehicleState::initial(&s, 0.0, &wave);
        let cmd = ActuatorCommand::default();
        assert!(matches!(step(&st, &wave, &cmd, &s, 0.06), Err(VehicleError::TimeStep(_))));
        assert!(matches!(step(&st, &wave, &cmd, &s, 0.0), Err(VehicleError::TimeStep(_))));
    }
}
