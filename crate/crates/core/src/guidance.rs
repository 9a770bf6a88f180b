//! Waypoint autopilot, capsize detection and sea-state estimation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vehicle::normalize_angle;

/// Fewest samples accepted by [`estimate_sea_state`].
pub const MIN_SEA_STATE_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("no valid position fix; hold the last heading")]
    InvalidFix,
    #[error("sea-state window has {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("sample interval {0} s must be positive")]
    SampleInterval(f64),
    #[error("mission hours must be strictly increasing (waypoint {index})")]
    UnsortedMission { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub hour_index: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Fix {
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl Fix {
    pub fn at(x: f64, y: f64) -> Self {
        Self { x, y, valid: true }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (x - self.x).hypot(y - self.y)
    }
}

/// Bearing from the fix to a point, radians counter-clockwise from +x.
pub fn desired_heading(fix: &Fix, x: f64, y: f64) -> Result<f64, GuidanceError> {
    if !fix.valid {
        return Err(GuidanceError::InvalidFix);
    }
    Ok(normalize_angle((y - fix.y).atan2(x - fix.x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingGains {
    pub kp: f64,
    pub kd: f64,
    /// Radians.
    pub max_rudder: f64,
}

impl Default for HeadingGains {
    fn default() -> Self {
        Self {
            kp: 0.6,
            kd: 1.2,
            max_rudder: 35f64.to_radians(),
        }
    }
}

/// PD rudder law, saturated at the rudder limit.
pub fn heading_controller(err: f64, err_rate: f64, gains: &HeadingGains) -> f64 {
    let u = gains.kp * err + gains.kd * err_rate;
    if u.is_nan() {
        return 0.0;
    }
    u.clamp(-gains.max_rudder, gains.max_rudder)
}

pub fn detect_capsize(roll: f64, pitch: f64, threshold: f64) -> bool {
    roll.abs() > threshold || pitch.abs() > threshold
}

/// What the arbiter wants the vehicle to do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Target {
    Waypoint { index: usize, waypoint: Waypoint },
    /// Hold position at the given point.
    StationKeeping { x: f64, y: f64 },
}

/// Mission bookkeeping for the hourly waypoint schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MissionTracker {
    mission: Vec<Waypoint>,
    arrived: Vec<bool>,
    version: u16,
    hold: Option<(f64, f64)>,
}

impl MissionTracker {
    pub fn new(mission: Vec<Waypoint>, version: u16) -> Result<Self, GuidanceError> {
        check_sorted(&mission)?;
        let n = mission.len();
        Ok(Self {
            mission,
            arrived: vec![false; n],
            version,
            hold: None,
        })
    }

    pub fn mission(&self) -> &[Waypoint] {
        &self.mission
    }

    pub fn version(&self) -> u16 {
        self.version
    }

    pub fn arrived(&self) -> &[bool] {
        &self.arrived
    }

    /// Swaps in a new mission. An identical waypoint list keeps progress.
    pub fn replace(&mut self, mission: Vec<Waypoint>, version: u16) -> Result<(), GuidanceError> {
        check_sorted(&mission)?;
        self.version = version;
        if mission == self.mission {
            return Ok(());
        }
        self.arrived = vec![false; mission.len()];
        self.mission = mission;
        self.hold = None;
        Ok(())
    }

    /// Marks arrivals and picks the active target for `sim_hour`.
    pub fn arbitrate(&mut self, fix: &Fix, sim_hour: u32, arrival_radius: f64) -> Target {
        loop {
            let active = self
                .mission
                .iter()
                .enumerate()
                .find(|(i, w)| !self.arrived[*i] && w.hour_index >= sim_hour)
                .map(|(i, w)| (i, *w));
            match active {
                Some((i, w)) if fix.valid && fix.distance_to(w.x, w.y) <= arrival_radius => {
                    self.arrived[i] = true;
                    self.hold = Some((w.x, w.y));
                }
                Some((index, waypoint)) => return Target::Waypoint { index, waypoint },
                None => {
                    let (x, y) = *self.hold.get_or_insert((fix.x, fix.y));
                    return Target::StationKeeping { x, y };
                }
            }
        }
    }
}

fn check_sorted(mission: &[Waypoint]) -> Result<(), GuidanceError> {
    for (i, pair) in mission.windows(2).enumerate() {
        if pair[1].hour_index <= pair[0].hour_index {
            return Err(GuidanceError::UnsortedMission { index: i + 1 });
        }
    }
    Ok(())
}

/// Fixed-capacity ring of vertical accelerations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelWindow {
    capacity: usize,
    samples: VecDeque<f64>,
}

impl AccelWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            samples: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, a: f64) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(a);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.samples.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub fix: Fix,
    /// Radians in (−π, π].
    pub heading: f64,
    pub roll: f64,
    pub pitch: f64,
    pub heave_accel_window: AccelWindow,
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|y| *y -= mean);
}

/// Subtracts the least-squares quadratic in sample index.
fn remove_quadratic(v: &mut [f64]) {
    let n = v.len();
    let c = (n as f64 - 1.0) / 2.0;
    // normal equations in the centred index u = i − c
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (i, &y) in v.iter().enumerate() {
        let u = i as f64 - c;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            rhs[r] += basis[r] * y;
            for k in 0..3 {
                m[r][k] += basis[r] * basis[k];
            }
        }
    }
    let Some(coef) = solve3(m, rhs) else {
        remove_mean(v);
        return;
    };
    for (i, y) in v.iter_mut().enumerate() {
        let u = i as f64 - c;
        *y -= coef[0] + coef[1] * u + coef[2] * u * u;
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for k in col..3 {
                m[r][k] -= f * m[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

fn integrate(v: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in v.windows(2) {
        acc += 0.5 * (pair[0] + pair[1]) * dt;
        out.push(acc);
    }
    out
}

/// Significant wave height from a window of heave accelerations.
pub fn estimate_sea_state(window: &[f64], dt: f64) -> Result<f64, GuidanceError> {
    if window.len() < MIN_SEA_STATE_SAMPLES {
        return Err(GuidanceError::InsufficientData {
            got: window.len(),
            need: MIN_SEA_STATE_SAMPLES,
        });
    }
    if !(dt > 0.0) {
        return Err(GuidanceError::SampleInterval(dt));
    }
    let mut acc = window.to_vec();
    remove_mean(&mut acc);
    let mut vel = integrate(&acc, dt);
    remove_mean(&mut vel);
    let mut disp = integrate(&vel, dt);
    remove_quadratic(&mut disp);
    let var = disp.iter().map(|d| d * d).sum::<f64>() / disp.len() as f64;
    Ok(4.0 * var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutopilotSpec {
    pub gains: HeadingGains,
    pub arrival_radius: f64,
    /// Radians.
    pub capsize_threshold: f64,
}

impl Default for AutopilotSpec {
    fn default() -> Self {
        Self {
            gains: HeadingGains::default(),
            arrival_radius: 25.0,
            capsize_threshold: 90f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceOutput {
    pub rudder: f64,
    pub target: Target,
    pub desired_heading: f64,
    pub heading_error: f64,
    pub capsized: bool,
}

/// One autopilot decision. Without a valid fix the last desired heading
/// is held.
pub fn guide(
    tracker: &mut MissionTracker,
    nav: &NavState,
    yaw_rate: f64,
    sim_hour: u32,
    last_desired: f64,
    spec: &AutopilotSpec,
) -> GuidanceOutput {
    let target = tracker.arbitrate(&nav.fix, sim_hour, spec.arrival_radius);
    let (tx, ty) = match target {
        Target::Waypoint { waypoint, .. } => (waypoint.x, waypoint.y),
        Target::StationKeeping { x, y } => (x, y),
    };
    let desired = desired_heading(&nav.fix, tx, ty).unwrap_or(last_desired);
    let err = normalize_angle(desired - nav.heading);
    GuidanceOutput {
        rudder: heading_controller(err, -yaw_rate, &spec.gains),
        target,
        desired_heading: desired,
        heading_error: err,
        capsized: detect_capsize(nav.roll, nav.pitch, spec.capsize_threshold),
    }
}
