//! Passive flapping-foil propulsion.
//!
//! Angles follow one convention throughout this module: foil pitch is
//! positive nose-down, heave rate is the glider's vertical velocity
//! (positive up) and surge speed is positive forward. With that
//! convention a rising glider feathers its foils toward the relief stop
//! at −90° and a sinking glider drives them onto the upper stop.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest outer step accepted by [`FoilUnit::pitch_step`].
pub const MAX_PITCH_DT: f64 = 0.05;

/// Internal sub-step used to integrate the stiff hinge dynamics.
const PITCH_SUBSTEP: f64 = 0.002;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoilError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("time step {0} s outside (0, {MAX_PITCH_DT}] s")]
    TimeStep(f64),
    #[error("invalid foil configuration: {0}")]
    Config(String),
}

fn finite(name: &'static str, value: f64) -> Result<f64, FoilError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FoilError::NonFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, FoilError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FoilError::NonPositive { name, value })
    }
}

/// Geometry and section coefficients of one symmetric foil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoilSpec {
    pub chord: f64,
    pub span: f64,
    pub zero_lift_drag_coeff: f64,
    pub stall_angle: f64,
    pub oswald_efficiency: f64,
    /// Fraction of the stall lift coefficient left at 90° incidence.
    pub post_stall_lift_fraction: f64,
    /// Drag coefficient of the section broadside to the flow.
    pub flat_plate_drag_coeff: f64,
}

impl Default for FoilSpec {
    fn default() -> Self {
        Self {
            chord: 0.12,
            span: 0.325,
            zero_lift_drag_coeff: 0.01,
            stall_angle: 25f64.to_radians(),
            oswald_efficiency: 0.9,
            post_stall_lift_fraction: 0.2,
            flat_plate_drag_coeff: 1.8,
        }
    }
}

impl FoilSpec {
    pub fn planform_area(&self) -> f64 {
        self.chord * self.span
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.span / self.chord
    }

    pub fn validate(&self) -> Result<(), FoilError> {
        positive("foil.chord", self.chord)?;
        positive("foil.span", self.span)?;
        positive("foil.oswald_efficiency", self.oswald_efficiency)?;
        if !(self.zero_lift_drag_coeff >= 0.0 && self.zero_lift_drag_coeff.is_finite()) {
            return Err(FoilError::Config(format!(
                "foil.zero_lift_drag_coeff must be >= 0, got {}",
                self.zero_lift_drag_coeff
            )));
        }
        if !(self.stall_angle > 0.0 && self.stall_angle < FRAC_PI_2) {
            return Err(FoilError::Config(format!(
                "foil.stall_angle must lie in (0, 90) degrees, got {}",
                self.stall_angle.to_degrees()
            )));
        }
        if !(0.0..=1.0).contains(&self.post_stall_lift_fraction) {
            return Err(FoilError::Config(format!(
                "foil.post_stall_lift_fraction must lie in [0, 1], got {}",
                self.post_stall_lift_fraction
            )));
        }
        let (_, cd_stall) = self.attached_coefficients(self.stall_angle);
        if !(self.flat_plate_drag_coeff > cd_stall) {
            return Err(FoilError::Config(format!(
                "foil.flat_plate_drag_coeff must exceed the stall drag {cd_stall:.4}, got {}",
                self.flat_plate_drag_coeff
            )));
        }
        Ok(())
    }

    fn attached_coefficients(&self, alpha: f64) -> (f64, f64) {
        let cl = 2.0 * PI * alpha.sin() * alpha.cos();
        let cd = self.zero_lift_drag_coeff + cl * cl / (PI * self.oswald_efficiency * self.aspect_ratio());
        (cl, cd)
    }
}

/// Lift and drag coefficients at incidence `alpha` (radians).
///
/// Attached flow uses thin-foil lift with induced drag. Past the stall
/// angle lift decays linearly to a fraction of its stall value at 90° while
/// drag rises linearly to the flat-plate value. Incidences beyond 90° are
/// mirrored about 90°, which keeps both curves continuous and symmetric.
pub fn lift_drag_coefficients(alpha: f64, spec: &FoilSpec) -> Result<(f64, f64), FoilError> {
    finite("alpha", alpha)?;
    let mut a = alpha;
    if a.abs() > PI {
        a -= 2.0 * PI * (a / (2.0 * PI)).round();
    }
    let sign = if a < 0.0 { -1.0 } else { 1.0 };
    let mut m = a.abs();
    if m > FRAC_PI_2 {
        m = PI - m;
    }
    let (cl, cd) = if m <= spec.stall_angle {
        spec.attached_coefficients(m)
    } else {
        let (cl_stall, cd_stall) = spec.attached_coefficients(spec.stall_angle);
        let f = (m - spec.stall_angle) / (FRAC_PI_2 - spec.stall_angle);
        (
            cl_stall * (1.0 - (1.0 - spec.post_stall_lift_fraction) * f),
            cd_stall + (spec.flat_plate_drag_coeff - cd_stall) * f,
        )
    };
    Ok((sign * cl, cd))
}

/// Flow geometry seen by a foil: inflow angle, incidence and dynamic pressure.
#[derive(Debug, Clone, Copy)]
struct Inflow {
    phi: f64,
    alpha: f64,
    q: f64,
}

fn inflow(pitch: f64, heave_rate: f64, surge_speed: f64, water_density: f64) -> Option<Inflow> {
    if heave_rate == 0.0 && surge_speed == 0.0 {
        return None;
    }
    let phi = (-heave_rate).atan2(surge_speed);
    Some(Inflow {
        phi,
        alpha: phi - pitch,
        q: 0.5 * water_density * (heave_rate * heave_rate + surge_speed * surge_speed),
    })
}

/// Surge-direction force (N) on a single foil.
pub fn foil_thrust(
    pitch: f64,
    heave_rate: f64,
    surge_speed: f64,
    spec: &FoilSpec,
    water_density: f64,
) -> Result<f64, FoilError> {
    positive("water_density", water_density)?;
    finite("pitch", pitch)?;
    finite("heave_rate", heave_rate)?;
    finite("surge_speed", surge_speed)?;
    let Some(flow) = inflow(pitch, heave_rate, surge_speed, water_density) else {
        return Ok(0.0);
    };
    let (cl, cd) = lift_drag_coefficients(flow.alpha, spec)?;
    Ok(flow.q * spec.planform_area() * (cl * flow.phi.sin() - cd * flow.phi.cos()))
}

/// Linear extension spring acting on the pitch shaft through a lever arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringSpec {
    /// N/mm.
    pub rate: f64,
    pub neutral_angle: f64,
    pub lever_arm: f64,
    /// N·m·s/rad.
    pub damping: f64,
}

impl Default for SpringSpec {
    fn default() -> Self {
        Self {
            rate: 1.178,
            neutral_angle: 0.0,
            lever_arm: 0.02,
            damping: 0.05,
        }
    }
}

impl SpringSpec {
    /// Equivalent torsional stiffness in N·m/rad.
    pub fn torsional_stiffness(&self) -> f64 {
        self.rate * 1000.0 * self.lever_arm * self.lever_arm
    }

    pub fn validate(&self) -> Result<(), FoilError> {
        positive("spring.rate", self.rate)?;
        positive("spring.lever_arm", self.lever_arm)?;
        finite("spring.neutral_angle", self.neutral_angle)?;
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(FoilError::Config(format!("spring.damping must be >= 0, got {}", self.damping)));
        }
        Ok(())
    }
}

/// Hinge geometry and stops of a passively pitching foil.
///
/// The upper stop sits at `+limit_angle`. The lower operational limit at
/// `−limit_angle` is a detent that holds the foil until the load pushing
/// past it exceeds `relief_moment`; beyond it the spring is disengaged and
/// the foil may swing to the hard relief stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HingeSpec {
    /// kg·m².
    pub inertia: f64,
    /// Distance from the pivot to the centre of pressure.
    pub pivot_arm: f64,
    pub limit_angle: f64,
    /// Hard stop on the upstroke side (negative).
    pub relief_stop: f64,
    /// N·m.
    pub relief_moment: f64,
}

impl Default for HingeSpec {
    fn default() -> Self {
        Self {
            inertia: 0.002,
            pivot_arm: 0.03,
            limit_angle: 20f64.to_radians(),
            relief_stop: -FRAC_PI_2,
            relief_moment: 1.0,
        }
    }
}

impl HingeSpec {
    pub fn upper_stop(&self) -> f64 {
        self.limit_angle
    }

    pub fn lower_limit(&self) -> f64 {
        -self.limit_angle
    }

    pub fn validate(&self) -> Result<(), FoilError> {
        positive("hinge.inertia", self.inertia)?;
        positive("hinge.pivot_arm", self.pivot_arm)?;
        positive("hinge.relief_moment", self.relief_moment)?;
        if !(self.limit_angle > 0.0 && self.limit_angle < FRAC_PI_2) {
            return Err(FoilError::Config(format!(
                "hinge.limit_angle must lie in (0, 90) degrees, got {}",
                self.limit_angle.to_degrees()
            )));
        }
        if !(self.relief_stop < -self.limit_angle && self.relief_stop >= -PI) {
            return Err(FoilError::Config(format!(
                "hinge.relief_stop must lie in [-180, -limit) degrees, got {}",
                self.relief_stop.to_degrees()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopContact {
    #[default]
    Free,
    UpperStop,
    /// Held by the detent at the lower operational limit.
    LowerLimit,
    /// Resting on the relief stop.
    LowerStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PitchState {
    pub angle: f64,
    pub angular_rate: f64,
    pub at_stop: StopContact,
}

/// One foil with its spring and hinge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FoilUnit {
    pub foil: FoilSpec,
    pub spring: SpringSpec,
    pub hinge: HingeSpec,
}

impl FoilUnit {
    pub fn validate(&self) -> Result<(), FoilError> {
        self.foil.validate()?;
        self.spring.validate()?;
        self.hinge.validate()
    }

    /// Hydrodynamic moment about the pivot; positive drives pitch up
    /// (nose-down), i.e. toward zero incidence.
    pub fn hydro_moment(&self, pitch: f64, heave_rate: f64, surge_speed: f64, water_density: f64) -> f64 {
        let Some(flow) = inflow(pitch, heave_rate, surge_speed, water_density) else {
            return 0.0;
        };
        // alpha is finite whenever the inputs are
        let (cl, cd) = lift_drag_coefficients(flow.alpha, &self.foil).unwrap_or((0.0, 0.0));
        let normal = cl * flow.alpha.cos() + cd * flow.alpha.sin();
        flow.q * self.foil.planform_area() * normal * self.hinge.pivot_arm
    }

    /// Spring torque at `angle`; zero in the relief zone below the
    /// operational limit.
    pub fn spring_moment(&self, angle: f64) -> f64 {
        if angle < self.hinge.lower_limit() {
            0.0
        } else {
            -self.spring.torsional_stiffness() * (angle - self.spring.neutral_angle)
        }
    }

    /// Advances the hinge by `dt` seconds under steady inflow.
    pub fn pitch_step(
        &self,
        state: PitchState,
        heave_rate: f64,
        surge_speed: f64,
        water_density: f64,
        dt: f64,
    ) -> Result<PitchState, FoilError> {
        if !(dt > 0.0 && dt <= MAX_PITCH_DT) {
            return Err(FoilError::TimeStep(dt));
        }
        finite("heave_rate", heave_rate)?;
        finite("surge_speed", surge_speed)?;
        positive("water_density", water_density)?;

        let n = (dt / PITCH_SUBSTEP).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        let upper = self.hinge.upper_stop();
        let lower_limit = self.hinge.lower_limit();
        let relief = self.hinge.relief_stop;

        let mut s = state;
        for _ in 0..n {
            let load = self.hydro_moment(s.angle, heave_rate, surge_speed, water_density)
                + self.spring_moment(s.angle);
            match s.at_stop {
                StopContact::UpperStop if load >= 0.0 => continue,
                StopContact::LowerStop if load <= 0.0 => continue,
                StopContact::LowerLimit if load <= 0.0 && load >= -self.hinge.relief_moment => continue,
                _ => {}
            }
            let released = load < -self.hinge.relief_moment;
            let net = load - self.spring.damping * s.angular_rate;
            let mut rate = s.angular_rate + net / self.hinge.inertia * h;
            let mut angle = s.angle + rate * h;
            let mut contact = StopContact::Free;
            if angle >= upper {
                angle = upper;
                rate = rate.min(0.0);
                contact = StopContact::UpperStop;
            } else if s.angle >= lower_limit && angle < lower_limit && !released {
                angle = lower_limit;
                rate = 0.0;
                contact = StopContact::LowerLimit;
            } else if angle <= relief {
                angle = relief;
                rate = rate.max(0.0);
                contact = StopContact::LowerStop;
            }
            s = PitchState {
                angle,
                angular_rate: rate,
                at_stop: contact,
            };
        }
        Ok(s)
    }
}

/// Layout of the foil sets along the glider frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoilArraySpec {
    /// Zero models a glider with its foils removed.
    pub count: u32,
    pub spacing: f64,
    pub interference_gain: f64,
    pub spacing_exponent: f64,
    pub reference_spacing: f64,
}

impl Default for FoilArraySpec {
    fn default() -> Self {
        Self {
            count: 6,
            spacing: 0.012,
            interference_gain: 0.35,
            spacing_exponent: 0.25,
            reference_spacing: 0.012,
        }
    }
}

impl FoilArraySpec {
    pub fn validate(&self) -> Result<(), FoilError> {
        positive("array.spacing", self.spacing)?;
        positive("array.reference_spacing", self.reference_spacing)?;
        if !(self.interference_gain >= 0.0 && self.interference_gain.is_finite()) {
            return Err(FoilError::Config(format!(
                "array.interference_gain must be >= 0, got {}",
                self.interference_gain
            )));
        }
        if !(self.spacing_exponent >= 0.0 && self.spacing_exponent.is_finite()) {
            return Err(FoilError::Config(format!(
                "array.spacing_exponent must be >= 0, got {}",
                self.spacing_exponent
            )));
        }
        Ok(())
    }

    /// Wake interference gain, `1 + a·(1 − 1/n)`.
    pub fn interference_factor(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        1.0 + self.interference_gain * (1.0 - 1.0 / self.count as f64)
    }

    /// `(s_ref / s)^β`, clipped to [0.5, 1.5].
    pub fn spacing_factor(&self) -> f64 {
        (self.reference_spacing / self.spacing)
            .powf(self.spacing_exponent)
            .clamp(0.5, 1.5)
    }
}

/// Total surge force of the array given the mean thrust of one isolated foil.
pub fn array_thrust(per_foil_mean_thrust: f64, array: &FoilArraySpec) -> Result<f64, FoilError> {
    finite("per_foil_mean_thrust", per_foil_mean_thrust)?;
    array.validate()?;
    Ok(per_foil_mean_thrust * array.count as f64 * array.interference_factor() * array.spacing_factor())
}

/// Scales a spring rate by the ratio of foil areas.
pub fn scale_spring_rate(reference_rate: f64, reference_area: f64, target_area: f64) -> Result<f64, FoilError> {
    positive("reference_rate", reference_rate)?;
    positive("reference_area", reference_area)?;
    positive("target_area", target_area)?;
    Ok(reference_rate * (target_area / reference_area))
}

/// Cycle-mean thrust of one foil towed at constant speed through a
/// prescribed heave motion.
///
/// Integrates the hinge at `dt` for `settle + duration` seconds and averages
/// the instantaneous thrust over the final `duration` seconds.
pub fn captive_mean_thrust(
    unit: &FoilUnit,
    heave_rate: impl Fn(f64) -> f64,
    tow_speed: f64,
    water_density: f64,
    dt: f64,
    settle: f64,
    duration: f64,
) -> Result<f64, FoilError> {
    positive("duration", duration)?;
    let settle_steps = (settle / dt).round() as usize;
    let steps = (duration / dt).round().max(1.0) as usize;
    let mut state = PitchState::default();
    let mut sum = 0.0;
    for i in 0..settle_steps + steps {
        let t = (i + 1) as f64 * dt;
        let w = heave_rate(t);
        state = unit.pitch_step(state, w, tow_speed, water_density, dt)?;
        if i >= settle_steps {
            sum += foil_thrust(state.angle, w, tow_speed, &unit.foil, water_density)?;
        }
    }
    Ok(sum / steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO: f64 = 1025.0;

    #[test]
    fn default_geometry() {
        let f = FoilSpec::default();
        assert!((f.planform_area() - 0.039).abs() < 1e-12);
        assert!((f.stall_angle - 25f64.to_radians()).abs() < 1e-15);
        let a = FoilArraySpec::default();
        assert_eq!(a.count, 6);
        assert!((a.spacing - 0.1 * f.chord).abs() < 1e-15);
        f.validate().unwrap();
    }

    #[test]
    fn zero_incidence_is_pure_profile_drag() {
        let f = FoilSpec::default();
        let (cl, cd) = lift_drag_coefficients(0.0, &f).unwrap();
        assert_eq!(cl, 0.0);
        assert_eq!(cd, f.zero_lift_drag_coeff);
    }

    #[test]
    fn ten_degree_lift_matches_closed_form() {
        let f = FoilSpec::default();
        let a = 10f64.to_radians();
        let (cl, cd) = lift_drag_coefficients(a, &f).unwrap();
        // independent evaluation of 2π·sin·cos = π·sin(2α)
        let oracle = PI * (2.0 * a).sin();
        assert!((cl - oracle).abs() < 1e-12);
        assert!((cl - 1.0745).abs() < 1e-4);
        let ar = 0.325 / 0.12;
        assert!((cd - (0.01 + oracle * oracle / (PI * 0.9 * ar))).abs() < 1e-12);
    }

    #[test]
    fn stall_reduces_lift_and_raises_drag() {
        let f = FoilSpec::default();
        let (cl25, cd25) = lift_drag_coefficients(25f64.to_radians(), &f).unwrap();
        let (cl30, cd30) = lift_drag_coefficients(30f64.to_radians(), &f).unwrap();
        assert!(cl30 < cl25);
        assert!(cd30 > cd25);
        let (cl90, cd90) = lift_drag_coefficients(FRAC_PI_2, &f).unwrap();
        assert!((cl90 - 0.2 * cl25).abs() < 1e-12);
        assert!((cd90 - 1.8).abs() < 1e-12);
    }

    #[test]
    fn non_finite_incidence_rejected() {
        let f = FoilSpec::default();
        assert!(matches!(
            lift_drag_coefficients(f64::NAN, &f),
            Err(FoilError::NonFinite { .. })
        ));
        assert!(lift_drag_coefficients(f64::INFINITY, &f).is_err());
    }

    #[test]
    fn no_flow_no_thrust() {
        let f = FoilSpec::default();
        assert_eq!(foil_thrust(0.3, 0.0, 0.0, &f, RHO).unwrap(), 0.0);
        assert!(foil_thrust(0.0, 1.0, 0.0, &f, 0.0).is_err());
    }

    #[test]
    fn pure_heave_thrust_positive_on_both_strokes() {
        let f = FoilSpec::default();
        let limit = 20f64.to_radians();
        // sinking glider: foil on the upper (nose-down) stop
        let down = foil_thrust(limit, -0.4, 0.0, &f, RHO).unwrap();
        // rising glider: foil feathered nose-up by the same angle
        let up = foil_thrust(-limit, 0.4, 0.0, &f, RHO).unwrap();
        assert!(down > 0.0, "downstroke thrust {down}");
        assert!(up > 0.0, "upstroke thrust {up}");
        assert!((down - up).abs() < 1e-12);
    }

    #[test]
    fn aligned_foil_only_drags() {
        let f = FoilSpec::default();
        for &(w, u) in &[(0.3, 0.5), (-0.3, 0.5), (0.0, 1.0), (0.7, 0.1)] {
            let phi = (-w as f64).atan2(u);
            let t = foil_thrust(phi, w, u, &f, RHO).unwrap();
            assert!(t <= 0.0, "w={w} u={u} thrust={t}");
        }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let unit = FoilUnit::default();
        let s = PitchState::default();
        let next = unit.pitch_step(s, 0.0, 0.0, RHO, 0.02).unwrap();
        assert_eq!(next, s);
        assert_eq!(unit.spring_moment(0.0), 0.0);
    }

    #[test]
    fn time_step_bounds() {
        let unit = FoilUnit::default();
        let s = PitchState::default();
        assert!(matches!(unit.pitch_step(s, 0.0, 0.0, RHO, 0.0), Err(FoilError::TimeStep(_))));
        assert!(matches!(unit.pitch_step(s, 0.0, 0.0, RHO, 0.051), Err(FoilError::TimeStep(_))));
        assert!(unit.pitch_step(s, 0.0, 0.0, RHO, 0.05).is_ok());
    }

    #[test]
    fn strong_upward_pull_feathers_to_relief_stop() {
        let unit = FoilUnit::default();
        let mut s = PitchState::default();
        let mut prev = s.angle;
        for _ in 0..100 {
            s = unit.pitch_step(s, 2.0, 0.0, RHO, 0.01).unwrap();
            assert!(s.angle <= prev + 1e-15, "not monotone: {} after {}", s.angle, prev);
            prev = s.angle;
        }
        assert_eq!(s.angle, -FRAC_PI_2);
        assert_eq!(s.at_stop, StopContact::LowerStop);
    }

    #[test]
    fn sinking_glider_drives_foil_to_upper_stop() {
        let unit = FoilUnit::default();
        let mut s = PitchState::default();
        for _ in 0..100 {
            s = unit.pitch_step(s, -1.0, 0.2, RHO, 0.01).unwrap();
        }
        assert_eq!(s.angle, unit.hinge.upper_stop());
        assert_eq!(s.at_stop, StopContact::UpperStop);
    }

    #[test]
    fn detent_holds_moderate_upstroke() {
        let unit = FoilUnit::default();
        let mut s = PitchState::default();
        for _ in 0..100 {
            s = unit.pitch_step(s, 0.4, 0.4, RHO, 0.01).unwrap();
        }
        assert_eq!(s.angle, unit.hinge.lower_limit());
        assert_eq!(s.at_stop, StopContact::LowerLimit);
    }

    #[test]
    fn weak_sinusoidal_heave_stays_inside_operational_range() {
        let unit = FoilUnit::default();
        let limit = unit.hinge.limit_angle;
        // brute-force the peak normal-force coefficient over incidence
        let peak_cn = (0..=18_000)
            .map(|i| {
                let a = (i as f64 / 100.0).to_radians();
                let (cl, cd) = lift_drag_coefficients(a, &unit.foil).unwrap();
                (cl * a.cos() + cd * a.sin()).abs()
            })
            .fold(0.0, f64::max);
        let spring_at_limit = unit.spring.torsional_stiffness() * limit;
        // amplitude whose worst-case hinge moment is 80% of the spring torque at the limit
        let amp = (0.8 * spring_at_limit
            / (0.5 * RHO * unit.foil.planform_area() * peak_cn * unit.hinge.pivot_arm))
            .sqrt();
        let period = 4.0;
        let dt = 0.01;
        let mut s = PitchState::default();
        for i in 0..4000 {
            let t = i as f64 * dt;
            let w = amp * (2.0 * PI * t / period).cos();
            s = unit.pitch_step(s, w, 0.0, RHO, dt).unwrap();
            assert!(s.angle.abs() < limit, "t={t} angle={}", s.angle.to_degrees());
            assert_eq!(s.at_stop, StopContact::Free);
        }
    }

    #[test]
    fn array_thrust_identity_at_single_foil() {
        let a = FoilArraySpec {
            count: 1,
            ..Default::default()
        };
        assert_eq!(array_thrust(2.5, &a).unwrap(), 2.5);
    }

    #[test]
    fn array_count_sweep_matches_enumerated_closed_form() {
        let mut prev: Option<f64> = None;
        let mut prev_inc = f64::INFINITY;
        for n in 1..=8u32 {
            let a = FoilArraySpec {
                count: n,
                ..Default::default()
            };
            let total = array_thrust(1.0, &a).unwrap();
            let oracle = n as f64 * (1.0 + 0.35 * (1.0 - 1.0 / n as f64));
            assert!((total - oracle).abs() < 1e-12);
            if let Some(p) = prev {
                let inc = total - p;
                assert!(inc > 0.0);
                assert!(inc <= prev_inc + 1e-12);
                prev_inc = inc;
            }
            prev = Some(total);
        }
    }

    #[test]
    fn doubled_spacing_scales_by_fourth_root_of_half() {
        let base = FoilArraySpec::default();
        let wide = FoilArraySpec {
            spacing: 2.0 * base.spacing,
            ..base
        };
        let ratio = array_thrust(1.0, &wide).unwrap() / array_thrust(1.0, &base).unwrap();
        assert!((ratio - 2f64.powf(-0.25)).abs() < 1e-12);
        assert!((ratio - 0.841).abs() < 1e-3);
    }

    #[test]
    fn spring_scaling() {
        let k = scale_spring_rate(2.9, 0.096, 0.039).unwrap();
        assert!((k - 1.178).abs() < 1e-3);
        assert_eq!(scale_spring_rate(3.3, 0.05, 0.05).unwrap(), 3.3);
        assert!((scale_spring_rate(2.9, 0.096, 0.048).unwrap() - 1.45).abs() < 1e-12);
        assert!(scale_spring_rate(0.0, 0.096, 0.039).is_err());
        assert!(scale_spring_rate(2.9, -1.0, 0.039).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn coefficients_symmetric(a in -FRAC_PI_2..FRAC_PI_2) {
                let f = FoilSpec::default();
                let (cl, cd) = lift_drag_coefficients(a, &f).unwrap();
                let (cln, cdn) = lift_drag_coefficients(-a, &f).unwrap();
                prop_assert_eq!(cl, -cln);
                prop_assert_eq!(cd, cdn);
                prop_assert!(cd >= f.zero_lift_drag_coeff);
            }

            #[test]
            fn pitch_never_leaves_slot(ws in proptest::collection::vec((-4.0f64..4.0, -1.0f64..2.0), 1..200)) {
                let unit = FoilUnit::default();
                let mut s = PitchState::default();
                for (w, u) in ws {
                    s = unit.pitch_step(s, w, u, RHO, 0.05).unwrap();
                    prop_assert!(s.angle <= unit.hinge.upper_stop());
                    prop_assert!(s.angle >= unit.hinge.relief_stop);
                }
            }

            #[test]
            fn spring_scaling_is_homogeneous(k in 0.01f64..100.0, c in 0.01f64..10.0, a in 0.001f64..1.0, b in 0.001f64..1.0) {
                let one = scale_spring_rate(k, a, b).unwrap();
                let scaled = scale_spring_rate(c * k, a, b).unwrap();
                prop_assert!((scaled - c * one).abs() <= 1e-12 * scaled.abs().max(1.0));
            }
        }
    }
}
