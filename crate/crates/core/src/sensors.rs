//! Synthetic water-quality fields and the four probe models.

use std::f64::consts::{LN_10, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const NOISE_COMPONENTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("sample time {t} s precedes last sample at {last} s")]
    TimeReversed { t: f64, last: f64 },
    #[error("non-finite truth value {0}")]
    NonFinite(f64),
    #[error("invalid sensor configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Conductivity,
    Temperature,
    DissolvedOxygen,
    Ph,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::Conductivity,
        SensorKind::Temperature,
        SensorKind::DissolvedOxygen,
        SensorKind::Ph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Conductivity => "conductivity",
            SensorKind::Temperature => "temperature",
            SensorKind::DissolvedOxygen => "dissolved_oxygen",
            SensorKind::Ph => "ph",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn unit(self) -> &'static str {
        match self {
            SensorKind::Conductivity => "uS/cm",
            SensorKind::Temperature => "degC",
            SensorKind::DissolvedOxygen => "mg/L",
            SensorKind::Ph => "pH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Accuracy {
    Absolute { bound: f64 },
    /// Fraction of the true value.
    Relative { fraction: f64 },
    /// `offset + slope·|truth|`.
    Linear { offset: f64, slope: f64 },
}

impl Accuracy {
    pub fn bound_at(&self, truth: f64) -> f64 {
        match *self {
            Accuracy::Absolute { bound } => bound,
            Accuracy::Relative { fraction } => fraction * truth.abs(),
            Accuracy::Linear { offset, slope } => offset + slope * truth.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResponseModel {
    FirstOrder { tau: f64 },
    /// Units per second.
    Slew { rate: f64 },
}

impl ResponseModel {
    /// Single pole reaching `fraction` of a step after `seconds`.
    pub fn settling(fraction: f64, seconds: f64) -> Self {
        ResponseModel::FirstOrder {
            tau: seconds / -(1.0 - fraction).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub kind: SensorKind,
    pub range_min: f64,
    pub range_max: f64,
    pub accuracy: Accuracy,
    pub response: ResponseModel,
    pub max_depth: f64,
    pub noise_enabled: bool,
}

impl SensorSpec {
    pub fn default_for(kind: SensorKind) -> Self {
        let (range_min, range_max, accuracy, response) = match kind {
            SensorKind::Conductivity => (
                10.0,
                1.0e6,
                Accuracy::Relative { fraction: 0.02 },
                ResponseModel::FirstOrder { tau: 1.0 / LN_10 },
            ),
            SensorKind::Temperature => (
                -200.0,
                850.0,
                Accuracy::Linear {
                    offset: 0.15,
                    slope: 0.002,
                },
                ResponseModel::FirstOrder { tau: 13.0 / LN_10 },
            ),
            SensorKind::DissolvedOxygen => (
                1.0,
                50.0,
                Accuracy::Absolute { bound: 0.2 },
                ResponseModel::Slew { rate: 0.5 },
            ),
            SensorKind::Ph => (
                0.0,
                14.0,
                Accuracy::Absolute { bound: 0.002 },
                ResponseModel::FirstOrder {
                    tau: 1.0 / 20f64.ln(),
                },
            ),
        };
        Self {
            kind,
            range_min,
            range_max,
            accuracy,
            response,
            max_depth: 60.0,
            noise_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let name = self.kind.name();
        if !(self.range_min < self.range_max) {
            return Err(SensorError::Config(format!("{name}: range_min must be below range_max")));
        }
        let ok = match self.response {
            ResponseModel::FirstOrder { tau } => tau > 0.0,
            ResponseModel::Slew { rate } => rate > 0.0,
        };
        if !ok {
            return Err(SensorError::Config(format!("{name}: response constant must be positive")));
        }
        if !(self.max_depth > 0.0) {
            return Err(SensorError::Config(format!("{name}: max_depth must be positive")));
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.range_min, self.range_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorState {
    pub internal_value: f64,
    pub last_t: f64,
}

impl SensorState {
    pub fn new(spec: &SensorSpec, initial: f64, t: f64) -> Self {
        Self {
            internal_value: spec.clamp(initial),
            last_t: t,
        }
    }
}

/// Advances the probe to time `t` and returns the new state and a reading.
pub fn sample(
    spec: &SensorSpec,
    state: SensorState,
    truth: f64,
    t: f64,
    rng: &mut impl Rng,
) -> Result<(SensorState, f64), SensorError> {
    if !truth.is_finite() {
        return Err(SensorError::NonFinite(truth));
    }
    if t < state.last_t {
        return Err(SensorError::TimeReversed { t, last: state.last_t });
    }
    let elapsed = t - state.last_t;
    let internal = match spec.response {
        ResponseModel::FirstOrder { tau } => truth + (state.internal_value - truth) * (-elapsed / tau).exp(),
        ResponseModel::Slew { rate } => {
            let max_move = rate * elapsed;
            state.internal_value + (truth - state.internal_value).clamp(-max_move, max_move)
        }
    };
    let internal = spec.clamp(internal);
    let noise = if spec.noise_enabled {
        let b = spec.accuracy.bound_at(truth);
        if b > 0.0 {
            rng.gen_range(-b..=b)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let reading = spec.clamp(internal + noise);
    Ok((
        SensorState {
            internal_value: internal,
            last_t: t,
        },
        reading,
    ))
}

/// Where the probes are mounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SensorMount {
    #[default]
    Float,
    Glider,
}

impl SensorMount {
    pub fn sample_depth(self, glider_depth: f64) -> f64 {
        match self {
            SensorMount::Float => 0.0,
            SensorMount::Glider => glider_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvFieldSpec {
    pub base: f64,
    /// Units per metre along (x, y).
    pub gradient: [f64; 2],
    pub diurnal_amplitude: f64,
    pub diurnal_period: f64,
    pub noise_amplitude: f64,
    pub noise_seed: u64,
}

impl EnvFieldSpec {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            gradient: [0.0, 0.0],
            diurnal_amplitude: 0.0,
            diurnal_period: 86_400.0,
            noise_amplitude: 0.0,
            noise_seed: 0,
        }
    }

    pub fn default_for(kind: SensorKind) -> Self {
        let (base, diurnal, noise) = match kind {
            SensorKind::Conductivity => (50_000.0, 500.0, 200.0),
            SensorKind::Temperature => (15.0, 0.8, 0.1),
            SensorKind::DissolvedOxygen => (8.0, 0.5, 0.1),
            SensorKind::Ph => (8.1, 0.05, 0.01),
        };
        Self {
            base,
            gradient: [0.0, 0.0],
            diurnal_amplitude: diurnal,
            diurnal_period: 86_400.0,
            noise_amplitude: noise,
            noise_seed: kind as u64 + 1,
        }
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let all_finite = [self.base, self.gradient[0], self.gradient[1], self.diurnal_amplitude, self.noise_amplitude]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(SensorError::Config("field parameters must be finite".into()));
        }
        if !(self.diurnal_period > 0.0) {
            return Err(SensorError::Config("diurnal_period must be positive".into()));
        }
        if self.noise_amplitude < 0.0 {
            return Err(SensorError::Config("noise_amplitude must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ripple {
    kx: f64,
    ky: f64,
    omega: f64,
    phase: f64,
}

/// A truth field with its seeded ripples drawn once.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvField {
    spec: EnvFieldSpec,
    ripples: [Ripple; NOISE_COMPONENTS],
}

impl EnvField {
    pub fn new(spec: EnvFieldSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
        let ripples = std::array::from_fn(|_| {
            let wavelength: f64 = rng.gen_range(200.0..2000.0);
            let direction: f64 = rng.gen_range(0.0..2.0 * PI);
            let period: f64 = rng.gen_range(600.0..7200.0);
            let k = 2.0 * PI / wavelength;
            Ripple {
                kx: k * direction.cos(),
                ky: k * direction.sin(),
                omega: 2.0 * PI / period,
                phase: rng.gen_range(0.0..2.0 * PI),
            }
        });
        Self { spec, ripples }
    }

    pub fn spec(&self) -> &EnvFieldSpec {
        &self.spec
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        let s = &self.spec;
        let mut v = s.base + s.gradient[0] * x + s.gradient[1] * y;
        if s.diurnal_amplitude != 0.0 {
            v += s.diurnal_amplitude * (2.0 * PI * t / s.diurnal_period).sin();
        }
        if s.noise_amplitude != 0.0 {
            let sum: f64 = self
                .ripples
                .iter()
                .map(|r| (r.kx * x + r.ky * y - r.omega * t + r.phase).sin())
                .sum();
            v += s.noise_amplitude * sum / (NOISE_COMPONENTS as f64).sqrt();
        }
        v
    }
}

/// Truth value of a field at a point.
pub fn truth(field: &EnvFieldSpec, x: f64, y: f64, t: f64) -> f64 {
    EnvField::new(*field).value(x, y, t)
}
