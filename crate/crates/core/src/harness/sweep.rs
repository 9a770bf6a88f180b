//! One-parameter sweeps over the foil array.

use rayon::prelude::*;
use serde::Serialize;

use super::{report, run, HarnessError};
use crate::foil::{array_thrust, captive_mean_thrust};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    FoilCount,
    /// Millimetres.
    Spacing,
    /// Degrees.
    LimitAngle,
    /// N/mm.
    SpringRate,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [
        SweepParam::FoilCount,
        SweepParam::Spacing,
        SweepParam::LimitAngle,
        SweepParam::SpringRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::FoilCount => "foil_count",
            SweepParam::Spacing => "spacing",
            SweepParam::LimitAngle => "limit_angle",
            SweepParam::SpringRate => "spring_rate",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParam::FoilCount => "count",
            SweepParam::Spacing => "mm",
            SweepParam::LimitAngle => "deg",
            SweepParam::SpringRate => "N/mm",
        }
    }

    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        Self::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|p| p.name()).collect();
            HarnessError::Usage(format!("unknown sweep parameter `{name}`; expected one of {}", names.join(", ")))
        })
    }

    /// Copies `base` with the parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, HarnessError> {
        let mut cfg = base.clone();
        let text = format!("{value}");
        let key = match self {
            SweepParam::FoilCount => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(HarnessError::Usage(format!("foil_count `{value}` must be a whole number")));
                }
                "array.count"
            }
            SweepParam::Spacing => "array.spacing",
            SweepParam::LimitAngle => "hinge.limit_angle",
            SweepParam::SpringRate => "spring.rate",
        };
        cfg.set(key, &text)
            .map_err(|e| HarnessError::Usage(format!("{}: {e:?}", self.name())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Captive cycle-mean thrust of one foil, N.
    pub per_foil_thrust: f64,
    /// Array total, N.
    pub cycle_mean_thrust: f64,
    /// Mean surge speed of a free run, m/s; absent when the run length is zero.
    pub mean_speed: Option<f64>,
}

/// Evaluates one configuration.
pub fn evaluate(cfg: &ScenarioConfig, value: f64) -> Result<SweepRow, HarnessError> {
    let unit = &cfg.vehicle.glider.foil;
    let sw = &cfg.sweep;
    let tow = if sw.tow_speed > 0.0 {
        sw.tow_speed
    } else {
        cfg.wave.peak_heave_rate()
    };
    let defect = |e: crate::foil::FoilError| HarnessError::Module {
        step: 0,
        module: "foil_propulsion",
        detail: e.to_string(),
    };
    let wave = &cfg.wave;
    let per_foil = captive_mean_thrust(
        unit,
        |t| wave.vertical_velocity(t),
        tow,
        cfg.vehicle.water_density,
        sw.dt,
        sw.settle,
        sw.window,
    )
    .map_err(defect)?;
    let total = array_thrust(per_foil, &cfg.vehicle.glider.array).map_err(defect)?;
    let mean_speed = if sw.run_duration > 0.0 {
        let mut free = cfg.clone();
        free.duration = sw.run_duration;
        Some(run(&free)?.summary.motion.mean_surge_speed)
    } else {
        None
    };
    Ok(SweepRow {
        value,
        per_foil_thrust: per_foil,
        cycle_mean_thrust: total,
        mean_speed,
    })
}

/// Runs one evaluation per value, in parallel, preserving input order.
pub fn sweep(param: SweepParam, values: &[f64], base: &ScenarioConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let configs = values
        .iter()
        .map(|&v| param.apply(base, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>, _>>()?;
    configs.par_iter().map(|(v, c)| evaluate(c, *v)).collect()
}

pub const SWEEP_SCHEMA: &str = "glider-sweep v1";

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let extra = format!("param={} unit={}", param.name(), param.unit());
    let mut w = report::csv_writer(
        SWEEP_SCHEMA,
        &extra,
        &["value", "per_foil_thrust", "cycle_mean_thrust", "mean_speed"],
    );
    for r in rows {
        w.write_record([
            format!("{}", r.value),
            format!("{}", r.per_foil_thrust),
            format!("{}", r.cycle_mean_thrust),
            r.mean_speed.map(|v| format!("{v}")).unwrap_or_default(),
        ])
        .expect("writing to memory");
    }
    report::finish(w)
}

/// Index of the largest total thrust.
pub fn argmax(rows: &[SweepRow]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .max_by(|a, b| a.1.cycle_mean_thrust.total_cmp(&b.1.cycle_mean_thrust))
        .map(|(i, _)| i)
}
