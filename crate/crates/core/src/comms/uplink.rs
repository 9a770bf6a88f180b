//! Telemetry cadence: one essential-fields frame per cadence tick.

use thiserror::Error;

use super::codec::{TelemetryFrame, TelemetryValues};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UplinkError {
    #[error("cadence {cadence} s is not a positive whole number of {dt} s steps")]
    Cadence { cadence: f64, dt: f64 },
}

/// Emits frames on an integer step grid so that long runs never drift.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkPolicy {
    cadence_steps: u64,
    next_seq: u16,
}

impl UplinkPolicy {
    pub fn new(cadence: f64, dt: f64) -> Result<Self, UplinkError> {
        let steps = (cadence / dt).round();
        if !(cadence > 0.0 && steps >= 1.0 && ((steps * dt) - cadence).abs() <= 1e-9 * cadence.max(1.0)) {
            return Err(UplinkError::Cadence { cadence, dt });
        }
        Ok(Self {
            cadence_steps: steps as u64,
            next_seq: 0,
        })
    }

    pub fn cadence_steps(&self) -> u64 {
        self.cadence_steps
    }

    /// True after every `cadence` seconds of simulated time (step 0 excluded).
    pub fn is_due(&self, step: u64) -> bool {
        step > 0 && step % self.cadence_steps == 0
    }

    /// Quantizes the latest values into the next frame in sequence.
    pub fn frame(&mut self, values: &TelemetryValues) -> TelemetryFrame {
        let f = uplink_frame(values, self.next_seq);
        self.next_seq = self.next_seq.wrapping_add(1);
        f
    }
}

pub fn uplink_frame(values: &TelemetryValues, seq: u16) -> TelemetryFrame {
    TelemetryFrame::quantize(seq, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_frames_per_hour() {
        let p = UplinkPolicy::new(600.0, 0.02).unwrap();
        let n = (3600.0f64 / 0.02).round() as u64;
        assert_eq!((0..=n).filter(|&s| p.is_due(s)).count(), 6);
    }

    #[test]
    fn sequence_increments() {
        let mut p = UplinkPolicy::new(10.0, 0.5).unwrap();
        let v = TelemetryValues::default();
        assert_eq!(p.frame(&v).seq, 0);
        assert_eq!(p.frame(&v).seq, 1);
    }

    #[test]
    fn off_grid_cadence_rejected() {
        assert!(UplinkPolicy::new(0.03, 0.02).is_err());
        assert!(UplinkPolicy::new(0.0, 0.02).is_err());
    }
}
