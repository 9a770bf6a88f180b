//! Surface elevation as a sum of linear wave components.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    /// Elevation amplitude (half the crest-to-trough height), m.
    pub amplitude: f64,
    pub period: f64,
    /// Radians.
    pub phase: f64,
}

impl WaveComponent {
    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSpec {
    pub components: Vec<WaveComponent>,
}

impl Default for WaveSpec {
    /// Regular wave, 0.5 m height and 4 s period.
    fn default() -> Self {
        Self::regular(0.25, 4.0)
    }
}

impl WaveSpec {
    pub fn regular(amplitude: f64, period: f64) -> Self {
        Self {
            components: vec![WaveComponent {
                amplitude,
                period,
                phase: 0.0,
            }],
        }
    }

    pub fn calm() -> Self {
        Self { components: Vec::new() }
    }

    pub fn elevation(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * (c.omega() * t + c.phase).cos())
            .sum()
    }

    pub fn vertical_velocity(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| -c.amplitude * c.omega() * (c.omega() * t + c.phase).sin())
            .sum()
    }

    pub fn vertical_acceleration(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| -c.amplitude * c.omega() * c.omega() * (c.omega() * t + c.phase).cos())
            .sum()
    }

    /// Upper bound on |vertical velocity|.
    pub fn peak_heave_rate(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude.abs() * c.omega()).sum()
    }

    /// Period of the largest-amplitude component, if any.
    pub fn dominant_period(&self) -> Option<f64> {
        self.components
            .iter()
            .max_by(|a, b| a.amplitude.abs().total_cmp(&b.amplitude.abs()))
            .map(|c| c.period)
    }

    pub fn significant_height(&self) -> f64 {
        let m0: f64 = self.components.iter().map(|c| 0.5 * c.amplitude * c.amplitude).sum();
        4.0 * m0.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let w = WaveSpec {
            components: vec![
                WaveComponent { amplitude: 0.3, period: 5.0, phase: 0.4 },
                WaveComponent { amplitude: 0.1, period: 2.7, phase: -1.0 },
            ],
        };
        let h = 1e-5;
        for &t in &[0.0, 1.3, 7.9, 100.25] {
            let dv = (w.elevation(t + h) - w.elevation(t - h)) / (2.0 * h);
            let da = (w.vertical_velocity(t + h) - w.vertical_velocity(t - h)) / (2.0 * h);
            assert!((dv - w.vertical_velocity(t)).abs() < 1e-7);
            assert!((da - w.vertical_acceleration(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn calm_sea_is_flat() {
        let w = WaveSpec::calm();
        assert_eq!(w.elevation(3.0), 0.0);
        assert_eq!(w.peak_heave_rate(), 0.0);
        assert_eq!(w.dominant_period(), None);
    }

    #[test]
    fn regular_wave_peak_rate() {
        let w = WaveSpec::regular(0.25, 4.0);
        assert!((w.peak_heave_rate() - 0.25 * PI / 2.0).abs() < 1e-15);
        assert!((w.significant_height() - 4.0 * 0.25 / 2f64.sqrt()).abs() < 1e-12);
    }
}
