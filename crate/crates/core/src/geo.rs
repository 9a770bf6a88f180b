//! Local planar frame anchored at a geographic origin.

use serde::{Deserialize, Serialize};

const EARTH_RADIUS: f64 = 6_371_008.8;

/// Equirectangular projection about `(lat, lon)` in degrees; x east, y north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoOrigin {
    pub lat: f64,
    pub lon: f64,
}

impl Default for GeoOrigin {
    fn default() -> Self {
        Self { lat: 59.9, lon: 10.7 }
    }
}

impl GeoOrigin {
    pub fn to_local(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = (lon - self.lon).to_radians() * EARTH_RADIUS * self.lat.to_radians().cos();
        let y = (lat - self.lat).to_radians() * EARTH_RADIUS;
        (x, y)
    }

    pub fn to_geo(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.lat + (y / EARTH_RADIUS).to_degrees();
        let lon = self.lon + (x / (EARTH_RADIUS * self.lat.to_radians().cos())).to_degrees();
        (lat, lon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let o = GeoOrigin::default();
        for &(x, y) in &[(0.0, 0.0), (200.0, -350.0), (-1500.0, 2500.0)] {
            let (lat, lon) = o.to_geo(x, y);
            let (x2, y2) = o.to_local(lat, lon);
            assert!((x - x2).abs() < 1e-6 && (y - y2).abs() < 1e-6);
        }
    }

    #[test]
    fn one_degree_of_latitude() {
        let o = GeoOrigin { lat: 0.0, lon: 0.0 };
        let (_, y) = o.to_local(1.0, 0.0);
        assert!((y - 111_195.08).abs() < 0.1);
    }
}
