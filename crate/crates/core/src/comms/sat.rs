//! Store-and-forward satellite link.
//!
//! Each direction is a FIFO. A frame handed over at `t` leaves at the
//! first open window at or after both `t` and the previous departure in
//! the same direction, and arrives `latency` seconds later.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SatError {
    #[error("{len}-byte frame exceeds the {mtu}-byte {direction:?} MTU")]
    Mtu { len: usize, mtu: usize, direction: Direction },
    #[error("invalid link configuration: {0}")]
    Config(String),
}

/// Uplink is vehicle to station, downlink station to vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Availability {
    #[default]
    Always,
    /// Open for `open` seconds at the start of every `period`, shifted by `offset`.
    Periodic { period: f64, open: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatLinkSpec {
    pub uplink_mtu: usize,
    pub downlink_mtu: usize,
    pub latency: f64,
    pub per_message_cost: f64,
    pub availability: Availability,
    /// Half-open `[start, end)` intervals with no service.
    pub outages: Vec<(f64, f64)>,
}

impl Default for SatLinkSpec {
    fn default() -> Self {
        Self {
            uplink_mtu: 340,
            downlink_mtu: 270,
            latency: 60.0,
            per_message_cost: 1.0,
            availability: Availability::Always,
            outages: Vec::new(),
        }
    }
}

impl SatLinkSpec {
    pub fn validate(&self) -> Result<(), SatError> {
        if self.uplink_mtu == 0 || self.downlink_mtu == 0 {
            return Err(SatError::Config("MTU must be positive".into()));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(SatError::Config("latency must be >= 0".into()));
        }
        if !(self.per_message_cost >= 0.0) {
            return Err(SatError::Config("per_message_cost must be >= 0".into()));
        }
        if let Availability::Periodic { period, open, offset } = self.availability {
            if !(period > 0.0 && open > 0.0 && open <= period && offset.is_finite()) {
                return Err(SatError::Config("window requires 0 < open <= period".into()));
            }
        }
        for &(a, b) in &self.outages {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(SatError::Config(format!("outage [{a}, {b}) is empty or not finite")));
            }
        }
        Ok(())
    }

    pub fn mtu(&self, direction: Direction) -> usize {
        match direction {
            Direction::Uplink => self.uplink_mtu,
            Direction::Downlink => self.downlink_mtu,
        }
    }

    fn in_outage(&self, t: f64) -> Option<f64> {
        self.outages.iter().filter(|(a, b)| t >= *a && t < *b).map(|(_, b)| *b).reduce(f64::max)
    }

    pub fn is_open(&self, t: f64) -> bool {
        self.in_outage(t).is_none() && self.scheduled_open(t)
    }

    fn scheduled_open(&self, t: f64) -> bool {
        match self.availability {
            Availability::Always => true,
            Availability::Periodic { period, open, offset } => (t - offset).rem_euclid(period) < open,
        }
    }

    /// Earliest time ≥ `t` at which the link is open.
    pub fn next_open(&self, t: f64) -> f64 {
        let mut c = t;
        // each pass moves past one outage or to one window start
        for _ in 0..(2 * self.outages.len() + 4) {
            if let Some(end) = self.in_outage(c) {
                c = end;
                continue;
            }
            match self.availability {
                Availability::Always => return c,
                Availability::Periodic { period, offset, .. } => {
                    if self.scheduled_open(c) {
                        return c;
                    }
                    let k = ((c - offset) / period).floor() + 1.0;
                    c = offset + k * period;
                }
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InFlight {
    pub id: u64,
    pub direction: Direction,
    pub bytes: Vec<u8>,
    pub sent_at: f64,
    pub departs_at: f64,
    pub deliver_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub id: u64,
    pub deliver_at: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Lane {
    queue: VecDeque<InFlight>,
    last_departure: f64,
    sent: u64,
    delivered: u64,
    rejected: u64,
    cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatLink {
    spec: SatLinkSpec,
    up: Lane,
    down: Lane,
    next_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LaneStats {
    pub sent: u64,
    pub delivered: u64,
    pub rejected: u64,
    pub in_flight: u64,
    pub cost: f64,
}

impl SatLink {
    pub fn new(spec: SatLinkSpec) -> Self {
        Self {
            spec,
            up: Lane {
                last_departure: f64::NEG_INFINITY,
                ..Default::default()
            },
            down: Lane {
                last_departure: f64::NEG_INFINITY,
                ..Default::default()
            },
            next_id: 0,
        }
    }

    pub fn spec(&self) -> &SatLinkSpec {
        &self.spec
    }

    pub fn add_outage(&mut self, start: f64, end: f64) {
        self.spec.outages.push((start, end));
    }

    fn lane(&mut self, d: Direction) -> &mut Lane {
        match d {
            Direction::Uplink => &mut self.up,
            Direction::Downlink => &mut self.down,
        }
    }

    /// Queues a frame for delivery or rejects it for size.
    pub fn transmit(&mut self, direction: Direction, bytes: &[u8], t: f64) -> Result<Delivery, SatError> {
        let mtu = self.spec.mtu(direction);
        if bytes.len() > mtu {
            self.lane(direction).rejected += 1;
            return Err(SatError::Mtu {
                len: bytes.len(),
                mtu,
                direction,
            });
        }
        let lane_last = match direction {
            Direction::Uplink => self.up.last_departure,
            Direction::Downlink => self.down.last_departure,
        };
        let departs_at = self.spec.next_open(t.max(lane_last));
        let deliver_at = departs_at + self.spec.latency;
        let cost = self.spec.per_message_cost;
        let id = self.next_id;
        self.next_id += 1;
        let lane = self.lane(direction);
        lane.last_departure = departs_at;
        lane.sent += 1;
        lane.cost += cost;
        lane.queue.push_back(InFlight {
            id,
            direction,
            bytes: bytes.to_vec(),
            sent_at: t,
            departs_at,
            deliver_at,
        });
        Ok(Delivery { id, deliver_at, cost })
    }

    /// Removes and returns every frame due by `t`, in send order.
    pub fn poll(&mut self, direction: Direction, t: f64) -> Vec<InFlight> {
        let lane = self.lane(direction);
        let mut out = Vec::new();
        while lane.queue.front().is_some_and(|f| f.deliver_at <= t) {
            out.extend(lane.queue.pop_front());
        }
        lane.delivered += out.len() as u64;
        out
    }

    pub fn stats(&self, direction: Direction) -> LaneStats {
        let lane = match direction {
            Direction::Uplink => &self.up,
            Direction::Downlink => &self.down,
        };
        LaneStats {
            sent: lane.sent,
            delivered: lane.delivered,
            rejected: lane.rejected,
            in_flight: lane.queue.len() as u64,
            cost: lane.cost,
        }
    }
}

/// One-shot helper: schedule a single frame on an otherwise idle link.
pub fn sat_transmit(bytes: &[u8], direction: Direction, spec: &SatLinkSpec, t: f64) -> Result<Delivery, SatError> {
    SatLink::new(spec.clone()).transmit(direction, bytes, t)
}
