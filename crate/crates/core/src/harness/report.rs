//! CSV layouts and the run summary derived from them.
//!
//! The summary is computed from CSV text only, so `replay` on a finished
//! artifact directory reproduces it exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const STATE_SCHEMA: &str = "glider-state v1";
pub const ENERGY_SCHEMA: &str = "glider-energy v1";
pub const LINKS_SCHEMA: &str = "glider-links v1";
pub const SUMMARY_SCHEMA: &str = "glider-summary v1";

pub const STATE_COLUMNS: &[&str] = &[
    "t",
    "x",
    "y",
    "lat",
    "lon",
    "heading_deg",
    "yaw_rate",
    "surge_speed",
    "heave",
    "heave_rate",
    "glider_heave_rate",
    "glider_depth",
    "tether_tension",
    "tether_taut",
    "rudder_deg",
    "desired_heading_deg",
    "heading_error_deg",
    "foil_pitch_deg",
    "foil_thrust",
    "roll_deg",
    "capsized",
    "mode",
    "target_index",
    "arrived",
    "mission_version",
    "sea_state",
    "soc",
    "conductivity",
    "temperature",
    "dissolved_oxygen",
    "ph",
];

pub const ENERGY_COLUMNS: &[&str] = &[
    "t",
    "interval_s",
    "solar_available_wh",
    "solar_in_wh",
    "solar_bus_wh",
    "servo_wh",
    "thruster_wh",
    "winch_wh",
    "electronics_wh",
    "comms_wh",
    "load_wh",
    "battery_delta_wh",
    "charge_loss_wh",
    "soc",
    "backup_soc",
    "on_backup",
    "load_shed_steps",
];

pub const LINK_COLUMNS: &[&str] = &[
    "t",
    "channel",
    "direction",
    "event",
    "msg_type",
    "seq",
    "bytes",
    "deliver_at",
    "cost",
    "detail",
];

/// Writes a schema comment line followed by a CSV header.
pub(crate) fn csv_writer(schema: &str, extra: &str, columns: &[&str]) -> csv::Writer<Vec<u8>> {
    let mut head = format!("# {schema}");
    if !extra.is_empty() {
        head.push(' ');
        head.push_str(extra);
    }
    head.push('\n');
    let mut w = csv::WriterBuilder::new().from_writer(head.into_bytes());
    w.write_record(columns).expect("writing to memory");
    w
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("flushing to memory");
    String::from_utf8(bytes).expect("CSV cells are UTF-8")
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionSummary {
    pub mean_surge_speed: f64,
    pub max_surge_speed: f64,
    pub distance_m: f64,
    pub final_x: f64,
    pub final_y: f64,
    pub min_tether_tension: f64,
    pub slack_rows: u64,
    pub max_abs_rudder_deg: f64,
    pub capsized_rows: u64,
    pub waypoints_arrived: u64,
    pub mission_version: u64,
    pub last_sea_state: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergySummary {
    pub installed_wh: f64,
    pub cycling_wh: f64,
    pub solar_available_wh: f64,
    pub solar_in_wh: f64,
    pub solar_bus_wh: f64,
    pub servo_wh: f64,
    pub thruster_wh: f64,
    pub winch_wh: f64,
    pub electronics_wh: f64,
    pub comms_wh: f64,
    pub load_wh: f64,
    pub battery_delta_wh: f64,
    pub charge_loss_wh: f64,
    /// solar_bus − loads − Δbattery, summed over the run.
    pub ledger_residual_wh: f64,
    pub final_soc: f64,
    pub min_soc: f64,
    pub backup_rows: u64,
    pub load_shed_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkSummary {
    pub uplink_sent: u64,
    pub uplink_delivered: u64,
    pub uplink_rejected: u64,
    pub telemetry_delivered: u64,
    pub acks_delivered: u64,
    pub downlink_sent: u64,
    pub downlink_delivered: u64,
    pub commands_applied: u64,
    pub commands_rejected: u64,
    pub missions_posted: u64,
    pub rf_delivered: u64,
    pub rf_dropped: u64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub duration_s: f64,
    pub state_rows: u64,
    pub motion: MotionSummary,
    pub energy: EnergySummary,
    pub links: LinkSummary,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

struct Table {
    index: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
    meta: HashMap<String, String>,
    name: &'static str,
}

impl Table {
    fn parse(name: &'static str, schema: &str, text: &str) -> Result<Self, HarnessError> {
        let bad = |m: String| HarnessError::Replay(format!("{name}: {m}"));
        let first = text.lines().next().unwrap_or("");
        let head = first
            .strip_prefix("# ")
            .ok_or_else(|| bad("missing schema comment".into()))?;
        if !head.starts_with(schema) {
            return Err(bad(format!("expected schema `{schema}`, found `{head}`")));
        }
        let meta = head[schema.len()..]
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let index = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = r
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        Ok(Self { index, rows, meta, name })
    }

    fn col(&self, column: &str) -> Result<usize, HarnessError> {
        self.index
            .get(column)
            .copied()
            .ok_or_else(|| HarnessError::Replay(format!("{}: missing column {column}", self.name)))
    }

    fn str_at<'a>(&self, row: &'a csv::StringRecord, column: usize) -> &'a str {
        row.get(column).unwrap_or("")
    }

    fn f64_at(&self, row: &csv::StringRecord, column: usize) -> Result<f64, HarnessError> {
        let s = self.str_at(row, column);
        s.parse()
            .map_err(|_| HarnessError::Replay(format!("{}: `{s}` is not a number", self.name)))
    }

    fn opt_at(&self, row: &csv::StringRecord, column: usize) -> Result<Option<f64>, HarnessError> {
        match self.str_at(row, column) {
            "" => Ok(None),
            _ => self.f64_at(row, column).map(Some),
        }
    }

    fn meta_f64(&self, key: &str) -> Result<f64, HarnessError> {
        self.meta
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| HarnessError::Replay(format!("{}: schema line lacks {key}", self.name)))
    }
}

fn motion(state: &Table) -> Result<(MotionSummary, f64, u64), HarnessError> {
    let [t, x, y, speed, tension, taut, rudder, capsized, arrived, version, sea] = [
        "t",
        "x",
        "y",
        "surge_speed",
        "tether_tension",
        "tether_taut",
        "rudder_deg",
        "capsized",
        "arrived",
        "mission_version",
        "sea_state",
    ]
    .map(|c| state.col(c));
    let (t, x, y, speed, tension, taut, rudder, capsized, arrived, version, sea) =
        (t?, x?, y?, speed?, tension?, taut?, rudder?, capsized?, arrived?, version?, sea?);
    let mut m = MotionSummary {
        min_tether_tension: f64::INFINITY,
        ..Default::default()
    };
    let mut sum_speed = 0.0;
    let mut last_t = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for row in &state.rows {
        let v = state.f64_at(row, speed)?;
        sum_speed += v;
        m.max_surge_speed = m.max_surge_speed.max(v);
        let (px, py) = (state.f64_at(row, x)?, state.f64_at(row, y)?);
        if let Some((ox, oy)) = prev {
            m.distance_m += (px - ox).hypot(py - oy);
        }
        prev = Some((px, py));
        m.final_x = px;
        m.final_y = py;
        m.min_tether_tension = m.min_tether_tension.min(state.f64_at(row, tension)?);
        if state.str_at(row, taut) == "0" {
            m.slack_rows += 1;
        }
        m.max_abs_rudder_deg = m.max_abs_rudder_deg.max(state.f64_at(row, rudder)?.abs());
        if state.str_at(row, capsized) == "1" {
            m.capsized_rows += 1;
        }
        m.waypoints_arrived = m.waypoints_arrived.max(state.f64_at(row, arrived)? as u64);
        m.mission_version = state.f64_at(row, version)? as u64;
        if let Some(h) = state.opt_at(row, sea)? {
            m.last_sea_state = Some(h);
        }
        last_t = state.f64_at(row, t)?;
    }
    let n = state.rows.len() as u64;
    if n > 0 {
        m.mean_surge_speed = sum_speed / n as f64;
    } else {
        m.min_tether_tension = 0.0;
    }
    Ok((m, last_t, n))
}

fn energy(table: &Table) -> Result<EnergySummary, HarnessError> {
    let mut e = EnergySummary {
        installed_wh: table.meta_f64("installed_wh")?,
        cycling_wh: table.meta_f64("cycling_wh")?,
        min_soc: f64::INFINITY,
        ..Default::default()
    };
    let c = |name: &str| table.col(name);
    let (avail, solar_in, bus, servo, thruster, winch, electronics, comms, load, delta, loss, soc, backup, shed) = (
        c("solar_available_wh")?,
        c("solar_in_wh")?,
        c("solar_bus_wh")?,
        c("servo_wh")?,
        c("thruster_wh")?,
        c("winch_wh")?,
        c("electronics_wh")?,
        c("comms_wh")?,
        c("load_wh")?,
        c("battery_delta_wh")?,
        c("charge_loss_wh")?,
        c("soc")?,
        c("on_backup")?,
        c("load_shed_steps")?,
    );
    for row in &table.rows {
        let f = |i| table.f64_at(row, i);
        e.solar_available_wh += f(avail)?;
        e.solar_in_wh += f(solar_in)?;
        let b = f(bus)?;
        e.solar_bus_wh += b;
        e.servo_wh += f(servo)?;
        e.thruster_wh += f(thruster)?;
        e.winch_wh += f(winch)?;
        e.electronics_wh += f(electronics)?;
        e.comms_wh += f(comms)?;
        let l = f(load)?;
        e.load_wh += l;
        let d = f(delta)?;
        e.battery_delta_wh += d;
        e.ledger_residual_wh += b - l - d;
        e.charge_loss_wh += f(loss)?;
        let s = f(soc)?;
        e.final_soc = s;
        e.min_soc = e.min_soc.min(s);
        if table.str_at(row, backup) == "1" {
            e.backup_rows += 1;
        }
        e.load_shed_steps += f(shed)? as u64;
    }
    if table.rows.is_empty() {
        e.min_soc = table.meta_f64("initial_soc")?;
        e.final_soc = e.min_soc;
    }
    Ok(e)
}

fn links(table: &Table) -> Result<LinkSummary, HarnessError> {
    let mut s = LinkSummary::default();
    let (channel, direction, event, msg_type, cost, detail) = (
        table.col("channel")?,
        table.col("direction")?,
        table.col("event")?,
        table.col("msg_type")?,
        table.col("cost")?,
        table.col("detail")?,
    );
    for row in &table.rows {
        let g = |i| table.str_at(row, i);
        match (g(channel), g(direction), g(event)) {
            ("sat", "uplink", "sent") => {
                s.uplink_sent += 1;
                s.cost += table.f64_at(row, cost)?;
            }
            ("sat", "uplink", "rejected") => s.uplink_rejected += 1,
            ("sat", "uplink", "delivered") => {
                s.uplink_delivered += 1;
                match g(msg_type) {
                    "telemetry" => s.telemetry_delivered += 1,
                    "ack" => s.acks_delivered += 1,
                    _ => {}
                }
            }
            ("sat", "downlink", "sent") => {
                s.downlink_sent += 1;
                s.cost += table.f64_at(row, cost)?;
            }
            ("sat", "downlink", "delivered") => {
                s.downlink_delivered += 1;
                match g(detail) {
                    "applied" => s.commands_applied += 1,
                    d if d.starts_with("rejected") => s.commands_rejected += 1,
                    _ => {}
                }
            }
            ("station", _, "posted") => s.missions_posted += 1,
            ("rf", _, "delivered") => s.rf_delivered += 1,
            ("rf", _, "dropped") => s.rf_dropped += 1,
            _ => {}
        }
    }
    Ok(s)
}

/// Recomputes the run summary from the three CSV texts.
pub fn summarize(state_csv: &str, energy_csv: &str, links_csv: &str) -> Result<Summary, HarnessError> {
    let state = Table::parse("state.csv", STATE_SCHEMA, state_csv)?;
    let energy_t = Table::parse("energy.csv", ENERGY_SCHEMA, energy_csv)?;
    let links_t = Table::parse("links.csv", LINKS_SCHEMA, links_csv)?;
    let (motion, duration_s, state_rows) = motion(&state)?;
    Ok(Summary {
        schema: SUMMARY_SCHEMA.to_string(),
        duration_s,
        state_rows,
        motion,
        energy: energy(&energy_t)?,
        links: links(&links_t)?,
    })
}
