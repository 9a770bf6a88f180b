//! Solar array, MPPT charge controller and battery bank.
//!
//! The battery is coulomb counted at its nominal voltage. Every step
//! produces a [`PowerTick`] whose bus ledger closes exactly:
//! `solar_in·η·dt = Σloads·dt + battery_delta`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("irradiance fraction {0} outside [0, 1]")]
    Irradiance(f64),
    #[error("load {name} = {value} W is negative or not finite")]
    Load { name: &'static str, value: f64 },
    #[error("time step {0} s must be positive")]
    TimeStep(f64),
    #[error("solar input {0} W must be finite and non-negative")]
    Solar(f64),
    #[error("power ticks out of order: t={later} follows t={earlier}")]
    Unordered { earlier: f64, later: f64 },
    #[error("invalid power configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarArraySpec {
    pub panel_count: u32,
    pub panel_open_voltage: f64,
    pub panel_peak_power: f64,
    pub diode_drop: f64,
}

impl Default for SolarArraySpec {
    fn default() -> Self {
        Self {
            panel_count: 3,
            panel_open_voltage: 18.0,
            panel_peak_power: 30.0,
            diode_drop: 0.4,
        }
    }
}

impl SolarArraySpec {
    pub fn validate(&self) -> Result<(), PowerError> {
        if self.panel_count == 0 {
            return Err(PowerError::Config("solar.panel_count must be at least 1".into()));
        }
        if !(self.panel_open_voltage > 0.0) {
            return Err(PowerError::Config("solar.panel_open_voltage must be positive".into()));
        }
        if !(self.panel_peak_power >= 0.0) {
            return Err(PowerError::Config("solar.panel_peak_power must be >= 0".into()));
        }
        if !(self.diode_drop >= 0.0 && self.diode_drop < self.panel_open_voltage) {
            return Err(PowerError::Config(
                "solar.diode_drop must lie in [0, panel_open_voltage)".into(),
            ));
        }
        Ok(())
    }

    fn diode_factor(&self) -> f64 {
        1.0 - self.diode_drop / self.panel_open_voltage
    }
}

/// Array output in watts for a uniform irradiance fraction.
pub fn solar_power(irradiance_frac: f64, spec: &SolarArraySpec) -> Result<f64, PowerError> {
    if !(0.0..=1.0).contains(&irradiance_frac) {
        return Err(PowerError::Irradiance(irradiance_frac));
    }
    Ok(spec.panel_count as f64 * spec.panel_peak_power * irradiance_frac * spec.diode_factor())
}

/// Array output with per-panel irradiance. The blocking diodes keep a
/// shaded panel from sinking current, so each panel contributes >= 0.
pub fn solar_power_per_panel(irradiance: &[f64], spec: &SolarArraySpec) -> Result<f64, PowerError> {
    let mut total = 0.0;
    for &frac in irradiance {
        if !(0.0..=1.0).contains(&frac) {
            return Err(PowerError::Irradiance(frac));
        }
        total += (spec.panel_peak_power * frac * spec.diode_factor()).max(0.0);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub pack_count: u32,
    /// Ah across all packs, backup included.
    pub total_capacity: f64,
    pub nominal_voltage: f64,
    pub charge_efficiency: f64,
    /// Allow surplus solar to top up the backup pack once the active packs are full.
    pub recharge_backup: bool,
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self {
            pack_count: 4,
            total_capacity: 43.2,
            nominal_voltage: 11.1,
            charge_efficiency: 0.99,
            recharge_backup: false,
        }
    }
}

impl BatterySpec {
    pub fn validate(&self) -> Result<(), PowerError> {
        if self.pack_count < 2 {
            return Err(PowerError::Config(
                "battery.pack_count must be at least 2 (one pack is the backup)".into(),
            ));
        }
        if !(self.total_capacity > 0.0) || !(self.nominal_voltage > 0.0) {
            return Err(PowerError::Config(
                "battery.total_capacity and battery.nominal_voltage must be positive".into(),
            ));
        }
        if !(self.charge_efficiency > 0.0 && self.charge_efficiency <= 1.0) {
            return Err(PowerError::Config("battery.charge_efficiency must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn pack_capacity_ah(&self) -> f64 {
        self.total_capacity / self.pack_count as f64
    }

    pub fn active_capacity_ah(&self) -> f64 {
        self.pack_capacity_ah() * (self.pack_count - 1) as f64
    }

    pub fn active_capacity_wh(&self) -> f64 {
        self.active_capacity_ah() * self.nominal_voltage
    }

    pub fn backup_capacity_wh(&self) -> f64 {
        self.pack_capacity_ah() * self.nominal_voltage
    }

    pub fn installed_energy_wh(&self) -> f64 {
        self.total_capacity * self.nominal_voltage
    }

    /// Energy available to normal cycling, backup excluded.
    pub fn cycling_energy_wh(&self) -> f64 {
        self.active_capacity_wh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryBank {
    pub spec: BatterySpec,
    /// State of charge of the active packs taken together.
    pub soc: f64,
    pub backup_soc: f64,
}

impl BatteryBank {
    pub fn new(spec: BatterySpec, soc: f64) -> Self {
        Self {
            spec,
            soc: soc.clamp(0.0, 1.0),
            backup_soc: 1.0,
        }
    }

    /// Energy stored across active and backup packs.
    pub fn stored_wh(&self) -> f64 {
        self.soc * self.spec.active_capacity_wh() + self.backup_soc * self.spec.backup_capacity_wh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpptSpec {
    pub conversion_efficiency: f64,
    /// Amps at the battery bus.
    pub load_current_limit: f64,
}

impl Default for MpptSpec {
    fn default() -> Self {
        Self {
            conversion_efficiency: 0.95,
            load_current_limit: 30.0,
        }
    }
}

impl MpptSpec {
    pub fn validate(&self) -> Result<(), PowerError> {
        if !(self.conversion_efficiency > 0.0 && self.conversion_efficiency <= 1.0) {
            return Err(PowerError::Config("mppt.efficiency must lie in (0, 1]".into()));
        }
        if !(self.load_current_limit > 0.0) {
            return Err(PowerError::Config("mppt.load_current_limit must be positive".into()));
        }
        Ok(())
    }
}

/// Electrical draw per consumer, watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Loads {
    pub servo: f64,
    pub thruster: f64,
    pub winch: f64,
    pub electronics: f64,
    pub comms: f64,
}

impl Loads {
    pub fn total(&self) -> f64 {
        self.servo + self.thruster + self.winch + self.electronics + self.comms
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            servo: self.servo * k,
            thruster: self.thruster * k,
            winch: self.winch * k,
            electronics: self.electronics * k,
            comms: self.comms * k,
        }
    }

    fn check(&self) -> Result<(), PowerError> {
        for (name, value) in [
            ("servo", self.servo),
            ("thruster", self.thruster),
            ("winch", self.winch),
            ("electronics", self.electronics),
            ("comms", self.comms),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(PowerError::Load { name, value });
            }
        }
        Ok(())
    }
}

/// One step of the energy ledger.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerTick {
    pub t: f64,
    pub dt: f64,
    /// Solar power the controller could have harvested.
    pub solar_available_w: f64,
    /// Solar power actually harvested (curtailed when the bank is full).
    pub solar_in_w: f64,
    /// Delivered loads.
    pub load: Loads,
    /// Energy into (+) or out of (−) the battery terminals.
    pub battery_delta_wh: f64,
    /// Part of a charge that did not end up stored.
    pub charge_loss_wh: f64,
    pub soc_after: f64,
    pub backup_soc_after: f64,
    pub on_backup: bool,
    pub load_shed: bool,
}

impl PowerTick {
    pub fn solar_bus_wh(&self, efficiency: f64) -> f64 {
        self.solar_in_w * efficiency * self.dt / SECONDS_PER_HOUR
    }

    pub fn load_wh(&self) -> f64 {
        self.load.total() * self.dt / SECONDS_PER_HOUR
    }
}

/// Routes solar and battery energy to the requested loads for `dt` seconds.
pub fn mppt_step(
    solar_w: f64,
    requested: Loads,
    bank: BatteryBank,
    spec: &MpptSpec,
    t: f64,
    dt: f64,
) -> Result<(BatteryBank, PowerTick), PowerError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PowerError::TimeStep(dt));
    }
    if !(solar_w >= 0.0 && solar_w.is_finite()) {
        return Err(PowerError::Solar(solar_w));
    }
    requested.check()?;

    let eta = spec.conversion_efficiency;
    let hours = dt / SECONDS_PER_HOUR;
    let voltage = bank.spec.nominal_voltage;
    let cap_w = spec.load_current_limit * voltage;

    let mut load = requested;
    let mut load_shed = false;
    let requested_w = requested.total();
    if requested_w > cap_w {
        load = requested.scaled(cap_w / requested_w);
        load_shed = true;
    }

    let active_wh = bank.spec.active_capacity_wh();
    let backup_wh = bank.spec.backup_capacity_wh();
    let ce = bank.spec.charge_efficiency;
    let mut next = bank;
    let load_wh = load.total() * hours;
    let bus_wh = solar_w * eta * hours;
    let mut solar_in_w = solar_w;
    let mut battery_delta_wh;
    let mut charge_loss_wh = 0.0;
    let mut on_backup = false;

    if bus_wh >= load_wh {
        let surplus = bus_wh - load_wh;
        let active_room = (1.0 - bank.soc) * active_wh / ce;
        let to_active = surplus.min(active_room);
        let mut charged = to_active;
        if to_active >= active_room {
            next.soc = 1.0;
        } else {
            next.soc = (bank.soc + to_active * ce / active_wh).min(1.0);
        }
        if bank.spec.recharge_backup {
            let backup_room = (1.0 - bank.backup_soc) * backup_wh / ce;
            let to_backup = (surplus - to_active).min(backup_room);
            if to_backup > 0.0 {
                next.backup_soc = if to_backup >= backup_room {
                    1.0
                } else {
                    (bank.backup_soc + to_backup * ce / backup_wh).min(1.0)
                };
                charged += to_backup;
            }
        }
        if charged < surplus {
            // the bank cannot absorb it all, so harvest only what is used
            solar_in_w = if eta > 0.0 && hours > 0.0 {
                (load_wh + charged) / (eta * hours)
            } else {
                0.0
            };
        }
        battery_delta_wh = charged;
        charge_loss_wh = charged * (1.0 - ce);
    } else {
        let deficit = load_wh - bus_wh;
        let active_avail = bank.soc * active_wh;
        let from_active = deficit.min(active_avail);
        next.soc = if from_active >= active_avail {
            0.0
        } else {
            (bank.soc - from_active / active_wh).max(0.0)
        };
        let mut drawn = from_active;
        let rest = deficit - from_active;
        if rest > 0.0 {
            on_backup = true;
            let backup_avail = bank.backup_soc * backup_wh;
            let from_backup = rest.min(backup_avail);
            next.backup_soc = if from_backup >= backup_avail {
                0.0
            } else {
                (bank.backup_soc - from_backup / backup_wh).max(0.0)
            };
            drawn += from_backup;
            if from_backup < rest {
                // brownout: deliver only what solar plus storage can supply
                let deliverable_wh = bus_wh + drawn;
                load = if load_wh > 0.0 {
                    load.scaled(deliverable_wh / load_wh)
                } else {
                    load
                };
                load_shed = true;
            }
        }
        battery_delta_wh = -drawn;
    }
    if battery_delta_wh == 0.0 {
        battery_delta_wh = 0.0;
    }

    let tick = PowerTick {
        t,
        dt,
        solar_available_w: solar_w,
        solar_in_w,
        load,
        battery_delta_wh,
        charge_loss_wh,
        soc_after: next.soc,
        backup_soc_after: next.backup_soc,
        on_backup,
        load_shed,
    };
    Ok((next, tick))
}

/// Totals over a sequence of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub ticks: u64,
    pub duration_s: f64,
    pub solar_in_wh: f64,
    pub servo_wh: f64,
    pub thruster_wh: f64,
    pub winch_wh: f64,
    pub electronics_wh: f64,
    pub comms_wh: f64,
    pub total_load_wh: f64,
    pub battery_delta_wh: f64,
    pub charge_loss_wh: f64,
    pub min_soc: f64,
    pub backup_engagements: u64,
    pub load_shed_ticks: u64,
}

pub fn energy_report(ticks: &[PowerTick]) -> Result<EnergyReport, PowerError> {
    let mut r = EnergyReport::default();
    let Some(first) = ticks.first() else {
        return Ok(r);
    };
    r.min_soc = first.soc_after;
    let mut prev: Option<&PowerTick> = None;
    for tick in ticks {
        if let Some(p) = prev {
            if tick.t < p.t {
                return Err(PowerError::Unordered {
                    earlier: p.t,
                    later: tick.t,
                });
            }
            if tick.on_backup && !p.on_backup {
                r.backup_engagements += 1;
            }
        } else if tick.on_backup {
            r.backup_engagements += 1;
        }
        let h = tick.dt / SECONDS_PER_HOUR;
        r.ticks += 1;
        r.duration_s += tick.dt;
        r.solar_in_wh += tick.solar_in_w * h;
        r.servo_wh += tick.load.servo * h;
        r.thruster_wh += tick.load.thruster * h;
        r.winch_wh += tick.load.winch * h;
        r.electronics_wh += tick.load.electronics * h;
        r.comms_wh += tick.load.comms * h;
        r.total_load_wh += tick.load.total() * h;
        r.battery_delta_wh += tick.battery_delta_wh;
        r.charge_loss_wh += tick.charge_loss_wh;
        r.min_soc = r.min_soc.min(tick.soc_after);
        if tick.load_shed {
            r.load_shed_ticks += 1;
        }
        prev = Some(tick);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank(soc: f64) -> BatteryBank {
        BatteryBank::new(BatterySpec::default(), soc)
    }

    fn ledger_residual(tick: &PowerTick, eta: f64) -> f64 {
        tick.solar_bus_wh(eta) - tick.load_wh() - tick.battery_delta_wh
    }

    #[test]
    fn solar_endpoints() {
        let s = SolarArraySpec::default();
        assert_eq!(solar_power(0.0, &s).unwrap(), 0.0);
        let full = solar_power(1.0, &s).unwrap();
        assert!((full - 3.0 * 30.0 * (1.0 - 0.4 / 18.0)).abs() < 1e-12);
        assert!((full - 88.0).abs() < 1e-9);
        assert!(solar_power(1.2, &s).is_err());
        assert!(solar_power(-0.1, &s).is_err());
    }

    #[test]
    fn shaded_panel_scales_without_negative_contribution() {
        let s = SolarArraySpec::default();
        let full = solar_power_per_panel(&[1.0, 1.0, 1.0], &s).unwrap();
        let shaded = solar_power_per_panel(&[1.0, 1.0, 0.0], &s).unwrap();
        assert!((shaded - full * 2.0 / 3.0).abs() < 1e-12);
        let half = solar_power_per_panel(&[1.0, 1.0, 0.5], &s).unwrap();
        assert!(half > shaded && half < full);
    }

    #[test]
    fn capacity_bookkeeping() {
        let b = BatterySpec::default();
        assert!((b.active_capacity_ah() - 32.4).abs() < 1e-12);
        assert!((b.installed_energy_wh() - 479.52).abs() < 1e-9);
        assert!((b.cycling_energy_wh() - 359.64).abs() < 1e-9);
    }

    #[test]
    fn balanced_bus_leaves_soc_unchanged() {
        let loads = Loads {
            electronics: 40.0,
            ..Default::default()
        };
        let spec = MpptSpec::default();
        let solar = 40.0 / spec.conversion_efficiency;
        let (next, tick) = mppt_step(solar, loads, bank(0.5), &spec, 0.0, 1.0).unwrap();
        assert!((next.soc - 0.5).abs() < 1e-15);
        assert!(tick.battery_delta_wh.abs() < 1e-12);
        assert!(!tick.load_shed && !tick.on_backup);
    }

    #[test]
    fn overload_is_shed_to_thirty_amps() {
        let spec = MpptSpec::default();
        let loads = Loads {
            thruster: 300.0,
            electronics: 100.0,
            ..Default::default()
        };
        let (_, tick) = mppt_step(0.0, loads, bank(1.0), &spec, 0.0, 1.0).unwrap();
        assert!(tick.load_shed);
        assert!((tick.load.total() - 333.0).abs() < 1e-9);
        // shed proportionally
        assert!((tick.load.thruster / tick.load.electronics - 3.0).abs() < 1e-12);
    }

    #[test]
    fn depletion_time_at_the_cap() {
        let spec = MpptSpec::default();
        let loads = Loads {
            electronics: 333.0,
            ..Default::default()
        };
        let mut b = bank(1.0);
        let dt = 1.0;
        let mut t = 0.0;
        while b.soc > 0.0 {
            let (nb, tick) = mppt_step(0.0, loads, b, &spec, t, dt).unwrap();
            assert!(!tick.on_backup || nb.soc == 0.0);
            b = nb;
            t += dt;
        }
        // 32.4 Ah at 30 A
        let hours = t / 3600.0;
        assert!((hours - 1.08).abs() < 0.0108, "depleted after {hours} h");
    }

    #[test]
    fn backup_engages_only_after_active_empty() {
        let spec = MpptSpec::default();
        let loads = Loads {
            electronics: 100.0,
            ..Default::default()
        };
        let (b, tick) = mppt_step(0.0, loads, bank(0.0), &spec, 0.0, 36.0).unwrap();
        assert!(tick.on_backup);
        assert!(b.backup_soc < 1.0);
        assert!(ledger_residual(&tick, spec.conversion_efficiency).abs() < 1e-9);
        let (b2, tick2) = mppt_step(0.0, loads, bank(0.5), &spec, 0.0, 36.0).unwrap();
        assert!(!tick2.on_backup);
        assert_eq!(b2.backup_soc, 1.0);
    }

    #[test]
    fn full_bank_curtails_solar() {
        let spec = MpptSpec::default();
        let loads = Loads {
            electronics: 5.0,
            ..Default::default()
        };
        let (b, tick) = mppt_step(88.0, loads, bank(1.0), &spec, 0.0, 10.0).unwrap();
        assert_eq!(b.soc, 1.0);
        assert!(tick.solar_in_w < 88.0);
        assert_eq!(tick.battery_delta_wh, 0.0);
        assert!(ledger_residual(&tick, spec.conversion_efficiency).abs() < 1e-12);
    }

    #[test]
    fn negative_load_rejected() {
        let loads = Loads {
            servo: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            mppt_step(0.0, loads, bank(0.5), &MpptSpec::default(), 0.0, 1.0),
            Err(PowerError::Load { name: "servo", .. })
        ));
    }

    #[test]
    fn empty_report_is_zero() {
        assert_eq!(energy_report(&[]).unwrap(), EnergyReport::default());
    }

    #[test]
    fn one_tick_report() {
        let tick = PowerTick {
            t: 0.0,
            dt: 36.0,
            solar_in_w: 100.0,
            ..Default::default()
        };
        let r = energy_report(&[tick]).unwrap();
        assert!((r.solar_in_wh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unordered_ticks_rejected() {
        let a = PowerTick {
            t: 5.0,
            dt: 1.0,
            ..Default::default()
        };
        let b = PowerTick { t: 4.0, ..a };
        assert!(matches!(energy_report(&[a, b]), Err(PowerError::Unordered { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn soc_bounded_and_ledger_closes(
                steps in proptest::collection::vec((0.0f64..120.0, 0.0f64..500.0), 1..300),
                soc0 in 0.0f64..=1.0,
                recharge in any::<bool>(),
            ) {
                let spec = MpptSpec::default();
                let mut b = BatteryBank::new(BatterySpec { recharge_backup: recharge, ..Default::default() }, soc0);
                for (i, (solar, load)) in steps.into_iter().enumerate() {
                    let loads = Loads { electronics: load, ..Default::default() };
                    let before = b;
                    let (nb, tick) = mppt_step(solar, loads, b, &spec, i as f64 * 60.0, 60.0).unwrap();
                    prop_assert!((0.0..=1.0).contains(&nb.soc));
                    prop_assert!((0.0..=1.0).contains(&nb.backup_soc));
                    prop_assert!(tick.load.total() <= 333.0 + 1e-9);
                    prop_assert!(ledger_residual(&tick, spec.conversion_efficiency).abs() < 1e-9);
                    let stored = nb.stored_wh() - before.stored_wh();
                    prop_assert!((stored + tick.charge_loss_wh - tick.battery_delta_wh).abs() < 1e-9);
                    if !recharge {
                        prop_assert!(nb.backup_soc <= before.backup_soc);
                        if !tick.on_backup {
                            prop_assert_eq!(nb.backup_soc, before.backup_soc);
                        }
                    }
                    b = nb;
                }
            }
        }
    }
}
