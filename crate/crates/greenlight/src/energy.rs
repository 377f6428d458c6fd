//! The f1 transform: watts to annual dollars, plus the watt-level savings
//! models (organic elasticity, 802.3az low-power idle, fixed displacement).

use serde::Serialize;
use thiserror::Error;

use crate::money::{Money, MoneyError};

pub const HOURS_PER_YEAR_DEFAULT: f64 = 8760.0;
/// Leap year ceiling: 366 days.
pub const HOURS_PER_YEAR_MAX: f64 = 8784.0;

/// Measured share of transceiver power that low-power idle reclaims.
pub const EEE_OPTICAL_FRACTION: f64 = 0.20;
pub const EEE_COPPER_FRACTION: f64 = 0.74;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("device count must be at least 1")]
    InvalidCount,
    #[error("device draw must be positive finite watts, got {0}")]
    InvalidDraw(f64),
    #[error("tariff rate must be positive, got {0}")]
    InvalidRate(Money),
    #[error("hours per year must lie in (0, {HOURS_PER_YEAR_MAX}], got {0}")]
    InvalidHours(f64),
    #[error("fraction must lie in [0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("savings watts must be non-negative and finite, got {0}")]
    InvalidWatts(f64),
    #[error("unknown medium {0:?}: expected optical or copper")]
    UnknownMedium(String),
    #[error(transparent)]
    Money(#[from] MoneyError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceGroup {
    count: u32,
    draw_watts: f64,
    label: String,
}

impl DeviceGroup {
    pub fn new(count: u32, draw_watts: f64, label: impl Into<String>) -> Result<DeviceGroup, EnergyError> {
        if count < 1 {
            return Err(EnergyError::InvalidCount);
        }
        if !draw_watts.is_finite() || draw_watts <= 0.0 {
            return Err(EnergyError::InvalidDraw(draw_watts));
        }
        Ok(DeviceGroup {
            count,
            draw_watts,
            label: label.into(),
        })
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn draw_watts(&self) -> f64 {
        self.draw_watts
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn watts(&self) -> f64 {
        self.count as f64 * self.draw_watts
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DeviceInventory {
    groups: Vec<DeviceGroup>,
}

impl DeviceInventory {
    pub fn new(groups: Vec<DeviceGroup>) -> DeviceInventory {
        DeviceInventory { groups }
    }

    pub fn groups(&self) -> &[DeviceGroup] {
        &self.groups
    }

    pub fn total_watts(&self) -> f64 {
        self.groups.iter().map(DeviceGroup::watts).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tariff {
    rate_per_kwh: Money,
    hours_per_year: f64,
}

impl Tariff {
    pub fn new(rate_per_kwh: Money, hours_per_year: f64) -> Result<Tariff, EnergyError> {
        if !rate_per_kwh.is_positive() {
            return Err(EnergyError::InvalidRate(rate_per_kwh));
        }
        if !(hours_per_year > 0.0 && hours_per_year <= HOURS_PER_YEAR_MAX) {
            return Err(EnergyError::InvalidHours(hours_per_year));
        }
        Ok(Tariff {
            rate_per_kwh,
            hours_per_year,
        })
    }

    pub fn rate_per_kwh(&self) -> Money {
        self.rate_per_kwh
    }

    pub fn hours_per_year(&self) -> f64 {
        self.hours_per_year
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Optical,
    Copper,
}

impl Medium {
    pub fn fraction(self) -> f64 {
        match self {
            Medium::Optical => EEE_OPTICAL_FRACTION,
            Medium::Copper => EEE_COPPER_FRACTION,
        }
    }

    pub fn parse(s: &str) -> Result<Medium, EnergyError> {
        match s {
            "optical" => Ok(Medium::Optical),
            "copper" => Ok(Medium::Copper),
            other => Err(EnergyError::UnknownMedium(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SavingsModel {
    FractionOfBaseline(f64),
    EeePerPort {
        ports: u32,
        per_port_watts: f64,
        medium: Medium,
    },
    FixedWatts(f64),
}

impl SavingsModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        match *self {
            SavingsModel::FractionOfBaseline(f) => check_fraction(f),
            SavingsModel::EeePerPort { per_port_watts, .. } => {
                if !per_port_watts.is_finite() || per_port_watts < 0.0 {
                    Err(EnergyError::InvalidWatts(per_port_watts))
                } else {
                    Ok(())
                }
            }
            SavingsModel::FixedWatts(w) => {
                if !w.is_finite() || w < 0.0 {
                    Err(EnergyError::InvalidWatts(w))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn savings_watts(&self, baseline_watts: f64) -> Result<f64, EnergyError> {
        self.validate()?;
        Ok(match *self {
            SavingsModel::FractionOfBaseline(f) => baseline_watts * f,
            SavingsModel::EeePerPort {
                ports,
                per_port_watts,
                medium,
            } => eee_savings_watts(ports, per_port_watts, medium),
            SavingsModel::FixedWatts(w) => w,
        })
    }
}

fn check_fraction(f: f64) -> Result<(), EnergyError> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(EnergyError::FractionOutOfRange(f))
    }
}

fn watts_to_annual_cents(watts: f64, tariff: &Tariff) -> f64 {
    // This association keeps the arithmetic integral for realistic inputs:
    // kWh per year first, then cents.
    watts * tariff.hours_per_year * tariff.rate_per_kwh.cents() as f64 / 1000.0
}

/// Annual cost of running the whole inventory at the tariff.
pub fn annual_energy_cost(
    inventory: &DeviceInventory,
    tariff: &Tariff,
) -> Result<Money, EnergyError> {
    Ok(Money::from_cents_f64(watts_to_annual_cents(
        inventory.total_watts(),
        tariff,
    ))?)
}

/// Low-power-idle savings across `ports` transceivers.
pub fn eee_savings_watts(ports: u32, per_port_watts: f64, medium: Medium) -> f64 {
    // ports * (w * fraction): keeps n-port savings an exact multiple of the
    // single-port figure.
    ports as f64 * (per_port_watts * medium.fraction())
}

/// Organic load response, typically 5 to 10 percent of baseline.
pub fn elasticity_savings_watts(
    baseline_watts: f64,
    elasticity_fraction: f64,
) -> Result<f64, EnergyError> {
    check_fraction(elasticity_fraction)?;
    Ok(baseline_watts * elasticity_fraction)
}

/// Unit bridge: a wattage saved, priced over the year.
pub fn savings_to_annual_money(watts: f64, tariff: &Tariff) -> Result<Money, EnergyError> {
    if !watts.is_finite() || watts < 0.0 {
        return Err(EnergyError::InvalidWatts(watts));
    }
    Ok(Money::from_cents_f64(watts_to_annual_cents(watts, tariff))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dime_tariff(hours: f64) -> Tariff {
        Tariff::new(Money::from_cents(10), hours).unwrap()
    }

    #[test]
    fn enterprise_baseline_is_exact() {
        let inv = DeviceInventory::new(vec![DeviceGroup::new(100, 300.0, "switches").unwrap()]);
        let cost = annual_energy_cost(&inv, &dime_tariff(8766.0)).unwrap();
        assert_eq!(cost, Money::dollars(26_298));
    }

    #[test]
    fn carrier_baseline_is_exact() {
        let inv = DeviceInventory::new(vec![DeviceGroup::new(20, 4000.0, "routers").unwrap()]);
        let cost = annual_energy_cost(&inv, &dime_tariff(8760.0)).unwrap();
        assert_eq!(cost, Money::dollars(70_080));
    }

    #[test]
    fn unit_case() {
        let inv = DeviceInventory::new(vec![DeviceGroup::new(1, 1000.0, "box").unwrap()]);
        let cost = annual_energy_cost(&inv, &dime_tariff(1.0)).unwrap();
        assert_eq!(cost, Money::from_cents(10));
    }

    #[test]
    fn eee_fractions() {
        assert_eq!(eee_savings_watts(160, 1.0, Medium::Optical), 32.0);
        assert_eq!(eee_savings_watts(380, 1.0, Medium::Copper), 281.2);
        assert_eq!(eee_savings_watts(0, 1.0, Medium::Copper), 0.0);
    }

    #[test]
    fn eee_scales_exactly_with_ports() {
        for ports in [1u32, 7, 160, 380, 999] {
            let one = eee_savings_watts(1, 0.73, Medium::Copper);
            assert_eq!(eee_savings_watts(ports, 0.73, Medium::Copper), ports as f64 * one);
        }
    }

    #[test]
    fn elasticity_bounds() {
        assert_eq!(elasticity_savings_watts(80_000.0, 0.05).unwrap(), 4_000.0);
        assert_eq!(elasticity_savings_watts(80_000.0, 0.10).unwrap(), 8_000.0);
        assert_eq!(elasticity_savings_watts(123.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            elasticity_savings_watts(1.0, 1.5),
            Err(EnergyError::FractionOutOfRange(_))
        ));
        assert!(elasticity_savings_watts(1.0, -0.1).is_err());
    }

    #[test]
    fn savings_bridge_matches_inventory_cost() {
        let t = dime_tariff(8766.0);
        assert_eq!(
            savings_to_annual_money(30_000.0, &t).unwrap(),
            Money::dollars(26_298)
        );
        assert_eq!(savings_to_annual_money(0.0, &t).unwrap(), Money::ZERO);
        assert_eq!(
            savings_to_annual_money(1000.0, &dime_tariff(8760.0)).unwrap(),
            Money::dollars(876)
        );
        assert!(savings_to_annual_money(-1.0, &t).is_err());
    }

    #[test]
    fn validation_rejects_nonsense() {
        assert!(DeviceGroup::new(0, 1.0, "x").is_err());
        assert!(DeviceGroup::new(1, 0.0, "x").is_err());
        assert!(DeviceGroup::new(1, f64::NAN, "x").is_err());
        assert!(Tariff::new(Money::ZERO, 8760.0).is_err());
        assert!(Tariff::new(Money::from_cents(-10), 8760.0).is_err());
        assert!(Tariff::new(Money::from_cents(10), 0.0).is_err());
        assert!(Tariff::new(Money::from_cents(10), 9000.0).is_err());
        assert!(Medium::parse("coax").is_err());
        assert!(SavingsModel::FractionOfBaseline(1.2).validate().is_err());
        assert!(SavingsModel::FixedWatts(-3.0).validate().is_err());
    }
}
