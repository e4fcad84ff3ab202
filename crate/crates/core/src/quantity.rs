//! Statically typed physical quantities.
//!
//! Each type wraps a finite, non-negative magnitude in SI base units. Cross-type
//! arithmetic is only implemented where the dimensions compose, so an energy can
//! never be added to a power by accident. Parsing from unit strings goes through
//! [`crate::units`] and is dimension checked.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::units::{Dimension, Quantity, UnitError, JOULES_PER_KWH, SECONDS_PER_YEAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("{0}")]
    Unit(#[from] UnitError),
    #[error("unit mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        expected: Dimension,
        found: Dimension,
    },
    #[error("{what} must be finite and non-negative, got {value}")]
    OutOfRange { what: &'static str, value: f64 },
}

impl QuantityError {
    /// Machine-readable category, shared with scenario errors.
    pub fn code(&self) -> &'static str {
        match self {
            QuantityError::Unit(_) => "invalid-unit",
            QuantityError::DimensionMismatch { .. } => "unit-mismatch",
            QuantityError::OutOfRange { .. } => "invariant-violation",
        }
    }
}

fn check_magnitude(what: &'static str, value: f64) -> Result<f64, QuantityError> {
    if value.is_finite() && value >= 0.0 {
        // normalise -0.0 so equal values serialize identically
        Ok(value + 0.0)
    } else {
        Err(QuantityError::OutOfRange { what, value })
    }
}

macro_rules! quantity_type {
    ($(#[$meta:meta])* $name:ident, $dim:expr, $display:literal, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(f64);

        impl $name {
            pub const ZERO: $name = $name(0.0);
            pub const DIMENSION: Dimension = $dim;
            /// Unit used for display and serialization.
            pub const DISPLAY_UNIT: &'static str = $display;

            /// Builds from a magnitude in SI base units.
            pub fn new(si: f64) -> Result<Self, QuantityError> {
                check_magnitude($what, si).map($name)
            }

            pub fn from_unit(value: f64, unit: &str) -> Result<Self, QuantityError> {
                Self::from_quantity(Quantity::from_value(value, unit)?)
            }

            pub fn parse(text: &str) -> Result<Self, QuantityError> {
                Self::from_quantity(Quantity::parse(text)?)
            }

            pub fn from_quantity(q: Quantity) -> Result<Self, QuantityError> {
                if q.dimension != Self::DIMENSION {
                    return Err(QuantityError::DimensionMismatch {
                        expected: Self::DIMENSION,
                        found: q.dimension,
                    });
                }
                Self::new(q.si)
            }

            #[inline]
            pub fn si(self) -> f64 {
                self.0
            }

            /// Magnitude in an arbitrary unit of the same dimension.
            pub fn value_in(self, unit: &str) -> Result<f64, QuantityError> {
                Ok(self.quantity().value_in(unit)?)
            }

            pub fn quantity(self) -> Quantity {
                Quantity { si: self.0, dimension: Self::DIMENSION }
            }

            /// Scales by a non-negative count or fraction.
            #[inline]
            pub fn times(self, factor: f64) -> Self {
                debug_assert!(factor >= 0.0 && factor.is_finite());
                $name(self.0 * factor)
            }
        }

        impl Add for $name {
            type Output = $name;
            #[inline]
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl AddAssign for $name {
            #[inline]
            fn add_assign(&mut self, rhs: $name) {
                self.0 += rhs.0;
            }
        }

        impl Sum for $name {
            fn sum<I: Iterator<Item = $name>>(iter: I) -> $name {
                iter.fold($name::ZERO, Add::add)
            }
        }

        impl<'a> Sum<&'a $name> for $name {
            fn sum<I: Iterator<Item = &'a $name>>(iter: I) -> $name {
                iter.copied().sum()
            }
        }

        impl Div for $name {
            type Output = f64;
            #[inline]
            fn div(self, rhs: $name) -> f64 {
                self.0 / rhs.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.quantity().to_display_string())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.quantity().to_lossless_string(Self::DISPLAY_UNIT))
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let q = deserialize_quantity(deserializer)?;
                $name::from_quantity(q).map_err(|e| de::Error::custom(tagged(&e)))
            }
        }
    };
}

/// Prefixes the message with the error code so callers can recover the
/// category after it has passed through serde's string-only error channel.
pub(crate) fn tagged(e: &QuantityError) -> String {
    format!("[{}] {}", e.code(), e)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QuantityRepr {
    Text(String),
    Parts { value: f64, unit: String },
}

fn deserialize_quantity<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Quantity, D::Error> {
    let repr = QuantityRepr::deserialize(deserializer).map_err(|_| {
        de::Error::custom(
            "[parse-error] expected a quantity string like \"100 W\" or {value, unit}",
        )
    })?;
    let parsed = match repr {
        QuantityRepr::Text(s) => Quantity::parse(&s),
        QuantityRepr::Parts { value, unit } => Quantity::from_value(value, &unit),
    };
    parsed.map_err(|e| de::Error::custom(tagged(&QuantityError::Unit(e))))
}

quantity_type!(
    /// Energy in joules.
    Energy, Dimension::ENERGY, "kWh", "energy");
quantity_type!(
    /// Power in watts. Also used for "energy per video second" (J/s_video).
    Power, Dimension::POWER, "W", "power");
quantity_type!(
    /// Time span in seconds.
    TimeSpan, Dimension::TIME, "s", "duration");
quantity_type!(
    /// Data size in bits.
    DataSize, Dimension::DATA_SIZE, "MByte", "data size");
quantity_type!(
    /// Data rate in bit/s.
    DataRate, Dimension::DATA_RATE, "Mbps", "data rate");
quantity_type!(
    /// Energy per transferred bit in J/bit.
    EnergyPerBit, Dimension::ENERGY_PER_BIT, "mWh/MByte", "energy per bit");
quantity_type!(
    /// Power per unit of data rate, W/(bit/s).
    PowerPerRate, Dimension::ENERGY_PER_BIT, "W/Mbps", "power per rate");
quantity_type!(
    /// Storage energy per bit and unit of time, J/(bit·s); displayed per year.
    EnergyPerBitYear, Dimension::ENERGY_PER_BIT_TIME, "Wh/(MByte·year)", "energy per bit-year");
quantity_type!(
    /// Mass in grams (CO2-equivalent for emissions).
    Mass, Dimension::MASS, "kg", "mass");
quantity_type!(
    /// Emission intensity of electricity in g/J; displayed as g/kWh.
    CarbonIntensity, Dimension::CARBON_INTENSITY, "g/kWh", "carbon intensity");

impl Energy {
    pub fn kwh(self) -> f64 {
        self.0 / JOULES_PER_KWH
    }

    pub fn wh(self) -> f64 {
        self.0 / 3600.0
    }
}

impl TimeSpan {
    pub fn years(self) -> f64 {
        self.0 / SECONDS_PER_YEAR
    }
}

impl CarbonIntensity {
    pub fn grams_per_kwh(self) -> f64 {
        self.0 * JOULES_PER_KWH
    }
}

impl Mass {
    pub fn grams(self) -> f64 {
        self.0
    }

    pub fn tonnes(self) -> f64 {
        self.0 / 1e6
    }
}

impl Mul<TimeSpan> for Power {
    type Output = Energy;
    fn mul(self, rhs: TimeSpan) -> Energy {
        Energy(self.0 * rhs.0)
    }
}

impl Mul<TimeSpan> for DataRate {
    type Output = DataSize;
    fn mul(self, rhs: TimeSpan) -> DataSize {
        DataSize(self.0 * rhs.0)
    }
}

impl Div<TimeSpan> for DataSize {
    type Output = DataRate;
    fn div(self, rhs: TimeSpan) -> DataRate {
        DataRate(self.0 / rhs.0)
    }
}

impl Mul<EnergyPerBit> for DataSize {
    type Output = Energy;
    fn mul(self, rhs: EnergyPerBit) -> Energy {
        Energy(self.0 * rhs.0)
    }
}

impl Mul<DataRate> for PowerPerRate {
    type Output = Power;
    fn mul(self, rhs: DataRate) -> Power {
        Power(self.0 * rhs.0)
    }
}

impl Mul<DataSize> for EnergyPerBitYear {
    type Output = Power;
    fn mul(self, rhs: DataSize) -> Power {
        Power(self.0 * rhs.0)
    }
}

impl Mul<CarbonIntensity> for Energy {
    type Output = Mass;
    fn mul(self, rhs: CarbonIntensity) -> Mass {
        Mass(self.0 * rhs.0)
    }
}

/// Validated non-negative count or multiplicity. Counts may be fractional
/// (e.g. 182.5 requests per device-year).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct Count(f64);

impl Count {
    pub const ZERO: Count = Count(0.0);
    pub const ONE: Count = Count(1.0);

    pub fn new(value: f64) -> Result<Count, QuantityError> {
        check_magnitude("count", value).map(Count)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Count::new(v).map_err(|e| de::Error::custom(tagged(&e)))
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
