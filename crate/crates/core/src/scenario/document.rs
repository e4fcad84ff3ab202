//! Serialized form of a scenario. Field names here are the published schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{Direction, YearFraction};
use crate::quantity::{CarbonIntensity, Count, DataRate, DataSize, Power, TimeSpan};
use crate::units::SECONDS_PER_YEAR;

use super::catalog::{ParameterCatalog, Pick};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default = "one_year")]
    pub horizon: TimeSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carbon_intensity: Option<CarbonIntensity>,
    /// Scenario-local profiles; same-named entries shadow the builtin catalog.
    #[serde(default, skip_serializing_if = "catalog_is_empty")]
    pub profiles: ParameterCatalog,
    #[serde(default)]
    pub device_fleets: Vec<FleetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub server_fleet: Option<ServerFleetSpec>,
    /// Path used for copies to surrogate servers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdn_network: Option<ProfileRef>,
    #[serde(default)]
    pub assets: Vec<AssetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder_study: Option<EncoderStudySpec>,
}

fn one_year() -> TimeSpan {
    TimeSpan::new(SECONDS_PER_YEAR).expect("positive")
}

fn catalog_is_empty(c: &ParameterCatalog) -> bool {
    *c == ParameterCatalog::default()
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn one() -> Count {
    Count::ONE
}

fn is_one(c: &Count) -> bool {
    *c == Count::ONE
}

fn is_full(f: &YearFraction) -> bool {
    *f == YearFraction::FULL
}

/// Reference to a catalog profile, optionally choosing ends of ranged fields.
///
/// Written as `"name"`, `"name@low"` / `"name@high"` (applies to every ranged
/// field), or `{"ref": "name", "pick": "high", "select": {"p_rx": "low"}}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileRef {
    pub name: String,
    pub pick: Option<Pick>,
    pub select: BTreeMap<String, Pick>,
}

impl ProfileRef {
    pub fn named(name: impl Into<String>) -> Self {
        ProfileRef {
            name: name.into(),
            ..Default::default()
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRefObject {
    #[serde(rename = "ref")]
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pick: Option<Pick>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    select: BTreeMap<String, Pick>,
}

impl Serialize for ProfileRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.select.is_empty() {
            match self.pick {
                None => serializer.serialize_str(&self.name),
                Some(p) => serializer.serialize_str(&format!("{}@{}", self.name, p.as_str())),
            }
        } else {
            ProfileRefObject {
                name: self.name.clone(),
                pick: self.pick,
                select: self.select.clone(),
            }
            .serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for ProfileRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => match s.split_once('@') {
                None => Ok(ProfileRef::named(s)),
                Some((name, sel)) => {
                    let pick = Pick::parse(sel).ok_or_else(|| {
                        D::Error::custom(format!(
                            "[parse-error] range selector must be @low or @high, got @{sel}"
                        ))
                    })?;
                    Ok(ProfileRef {
                        name: name.to_string(),
                        pick: Some(pick),
                        select: BTreeMap::new(),
                    })
                }
            },
            other => {
                let o: ProfileRefObject =
                    serde_json::from_value(other).map_err(D::Error::custom)?;
                Ok(ProfileRef {
                    name: o.name,
                    pick: o.pick,
                    select: o.select,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetSpec {
    /// Defaults to the device name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub device: ProfileRef,
    /// Number of identical devices.
    pub count: Count,
    /// Access network for the fleet's requests; none means no network energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<ProfileRef>,
    /// Whether received streams are sent by the provider's servers. False for
    /// peer-to-peer services.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub via_provider: bool,
    pub workload: Vec<WorkloadSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub duration: TimeSpan,
    pub bitrate: DataRate,
    #[serde(default = "rx")]
    pub direction: Direction,
    /// Requests per device over the horizon.
    pub per_device: Count,
    /// Replaces the bitrate × duration size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_size: Option<DataSize>,
}

fn rx() -> Direction {
    Direction::Rx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerFleetSpec {
    pub server: ProfileRef,
    /// Total servers, main plus surrogates.
    pub count: Count,
}

/// Number of servers holding an asset: a count or `"all"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StoredOn {
    #[default]
    None,
    Servers(Count),
    All,
}

impl Serialize for StoredOn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            StoredOn::None => serializer.serialize_f64(0.0),
            StoredOn::Servers(c) => c.serialize(serializer),
            StoredOn::All => serializer.serialize_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for StoredOn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) if s == "all" => Ok(StoredOn::All),
            v => {
                let c: Count = serde_json::from_value(v).map_err(D::Error::custom)?;
                Ok(if c == Count::ZERO {
                    StoredOn::None
                } else {
                    StoredOn::Servers(c)
                })
            }
        }
    }
}

fn stored_on_none(s: &StoredOn) -> bool {
    *s == StoredOn::None
}

/// A group of `count` identical videos handled by the provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    pub label: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub count: Count,
    pub duration: TimeSpan,
    #[serde(default)]
    pub variants: Vec<VariantSpec>,
    /// Whether the provider receives, decodes and encodes the video.
    #[serde(default, skip_serializing_if = "is_false")]
    pub uploaded: bool,
    /// Size of the received source; defaults to the largest variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_size: Option<DataSize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_dec: Option<Power>,
    #[serde(default, skip_serializing_if = "stored_on_none")]
    pub stored_on: StoredOn,
    #[serde(default, skip_serializing_if = "is_full")]
    pub stored_fraction_of_year: YearFraction,
    /// Expected requests over the horizon; used by the encoder study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_forecast: Option<Count>,
}

/// Encoded output. Encoding power comes from `encoder` (a catalog preset),
/// `p_enc`, or the server profile, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_enc: Option<Power>,
    pub output_size: DataSize,
}

/// Inputs for per-video encoder decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderStudySpec {
    /// Label of the asset being encoded.
    pub asset: String,
    /// Label of the fleet whose device, network and first receive workload
    /// define the cost of one request.
    pub viewers: String,
    pub options: Vec<VariantSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub video_mix: Vec<MixSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    pub videos: Count,
    pub forecast: Count,
}
