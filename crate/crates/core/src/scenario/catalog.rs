//! Parameter catalog: named device, server and network profiles, some of
//! which carry (low, high) ranges instead of point values.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use crate::model::{DevicePowerProfile, NetworkProfile, ServerProfile};
use crate::quantity::{Energy, EnergyPerBit, EnergyPerBitYear, Power, PowerPerRate};

use super::error::{ErrorCode, ScenarioError};

/// Which end of a ranged parameter to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    Low,
    High,
}

impl Pick {
    pub fn parse(s: &str) -> Option<Pick> {
        match s {
            "low" => Some(Pick::Low),
            "high" => Some(Pick::High),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pick::Low => "low",
            Pick::High => "high",
        }
    }
}

/// A point value or a `{low, high}` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param<T> {
    Point(T),
    Range { low: T, high: T },
}

impl<T: Copy> Param<T> {
    pub fn is_range(&self) -> bool {
        matches!(self, Param::Range { .. })
    }

    pub fn pick(&self, pick: Option<Pick>) -> Option<T> {
        match (self, pick) {
            (Param::Point(v), _) => Some(*v),
            (Param::Range { low, .. }, Some(Pick::Low)) => Some(*low),
            (Param::Range { high, .. }, Some(Pick::High)) => Some(*high),
            (Param::Range { .. }, None) => None,
        }
    }
}

impl<T: Default> Default for Param<T> {
    fn default() -> Self {
        Param::Point(T::default())
    }
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for Param<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(deserializer)?;
        let is_range = value
            .as_object()
            .is_some_and(|m| m.contains_key("low") || m.contains_key("high"));
        if is_range {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Bounds<T> {
                low: T,
                high: T,
            }
            let b: Bounds<T> = serde_json::from_value(value).map_err(D::Error::custom)?;
            Ok(Param::Range {
                low: b.low,
                high: b.high,
            })
        } else {
            serde_json::from_value(value)
                .map(Param::Point)
                .map_err(D::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub name: String,
    pub p_offset: Param<Power>,
    #[serde(default)]
    pub p_rx: Param<Power>,
    #[serde(default)]
    pub p_tx: Param<Power>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Per-field caveats, keyed by field name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerEntry {
    pub name: String,
    pub pue: f64,
    pub e_offset_year: Param<Energy>,
    pub e_send: Param<EnergyPerBit>,
    pub e_rx: Param<EnergyPerBit>,
    pub e_store: Param<EnergyPerBitYear>,
    pub p_dec: Param<Power>,
    pub p_enc: Param<Power>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEntry {
    pub name: String,
    #[serde(default)]
    pub p_offset: Param<Power>,
    #[serde(default)]
    pub p_per_rate: Param<PowerPerRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

/// Named per-second processing power, for encoders or decoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPreset {
    pub name: String,
    pub power: Power,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterCatalog {
    #[serde(default)]
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub servers: Vec<ServerEntry>,
    #[serde(default)]
    pub networks: Vec<NetworkEntry>,
    #[serde(default)]
    pub encoders: Vec<PowerPreset>,
    #[serde(default)]
    pub decoders: Vec<PowerPreset>,
}

/// One resolved parameter, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEcho {
    pub parameter: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<Pick>,
    pub source: String,
}

/// Range picks for one profile reference: a default for every ranged field
/// plus per-field choices.
#[derive(Debug, Clone, Default)]
pub struct Selection<'a> {
    pub all: Option<Pick>,
    pub fields: Option<&'a BTreeMap<String, Pick>>,
}

impl Selection<'_> {
    fn for_field(&self, field: &str) -> Option<Pick> {
        self.fields.and_then(|m| m.get(field).copied()).or(self.all)
    }
}

struct Resolver<'a> {
    path: &'a str,
    profile: &'a str,
    source: String,
    selection: &'a Selection<'a>,
    echo: Vec<ParamEcho>,
}

impl Resolver<'_> {
    fn get<T: Copy + std::fmt::Display>(
        &mut self,
        field: &str,
        param: &Param<T>,
    ) -> Result<T, ScenarioError> {
        let pick = self.selection.for_field(field);
        let value = param.pick(pick).ok_or_else(|| {
            ScenarioError::new(
                ErrorCode::RangeSelectionRequired,
                format!("{}.{}", self.path, field),
                format!(
                    "'{}'.{} is a range; select \"low\" or \"high\"",
                    self.profile, field
                ),
            )
        })?;
        self.echo.push(ParamEcho {
            parameter: format!("{}.{}", self.profile, field),
            value: value.to_string(),
            pick: if param.is_range() { pick } else { None },
            source: self.source.clone(),
        });
        Ok(value)
    }

    fn check_fields(&self, known: &[&str]) -> Result<(), ScenarioError> {
        if let Some(fields) = self.selection.fields {
            for key in fields.keys() {
                if !known.contains(&key.as_str()) {
                    return Err(ScenarioError::new(
                        ErrorCode::UnresolvedReference,
                        format!("{}.select.{}", self.path, key),
                        format!("profile '{}' has no parameter '{}'", self.profile, key),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn source_of(provenance: &Option<String>) -> String {
    provenance
        .clone()
        .unwrap_or_else(|| "scenario document".to_string())
}

impl DeviceEntry {
    pub fn resolve(
        &self,
        path: &str,
        selection: &Selection<'_>,
    ) -> Result<(DevicePowerProfile, Vec<ParamEcho>), ScenarioError> {
        let mut r = Resolver {
            path,
            profile: &self.name,
            source: source_of(&self.provenance),
            selection,
            echo: Vec::new(),
        };
        r.check_fields(&["p_offset", "p_rx", "p_tx"])?;
        let profile = DevicePowerProfile::new(
            self.name.clone(),
            r.get("p_offset", &self.p_offset)?,
            r.get("p_rx", &self.p_rx)?,
            r.get("p_tx", &self.p_tx)?,
        );
        Ok((profile, r.echo))
    }
}

impl ServerEntry {
    pub fn resolve(
        &self,
        path: &str,
        selection: &Selection<'_>,
    ) -> Result<(ServerProfile, Vec<ParamEcho>), ScenarioError> {
        let mut r = Resolver {
            path,
            profile: &self.name,
            source: source_of(&self.provenance),
            selection,
            echo: Vec::new(),
        };
        r.check_fields(&[
            "e_offset_year",
            "e_send",
            "e_rx",
            "e_store",
            "p_dec",
            "p_enc",
        ])?;
        let profile = ServerProfile {
            pue: self.pue,
            e_offset_year: r.get("e_offset_year", &self.e_offset_year)?,
            e_send: r.get("e_send", &self.e_send)?,
            e_rx: r.get("e_rx", &self.e_rx)?,
            e_store: r.get("e_store", &self.e_store)?,
            p_dec: r.get("p_dec", &self.p_dec)?,
            p_enc: r.get("p_enc", &self.p_enc)?,
        };
        profile.validate().map_err(|e| {
            ScenarioError::new(
                ErrorCode::InvariantViolation,
                format!("{path}.pue"),
                e.to_string(),
            )
        })?;
        r.echo.insert(
            0,
            ParamEcho {
                parameter: format!("{}.pue", self.name),
                value: format!("{}", self.pue),
                pick: None,
                source: r.source.clone(),
            },
        );
        Ok((profile, r.echo))
    }
}

impl NetworkEntry {
    pub fn resolve(
        &self,
        path: &str,
        selection: &Selection<'_>,
    ) -> Result<(NetworkProfile, Vec<ParamEcho>), ScenarioError> {
        let mut r = Resolver {
            path,
            profile: &self.name,
            source: source_of(&self.provenance),
            selection,
            echo: Vec::new(),
        };
        r.check_fields(&["p_offset", "p_per_rate"])?;
        let profile = NetworkProfile::new(
            self.name.clone(),
            r.get("p_offset", &self.p_offset)?,
            r.get("p_per_rate", &self.p_per_rate)?,
        );
        Ok((profile, r.echo))
    }
}

impl ParameterCatalog {
    pub fn device(&self, name: &str) -> Option<&DeviceEntry> {
        self.devices.iter().find(|e| e.name == name)
    }

    pub fn server(&self, name: &str) -> Option<&ServerEntry> {
        self.servers.iter().find(|e| e.name == name)
    }

    pub fn network(&self, name: &str) -> Option<&NetworkEntry> {
        self.networks.iter().find(|e| e.name == name)
    }

    pub fn encoder(&self, name: &str) -> Option<&PowerPreset> {
        self.encoders.iter().find(|e| e.name == name)
    }

    pub fn decoder(&self, name: &str) -> Option<&PowerPreset> {
        self.decoders.iter().find(|e| e.name == name)
    }

    /// Returns a catalog where entries of `shadow` replace same-named entries
    /// of `self` and new names are appended. `self` is left untouched.
    pub fn shadowed_by(&self, shadow: &ParameterCatalog) -> ParameterCatalog {
        fn merge<T: Clone>(base: &[T], over: &[T], name: impl Fn(&T) -> &str) -> Vec<T> {
            let mut out: Vec<T> = base
                .iter()
                .map(|b| {
                    over.iter()
                        .find(|o| name(o) == name(b))
                        .unwrap_or(b)
                        .clone()
                })
                .collect();
            for o in over {
                if !base.iter().any(|b| name(b) == name(o)) {
                    out.push(o.clone());
                }
            }
            out
        }
        ParameterCatalog {
            devices: merge(&self.devices, &shadow.devices, |e| &e.name),
            servers: merge(&self.servers, &shadow.servers, |e| &e.name),
            networks: merge(&self.networks, &shadow.networks, |e| &e.name),
            encoders: merge(&self.encoders, &shadow.encoders, |e| &e.name),
            decoders: merge(&self.decoders, &shadow.decoders, |e| &e.name),
        }
    }

    /// Reports the first duplicated name within any section.
    pub fn duplicate_name(&self) -> Option<(&'static str, String)> {
        fn dup<'a>(names: impl Iterator<Item = &'a str>) -> Option<String> {
            let mut seen = std::collections::BTreeSet::new();
            names
                .into_iter()
                .find(|n| !seen.insert(*n))
                .map(str::to_string)
        }
        dup(self.devices.iter().map(|e| e.name.as_str()))
            .map(|n| ("devices", n))
            .or_else(|| dup(self.servers.iter().map(|e| e.name.as_str())).map(|n| ("servers", n)))
            .or_else(|| dup(self.networks.iter().map(|e| e.name.as_str())).map(|n| ("networks", n)))
            .or_else(|| dup(self.encoders.iter().map(|e| e.name.as_str())).map(|n| ("encoders", n)))
            .or_else(|| dup(self.decoders.iter().map(|e| e.name.as_str())).map(|n| ("decoders", n)))
    }
}

const BUILTIN_CATALOG: &str = include_str!("../../data/catalog.json");

/// The shipped catalog. Each call returns a fresh copy, so callers cannot
/// alter the shipped values.
pub fn builtin_catalog() -> ParameterCatalog {
    serde_json::from_str(BUILTIN_CATALOG).expect("shipped catalog is valid")
}
