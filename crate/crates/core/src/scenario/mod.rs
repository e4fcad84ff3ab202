//! Scenario documents, the parameter catalog and the shipped scenarios.
//!
//! A document is JSON (see `docs/scenario-schema.md`). Loading parses it,
//! applies any overrides, resolves profile references against the catalog
//! (scenario-local profiles shadow builtin ones by name) and checks every
//! invariant, so a [`Scenario`] is always ready to evaluate.

pub mod catalog;
pub mod document;
pub mod error;
pub mod overrides;

use std::path::Path;

use crate::model::{
    EncodeVariant, FleetEntry, NetworkProfile, RequestBatch, ServerProfile, StreamRequest,
    YearFraction,
};
use crate::quantity::{CarbonIntensity, Count, DataSize, Power, TimeSpan};

pub use catalog::{builtin_catalog, Param, ParamEcho, ParameterCatalog, Pick};
pub use document::{
    AssetSpec, EncoderStudySpec, FleetSpec, MixSpec, ProfileRef, ScenarioDocument, ServerFleetSpec,
    StoredOn, VariantSpec, WorkloadSpec,
};
pub use error::{ErrorCode, ScenarioError};
pub use overrides::{apply_overrides, Override};

use catalog::Selection;

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedFleet {
    pub label: String,
    pub entry: FleetEntry,
    pub network: Option<NetworkProfile>,
    pub via_provider: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedServers {
    pub profile: ServerProfile,
    pub count: Count,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedAsset {
    pub label: String,
    pub count: Count,
    pub duration: TimeSpan,
    pub variants: Vec<EncodeVariant>,
    pub uploaded: bool,
    pub source_size: DataSize,
    pub p_dec: Power,
    /// Servers holding each copy; the first is the origin, the rest receive copies.
    pub stored_on: Count,
    pub stored_fraction_of_year: YearFraction,
    pub request_forecast: Option<Count>,
}

impl ResolvedAsset {
    pub fn stored_bits(&self) -> DataSize {
        self.variants.iter().map(|v| v.output_size).sum()
    }

    /// Copies pushed to surrogates per asset.
    pub fn copies(&self) -> f64 {
        (self.stored_on.get() - 1.0).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStudy {
    /// Index into [`Scenario::assets`].
    pub asset: usize,
    /// Index into [`Scenario::fleets`].
    pub viewers: usize,
    pub options: Vec<EncodeVariant>,
    pub video_mix: Vec<MixSpec>,
}

/// A validated scenario with every reference resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    document: ScenarioDocument,
    pub name: String,
    pub horizon: TimeSpan,
    pub carbon_intensity: Option<CarbonIntensity>,
    pub fleets: Vec<ResolvedFleet>,
    pub servers: Option<ResolvedServers>,
    pub cdn_network: Option<NetworkProfile>,
    pub assets: Vec<ResolvedAsset>,
    pub encoder_study: Option<EncoderStudy>,
    /// Every resolved catalog parameter with its source, in resolution order.
    pub provenance: Vec<ParamEcho>,
}

impl Scenario {
    /// The document this scenario was resolved from, after overrides.
    pub fn document(&self) -> &ScenarioDocument {
        &self.document
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document).expect("documents serialize")
    }

    pub fn horizon_years(&self) -> f64 {
        self.horizon.years()
    }

    pub fn server_count(&self) -> f64 {
        self.servers.as_ref().map_or(0.0, |s| s.count.get())
    }

    pub fn fleet(&self, label: &str) -> Option<&ResolvedFleet> {
        self.fleets.iter().find(|f| f.label == label)
    }

    pub fn asset(&self, label: &str) -> Option<&ResolvedAsset> {
        self.assets.iter().find(|a| a.label == label)
    }
}

pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    load_scenario_with(text, &[])
}

/// Parses `text`, applies `overrides` in order and validates the result.
pub fn load_scenario_with(text: &str, overrides: &[Override]) -> Result<Scenario, ScenarioError> {
    let document = if overrides.is_empty() {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: ScenarioDocument =
            serde_path_to_error::deserialize(&mut de).map_err(ScenarioError::from_json)?;
        de.end().map_err(ScenarioError::from_syntax)?;
        doc
    } else {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(ScenarioError::from_syntax)?;
        apply_overrides(&mut value, overrides)?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let mut err = ScenarioError::from_json(e);
            // a structural error that the untouched document does not have
            // was introduced by an override
            if err.code == ErrorCode::ParseError
                && serde_json::from_str::<ScenarioDocument>(text).is_ok()
            {
                err.code = ErrorCode::InvalidOverride;
            }
            err
        })?
    };
    resolve(document)
}

pub fn load_scenario_file(path: &Path, overrides: &[Override]) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ScenarioError::new(
            ErrorCode::UnresolvedFile,
            "",
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    load_scenario_with(&text, overrides)
}

fn unresolved(path: impl Into<String>, what: &str, name: &str) -> ScenarioError {
    ScenarioError::new(
        ErrorCode::UnresolvedReference,
        path,
        format!("no {what} profile named '{name}'"),
    )
}

fn violation(path: impl Into<String>, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::new(ErrorCode::InvariantViolation, path, msg)
}

fn selection(r: &ProfileRef) -> Selection<'_> {
    Selection {
        all: r.pick,
        fields: Some(&r.select),
    }
}

/// Resolves and validates a parsed document.
pub fn resolve(document: ScenarioDocument) -> Result<Scenario, ScenarioError> {
    if let Some((section, name)) = document.profiles.duplicate_name() {
        return Err(violation(
            format!("profiles.{section}"),
            format!("duplicate profile name '{name}'"),
        ));
    }
    let catalog = builtin_catalog().shadowed_by(&document.profiles);
    let mut provenance = Vec::new();
    let mut echo = |items: Vec<ParamEcho>| {
        for item in items {
            if !provenance.contains(&item) {
                provenance.push(item);
            }
        }
    };

    let network =
        |r: &ProfileRef, path: &str| -> Result<(NetworkProfile, Vec<ParamEcho>), ScenarioError> {
            catalog
                .network(&r.name)
                .ok_or_else(|| unresolved(path, "network", &r.name))?
                .resolve(path, &selection(r))
        };

    let mut fleets = Vec::new();
    for (i, f) in document.device_fleets.iter().enumerate() {
        let path = format!("device_fleets[{i}]");
        let entry = catalog
            .device(&f.device.name)
            .ok_or_else(|| unresolved(format!("{path}.device"), "device", &f.device.name))?;
        let (profile, items) = entry.resolve(&format!("{path}.device"), &selection(&f.device))?;
        echo(items);
        let net = match &f.network {
            Some(r) => {
                let (p, items) = network(r, &format!("{path}.network"))?;
                echo(items);
                Some(p)
            }
            None => None,
        };
        let mut workload = Vec::new();
        for (j, w) in f.workload.iter().enumerate() {
            let mut request = StreamRequest::new(w.duration, w.bitrate, w.direction)
                .map_err(|e| violation(format!("{path}.workload[{j}]"), e.to_string()))?;
            if let Some(size) = w.video_size {
                request = request.with_video_size(size);
            }
            workload.push(RequestBatch {
                request,
                count: w.per_device,
            });
        }
        let label = f.label.clone().unwrap_or_else(|| f.device.name.clone());
        if fleets.iter().any(|x: &ResolvedFleet| x.label == label) {
            return Err(violation(path, format!("duplicate fleet label '{label}'")));
        }
        fleets.push(ResolvedFleet {
            label,
            entry: FleetEntry {
                profile,
                devices: f.count,
                workload,
            },
            network: net,
            via_provider: f.via_provider,
        });
    }

    let servers = match &document.server_fleet {
        Some(s) => {
            let path = "server_fleet.server";
            let entry = catalog
                .server(&s.server.name)
                .ok_or_else(|| unresolved(path, "server", &s.server.name))?;
            let (profile, items) = entry.resolve(path, &selection(&s.server))?;
            echo(items);
            Some(ResolvedServers {
                profile,
                count: s.count,
            })
        }
        None => None,
    };
    let server_count = servers.as_ref().map_or(0.0, |s| s.count.get());

    let cdn_network = match &document.cdn_network {
        Some(r) => {
            let (p, items) = network(r, "cdn_network")?;
            echo(items);
            Some(p)
        }
        None => None,
    };

    let default_enc = servers.as_ref().map(|s| s.profile.p_enc);
    let default_dec = servers.as_ref().map(|s| s.profile.p_dec);
    let variant = |v: &VariantSpec, path: &str, echo: &mut dyn FnMut(Vec<ParamEcho>)| {
        let p_enc = match (&v.encoder, v.p_enc) {
            (Some(_), Some(_)) => {
                return Err(violation(path, "set either 'encoder' or 'p_enc', not both"))
            }
            (Some(name), None) => {
                let preset = catalog
                    .encoder(name)
                    .ok_or_else(|| unresolved(format!("{path}.encoder"), "encoder", name))?;
                echo(vec![ParamEcho {
                    parameter: format!("encoder:{name}"),
                    value: preset.power.to_string(),
                    pick: None,
                    source: preset
                        .provenance
                        .clone()
                        .unwrap_or_else(|| "scenario document".into()),
                }]);
                preset.power
            }
            (None, Some(p)) => p,
            (None, None) => default_enc.ok_or_else(|| {
                violation(
                    path,
                    "no encoder given and no server fleet to take a default from",
                )
            })?,
        };
        EncodeVariant::new(v.label.clone(), p_enc, v.output_size)
            .map_err(|e| violation(format!("{path}.output_size"), e.to_string()))
    };

    let mut assets = Vec::new();
    for (i, a) in document.assets.iter().enumerate() {
        let path = format!("assets[{i}]");
        if assets.iter().any(|x: &ResolvedAsset| x.label == a.label) {
            return Err(violation(
                path,
                format!("duplicate asset label '{}'", a.label),
            ));
        }
        if a.duration.si() <= 0.0 {
            return Err(violation(
                format!("{path}.duration"),
                "asset duration must be > 0",
            ));
        }
        let mut variants = Vec::new();
        for (j, v) in a.variants.iter().enumerate() {
            variants.push(variant(v, &format!("{path}.variants[{j}]"), &mut echo)?);
        }
        let stored_on = match a.stored_on {
            StoredOn::None => Count::ZERO,
            StoredOn::Servers(c) => c,
            StoredOn::All => Count::new(server_count).expect("server count is valid"),
        };
        if stored_on.get() > server_count {
            return Err(violation(
                format!("{path}.stored_on"),
                format!(
                    "stored on {} servers but the fleet has {}",
                    stored_on.get(),
                    server_count
                ),
            ));
        }
        if stored_on.get() > 0.0 && variants.is_empty() {
            return Err(violation(
                format!("{path}.stored_on"),
                "a stored asset needs at least one variant",
            ));
        }
        let p_dec = match (&a.decoder, a.p_dec) {
            (Some(_), Some(_)) => {
                return Err(violation(path, "set either 'decoder' or 'p_dec', not both"))
            }
            (Some(name), None) => {
                let preset = catalog
                    .decoder(name)
                    .ok_or_else(|| unresolved(format!("{path}.decoder"), "decoder", name))?;
                echo(vec![ParamEcho {
                    parameter: format!("decoder:{name}"),
                    value: preset.power.to_string(),
                    pick: None,
                    source: preset
                        .provenance
                        .clone()
                        .unwrap_or_else(|| "scenario document".into()),
                }]);
                preset.power
            }
            (None, Some(p)) => p,
            (None, None) => default_dec.unwrap_or(Power::ZERO),
        };
        let largest = variants
            .iter()
            .map(|v| v.output_size)
            .fold(None, |m: Option<DataSize>, s| {
                Some(m.map_or(s, |m| if s > m { s } else { m }))
            });
        let source_size = match (a.source_size, largest) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) if a.uploaded => {
                return Err(violation(
                    format!("{path}.source_size"),
                    "an uploaded asset without variants needs a source_size",
                ))
            }
            (None, None) => DataSize::ZERO,
        };
        if (a.uploaded || stored_on.get() > 0.0) && servers.is_none() {
            return Err(violation(
                path,
                "asset handled by a provider but no server_fleet is given",
            ));
        }
        assets.push(ResolvedAsset {
            label: a.label.clone(),
            count: a.count,
            duration: a.duration,
            variants,
            uploaded: a.uploaded,
            source_size,
            p_dec,
            stored_on,
            stored_fraction_of_year: a.stored_fraction_of_year,
            request_forecast: a.request_forecast,
        });
    }

    if servers.is_none()
        && fleets.iter().any(|f| {
            f.via_provider
                && f.entry
                    .workload
                    .iter()
                    .any(|b| b.request.direction().receives())
                && f.entry.devices.get() > 0.0
        })
    {
        return Err(violation(
            "server_fleet",
            "fleets receive streams from the provider but no server_fleet is given",
        ));
    }

    let encoder_study = match &document.encoder_study {
        Some(s) => {
            let asset = assets
                .iter()
                .position(|a| a.label == s.asset)
                .ok_or_else(|| {
                    ScenarioError::new(
                        ErrorCode::UnresolvedReference,
                        "encoder_study.asset",
                        format!("no asset labelled '{}'", s.asset),
                    )
                })?;
            let viewers = fleets
                .iter()
                .position(|f| f.label == s.viewers)
                .ok_or_else(|| {
                    ScenarioError::new(
                        ErrorCode::UnresolvedReference,
                        "encoder_study.viewers",
                        format!("no fleet labelled '{}'", s.viewers),
                    )
                })?;
            if !fleets[viewers]
                .entry
                .workload
                .iter()
                .any(|b| b.request.direction().receives())
            {
                return Err(violation(
                    "encoder_study.viewers",
                    "the viewer fleet has no receive workload",
                ));
            }
            if s.options.is_empty() {
                return Err(violation(
                    "encoder_study.options",
                    "at least one option is required",
                ));
            }
            let mut options = Vec::new();
            for (j, v) in s.options.iter().enumerate() {
                options.push(variant(
                    v,
                    &format!("encoder_study.options[{j}]"),
                    &mut echo,
                )?);
            }
            Some(EncoderStudy {
                asset,
                viewers,
                options,
                video_mix: s.video_mix.clone(),
            })
        }
        None => None,
    };

    if document.horizon.si() <= 0.0 {
        return Err(violation("horizon", "horizon must be > 0"));
    }

    Ok(Scenario {
        name: document.name.clone(),
        horizon: document.horizon,
        carbon_intensity: document.carbon_intensity,
        fleets,
        servers,
        cdn_network,
        assets,
        encoder_study,
        provenance,
        document,
    })
}

const BUILTIN_SCENARIOS: [(&str, &str); 5] = [
    (
        "on-demand",
        include_str!("../../data/scenarios/on-demand.json"),
    ),
    ("iptv", include_str!("../../data/scenarios/iptv.json")),
    (
        "social-network",
        include_str!("../../data/scenarios/social-network.json"),
    ),
    (
        "teleconference",
        include_str!("../../data/scenarios/teleconference.json"),
    ),
    (
        "single-video",
        include_str!("../../data/scenarios/single-video.json"),
    ),
];

pub fn builtin_scenario_names() -> impl Iterator<Item = &'static str> {
    BUILTIN_SCENARIOS.iter().map(|(n, _)| *n)
}

/// Source text of a shipped scenario.
pub fn builtin_scenario_source(name: &str) -> Option<&'static str> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenario_source(name)
        .map(|text| load_scenario(text).expect("shipped scenarios are valid"))
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    builtin_scenario_names()
        .map(|n| builtin_scenario(n).expect("listed"))
        .collect()
}

/// Loads `builtin:<name>` or a file path.
pub fn load_scenario_ref(spec: &str, overrides: &[Override]) -> Result<Scenario, ScenarioError> {
    match spec.strip_prefix("builtin:") {
        Some(name) => {
            let text = builtin_scenario_source(name).ok_or_else(|| {
                ScenarioError::new(
                    ErrorCode::UnresolvedFile,
                    "",
                    format!(
                        "no builtin scenario '{name}'; available: {}",
                        builtin_scenario_names().collect::<Vec<_>>().join(", ")
                    ),
                )
            })?;
            load_scenario_with(text, overrides)
        }
        None => load_scenario_file(Path::new(spec), overrides),
    }
}
