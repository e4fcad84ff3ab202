//! Scenario evaluation into a hierarchical energy report, plus JSON and CSV
//! output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{
    ghg_emissions, nw_energy, service_energy, ut_device_energy, vp_decode_energy, vp_encode_energy,
    vp_provider_energy, vp_storage_energy, vp_transfer_energy, NetworkPath, ServerTaskEnergies,
    StreamRequest, TranscodeJob,
};
use crate::quantity::{CarbonIntensity, Count, DataSize, Energy, Mass, TimeSpan};
use crate::scenario::{ParamEcho, Scenario};
use crate::units::JOULES_PER_KWH;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceShare {
    pub fleet: String,
    pub device: String,
    pub energy: Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalBreakdown {
    pub total: Energy,
    pub by_fleet: Vec<DeviceShare>,
}

/// Provider energy per task, each already multiplied by PUE.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProviderTasks {
    pub offset: Energy,
    pub tx: Energy,
    pub rx: Energy,
    pub copies: Energy,
    pub decoding: Energy,
    pub encoding: Energy,
    pub storage: Energy,
}

impl ProviderTasks {
    pub const NAMES: [&'static str; 7] = [
        "offset", "tx", "rx", "copies", "decoding", "encoding", "storage",
    ];

    pub fn entries(&self) -> [(&'static str, Energy); 7] {
        [
            ("offset", self.offset),
            ("tx", self.tx),
            ("rx", self.rx),
            ("copies", self.copies),
            ("decoding", self.decoding),
            ("encoding", self.encoding),
            ("storage", self.storage),
        ]
    }

    pub fn sum(&self) -> Energy {
        self.entries().iter().map(|(_, e)| *e).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderBreakdown {
    pub total: Energy,
    pub pue: f64,
    pub servers: Count,
    pub tasks: ProviderTasks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkBreakdown {
    pub total: Energy,
    pub end_user: Energy,
    pub cdn: Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhgBreakdown {
    pub carbon_intensity: CarbonIntensity,
    pub total: Mass,
    pub terminals: Mass,
    pub provider: Mass,
    pub network: Mass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub service: String,
    pub horizon: TimeSpan,
    pub total: Energy,
    pub terminals: TerminalBreakdown,
    pub provider: ProviderBreakdown,
    pub network: NetworkBreakdown,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghg: Option<GhgBreakdown>,
    pub provenance: Vec<ParamEcho>,
}

/// Raw (pre-PUE) provider task energies of a scenario's server pool.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawProviderTasks {
    pub offset: Energy,
    pub tx: Energy,
    pub rx: Energy,
    pub copies: Energy,
    pub decoding: Energy,
    pub encoding: Energy,
    pub storage: Energy,
}

impl RawProviderTasks {
    pub fn server_parts(&self) -> ServerTaskEnergies {
        ServerTaskEnergies {
            offset: self.offset,
            rx: self.rx,
            transcode: self.decoding + self.encoding,
            copy: self.copies,
            store: self.storage,
            tx: self.tx,
        }
    }
}

/// Bits sent by the provider to end users over the horizon.
pub fn delivered_bits(scenario: &Scenario) -> DataSize {
    scenario
        .fleets
        .iter()
        .filter(|f| f.via_provider)
        .flat_map(|f| {
            f.entry
                .workload
                .iter()
                .filter(|b| b.request.direction().receives())
                .map(move |b| {
                    DataSize::new(
                        b.request.video_size().si() * b.count.get() * f.entry.devices.get(),
                    )
                    .expect("non-negative")
                })
        })
        .sum()
}

pub fn raw_provider_tasks(scenario: &Scenario) -> RawProviderTasks {
    let Some(servers) = &scenario.servers else {
        return RawProviderTasks::default();
    };
    let p = &servers.profile;
    let years = scenario.horizon_years();
    let mut raw = RawProviderTasks {
        offset: p.e_offset_year.times(servers.count.get() * years),
        tx: vp_transfer_energy(delivered_bits(scenario), p.e_send),
        ..Default::default()
    };
    for a in &scenario.assets {
        let n = a.count.get();
        if a.uploaded {
            raw.rx += vp_transfer_energy(a.source_size, p.e_rx).times(n);
            raw.decoding += vp_decode_energy(a.duration, a.p_dec).times(n);
            let job = TranscodeJob {
                source_duration: a.duration,
                output_variants: a.variants.clone(),
            };
            raw.encoding += vp_encode_energy(&job).times(n);
        }
        let sizes: Vec<DataSize> = a.variants.iter().map(|v| v.output_size).collect();
        raw.storage += vp_storage_energy(&sizes, p.e_store, a.stored_fraction_of_year)
            .times(n * a.stored_on.get() * years);
        raw.copies += vp_transfer_energy(a.stored_bits(), p.e_send).times(n * a.copies());
    }
    raw
}

fn end_user_paths(scenario: &Scenario) -> Vec<NetworkPath> {
    let mut paths = Vec::new();
    for f in &scenario.fleets {
        let Some(net) = &f.network else { continue };
        for b in &f.entry.workload {
            paths.push(NetworkPath {
                profile: net.clone(),
                request: b.request,
                count: Count::new(b.count.get() * f.entry.devices.get()).expect("non-negative"),
            });
        }
    }
    paths
}

fn cdn_paths(scenario: &Scenario) -> Vec<NetworkPath> {
    let Some(net) = &scenario.cdn_network else {
        return Vec::new();
    };
    let mut paths = Vec::new();
    for a in &scenario.assets {
        let copies = a.count.get() * a.copies();
        if copies == 0.0 {
            continue;
        }
        for v in &a.variants {
            let request = StreamRequest::new(
                a.duration,
                v.output_size / a.duration,
                crate::model::Direction::Rx,
            )
            .expect("asset duration and variant size are positive");
            paths.push(NetworkPath {
                profile: net.clone(),
                request,
                count: Count::new(copies).expect("non-negative"),
            });
        }
    }
    paths
}

pub fn evaluate(scenario: &Scenario) -> EnergyReport {
    let by_fleet: Vec<DeviceShare> = scenario
        .fleets
        .iter()
        .map(|f| DeviceShare {
            fleet: f.label.clone(),
            device: f.entry.profile.name.clone(),
            energy: ut_device_energy(&f.entry.profile, &f.entry.workload)
                .times(f.entry.devices.get()),
        })
        .collect();
    let ut_total: Energy = by_fleet.iter().map(|d| d.energy).sum();

    let raw = raw_provider_tasks(scenario);
    let (pue, servers) = match &scenario.servers {
        Some(s) => (s.profile.pue, s.count),
        None => (1.0, Count::ZERO),
    };
    let vp_total = match &scenario.servers {
        Some(s) => vp_provider_energy(&[(s.profile.clone(), raw.server_parts())]),
        None => Energy::ZERO,
    };
    let tasks = ProviderTasks {
        offset: raw.offset.times(pue),
        tx: raw.tx.times(pue),
        rx: raw.rx.times(pue),
        copies: raw.copies.times(pue),
        decoding: raw.decoding.times(pue),
        encoding: raw.encoding.times(pue),
        storage: raw.storage.times(pue),
    };

    let (nw_ut, nw_cdn) = nw_energy(&end_user_paths(scenario), &cdn_paths(scenario));
    let nw_total = nw_ut + nw_cdn;

    let mut report = EnergyReport {
        service: scenario.name.clone(),
        horizon: scenario.horizon,
        total: service_energy(ut_total, vp_total, nw_total),
        terminals: TerminalBreakdown {
            total: ut_total,
            by_fleet,
        },
        provider: ProviderBreakdown {
            total: vp_total,
            pue,
            servers,
            tasks,
        },
        network: NetworkBreakdown {
            total: nw_total,
            end_user: nw_ut,
            cdn: nw_cdn,
        },
        ghg: None,
        provenance: scenario.provenance.clone(),
    };
    if let Some(ci) = scenario.carbon_intensity {
        report.ghg = Some(ghg_report(&report, ci));
    }
    report
}

pub fn ghg_report(report: &EnergyReport, ci: CarbonIntensity) -> GhgBreakdown {
    GhgBreakdown {
        carbon_intensity: ci,
        total: ghg_emissions(report.total, ci),
        terminals: ghg_emissions(report.terminals.total, ci),
        provider: ghg_emissions(report.provider.total, ci),
        network: ghg_emissions(report.network.total, ci),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "service,component,subcategory,value_kwh";

/// Energy in kWh, shortest representation that round-trips.
pub fn kwh_cell(e: Energy) -> String {
    format!("{:e}", e.si() / JOULES_PER_KWH)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per (service, component, subcategory), for several reports.
pub fn to_csv(reports: &[EnergyReport]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let svc = csv_field(&r.service);
        let mut row = |component: &str, sub: &str, e: Energy| {
            let _ = writeln!(out, "{svc},{component},{},{}", csv_field(sub), kwh_cell(e));
        };
        row("total", "total", r.total);
        row("UT", "total", r.terminals.total);
        for d in &r.terminals.by_fleet {
            row("UT", &d.fleet, d.energy);
        }
        row("VP", "total", r.provider.total);
        for (name, e) in r.provider.tasks.entries() {
            row("VP", name, e);
        }
        row("NW", "total", r.network.total);
        row("NW", "UT", r.network.end_user);
        row("NW", "CDN", r.network.cdn);
    }
    out
}

pub fn to_json(report: &EnergyReport) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

pub fn emit(report: &EnergyReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report).into_bytes(),
        Format::Csv => to_csv(std::slice::from_ref(report)).into_bytes(),
    }
}
