//! Per-video encoder decisions: request sweeps, crossover points, optimal
//! assignment over a catalog, bitrate ladders and surrogate scaling.
//!
//! Every cost here is affine in the request count: a fixed part paid once per
//! video (receive, transcode, storage, copies) and a per-request part
//! (server send, access network, terminal).

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    nw_request_energy, ut_request_energy, vp_decode_energy, vp_storage_energy, vp_transfer_energy,
    DevicePowerProfile, Direction, EncodeVariant, NetworkProfile, StreamRequest, YearFraction,
};
use crate::quantity::{
    Count, DataRate, DataSize, Energy, EnergyPerBit, EnergyPerBitYear, Power, TimeSpan,
};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("scenario '{0}' has no encoder_study section")]
    NoStudy(String),
    #[error("scenario '{0}' has no server fleet")]
    NoServers(String),
    #[error("request grid must be non-negative and strictly increasing")]
    InvalidGrid,
    #[error("at least one encoder option is required")]
    NoOptions,
    #[error("server counts must be >= 1")]
    InvalidServerCount,
}

/// One way to encode the reference video.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncoderOption {
    pub label: String,
    /// Encoding energy per second of video.
    pub p_enc: Power,
    pub output_size: DataSize,
}

impl EncoderOption {
    pub fn implied_bitrate(&self, duration: TimeSpan) -> DataRate {
        self.output_size / duration
    }
}

impl From<&EncodeVariant> for EncoderOption {
    fn from(v: &EncodeVariant) -> Self {
        EncoderOption {
            label: v.label.clone(),
            p_enc: v.p_enc,
            output_size: v.output_size,
        }
    }
}

/// Fixed and per-request energy of one video under one encoding choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostLine {
    pub fixed: Energy,
    pub per_request: Energy,
}

impl CostLine {
    pub fn total(&self, requests: f64) -> Energy {
        self.fixed + self.per_request.times(requests)
    }

    pub fn scaled(&self, k: f64) -> CostLine {
        CostLine {
            fixed: self.fixed.times(k),
            per_request: self.per_request.times(k),
        }
    }
}

/// Everything needed to price one video independently of its encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoCostModel {
    pub pue: f64,
    pub duration: TimeSpan,
    pub uploaded: bool,
    pub source_size: DataSize,
    pub p_dec: Power,
    pub e_send: EnergyPerBit,
    pub e_rx: EnergyPerBit,
    pub e_store: EnergyPerBitYear,
    pub e_offset_year: Energy,
    pub stored_fraction_of_year: YearFraction,
    /// Servers holding the video, origin included.
    pub stored_on: f64,
    pub cdn_network: Option<NetworkProfile>,
    pub viewer: DevicePowerProfile,
    /// Request as seen by the viewer; its bitrate drives the access network term.
    pub viewer_request: StreamRequest,
    pub access_network: Option<NetworkProfile>,
}

impl VideoCostModel {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, OptimizerError> {
        let study = scenario
            .encoder_study
            .as_ref()
            .ok_or_else(|| OptimizerError::NoStudy(scenario.name.clone()))?;
        let servers = scenario
            .servers
            .as_ref()
            .ok_or_else(|| OptimizerError::NoServers(scenario.name.clone()))?;
        let asset = &scenario.assets[study.asset];
        let fleet = &scenario.fleets[study.viewers];
        let request = fleet
            .entry
            .workload
            .iter()
            .find(|b| b.request.direction().receives())
            .expect("validated: viewers have a receive workload")
            .request;
        let p = &servers.profile;
        Ok(VideoCostModel {
            pue: p.pue,
            duration: asset.duration,
            uploaded: asset.uploaded,
            source_size: asset.source_size,
            p_dec: asset.p_dec,
            e_send: p.e_send,
            e_rx: p.e_rx,
            e_store: p.e_store,
            e_offset_year: p.e_offset_year,
            stored_fraction_of_year: asset.stored_fraction_of_year,
            stored_on: asset.stored_on.get().max(1.0),
            cdn_network: scenario.cdn_network.clone(),
            viewer: fleet.entry.profile.clone(),
            viewer_request: StreamRequest::new(
                request.duration(),
                request.bitrate(),
                Direction::Rx,
            )
            .expect("validated request"),
            access_network: fleet.network.clone(),
        })
    }

    pub fn options_from_scenario(
        scenario: &Scenario,
    ) -> Result<Vec<EncoderOption>, OptimizerError> {
        let study = scenario
            .encoder_study
            .as_ref()
            .ok_or_else(|| OptimizerError::NoStudy(scenario.name.clone()))?;
        Ok(study.options.iter().map(EncoderOption::from).collect())
    }

    pub fn with_stored_on(&self, servers: f64) -> Self {
        VideoCostModel {
            stored_on: servers,
            ..self.clone()
        }
    }

    fn copy_network_energy(&self, size: DataSize) -> Energy {
        let Some(net) = &self.cdn_network else {
            return Energy::ZERO;
        };
        let copies = (self.stored_on - 1.0).max(0.0);
        if copies == 0.0 {
            return Energy::ZERO;
        }
        let request = StreamRequest::new(self.duration, size / self.duration, Direction::Rx)
            .expect("positive duration and size");
        nw_request_energy(net, &request).times(copies)
    }

    /// Storage and copies of the given outputs, PUE applied to the server part.
    pub fn placement_cost(&self, variants: &[EncoderOption]) -> Energy {
        let sizes: Vec<DataSize> = variants.iter().map(|v| v.output_size).collect();
        let bits: DataSize = sizes.iter().sum();
        let storage = vp_storage_energy(&sizes, self.e_store, self.stored_fraction_of_year)
            .times(self.stored_on);
        let copies = vp_transfer_energy(bits, self.e_send).times((self.stored_on - 1.0).max(0.0));
        let network: Energy = sizes.iter().map(|s| self.copy_network_energy(*s)).sum();
        (storage + copies).times(self.pue) + network
    }

    /// Receive, decode once, encode every output, then place them.
    pub fn fixed_cost_of_set(&self, variants: &[EncoderOption]) -> Energy {
        let mut server = Energy::ZERO;
        if self.uploaded {
            server += vp_transfer_energy(self.source_size, self.e_rx);
            server += vp_decode_energy(self.duration, self.p_dec);
        }
        server += variants
            .iter()
            .map(|v| v.p_enc * self.duration)
            .sum::<Energy>();
        server.times(self.pue) + self.placement_cost(variants)
    }

    pub fn fixed_cost(&self, option: &EncoderOption) -> Energy {
        self.fixed_cost_of_set(std::slice::from_ref(option))
    }

    /// Server send of the chosen output, access network and terminal. The
    /// terminal term is the same for every option.
    pub fn per_request_cost(&self, option: &EncoderOption) -> Energy {
        let send = vp_transfer_energy(option.output_size, self.e_send).times(self.pue);
        let network = self
            .access_network
            .as_ref()
            .map_or(Energy::ZERO, |n| nw_request_energy(n, &self.viewer_request));
        send + network + ut_request_energy(&self.viewer, &self.viewer_request)
    }

    pub fn line(&self, option: &EncoderOption) -> CostLine {
        CostLine {
            fixed: self.fixed_cost(option),
            per_request: self.per_request_cost(option),
        }
    }

    pub fn total(&self, option: &EncoderOption, requests: f64) -> Energy {
        self.line(option).total(requests)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub requests: f64,
    pub option: String,
    pub energy: Energy,
}

pub fn sweep_requests(
    model: &VideoCostModel,
    options: &[EncoderOption],
    grid: &[f64],
) -> Result<Vec<SweepRow>, OptimizerError> {
    let valid =
        grid.iter().all(|n| n.is_finite() && *n >= 0.0) && grid.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(OptimizerError::InvalidGrid);
    }
    let mut rows = Vec::with_capacity(grid.len() * options.len());
    for &n in grid {
        for o in options {
            rows.push(SweepRow {
                requests: n,
                option: o.label.clone(),
                energy: model.total(o, n),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Crossover {
    /// Lines meet at `requests`; `ceiling` is the first whole request count at
    /// or beyond it.
    At { requests: f64, ceiling: f64 },
    /// Lines never meet at a non-negative request count.
    Never,
    /// Identical lines.
    AlwaysEqual,
}

pub fn crossover_of_lines(a: CostLine, b: CostLine) -> Crossover {
    let slope = a.per_request.si() - b.per_request.si();
    let gap = b.fixed.si() - a.fixed.si();
    if slope == 0.0 {
        return if gap == 0.0 {
            Crossover::AlwaysEqual
        } else {
            Crossover::Never
        };
    }
    let n = gap / slope;
    if n < 0.0 || !n.is_finite() {
        Crossover::Never
    } else {
        Crossover::At {
            requests: n,
            ceiling: n.ceil(),
        }
    }
}

pub fn crossover(model: &VideoCostModel, a: &EncoderOption, b: &EncoderOption) -> Crossover {
    crossover_of_lines(model.line(a), model.line(b))
}

/// A group of identical videos with the same demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoDemand<'a> {
    pub model: &'a VideoCostModel,
    pub forecast: Count,
    pub videos: Count,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyTotal {
    pub policy: String,
    pub energy: Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// Chosen option index per demand group.
    pub choices: Vec<usize>,
    pub choice_labels: Vec<String>,
    /// One total per uniform policy, in option order.
    pub uniform: Vec<PolicyTotal>,
    pub optimal: Energy,
}

/// Index of the cheapest option; ties go to the lower encoding power.
pub fn cheapest(lines: &[CostLine], options: &[EncoderOption], forecast: f64) -> usize {
    let mut best = 0;
    for i in 1..lines.len() {
        let (ei, eb) = (
            lines[i].total(forecast).si(),
            lines[best].total(forecast).si(),
        );
        if ei < eb || (ei == eb && options[i].p_enc < options[best].p_enc) {
            best = i;
        }
    }
    best
}

pub fn assign_optimal_encoders(
    videos: &[VideoDemand<'_>],
    options: &[EncoderOption],
) -> Result<Assignment, OptimizerError> {
    if options.is_empty() {
        return Err(OptimizerError::NoOptions);
    }
    let mut uniform = vec![Energy::ZERO; options.len()];
    let mut optimal = Energy::ZERO;
    let mut choices = Vec::with_capacity(videos.len());
    for v in videos {
        let lines: Vec<CostLine> = options.iter().map(|o| v.model.line(o)).collect();
        let n = v.forecast.get();
        for (u, l) in uniform.iter_mut().zip(&lines) {
            *u += l.total(n).times(v.videos.get());
        }
        let best = cheapest(&lines, options, n);
        optimal += lines[best].total(n).times(v.videos.get());
        choices.push(best);
    }
    Ok(Assignment {
        choice_labels: choices.iter().map(|&i| options[i].label.clone()).collect(),
        choices,
        uniform: options
            .iter()
            .zip(uniform)
            .map(|(o, e)| PolicyTotal {
                policy: format!("all-{}", o.label),
                energy: e,
            })
            .collect(),
        optimal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderImpact {
    pub single: Energy,
    pub ladder: Energy,
    /// `(ladder - single) / single`.
    pub relative_delta: f64,
}

/// Serving a whole ladder instead of its first variant, with both stored on
/// the origin plus `surrogates`. Requests are served by the first variant.
pub fn ladder_impact(
    base: &VideoCostModel,
    ladder: &[EncoderOption],
    forecast: Count,
    surrogates: Count,
) -> Result<LadderImpact, OptimizerError> {
    let first = ladder.first().ok_or(OptimizerError::NoOptions)?;
    let model = base.with_stored_on(1.0 + surrogates.get());
    let per_request = model.per_request_cost(first).times(forecast.get());
    let single = model.fixed_cost(first) + per_request;
    let all = model.fixed_cost_of_set(ladder) + per_request;
    Ok(LadderImpact {
        single,
        ladder: all,
        relative_delta: (all.si() - single.si()) / single.si(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub servers: f64,
    /// Idle energy of the servers, reported separately because it is not
    /// caused by the video.
    pub server_offset: Energy,
    pub placement: Energy,
    /// Everything attributable to the video at this server count.
    pub video_total: Energy,
    pub relative_to_first: f64,
}

pub fn surrogate_scaling(
    model: &VideoCostModel,
    option: &EncoderOption,
    forecast: Count,
    server_counts: &[f64],
) -> Result<Vec<ScalingRow>, OptimizerError> {
    if server_counts.iter().any(|c| !(c.is_finite() && *c >= 1.0)) {
        return Err(OptimizerError::InvalidServerCount);
    }
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(server_counts.len());
    for &count in server_counts {
        let m = model.with_stored_on(count);
        let total = m.total(option, forecast.get());
        let first = rows.first().map_or(total, |r| r.video_total);
        rows.push(ScalingRow {
            servers: count,
            server_offset: model.e_offset_year.times(count * model.pue),
            placement: m.placement_cost(std::slice::from_ref(option)),
            video_total: total,
            relative_to_first: (total.si() - first.si()) / first.si(),
        });
    }
    Ok(rows)
}

/// Request count after which re-encoding a video already served with `from`
/// into `to` pays for itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReencodeBreakEven {
    pub from: String,
    pub to: String,
    /// Decode, encode and placement of the new output.
    pub extra_fixed: Energy,
    pub saving_per_request: Energy,
    /// Further requests needed; none if `to` is not cheaper per request.
    pub requests: Option<f64>,
}

pub fn reencode_break_even(
    model: &VideoCostModel,
    from: &EncoderOption,
    to: &EncoderOption,
) -> ReencodeBreakEven {
    let mut m = model.clone();
    // the source is already on the server, so nothing is received again
    m.uploaded = false;
    let extra_fixed = m.fixed_cost(to) + vp_decode_energy(m.duration, m.p_dec).times(m.pue);
    let saving = model.per_request_cost(from).si() - model.per_request_cost(to).si();
    ReencodeBreakEven {
        from: from.label.clone(),
        to: to.label.clone(),
        extra_fixed,
        saving_per_request: Energy::new(saving.max(0.0)).expect("clamped"),
        requests: (saving > 0.0).then(|| extra_fixed.si() / saving),
    }
}
