//! Provider-side (data center / CDN) energy.

use serde::{Deserialize, Serialize};

use crate::model::ModelError;
use crate::quantity::{DataSize, Energy, EnergyPerBit, EnergyPerBitYear, Power, TimeSpan};
use crate::units::SECONDS_PER_YEAR;

/// Per-server energy parameters. `e_send` covers both delivery to end users
/// and copies pushed to surrogate servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerProfile {
    pub pue: f64,
    pub e_offset_year: Energy,
    pub e_send: EnergyPerBit,
    pub e_rx: EnergyPerBit,
    pub e_store: EnergyPerBitYear,
    /// Decoding energy per second of video.
    pub p_dec: Power,
    /// Default encoding energy per second of video, used when a variant
    /// does not carry its own.
    pub p_enc: Power,
}

impl ServerProfile {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.pue.is_finite() && self.pue >= 1.0) {
            return Err(ModelError::Invalid("PUE must be finite and >= 1"));
        }
        Ok(())
    }
}

/// One encoded output of a transcoding job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeVariant {
    pub label: String,
    /// Encoding energy per second of video.
    pub p_enc: Power,
    pub output_size: DataSize,
}

impl EncodeVariant {
    pub fn new(
        label: impl Into<String>,
        p_enc: Power,
        output_size: DataSize,
    ) -> Result<Self, ModelError> {
        if output_size.si() <= 0.0 {
            return Err(ModelError::Invalid("variant output size must be > 0"));
        }
        Ok(EncodeVariant {
            label: label.into(),
            p_enc,
            output_size,
        })
    }
}

/// Decode once, then encode every output variant (possibly none).
#[derive(Debug, Clone, PartialEq)]
pub struct TranscodeJob {
    pub source_duration: TimeSpan,
    pub output_variants: Vec<EncodeVariant>,
}

/// Share of the year an asset is held in storage, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct YearFraction(f64);

impl YearFraction {
    pub const FULL: YearFraction = YearFraction(1.0);

    pub fn new(value: f64) -> Result<Self, ModelError> {
        if (0.0..=1.0).contains(&value) {
            Ok(YearFraction(value))
        } else {
            Err(ModelError::Invalid(
                "stored fraction of year must lie in [0, 1]",
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for YearFraction {
    fn default() -> Self {
        YearFraction::FULL
    }
}

impl<'de> Deserialize<'de> for YearFraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        YearFraction::new(v)
            .map_err(|e| serde::de::Error::custom(format!("[invariant-violation] {e}")))
    }
}

/// The six task energies of one server (or a pool of identical servers),
/// before PUE.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ServerTaskEnergies {
    pub offset: Energy,
    pub rx: Energy,
    pub transcode: Energy,
    pub copy: Energy,
    pub store: Energy,
    pub tx: Energy,
}

impl ServerTaskEnergies {
    pub fn scaled(&self, factor: f64) -> ServerTaskEnergies {
        ServerTaskEnergies {
            offset: self.offset.times(factor),
            rx: self.rx.times(factor),
            transcode: self.transcode.times(factor),
            copy: self.copy.times(factor),
            store: self.store.times(factor),
            tx: self.tx.times(factor),
        }
    }
}

/// Bits moved times energy per bit; serves delivery, surrogate copies and uploads.
pub fn vp_transfer_energy(bits: DataSize, per_bit: EnergyPerBit) -> Energy {
    bits * per_bit
}

pub fn vp_decode_energy(duration: TimeSpan, p_dec: Power) -> Energy {
    p_dec * duration
}

pub fn vp_encode_energy(job: &TranscodeJob) -> Energy {
    job.output_variants
        .iter()
        .map(|v| v.p_enc * job.source_duration)
        .sum()
}

/// Decoding counted once per job plus one encode per output variant.
pub fn vp_transcode_energy(job: &TranscodeJob, p_dec: Power) -> Energy {
    vp_decode_energy(job.source_duration, p_dec) + vp_encode_energy(job)
}

pub fn vp_storage_energy(
    stored: &[DataSize],
    per_bit_year: EnergyPerBitYear,
    stored_fraction_of_year: YearFraction,
) -> Energy {
    let bits: DataSize = stored.iter().sum();
    let held = TimeSpan::new(stored_fraction_of_year.get() * SECONDS_PER_YEAR)
        .expect("fraction is within [0, 1]");
    (per_bit_year * bits) * held
}

/// Raw yearly energy of one server; PUE is not applied here.
pub fn vp_server_energy(parts: &ServerTaskEnergies) -> Energy {
    parts.offset + parts.rx + parts.transcode + parts.copy + parts.store + parts.tx
}

/// PUE-weighted sum over all servers of a provider.
pub fn vp_provider_energy(servers: &[(ServerProfile, ServerTaskEnergies)]) -> Energy {
    servers
        .iter()
        .map(|(profile, parts)| vp_server_energy(parts).times(profile.pue))
        .sum()
}
