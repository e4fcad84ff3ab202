//! End-user terminal energy.

use serde::{Deserialize, Serialize};

use crate::model::ModelError;
use crate::quantity::{Count, DataRate, DataSize, Energy, Power, TimeSpan};

/// Offset, receive and transmit power of one device class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevicePowerProfile {
    pub name: String,
    pub p_offset: Power,
    #[serde(default)]
    pub p_rx: Power,
    #[serde(default)]
    pub p_tx: Power,
}

impl DevicePowerProfile {
    pub fn new(name: impl Into<String>, p_offset: Power, p_rx: Power, p_tx: Power) -> Self {
        DevicePowerProfile {
            name: name.into(),
            p_offset,
            p_rx,
            p_tx,
        }
    }

    /// Total draw while a request in `direction` is active. The offset is
    /// counted once even for bidirectional sessions.
    pub fn active_power(&self, direction: Direction) -> Power {
        let mut p = self.p_offset;
        if direction.receives() {
            p += self.p_rx;
        }
        if direction.transmits() {
            p += self.p_tx;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Download and playback.
    Rx,
    /// Capture and upload.
    Tx,
    Bidirectional,
}

impl Direction {
    pub fn receives(self) -> bool {
        matches!(self, Direction::Rx | Direction::Bidirectional)
    }

    pub fn transmits(self) -> bool {
        matches!(self, Direction::Tx | Direction::Bidirectional)
    }
}

/// One streaming event: how long it lasts, at what bitrate, in which direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamRequest {
    duration: TimeSpan,
    bitrate: DataRate,
    direction: Direction,
    video_size: DataSize,
    size_overridden: bool,
}

impl StreamRequest {
    pub fn new(
        duration: TimeSpan,
        bitrate: DataRate,
        direction: Direction,
    ) -> Result<Self, ModelError> {
        if duration.si() <= 0.0 {
            return Err(ModelError::Invalid("request duration must be > 0"));
        }
        if bitrate.si() <= 0.0 {
            return Err(ModelError::Invalid("request bitrate must be > 0"));
        }
        Ok(StreamRequest {
            duration,
            bitrate,
            direction,
            video_size: bitrate * duration,
            size_overridden: false,
        })
    }

    /// Replaces the derived `bitrate × duration` size with an explicit one.
    pub fn with_video_size(mut self, size: DataSize) -> Self {
        self.video_size = size;
        self.size_overridden = true;
        self
    }

    pub fn duration(&self) -> TimeSpan {
        self.duration
    }

    pub fn bitrate(&self) -> DataRate {
        self.bitrate
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn video_size(&self) -> DataSize {
        self.video_size
    }

    pub fn size_overridden(&self) -> bool {
        self.size_overridden
    }
}

/// `count` identical requests issued by each device of a fleet entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestBatch {
    pub request: StreamRequest,
    pub count: Count,
}

/// `devices` identical devices, each issuing the same workload.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetEntry {
    pub profile: DevicePowerProfile,
    pub devices: Count,
    pub workload: Vec<RequestBatch>,
}

/// Energy of one request on one device.
pub fn ut_request_energy(profile: &DevicePowerProfile, request: &StreamRequest) -> Energy {
    profile.active_power(request.direction()) * request.duration()
}

/// Energy of one device over its whole workload.
pub fn ut_device_energy(profile: &DevicePowerProfile, workload: &[RequestBatch]) -> Energy {
    workload
        .iter()
        .map(|b| ut_request_energy(profile, &b.request).times(b.count.get()))
        .sum()
}

/// Energy of every device in a fleet.
pub fn ut_fleet_energy(fleet: &[FleetEntry]) -> Energy {
    fleet
        .iter()
        .map(|e| ut_device_energy(&e.profile, &e.workload).times(e.devices.get()))
        .sum()
}
