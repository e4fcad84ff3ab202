//! Request-based transmission network energy.

use serde::{Deserialize, Serialize};

use crate::model::terminal::StreamRequest;
use crate::quantity::{Count, Energy, Power, PowerPerRate};

/// Offset plus bitrate-proportional power of one access or backbone path.
/// Used for both end-user paths and CDN copy paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProfile {
    pub name: String,
    #[serde(default)]
    pub p_offset: Power,
    #[serde(default)]
    pub p_per_rate: PowerPerRate,
}

impl NetworkProfile {
    pub fn new(name: impl Into<String>, p_offset: Power, p_per_rate: PowerPerRate) -> Self {
        NetworkProfile {
            name: name.into(),
            p_offset,
            p_per_rate,
        }
    }
}

/// `count` identical requests carried over one network profile.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPath {
    pub profile: NetworkProfile,
    pub request: StreamRequest,
    pub count: Count,
}

pub fn nw_request_energy(profile: &NetworkProfile, request: &StreamRequest) -> Energy {
    (profile.p_offset + profile.p_per_rate * request.bitrate()) * request.duration()
}

fn paths_energy(paths: &[NetworkPath]) -> Energy {
    paths
        .iter()
        .map(|p| nw_request_energy(&p.profile, &p.request).times(p.count.get()))
        .sum()
}

/// Returns `(end-user share, CDN copy share)`.
pub fn nw_energy(ut_paths: &[NetworkPath], cdn_paths: &[NetworkPath]) -> (Energy, Energy) {
    (paths_energy(ut_paths), paths_energy(cdn_paths))
}
