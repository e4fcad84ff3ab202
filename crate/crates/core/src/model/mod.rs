//! Energy equations for terminals, providers and networks, and the carbon
//! conversion.

pub mod network;
pub mod provider;
pub mod terminal;

use thiserror::Error;

use crate::quantity::{CarbonIntensity, Energy, Mass};

pub use network::{nw_energy, nw_request_energy, NetworkPath, NetworkProfile};
pub use provider::{
    vp_decode_energy, vp_encode_energy, vp_provider_energy, vp_server_energy, vp_storage_energy,
    vp_transcode_energy, vp_transfer_energy, EncodeVariant, ServerProfile, ServerTaskEnergies,
    TranscodeJob, YearFraction,
};
pub use terminal::{
    ut_device_energy, ut_fleet_energy, ut_request_energy, DevicePowerProfile, Direction,
    FleetEntry, RequestBatch, StreamRequest,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(&'static str),
}

pub fn service_energy(e_ut: Energy, e_vp: Energy, e_nw: Energy) -> Energy {
    e_ut + e_vp + e_nw
}

pub fn global_energy(services: &[Energy]) -> Energy {
    services.iter().sum()
}

pub fn ghg_emissions(e: Energy, ci: CarbonIntensity) -> Mass {
    e * ci
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Energy {
        Energy::parse(s).unwrap()
    }

    #[test]
    fn service_sums() {
        let od = service_energy(e("3.65 TWh"), e("61.7 GWh"), e("60.2 GWh"));
        assert!((od.value_in("TWh").unwrap() - 3.77).abs() < 0.005);
        let tc = service_energy(e("1.22 TWh"), e("6.02 GWh"), e("56.9 GWh"));
        // inputs are themselves rounded, so allow one display digit of slack
        assert!((tc.value_in("TWh").unwrap() - 1.29).abs() < 0.01);
        assert_eq!(
            service_energy(Energy::ZERO, Energy::ZERO, Energy::ZERO),
            Energy::ZERO
        );
    }

    #[test]
    fn global_sum() {
        let all = [e("3.77 TWh"), e("3.84 TWh"), e("4.86 TWh"), e("1.29 TWh")];
        assert!((global_energy(&all).value_in("TWh").unwrap() - 13.76).abs() < 1e-9);
        assert_eq!(global_energy(&[]), Energy::ZERO);
        assert_eq!(global_energy(&all[..1]), all[0]);
    }

    #[test]
    fn carbon_conversion() {
        let ci = CarbonIntensity::parse("350 g/kWh").unwrap();
        assert!((ghg_emissions(e("52.8 GWh"), ci).tonnes() - 18_480.0).abs() < 1e-6);
        assert!((ghg_emissions(e("191 kWh"), ci).value_in("kg").unwrap() - 66.85).abs() < 1e-9);
        let green = CarbonIntensity::parse("0 g/kWh").unwrap();
        assert_eq!(ghg_emissions(e("1 TWh"), green), Mass::ZERO);
    }
}
