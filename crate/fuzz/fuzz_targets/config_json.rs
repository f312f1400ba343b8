#![no_main]

use isothc_cli::config::{EstimateConfig, FactorizeConfig, FitConfig, SimulateConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<FactorizeConfig>(data) {
        let _ = cfg.refine_config();
        let _ = cfg.isometrize_config();
    }
    let _ = serde_json::from_slice::<SimulateConfig>(data);
    let _ = serde_json::from_slice::<EstimateConfig>(data);
    let _ = serde_json::from_slice::<FitConfig>(data);
});
