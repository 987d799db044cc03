#![no_main]

use libfuzzer_sys::fuzz_target;
use wigner_udm::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        let _ = cfg.state.source();
        let _ = cfg.potential();
        assert!(cfg.grid.x_axis().is_ok() && cfg.grid.p_axis().is_ok());
    }
});
