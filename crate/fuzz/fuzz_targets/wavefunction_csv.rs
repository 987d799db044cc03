#![no_main]

use libfuzzer_sys::fuzz_target;
use wigner_udm::config::parse_wavefunction_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(psi) = parse_wavefunction_csv(text) {
        assert_eq!(psi.axis.len(), psi.values.len());
        assert!(psi.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
});
