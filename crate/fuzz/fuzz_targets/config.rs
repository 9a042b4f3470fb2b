#![no_main]

use autor_core::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        if let Ok(resolved) = cfg.to_toml() {
            let again = ExperimentConfig::from_toml(&resolved).expect("re-parse resolved config");
            assert_eq!(again.to_toml().expect("serialize"), resolved);
        }
    }
});
