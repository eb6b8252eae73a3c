#![no_main]

use libfuzzer_sys::fuzz_target;
use mqg_core::io::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::parse(text) {
        // a parsed config with alpha must yield a valid solver config
        if cfg.alpha.is_some() {
            cfg.solver_config().unwrap();
        }
    }
});
