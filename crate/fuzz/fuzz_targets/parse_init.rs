#![no_main]

use libfuzzer_sys::fuzz_target;
use mqg_core::init::InitialData;
use mqg_core::Grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(init) = InitialData::parse(text) {
        let f = init.sample(&Grid::new(8).unwrap()).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));
    }
});
