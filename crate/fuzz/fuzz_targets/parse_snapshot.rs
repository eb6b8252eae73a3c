#![no_main]

use libfuzzer_sys::fuzz_target;
use mqg_core::io::{read_snapshot, write_physical_snapshot, write_spectral_snapshot, SnapshotField};

fuzz_target!(|data: &[u8]| {
    let Ok(snap) = read_snapshot(data) else {
        return;
    };
    // anything accepted must re-encode to a snapshot that decodes the same
    let mut buf = Vec::new();
    match &snap.field {
        SnapshotField::Physical(f) => write_physical_snapshot(&mut buf, f, snap.time).unwrap(),
        SnapshotField::Spectral(f) => write_spectral_snapshot(&mut buf, f, snap.time).unwrap(),
    }
    assert_eq!(read_snapshot(&buf).unwrap(), snap);
});
