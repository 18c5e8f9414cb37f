#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = closing_cli::mapfile::parse_disk_arg(text);
        let _ = closing_cli::mapfile::parse_band_arg(text);
    }
});
