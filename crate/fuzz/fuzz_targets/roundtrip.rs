#![no_main]

use closing_cli::mapfile::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse(text) else { return };
    let printed = file.to_string();
    let again = parse(&printed).expect("serialized map file must parse");
    assert_eq!(again, file);
    assert_eq!(again.to_string(), printed);
});
