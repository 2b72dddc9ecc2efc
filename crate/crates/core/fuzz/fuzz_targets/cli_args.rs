#![no_main]

use libfuzzer_sys::fuzz_target;
use nldid::cli::parse_args;

// NUL-separated argv; only parsing and flag validation run, never a command.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let argv = std::iter::once("nldid").chain(text.split('\0'));
    if let Ok(config) = parse_args(argv) {
        let _ = config.validate();
    }
});
