#![no_main]

use libfuzzer_sys::fuzz_target;
use spiraldim::curve::parse_sidecar;

fuzz_target!(|text: &str| {
    let _ = parse_sidecar(text);
});
