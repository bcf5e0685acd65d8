#![no_main]

use libfuzzer_sys::fuzz_target;
use spiraldim::experiments::{CurveSource, SOURCE_KINDS};

fuzz_target!(|text: &str| {
    let mut words = text.split_whitespace();
    let Some(kind) = words.next() else { return };
    let args: Vec<&str> = words.collect();
    let kind = SOURCE_KINDS.iter().find(|k| **k == kind).copied().unwrap_or(kind);
    let _ = CurveSource::parse(kind, &args);
});
