#![no_main]

use libfuzzer_sys::fuzz_target;
use spiraldim::experiments::{read_suite_csv, write_suite_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(res) = read_suite_csv("fuzz", data) {
        assert!(res.rows.iter().all(|r| r.consistent()));
        let mut out = Vec::new();
        write_suite_csv(&res, &mut out).unwrap();
        let back = read_suite_csv("fuzz", out.as_slice()).unwrap();
        assert_eq!(back.rows.len(), res.rows.len());
    }
});
