#![no_main]

use libfuzzer_sys::fuzz_target;
use spiraldim::{Asymptote, Curve, Provenance};

fuzz_target!(|data: &[u8]| {
    if let Ok(curve) = Curve::read_csv(data, Provenance::new("fuzz", Asymptote::None)) {
        assert!(curve.len() >= 2);
        assert!(curve.params().windows(2).all(|w| w[1] > w[0]));
        let mut out = Vec::new();
        curve.write_csv(&mut out).unwrap();
        let back = Curve::read_csv(out.as_slice(), Provenance::new("fuzz", Asymptote::None)).unwrap();
        assert_eq!(back.coords(), curve.coords());
    }
});
