#![no_main]

use libfuzzer_sys::fuzz_target;
use spiraldim::experiments::SuiteConfig;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = SuiteConfig::from_toml(text) {
        assert!(cfg.validate().is_ok());
        assert_eq!(SuiteConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
});
