#![no_main]

use libfuzzer_sys::fuzz_target;
use nldid::wealth_index::{expand_indicators, first_factor_index, load_asset_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(load) = load_asset_csv(data) else { return };
    let expansion = expand_indicators(&load.records);
    assert!(expansion.rejects.is_empty());
    if let Ok(index) = first_factor_index(&expansion.matrix) {
        assert!(index.scores.iter().all(|s| s.is_finite()));
    }
});
