#![no_main]

use libfuzzer_sys::fuzz_target;
use nldid::data::{build_estimation_sample, load_panel_csv, write_panel_csv, SampleConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(load) = load_panel_csv(data) else { return };
    for h in &load.panel.households {
        assert_eq!(h.n_children, h.children.len());
        assert!(h.hwi.is_finite());
    }
    let mut out = Vec::new();
    write_panel_csv(&load.panel, &mut out).unwrap();
    let again = load_panel_csv(out.as_slice()).unwrap();
    assert!(again.rejects.is_empty());
    assert_eq!(again.panel.len(), load.panel.len());
    let _ = build_estimation_sample(&load.panel, &SampleConfig::default());
});
