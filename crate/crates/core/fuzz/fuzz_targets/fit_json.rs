#![no_main]

use libfuzzer_sys::fuzz_target;
use nldid::probit::ProbitFit;

fuzz_target!(|data: &[u8]| {
    let Ok(fit) = ProbitFit::read_json(data) else { return };
    let mut out = Vec::new();
    fit.write_json(&mut out).unwrap();
    let again = ProbitFit::read_json(out.as_slice()).unwrap();
    assert_eq!(again.kappa, fit.kappa);
    let _ = fit.coefficients();
});
