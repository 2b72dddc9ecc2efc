use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this index the lower tail is evaluated through the Mills ratio.
const LOWER_TAIL_SWITCH: f64 = -8.0;

/// Standard normal CDF, Φ(x). Returns `Err` for non-finite input.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal cdf evaluated at {x}")));
    }
    Ok(norm_cdf(x))
}

/// Standard normal density, φ(x). Returns `Err` for non-finite input.
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal pdf evaluated at {x}")));
    }
    Ok(norm_pdf(x))
}

/// Unchecked Φ(x). Infinite arguments map to the limits 0 and 1.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Unchecked φ(x).
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Mills ratio R(x) = Φ(-x)/φ(x) for x ≥ 8, by backward evaluation of
/// Laplace's continued fraction 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
fn mills_ratio_upper(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=80).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// log Φ(z), accurate for |z| up to several hundred.
pub fn log_norm_cdf(z: f64) -> f64 {
    if z < LOWER_TAIL_SWITCH {
        -0.5 * z * z - 0.5 * (2.0 * PI).ln() + mills_ratio_upper(-z).ln()
    } else if z > 0.0 {
        (-norm_cdf(-z)).ln_1p()
    } else {
        norm_cdf(z).ln()
    }
}

/// φ(z)/Φ(z), the inverse Mills ratio, stable in the lower tail.
pub fn pdf_over_cdf(z: f64) -> f64 {
    if z < LOWER_TAIL_SWITCH {
        1.0 / mills_ratio_upper(-z)
    } else {
        norm_pdf(z) / norm_cdf(z)
    }
}

/// Inverse of Φ on (0, 1).
///
/// A rational starting value (Abramowitz & Stegun 26.2.23) is polished by
/// Halley steps against [`norm_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    // lower-tail quantile of q, returned as a positive magnitude
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = -(t
        - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
            / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t));
    for _ in 0..8 {
        let dens = norm_pdf(x);
        if dens == 0.0 {
            break;
        }
        let u = (norm_cdf(x) - q) / dens;
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(sign * -x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arithmetic (mpmath).
    const PHI_1_96: f64 = 0.975_002_104_851_779_6;
    const PHI_0_1: f64 = 0.539_827_837_277_029;
    const PDF_1: f64 = 0.241_970_724_519_143_37;
    const Q_0_7: f64 = 0.524_400_512_708_040_8;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_cdf(1.96).unwrap() - PHI_1_96).abs() < 1e-12);
        assert!((std_normal_cdf(0.1).unwrap() - PHI_0_1).abs() < 1e-12);
        assert!((std_normal_cdf(-1.0).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-12);
    }

    #[test]
    fn pdf_reference_values() {
        assert!((std_normal_pdf(0.0).unwrap() - FRAC_1_SQRT_2PI).abs() < 1e-15);
        assert!((std_normal_pdf(1.0).unwrap() - PDF_1).abs() < 1e-15);
        assert_eq!(std_normal_pdf(3.0).unwrap(), std_normal_pdf(-3.0).unwrap());
    }

    #[test]
    fn pdf_integrates_to_one() {
        // composite Simpson on [-12, 12]
        let n = 4000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / n as f64;
        let mut s = norm_pdf(a) + norm_pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * norm_pdf(a + i as f64 * h);
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(std_normal_pdf(f64::NEG_INFINITY).is_err());
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_reference_values() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.7).unwrap() - Q_0_7).abs() < 1e-12);
        assert!((std_normal_quantile(0.975_002_1).unwrap() - 1.96).abs() < 1e-6);
        assert!((std_normal_quantile(0.3).unwrap() + Q_0_7).abs() < 1e-12);
    }

    #[test]
    fn log_cdf_matches_reference_in_both_tails() {
        let cases = [
            (1.96, -0.025_315_649_164_282_11),
            (-3.0, -6.607_726_221_510_35),
            (-8.0, -35.013_437_159_914_55),
            (-10.0, -53.231_285_150_512_47),
            (-20.0, -203.917_155_371_097_26),
            (-30.0, -454.321_243_956_343_2),
            (-38.5, -745.695_270_290_411_1),
            (5.0, -2.866_516_129_637_636e-7),
            (8.3, -5.205_569_744_890_285e-17),
        ];
        for (z, want) in cases {
            let got = log_norm_cdf(z);
            assert!(((got - want) / want).abs() < 1e-12, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn mills_route_agrees_with_erfc_route() {
        let mut z = -8.0;
        while z > -37.0 {
            let via_erfc = norm_cdf(z).ln();
            let via_mills = log_norm_cdf(z);
            assert!(((via_erfc - via_mills) / via_erfc).abs() < 1e-13, "z={z}");
            let ratio_direct = norm_pdf(z) / norm_cdf(z);
            assert!(((pdf_over_cdf(z) - ratio_direct) / ratio_direct).abs() < 1e-12);
            z -= 0.37;
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetric_tails(x in -10.0f64..10.0) {
                prop_assert!((norm_cdf(x) + norm_cdf(-x) - 1.0).abs() <= 1e-14);
            }

            #[test]
            fn monotone_and_bounded(a in -40.0f64..40.0, d in 0.0f64..5.0) {
                let (lo, hi) = (norm_cdf(a), norm_cdf(a + d));
                prop_assert!(lo <= hi);
                prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            }

            #[test]
            fn quantile_inverts_cdf(x in -6.0f64..6.0) {
                let back = std_normal_quantile(norm_cdf(x)).unwrap();
                prop_assert!((back - x).abs() <= 1e-8);
            }

            #[test]
            fn cdf_inverts_quantile(p in 1e-12f64..(1.0 - 1e-12)) {
                let x = std_normal_quantile(p).unwrap();
                prop_assert!((norm_cdf(x) - p).abs() <= 1e-10);
            }
        }
    }
}
