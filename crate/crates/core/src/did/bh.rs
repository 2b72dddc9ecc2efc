use crate::numerics::norm_cdf;
use crate::{Error, Result};

use super::EffectRecord;

/// Benjamini-Hochberg step-up adjustment. Adjusted values are returned in
/// input order: p̃₍ᵢ₎ = min over j ≥ i of p₍ⱼ₎·m/j, capped at 1.
pub fn bh_adjust(p: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = f64::INFINITY;
    for (rank, &i) in order.iter().enumerate().rev() {
        // m/j ≥ 1 survives rounding, so the candidate never falls below p
        let candidate = p[i] * ((m as f64) / ((rank + 1) as f64));
        running = running.min(candidate);
        adjusted[i] = running.min(1.0);
    }
    Ok(adjusted)
}

/// Two-sided normal p-value 2(1 − Φ(|t|)).
pub fn two_sided_p(t: f64) -> f64 {
    (2.0 * norm_cdf(-t.abs())).min(1.0)
}

/// Fill t, raw and BH-adjusted p for every record. Degenerate rows (se = 0)
/// get t = 0 and p = 1 and still count towards m.
pub fn test_effects(effects: &mut [EffectRecord]) {
    for e in effects.iter_mut() {
        if e.degenerate || e.se <= 0.0 {
            e.t_stat = 0.0;
            e.p_raw = 1.0;
        } else {
            e.t_stat = e.tau / e.se;
            e.p_raw = two_sided_p(e.t_stat);
        }
    }
    let raw: Vec<f64> = effects.iter().map(|e| e.p_raw).collect();
    let adjusted = bh_adjust(&raw).expect("raw p-values lie in [0, 1]");
    for (e, a) in effects.iter_mut().zip(adjusted) {
        e.p_adj = a;
    }
}

/// Indices rejected by BH at level `q`.
pub fn bh_rejections(adjusted: &[f64], q: f64) -> Vec<usize> {
    adjusted.iter().enumerate().filter(|(_, p)| **p <= q).map(|(i, _)| i).collect()
}
