use rayon::prelude::*;
use serde::Serialize;

use crate::data::EstimationSample;
use crate::numerics::{norm_cdf, norm_pdf};
use crate::probit::ProbitFit;
use crate::{Error, Result};

use super::bh::test_effects;

/// Per-observation effect on a treated row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectRecord {
    pub household_id: String,
    pub child_id: String,
    pub tau: f64,
    pub se: f64,
    pub t_stat: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub head_educated: bool,
    pub low_hwi: bool,
    /// Zero gradient: se is 0 and no test is possible (p = 1).
    pub degenerate: bool,
}

/// Linear indices without (z₀) and with (z₁) the interaction block.
fn indices(kappa: &[f64], x: &[f64], xw: &[f64]) -> Result<(f64, f64)> {
    let k = x.len();
    if xw.len() != k || kappa.len() != 2 + 2 * k {
        return Err(Error::Dimension(format!(
            "kappa has length {}, covariate rows have lengths {} and {}",
            kappa.len(),
            k,
            xw.len()
        )));
    }
    let gamma = &kappa[2..2 + k];
    let theta = &kappa[2 + k..];
    let z0 = kappa[0] + kappa[1] + x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
    let z1 = z0 + xw.iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>();
    Ok((z0, z1))
}

/// τ = Φ(α + β + XWγ + Xθ) − Φ(α + β + Xθ) for an arbitrary κ.
pub fn tau_at(kappa: &[f64], x: &[f64], xw: &[f64]) -> Result<f64> {
    let (z0, z1) = indices(kappa, x, xw)?;
    Ok(norm_cdf(z1) - norm_cdf(z0))
}

/// ∂τ/∂κ for an arbitrary κ.
pub fn gradient_at(kappa: &[f64], x: &[f64], xw: &[f64]) -> Result<Vec<f64>> {
    let (z0, z1) = indices(kappa, x, xw)?;
    let (p0, p1) = (norm_pdf(z0), norm_pdf(z1));
    let d = p1 - p0;
    let mut g = Vec::with_capacity(kappa.len());
    g.push(d);
    g.push(d);
    g.extend(xw.iter().map(|v| p1 * v));
    g.extend(x.iter().map(|v| d * v));
    Ok(g)
}

fn require_converged(fit: &ProbitFit) -> Result<()> {
    if fit.converged {
        Ok(())
    } else {
        Err(Error::NotConverged(format!("probit stopped after {} iterations with |score| = {:e}", fit.iterations, fit.score_norm)))
    }
}

/// Effect on the treated at covariates `x`, with the treated interaction row `xw`.
pub fn effect_on_treated(fit: &ProbitFit, x: &[f64], xw: &[f64]) -> Result<f64> {
    require_converged(fit)?;
    tau_at(&fit.kappa, x, xw)
}

/// Ω row: ∂τ/∂κ at the fitted κ.
pub fn effect_gradient(fit: &ProbitFit, x: &[f64], xw: &[f64]) -> Result<Vec<f64>> {
    require_converged(fit)?;
    gradient_at(&fit.kappa, x, xw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectSe {
    pub se: f64,
    pub degenerate: bool,
}

/// Delta-method standard error √(Ω Σ Ωᵀ / n).
pub fn effect_variance(fit: &ProbitFit, x: &[f64], xw: &[f64]) -> Result<EffectSe> {
    let omega = effect_gradient(fit, x, xw)?;
    Ok(delta_se(fit, &omega))
}

fn delta_se(fit: &ProbitFit, omega: &[f64]) -> EffectSe {
    if omega.iter().all(|g| *g == 0.0) {
        return EffectSe { se: 0.0, degenerate: true };
    }
    let p = omega.len();
    let mut v = 0.0;
    for a in 0..p {
        if omega[a] == 0.0 {
            continue;
        }
        let row: f64 = (0..p).map(|b| fit.sigma[(a, b)] * omega[b]).sum();
        v += omega[a] * row;
    }
    let v = v / fit.n as f64;
    if v > 0.0 {
        EffectSe { se: v.sqrt(), degenerate: false }
    } else {
        EffectSe { se: 0.0, degenerate: true }
    }
}

/// Effects, standard errors and BH-adjusted tests for every treated row of
/// `sample`, in sample order.
pub fn estimate_effects(fit: &ProbitFit, sample: &EstimationSample) -> Result<Vec<EffectRecord>> {
    require_converged(fit)?;
    let treated: Vec<_> = sample.treated().collect();
    let mut records = treated
        .par_iter()
        .map(|row| {
            let (x, xw) = (row.x, row.xw());
            let tau = tau_at(&fit.kappa, &x, &xw)?;
            let omega = gradient_at(&fit.kappa, &x, &xw)?;
            let EffectSe { se, degenerate } = delta_se(fit, &omega);
            Ok(EffectRecord {
                household_id: row.household_id.clone(),
                child_id: row.child_id.clone(),
                tau,
                se,
                t_stat: 0.0,
                p_raw: 1.0,
                p_adj: 1.0,
                head_educated: row.head_educated(),
                low_hwi: row.low_hwi(),
                degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    test_effects(&mut records);
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectFilter {
    All,
    HeadEducated,
    HeadNonEducated,
    LowHwi,
    HighHwi,
    /// BH-adjusted p at most 0.05.
    Significant,
}

impl EffectFilter {
    pub const ALL: [EffectFilter; 6] = [
        EffectFilter::All,
        EffectFilter::HeadEducated,
        EffectFilter::HeadNonEducated,
        EffectFilter::LowHwi,
        EffectFilter::HighHwi,
        EffectFilter::Significant,
    ];

    pub fn keeps(self, e: &EffectRecord) -> bool {
        match self {
            EffectFilter::All => true,
            EffectFilter::HeadEducated => e.head_educated,
            EffectFilter::HeadNonEducated => !e.head_educated,
            EffectFilter::LowHwi => e.low_hwi,
            EffectFilter::HighHwi => !e.low_hwi,
            EffectFilter::Significant => e.p_adj <= super::DEFAULT_Q,
        }
    }
}

/// Mean τ over the records kept by `filter`.
pub fn average_effect(effects: &[EffectRecord], filter: EffectFilter) -> Result<f64> {
    let kept: Vec<f64> = effects.iter().filter(|e| filter.keeps(e)).map(|e| e.tau).collect();
    if kept.is_empty() {
        return Err(Error::Empty(format!("no treated rows match filter {filter:?}")));
    }
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttRow {
    pub filter: EffectFilter,
    pub n: usize,
    pub att: Option<f64>,
}

/// Averages under every filter; empty groups report `att: None`.
pub fn att_table(effects: &[EffectRecord]) -> Vec<AttRow> {
    EffectFilter::ALL
        .iter()
        .map(|&filter| AttRow {
            filter,
            n: effects.iter().filter(|e| filter.keeps(e)).count(),
            att: average_effect(effects, filter).ok(),
        })
        .collect()
}
