use serde::Serialize;

use crate::data::{build_estimation_sample, GroupRule, HouseholdPanel, SampleConfig, SampleWindows, N_COVARIATES};
use crate::probit::{fit_probit, FitOptions, ProbitFit};
use crate::{Error, Result};

use super::bh::bh_adjust;

/// Youngest age admitted in a placebo window; everyone here was too old for the policy.
pub const PLACEBO_MIN_AGE: u32 = 29;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaceboOptions {
    /// Oldest age in the pseudo-pre window.
    pub pre_max: u32,
    pub group: GroupRule,
    /// Level for the BH-adjusted interaction tests.
    pub level: f64,
    pub fit: FitOptions,
}

impl Default for PlaceboOptions {
    fn default() -> Self {
        Self { pre_max: 60, group: GroupRule::default(), level: 0.05, fit: FitOptions::default() }
    }
}

/// Pseudo-post window [29, threshold − 1] and pseudo-pre window [threshold, pre_max].
pub fn placebo_windows(threshold: u32, pre_max: u32) -> Result<SampleWindows> {
    if threshold <= PLACEBO_MIN_AGE || pre_max < threshold {
        return Err(Error::Config(format!(
            "placebo threshold must satisfy {PLACEBO_MIN_AGE} < threshold <= pre_max, got threshold {threshold}, pre_max {pre_max}"
        )));
    }
    SampleWindows::new(PLACEBO_MIN_AGE, threshold - 1, threshold, pre_max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionTest {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_raw: f64,
    pub p_adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceboColumn {
    pub threshold: u32,
    pub windows: SampleWindows,
    pub n: usize,
    pub loglik: f64,
    pub converged: bool,
    /// Every coefficient with its Wald test, in κ order.
    pub coefficients: Vec<crate::probit::Coefficient>,
    /// The W and W:x terms, BH-adjusted within the block.
    pub interactions: Vec<InteractionTest>,
    /// Any interaction with BH-adjusted p at most `level`.
    pub any_significant: bool,
}

/// Tests of the interaction (γ) block of a fit, BH-adjusted across the block.
pub fn interaction_tests(fit: &ProbitFit) -> Vec<InteractionTest> {
    let coefs = fit.coefficients();
    let block = &coefs[2..2 + N_COVARIATES];
    let raw: Vec<f64> = block.iter().map(|c| c.p_value).collect();
    let adj = bh_adjust(&raw).expect("Wald p-values lie in [0, 1]");
    block
        .iter()
        .zip(adj)
        .map(|(c, p_adj)| InteractionTest { name: c.name.clone(), estimate: c.estimate, se: c.se, z: c.z, p_raw: c.p_value, p_adj })
        .collect()
}

/// Re-estimate on cohorts too old to be exposed, one column per threshold.
pub fn placebo_run(panel: &HouseholdPanel, thresholds: &[u32], options: &PlaceboOptions) -> Result<Vec<PlaceboColumn>> {
    if thresholds.is_empty() {
        return Err(Error::Config("at least one placebo threshold is required".into()));
    }
    thresholds
        .iter()
        .map(|&threshold| {
            let windows = placebo_windows(threshold, options.pre_max)?;
            let config = SampleConfig { windows, group: options.group, flagged_only: false };
            let sample = build_estimation_sample(panel, &config)?;
            let fit = fit_probit(&sample, &options.fit)?;
            let interactions = interaction_tests(&fit);
            Ok(PlaceboColumn {
                threshold,
                windows,
                n: fit.n,
                loglik: fit.loglik,
                converged: fit.converged,
                coefficients: fit.coefficients(),
                any_significant: interactions.iter().any(|t| t.p_adj <= options.level),
                interactions,
            })
        })
        .collect()
}
