//! Nonlinear difference-in-differences inference on top of a probit fit:
//! per-row effects on the treated, delta-method standard errors,
//! Benjamini-Hochberg adjustment, subgroup CDFs and placebo re-runs.

mod bh;
mod cdf;
mod effects;
mod placebo;

pub use bh::{bh_adjust, bh_rejections, test_effects, two_sided_p};
pub use cdf::{dominance, ecdf, subgroup_cdf, Dominance, EcdfPoint, Grouping, SubgroupCdf};
pub use effects::{
    att_table, average_effect, effect_gradient, effect_on_treated, effect_variance, estimate_effects, gradient_at,
    tau_at, AttRow, EffectFilter, EffectRecord, EffectSe,
};
pub use placebo::{
    interaction_tests, placebo_run, placebo_windows, InteractionTest, PlaceboColumn, PlaceboOptions, PLACEBO_MIN_AGE,
};

/// Default FDR level.
pub const DEFAULT_Q: f64 = 0.05;
