use serde::{Deserialize, Serialize};

use super::{HouseholdPanel, HouseholdRecord, Religion, SampleWindows};
use crate::Result;

/// Household covariates X, in design order. The leading constant carries the
/// intercept in the θ block and the plain treatment indicator W in the γ block.
pub const COVARIATE_NAMES: [&str; 7] = [
    "const",
    "educated_head",
    "low_hwi",
    "n_children",
    "christian",
    "muslim",
    "female_head",
];

pub const N_COVARIATES: usize = COVARIATE_NAMES.len();

/// How the treatment group indicator G is assigned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupRule {
    /// Keep rural children only; G = daughter, sons are the control group.
    #[default]
    RuralDaughters,
    /// Keep every child; G = rural daughter.
    RuralFemale,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub windows: SampleWindows,
    pub group: GroupRule,
    /// Restrict to households carrying the subsample flag.
    pub flagged_only: bool,
}

/// One child-level observation. W and X·W are derived from (g, t, x), so a
/// row violating w = g·t cannot be represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRow {
    pub household_id: String,
    pub child_id: String,
    pub y: bool,
    pub g: bool,
    pub t: bool,
    pub x: [f64; N_COVARIATES],
}

impl EstimationRow {
    pub fn w(&self) -> bool {
        self.g && self.t
    }

    pub fn xw(&self) -> [f64; N_COVARIATES] {
        let w = if self.w() { 1.0 } else { 0.0 };
        self.x.map(|v| v * w)
    }

    pub fn head_educated(&self) -> bool {
        self.x[1] != 0.0
    }

    pub fn low_hwi(&self) -> bool {
        self.x[2] != 0.0
    }

    /// Full design row (G, T, X·W, X) matching [`EstimationSample::column_names`].
    pub fn design_into(&self, out: &mut [f64]) {
        out[0] = if self.g { 1.0 } else { 0.0 };
        out[1] = if self.t { 1.0 } else { 0.0 };
        let xw = self.xw();
        out[2..2 + N_COVARIATES].copy_from_slice(&xw);
        out[2 + N_COVARIATES..2 + 2 * N_COVARIATES].copy_from_slice(&self.x);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSample {
    pub rows: Vec<EstimationRow>,
    pub config: SampleConfig,
}

impl EstimationSample {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width() -> usize {
        2 + 2 * N_COVARIATES
    }

    /// (G, T, W·X..., X...) — the order of κ = (α, β, γ, θ).
    pub fn column_names() -> Vec<String> {
        let mut names = vec!["G".to_string(), "T".to_string()];
        names.extend(COVARIATE_NAMES.iter().map(|c| if *c == "const" { "W".to_string() } else { format!("W:{c}") }));
        names.extend(COVARIATE_NAMES.iter().map(|c| c.to_string()));
        names
    }

    pub fn treated(&self) -> impl Iterator<Item = &EstimationRow> {
        self.rows.iter().filter(|r| r.w())
    }
}

pub(crate) fn covariates(h: &HouseholdRecord) -> [f64; N_COVARIATES] {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    [
        1.0,
        b(h.head_educated()),
        b(h.low_hwi()),
        h.n_children as f64,
        b(h.religion == Religion::Christian),
        b(h.religion == Religion::Muslim),
        b(h.head_female),
    ]
}

/// Flatten the panel into child-level rows inside the two cohort windows.
///
/// T = 1 for ages in the post window; G follows `config.group`. Rows are in
/// panel order (household_id, then child order).
pub fn build_estimation_sample(panel: &HouseholdPanel, config: &SampleConfig) -> Result<EstimationSample> {
    // revalidate in case the windows were built by hand
    let w = SampleWindows::new(config.windows.post.min, config.windows.post.max, config.windows.pre.min, config.windows.pre.max)?;
    let mut rows = Vec::new();
    for h in &panel.households {
        if config.flagged_only && !h.subsample {
            continue;
        }
        if config.group == GroupRule::RuralDaughters && !h.rural {
            continue;
        }
        let x = covariates(h);
        for c in &h.children {
            let t = if w.post.contains(c.age_years) {
                true
            } else if w.pre.contains(c.age_years) {
                false
            } else {
                continue;
            };
            let g = match config.group {
                GroupRule::RuralDaughters => c.female,
                GroupRule::RuralFemale => c.female && h.rural,
            };
            rows.push(EstimationRow {
                household_id: h.household_id.clone(),
                child_id: c.child_id.clone(),
                y: c.educated,
                g,
                t,
                x,
            });
        }
    }
    Ok(EstimationSample { rows, config: *config })
}
