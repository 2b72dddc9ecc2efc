//! Household/child panel: ingestion, estimation samples and descriptive tables.

mod describe;
mod ingest;
mod sample;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use describe::{
    mobility_indicators, saturation_shares, summarize_panel, MobilityByGender, MobilityIndicators,
    PanelSummary, SaturationShares, SummaryStat,
};
pub use ingest::{load_panel_csv, write_panel_csv, PanelLoad, RowReject, PANEL_COLUMNS};
pub use sample::{
    build_estimation_sample, EstimationRow, EstimationSample, GroupRule, SampleConfig,
    COVARIATE_NAMES, N_COVARIATES,
};
pub(crate) use sample::covariates;

/// Default age threshold for the "has a non-educated pre-treatment child" flag.
pub const DEFAULT_FLAG_AGE: u32 = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Religion {
    Christian,
    Muslim,
    Other,
}

impl Religion {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "christian" => Some(Self::Christian),
            "muslim" => Some(Self::Muslim),
            "other" => Some(Self::Other),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Christian => "christian",
            Self::Muslim => "muslim",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRecord {
    pub child_id: String,
    pub age_years: u32,
    pub female: bool,
    pub educated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub household_id: String,
    /// Completed elementary years of the head, 0 to 6.
    pub head_edu_years: u8,
    pub head_female: bool,
    pub rural: bool,
    pub religion: Religion,
    /// Standardized wealth index.
    pub hwi: f64,
    /// Always equal to `children.len()` once ingested.
    pub n_children: usize,
    pub children: Vec<ChildRecord>,
    /// Set by [`flag_households_with_noneduc_pretreat_child`].
    #[serde(default)]
    pub subsample: bool,
}

impl HouseholdRecord {
    pub fn head_educated(&self) -> bool {
        self.head_edu_years > 0
    }

    pub fn low_hwi(&self) -> bool {
        crate::wealth_index::is_low(self.hwi)
    }
}

/// Households keyed and ordered by `household_id`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HouseholdPanel {
    pub households: Vec<HouseholdRecord>,
}

impl HouseholdPanel {
    pub fn new(mut households: Vec<HouseholdRecord>) -> Self {
        households.sort_by(|a, b| a.household_id.cmp(&b.household_id));
        Self { households }
    }

    pub fn len(&self) -> usize {
        self.households.len()
    }

    pub fn is_empty(&self) -> bool {
        self.households.is_empty()
    }

    pub fn n_children(&self) -> usize {
        self.households.iter().map(|h| h.children.len()).sum()
    }
}

/// Inclusive age range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeWindow {
    pub min: u32,
    pub max: u32,
}

impl AgeWindow {
    pub fn new(min: u32, max: u32) -> Result<Self> {
        if min > max {
            return Err(Error::Config(format!("empty age window [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, age: u32) -> bool {
        (self.min..=self.max).contains(&age)
    }

    fn overlaps(&self, other: &AgeWindow) -> bool {
        self.min <= other.max && other.min <= self.max
    }
}

/// Post-treatment (exposed) and pre-treatment cohort windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleWindows {
    pub post: AgeWindow,
    pub pre: AgeWindow,
}

impl SampleWindows {
    pub fn new(post_min: u32, post_max: u32, pre_min: u32, pre_max: u32) -> Result<Self> {
        let post = AgeWindow::new(post_min, post_max)?;
        let pre = AgeWindow::new(pre_min, pre_max)?;
        if post.overlaps(&pre) {
            return Err(Error::Config(format!(
                "post window [{post_min}, {post_max}] overlaps pre window [{pre_min}, {pre_max}]"
            )));
        }
        Ok(Self { post, pre })
    }
}

impl Default for SampleWindows {
    /// Ages 13-18 exposed, 19-28 unexposed.
    fn default() -> Self {
        Self {
            post: AgeWindow { min: 13, max: 18 },
            pre: AgeWindow { min: 19, max: 28 },
        }
    }
}

/// Mark households that have at least one non-educated child older than `age_threshold`.
pub fn flag_households_with_noneduc_pretreat_child(panel: &HouseholdPanel, age_threshold: u32) -> HouseholdPanel {
    let mut out = panel.clone();
    for h in &mut out.households {
        h.subsample = h.children.iter().any(|c| !c.educated && c.age_years > age_threshold);
    }
    out
}
