use serde::Serialize;

use super::{AgeWindow, HouseholdPanel};
use crate::{Error, Result};

/// Intergenerational mobility at the educated/non-educated granularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobilityIndicators {
    pub n: usize,
    /// Child educated, head not.
    pub ascending: f64,
    /// Head educated, child not.
    pub descending: f64,
    pub mobility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobilityByGender {
    pub sons: Option<MobilityIndicators>,
    pub daughters: Option<MobilityIndicators>,
}

fn mobility_for(panel: &HouseholdPanel, female: bool) -> Option<MobilityIndicators> {
    let (mut n, mut up, mut down) = (0usize, 0usize, 0usize);
    for h in panel.households.iter().filter(|h| h.rural) {
        for c in h.children.iter().filter(|c| c.female == female) {
            n += 1;
            match (h.head_educated(), c.educated) {
                (false, true) => up += 1,
                (true, false) => down += 1,
                _ => {}
            }
        }
    }
    (n > 0).then(|| {
        let ascending = up as f64 / n as f64;
        let descending = down as f64 / n as f64;
        MobilityIndicators { n, ascending, descending, mobility: ascending + descending }
    })
}

/// Mobility shares over children of rural households, split by child gender.
/// A gender with no children yields `None`; no rural children at all is an error.
pub fn mobility_indicators(panel: &HouseholdPanel) -> Result<MobilityByGender> {
    let out = MobilityByGender { sons: mobility_for(panel, false), daughters: mobility_for(panel, true) };
    if out.sons.is_none() && out.daughters.is_none() {
        return Err(Error::Empty("no children in rural households".into()));
    }
    Ok(out)
}

/// Share of educated daughters in one head-education cell; `share` is `None`
/// when the cell is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShareCell {
    pub n: usize,
    pub educated: usize,
    pub share: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationShares {
    pub educated_head: ShareCell,
    pub non_educated_head: ShareCell,
}

/// P(daughter educated | head educated) and P(daughter educated | head not
/// educated) over rural daughters whose age falls in `pre`.
pub fn saturation_shares(panel: &HouseholdPanel, pre: AgeWindow) -> Result<SaturationShares> {
    let pre = AgeWindow::new(pre.min, pre.max)?;
    let mut cells = [(0usize, 0usize); 2];
    for h in panel.households.iter().filter(|h| h.rural) {
        let cell = &mut cells[usize::from(h.head_educated())];
        for c in h.children.iter().filter(|c| c.female && pre.contains(c.age_years)) {
            cell.0 += 1;
            cell.1 += usize::from(c.educated);
        }
    }
    let mk = |(n, e): (usize, usize)| ShareCell { n, educated: e, share: (n > 0).then(|| e as f64 / n as f64) };
    Ok(SaturationShares { educated_head: mk(cells[1]), non_educated_head: mk(cells[0]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStat {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        Some(Self { n, mean, median, sd, min: sorted[0], max: sorted[n - 1] })
    }
}

/// Household-level descriptive table over rural households.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSummary {
    pub households: usize,
    pub rural_households: usize,
    pub children: usize,
    pub head_edu_years: Option<SummaryStat>,
    pub hwi: Option<SummaryStat>,
    pub n_children: Option<SummaryStat>,
    pub share_educated_daughters: Option<f64>,
    pub share_educated_sons: Option<f64>,
    pub share_female_head: Option<f64>,
}

pub fn summarize_panel(panel: &HouseholdPanel) -> PanelSummary {
    let rural: Vec<_> = panel.households.iter().filter(|h| h.rural).collect();
    let col = |f: &dyn Fn(&super::HouseholdRecord) -> f64| rural.iter().map(|h| f(h)).collect::<Vec<f64>>();
    let share = |female: bool| {
        let kids: Vec<bool> = rural.iter().flat_map(|h| h.children.iter()).filter(|c| c.female == female).map(|c| c.educated).collect();
        (!kids.is_empty()).then(|| kids.iter().filter(|e| **e).count() as f64 / kids.len() as f64)
    };
    PanelSummary {
        households: panel.len(),
        rural_households: rural.len(),
        children: panel.n_children(),
        head_edu_years: SummaryStat::of(&col(&|h| h.head_edu_years as f64)),
        hwi: SummaryStat::of(&col(&|h| h.hwi)),
        n_children: SummaryStat::of(&col(&|h| h.n_children as f64)),
        share_educated_daughters: share(true),
        share_educated_sons: share(false),
        share_female_head: (!rural.is_empty())
            .then(|| rural.iter().filter(|h| h.head_female).count() as f64 / rural.len() as f64),
    }
}
