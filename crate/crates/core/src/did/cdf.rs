use serde::Serialize;

use crate::{Error, Result};

use super::EffectRecord;

/// First-order stochastic dominance between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    /// F_first ≤ F_second everywhere, strictly somewhere.
    FirstDominates,
    SecondDominates,
    /// The empirical CDFs coincide at every pooled point.
    Identical,
    Crossing,
}

impl Dominance {
    pub fn flipped(self) -> Self {
        match self {
            Dominance::FirstDominates => Dominance::SecondDominates,
            Dominance::SecondDominates => Dominance::FirstDominates,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcdfPoint {
    pub tau: f64,
    pub f: f64,
}

/// Step points of the empirical CDF: each distinct value with the share of
/// observations at or below it.
pub fn ecdf(values: &[f64]) -> Vec<EcdfPoint> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<EcdfPoint> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.tau == x => last.f = f,
            _ => out.push(EcdfPoint { tau: x, f }),
        }
    }
    out
}

/// Compare the empirical CDFs of `a` and `b` at every pooled observation.
/// Counts are compared by cross-multiplication, so ties are exact.
pub fn dominance(a: &[f64], b: &[f64]) -> Result<Dominance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("dominance needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Domain("dominance on NaN values".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (na, nb) = (sa.len() as u128, sb.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut a_below, mut b_below) = (false, false);
    while i < sa.len() || j < sb.len() {
        let x = match (sa.get(i), sb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        // F_a(x) vs F_b(x)
        let (fa, fb) = (i as u128 * nb, j as u128 * na);
        a_below |= fa < fb;
        b_below |= fb < fa;
    }
    Ok(match (a_below, b_below) {
        (false, false) => Dominance::Identical,
        (true, false) => Dominance::FirstDominates,
        (false, true) => Dominance::SecondDominates,
        (true, true) => Dominance::Crossing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    /// educated head vs non-educated head
    HeadEducation,
    /// high wealth vs low wealth
    Wealth,
}

impl Grouping {
    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            Grouping::HeadEducation => ("educated", "non-educated"),
            Grouping::Wealth => ("high-hwi", "low-hwi"),
        }
    }

    fn first(self, e: &EffectRecord) -> bool {
        match self {
            Grouping::HeadEducation => e.head_educated,
            Grouping::Wealth => !e.low_hwi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupCdf {
    pub grouping: Grouping,
    pub first_label: String,
    pub second_label: String,
    pub first: Vec<EcdfPoint>,
    pub second: Vec<EcdfPoint>,
    pub verdict: Dominance,
}

impl SubgroupCdf {
    /// "educated dominates", "crossing", ...
    pub fn verdict_text(&self) -> String {
        match self.verdict {
            Dominance::FirstDominates => format!("{} dominates", self.first_label),
            Dominance::SecondDominates => format!("{} dominates", self.second_label),
            Dominance::Identical => "no dominance (identical)".into(),
            Dominance::Crossing => "crossing".into(),
        }
    }
}

/// Empirical CDFs of τ in the two subgroups and the dominance verdict.
pub fn subgroup_cdf(effects: &[EffectRecord], grouping: Grouping) -> Result<SubgroupCdf> {
    let (l1, l2) = grouping.labels();
    let (first, second): (Vec<&EffectRecord>, Vec<&EffectRecord>) = effects.iter().partition(|e| grouping.first(e));
    if first.is_empty() || second.is_empty() {
        let missing = if first.is_empty() { l1 } else { l2 };
        return Err(Error::Empty(format!("subgroup `{missing}` has no treated rows")));
    }
    let a: Vec<f64> = first.iter().map(|e| e.tau).collect();
    let b: Vec<f64> = second.iter().map(|e| e.tau).collect();
    Ok(SubgroupCdf {
        grouping,
        first_label: l1.into(),
        second_label: l2.into(),
        verdict: dominance(&a, &b)?,
        first: ecdf(&a),
        second: ecdf(&b),
    })
}
