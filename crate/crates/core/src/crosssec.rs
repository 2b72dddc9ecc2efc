//! Household-level regression of the share of educated daughters on household
//! covariates, the share of daughters exposed to the policy (R) and its
//! interactions, with average-daughter-age fixed effects.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::data::{HouseholdPanel, HouseholdRecord, Religion, SampleWindows};
use crate::numerics::{check_full_rank, Cholesky, Matrix, Vector};
use crate::{Error, Result};

/// Household covariates entering the cross-section, in column order.
pub const MAIN_EFFECTS: [&str; 6] = ["educated_head", "low_hwi", "n_children", "christian", "muslim", "female_head"];

/// Exposure terms: R and its interactions.
pub const EXPOSURE_TERMS: [&str; 4] = ["R", "R:low_hwi", "R:n_children", "R:non_educated_head"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionRow {
    pub household_id: String,
    /// Share of in-window daughters who are educated.
    pub y_bar: f64,
    /// Share of in-window daughters in the post window.
    pub r: f64,
    /// Covariates in [`MAIN_EFFECTS`] order.
    pub x: [f64; 6],
    pub avg_girl_age: f64,
    /// Fixed-effect key: mean daughter age rounded to whole years.
    pub age_bin: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection {
    pub rows: Vec<CrossSectionRow>,
    /// Households dropped for having no daughter inside either window.
    pub dropped_no_daughters: usize,
}

fn covariates(h: &HouseholdRecord) -> [f64; 6] {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    [
        b(h.head_educated()),
        b(h.low_hwi()),
        h.n_children as f64,
        b(h.religion == Religion::Christian),
        b(h.religion == Religion::Muslim),
        b(h.head_female),
    ]
}

/// One row per rural household with at least one daughter in either window.
pub fn build_cross_section(panel: &HouseholdPanel, windows: &SampleWindows) -> Result<CrossSection> {
    let w = SampleWindows::new(windows.post.min, windows.post.max, windows.pre.min, windows.pre.max)?;
    let mut rows = Vec::new();
    let mut dropped = 0;
    for h in panel.households.iter().filter(|h| h.rural) {
        let daughters: Vec<_> = h
            .children
            .iter()
            .filter(|c| c.female && (w.post.contains(c.age_years) || w.pre.contains(c.age_years)))
            .collect();
        if daughters.is_empty() {
            dropped += 1;
            continue;
        }
        let n = daughters.len() as f64;
        let avg = daughters.iter().map(|c| f64::from(c.age_years)).sum::<f64>() / n;
        rows.push(CrossSectionRow {
            household_id: h.household_id.clone(),
            y_bar: daughters.iter().filter(|c| c.educated).count() as f64 / n,
            r: daughters.iter().filter(|c| w.post.contains(c.age_years)).count() as f64 / n,
            x: covariates(h),
            avg_girl_age: avg,
            age_bin: avg.round() as i64,
        });
    }
    Ok(CrossSection { rows, dropped_no_daughters: dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossSectionSpec {
    /// Absorb average-age bins; otherwise include an intercept and a linear
    /// average-age control.
    pub fixed_effects: bool,
    /// Add pairwise products of the household covariates.
    pub covariate_interactions: bool,
}

/// Pairwise covariate products; christian × muslim is identically zero and skipped.
pub fn interaction_pairs() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..MAIN_EFFECTS.len() {
        for b in a + 1..MAIN_EFFECTS.len() {
            if (MAIN_EFFECTS[a], MAIN_EFFECTS[b]) != ("christian", "muslim") {
                out.push((a, b));
            }
        }
    }
    out
}

fn design(rows: &[CrossSectionRow], spec: CrossSectionSpec) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut names = Vec::new();
    if !spec.fixed_effects {
        names.push("const".to_string());
    }
    names.extend(MAIN_EFFECTS.iter().map(|s| s.to_string()));
    names.extend(EXPOSURE_TERMS.iter().map(|s| s.to_string()));
    let pairs = if spec.covariate_interactions { interaction_pairs() } else { Vec::new() };
    names.extend(pairs.iter().map(|&(a, b)| format!("{}:{}", MAIN_EFFECTS[a], MAIN_EFFECTS[b])));
    if !spec.fixed_effects {
        names.push("avg_girl_age".to_string());
    }
    let x = rows
        .iter()
        .map(|r| {
            let mut v = Vec::with_capacity(names.len());
            if !spec.fixed_effects {
                v.push(1.0);
            }
            v.extend_from_slice(&r.x);
            v.push(r.r);
            v.push(r.r * r.x[1]);
            v.push(r.r * r.x[2]);
            v.push(r.r * (1.0 - r.x[0]));
            v.extend(pairs.iter().map(|&(a, b)| r.x[a] * r.x[b]));
            if !spec.fixed_effects {
                v.push(r.avg_girl_age);
            }
            v
        })
        .collect();
    (names, x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionFit {
    pub spec: CrossSectionSpec,
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub n: usize,
    pub n_bins: usize,
    /// Residual degrees of freedom: n − p − (number of bins under fixed effects).
    pub dof: usize,
    pub sigma2: f64,
    /// R² of the raw outcome; `None` when the outcome is constant.
    pub r2: Option<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl CrossSectionFit {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.names.iter().position(|n| n == name).map(|j| (self.coef[j], self.se[j]))
    }
}

fn demean_by_bin(values: &mut [f64], bins: &[usize], n_bins: usize) {
    let mut sum = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for (v, &b) in values.iter().zip(bins) {
        sum[b] += v;
        count[b] += 1;
    }
    for (v, &b) in values.iter_mut().zip(bins) {
        *v -= sum[b] / count[b] as f64;
    }
}

/// Least squares with homoskedastic standard errors. Under fixed effects,
/// every column and the outcome are demeaned within age bins.
pub fn fit_cross_section(rows: &[CrossSectionRow], spec: CrossSectionSpec) -> Result<CrossSectionFit> {
    if rows.is_empty() {
        return Err(Error::Empty("cross-section has no households".into()));
    }
    let (names, x) = design(rows, spec);
    let p = names.len();
    let n = rows.len();
    let mut bin_index = BTreeMap::new();
    for r in rows {
        let next = bin_index.len();
        bin_index.entry(r.age_bin).or_insert(next);
    }
    let bins: Vec<usize> = rows.iter().map(|r| bin_index[&r.age_bin]).collect();
    let n_bins = bin_index.len();

    let y_raw: Vec<f64> = rows.iter().map(|r| r.y_bar).collect();
    let mut y = y_raw.clone();
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| x.iter().map(|row| row[j]).collect()).collect();
    if spec.fixed_effects {
        demean_by_bin(&mut y, &bins, n_bins);
        for c in &mut cols {
            demean_by_bin(c, &bins, n_bins);
        }
    }
    let absorbed = if spec.fixed_effects { n_bins } else { 0 };
    if n <= p + absorbed {
        return Err(Error::Degenerate(format!("{n} households leave no residual degrees of freedom for {p} regressors and {absorbed} bins")));
    }
    let dof = n - p - absorbed;

    let gram = Matrix::from_fn(p, p, |a, b| cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum());
    check_full_rank(&gram, &names)?;
    let xty = Vector::from_fn(p, |a, _| cols[a].iter().zip(&y).map(|(u, v)| u * v).sum());
    let chol = Cholesky::new(&gram)?;
    let beta = chol.solve(&xty)?;
    // one refinement step against rounding in the normal equations
    let resid0: Vec<f64> = (0..n).map(|i| y[i] - (0..p).map(|j| cols[j][i] * beta[j]).sum::<f64>()).collect();
    let corr = Vector::from_fn(p, |a, _| cols[a].iter().zip(&resid0).map(|(u, v)| u * v).sum());
    let beta = beta + chol.solve(&corr)?;

    let residuals: Vec<f64> = (0..n).map(|i| y[i] - (0..p).map(|j| cols[j][i] * beta[j]).sum::<f64>()).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = ssr / dof as f64;
    let inv = chol.inverse();
    let mean = y_raw.iter().sum::<f64>() / n as f64;
    let sst: f64 = y_raw.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(CrossSectionFit {
        spec,
        se: (0..p).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect(),
        coef: beta.iter().copied().collect(),
        names,
        n,
        n_bins,
        dof,
        sigma2,
        r2: if sst > 0.0 { Some(1.0 - ssr / sst) } else { None },
        residuals,
    })
}

/// The three comparison columns: (FE, no interactions), (no FE, interactions), (FE, interactions).
pub const TABLE3_SPECS: [CrossSectionSpec; 3] = [
    CrossSectionSpec { fixed_effects: true, covariate_interactions: false },
    CrossSectionSpec { fixed_effects: false, covariate_interactions: true },
    CrossSectionSpec { fixed_effects: true, covariate_interactions: true },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table3 {
    pub n_households: usize,
    pub dropped_no_daughters: usize,
    pub columns: Vec<CrossSectionFit>,
}

pub fn table3(panel: &HouseholdPanel, windows: &SampleWindows) -> Result<Table3> {
    let cs = build_cross_section(panel, windows)?;
    let columns = TABLE3_SPECS.iter().map(|&s| fit_cross_section(&cs.rows, s)).collect::<Result<Vec<_>>>()?;
    Ok(Table3 { n_households: cs.rows.len(), dropped_no_daughters: cs.dropped_no_daughters, columns })
}
