//! Household wealth index: asset/service indicators expanded to binary
//! columns, reduced to the first principal factor of their correlation
//! matrix, standardized, and dichotomized at zero.

use std::collections::BTreeSet;
use std::io;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::Serialize;

use crate::data::RowReject;
use crate::{Error, Result};

/// Raw asset fields, in column order.
pub const ASSET_FIELDS: [&str; 10] = [
    "flooring",
    "water",
    "sanitation",
    "electricity",
    "television",
    "refrigerator",
    "internet",
    "telephone",
    "computer",
    "automobile",
];

/// Categorical levels, ordered from poorer to wealthier.
const FLOORING: [&str; 4] = ["earth", "cement", "wood", "tile"];
const WATER: [&str; 4] = ["none", "public-piped", "piped-outside", "piped-inside"];
const SANITATION: [&str; 3] = ["none", "latrine", "flush"];

/// Anchor column whose loading is made non-negative.
const SIGN_ANCHOR: &str = "electricity";

fn levels(field: usize) -> Option<&'static [&'static str]> {
    match field {
        0 => Some(&FLOORING),
        1 => Some(&WATER),
        2 => Some(&SANITATION),
        _ => None,
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace(['_', ' '], "-")
}

fn parse_yes_no(s: &str) -> Option<bool> {
    match normalize(s).as_str() {
        "yes" | "1" => Some(true),
        "no" | "0" => Some(false),
        _ => None,
    }
}

/// Indicator labels produced by [`expand_indicators`], before constant columns are dropped.
pub fn indicator_labels() -> Vec<String> {
    let mut labels = Vec::new();
    for (f, name) in ASSET_FIELDS.iter().enumerate() {
        match levels(f) {
            Some(lv) => labels.extend(lv.iter().map(|l| format!("{name}:{l}"))),
            None => labels.push(name.to_string()),
        }
    }
    labels
}

/// One household's asset answers as text, in [`ASSET_FIELDS`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAssetRecord {
    pub household_id: String,
    pub fields: [String; 10],
}

impl RawAssetRecord {
    pub fn from_fields(household_id: &str, fields: &[String]) -> Self {
        let mut arr: [String; 10] = Default::default();
        for (slot, v) in arr.iter_mut().zip(fields) {
            *slot = v.clone();
        }
        Self { household_id: household_id.to_string(), fields: arr }
    }

    /// Indicator row, or the `field=value` label of the first unknown level.
    pub fn indicators(&self) -> std::result::Result<Vec<u8>, String> {
        let mut row = Vec::with_capacity(18);
        for (f, raw) in self.fields.iter().enumerate() {
            let value = normalize(raw);
            match levels(f) {
                Some(lv) => {
                    let hit = lv.iter().position(|l| *l == value);
                    let Some(hit) = hit else {
                        return Err(format!("{}={raw}", ASSET_FIELDS[f]));
                    };
                    row.extend((0..lv.len()).map(|i| u8::from(i == hit)));
                }
                None => match parse_yes_no(raw) {
                    Some(b) => row.push(u8::from(b)),
                    None => return Err(format!("{}={raw}", ASSET_FIELDS[f])),
                },
            }
        }
        Ok(row)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.indicators().map(|_| ())
    }
}

/// Households × binary indicator columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetMatrix {
    pub household_ids: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<u8>>,
    /// Labels of constant columns removed by [`AssetMatrix::drop_constant_columns`].
    pub dropped: Vec<String>,
}

impl AssetMatrix {
    pub fn new(household_ids: Vec<String>, labels: Vec<String>, rows: Vec<Vec<u8>>) -> Result<Self> {
        if household_ids.len() != rows.len() {
            return Err(Error::Dimension(format!("{} ids for {} rows", household_ids.len(), rows.len())));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != labels.len() {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {}", r.len(), labels.len())));
            }
            if r.iter().any(|v| *v > 1) {
                return Err(Error::Domain(format!("row {i} has a non-binary entry")));
            }
        }
        Ok(Self { household_ids, labels, rows, dropped: Vec::new() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn is_constant(&self, j: usize) -> bool {
        self.rows.windows(2).all(|w| w[0][j] == w[1][j])
    }

    pub fn drop_constant_columns(&mut self) {
        let keep: Vec<usize> = (0..self.labels.len()).filter(|&j| !self.is_constant(j)).collect();
        if keep.len() == self.labels.len() {
            return;
        }
        for j in 0..self.labels.len() {
            if !keep.contains(&j) {
                self.dropped.push(self.labels[j].clone());
            }
        }
        self.labels = keep.iter().map(|&j| self.labels[j].clone()).collect();
        for r in &mut self.rows {
            *r = keep.iter().map(|&j| r[j]).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetReject {
    pub household_id: String,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct AssetExpansion {
    pub matrix: AssetMatrix,
    pub rejects: Vec<AssetReject>,
}

/// Expand raw records into one binary column per level (yes/no fields get a
/// single column). Records with an unknown level are rejected with its label;
/// constant columns are dropped and listed in `matrix.dropped`.
pub fn expand_indicators(records: &[RawAssetRecord]) -> AssetExpansion {
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut rejects = Vec::new();
    for rec in records {
        match rec.indicators() {
            Ok(row) => {
                ids.push(rec.household_id.clone());
                rows.push(row);
            }
            Err(label) => rejects.push(AssetReject { household_id: rec.household_id.clone(), label }),
        }
    }
    let mut matrix = AssetMatrix { household_ids: ids, labels: indicator_labels(), rows, dropped: Vec::new() };
    matrix.drop_constant_columns();
    AssetExpansion { matrix, rejects }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthIndex {
    pub household_ids: Vec<String>,
    /// Standardized scores: sample mean 0, sample variance 1.
    pub scores: Vec<f64>,
    /// (label, loading) for every non-constant column used.
    pub loadings: Vec<(String, f64)>,
    pub eigenvalue: f64,
    /// Share of total correlation variance carried by the first factor.
    pub explained_share: f64,
    /// Constant columns ignored by the index.
    pub skipped: Vec<String>,
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues and the eigenvectors as columns of the second value.
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn standardize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter_mut().for_each(|v| *v -= mean);
    let sd = (values.iter().map(|v| v * v).sum::<f64>() / (n - 1.0)).sqrt();
    values.iter_mut().for_each(|v| *v /= sd);
    // second pass removes residual rounding in the mean
    let mean = values.iter().sum::<f64>() / n;
    values.iter_mut().for_each(|v| *v -= mean);
}

/// First-factor wealth scores: projection of the standardized indicators on
/// the leading eigenvector of their correlation matrix, then standardized.
/// The loading on `electricity` (or, if absent, the first column) is made
/// non-negative.
pub fn first_factor_index(m: &AssetMatrix) -> Result<WealthIndex> {
    let n = m.n_rows();
    if n < 3 {
        return Err(Error::Degenerate(format!("wealth index needs at least 3 households, got {n}")));
    }
    let cols: Vec<usize> = (0..m.labels.len()).filter(|&j| !m.is_constant(j)).collect();
    if cols.len() < 2 {
        return Err(Error::Degenerate(format!("wealth index needs at least 2 non-constant columns, got {}", cols.len())));
    }
    let skipped = (0..m.labels.len()).filter(|j| !cols.contains(j)).map(|j| m.labels[j].clone()).collect();
    let p = cols.len();
    let z: Vec<Vec<f64>> = cols
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = m.rows.iter().map(|r| f64::from(r[j])).collect();
            standardize(&mut col);
            col
        })
        .collect();
    let mut corr = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in a..p {
            let c = z[a].iter().zip(&z[b]).map(|(x, y)| x * y).sum::<f64>() / (n - 1) as f64;
            corr[a][b] = c;
            corr[b][a] = c;
        }
    }
    let (values, vectors) = jacobi_eigen(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let (top, second) = (values[order[0]], values[order[1]]);
    if top - second <= 1e-10 * top.abs().max(1.0) {
        return Err(Error::Degenerate("leading eigenvalue of the asset correlation matrix is not simple".into()));
    }
    let mut loadings: Vec<f64> = vectors.iter().map(|row| row[order[0]]).collect();
    let anchor = cols.iter().position(|&j| m.labels[j] == SIGN_ANCHOR).unwrap_or(0);
    if loadings[anchor] < 0.0 {
        loadings.iter_mut().for_each(|l| *l = -*l);
    }
    let mut scores: Vec<f64> = (0..n).map(|i| (0..p).map(|a| loadings[a] * z[a][i]).sum()).collect();
    standardize(&mut scores);
    Ok(WealthIndex {
        household_ids: m.household_ids.clone(),
        scores,
        loadings: cols.iter().zip(&loadings).map(|(&j, &l)| (m.labels[j].clone(), l)).collect(),
        eigenvalue: top,
        explained_share: top / p as f64,
        skipped,
    })
}

/// Low-wealth classification: score ≤ 0.
pub fn is_low(score: f64) -> bool {
    score <= 0.0
}

pub fn dichotomize(scores: &[f64]) -> Vec<bool> {
    scores.iter().map(|&s| is_low(s)).collect()
}

#[derive(Debug, Clone)]
pub struct AssetLoad {
    pub records: Vec<RawAssetRecord>,
    pub rejects: Vec<RowReject>,
}

/// Read the asset CSV: `household_id` plus the [`ASSET_FIELDS`] columns.
pub fn load_asset_csv<R: io::Read>(reader: R) -> Result<AssetLoad> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(e.into()),
        Err(e) => return Err(Error::Schema(format!("unreadable header: {e}"))),
    };
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Schema(format!("missing mandatory column `{name}`")))
    };
    let id_col = find("household_id")?;
    let field_cols = ASSET_FIELDS.iter().map(|f| find(f)).collect::<Result<Vec<_>>>()?;
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut rec = StringRecord::new();
    loop {
        let hint = rdr.position().line();
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                rejects.push(RowReject { line: e.position().map(|p| p.line()).unwrap_or(hint), reason: e.to_string() });
                continue;
            }
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(hint);
        let id = rec.get(id_col).unwrap_or("").to_string();
        if id.is_empty() {
            rejects.push(RowReject { line, reason: "empty household_id".into() });
            continue;
        }
        let fields: Vec<String> = field_cols.iter().map(|&c| rec.get(c).unwrap_or("").to_string()).collect();
        let raw = RawAssetRecord::from_fields(&id, &fields);
        if let Err(label) = raw.validate() {
            rejects.push(RowReject { line, reason: format!("unknown asset level: {label}") });
            continue;
        }
        if !seen.insert(id.clone()) {
            rejects.push(RowReject { line, reason: format!("duplicate household_id `{id}`") });
            continue;
        }
        records.push(raw);
    }
    Ok(AssetLoad { records, rejects })
}
