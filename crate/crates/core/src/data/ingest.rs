use std::collections::BTreeMap;
use std::io;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{ChildRecord, HouseholdPanel, HouseholdRecord, Religion};
use crate::wealth_index::{self, RawAssetRecord, ASSET_FIELDS};
use crate::{Error, Result};

/// Mandatory panel columns, in canonical output order (`hwi` is optional
/// when the full asset column set is present).
pub const PANEL_COLUMNS: [&str; 11] = [
    "household_id",
    "rural",
    "head_edu_years",
    "head_female",
    "religion",
    "hwi",
    "n_children",
    "child_id",
    "child_age",
    "child_female",
    "child_educated",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RowReject {
    /// 1-based line number in the input (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct PanelLoad {
    pub panel: HouseholdPanel,
    pub rejects: Vec<RowReject>,
    pub warnings: Vec<String>,
    /// Data rows seen, accepted or not.
    pub rows_read: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct HouseholdAttrs {
    rural: bool,
    head_edu_years: u8,
    head_female: bool,
    religion: Religion,
    hwi: Option<f64>,
    declared_children: usize,
    assets: Option<RawAssetRecord>,
}

struct Columns {
    idx: BTreeMap<&'static str, usize>,
    hwi: Option<usize>,
    assets: Option<Vec<usize>>,
}

impl Columns {
    fn from_headers(headers: &StringRecord) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
        let mut idx = BTreeMap::new();
        for name in PANEL_COLUMNS.iter().filter(|n| **n != "hwi") {
            let i = find(name).ok_or_else(|| Error::Schema(format!("missing mandatory column `{name}`")))?;
            idx.insert(*name, i);
        }
        let hwi = find("hwi");
        let assets: Option<Vec<usize>> = ASSET_FIELDS.iter().map(|f| find(f)).collect();
        if hwi.is_none() && assets.is_none() {
            return Err(Error::Schema(
                "missing column `hwi` (required unless all asset columns are present)".into(),
            ));
        }
        Ok(Self { idx, hwi, assets })
    }

    fn get<'r>(&self, rec: &'r StringRecord, name: &str) -> &'r str {
        rec.get(self.idx[name]).unwrap_or("")
    }
}

fn parse_flag(s: &str, col: &str) -> std::result::Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("column `{col}`: expected 0 or 1, got {s:?}")),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, col: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("column `{col}`: cannot parse {s:?} as an integer"))
}

fn parse_row(cols: &Columns, rec: &StringRecord) -> std::result::Result<(String, HouseholdAttrs, ChildRecord), String> {
    let household_id = cols.get(rec, "household_id").to_string();
    if household_id.is_empty() {
        return Err("empty household_id".into());
    }
    let head_edu_years: u8 = parse_int(cols.get(rec, "head_edu_years"), "head_edu_years")?;
    if head_edu_years > 6 {
        return Err(format!("column `head_edu_years`: {head_edu_years} outside 0-6"));
    }
    let religion_raw = cols.get(rec, "religion");
    let religion = Religion::parse(religion_raw)
        .ok_or_else(|| format!("column `religion`: unknown value {religion_raw:?}"))?;
    let hwi = match cols.hwi {
        Some(i) => {
            let raw = rec.get(i).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| format!("column `hwi`: cannot parse {raw:?}"))?;
            if !v.is_finite() {
                return Err(format!("column `hwi`: non-finite value {raw:?}"));
            }
            Some(v)
        }
        None => None,
    };
    let assets = match (&cols.assets, cols.hwi) {
        (Some(idx), None) => {
            let fields: Vec<String> = idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect();
            let raw = RawAssetRecord::from_fields(&household_id, &fields);
            raw.validate().map_err(|label| format!("unknown asset level: {label}"))?;
            Some(raw)
        }
        _ => None,
    };
    let attrs = HouseholdAttrs {
        rural: parse_flag(cols.get(rec, "rural"), "rural")?,
        head_edu_years,
        head_female: parse_flag(cols.get(rec, "head_female"), "head_female")?,
        religion,
        hwi,
        declared_children: parse_int(cols.get(rec, "n_children"), "n_children")?,
        assets,
    };
    let child_id = cols.get(rec, "child_id").to_string();
    if child_id.is_empty() {
        return Err("empty child_id".into());
    }
    let age_years: u32 = parse_int(cols.get(rec, "child_age"), "child_age")?;
    if age_years > 120 {
        return Err(format!("column `child_age`: {age_years} outside 0-120"));
    }
    let educated_raw = cols.get(rec, "child_educated");
    if educated_raw.is_empty() {
        return Err("missing child education status".into());
    }
    let child = ChildRecord {
        child_id,
        age_years,
        female: parse_flag(cols.get(rec, "child_female"), "child_female")?,
        educated: parse_flag(educated_raw, "child_educated")?,
    };
    Ok((household_id, attrs, child))
}

/// Read a panel CSV (one row per child, household attributes repeated).
///
/// Malformed rows are collected in `rejects` with their line number; only a
/// missing mandatory column or an I/O failure aborts the load. When the file
/// carries the asset columns instead of `hwi`, the wealth index is computed
/// from them over all accepted households.
pub fn load_panel_csv<R: io::Read>(reader: R) -> Result<PanelLoad> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).flexible(false).from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) if e.is_io_error() => return Err(e.into()),
        Err(e) => return Err(Error::Schema(format!("unreadable header: {e}"))),
    };
    let cols = Columns::from_headers(&headers)?;

    let mut groups: BTreeMap<String, (HouseholdAttrs, Vec<ChildRecord>)> = BTreeMap::new();
    let mut rejects = Vec::new();
    let mut rows_read = 0usize;
    let mut record = StringRecord::new();
    loop {
        let line_hint = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                rows_read += 1;
                let line = e.position().map(|p| p.line()).unwrap_or(line_hint);
                rejects.push(RowReject { line, reason: e.to_string() });
                continue;
            }
        }
        rows_read += 1;
        let line = record.position().map(|p| p.line()).unwrap_or(line_hint);
        let (hid, attrs, child) = match parse_row(&cols, &record) {
            Ok(parsed) => parsed,
            Err(reason) => {
                rejects.push(RowReject { line, reason });
                continue;
            }
        };
        match groups.get_mut(&hid) {
            None => {
                groups.insert(hid, (attrs, vec![child]));
            }
            Some((existing, children)) => {
                if *existing != attrs {
                    rejects.push(RowReject {
                        line,
                        reason: format!("household `{hid}`: attributes differ from its first row"),
                    });
                } else if children.iter().any(|c| c.child_id == child.child_id) {
                    rejects.push(RowReject {
                        line,
                        reason: format!("household `{hid}`: duplicate child_id `{}`", child.child_id),
                    });
                } else {
                    children.push(child);
                }
            }
        }
    }

    let mut warnings = Vec::new();
    let hwi_from_assets = if cols.hwi.is_none() && !groups.is_empty() {
        let raws: Vec<RawAssetRecord> = groups
            .values()
            .map(|(a, _)| a.assets.clone().expect("asset mode rows carry assets"))
            .collect();
        let expansion = wealth_index::expand_indicators(&raws);
        warnings.extend(expansion.matrix.dropped.iter().map(|c| format!("asset column `{c}` is constant and was dropped")));
        let index = wealth_index::first_factor_index(&expansion.matrix)?;
        Some(index.scores)
    } else {
        None
    };

    let households = groups
        .into_iter()
        .enumerate()
        .map(|(i, (household_id, (attrs, children)))| {
            if attrs.declared_children != children.len() {
                warnings.push(format!(
                    "household `{household_id}`: n_children = {} but {} child rows; using {}",
                    attrs.declared_children,
                    children.len(),
                    children.len()
                ));
            }
            let hwi = match &hwi_from_assets {
                Some(scores) => scores[i],
                None => attrs.hwi.expect("hwi mode rows carry hwi"),
            };
            HouseholdRecord {
                household_id,
                head_edu_years: attrs.head_edu_years,
                head_female: attrs.head_female,
                rural: attrs.rural,
                religion: attrs.religion,
                hwi,
                n_children: children.len(),
                children,
                subsample: false,
            }
        })
        .collect();

    Ok(PanelLoad { panel: HouseholdPanel::new(households), rejects, warnings, rows_read })
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Write a panel in the canonical column order, one row per child.
pub fn write_panel_csv<W: io::Write>(panel: &HouseholdPanel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PANEL_COLUMNS)?;
    for h in &panel.households {
        for c in &h.children {
            w.write_record([
                h.household_id.as_str(),
                flag(h.rural),
                &h.head_edu_years.to_string(),
                flag(h.head_female),
                h.religion.as_str(),
                &h.hwi.to_string(),
                &h.children.len().to_string(),
                c.child_id.as_str(),
                &c.age_years.to_string(),
                flag(c.female),
                flag(c.educated),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
