//! CSV readers for site maps and long-format functional panels.

use std::collections::HashMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use mfscan_core::{CoordinateMode, FunctionalDataset, SiteMap, TimeGrid};

use crate::error::{CliError, Result};

/// Missing cells listed in full before the message is truncated.
const MAX_REPORTED_GAPS: usize = 10;

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        },
        _ => CliError::input(path, e.to_string()),
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads `site_id,x,y` (planar) or `site_id,lon,lat` (geodetic). Columns are
/// located by header name, so extra columns are ignored.
pub fn load_sites(path: &Path, mode: CoordinateMode) -> Result<SiteMap> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let (a, b) = match mode {
        CoordinateMode::Planar => ("x", "y"),
        CoordinateMode::Geodetic => ("lon", "lat"),
    };
    let empty = headers.iter().all(str::is_empty);
    let find = |name: &str| {
        column(&headers, name).ok_or_else(|| {
            if empty {
                CliError::input(path, mfscan_core::Error::TooFewSites(0).to_string())
            } else {
                CliError::input(
                    path,
                    format!("missing column `{name}` (expected site_id,{a},{b})"),
                )
            }
        })
    };
    let (id_col, a_col, b_col) = (find("site_id")?, find(a)?, find(b)?);

    let mut ids: Vec<String> = Vec::new();
    let mut coords: Vec<[f64; 2]> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut by_coord: HashMap<(u64, u64), usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let id = record[id_col].to_string();
        if id.is_empty() {
            return Err(CliError::input(path, format!("line {line}: empty site_id")));
        }
        let number = |col: usize, name: &str| {
            record[col]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::input(
                        path,
                        format!("line {line}: `{}` is not a valid {name}", &record[col]),
                    )
                })
        };
        let xy = [number(a_col, a)?, number(b_col, b)?];
        if let Some(&k) = by_id.get(&id) {
            return Err(CliError::input(
                path,
                format!(
                    "line {line}: duplicate site_id `{id}` (first on line {})",
                    lines[k]
                ),
            ));
        }
        // Normalise -0.0 so equal coordinates hash equally.
        let key = ((xy[0] + 0.0).to_bits(), (xy[1] + 0.0).to_bits());
        if let Some(&k) = by_coord.get(&key) {
            return Err(CliError::input(
                path,
                format!(
                    "line {line}: sites `{}` (line {}) and `{id}` share coordinates ({}, {})",
                    ids[k], lines[k], xy[0], xy[1]
                ),
            ));
        }
        by_id.insert(id.clone(), ids.len());
        by_coord.insert(key, ids.len());
        ids.push(id);
        coords.push(xy);
        lines.push(line);
    }
    SiteMap::new(ids, coords, mode).map_err(|e| CliError::input(path, e.to_string()))
}

/// A functional dataset together with the time labels as written in the file.
#[derive(Debug, Clone)]
pub struct Panel {
    pub dataset: FunctionalDataset,
    pub time_labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TimeKind {
    Numeric,
    Calendar,
}

/// Numeric times are used as given; ISO dates and date-times become days.
fn parse_time(s: &str) -> Option<(TimeKind, f64)> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some((TimeKind::Numeric, v));
    }
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1)?.and_hms_opt(0, 0, 0)?;
    let dt = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok())?;
    Some((
        TimeKind::Calendar,
        (dt - epoch).num_seconds() as f64 / 86_400.0,
    ))
}

/// Reads a long-format panel `site_id,time,var1,…,varp` and aligns it to the
/// site order of `sites`. Calendar times are measured in days from the
/// first date.
pub fn load_panel(path: &Path, sites: &SiteMap) -> Result<Panel> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let id_col = column(&headers, "site_id")
        .ok_or_else(|| CliError::input(path, "missing column `site_id`"))?;
    let time_col =
        column(&headers, "time").ok_or_else(|| CliError::input(path, "missing column `time`"))?;
    let var_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != id_col && c != time_col)
        .collect();
    if var_cols.is_empty() {
        return Err(CliError::input(
            path,
            "no variable columns after site_id and time",
        ));
    }
    let var_names: Vec<String> = var_cols.iter().map(|&c| headers[c].to_string()).collect();
    let p = var_cols.len();
    let n = sites.len();

    let mut kind: Option<TimeKind> = None;
    let mut times: Vec<(f64, String)> = Vec::new();
    let mut time_index: HashMap<u64, usize> = HashMap::new();
    // (site, time slot, var) -> (value, line)
    let mut cells: HashMap<(usize, usize, usize), (f64, u64)> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let id = &record[id_col];
        let site = sites
            .index_of(id)
            .ok_or_else(|| CliError::input(path, format!("line {line}: unknown site_id `{id}`")))?;
        let raw_time = &record[time_col];
        let (k, t) = parse_time(raw_time).ok_or_else(|| {
            CliError::input(path, format!("line {line}: cannot parse time `{raw_time}`"))
        })?;
        match kind {
            None => kind = Some(k),
            Some(prev) if prev != k => {
                return Err(CliError::input(
                    path,
                    format!("line {line}: mixes numeric times and dates"),
                ));
            }
            _ => {}
        }
        let slot = *time_index.entry((t + 0.0).to_bits()).or_insert_with(|| {
            times.push((t, raw_time.to_string()));
            times.len() - 1
        });
        for (v, &c) in var_cols.iter().enumerate() {
            let cell = &record[c];
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                continue;
            }
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::input(
                        path,
                        format!(
                            "line {line}: `{cell}` is not a finite number for `{}`",
                            var_names[v]
                        ),
                    )
                })?;
            if let Some(&(old, first)) = cells.get(&(site, slot, v)) {
                if old != value {
                    return Err(CliError::input(
                        path,
                        format!(
                            "line {line}: conflicting values for site `{id}`, time `{raw_time}`, `{}` ({old} on line {first}, {value} here)",
                            var_names[v]
                        ),
                    ));
                }
                continue;
            }
            cells.insert((site, slot, v), (value, line));
        }
    }

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].0.total_cmp(&times[b].0));
    let origin = if kind == Some(TimeKind::Calendar) {
        times[order[0]].0
    } else {
        0.0
    };
    let points: Vec<f64> = order.iter().map(|&s| times[s].0 - origin).collect();
    let time_labels: Vec<String> = order.iter().map(|&s| times[s].1.clone()).collect();
    let t_len = points.len();

    let mut values = Vec::with_capacity(n * t_len * p);
    let mut gaps: Vec<String> = Vec::new();
    let mut gap_count = 0usize;
    for site in 0..n {
        for (k, &slot) in order.iter().enumerate() {
            for v in 0..p {
                match cells.get(&(site, slot, v)) {
                    Some(&(x, _)) => values.push(x),
                    None => {
                        gap_count += 1;
                        if gaps.len() < MAX_REPORTED_GAPS {
                            gaps.push(format!(
                                "({}, {}, {})",
                                sites.ids()[site],
                                time_labels[k],
                                var_names[v]
                            ));
                        }
                        values.push(f64::NAN);
                    }
                }
            }
        }
    }
    if gap_count > 0 {
        let more = if gap_count > gaps.len() {
            format!(" and {} more", gap_count - gaps.len())
        } else {
            String::new()
        };
        return Err(CliError::input(
            path,
            format!(
                "{gap_count} missing (site_id, time, variable) cells: {}{more}",
                gaps.join(", ")
            ),
        ));
    }
    let grid = TimeGrid::new(points).map_err(|e| CliError::input(path, e.to_string()))?;
    let dataset = FunctionalDataset::new(n, p, grid, values, var_names)
        .map_err(|e| CliError::input(path, e.to_string()))?;
    Ok(Panel {
        dataset,
        time_labels,
    })
}

pub fn load_functional_csv(path: &Path, sites: &SiteMap) -> Result<FunctionalDataset> {
    load_panel(path, sites).map(|p| p.dataset)
}
