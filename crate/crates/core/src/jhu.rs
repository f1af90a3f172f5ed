//! Reader for the JHU CSSE global time-series CSVs (wide format).
//!
//! Layout: a header `Province/State,Country/Region,Lat,Long` followed by one
//! column per day (`m/d/yy`), then one row per country or province holding
//! cumulative counts.

use std::collections::BTreeSet;
use std::io::Read;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{offset, Anomaly, DailySeries, SeriesKind};

pub const HEADER: [&str; 4] = ["Province/State", "Country/Region", "Lat", "Long"];

pub const CONFIRMED_FILE: &str = "time_series_covid19_confirmed_global.csv";
pub const DEATHS_FILE: &str = "time_series_covid19_deaths_global.csv";
pub const RECOVERED_FILE: &str = "time_series_covid19_recovered_global.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct JhuRow {
    pub province: String,
    pub country: String,
    pub values: Vec<f64>,
}

/// A parsed wide-format file.
#[derive(Debug, Clone, PartialEq)]
pub struct JhuTable {
    start: NaiveDate,
    days: usize,
    rows: Vec<JhuRow>,
}

/// JHU writes dates as `m/d/yy`; two-digit years are 20yy.
pub fn parse_jhu_date(field: &str) -> Option<NaiveDate> {
    let mut parts = field.trim().split('/');
    let month: u32 = parts.next()?.parse().ok()?;
    let day: u32 = parts.next()?.parse().ok()?;
    let year = parts.next()?;
    if parts.next().is_some() || year.len() != 2 {
        return None;
    }
    let year: i32 = year.parse().ok()?;
    NaiveDate::from_ymd_opt(2000 + year, month, day)
}

pub fn format_jhu_date(date: NaiveDate) -> String {
    use chrono::Datelike;
    format!("{}/{}/{:02}", date.month(), date.day(), date.year() % 100)
}

impl JhuTable {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = csv.records();

        let header = match records.next() {
            Some(rec) => rec?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let header_line = header.position().map_or(1, |p| p.line());
        if header.len() < HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| a.trim() != b) {
            return Err(Error::Parse {
                line: header_line,
                message: format!(
                    "expected header starting with `{}`, found `{}`",
                    HEADER.join(","),
                    header.iter().take(4).collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut dates = Vec::with_capacity(header.len() - HEADER.len());
        for (col, field) in header.iter().enumerate().skip(HEADER.len()) {
            let date = parse_jhu_date(field).ok_or_else(|| Error::Parse {
                line: header_line,
                message: format!("column {}: `{field}` is not a m/d/yy date", col + 1),
            })?;
            if let Some(&prev) = dates.last() {
                if date != offset(prev, 1) {
                    return Err(Error::Parse {
                        line: header_line,
                        message: format!("date columns jump from {prev} to {date}"),
                    });
                }
            }
            dates.push(date);
        }
        let Some(&start) = dates.first() else {
            return Err(Error::Parse {
                line: header_line,
                message: "header has no date columns".into(),
            });
        };

        let mut rows = Vec::new();
        for rec in records {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() == 1 && rec[0].trim().is_empty() {
                continue;
            }
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            let values = rec
                .iter()
                .skip(HEADER.len())
                .enumerate()
                .map(|(i, field)| {
                    field.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("value `{field}` for {} is not a number", dates[i]),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(JhuRow {
                province: rec[0].trim().to_string(),
                country: rec[1].trim().to_string(),
                values,
            });
        }
        Ok(Self {
            start,
            days: dates.len(),
            rows,
        })
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn days(&self) -> usize {
        self.days
    }

    pub fn rows(&self) -> &[JhuRow] {
        &self.rows
    }

    /// Sorted, de-duplicated country names.
    pub fn countries(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.country.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Sum of all province rows of `country`.
    pub fn country_series(&self, country: &str, kind: SeriesKind) -> Result<DailySeries> {
        self.sum_rows(|r| r.country == country, kind)
            .ok_or_else(|| Error::UnknownCountry {
                name: country.to_string(),
                available: self.countries(),
            })
    }

    /// A single row; `province` is empty for country-level rows.
    pub fn province_series(
        &self,
        country: &str,
        province: &str,
        kind: SeriesKind,
    ) -> Result<DailySeries> {
        self.sum_rows(|r| r.country == country && r.province == province, kind)
            .ok_or_else(|| Error::UnknownCountry {
                name: format!("{province}, {country}"),
                available: self
                    .rows
                    .iter()
                    .filter(|r| r.country == country)
                    .map(|r| format!("{}, {}", r.province, r.country))
                    .collect(),
            })
    }

    fn sum_rows(&self, pick: impl Fn(&JhuRow) -> bool, kind: SeriesKind) -> Option<DailySeries> {
        let mut total: Option<Vec<f64>> = None;
        for row in self.rows.iter().filter(|r| pick(r)) {
            match total.as_mut() {
                None => total = Some(row.values.clone()),
                Some(acc) => acc.iter_mut().zip(&row.values).for_each(|(a, v)| *a += v),
            }
        }
        total.map(|values| DailySeries::new(self.start, values, kind).expect("non-empty header"))
    }
}

/// Reads one wide-format file and returns the cumulative series of `country`.
pub fn parse_jhu_timeseries<R: Read>(
    reader: R,
    country: &str,
    kind: SeriesKind,
) -> Result<DailySeries> {
    JhuTable::from_reader(reader)?.country_series(country, kind)
}

/// Summary of an ingested series, surfacing source corrections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub kind: SeriesKind,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub days: usize,
    pub anomaly_count: usize,
    pub anomalies: Vec<Anomaly>,
}

impl IngestReport {
    pub fn for_series(series: &DailySeries) -> Self {
        let anomalies = series.anomalies();
        Self {
            kind: series.kind(),
            start: series.start(),
            end: series.end(),
            days: series.len(),
            anomaly_count: anomalies.len(),
            anomalies,
        }
    }
}
