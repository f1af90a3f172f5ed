//! Long-format output (`date,kind,value`) as CSV or JSON, and the reverse.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{offset, DailySeries, SeriesKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub date: NaiveDate,
    pub kind: SeriesKind,
    pub value: f64,
}

/// Flattens the series into records ordered by date; on equal dates the
/// order of `series` is kept.
pub fn records(series: &[&DailySeries]) -> Vec<Record> {
    let mut out: Vec<Record> = series
        .iter()
        .flat_map(|s| {
            s.iter().map(|(date, value)| Record {
                date,
                kind: s.kind(),
                value,
            })
        })
        .collect();
    out.sort_by_key(|r| r.date);
    out
}

pub fn write_csv<W: Write>(mut out: W, series: &[&DailySeries]) -> Result<()> {
    writeln!(out, "date,kind,value")?;
    for r in records(series) {
        writeln!(out, "{},{},{}", r.date, r.kind, r.value)?;
    }
    Ok(())
}

pub fn write_json<W: Write>(out: W, series: &[&DailySeries]) -> Result<()> {
    serde_json::to_writer_pretty(out, &records(series))?;
    Ok(())
}

pub fn to_csv_string(series: &[&DailySeries]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, series).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 output")
}

pub fn to_json_string(series: &[&DailySeries]) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, series).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 output")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<DailySeries>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "kind", "value"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `date,kind,value`".into(),
        });
    }
    let mut recs = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d").map_err(|_| bad("date"))?;
        let kind = SeriesKind::from_name(&row[1]).ok_or_else(|| bad("kind"))?;
        let value = row[2].parse::<f64>().map_err(|_| bad("value"))?;
        recs.push(Record { date, kind, value });
    }
    from_records(&recs)
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<DailySeries>> {
    let recs: Vec<Record> = serde_json::from_reader(input)?;
    from_records(&recs)
}

/// Regroups records into one series per kind, in order of first appearance.
pub fn from_records(recs: &[Record]) -> Result<Vec<DailySeries>> {
    let mut order = Vec::new();
    let mut by_kind: BTreeMap<SeriesKind, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for r in recs {
        let entry = by_kind.entry(r.kind).or_insert_with(|| {
            order.push(r.kind);
            Vec::new()
        });
        entry.push((r.date, r.value));
    }
    order
        .into_iter()
        .map(|kind| {
            let points = &by_kind[&kind];
            let start = points[0].0;
            for (i, (date, _)) in points.iter().enumerate() {
                if *date != offset(start, i) {
                    return Err(Error::Series(format!(
                        "{kind} records are not consecutive days at {date}"
                    )));
                }
            }
            DailySeries::new(start, points.iter().map(|p| p.1).collect(), kind)
        })
        .collect()
}
