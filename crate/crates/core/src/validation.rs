//! Empirical check of the OC/CO cost ratio on a pinned JHU snapshot.
//!
//! Two consecutive cycles of equal length are laid over the data starting at
//! a chosen date. Case totals per cycle come from the cumulative confirmed
//! count read at the cycle boundaries, deaths are estimated by multiplying
//! with a CFR, and the resulting death ratio is compared with the peak growth
//! of the active cases over the first (open-close) cycle.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cfr::{self, CfrModel};
use crate::error::{Error, Result};
use crate::jhu::{JhuTable, CONFIRMED_FILE, DEATHS_FILE, RECOVERED_FILE};
use crate::series::{active_cases, offset, DailySeries, SeriesKind};

/// CFR reported for Israel over June 1 to December 29, 2020.
pub const REFERENCE_CFR: f64 = 0.0085;
pub const CHECKSUM_MANIFEST: &str = "SHA256SUMS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: Option<String>,
    pub expected: Option<String>,
}

impl FileChecksum {
    pub fn ok(&self) -> bool {
        match (&self.sha256, &self.expected) {
            (Some(actual), Some(expected)) => actual == expected,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }
}

fn checksum_report(rows: &[FileChecksum]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = write!(
            out,
            "\n  {}: {}",
            r.file,
            r.sha256.as_deref().unwrap_or("<missing>")
        );
        if let Some(expected) = &r.expected {
            let verdict = if r.ok() { "ok" } else { "MISMATCH" };
            let _ = write!(out, " (expected {expected}, {verdict})");
        }
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// The three global JHU time-series files read from one directory.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub dir: PathBuf,
    pub confirmed: JhuTable,
    pub deaths: JhuTable,
    pub recovered: JhuTable,
    pub checksums: Vec<FileChecksum>,
}

impl Snapshot {
    /// Loads the snapshot. Every file is hashed; when a `SHA256SUMS` manifest
    /// sits next to the files, each hash must match it.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let manifest = fs::read_to_string(dir.join(CHECKSUM_MANIFEST)).ok();
        let expected_for = |file: &str| {
            manifest.as_ref().and_then(|m| {
                m.lines().find_map(|line| {
                    let mut parts = line.split_whitespace();
                    let hash = parts.next()?;
                    let name = parts.next()?.trim_start_matches('*');
                    (name == file).then(|| hash.to_ascii_lowercase())
                })
            })
        };

        let names = [CONFIRMED_FILE, DEATHS_FILE, RECOVERED_FILE];
        let contents: Vec<Option<Vec<u8>>> =
            names.iter().map(|n| fs::read(dir.join(n)).ok()).collect();
        let checksums: Vec<FileChecksum> = names
            .iter()
            .zip(&contents)
            .map(|(name, bytes)| FileChecksum {
                file: name.to_string(),
                sha256: bytes.as_deref().map(sha256_hex),
                expected: expected_for(name),
            })
            .collect();

        if checksums.iter().any(|c| !c.ok()) {
            return Err(Error::Snapshot(format!(
                "snapshot in {} is missing or corrupt:{}",
                dir.display(),
                checksum_report(&checksums)
            )));
        }
        let parse = |i: usize| {
            JhuTable::from_reader(contents[i].as_deref().expect("checked above")).map_err(|e| {
                Error::Snapshot(format!(
                    "{}: {e}; checksums:{}",
                    names[i],
                    checksum_report(&checksums)
                ))
            })
        };
        Ok(Self {
            confirmed: parse(0)?,
            deaths: parse(1)?,
            recovered: parse(2)?,
            dir,
            checksums,
        })
    }

    pub fn country(&self, name: &str) -> Result<CountryData> {
        Ok(CountryData {
            confirmed: self
                .confirmed
                .country_series(name, SeriesKind::ConfirmedCumulative)?,
            deaths: self
                .deaths
                .country_series(name, SeriesKind::DeathsCumulative)?,
            recovered: self
                .recovered
                .country_series(name, SeriesKind::RecoveredCumulative)?,
        })
    }
}

/// Cumulative series of one country.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryData {
    pub confirmed: DailySeries,
    pub deaths: DailySeries,
    pub recovered: DailySeries,
}

impl CountryData {
    pub fn active(&self) -> Result<DailySeries> {
        active_cases(&self.confirmed, &self.deaths, &self.recovered)
    }

    /// Fits the CFR kernel on `window_days`-smoothed daily cases and deaths
    /// restricted to `from..=to`.
    pub fn fit_cfr(
        &self,
        from: NaiveDate,
        to: NaiveDate,
        delays: RangeInclusive<usize>,
        window_days: usize,
    ) -> Result<CfrModel> {
        let cases = cfr::smoothed_daily(&self.confirmed, window_days)?
            .window(from, to)?
            .series;
        let deaths = cfr::smoothed_daily(&self.deaths, window_days)?
            .window(from, to)?
            .series;
        cfr::fit(&cases, &deaths, delays)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub country: String,
    /// First boundary; the OC cycle starts here.
    pub cycle_start: NaiveDate,
    pub cycle_days: usize,
    pub cfr_from: NaiveDate,
    pub cfr_to: NaiveDate,
    pub k_min: usize,
    pub k_max: usize,
    pub smoothing_days: usize,
    /// Use this CFR instead of fitting one.
    pub cfr_override: Option<f64>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).expect("valid date");
        Self {
            country: "Israel".into(),
            cycle_start: d(8, 30),
            cycle_days: 54,
            cfr_from: d(6, 1),
            cfr_to: d(12, 29),
            k_min: 0,
            k_max: 15,
            smoothing_days: 7,
            cfr_override: None,
        }
    }
}

/// A cycle between two boundary dates. The cycle's new cases are those
/// reported on `start + 1 ..= end`; equivalently the days `start ..= end - 1`
/// belong to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatedValue {
    pub date: NaiveDate,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfrSummary {
    pub delay_k: usize,
    pub decay_a: f64,
    pub scale_b: f64,
    pub cv_a: Option<f64>,
    pub cv_b: Option<f64>,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub country: String,
    pub oc_window: CycleWindow,
    pub co_window: CycleWindow,
    pub oc_cases: f64,
    pub co_cases: f64,
    pub cfr_used: f64,
    /// `"fitted"` or `"fixed"`.
    pub cfr_source: String,
    pub cfr_fit: Option<CfrSummary>,
    pub oc_deaths_est: f64,
    pub co_deaths_est: f64,
    pub death_ratio: f64,
    /// Active cases at the first boundary.
    pub active_start: DatedValue,
    /// Peak active cases during the OC cycle.
    pub active_peak: DatedValue,
    /// Lowest active cases during the CO cycle.
    pub active_trough: DatedValue,
    /// Active cases at the last boundary.
    pub active_end: DatedValue,
    /// `I_MAX / I_0` read off the active-case curve.
    pub predicted_ratio_from_model: f64,
}

fn extreme(series: &DailySeries, from: NaiveDate, to: NaiveDate, max: bool) -> Result<DatedValue> {
    let w = series.window(from, to)?.series;
    let mut best: Option<DatedValue> = None;
    for (date, value) in w.iter() {
        let better = match best {
            None => true,
            Some(b) if max => value > b.value,
            Some(b) => value < b.value,
        };
        if better {
            best = Some(DatedValue { date, value });
        }
    }
    Ok(best.expect("window is non-empty"))
}

fn value_on(series: &DailySeries, date: NaiveDate) -> Result<f64> {
    series.get(date).ok_or_else(|| {
        Error::Series(format!(
            "{} has no value on {date} (covers {}..={})",
            series.kind(),
            series.start(),
            series.end()
        ))
    })
}

/// Runs the two-cycle validation on one country's data.
pub fn validate(data: &CountryData, config: &ValidationConfig) -> Result<ValidationReport> {
    if config.cycle_days == 0 {
        return Err(Error::Series(
            "cycle length must be at least one day".into(),
        ));
    }
    let b0 = config.cycle_start;
    let b1 = offset(b0, config.cycle_days);
    let b2 = offset(b1, config.cycle_days);

    let confirmed = &data.confirmed;
    let oc_cases = value_on(confirmed, b1)? - value_on(confirmed, b0)?;
    let co_cases = value_on(confirmed, b2)? - value_on(confirmed, b1)?;

    let (cfr_used, cfr_source, cfr_fit) = match config.cfr_override {
        Some(c) => (c, "fixed", None),
        None => {
            let m = data.fit_cfr(
                config.cfr_from,
                config.cfr_to,
                config.k_min..=config.k_max,
                config.smoothing_days,
            )?;
            let summary = CfrSummary {
                delay_k: m.delay_k,
                decay_a: m.decay_a,
                scale_b: m.scale_b,
                cv_a: m.cv_a,
                cv_b: m.cv_b,
                sse: m.sse,
            };
            (m.cfr, "fitted", Some(summary))
        }
    };

    let active = data.active()?;
    let active_start = DatedValue {
        date: b0,
        value: value_on(&active, b0)?,
    };
    let active_end = DatedValue {
        date: b2,
        value: value_on(&active, b2)?,
    };
    let active_peak = extreme(&active, b0, b1, true)?;
    let active_trough = extreme(&active, b1, b2, false)?;

    Ok(ValidationReport {
        country: config.country.clone(),
        oc_window: CycleWindow { start: b0, end: b1 },
        co_window: CycleWindow { start: b1, end: b2 },
        oc_cases,
        co_cases,
        cfr_used,
        cfr_source: cfr_source.into(),
        cfr_fit,
        oc_deaths_est: oc_cases * cfr_used,
        co_deaths_est: co_cases * cfr_used,
        death_ratio: oc_cases / co_cases,
        predicted_ratio_from_model: active_peak.value / active_start.value,
        active_start,
        active_peak,
        active_trough,
        active_end,
    })
}

/// How far an observed value may sit from its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Exact,
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(&self, observed: f64, expected: f64) -> bool {
        match *self {
            Tolerance::Exact => observed == expected,
            Tolerance::Absolute(tol) => (observed - expected).abs() <= tol,
            Tolerance::Relative(tol) => ((observed - expected) / expected).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl ReferenceCheck {
    pub fn new(name: &str, observed: f64, expected: f64, tolerance: Tolerance) -> Self {
        Self {
            name: name.into(),
            observed,
            expected,
            pass: tolerance.accepts(observed, expected),
            tolerance,
        }
    }
}

/// Published figures for Israel, August 30 to December 16, 2020.
pub fn israel_validation_checks(report: &ValidationReport) -> Vec<ReferenceCheck> {
    use Tolerance::*;
    vec![
        ReferenceCheck::new("active_start", report.active_start.value, 20_876.0, Exact),
        ReferenceCheck::new("active_peak", report.active_peak.value, 71_114.0, Exact),
        ReferenceCheck::new("active_trough", report.active_trough.value, 8_697.0, Exact),
        ReferenceCheck::new("active_end", report.active_end.value, 20_791.0, Exact),
        ReferenceCheck::new("oc_cases", report.oc_cases, 190_000.0, Relative(0.03)),
        ReferenceCheck::new("co_cases", report.co_cases, 52_000.0, Relative(0.03)),
        ReferenceCheck::new(
            "oc_deaths_est",
            report.oc_deaths_est,
            1_600.0,
            Relative(0.05),
        ),
        ReferenceCheck::new("co_deaths_est", report.co_deaths_est, 440.0, Relative(0.05)),
        ReferenceCheck::new("death_ratio", report.death_ratio, 3.7, Absolute(0.2)),
        ReferenceCheck::new(
            "predicted_ratio_from_model",
            report.predicted_ratio_from_model,
            3.6,
            Absolute(0.2),
        ),
    ]
}

/// Published CFR kernel for Israel, June 1 to December 29, 2020.
pub fn israel_cfr_checks(model: &CfrModel) -> Vec<ReferenceCheck> {
    use Tolerance::*;
    vec![
        ReferenceCheck::new("delay_k", model.delay_k as f64, 3.0, Exact),
        ReferenceCheck::new("cfr", model.cfr, REFERENCE_CFR, Absolute(0.0010)),
        ReferenceCheck::new("decay_a", model.decay_a, 0.943, Absolute(0.01)),
        ReferenceCheck::new("scale_b", model.scale_b, 0.000485, Absolute(0.00005)),
    ]
}
