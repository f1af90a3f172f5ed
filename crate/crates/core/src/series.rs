//! Dated daily time series and the transformations used on surveillance data.

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::cost::{trapezoid, ActiveCurve};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    ConfirmedCumulative,
    DeathsCumulative,
    RecoveredCumulative,
    NewCases,
    DailyDeaths,
    DailyRecovered,
    ActiveCases,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 7] = [
        SeriesKind::ConfirmedCumulative,
        SeriesKind::DeathsCumulative,
        SeriesKind::RecoveredCumulative,
        SeriesKind::NewCases,
        SeriesKind::DailyDeaths,
        SeriesKind::DailyRecovered,
        SeriesKind::ActiveCases,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::ConfirmedCumulative => "confirmed_cumulative",
            SeriesKind::DeathsCumulative => "deaths_cumulative",
            SeriesKind::RecoveredCumulative => "recovered_cumulative",
            SeriesKind::NewCases => "new_cases",
            SeriesKind::DailyDeaths => "daily_deaths",
            SeriesKind::DailyRecovered => "daily_recovered",
            SeriesKind::ActiveCases => "active_cases",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_cumulative(&self) -> bool {
        matches!(
            self,
            SeriesKind::ConfirmedCumulative
                | SeriesKind::DeathsCumulative
                | SeriesKind::RecoveredCumulative
        )
    }

    /// Kind obtained by differencing a cumulative kind.
    pub fn daily(&self) -> Option<SeriesKind> {
        match self {
            SeriesKind::ConfirmedCumulative => Some(SeriesKind::NewCases),
            SeriesKind::DeathsCumulative => Some(SeriesKind::DailyDeaths),
            SeriesKind::RecoveredCumulative => Some(SeriesKind::DailyRecovered),
            _ => None,
        }
    }

    /// Kind obtained by accumulating a daily kind.
    pub fn cumulative(&self) -> Option<SeriesKind> {
        match self {
            SeriesKind::NewCases => Some(SeriesKind::ConfirmedCumulative),
            SeriesKind::DailyDeaths => Some(SeriesKind::DeathsCumulative),
            SeriesKind::DailyRecovered => Some(SeriesKind::RecoveredCumulative),
            _ => None,
        }
    }
}

impl std::fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per consecutive calendar day, starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    start: NaiveDate,
    values: Vec<f64>,
    kind: SeriesKind,
}

/// Result of slicing a series to a date range.
#[derive(Debug, Clone, PartialEq)]
pub struct Windowed {
    pub series: DailySeries,
    /// Set when the requested range reached outside the series and was cut.
    pub clipped: bool,
}

/// A day on which a cumulative series went down, or a daily series went negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub date: NaiveDate,
    pub value: f64,
}

pub(crate) fn offset(date: NaiveDate, days: usize) -> NaiveDate {
    date.checked_add_days(Days::new(days as u64))
        .expect("date within calendar range")
}

impl DailySeries {
    pub fn new(start: NaiveDate, values: Vec<f64>, kind: SeriesKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Series(format!("empty {kind} series")));
        }
        Ok(Self {
            start,
            values,
            kind,
        })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last date covered (inclusive).
    pub fn end(&self) -> NaiveDate {
        offset(self.start, self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SeriesKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.values.len()).map(move |i| offset(self.start, i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates().zip(self.values.iter().copied())
    }

    fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let days = (date - self.start).num_days();
        (days >= 0 && (days as usize) < self.values.len()).then_some(days as usize)
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.index_of(date).map(|i| self.values[i])
    }

    /// Days where a cumulative series decreased (value = the drop, negative),
    /// or where a daily series is negative.
    pub fn anomalies(&self) -> Vec<Anomaly> {
        if self.kind.is_cumulative() {
            self.values
                .windows(2)
                .enumerate()
                .filter(|(_, w)| w[1] < w[0])
                .map(|(i, w)| Anomaly {
                    date: offset(self.start, i + 1),
                    value: w[1] - w[0],
                })
                .collect()
        } else if self.kind == SeriesKind::ActiveCases {
            Vec::new()
        } else {
            self.iter()
                .filter(|(_, v)| *v < 0.0)
                .map(|(date, value)| Anomaly { date, value })
                .collect()
        }
    }

    /// Day-over-day differences of a cumulative series. The result starts one
    /// day after the input; negative values (source corrections) are kept.
    pub fn difference(&self) -> Result<DailySeries> {
        let kind = self
            .kind
            .daily()
            .ok_or_else(|| Error::Series(format!("cannot difference a {} series", self.kind)))?;
        if self.values.len() < 2 {
            return Err(Error::Series(
                "differencing needs at least two values".into(),
            ));
        }
        DailySeries::new(
            offset(self.start, 1),
            self.values.windows(2).map(|w| w[1] - w[0]).collect(),
            kind,
        )
    }

    /// Inverse of [`difference`](Self::difference): running sum anchored at
    /// `anchor`, the cumulative value on the day before `start`.
    pub fn accumulate(&self, anchor: f64) -> Result<DailySeries> {
        let kind = self
            .kind
            .cumulative()
            .ok_or_else(|| Error::Series(format!("cannot accumulate a {} series", self.kind)))?;
        let start = self
            .start
            .pred_opt()
            .ok_or_else(|| Error::Series("start date out of range".into()))?;
        let mut values = Vec::with_capacity(self.values.len() + 1);
        values.push(anchor);
        let mut acc = anchor;
        for v in &self.values {
            acc += v;
            values.push(acc);
        }
        DailySeries::new(start, values, kind)
    }

    /// Inclusive date slice. Edges outside the series are clipped and flagged.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> Result<Windowed> {
        if from > to {
            return Err(Error::Series(format!(
                "window start {from} is after end {to}"
            )));
        }
        if to < self.start || from > self.end() {
            return Err(Error::Series(format!(
                "window {from}..={to} does not intersect series {}..={}",
                self.start,
                self.end()
            )));
        }
        let lo = from.max(self.start);
        let hi = to.min(self.end());
        let i = self.index_of(lo).expect("clipped start inside series");
        let j = self.index_of(hi).expect("clipped end inside series");
        Ok(Windowed {
            series: DailySeries {
                start: lo,
                values: self.values[i..=j].to_vec(),
                kind: self.kind,
            },
            clipped: lo != from || hi != to,
        })
    }

    /// Trailing moving average over `window_days` values. Only full windows
    /// are emitted, so the first `window_days - 1` days are dropped.
    pub fn moving_average(&self, window_days: usize) -> Result<DailySeries> {
        if window_days == 0 {
            return Err(Error::Series(
                "moving-average window must be at least 1".into(),
            ));
        }
        if self.values.len() < window_days {
            return Err(Error::Series(format!(
                "series of {} days is shorter than the {window_days}-day window",
                self.values.len()
            )));
        }
        let width = window_days as f64;
        let values = self
            .values
            .windows(window_days)
            .map(|w| w.iter().sum::<f64>() / width)
            .collect();
        DailySeries::new(offset(self.start, window_days - 1), values, self.kind)
    }

    /// Samples with time measured in days from `start`.
    pub fn to_trajectory(&self) -> Result<Trajectory> {
        Trajectory::from_samples(
            (0..self.values.len()).map(|i| i as f64).collect(),
            self.values.clone(),
        )
    }
}

impl ActiveCurve for DailySeries {
    fn initial_active(&self) -> f64 {
        self.values[0]
    }
    fn terminal_active(&self) -> f64 {
        *self.values.last().unwrap()
    }
    fn span(&self) -> f64 {
        (self.values.len() - 1) as f64
    }
    /// Day-indexed trapezoid rule with half-weight endpoints.
    fn active_auc(&self) -> f64 {
        let times: Vec<f64> = (0..self.values.len()).map(|i| i as f64).collect();
        trapezoid(&times, &self.values)
    }
}

/// Restricts two series to their common dates.
pub fn align(a: &DailySeries, b: &DailySeries) -> Result<(DailySeries, DailySeries)> {
    let lo = a.start.max(b.start);
    let hi = a.end().min(b.end());
    if lo > hi {
        return Err(Error::NoOverlap {
            a_start: a.start,
            a_end: a.end(),
            b_start: b.start,
            b_end: b.end(),
        });
    }
    Ok((a.window(lo, hi)?.series, b.window(lo, hi)?.series))
}

/// Active cases as confirmed minus deaths minus recovered, over the dates all
/// three series share.
pub fn active_cases(
    confirmed: &DailySeries,
    deaths: &DailySeries,
    recovered: &DailySeries,
) -> Result<DailySeries> {
    for (s, want) in [
        (confirmed, SeriesKind::ConfirmedCumulative),
        (deaths, SeriesKind::DeathsCumulative),
        (recovered, SeriesKind::RecoveredCumulative),
    ] {
        if s.kind != want {
            return Err(Error::Series(format!("expected {want}, got {}", s.kind)));
        }
    }
    let (c, d) = align(confirmed, deaths)?;
    let (c, r) = align(&c, recovered)?;
    let (d, _) = align(&d, &r)?;
    let values = c
        .values
        .iter()
        .zip(&d.values)
        .zip(&r.values)
        .map(|((c, d), r)| c - d - r)
        .collect();
    DailySeries::new(c.start, values, SeriesKind::ActiveCases)
}
