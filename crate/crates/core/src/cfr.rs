//! Case-fatality-rate estimation from daily cases and deaths.
//!
//! Daily deaths are modelled as a weighted sum of past daily new cases,
//! `d(t) = sum_i w(i) n(t - i)`, with a delayed geometric kernel
//! `w(i) = b a^(i - k)` for `i >= k` and zero before. The CFR is the kernel
//! mass `b / (1 - a)`.
//!
//! The kernel is evaluated through the state recursion
//! `s(t) = a s(t-1) + n(t-k)`, `d(t) = b s(t)`, with `s` at rest before the
//! first datum. Fitting is output-error least squares: for fixed `(k, a)` the
//! optimal `b` is linear least squares, `a` is found by a 50-point grid scan
//! followed by golden-section refinement, and `k` by exhaustive search.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{align, DailySeries, SeriesKind};

/// Fewest aligned points accepted by [`fit`].
pub const MIN_FIT_POINTS: usize = 60;
/// Points in the coarse scan over the decay `a`.
pub const GRID_POINTS: usize = 50;
/// Upper end of the search interval for `a`; the kernel diverges at 1.
pub const MAX_DECAY: f64 = 1.0 - 1e-6;
/// Relative SSE difference under which two delays count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

const GOLDEN_TOLERANCE: f64 = 1e-13;

/// `sum_i b a^i = b / (1 - a)`.
pub fn cfr_from_params(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::param(
            "a",
            a,
            "decay must be finite and non-negative",
        ));
    }
    if a >= 1.0 {
        return Err(Error::param(
            "a",
            a,
            "decay must be below 1, the kernel diverges",
        ));
    }
    if !b.is_finite() || b < 0.0 {
        return Err(Error::param(
            "b",
            b,
            "scale must be finite and non-negative",
        ));
    }
    Ok(b / (1.0 - a))
}

/// Delayed geometric kernel `w(i) = b a^(i-k)` for `i >= k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayKernel {
    pub delay: usize,
    pub decay: f64,
    pub scale: f64,
}

impl DelayKernel {
    pub fn new(delay: usize, decay: f64, scale: f64) -> Result<Self> {
        cfr_from_params(decay, scale)?;
        Ok(Self {
            delay,
            decay,
            scale,
        })
    }

    pub fn weight(&self, lag: usize) -> f64 {
        if lag < self.delay {
            0.0
        } else {
            self.scale * self.decay.powi((lag - self.delay) as i32)
        }
    }

    pub fn cfr(&self) -> f64 {
        self.scale / (1.0 - self.decay)
    }

    /// Predicted deaths, aligned with `new_cases`. The first `delay` values
    /// are zero (no case history). Shorter inputs give an empty prediction.
    pub fn predict(&self, new_cases: &[f64]) -> Vec<f64> {
        if new_cases.len() < self.delay {
            return Vec::new();
        }
        state(new_cases, self.delay, self.decay)
            .into_iter()
            .map(|s| self.scale * s)
            .collect()
    }
}

/// `s(t) = a s(t-1) + n(t-k)`, zero for `t < k`.
fn state(new_cases: &[f64], delay: usize, decay: f64) -> Vec<f64> {
    let mut s = vec![0.0; new_cases.len()];
    let mut acc = 0.0;
    for t in delay..new_cases.len() {
        acc = decay * acc + new_cases[t - delay];
        s[t] = acc;
    }
    s
}

/// `ds/da`: `u(t) = a u(t-1) + s(t-1)`.
fn state_sensitivity(s: &[f64], delay: usize, decay: f64) -> Vec<f64> {
    let mut u = vec![0.0; s.len()];
    for t in (delay + 1)..s.len() {
        u[t] = decay * u[t - 1] + s[t - 1];
    }
    u
}

/// Predicted deaths as a dated series; `None` when the case series is
/// shorter than the delay.
pub fn predict_deaths(kernel: &DelayKernel, new_cases: &DailySeries) -> Option<DailySeries> {
    let values = kernel.predict(new_cases.values());
    if values.is_empty() {
        return None;
    }
    DailySeries::new(new_cases.start(), values, SeriesKind::DailyDeaths).ok()
}

/// Best `(a, b)` for one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayScore {
    pub delay: usize,
    pub decay: f64,
    pub scale: f64,
    pub sse: f64,
    /// False when the coarse scan over `a` found more than one local minimum.
    pub unimodal_on_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfrModel {
    pub delay_k: usize,
    pub decay_a: f64,
    pub scale_b: f64,
    pub cfr: f64,
    /// Percent coefficients of variation; `None` when the linearized
    /// covariance is unavailable.
    pub cv_a: Option<f64>,
    pub cv_b: Option<f64>,
    pub stderr_a: Option<f64>,
    pub stderr_b: Option<f64>,
    pub sse: f64,
    pub points: usize,
    pub fitted_deaths: DailySeries,
    /// Per-delay results, in increasing delay order.
    pub delay_scan: Vec<DelayScore>,
}

impl CfrModel {
    pub fn kernel(&self) -> DelayKernel {
        DelayKernel {
            delay: self.delay_k,
            decay: self.decay_a,
            scale: self.scale_b,
        }
    }

    pub fn predict_deaths(&self, new_cases: &DailySeries) -> Option<DailySeries> {
        predict_deaths(&self.kernel(), new_cases)
    }
}

struct Profile<'a> {
    cases: &'a [f64],
    deaths: &'a [f64],
    delay: usize,
}

impl Profile<'_> {
    /// Optimal non-negative `b` and the resulting SSE for a given `a`.
    fn eval(&self, decay: f64) -> (f64, f64) {
        let s = state(self.cases, self.delay, decay);
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let ds: f64 = s.iter().zip(self.deaths).map(|(s, d)| s * d).sum();
        let scale = if ss > 0.0 { (ds / ss).max(0.0) } else { 0.0 };
        let sse = s
            .iter()
            .zip(self.deaths)
            .map(|(s, d)| {
                let r = d - scale * s;
                r * r
            })
            .sum();
        (scale, sse)
    }

    fn best(&self) -> DelayScore {
        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|i| MAX_DECAY * i as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let scores: Vec<f64> = grid.iter().map(|&a| self.eval(a).1).collect();
        let mut best_i = 0;
        for (i, &sse) in scores.iter().enumerate() {
            if sse < scores[best_i] {
                best_i = i;
            }
        }
        let local_minima = (0..scores.len())
            .filter(|&i| {
                let left = i == 0 || scores[i] < scores[i - 1];
                let right = i + 1 == scores.len() || scores[i] <= scores[i + 1];
                left && right
            })
            .count();

        let mut lo = grid[best_i.saturating_sub(1)];
        let mut hi = grid[(best_i + 1).min(grid.len() - 1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.eval(x1).1;
        let mut f2 = self.eval(x2).1;
        while hi - lo > GOLDEN_TOLERANCE {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.eval(x1).1;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.eval(x2).1;
            }
        }
        let refined = 0.5 * (lo + hi);
        let (mut decay, (mut scale, mut sse)) = (refined, self.eval(refined));
        let (grid_scale, grid_sse) = self.eval(grid[best_i]);
        if grid_sse <= sse {
            decay = grid[best_i];
            scale = grid_scale;
            sse = grid_sse;
        }
        DelayScore {
            delay: self.delay,
            decay,
            scale,
            sse,
            unimodal_on_grid: local_minima <= 1,
        }
    }
}

/// Linearized standard errors of `(a, b)`: residual variance times the
/// inverse Gram matrix of the prediction Jacobian at the optimum.
fn standard_errors(cases: &[f64], score: &DelayScore) -> (Option<f64>, Option<f64>) {
    let n = cases.len();
    if n <= 2 {
        return (None, None);
    }
    let s = state(cases, score.delay, score.decay);
    let u = state_sensitivity(&s, score.delay, score.decay);
    // columns: d/da = b u, d/db = s
    let (mut g_aa, mut g_ab, mut g_bb) = (0.0, 0.0, 0.0);
    for (&s, &u) in s.iter().zip(&u) {
        let ja = score.scale * u;
        g_aa += ja * ja;
        g_ab += ja * s;
        g_bb += s * s;
    }
    let det = g_aa * g_bb - g_ab * g_ab;
    if !(det.is_finite() && det > 1e-12 * g_aa * g_bb) {
        return (None, None);
    }
    let variance = score.sse / (n - 2) as f64;
    let se_a = (variance * g_bb / det).sqrt();
    let se_b = (variance * g_aa / det).sqrt();
    (Some(se_a), Some(se_b))
}

fn percent_cv(stderr: Option<f64>, estimate: f64) -> Option<f64> {
    stderr
        .filter(|_| estimate != 0.0)
        .map(|se| 100.0 * se / estimate.abs())
}

/// Fits the delayed geometric kernel to date-aligned daily new cases and
/// deaths, trying every delay in `delays` and keeping the one with the
/// smallest sum of squares (smallest delay on ties).
pub fn fit(
    new_cases: &DailySeries,
    deaths: &DailySeries,
    delays: RangeInclusive<usize>,
) -> Result<CfrModel> {
    let (cases, deaths) = align(new_cases, deaths)?;
    if cases.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} aligned days, at least {MIN_FIT_POINTS} needed",
            cases.len()
        )));
    }
    if delays.is_empty() {
        return Err(Error::Fit("empty delay range".into()));
    }
    if *delays.end() >= cases.len() {
        return Err(Error::Fit(format!(
            "delay {} does not fit in {} days",
            delays.end(),
            cases.len()
        )));
    }
    if cases.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Fit("new-case series is identically zero".into()));
    }
    if cases
        .values()
        .iter()
        .chain(deaths.values())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Fit("series contain non-finite values".into()));
    }

    let scan: Vec<DelayScore> = delays
        .into_par_iter()
        .map(|delay| {
            Profile {
                cases: cases.values(),
                deaths: deaths.values(),
                delay,
            }
            .best()
        })
        .collect();

    let mut best = scan[0];
    for score in &scan[1..] {
        let margin = TIE_TOLERANCE * best.sse.max(score.sse);
        if score.sse < best.sse - margin {
            best = *score;
        }
    }

    let (stderr_a, stderr_b) = standard_errors(cases.values(), &best);
    let kernel = DelayKernel::new(best.delay, best.decay, best.scale)?;
    let fitted = DailySeries::new(
        cases.start(),
        kernel.predict(cases.values()),
        SeriesKind::DailyDeaths,
    )?;
    Ok(CfrModel {
        delay_k: best.delay,
        decay_a: best.decay,
        scale_b: best.scale,
        cfr: kernel.cfr(),
        cv_a: percent_cv(stderr_a, best.decay),
        cv_b: percent_cv(stderr_b, best.scale),
        stderr_a,
        stderr_b,
        sse: best.sse,
        points: cases.len(),
        fitted_deaths: fitted,
        delay_scan: scan,
    })
}

/// Daily counts from a cumulative series, smoothed by a trailing moving
/// average of `window_days`.
pub fn smoothed_daily(cumulative: &DailySeries, window_days: usize) -> Result<DailySeries> {
    cumulative.difference()?.moving_average(window_days)
}
