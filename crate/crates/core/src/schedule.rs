//! Two-level reproduction-number schedules and the average principle.
//!
//! A control cycle is a sequence of phases, each holding the reproduction
//! number `R_t` constant for some number of days. With the single-compartment
//! balance `dI/dt = (R_t - 1) * gamma * I`, the cycle returns the active cases
//! to their starting value exactly when the time-average of `R_t` is one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Removal rate used when only net growth/decay rates are known.
pub const DEFAULT_REMOVAL_RATE: f64 = 1.0 / 14.0;

/// Parameters of a periodic open/close control strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    /// Removal rate, 1/day.
    pub gamma: f64,
    /// Reproduction number while open (> 1).
    pub r_open: f64,
    /// Reproduction number while closed (in `[0, 1)`).
    pub r_close: f64,
    /// Active cases at the start of the cycle.
    pub i0: f64,
    /// Cycle length in days.
    pub period: f64,
}

impl StrategyParams {
    pub fn new(gamma: f64, r_open: f64, r_close: f64, i0: f64, period: f64) -> Result<Self> {
        let params = Self {
            gamma,
            r_open,
            r_close,
            i0,
            period,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from the net growth rate `alpha = gamma (r_open - 1)`
    /// and the net decay rate `beta = gamma (1 - r_close)`.
    ///
    /// `gamma` defaults to [`DEFAULT_REMOVAL_RATE`]; it must be at least `beta`
    /// so that the closed-phase reproduction number stays non-negative.
    pub fn from_rates(
        alpha: f64,
        beta: f64,
        i0: f64,
        period: f64,
        gamma: Option<f64>,
    ) -> Result<Self> {
        let gamma = gamma.unwrap_or(DEFAULT_REMOVAL_RATE);
        positive("gamma", gamma)?;
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        if beta > gamma {
            return Err(Error::param(
                "beta",
                beta,
                "decay rate exceeds the removal rate (r_close would be negative)",
            ));
        }
        Self::new(gamma, 1.0 + alpha / gamma, 1.0 - beta / gamma, i0, period)
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        positive("i0", self.i0)?;
        positive("period", self.period)?;
        if !self.r_open.is_finite() || self.r_open <= 1.0 {
            return Err(Error::param(
                "r_open",
                self.r_open,
                "must exceed 1; no periodic schedule exists otherwise",
            ));
        }
        if !self.r_close.is_finite() || self.r_close < 0.0 {
            return Err(Error::param(
                "r_close",
                self.r_close,
                "must be non-negative",
            ));
        }
        if self.r_close >= 1.0 {
            return Err(Error::param(
                "r_close",
                self.r_close,
                "must be below 1; no periodic schedule exists otherwise",
            ));
        }
        Ok(())
    }

    /// Net exponential growth rate of the open phase.
    pub fn alpha(&self) -> f64 {
        self.gamma * (self.r_open - 1.0)
    }

    /// Net exponential decay rate of the close phase.
    pub fn beta(&self) -> f64 {
        self.gamma * (1.0 - self.r_close)
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, value, "must be positive and finite"))
    }
}

/// Durations of the open and close phases of a periodic cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLengths {
    pub t_open: f64,
    pub t_close: f64,
}

impl PhaseLengths {
    /// Phase split in terms of net rates: `T_o = beta T / (alpha + beta)`.
    pub fn from_rates(alpha: f64, beta: f64, period: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        positive("period", period)?;
        let t_open = beta * period / (alpha + beta);
        let t_close = alpha * period / (alpha + beta);
        Ok(Self { t_open, t_close })
    }

    pub fn period(&self) -> f64 {
        self.t_open + self.t_close
    }
}

/// Splits the period so that the cycle satisfies the average principle,
/// `r_open t_open + r_close t_close = period`.
pub fn phase_lengths(params: &StrategyParams) -> Result<PhaseLengths> {
    params.validate()?;
    let span = params.r_open - params.r_close;
    Ok(PhaseLengths {
        t_open: (1.0 - params.r_close) / span * params.period,
        t_close: (params.r_open - 1.0) / span * params.period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    #[serde(rename = "OC")]
    OpenClose,
    #[serde(rename = "CO")]
    CloseOpen,
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl ScheduleKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ScheduleKind::OpenClose => "OC",
            ScheduleKind::CloseOpen => "CO",
            ScheduleKind::Custom => "CUSTOM",
        }
    }
}

/// A stretch of time with constant reproduction number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub rt: f64,
    pub duration: f64,
}

impl Phase {
    pub fn new(rt: f64, duration: f64) -> Self {
        Self { rt, duration }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    phases: Vec<Phase>,
    kind: ScheduleKind,
}

impl PhaseSchedule {
    pub fn new(kind: ScheduleKind, phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no phases".into()));
        }
        for (i, p) in phases.iter().enumerate() {
            if !(p.duration.is_finite() && p.duration > 0.0) {
                return Err(Error::InvalidSchedule(format!(
                    "phase {i} has non-positive duration {}",
                    p.duration
                )));
            }
            if !(p.rt.is_finite() && p.rt >= 0.0) {
                return Err(Error::InvalidSchedule(format!(
                    "phase {i} has invalid reproduction number {}",
                    p.rt
                )));
            }
        }
        let two_level = |first_open: bool| {
            phases.len() == 2
                && (phases[0].rt > 1.0) == first_open
                && (phases[1].rt > 1.0) != first_open
                && phases.iter().all(|p| p.rt != 1.0)
        };
        match kind {
            ScheduleKind::OpenClose if !two_level(true) => Err(Error::InvalidSchedule(
                "OC needs an open phase (rt > 1) followed by a close phase (rt < 1)".into(),
            )),
            ScheduleKind::CloseOpen if !two_level(false) => Err(Error::InvalidSchedule(
                "CO needs a close phase (rt < 1) followed by an open phase (rt > 1)".into(),
            )),
            _ => Ok(Self { phases, kind }),
        }
    }

    pub fn custom(phases: Vec<Phase>) -> Result<Self> {
        Self::new(ScheduleKind::Custom, phases)
    }

    /// A single phase holding `rt` for `duration` days.
    pub fn constant(rt: f64, duration: f64) -> Result<Self> {
        Self::custom(vec![Phase::new(rt, duration)])
    }

    pub fn open_close(params: &StrategyParams) -> Result<Self> {
        let lengths = phase_lengths(params)?;
        Self::new(
            ScheduleKind::OpenClose,
            vec![
                Phase::new(params.r_open, lengths.t_open),
                Phase::new(params.r_close, lengths.t_close),
            ],
        )
    }

    pub fn close_open(params: &StrategyParams) -> Result<Self> {
        Self::open_close(params)?.swapped()
    }

    /// Appends `next` after `self`; the result is a custom schedule.
    pub fn then(&self, next: &PhaseSchedule) -> PhaseSchedule {
        let mut phases = self.phases.clone();
        phases.extend_from_slice(&next.phases);
        PhaseSchedule {
            phases,
            kind: ScheduleKind::Custom,
        }
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn period(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }

    /// Integral of `R_t` over the whole schedule.
    pub fn rt_area(&self) -> f64 {
        self.phases.iter().map(|p| p.rt * p.duration).sum()
    }

    /// Time-averaged reproduction number.
    pub fn average_rt(&self) -> f64 {
        self.rt_area() / self.period()
    }

    /// Exchanges the two phases of a two-phase cycle (OC <-> CO).
    pub fn swapped(&self) -> Result<PhaseSchedule> {
        if self.phases.len() != 2 {
            return Err(Error::InvalidSchedule(format!(
                "swap needs exactly two phases, got {}",
                self.phases.len()
            )));
        }
        let kind = match self.kind {
            ScheduleKind::OpenClose => ScheduleKind::CloseOpen,
            ScheduleKind::CloseOpen => ScheduleKind::OpenClose,
            ScheduleKind::Custom => ScheduleKind::Custom,
        };
        Ok(PhaseSchedule {
            phases: vec![self.phases[1], self.phases[0]],
            kind,
        })
    }
}

/// Time-averaged reproduction number over the schedule.
pub fn average_rt(schedule: &PhaseSchedule) -> f64 {
    schedule.average_rt()
}

/// Reverses a two-phase cycle. Durations and reproduction numbers are kept,
/// only their order changes.
pub fn swap_cycle(schedule: &PhaseSchedule) -> Result<PhaseSchedule> {
    schedule.swapped()
}
