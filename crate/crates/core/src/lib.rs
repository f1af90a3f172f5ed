//! Periodic open/close epidemic control.
//!
//! Piecewise-exponential dynamics driven by a reproduction-number schedule,
//! the active-case AUC as a cost, a delay-kernel CFR estimator and ingestion
//! of the JHU CSSE global time series.
//!
//! ```
//! use pericycle::{cost_co, cost_oc, cost_ratio};
//!
//! // alpha = 0.1, beta = 0.05, I0 = 1, T = 30 gives a 10-day open phase
//! let oc = cost_oc(0.1, 0.05, 1.0, 30.0).unwrap();
//! let co = cost_co(0.1, 0.05, 1.0, 30.0).unwrap();
//! let ratio = cost_ratio(&oc, &co).unwrap();
//! assert!((ratio - (0.1f64 * 10.0).exp()).abs() < 1e-9);
//! ```

pub mod cfr;
pub mod cost;
pub mod error;
pub mod export;
pub mod jhu;
pub mod schedule;
pub mod series;
pub mod trajectory;
pub mod validation;

pub use cfr::{cfr_from_params, fit as fit_cfr, predict_deaths, CfrModel, DelayKernel, DelayScore};
pub use cost::{
    auc_numeric, cost_co, cost_const, cost_oc, cost_ratio, new_cases_over_window, ActiveCurve,
    BalanceResponse, CostReport, CostStrategy,
};
pub use error::{Error, Result};
pub use export::Record;
pub use jhu::{parse_jhu_timeseries, IngestReport, JhuTable};
pub use schedule::{
    average_rt, phase_lengths, swap_cycle, Phase, PhaseLengths, PhaseSchedule, ScheduleKind,
    StrategyParams, DEFAULT_REMOVAL_RATE,
};
pub use series::{active_cases, align, DailySeries, SeriesKind};
pub use trajectory::{solve_trajectory, Trajectory};
pub use validation::{
    validate, CountryData, ReferenceCheck, Snapshot, Tolerance, ValidationConfig, ValidationReport,
};
