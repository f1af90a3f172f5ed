//! Life and healthcare-system cost of a control cycle, measured as the area
//! under the active-case curve.
//!
//! Under periodic control the total number of new cases over one cycle is
//! `gamma` times the AUC of the active cases, so the AUC is used directly as
//! the cost. Closed forms are provided for the open-close (OC), close-open
//! (CO) and constant strategies; [`auc_numeric`] handles any trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{positive, PhaseLengths};
use crate::trajectory::Trajectory;

/// Relative tolerance used when cross-checking `C_oc / C_co` against
/// `exp(alpha T_o)`.
pub const RATIO_IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostStrategy {
    #[serde(rename = "OC")]
    OpenClose,
    #[serde(rename = "CO")]
    CloseOpen,
    #[serde(rename = "CONST")]
    Constant,
    #[serde(rename = "CUSTOM")]
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub strategy: CostStrategy,
    /// AUC of the active cases over one period, person-days.
    pub auc_active: f64,
    /// `gamma * auc_active`; only filled in once a removal rate is attached.
    pub total_new_cases: Option<f64>,
    pub i_max: f64,
    pub i0: f64,
    pub period: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `C_oc / C_co`, present on OC reports only.
    pub cost_ratio_vs_co: Option<f64>,
}

impl CostReport {
    /// Attaches the removal rate, filling in the total number of new cases
    /// over the (periodic) cycle.
    pub fn with_removal_rate(mut self, gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        self.total_new_cases = Some(gamma * self.auc_active);
        Ok(self)
    }
}

/// `rho = (1/alpha + 1/beta)^-1`. With the periodic phase split,
/// `alpha T_o = beta T_c = rho T`, which puts both closed forms in terms of
/// `y = rho T`: `C_oc = I0 T (e^y - 1)/y` and `C_co = I0 T (1 - e^-y)/y`.
pub fn cycle_rate(alpha: f64, beta: f64) -> f64 {
    alpha * beta / (alpha + beta)
}

fn check_cycle(alpha: f64, beta: f64, i0: f64, period: f64) -> Result<()> {
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    positive("i0", i0)?;
    positive("period", period)
}

/// `(e^x - 1) / x`, accurate near zero.
fn exprel(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Cost of the periodic OC strategy,
/// `C_oc = (1/beta + 1/alpha) (e^{alpha T_o} - 1) I0`.
pub fn cost_oc(alpha: f64, beta: f64, i0: f64, period: f64) -> Result<CostReport> {
    check_cycle(alpha, beta, i0, period)?;
    let y = cycle_rate(alpha, beta) * period;
    let auc = i0 * period * exprel(y);
    let co = i0 * period * exprel(-y);
    Ok(CostReport {
        strategy: CostStrategy::OpenClose,
        auc_active: auc,
        total_new_cases: None,
        i_max: i0 * y.exp(),
        i0,
        period,
        alpha: Some(alpha),
        beta: Some(beta),
        cost_ratio_vs_co: Some(auc / co),
    })
}

/// Cost of the periodic CO strategy,
/// `C_co = (1/beta + 1/alpha) (1 - e^{-alpha T_o}) I0`.
pub fn cost_co(alpha: f64, beta: f64, i0: f64, period: f64) -> Result<CostReport> {
    check_cycle(alpha, beta, i0, period)?;
    let y = cycle_rate(alpha, beta) * period;
    Ok(CostReport {
        strategy: CostStrategy::CloseOpen,
        auc_active: i0 * period * exprel(-y),
        total_new_cases: None,
        i_max: i0,
        i0,
        period,
        alpha: Some(alpha),
        beta: Some(beta),
        cost_ratio_vs_co: None,
    })
}

/// Cost of holding the active cases at `i0` for the whole period.
pub fn cost_const(i0: f64, period: f64) -> Result<CostReport> {
    positive("i0", i0)?;
    positive("period", period)?;
    Ok(CostReport {
        strategy: CostStrategy::Constant,
        auc_active: i0 * period,
        total_new_cases: None,
        i_max: i0,
        i0,
        period,
        alpha: None,
        beta: None,
        cost_ratio_vs_co: None,
    })
}

/// `C_oc / C_co`, cross-checked against the independently computed peak
/// growth `I_MAX / I0 = exp(alpha T_o)`.
pub fn cost_ratio(oc: &CostReport, co: &CostReport) -> Result<f64> {
    if oc.strategy != CostStrategy::OpenClose || co.strategy != CostStrategy::CloseOpen {
        return Err(Error::MismatchedReports(format!(
            "expected an OC and a CO report, got {:?} and {:?}",
            oc.strategy, co.strategy
        )));
    }
    if oc.alpha != co.alpha || oc.beta != co.beta || oc.i0 != co.i0 || oc.period != co.period {
        return Err(Error::MismatchedReports(
            "reports were computed from different parameters".into(),
        ));
    }
    let (alpha, beta) = match (oc.alpha, oc.beta) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::MismatchedReports(
                "reports carry no growth/decay rates".into(),
            ))
        }
    };
    let ratio = oc.auc_active / co.auc_active;
    let t_open = PhaseLengths::from_rates(alpha, beta, oc.period)?.t_open;
    let expected = (alpha * t_open).exp();
    if ((ratio - expected) / expected).abs() > RATIO_IDENTITY_TOLERANCE {
        return Err(Error::IdentityViolation { ratio, expected });
    }
    Ok(ratio)
}

/// Area under the active-case curve.
///
/// Exact trajectories are integrated segment by segment in closed form
/// (`(I_end - I_start) / rate`, or `I * duration` for a flat segment).
/// Empirical trajectories fall back to the trapezoid rule with half-weight
/// endpoints.
pub fn auc_numeric(traj: &Trajectory) -> f64 {
    if traj.is_exact() {
        traj.phase_boundaries()
            .windows(2)
            .zip(traj.growth_rates())
            .map(|(w, &rate)| {
                let duration = w[1].time - w[0].time;
                w[0].active * duration * exprel(rate * duration)
            })
            .sum()
    } else {
        trapezoid(traj.times(), traj.active())
    }
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Anything that describes active cases over a window `[0, T]`.
pub trait ActiveCurve {
    fn initial_active(&self) -> f64;
    fn terminal_active(&self) -> f64;
    fn span(&self) -> f64;
    fn active_auc(&self) -> f64;
}

impl ActiveCurve for Trajectory {
    fn initial_active(&self) -> f64 {
        self.initial()
    }
    fn terminal_active(&self) -> f64 {
        self.terminal()
    }
    fn span(&self) -> f64 {
        self.end_time() - self.start_time()
    }
    fn active_auc(&self) -> f64 {
        auc_numeric(self)
    }
}

/// Total new cases over the window of `curve`.
///
/// With `periodic` set the curve is taken to return to its initial value and
/// the result is `gamma * AUC_I`. Otherwise the zero-initial-condition
/// component `a(t) = I(t) - I0 e^{-gamma t}` is separated out and the result
/// is `gamma * AUC_a(0, T) + a(T)`.
pub fn new_cases_over_window<C: ActiveCurve + ?Sized>(
    curve: &C,
    gamma: f64,
    periodic: bool,
) -> Result<f64> {
    positive("gamma", gamma)?;
    let auc = curve.active_auc();
    if periodic {
        return Ok(gamma * auc);
    }
    let i0 = curve.initial_active();
    let span = curve.span();
    let free_decay_auc = i0 * span * exprel(-gamma * span);
    let forced_auc = auc - free_decay_auc;
    let forced_terminal = curve.terminal_active() - i0 * (-gamma * span).exp();
    Ok(gamma * forced_auc + forced_terminal)
}

/// Response of the balance `dI/dt = -gamma I + n(t)` to an inflow `n` held
/// constant over each step of length `dt`, solved exactly step by step.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResponse {
    dt: f64,
    /// Active cases at each step boundary (`inflow.len() + 1` values).
    active: Vec<f64>,
    /// Exact integral of the active cases over each step.
    step_auc: Vec<f64>,
    /// New cases entering during each step (`rate * dt`).
    step_inflow: Vec<f64>,
}

impl BalanceResponse {
    /// Feeds `inflow` (new-case rates, one per step) through the balance
    /// starting from `i0` active cases.
    pub fn simulate(i0: f64, gamma: f64, dt: f64, inflow: &[f64]) -> Result<Self> {
        positive("gamma", gamma)?;
        positive("dt", dt)?;
        if !(i0.is_finite() && i0 >= 0.0) {
            return Err(Error::param("i0", i0, "must be finite and non-negative"));
        }
        let decay = (-gamma * dt).exp();
        // (1 - e^{-gamma dt}) / gamma
        let kept = dt * exprel(-gamma * dt);
        let mut active = Vec::with_capacity(inflow.len() + 1);
        let mut step_auc = Vec::with_capacity(inflow.len());
        active.push(i0);
        let mut current = i0;
        for &n in inflow {
            step_auc.push(current * kept + n * (dt - kept) / gamma);
            current = current * decay + n * kept;
            active.push(current);
        }
        Ok(Self {
            dt,
            active,
            step_auc,
            step_inflow: inflow.iter().map(|n| n * dt).collect(),
        })
    }

    pub fn active(&self) -> &[f64] {
        &self.active
    }

    pub fn step_auc(&self) -> &[f64] {
        &self.step_auc
    }

    /// Total new cases fed in, `AUC_n(0, T)`.
    pub fn total_inflow(&self) -> f64 {
        self.step_inflow.iter().sum()
    }
}

impl ActiveCurve for BalanceResponse {
    fn initial_active(&self) -> f64 {
        self.active[0]
    }
    fn terminal_active(&self) -> f64 {
        *self.active.last().unwrap()
    }
    fn span(&self) -> f64 {
        self.dt * self.step_auc.len() as f64
    }
    fn active_auc(&self) -> f64 {
        self.step_auc.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{PhaseSchedule, StrategyParams};
    use crate::trajectory::solve_trajectory;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    const ALPHA: f64 = 0.0410;
    const BETA: f64 = 0.0553;

    #[test]
    fn reported_cycle_costs() {
        let oc = cost_oc(ALPHA, BETA, 21_000.0, 54.0).unwrap();
        let co = cost_co(ALPHA, BETA, 21_000.0, 54.0).unwrap();
        assert!((oc.i_max - 75_000.0).abs() < 500.0);
        assert!((oc.i_max / oc.i0 - 3.571).abs() < 0.01);
        assert!(rel(oc.auc_active, 2.29e6) < 0.01, "{}", oc.auc_active);
        assert!(rel(co.auc_active, 6.4e5) < 0.01, "{}", co.auc_active);
        assert!(co.auc_active < 21_000.0 * 54.0);
        let ratio = cost_ratio(&oc, &co).unwrap();
        assert!(rel(ratio, oc.i_max / oc.i0) < 1e-12);
        assert_eq!(oc.cost_ratio_vs_co, Some(ratio));
    }

    #[test]
    fn vanishing_growth_tends_to_constant_cost() {
        let oc = cost_oc(1e-12, 0.05, 100.0, 30.0).unwrap();
        let co = cost_co(1e-12, 0.05, 100.0, 30.0).unwrap();
        assert!(rel(oc.auc_active, 3000.0) < 1e-9);
        assert!(rel(co.auc_active, 3000.0) < 1e-9);
    }

    #[test]
    fn quadrupling_gives_ratio_four() {
        // alpha T_o = ln 4 with alpha = beta = 0.1 needs T = 20 ln 4
        let period = 20.0 * 4f64.ln();
        let oc = cost_oc(0.1, 0.1, 10.0, period).unwrap();
        let co = cost_co(0.1, 0.1, 10.0, period).unwrap();
        assert!(rel(cost_ratio(&oc, &co).unwrap(), 4.0) < 1e-12);
    }

    #[test]
    fn constant_cost() {
        assert_eq!(cost_const(21_000.0, 54.0).unwrap().auc_active, 1_134_000.0);
        assert_eq!(cost_const(1.0, 1.0).unwrap().auc_active, 1.0);
        assert_eq!(cost_const(100.0, 0.5).unwrap().auc_active, 50.0);
        assert!(cost_const(0.0, 1.0).is_err());
    }

    #[test]
    fn ratio_rejects_mismatched_reports() {
        let oc = cost_oc(ALPHA, BETA, 21_000.0, 54.0).unwrap();
        let co = cost_co(ALPHA, BETA, 21_000.0, 55.0).unwrap();
        assert!(matches!(
            cost_ratio(&oc, &co),
            Err(Error::MismatchedReports(_))
        ));
        assert!(cost_ratio(&co, &oc).is_err());
        let flat = cost_const(21_000.0, 54.0).unwrap();
        assert!(cost_ratio(&oc, &flat).is_err());
    }

    #[test]
    fn ratio_detects_corrupted_report() {
        let mut oc = cost_oc(ALPHA, BETA, 21_000.0, 54.0).unwrap();
        let co = cost_co(ALPHA, BETA, 21_000.0, 54.0).unwrap();
        oc.auc_active *= 1.001;
        assert!(matches!(
            cost_ratio(&oc, &co),
            Err(Error::IdentityViolation { .. })
        ));
    }

    #[test]
    fn exact_auc_matches_closed_forms() {
        let p = StrategyParams::from_rates(ALPHA, BETA, 21_000.0, 54.0, None).unwrap();
        let oc = PhaseSchedule::open_close(&p).unwrap();
        let co = PhaseSchedule::close_open(&p).unwrap();
        let t_oc = solve_trajectory(p.i0, &oc, p.gamma, 1.0).unwrap();
        let t_co = solve_trajectory(p.i0, &co, p.gamma, 1.0).unwrap();
        let c_oc = cost_oc(p.alpha(), p.beta(), p.i0, p.period).unwrap();
        let c_co = cost_co(p.alpha(), p.beta(), p.i0, p.period).unwrap();
        assert!(rel(auc_numeric(&t_oc), c_oc.auc_active) < 1e-10);
        assert!(rel(auc_numeric(&t_co), c_co.auc_active) < 1e-10);
    }

    #[test]
    fn single_decay_phase_auc() {
        let s = PhaseSchedule::constant(0.0, 10.0).unwrap();
        let t = solve_trajectory(100.0, &s, 0.1, 1.0).unwrap();
        let expected = 100.0 * (1.0 - (-1f64).exp()) / 0.1;
        assert!(rel(auc_numeric(&t), expected) < 1e-14);
        assert!((auc_numeric(&t) - 632.12).abs() < 0.01);
    }

    #[test]
    fn flat_curve_auc() {
        let s = PhaseSchedule::constant(1.0, 54.0).unwrap();
        let t = solve_trajectory(21_000.0, &s, 0.1, 1.0).unwrap();
        assert_eq!(auc_numeric(&t), 21_000.0 * 54.0);
        let e = Trajectory::from_samples(vec![0.0, 1.0, 2.0], vec![5.0, 5.0, 5.0]).unwrap();
        assert_eq!(auc_numeric(&e), 10.0);
    }

    #[test]
    fn periodic_new_cases_are_gamma_times_auc() {
        let p = StrategyParams::from_rates(ALPHA, BETA, 21_000.0, 54.0, Some(0.1)).unwrap();
        let t = solve_trajectory(p.i0, &PhaseSchedule::open_close(&p).unwrap(), 0.1, 1.0).unwrap();
        let c_oc = cost_oc(p.alpha(), p.beta(), p.i0, p.period).unwrap();
        let n = new_cases_over_window(&t, 0.1, true).unwrap();
        assert!(rel(n, 0.1 * c_oc.auc_active) < 1e-10);
        // the curve is periodic, so the general form agrees
        let general = new_cases_over_window(&t, 0.1, false).unwrap();
        assert!(rel(general, n) < 1e-10);
        let report = c_oc.with_removal_rate(0.1).unwrap();
        assert!(rel(report.total_new_cases.unwrap(), n) < 1e-10);
    }

    #[test]
    fn no_inflow_means_no_new_cases() {
        let r = BalanceResponse::simulate(500.0, 0.2, 1.0, &[0.0; 30]).unwrap();
        let n = new_cases_over_window(&r, 0.2, false).unwrap();
        assert!(n.abs() < 1e-9);
        assert_eq!(r.total_inflow(), 0.0);
    }

    #[test]
    fn impulse_mass_is_recovered() {
        let mut inflow = vec![0.0; 300];
        inflow[0] = 100.0;
        let r = BalanceResponse::simulate(0.0, 0.2, 1.0, &inflow).unwrap();
        assert_eq!(r.total_inflow(), 100.0);
        assert!(rel(0.2 * r.active_auc(), 100.0) < 1e-12);
    }
}
