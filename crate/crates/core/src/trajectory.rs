//! Closed-form active-case curves under piecewise-constant `R_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{positive, PhaseSchedule};

/// Exact time and active-case value at a phase switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub time: f64,
    pub active: f64,
}

/// Sampled active-case curve.
///
/// Model trajectories also carry their phase knots (start, every switch and
/// the end) together with the exponential rate of each segment, so integrals
/// over them can be taken exactly. Empirical trajectories carry samples only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    times: Vec<f64>,
    active: Vec<f64>,
    phase_boundaries: Vec<Knot>,
    rates: Vec<f64>,
}

impl Trajectory {
    /// Wraps measured samples. Times must be strictly increasing and values
    /// finite and non-negative.
    pub fn from_samples(times: Vec<f64>, active: Vec<f64>) -> Result<Self> {
        if times.len() != active.len() {
            return Err(Error::Series(format!(
                "{} times but {} values",
                times.len(),
                active.len()
            )));
        }
        if times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Series(
                "sample times must be strictly increasing".into(),
            ));
        }
        if active.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Series(
                "active cases must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            times,
            active,
            phase_boundaries: Vec::new(),
            rates: Vec::new(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn active(&self) -> &[f64] {
        &self.active
    }

    /// Knots at the start, at each phase switch and at the end. Empty for
    /// empirical trajectories.
    pub fn phase_boundaries(&self) -> &[Knot] {
        &self.phase_boundaries
    }

    /// Net exponential rate `gamma (R_t - 1)` of each segment between knots.
    pub fn growth_rates(&self) -> &[f64] {
        &self.rates
    }

    /// True when the trajectory carries a closed-form description.
    pub fn is_exact(&self) -> bool {
        !self.rates.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.phase_boundaries
            .first()
            .map(|k| k.time)
            .unwrap_or_else(|| self.times[0])
    }

    pub fn end_time(&self) -> f64 {
        self.phase_boundaries
            .last()
            .map(|k| k.time)
            .unwrap_or_else(|| *self.times.last().unwrap())
    }

    pub fn initial(&self) -> f64 {
        self.phase_boundaries
            .first()
            .map(|k| k.active)
            .unwrap_or_else(|| self.active[0])
    }

    pub fn terminal(&self) -> f64 {
        self.phase_boundaries
            .last()
            .map(|k| k.active)
            .unwrap_or_else(|| *self.active.last().unwrap())
    }

    /// Largest active-case value and when it occurs. For model trajectories
    /// the maximum of a piecewise exponential sits on a knot.
    pub fn peak(&self) -> Knot {
        let candidates: Box<dyn Iterator<Item = Knot>> = if self.is_exact() {
            Box::new(self.phase_boundaries.iter().copied())
        } else {
            Box::new(
                self.times
                    .iter()
                    .zip(&self.active)
                    .map(|(&time, &active)| Knot { time, active }),
            )
        };
        candidates
            .fold(None, |best: Option<Knot>, k| match best {
                Some(b) if b.active >= k.active => Some(b),
                _ => Some(k),
            })
            .expect("trajectory is never empty")
    }

    /// Smallest active-case value and when it occurs.
    pub fn trough(&self) -> Knot {
        let candidates: Vec<Knot> = if self.is_exact() {
            self.phase_boundaries.clone()
        } else {
            self.times
                .iter()
                .zip(&self.active)
                .map(|(&time, &active)| Knot { time, active })
                .collect()
        };
        candidates
            .into_iter()
            .fold(None, |best: Option<Knot>, k| match best {
                Some(b) if b.active <= k.active => Some(b),
                _ => Some(k),
            })
            .expect("trajectory is never empty")
    }

    /// Closed-form value at time `t` (clamped to the trajectory span).
    /// Returns `None` for empirical trajectories.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if !self.is_exact() {
            return None;
        }
        let knots = &self.phase_boundaries;
        let last = knots.len() - 1;
        if t >= knots[last].time {
            return Some(knots[last].active);
        }
        if t <= knots[0].time {
            return Some(knots[0].active);
        }
        let seg = knots[1..].partition_point(|k| k.time <= t);
        let k = knots[seg];
        Some(k.active * (self.rates[seg] * (t - k.time)).exp())
    }
}

/// Solves `dI/dt = (R_t - 1) gamma I` in closed form over `schedule`.
///
/// Knot values come from the exact solution `I(t) = I0 exp(gamma (S_R(t) - t))`
/// with `S_R` the running integral of `R_t`. Samples are taken every
/// `sample_step` days from zero, and the end of the schedule is always
/// included.
pub fn solve_trajectory(
    i0: f64,
    schedule: &PhaseSchedule,
    gamma: f64,
    sample_step: f64,
) -> Result<Trajectory> {
    positive("i0", i0)?;
    positive("gamma", gamma)?;
    positive("sample_step", sample_step)?;

    let phases = schedule.phases();
    let mut knots = Vec::with_capacity(phases.len() + 1);
    let mut rates = Vec::with_capacity(phases.len());
    knots.push(Knot {
        time: 0.0,
        active: i0,
    });
    let mut elapsed = 0.0;
    let mut rt_area = 0.0;
    for phase in phases {
        rates.push(gamma * (phase.rt - 1.0));
        elapsed += phase.duration;
        rt_area += phase.rt * phase.duration;
        knots.push(Knot {
            time: elapsed,
            active: i0 * (gamma * (rt_area - elapsed)).exp(),
        });
    }

    let mut traj = Trajectory {
        times: Vec::new(),
        active: Vec::new(),
        phase_boundaries: knots,
        rates,
    };

    let end = elapsed;
    let whole_steps = (end / sample_step * (1.0 + 1e-12)).floor() as usize;
    let mut times: Vec<f64> = (0..=whole_steps).map(|k| k as f64 * sample_step).collect();
    if let Some(&last) = times.last() {
        if last > end || (end - last) <= 1e-9 * end {
            times.pop();
        }
    }
    times.push(end);
    traj.active = times
        .iter()
        .map(|&t| traj.value_at(t).expect("exact trajectory"))
        .collect();
    traj.times = times;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Phase, ScheduleKind, StrategyParams};

    #[test]
    fn constant_rt_one_is_flat() {
        let s = PhaseSchedule::constant(1.0, 40.0).unwrap();
        let t = solve_trajectory(123.0, &s, 0.2, 1.0).unwrap();
        assert_eq!(t.times().len(), 41);
        assert!(t.active().iter().all(|&v| v == 123.0));
    }

    #[test]
    fn single_growth_phase() {
        let s = PhaseSchedule::constant(2.0, 10.0).unwrap();
        let t = solve_trajectory(1000.0, &s, 0.1, 1.0).unwrap();
        let expected = 1000.0 * 1f64.exp();
        assert!((t.terminal() - expected).abs() / expected < 1e-14);
        assert!((t.active()[10] - 2718.281828459045).abs() < 1e-9);
    }

    #[test]
    fn reported_cycle_peak_and_return() {
        let p = StrategyParams::from_rates(0.0410, 0.0553, 21_000.0, 54.0, None).unwrap();
        let oc = PhaseSchedule::open_close(&p).unwrap();
        let t = solve_trajectory(p.i0, &oc, p.gamma, 1.0).unwrap();
        let peak = t.peak();
        assert!((peak.active - 75_000.0).abs() < 500.0, "{}", peak.active);
        assert!((peak.time - 31.0).abs() < 0.1);
        assert!((t.terminal() - 21_000.0).abs() / 21_000.0 < 1e-12);
        assert_eq!(*t.times().last().unwrap(), 54.0);
    }

    #[test]
    fn end_is_sampled_even_off_grid() {
        let s = PhaseSchedule::custom(vec![Phase::new(1.3, 2.5), Phase::new(0.6, 1.2)]).unwrap();
        let t = solve_trajectory(10.0, &s, 0.1, 1.0).unwrap();
        assert_eq!(t.times(), &[0.0, 1.0, 2.0, 3.0, 3.7]);
        assert_eq!(t.phase_boundaries().len(), 3);
        assert_eq!(t.active()[4], t.terminal());
    }

    #[test]
    fn value_at_is_continuous_across_switches() {
        let s = PhaseSchedule::new(
            ScheduleKind::OpenClose,
            vec![Phase::new(1.8, 10.0), Phase::new(0.3, 16.0)],
        )
        .unwrap();
        let t = solve_trajectory(50.0, &s, 0.1, 0.5).unwrap();
        let knot = t.phase_boundaries()[1];
        let left = t.value_at(knot.time - 1e-9).unwrap();
        let right = t.value_at(knot.time + 1e-9).unwrap();
        assert!((left - knot.active).abs() / knot.active < 1e-8);
        assert!((right - knot.active).abs() / knot.active < 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = PhaseSchedule::constant(1.0, 1.0).unwrap();
        assert!(solve_trajectory(0.0, &s, 0.1, 1.0).is_err());
        assert!(solve_trajectory(1.0, &s, 0.0, 1.0).is_err());
        assert!(solve_trajectory(1.0, &s, 0.1, 0.0).is_err());
    }

    #[test]
    fn empirical_samples_validated() {
        assert!(Trajectory::from_samples(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Trajectory::from_samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Trajectory::from_samples(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        let t = Trajectory::from_samples(vec![0.0, 1.0, 2.0], vec![1.0, 5.0, 2.0]).unwrap();
        assert!(!t.is_exact());
        assert_eq!(
            t.peak(),
            Knot {
                time: 1.0,
                active: 5.0
            }
        );
        assert_eq!(t.value_at(0.5), None);
    }
}
