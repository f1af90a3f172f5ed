use pericycle::{
    phase_lengths, solve_trajectory, swap_cycle, Phase, PhaseSchedule, StrategyParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Classical RK4 for `dI/dt = (rt - 1) gamma I`, restarted at every phase
/// boundary and every requested output time so the integrand is smooth on
/// each step. Steps never exceed `h`.
fn rk4_oracle(i0: f64, phases: &[(f64, f64)], gamma: f64, outputs: &[f64], h: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = Vec::new();
    let mut t = 0.0;
    for &(_, d) in phases {
        t += d;
        cuts.push(t);
    }
    let phase_ends = cuts.clone();
    cuts.extend_from_slice(outputs);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let rt_at = |t: f64| {
        let idx = phase_ends
            .partition_point(|&e| e <= t)
            .min(phases.len() - 1);
        phases[idx].0
    };

    let mut values = vec![(0.0, i0)];
    let (mut t, mut y) = (0.0f64, i0);
    for &stop in &cuts {
        let span = stop - t;
        if span <= 0.0 {
            continue;
        }
        let rate = gamma * (rt_at(t + 0.5 * span) - 1.0);
        let f = |y: f64| rate * y;
        let n = (span / h).ceil() as usize;
        let step = span / n as f64;
        for _ in 0..n {
            let k1 = f(y);
            let k2 = f(y + 0.5 * step * k1);
            let k3 = f(y + 0.5 * step * k2);
            let k4 = f(y + step * k3);
            y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = stop;
        values.push((t, y));
    }
    outputs
        .iter()
        .map(|&o| {
            values
                .iter()
                .find(|(t, _)| (t - o).abs() < 1e-9)
                .expect("output time was a cut")
                .1
        })
        .collect()
}

#[test]
fn closed_form_matches_rk4_on_random_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let phases: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..3.0), rng.random_range(0.5..40.0)))
            .collect();
        let gamma = rng.random_range(0.02..0.25);
        let i0 = rng.random_range(1.0..1e5);
        let schedule =
            PhaseSchedule::custom(phases.iter().map(|&(r, d)| Phase::new(r, d)).collect()).unwrap();
        let traj = solve_trajectory(i0, &schedule, gamma, 1.0).unwrap();
        let oracle = rk4_oracle(i0, &phases, gamma, traj.times(), 0.01);
        for (closed, rk) in traj.active().iter().zip(&oracle) {
            worst = worst.max(rel(*closed, *rk));
        }
    }
    assert!(worst <= 1e-6, "worst relative deviation {worst:e}");
}

#[test]
fn reported_cycle_pair() {
    let p = StrategyParams::from_rates(0.0410, 0.0553, 21_000.0, 54.0, None).unwrap();
    let oc = PhaseSchedule::open_close(&p).unwrap();
    let co = PhaseSchedule::close_open(&p).unwrap();
    let traj = solve_trajectory(p.i0, &oc.then(&co), p.gamma, 1.0).unwrap();
    let at = |t: f64| traj.value_at(t).unwrap();
    assert!((at(54.0) - 21_000.0).abs() <= 1.0);
    assert!((at(108.0) - 21_000.0).abs() <= 1.0);
    let peak = traj.peak();
    assert!((peak.time - 31.0).abs() < 0.1);
    assert!((peak.active - 75_000.0).abs() <= 500.0, "{}", peak.active);

    // CO alone bottoms out after the 23-day close phase
    let traj = solve_trajectory(p.i0, &co, p.gamma, 1.0).unwrap();
    let trough = traj.trough();
    let expected = 21_000.0 * (-0.0553f64 * trough.time).exp();
    assert!(rel(trough.active, expected) < 1e-12);
    assert!((trough.time - 23.0).abs() < 0.1);
    assert!((trough.active - 5_890.0).abs() < 50.0, "{}", trough.active);
}

#[test]
fn near_degenerate_open_rate_still_balances() {
    let p = StrategyParams::new(0.1, 1.0001, 0.5, 10.0, 54.0).unwrap();
    let l = phase_lengths(&p).unwrap();
    assert!(l.t_open > 53.98);
    let s = PhaseSchedule::open_close(&p).unwrap();
    assert!(rel(s.average_rt(), 1.0) < 1e-12);
}

fn valid_params() -> impl Strategy<Value = StrategyParams> {
    (
        0.01f64..0.5,
        1.0001f64..4.0,
        0.0f64..0.999,
        1.0f64..1e6,
        1.0f64..200.0,
    )
        .prop_map(|(gamma, r_open, r_close, i0, period)| {
            StrategyParams::new(gamma, r_open, r_close, i0, period).unwrap()
        })
}

proptest! {
    #[test]
    fn average_principle(p in valid_params()) {
        let l = phase_lengths(&p).unwrap();
        let lhs = p.r_open * l.t_open + p.r_close * l.t_close;
        prop_assert!(rel(lhs, p.period) <= 1e-12);
        prop_assert!(rel(l.t_open + l.t_close, p.period) <= 1e-12);
    }

    #[test]
    fn balanced_cycles_return_to_start(p in valid_params()) {
        for s in [PhaseSchedule::open_close(&p).unwrap(), PhaseSchedule::close_open(&p).unwrap()] {
            let traj = solve_trajectory(p.i0, &s, p.gamma, 1.0).unwrap();
            prop_assert!(rel(traj.terminal(), p.i0) <= 1e-12, "{} vs {}", traj.terminal(), p.i0);
        }
    }

    #[test]
    fn multi_phase_balanced_schedule_returns(
        rts in prop::collection::vec(0.0f64..3.0, 2..6),
        durations in prop::collection::vec(0.5f64..30.0, 6),
        gamma in 0.02f64..0.3,
    ) {
        // rescale the last phase so that the time-average of rt is exactly one
        let n = rts.len();
        let mut phases: Vec<Phase> = rts.iter().zip(&durations).map(|(&r, &d)| Phase::new(r, d)).collect();
        let head_excess: f64 = phases[..n - 1].iter().map(|p| (p.rt - 1.0) * p.duration).sum();
        let last = &mut phases[n - 1];
        prop_assume!((last.rt - 1.0).abs() > 0.05);
        let needed = -head_excess / (last.rt - 1.0);
        prop_assume!(needed > 0.1);
        last.duration = needed;
        let s = PhaseSchedule::custom(phases).unwrap();
        prop_assert!(rel(s.average_rt(), 1.0) <= 1e-12);
        let traj = solve_trajectory(7.0, &s, gamma, 0.5).unwrap();
        prop_assert!(rel(traj.terminal(), 7.0) <= 1e-12);
    }

    #[test]
    fn log_is_linear_within_phases(p in valid_params(), step in 0.05f64..1.0) {
        let s = PhaseSchedule::open_close(&p).unwrap();
        let traj = solve_trajectory(p.i0, &s, p.gamma, 1.0).unwrap();
        let knots = traj.phase_boundaries();
        for (w, &rate) in knots.windows(2).zip(traj.growth_rates()) {
            let n = ((w[1].time - w[0].time) / step).floor() as usize;
            prop_assume!(n >= 2);
            let logs: Vec<f64> = (0..=n)
                .map(|j| traj.value_at(w[0].time + j as f64 * step).unwrap().ln())
                .collect();
            for d in logs.windows(3) {
                let second = d[2] - 2.0 * d[1] + d[0];
                prop_assert!(second.abs() <= 1e-9, "second difference {second:e}");
            }
            let slope = (logs[n] - logs[0]) / (n as f64 * step);
            prop_assert!((slope - rate).abs() <= 1e-9 * (1.0 + rate.abs()));
        }
    }

    #[test]
    fn swap_preserves_phases(p in valid_params()) {
        let oc = PhaseSchedule::open_close(&p).unwrap();
        let co = swap_cycle(&oc).unwrap();
        prop_assert_eq!(oc.period(), co.period());
        let mut a: Vec<(u64, u64)> = oc.phases().iter().map(|p| (p.rt.to_bits(), p.duration.to_bits())).collect();
        let mut b: Vec<(u64, u64)> = co.phases().iter().map(|p| (p.rt.to_bits(), p.duration.to_bits())).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        prop_assert_eq!(swap_cycle(&co).unwrap(), oc);
    }
}
