use std::hint::black_box;

use chrono::NaiveDate;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pericycle::{
    cost_co, cost_oc, fit_cfr, solve_trajectory, DailySeries, DelayKernel, PhaseLengths,
    PhaseSchedule, SeriesKind, StrategyParams,
};

fn schedule(c: &mut Criterion) {
    c.bench_function("phase_lengths", |b| {
        b.iter(|| PhaseLengths::from_rates(black_box(0.0410), black_box(0.0553), black_box(54.0)))
    });
    c.bench_function("cost_pair", |b| {
        b.iter(|| {
            let oc = cost_oc(black_box(0.0410), 0.0553, 21_000.0, 54.0).unwrap();
            let co = cost_co(black_box(0.0410), 0.0553, 21_000.0, 54.0).unwrap();
            oc.auc_active / co.auc_active
        })
    });
}

fn trajectory(c: &mut Criterion) {
    let p = StrategyParams::from_rates(0.0410, 0.0553, 21_000.0, 54.0, None).unwrap();
    let oc = PhaseSchedule::open_close(&p).unwrap();
    let both = oc.then(&oc.swapped().unwrap());
    let mut group = c.benchmark_group("solve_trajectory");
    for step in [1.0, 0.1, 0.01] {
        group.bench_with_input(BenchmarkId::from_parameter(step), &step, |b, &step| {
            b.iter(|| solve_trajectory(p.i0, &both, p.gamma, step).unwrap())
        });
    }
    group.finish();
}

fn cfr(c: &mut Criterion) {
    let day0 = NaiveDate::from_ymd_opt(2020, 6, 1).unwrap();
    let cases: Vec<f64> = (0..212)
        .map(|t| {
            let t = t as f64;
            200.0
                + 6000.0 * (-((t - 110.0) / 20.0).powi(2)).exp()
                + 3000.0 * (-((t - 190.0) / 14.0).powi(2)).exp()
        })
        .collect();
    let deaths = DelayKernel::new(3, 0.943, 0.000485)
        .unwrap()
        .predict(&cases);
    let cases = DailySeries::new(day0, cases, SeriesKind::NewCases).unwrap();
    let deaths = DailySeries::new(day0, deaths, SeriesKind::DailyDeaths).unwrap();
    c.bench_function("fit_cfr/212d_k0-15", |b| {
        b.iter(|| fit_cfr(&cases, &deaths, 0..=15).unwrap())
    });
}

criterion_group!(benches, schedule, trajectory, cfr);
criterion_main!(benches);
