use chrono::NaiveDate;
use pericycle::export::{read_csv, read_json, to_csv_string, to_json_string};
use pericycle::jhu::{format_jhu_date, parse_jhu_date, HEADER};
use pericycle::{active_cases, DailySeries, JhuTable, SeriesKind};
use proptest::prelude::*;

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 22).unwrap()
}

fn jhu_csv(rows: &[(&str, &str, Vec<u32>)], days: usize) -> String {
    let mut out = HEADER.join(",");
    for d in 0..days {
        out.push(',');
        out.push_str(&format_jhu_date(day0() + chrono::Days::new(d as u64)));
    }
    out.push('\n');
    for (province, country, values) in rows {
        let quote = |s: &str| {
            if s.contains(',') {
                format!("\"{s}\"")
            } else {
                s.to_string()
            }
        };
        out.push_str(&format!("{},{},31.0,35.0", quote(province), quote(country)));
        for v in values {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

proptest! {
    #[test]
    fn province_sum_commutes_with_parsing(
        days in 1usize..40,
        seeds in prop::collection::vec(prop::collection::vec(0u32..100_000, 40), 1..5),
    ) {
        let provinces = ["North", "South, Coast", "East", "West", "Isles"];
        let rows: Vec<(&str, &str, Vec<u32>)> = seeds
            .iter()
            .enumerate()
            .map(|(i, v)| (provinces[i], "Testland", v[..days].to_vec()))
            .chain(std::iter::once(("", "Elsewhere", vec![1; days])))
            .collect();
        let table = JhuTable::from_reader(jhu_csv(&rows, days).as_bytes()).unwrap();
        let summed = table.country_series("Testland", SeriesKind::ConfirmedCumulative).unwrap();
        let mut by_hand = vec![0.0; days];
        for (i, _) in seeds.iter().enumerate() {
            let s = table
                .province_series("Testland", provinces[i], SeriesKind::ConfirmedCumulative)
                .unwrap();
            for (acc, v) in by_hand.iter_mut().zip(s.values()) {
                *acc += v;
            }
        }
        prop_assert_eq!(summed.values(), &by_hand[..]);
        prop_assert_eq!(summed.start(), day0());
    }

    #[test]
    fn window_of_window_is_intersection(
        len in 1usize..200,
        a in (0i64..250, 0i64..250),
        b in (0i64..250, 0i64..250),
    ) {
        let s = DailySeries::new(day0(), (0..len).map(|i| i as f64).collect(), SeriesKind::NewCases).unwrap();
        let d = |k: i64| day0() + chrono::Duration::days(k - 20);
        let (a0, a1) = (a.0.min(a.1), a.0.max(a.1));
        let (b0, b1) = (b.0.min(b.1), b.0.max(b.1));
        let nested = s.window(d(a0), d(a1)).and_then(|w| w.series.window(d(b0), d(b1)));
        let direct = s.window(d(a0.max(b0)), d(a1.min(b1)));
        match (nested, direct) {
            (Ok(n), Ok(x)) => prop_assert_eq!(n.series, x.series),
            (Err(_), Err(_)) => {}
            (n, x) => prop_assert!(false, "nested {n:?} vs direct {x:?}"),
        }
    }

    #[test]
    fn difference_then_accumulate_round_trips(
        values in prop::collection::vec(-1e6f64..1e6, 2..300).prop_map(|v| {
            v.into_iter().map(|x| x.round()).collect::<Vec<f64>>()
        }),
    ) {
        let mut running = 0.0;
        let cumulative: Vec<f64> = values.iter().map(|v| { running += v.abs(); running }).collect();
        let s = DailySeries::new(day0(), cumulative.clone(), SeriesKind::ConfirmedCumulative).unwrap();
        let daily = s.difference().unwrap();
        prop_assert_eq!(daily.len(), s.len() - 1);
        let back = daily.accumulate(cumulative[0]).unwrap();
        prop_assert_eq!(back.values(), &cumulative[..]);
        prop_assert_eq!(back.kind(), SeriesKind::ConfirmedCumulative);
    }

    #[test]
    fn moving_average_length_and_constant_mean(len in 1usize..200, window in 1usize..20, c in -1e4f64..1e4) {
        let s = DailySeries::new(day0(), vec![c; len], SeriesKind::NewCases).unwrap();
        let ma = s.moving_average(window);
        if window > len {
            prop_assert!(ma.is_err());
        } else {
            let ma = ma.unwrap();
            prop_assert_eq!(ma.len(), len - window + 1);
            prop_assert_eq!(ma.start(), day0() + chrono::Duration::days(window as i64 - 1));
            for v in ma.values() {
                prop_assert!((v - c).abs() <= 1e-9 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn exports_round_trip(
        a in prop::collection::vec(-1e9f64..1e9, 1..60),
        b in prop::collection::vec(0.0f64..1.0, 1..60),
        offset in 0i64..30,
    ) {
        let s1 = DailySeries::new(day0(), a, SeriesKind::NewCases).unwrap();
        let s2 = DailySeries::new(day0() + chrono::Duration::days(offset), b, SeriesKind::DailyDeaths).unwrap();
        let from_csv = read_csv(to_csv_string(&[&s1, &s2]).as_bytes()).unwrap();
        let from_json = read_json(to_json_string(&[&s1, &s2]).as_bytes()).unwrap();
        prop_assert_eq!(&from_csv, &vec![s1.clone(), s2.clone()]);
        prop_assert_eq!(&from_json, &vec![s1, s2]);
    }

    #[test]
    fn jhu_dates_round_trip(days in 0u64..3000) {
        let d = day0() + chrono::Days::new(days);
        prop_assert_eq!(parse_jhu_date(&format_jhu_date(d)), Some(d));
    }
}

#[test]
fn active_cases_use_common_dates() {
    let c = DailySeries::new(
        day0(),
        vec![10.0, 20.0, 30.0, 40.0],
        SeriesKind::ConfirmedCumulative,
    )
    .unwrap();
    let d = DailySeries::new(
        day0() + chrono::Days::new(1),
        vec![1.0, 2.0, 3.0],
        SeriesKind::DeathsCumulative,
    )
    .unwrap();
    let r = DailySeries::new(day0(), vec![0.0, 5.0, 6.0], SeriesKind::RecoveredCumulative).unwrap();
    let a = active_cases(&c, &d, &r).unwrap();
    assert_eq!(a.start(), day0() + chrono::Days::new(1));
    assert_eq!(a.values(), &[14.0, 22.0]);
    assert_eq!(a.kind(), SeriesKind::ActiveCases);
}

#[test]
fn corrections_are_reported_not_repaired() {
    let text = jhu_csv(&[("", "Testland", vec![5, 9, 7, 7, 12])], 5);
    let table = JhuTable::from_reader(text.as_bytes()).unwrap();
    let s = table
        .country_series("Testland", SeriesKind::ConfirmedCumulative)
        .unwrap();
    let daily = s.difference().unwrap();
    assert_eq!(daily.values(), &[4.0, -2.0, 0.0, 5.0]);
    let report = pericycle::IngestReport::for_series(&s);
    assert_eq!(report.anomaly_count, 1);
    assert_eq!(report.anomalies[0].date, day0() + chrono::Days::new(2));
}

#[test]
fn unknown_country_lists_alternatives() {
    let text = jhu_csv(&[("", "Testland", vec![1, 2])], 2);
    let table = JhuTable::from_reader(text.as_bytes()).unwrap();
    let err = table
        .country_series("Nowhere", SeriesKind::ConfirmedCumulative)
        .unwrap_err();
    assert!(err.to_string().contains("Testland"), "{err}");
}
