use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use pericycle::export;
use pericycle::validation::{
    israel_cfr_checks, israel_validation_checks, sha256_hex, ReferenceCheck, CHECKSUM_MANIFEST,
    REFERENCE_CFR,
};
use pericycle::{
    cost_co, cost_const, cost_oc, cost_ratio, jhu, phase_lengths, solve_trajectory, validate,
    CfrModel, DailySeries, IngestReport, PhaseLengths, PhaseSchedule, SeriesKind, Snapshot,
    StrategyParams, ValidationConfig, ValidationReport, DEFAULT_REMOVAL_RATE,
};
use serde::Serialize;

use crate::args::{
    DataArgs, FetchArgs, FitArgs, Format, IngestArgs, KernelArgs, Order, OutputArgs, ParamArgs,
    ScheduleArgs, SimulateArgs, ValidateArgs,
};
use crate::config::FileConfig;
use crate::format::{key_values, sig3, table};
use crate::InputError;

pub const DEFAULT_ALPHA: f64 = 0.0410;
pub const DEFAULT_BETA: f64 = 0.0553;
pub const DEFAULT_I0: f64 = 21_000.0;
pub const DEFAULT_PERIOD: f64 = 54.0;
pub const DEFAULT_FIT_FROM: (i32, u32, u32) = (2020, 6, 1);
pub const DEFAULT_FIT_TO: (i32, u32, u32) = (2020, 12, 29);
pub const DEFAULT_FETCH_URL: &str = "https://raw.githubusercontent.com/CSSEGISandData/COVID-19/master/csse_covid_19_data/csse_covid_19_time_series";

/// Rendered command output and whether a tolerance check failed.
pub struct Outcome {
    pub body: String,
    pub out: Option<PathBuf>,
    pub tolerance_failure: bool,
}

fn render<T: Serialize>(
    output: &OutputArgs,
    human: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
    json: &T,
) -> Result<Outcome> {
    let body = match output.format {
        None => human(),
        Some(Format::Csv) => csv(),
        Some(Format::Json) => {
            let mut s = serde_json::to_string_pretty(json)?;
            s.push('\n');
            s
        }
    };
    Ok(Outcome {
        body,
        out: output.out.clone(),
        tolerance_failure: false,
    })
}

fn ymd((y, m, d): (i32, u32, u32)) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid constant date")
}

pub fn resolve_params(p: &ParamArgs) -> Result<StrategyParams> {
    let i0 = p.i0.unwrap_or(DEFAULT_I0);
    let period = p.period.unwrap_or(DEFAULT_PERIOD);
    let by_rates = p.alpha.is_some() || p.beta.is_some();
    let by_numbers = p.r_open.is_some() || p.r_close.is_some();
    let params = match (by_rates, by_numbers) {
        (true, true) => {
            return Err(InputError(
                "give either --alpha/--beta or --r-open/--r-close, not both".into(),
            )
            .into())
        }
        (false, true) => {
            let (Some(r_open), Some(r_close)) = (p.r_open, p.r_close) else {
                return Err(InputError("--r-open and --r-close go together".into()).into());
            };
            StrategyParams::new(
                p.gamma.unwrap_or(DEFAULT_REMOVAL_RATE),
                r_open,
                r_close,
                i0,
                period,
            )?
        }
        _ => StrategyParams::from_rates(
            p.alpha.unwrap_or(DEFAULT_ALPHA),
            p.beta.unwrap_or(DEFAULT_BETA),
            i0,
            period,
            p.gamma,
        )?,
    };
    Ok(params)
}

#[derive(Serialize)]
struct ParamsOut {
    gamma: f64,
    r_open: f64,
    r_close: f64,
    alpha: f64,
    beta: f64,
    i0: f64,
    period: f64,
}

impl From<&StrategyParams> for ParamsOut {
    fn from(p: &StrategyParams) -> Self {
        Self {
            gamma: p.gamma,
            r_open: p.r_open,
            r_close: p.r_close,
            alpha: p.alpha(),
            beta: p.beta(),
            i0: p.i0,
            period: p.period,
        }
    }
}

#[derive(Serialize)]
struct ScheduleOut {
    params: ParamsOut,
    t_open: f64,
    t_close: f64,
    average_rt: f64,
    phases: Vec<pericycle::Phase>,
}

pub fn schedule(cfg: &FileConfig, args: &ScheduleArgs) -> Result<Outcome> {
    let p = resolve_params(&cfg.params(&args.params))?;
    let PhaseLengths { t_open, t_close } = phase_lengths(&p)?;
    let s = PhaseSchedule::open_close(&p)?;
    let out = ScheduleOut {
        params: (&p).into(),
        t_open,
        t_close,
        average_rt: s.average_rt(),
        phases: s.phases().to_vec(),
    };
    render(
        &cfg.output(&args.output),
        || {
            let rows = vec![
                vec![
                    "open".into(),
                    format!("{:.4}", p.r_open),
                    format!("{t_open:.2}"),
                ],
                vec![
                    "close".into(),
                    format!("{:.4}", p.r_close),
                    format!("{t_close:.2}"),
                ],
            ];
            let mut s = table(&["phase", "R_t", "days"], &rows);
            let _ = writeln!(
                s,
                "average R_t = {:.6} over {} days (gamma = {:.5}/day)",
                out.average_rt, p.period, p.gamma
            );
            s
        },
        || {
            format!(
                "phase,rt,duration\nopen,{},{}\nclose,{},{}\n",
                p.r_open, t_open, p.r_close, t_close
            )
        },
        &out,
    )
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    active: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    order: &'static str,
    params: ParamsOut,
    phases: Vec<pericycle::Phase>,
    knots: Vec<pericycle::trajectory::Knot>,
    peak: pericycle::trajectory::Knot,
    trough: pericycle::trajectory::Knot,
    terminal: f64,
    samples: Vec<Sample>,
}

pub fn simulate(cfg: &FileConfig, args: &SimulateArgs) -> Result<Outcome> {
    let p = resolve_params(&cfg.params(&args.params))?;
    let order = args.order.or(cfg.order).unwrap_or(Order::OcThenCo);
    let step = args.step.or(cfg.step).unwrap_or(1.0);
    let oc = PhaseSchedule::open_close(&p)?;
    let schedule = match order {
        Order::Oc => oc,
        Order::Co => oc.swapped()?,
        Order::OcThenCo => oc.then(&oc.swapped()?),
    };
    let traj = solve_trajectory(p.i0, &schedule, p.gamma, step)?;
    let out = SimulateOut {
        order: order.label(),
        params: (&p).into(),
        phases: schedule.phases().to_vec(),
        knots: traj.phase_boundaries().to_vec(),
        peak: traj.peak(),
        trough: traj.trough(),
        terminal: traj.terminal(),
        samples: traj
            .times()
            .iter()
            .zip(traj.active())
            .map(|(&t, &active)| Sample { t, active })
            .collect(),
    };
    render(
        &cfg.output(&args.output),
        || {
            let mut s = format!(
                "{} cycle, I0 = {}, period {} days\npeak {} at day {:.2}, trough {} at day {:.2}, end {}\n\n",
                out.order,
                sig3(p.i0),
                p.period,
                sig3(out.peak.active),
                out.peak.time,
                sig3(out.trough.active),
                out.trough.time,
                sig3(out.terminal),
            );
            let rows: Vec<Vec<String>> = out
                .samples
                .iter()
                .map(|x| vec![format!("{}", x.t), format!("{:.1}", x.active)])
                .collect();
            s.push_str(&table(&["day", "active"], &rows));
            s
        },
        || {
            let mut s = String::from("t,active\n");
            for x in &out.samples {
                let _ = writeln!(s, "{},{}", x.t, x.active);
            }
            s
        },
        &out,
    )
}

#[derive(Serialize)]
struct CostsOut {
    params: ParamsOut,
    t_open: f64,
    t_close: f64,
    c_oc: f64,
    c_co: f64,
    c_const: f64,
    ratio: f64,
    i_max: f64,
    i_max_over_i0: f64,
    new_cases_oc: f64,
    new_cases_co: f64,
    new_cases_const: f64,
}

pub fn compare_costs(cfg: &FileConfig, args: &ScheduleArgs) -> Result<Outcome> {
    let p = resolve_params(&cfg.params(&args.params))?;
    let lengths = phase_lengths(&p)?;
    let (alpha, beta) = (p.alpha(), p.beta());
    let oc = cost_oc(alpha, beta, p.i0, p.period)?.with_removal_rate(p.gamma)?;
    let co = cost_co(alpha, beta, p.i0, p.period)?.with_removal_rate(p.gamma)?;
    let flat = cost_const(p.i0, p.period)?.with_removal_rate(p.gamma)?;
    let ratio = cost_ratio(&oc, &co)?;
    let out = CostsOut {
        params: (&p).into(),
        t_open: lengths.t_open,
        t_close: lengths.t_close,
        c_oc: oc.auc_active,
        c_co: co.auc_active,
        c_const: flat.auc_active,
        ratio,
        i_max: oc.i_max,
        i_max_over_i0: oc.i_max / p.i0,
        new_cases_oc: oc.total_new_cases.unwrap_or_default(),
        new_cases_co: co.total_new_cases.unwrap_or_default(),
        new_cases_const: flat.total_new_cases.unwrap_or_default(),
    };
    render(
        &cfg.output(&args.output),
        || {
            let rows = vec![
                vec![
                    "OC".into(),
                    sig3(out.c_oc),
                    sig3(out.new_cases_oc),
                    sig3(out.i_max),
                ],
                vec![
                    "CO".into(),
                    sig3(out.c_co),
                    sig3(out.new_cases_co),
                    sig3(p.i0),
                ],
                vec![
                    "CONST".into(),
                    sig3(out.c_const),
                    sig3(out.new_cases_const),
                    sig3(p.i0),
                ],
            ];
            let mut s = table(
                &["strategy", "cost (person-days)", "new cases", "I_max"],
                &rows,
            );
            let _ = writeln!(
                s,
                "C_oc / C_co = {}   I_max / I0 = {}   (T_o = {:.2}, T_c = {:.2} days)",
                sig3(out.ratio),
                sig3(out.i_max_over_i0),
                out.t_open,
                out.t_close
            );
            s
        },
        || {
            key_values(&[
                ("t_open", out.t_open.to_string()),
                ("t_close", out.t_close.to_string()),
                ("c_oc", out.c_oc.to_string()),
                ("c_co", out.c_co.to_string()),
                ("c_const", out.c_const.to_string()),
                ("ratio", out.ratio.to_string()),
                ("i_max", out.i_max.to_string()),
                ("i_max_over_i0", out.i_max_over_i0.to_string()),
                ("new_cases_oc", out.new_cases_oc.to_string()),
                ("new_cases_co", out.new_cases_co.to_string()),
                ("new_cases_const", out.new_cases_const.to_string()),
            ])
        },
        &out,
    )
}

pub fn data_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("JHU_SNAPSHOT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/jhu"))
}

fn load_country(data: &DataArgs) -> Result<(Snapshot, String, pericycle::CountryData)> {
    let dir = data_dir(data.data_dir.clone());
    let snapshot = Snapshot::load(&dir)?;
    let country = data.country.clone().unwrap_or_else(|| "Israel".into());
    let series = snapshot.country(&country)?;
    Ok((snapshot, country, series))
}

#[derive(Serialize)]
struct FitOut<'a> {
    country: &'a str,
    from: NaiveDate,
    to: NaiveDate,
    smoothing_days: usize,
    k_min: usize,
    k_max: usize,
    checksums: &'a [pericycle::validation::FileChecksum],
    model: &'a CfrModel,
}

pub fn fit_cfr(cfg: &FileConfig, args: &FitArgs) -> Result<Outcome> {
    let data = cfg.data(&args.data);
    let KernelArgs {
        k_min,
        k_max,
        smoothing,
    } = cfg.kernel(&args.kernel);
    let (k_min, k_max, smoothing) = (
        k_min.unwrap_or(0),
        k_max.unwrap_or(15),
        smoothing.unwrap_or(7),
    );
    if k_min > k_max {
        return Err(InputError(format!("--k-min {k_min} exceeds --k-max {k_max}")).into());
    }
    let from = data.from.unwrap_or(ymd(DEFAULT_FIT_FROM));
    let to = data.to.unwrap_or(ymd(DEFAULT_FIT_TO));
    let (snapshot, country, series) = load_country(&data)?;
    let model = series.fit_cfr(from, to, k_min..=k_max, smoothing)?;
    let out = FitOut {
        country: &country,
        from,
        to,
        smoothing_days: smoothing,
        k_min,
        k_max,
        checksums: &snapshot.checksums,
        model: &model,
    };
    let pct = |cv: Option<f64>| cv.map_or("n/a".to_string(), |c| format!("{c:.2}%"));
    render(
        &cfg.output(&args.output),
        || {
            let mut s = format!(
                "{country}, {from} to {to}, {smoothing}-day trailing average, {} points\n\
                 k = {}   a = {:.6} (CV {})   b = {:.6e} (CV {})\n\
                 CFR = b / (1 - a) = {:.6}   SSE = {}\n\n",
                model.points,
                model.delay_k,
                model.decay_a,
                pct(model.cv_a),
                model.scale_b,
                pct(model.cv_b),
                model.cfr,
                sig3(model.sse),
            );
            let rows: Vec<Vec<String>> = model
                .delay_scan
                .iter()
                .map(|d| {
                    vec![
                        d.delay.to_string(),
                        format!("{:.6}", d.decay),
                        format!("{:.6e}", d.scale),
                        format!("{:.6}", d.scale / (1.0 - d.decay)),
                        sig3(d.sse),
                        if d.delay == model.delay_k {
                            "*".into()
                        } else {
                            String::new()
                        },
                    ]
                })
                .collect();
            s.push_str(&table(&["k", "a", "b", "cfr", "sse", ""], &rows));
            s
        },
        || {
            let mut s = String::from("k,a,b,cfr,sse,unimodal_on_grid,selected\n");
            for d in &model.delay_scan {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    d.delay,
                    d.decay,
                    d.scale,
                    d.scale / (1.0 - d.decay),
                    d.sse,
                    d.unimodal_on_grid,
                    d.delay == model.delay_k
                );
            }
            s
        },
        &out,
    )
}

pub fn ingest(cfg: &FileConfig, args: &IngestArgs) -> Result<Outcome> {
    let data = cfg.data(&args.data);
    let (_, country, series) = load_country(&data)?;
    let kinds: Vec<SeriesKind> = {
        let names = if args.kinds.is_empty() {
            cfg.kinds.clone().unwrap_or_default()
        } else {
            args.kinds.clone()
        };
        if names.is_empty() {
            SeriesKind::ALL.to_vec()
        } else {
            names
                .iter()
                .map(|n| {
                    SeriesKind::from_name(n.trim()).ok_or_else(|| {
                        let valid: Vec<&str> = SeriesKind::ALL.iter().map(|k| k.name()).collect();
                        InputError(format!(
                            "unknown kind `{n}`; expected one of {}",
                            valid.join(", ")
                        ))
                    })
                })
                .collect::<Result<_, _>>()?
        }
    };
    let smoothing = args.smoothing.or(cfg.smoothing);
    let mut out: Vec<DailySeries> = Vec::with_capacity(kinds.len());
    let mut reports = Vec::new();
    for kind in kinds {
        let raw = match kind {
            SeriesKind::ConfirmedCumulative => series.confirmed.clone(),
            SeriesKind::DeathsCumulative => series.deaths.clone(),
            SeriesKind::RecoveredCumulative => series.recovered.clone(),
            SeriesKind::NewCases => series.confirmed.difference()?,
            SeriesKind::DailyDeaths => series.deaths.difference()?,
            SeriesKind::DailyRecovered => series.recovered.difference()?,
            SeriesKind::ActiveCases => series.active()?,
        };
        reports.push(IngestReport::for_series(&raw));
        let smoothed = match smoothing {
            Some(n) if !kind.is_cumulative() && kind != SeriesKind::ActiveCases => {
                raw.moving_average(n)?
            }
            _ => raw,
        };
        let windowed = match (data.from, data.to) {
            (None, None) => smoothed,
            (from, to) => {
                let from = from.unwrap_or(smoothed.start());
                let to = to.unwrap_or(smoothed.end());
                smoothed.window(from, to)?.series
            }
        };
        out.push(windowed);
    }
    let refs: Vec<&DailySeries> = out.iter().collect();
    let report_text = || {
        let mut s = format!("{country}\n");
        for r in &reports {
            let dates: Vec<String> = r
                .anomalies
                .iter()
                .take(5)
                .map(|a| a.date.to_string())
                .collect();
            let more = if r.anomaly_count > 5 { ", ..." } else { "" };
            let _ = writeln!(
                s,
                "  {:<22} {}..{} ({} days), {} anomalies{}",
                r.kind.name(),
                r.start,
                r.end,
                r.days,
                r.anomaly_count,
                if dates.is_empty() {
                    String::new()
                } else {
                    format!(": {}{more}", dates.join(", "))
                }
            );
        }
        s
    };
    let output = cfg.output(&args.output);
    if output.format.is_some() {
        eprint!("{}", report_text());
    }
    let records = export::records(&refs);
    render(
        &output,
        report_text,
        || export::to_csv_string(&refs),
        &records,
    )
}

#[derive(Serialize)]
struct ValidateOut<'a> {
    report: &'a ValidationReport,
    checksums: &'a [pericycle::validation::FileChecksum],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<ReferenceCheck>,
}

pub fn validate_cmd(cfg: &FileConfig, args: &ValidateArgs) -> Result<Outcome> {
    let data = cfg.data(&args.data);
    let kernel = cfg.kernel(&args.kernel);
    let defaults = ValidationConfig::default();
    let reference_cfr = args.reference_cfr || cfg.reference_cfr.unwrap_or(false);
    let check = args.check || cfg.check.unwrap_or(false);
    let config = ValidationConfig {
        country: data.country.clone().unwrap_or(defaults.country),
        cycle_start: args
            .cycle_start
            .or(cfg.cycle_start)
            .unwrap_or(defaults.cycle_start),
        cycle_days: args
            .cycle_days
            .or(cfg.cycle_days)
            .unwrap_or(defaults.cycle_days),
        cfr_from: data.from.unwrap_or(defaults.cfr_from),
        cfr_to: data.to.unwrap_or(defaults.cfr_to),
        k_min: kernel.k_min.unwrap_or(defaults.k_min),
        k_max: kernel.k_max.unwrap_or(defaults.k_max),
        smoothing_days: kernel.smoothing.unwrap_or(defaults.smoothing_days),
        cfr_override: reference_cfr.then_some(REFERENCE_CFR),
    };
    let (snapshot, _, series) = load_country(&data)?;
    let report = validate(&series, &config)?;
    let mut checks = Vec::new();
    if check {
        checks = israel_validation_checks(&report);
        if config.cfr_override.is_none() {
            let model = series.fit_cfr(
                config.cfr_from,
                config.cfr_to,
                config.k_min..=config.k_max,
                config.smoothing_days,
            )?;
            checks.extend(israel_cfr_checks(&model));
        }
    }
    let failed = checks.iter().any(|c| !c.pass);
    let out = ValidateOut {
        report: &report,
        checksums: &snapshot.checksums,
        checks,
    };
    let r = &report;
    let mut outcome = render(
        &cfg.output(&args.output),
        || {
            let mut s = format!(
                "{}: OC {} to {}, CO {} to {}\n",
                r.country, r.oc_window.start, r.oc_window.end, r.co_window.start, r.co_window.end
            );
            let rows = vec![
                vec!["cases".into(), sig3(r.oc_cases), sig3(r.co_cases)],
                vec![
                    "deaths (est.)".into(),
                    sig3(r.oc_deaths_est),
                    sig3(r.co_deaths_est),
                ],
            ];
            s.push_str(&table(&["", "OC", "CO"], &rows));
            let _ = writeln!(s, "CFR used: {} ({})", sig3(r.cfr_used), r.cfr_source);
            let _ = writeln!(
                s,
                "active: {:.0} on {}, peak {:.0} on {}, trough {:.0} on {}, {:.0} on {}",
                r.active_start.value,
                r.active_start.date,
                r.active_peak.value,
                r.active_peak.date,
                r.active_trough.value,
                r.active_trough.date,
                r.active_end.value,
                r.active_end.date
            );
            let _ = writeln!(
                s,
                "death ratio {} vs predicted I_max/I0 {}",
                sig3(r.death_ratio),
                sig3(r.predicted_ratio_from_model)
            );
            for c in &out.checks {
                let _ = writeln!(
                    s,
                    "{} {}: {} (expected {}, {:?})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.expected,
                    c.tolerance
                );
            }
            s
        },
        || {
            let mut rows = vec![
                ("oc_start", r.oc_window.start.to_string()),
                ("oc_end", r.oc_window.end.to_string()),
                ("co_start", r.co_window.start.to_string()),
                ("co_end", r.co_window.end.to_string()),
                ("oc_cases", r.oc_cases.to_string()),
                ("co_cases", r.co_cases.to_string()),
                ("cfr_used", r.cfr_used.to_string()),
                ("oc_deaths_est", r.oc_deaths_est.to_string()),
                ("co_deaths_est", r.co_deaths_est.to_string()),
                ("death_ratio", r.death_ratio.to_string()),
                (
                    "predicted_ratio_from_model",
                    r.predicted_ratio_from_model.to_string(),
                ),
                ("active_start", r.active_start.value.to_string()),
                ("active_peak", r.active_peak.value.to_string()),
                ("active_trough", r.active_trough.value.to_string()),
                ("active_end", r.active_end.value.to_string()),
            ];
            let names: Vec<String> = out
                .checks
                .iter()
                .map(|c| format!("check.{}", c.name))
                .collect();
            for (c, name) in out.checks.iter().zip(&names) {
                rows.push((
                    name.as_str(),
                    if c.pass { "pass" } else { "fail" }.to_string(),
                ));
            }
            key_values(&rows)
        },
        &out,
    )?;
    outcome.tolerance_failure = failed;
    Ok(outcome)
}

pub fn fetch(cfg: &FileConfig, args: &FetchArgs) -> Result<Outcome> {
    let dir = args
        .data_dir
        .clone()
        .or_else(|| cfg.data_dir.clone())
        .unwrap_or_else(|| PathBuf::from("data/jhu-live"));
    let base = args
        .base_url
        .clone()
        .or_else(|| cfg.base_url.clone())
        .unwrap_or_else(|| DEFAULT_FETCH_URL.to_string());
    eprintln!(
        "warning: fetching live data; JHU revises past values, so results are not reproducible \
         unless the files and their {CHECKSUM_MANIFEST} are pinned"
    );
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = String::new();
    for name in [jhu::CONFIRMED_FILE, jhu::DEATHS_FILE, jhu::RECOVERED_FILE] {
        let url = format!("{}/{name}", base.trim_end_matches('/'));
        let bytes = ureq::get(&url)
            .call()
            .with_context(|| format!("GET {url}"))?
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_vec()
            .with_context(|| format!("reading {url}"))?;
        jhu::JhuTable::from_reader(bytes.as_slice()).with_context(|| format!("parsing {url}"))?;
        std::fs::write(dir.join(name), &bytes)?;
        let _ = writeln!(manifest, "{}  {name}", sha256_hex(&bytes));
    }
    std::fs::write(dir.join(CHECKSUM_MANIFEST), &manifest)?;
    Ok(Outcome {
        body: manifest,
        out: None,
        tolerance_failure: false,
    })
}
