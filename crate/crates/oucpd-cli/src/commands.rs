//! Subcommand implementations.

use std::path::{Path, PathBuf};

use oucpd::sim::presets::{self, PresetCase};
use oucpd::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    AutoAlgorithm, BasisChoice, DetectArgs, McCountArgs, McRatesArgs, MethodChoice, PenaltyChoice,
    PlotArgs, RateMethodChoice, SigmaSpec, SimulateArgs,
};
use crate::error::{CliError, Result};
use crate::ingest::ingest_csv;
use crate::output::{
    DetectionResult, ResultMeta, build_result, write_count_csv, write_json, write_rate_csv,
    write_series_csv,
};
use crate::plot;

fn scenario_from(
    case: PresetCase,
    m: usize,
    fractions: Option<Vec<f64>>,
    horizon: f64,
    delta_t: Option<f64>,
    sigma: f64,
    x0: Option<f64>,
) -> Result<RegimeScenario> {
    let delta_t = delta_t.unwrap_or(horizon / 1000.0);
    let mut scenario = presets::scenario(case, m, horizon, sigma, delta_t)?;
    if let Some(fr) = fractions {
        if fr.len() != m {
            return Err(CliError::Config(format!(
                "--fractions lists {} values but --m is {m}",
                fr.len()
            )));
        }
        scenario.change_fractions = fr;
    }
    scenario.x0 = x0;
    scenario.validate()?;
    Ok(scenario)
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let case = PresetCase::from_id(args.case)?;
    let scenario = scenario_from(
        case,
        args.m,
        args.fractions.clone(),
        args.horizon,
        args.dt,
        args.sigma,
        args.x0,
    )?;
    for regime in &scenario.regimes {
        if let Some(warning) = regime.stationarity_warning() {
            eprintln!("warning: {warning}");
        }
    }
    let basis = presets::basis(case, scenario.delta_t)?;
    let series = simulate(&scenario, &basis, args.seed)?;
    write_series_csv(&args.out, &series)?;
    let meta = json!({
        "seed": args.seed,
        "generator": "chacha8",
        "case": args.case,
        "scenario": scenario,
    });
    write_json(&sidecar_path(&args.out, "meta.json"), &meta)?;
    eprintln!(
        "wrote {} ({} points, dt = {})",
        args.out.display(),
        series.values().len(),
        series.delta_t()
    );
    Ok(())
}

fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".");
    os.push(suffix);
    PathBuf::from(os)
}

fn resolve_min_seg(h_frac: Option<f64>, h_abs: Option<usize>) -> Result<MinSegLen> {
    match (h_frac, h_abs) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "--h-frac and --h-abs are mutually exclusive".to_owned(),
        )),
        (None, Some(rows)) => Ok(MinSegLen::Rows(rows)),
        (Some(f), None) => Ok(MinSegLen::Fraction(f)),
        (None, None) => Ok(MinSegLen::default()),
    }
}

fn resolve_sigma(spec: &SigmaSpec, series: &TimeSeries) -> f64 {
    match spec {
        SigmaSpec::Realized => realized_volatility(series),
        SigmaSpec::Value(v) => *v,
    }
}

/// Dispatches a loaded series through the configured detector and
/// assembles the result document.
pub fn full_pipeline(
    series: &TimeSeries,
    basis: &BasisSet,
    args: &DetectArgs,
) -> Result<DetectionResult> {
    let config = serde_json::to_value(args)?;
    let min_seg = resolve_min_seg(args.h_frac, args.h_abs)?;
    let sigma = resolve_sigma(&args.sigma, series);

    let result = match (&args.m, &args.auto) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(CliError::Config(
                "exactly one of --m <count> or --auto <sns|pelt> must be given".to_owned(),
            ));
        }
        (Some(m), None) => {
            let m = *m;
            let objective = match args.method {
                MethodChoice::Lsse => Objective::lsse(),
                MethodChoice::Mll => Objective::mll(sigma)?,
            };
            if args.oracle {
                let (seg, cost) = oracle::exhaustive_search(series, basis, m, objective, &min_seg)?;
                build_result(
                    series,
                    basis,
                    &seg,
                    sigma,
                    ResultMeta {
                        method: args.method.as_str(),
                        algorithm: "oracle-exhaustive",
                        total_cost: cost,
                    },
                    config,
                )?
            } else {
                let det = detect_known_m(
                    series,
                    basis,
                    m,
                    objective,
                    &DpOptions {
                        min_seg,
                        ..DpOptions::default()
                    },
                )?;
                build_result(
                    series,
                    basis,
                    &det.segmentation,
                    sigma,
                    ResultMeta {
                        method: args.method.as_str(),
                        algorithm: "dp",
                        total_cost: det.total_cost,
                    },
                    config,
                )?
            }
        }
        (None, Some(AutoAlgorithm::Sns)) => {
            let det = detect_unknown_m_sns(
                series,
                basis,
                sigma,
                &SnsOptions {
                    min_seg,
                    m_max: args.mmax,
                    penalty: match args.penalty {
                        PenaltyChoice::Sic => PenaltyKind::Sic,
                        PenaltyChoice::Aic => PenaltyKind::Aic,
                    },
                    ..SnsOptions::default()
                },
            )?;
            for w in &det.warnings {
                eprintln!("warning: {w}");
            }
            let selected = &det.ic_trace[det.m_hat];
            let mut result = build_result(
                series,
                basis,
                &det.segmentation,
                sigma,
                ResultMeta {
                    method: "mll",
                    algorithm: "sns",
                    total_cost: selected.loglik,
                },
                config,
            )?;
            result.selected_m = Some(det.m_hat);
            result.ic_trace = Some(det.ic_trace.iter().map(Into::into).collect());
            result
        }
        (None, Some(AutoAlgorithm::Pelt)) => {
            let det = detect_pelt(
                series,
                basis,
                sigma,
                &PeltOptions {
                    min_seg,
                    ..PeltOptions::default()
                },
            )?;
            let mut result = build_result(
                series,
                basis,
                &det.segmentation,
                sigma,
                ResultMeta {
                    method: "mll",
                    algorithm: "pelt",
                    total_cost: det.penalized_cost,
                },
                config,
            )?;
            result.selected_m = Some(det.m_hat);
            result.pruning_stats = Some(det.pruning);
            result
        }
    };
    Ok(result)
}

pub fn run_detect(args: &DetectArgs) -> Result<()> {
    let series = ingest_csv(
        &args.input,
        &args.time_col,
        &args.value_col,
        args.dt,
        args.log_transform,
    )?;
    let basis = match args.basis {
        BasisChoice::Constant => BasisSet::constant(),
        BasisChoice::Case2 => BasisSet::cosine_pair(args.dt)?,
    };
    let result = full_pipeline(&series, &basis, args)?;

    if let Some(dir) = &args.plots {
        std::fs::create_dir_all(dir)?;
        plot::plot_series(&dir.join("series.svg"), &series, &result.change_times)?;
    }
    match &args.out {
        Some(path) => {
            write_json(path, &result)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&result)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct RateSidecar<'a> {
    config: &'a McRatesArgs,
    scenario: &'a RegimeScenario,
    seed0: u64,
    summaries: &'a [McRateSummary],
}

pub fn run_mc_rates(args: &McRatesArgs) -> Result<()> {
    let case = PresetCase::from_id(args.case)?;
    let scenario = scenario_from(
        case,
        args.m,
        args.fractions.clone(),
        args.horizon,
        args.dt,
        args.sigma,
        args.x0,
    )?;
    let basis = presets::basis(case, scenario.delta_t)?;
    let min_seg = resolve_min_seg(args.h_frac, args.h_abs)?;
    let methods: Vec<ObjectiveKind> = match args.method {
        RateMethodChoice::Lsse => vec![ObjectiveKind::Lsse],
        RateMethodChoice::Mll => vec![ObjectiveKind::Mll],
        RateMethodChoice::Both => vec![ObjectiveKind::Lsse, ObjectiveKind::Mll],
    };
    let mut summaries = Vec::new();
    for method in methods {
        let exp = RateExperiment {
            scenario: scenario.clone(),
            method,
            iterations: args.iterations,
            seed0: args.seed0,
            min_seg,
        };
        summaries.push(run_rate_experiment(&exp, &basis)?);
    }

    let csv_path = args.out.with_extension("csv");
    write_rate_csv(&csv_path, args.case, args.horizon, &summaries)?;
    write_json(
        &args.out.with_extension("json"),
        &RateSidecar {
            config: args,
            scenario: &scenario,
            seed0: args.seed0,
            summaries: &summaries,
        },
    )?;
    if let Some(dir) = &args.plots {
        std::fs::create_dir_all(dir)?;
        for summary in &summaries {
            for (j, cp) in summary.per_change.iter().enumerate() {
                let name = format!("s{}_{:?}.svg", j + 1, summary.method).to_lowercase();
                plot::plot_histogram(
                    &dir.join(name),
                    &cp.estimates,
                    cp.true_fraction,
                    &format!("s_{} estimates ({:?})", j + 1, summary.method),
                )?;
            }
        }
    }
    for summary in &summaries {
        for (j, cp) in summary.per_change.iter().enumerate() {
            eprintln!(
                "[{:?}] s_{}: mean={:.4} ci=({:.4},{:.4}) mse={:.3e}",
                summary.method,
                j + 1,
                cp.mean,
                cp.ci_lower,
                cp.ci_upper,
                cp.mse
            );
        }
    }
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

#[derive(Serialize)]
struct CountSidecar<'a> {
    config: &'a McCountArgs,
    scenario: &'a RegimeScenario,
    seed0: u64,
    summary: &'a McCountSummary,
}

pub fn run_mc_count(args: &McCountArgs) -> Result<()> {
    let case = PresetCase::from_id(args.case)?;
    let scenario = scenario_from(
        case,
        args.m,
        args.fractions.clone(),
        args.horizon,
        args.dt,
        args.sigma,
        args.x0,
    )?;
    let basis = presets::basis(case, scenario.delta_t)?;
    let exp = CountExperiment {
        scenario,
        algorithm: match args.algorithm {
            crate::args::CountAlgorithmChoice::Sns => CountAlgorithm::Sns,
            crate::args::CountAlgorithmChoice::Pelt => CountAlgorithm::Pelt,
        },
        m_max: args.mmax,
        iterations: args.iterations,
        seed0: args.seed0,
        min_seg: resolve_min_seg(args.h_frac, args.h_abs)?,
    };
    let summary = run_count_experiment(&exp, &basis)?;
    let csv_path = args.out.with_extension("csv");
    write_count_csv(&csv_path, args.case, args.horizon, args.m, &summary)?;
    write_json(
        &args.out.with_extension("json"),
        &CountSidecar {
            config: args,
            scenario: &exp.scenario,
            seed0: args.seed0,
            summary: &summary,
        },
    )?;
    eprintln!(
        "CF={} RF={:.1}% over {} iterations; wrote {}",
        summary.cf,
        summary.rf_percent,
        summary.iterations,
        csv_path.display()
    );
    Ok(())
}

pub fn run_plot(args: &PlotArgs) -> Result<()> {
    let series = ingest_csv(
        &args.input,
        &args.time_col,
        &args.value_col,
        args.dt,
        args.log_transform,
    )?;
    let change_times: Vec<f64> = match &args.result {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let result: DetectionResult = serde_json::from_str(&text)?;
            result.change_times
        }
        None => vec![],
    };
    std::fs::create_dir_all(&args.out)?;
    let target = args.out.join("series.svg");
    plot::plot_series(&target, &series, &change_times)?;
    eprintln!("wrote {}", target.display());
    Ok(())
}
