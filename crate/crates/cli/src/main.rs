use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use vidwatt_core::model::ghg_emissions;
use vidwatt_core::optimizer::{
    assign_optimal_encoders, crossover, ladder_impact, reencode_break_even, surrogate_scaling,
    sweep_requests, EncoderOption, OptimizerError, VideoCostModel, VideoDemand,
};
use vidwatt_core::quantity::{CarbonIntensity, Count, Energy};
use vidwatt_core::report::{self, kwh_cell, EnergyReport};
use vidwatt_core::scenario::{
    builtin_catalog, load_scenario_ref, Override, Scenario, ScenarioError,
};
use vidwatt_core::units::JOULES_PER_KWH;

#[derive(Parser)]
#[command(
    name = "vidwatt",
    version,
    about = "Energy and carbon accounting for online video services"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario into an energy report.
    Eval(EvalArgs),
    /// Tabulate energy over a grid of request counts or of any scenario parameter.
    Sweep(SweepArgs),
    /// Encoder and CDN decisions for a scenario with an encoder study.
    Optimize(OptimizeArgs),
    /// Side-by-side totals of several scenarios.
    Compare(CompareArgs),
    /// Print the builtin parameter catalog with provenance.
    Catalog(CatalogArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// `builtin:<name>` or a path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Dotted-path edit applied before validation, e.g. `device_fleets.0.count=5e7`.
    #[arg(long = "override", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: OutFormat,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
    /// Carbon intensity for GHG totals, e.g. `350` or `350 g/kWh`.
    #[arg(long)]
    carbon_intensity: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
    /// `forecast` for the encoder study, otherwise an override path.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long)]
    grid: String,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
    #[command(subcommand)]
    analysis: Analysis,
}

#[derive(Subcommand)]
enum Analysis {
    /// Request count at which two options cost the same.
    Crossover {
        /// Option labels; defaults to the first two options.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Per-video optimal option over the study's video mix.
    Assign,
    /// Relative cost of serving a ladder of identical-option variants.
    Ladder {
        #[arg(long, default_value_t = 16)]
        variants: usize,
        #[arg(long, default_value_t = 10.0)]
        surrogates: f64,
        #[arg(long, default_value_t = 1e6)]
        forecast: f64,
        /// Option label used for every variant; defaults to the first option.
        #[arg(long)]
        option: Option<String>,
    },
    /// Video cost as the number of servers holding it grows.
    Surrogates {
        /// Comma-separated server counts.
        #[arg(long, default_value = "1,10")]
        counts: String,
        #[arg(long)]
        forecast: Option<f64>,
        #[arg(long)]
        option: Option<String>,
    },
    /// Requests after which re-encoding from one option to another pays off.
    Reencode {
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more scenarios; deltas are relative to the first.
    #[arg(long, num_args = 1.., required = true)]
    scenario: Vec<String>,
    #[arg(long = "override", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    #[command(flatten)]
    output: Output,
    #[arg(long)]
    carbon_intensity: Option<String>,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Usage(String),
    Io(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<OptimizerError> for Failure {
    fn from(e: OptimizerError) -> Self {
        Failure::Validation(format!("[invariant-violation] {e}"))
    }
}

type Outcome = Result<String, Failure>;

fn parse_overrides(raw: &[String]) -> Result<Vec<Override>, Failure> {
    raw.iter()
        .map(|s| s.parse::<Override>().map_err(Failure::from))
        .collect()
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    Ok(load_scenario_ref(
        &common.scenario,
        &parse_overrides(&common.overrides)?,
    )?)
}

fn parse_ci(raw: &str) -> Result<CarbonIntensity, Failure> {
    let text = if raw.trim().parse::<f64>().is_ok() {
        format!("{raw} g/kWh")
    } else {
        raw.to_string()
    };
    CarbonIntensity::parse(&text)
        .map_err(|e| Failure::Usage(format!("--carbon-intensity: [{}] {e}", e.code())))
}

fn parse_list(raw: &str, what: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{what}: '{s}' is not a number")))
        })
        .collect()
}

fn kwh(e: Energy) -> f64 {
    e.si() / JOULES_PER_KWH
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn eval(args: &EvalArgs) -> Outcome {
    let scenario = load(&args.common)?;
    let mut r = report::evaluate(&scenario);
    if let Some(raw) = &args.carbon_intensity {
        r.ghg = Some(report::ghg_report(&r, parse_ci(raw)?));
    }
    Ok(match args.output.format {
        OutFormat::Json => report::to_json(&r) + "\n",
        OutFormat::Csv => report::to_csv(&[r]),
    })
}

fn study(scenario: &Scenario) -> Result<(VideoCostModel, Vec<EncoderOption>), Failure> {
    Ok((
        VideoCostModel::from_scenario(scenario)?,
        VideoCostModel::options_from_scenario(scenario)?,
    ))
}

fn option_by_label<'a>(
    options: &'a [EncoderOption],
    label: Option<&str>,
    default: usize,
) -> Result<&'a EncoderOption, Failure> {
    match label {
        None => options.get(default).ok_or_else(|| {
            Failure::Validation(format!(
                "[invariant-violation] study needs at least {} options",
                default + 1
            ))
        }),
        Some(l) => options.iter().find(|o| o.label == l).ok_or_else(|| {
            Failure::Validation(format!(
                "[unresolved-reference] no encoder option labelled '{l}'"
            ))
        }),
    }
}

fn sweep(args: &SweepArgs) -> Outcome {
    let base_overrides = parse_overrides(&args.common.overrides)?;
    if args.param == "forecast" {
        let scenario = load_scenario_ref(&args.common.scenario, &base_overrides)?;
        let (model, options) = study(&scenario)?;
        let grid = parse_list(&args.grid, "--grid")?;
        let rows = sweep_requests(&model, &options, &grid)?;
        return Ok(match args.output.format {
            OutFormat::Json => to_json(&rows),
            OutFormat::Csv => {
                let mut out = String::from("requests,option,value_kwh\n");
                for r in &rows {
                    let _ = writeln!(out, "{},{},{}", r.requests, r.option, kwh_cell(r.energy));
                }
                out
            }
        });
    }
    let mut points = Vec::new();
    for value in args.grid.split(',') {
        let mut overrides = base_overrides.clone();
        overrides.push(format!("{}={}", args.param, value.trim()).parse::<Override>()?);
        let scenario = load_scenario_ref(&args.common.scenario, &overrides)?;
        points.push((value.trim().to_string(), report::evaluate(&scenario)));
    }
    Ok(match args.output.format {
        OutFormat::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|(v, r)| json!({ "value": v, "report": r }))
                .collect();
            to_json(&json!({ "param": args.param, "points": rows }))
        }
        OutFormat::Csv => {
            let mut out = String::from("value,total_kwh,ut_kwh,vp_kwh,nw_kwh\n");
            for (v, r) in &points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_quote(v),
                    kwh_cell(r.total),
                    kwh_cell(r.terminals.total),
                    kwh_cell(r.provider.total),
                    kwh_cell(r.network.total)
                );
            }
            out
        }
    })
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn optimize(args: &OptimizeArgs) -> Outcome {
    let scenario = load(&args.common)?;
    let (model, options) = study(&scenario)?;
    let csv = matches!(args.output.format, OutFormat::Csv);
    match &args.analysis {
        Analysis::Crossover { a, b } => {
            let oa = option_by_label(&options, a.as_deref(), 0)?;
            let ob = option_by_label(&options, b.as_deref(), 1)?;
            let x = crossover(&model, oa, ob);
            let value = json!({
                "a": { "option": oa.label, "line": model.line(oa) },
                "b": { "option": ob.label, "line": model.line(ob) },
                "crossover": x,
            });
            if csv {
                let mut out = String::from("option,fixed_kwh,per_request_kwh\n");
                for o in [oa, ob] {
                    let l = model.line(o);
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        o.label,
                        kwh_cell(l.fixed),
                        kwh_cell(l.per_request)
                    );
                }
                Ok(out)
            } else {
                Ok(to_json(&value))
            }
        }
        Analysis::Assign => {
            let study = scenario.encoder_study.as_ref().expect("checked by study()");
            let demands: Vec<VideoDemand> = study
                .video_mix
                .iter()
                .map(|m| VideoDemand {
                    model: &model,
                    forecast: m.forecast,
                    videos: m.videos,
                })
                .collect();
            let a = assign_optimal_encoders(&demands, &options)?;
            let ci = scenario.carbon_intensity;
            let mut policies: Vec<(String, Energy)> = a
                .uniform
                .iter()
                .map(|p| (p.policy.clone(), p.energy))
                .collect();
            policies.push(("optimal".into(), a.optimal));
            if csv {
                let mut out = String::from("policy,value_kwh,ghg_kg\n");
                for (p, e) in &policies {
                    let ghg = ci
                        .map(|c| ghg_emissions(*e, c).value_in("kg").expect("mass"))
                        .map_or(String::new(), |g| format!("{g:e}"));
                    let _ = writeln!(out, "{p},{},{ghg}", kwh_cell(*e));
                }
                Ok(out)
            } else {
                let rows: Vec<_> = policies
                    .iter()
                    .map(|(p, e)| json!({ "policy": p, "energy": e, "ghg": ci.map(|c| ghg_emissions(*e, c)) }))
                    .collect();
                let groups: Vec<_> = study
                    .video_mix
                    .iter()
                    .zip(&a.choice_labels)
                    .map(
                        |(m, c)| json!({ "videos": m.videos, "forecast": m.forecast, "choice": c }),
                    )
                    .collect();
                Ok(to_json(&json!({ "groups": groups, "policies": rows })))
            }
        }
        Analysis::Ladder {
            variants,
            surrogates,
            forecast,
            option,
        } => {
            if *variants == 0 {
                return Err(Failure::Usage("--variants must be >= 1".into()));
            }
            let o = option_by_label(&options, option.as_deref(), 0)?;
            let ladder: Vec<EncoderOption> = (0..*variants)
                .map(|i| EncoderOption {
                    label: format!("{}-{i}", o.label),
                    ..o.clone()
                })
                .collect();
            let forecast =
                Count::new(*forecast).map_err(|e| Failure::Usage(format!("--forecast: {e}")))?;
            let surrogates = Count::new(*surrogates)
                .map_err(|e| Failure::Usage(format!("--surrogates: {e}")))?;
            let r = ladder_impact(&model, &ladder, forecast, surrogates)?;
            if csv {
                Ok(format!(
                    "variants,forecast,single_kwh,ladder_kwh,relative_delta\n{},{},{},{},{:e}\n",
                    variants,
                    forecast,
                    kwh_cell(r.single),
                    kwh_cell(r.ladder),
                    r.relative_delta
                ))
            } else {
                Ok(to_json(
                    &json!({ "variants": variants, "forecast": forecast, "surrogates": surrogates, "result": r }),
                ))
            }
        }
        Analysis::Surrogates {
            counts,
            forecast,
            option,
        } => {
            let o = option_by_label(&options, option.as_deref(), 0)?;
            let counts = parse_list(counts, "--counts")?;
            let asset = &scenario.assets[scenario.encoder_study.as_ref().expect("study").asset];
            let f = forecast
                .map(Count::new)
                .transpose()
                .map_err(|e| Failure::Usage(format!("--forecast: {e}")))?
                .or(asset.request_forecast)
                .unwrap_or(Count::ONE);
            let rows = surrogate_scaling(&model, o, f, &counts)?;
            if csv {
                let mut out = String::from(
                    "servers,server_offset_kwh,placement_kwh,video_total_kwh,relative_to_first\n",
                );
                for r in &rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:e}",
                        r.servers,
                        kwh_cell(r.server_offset),
                        kwh_cell(r.placement),
                        kwh_cell(r.video_total),
                        r.relative_to_first
                    );
                }
                Ok(out)
            } else {
                Ok(to_json(
                    &json!({ "option": o.label, "forecast": f, "rows": rows }),
                ))
            }
        }
        Analysis::Reencode { from, to } => {
            let of = option_by_label(&options, from.as_deref(), 1)?;
            let ot = option_by_label(&options, to.as_deref(), 0)?;
            let r = reencode_break_even(&model, of, ot);
            if csv {
                Ok(format!(
                    "from,to,extra_fixed_kwh,saving_per_request_kwh,requests\n{},{},{},{},{}\n",
                    r.from,
                    r.to,
                    kwh_cell(r.extra_fixed),
                    kwh_cell(r.saving_per_request),
                    r.requests.map_or(String::new(), |n| format!("{n:e}"))
                ))
            } else {
                Ok(to_json(&r))
            }
        }
    }
}

#[derive(Serialize)]
struct CompareRow {
    service: String,
    total: Energy,
    terminals: Energy,
    provider: Energy,
    network: Energy,
    delta_kwh: f64,
    delta_relative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ghg: Option<vidwatt_core::quantity::Mass>,
}

fn compare(args: &CompareArgs) -> Outcome {
    if args.scenario.len() < 2 {
        return Err(Failure::Usage(
            "compare needs at least two --scenario values".into(),
        ));
    }
    let overrides = parse_overrides(&args.overrides)?;
    let ci = args.carbon_intensity.as_deref().map(parse_ci).transpose()?;
    let reports: Vec<EnergyReport> = args
        .scenario
        .iter()
        .map(|s| load_scenario_ref(s, &overrides).map(|sc| report::evaluate(&sc)))
        .collect::<Result<_, _>>()?;
    let base = reports[0].total;
    let rows: Vec<CompareRow> = reports
        .iter()
        .map(|r| CompareRow {
            service: r.service.clone(),
            total: r.total,
            terminals: r.terminals.total,
            provider: r.provider.total,
            network: r.network.total,
            delta_kwh: kwh(r.total) - kwh(base),
            delta_relative: if base.si() == 0.0 {
                0.0
            } else {
                (r.total.si() - base.si()) / base.si()
            },
            ghg: ci.map(|c| ghg_emissions(r.total, c)),
        })
        .collect();
    Ok(match args.output.format {
        OutFormat::Json => to_json(&rows),
        OutFormat::Csv => {
            let mut out = String::from(
                "service,total_kwh,ut_kwh,vp_kwh,nw_kwh,delta_kwh,delta_relative,ghg_kg\n",
            );
            for r in &rows {
                let ghg = r.ghg.map_or(String::new(), |g| {
                    format!("{:e}", g.value_in("kg").expect("mass"))
                });
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:e},{:e},{}",
                    csv_quote(&r.service),
                    kwh_cell(r.total),
                    kwh_cell(r.terminals),
                    kwh_cell(r.provider),
                    kwh_cell(r.network),
                    r.delta_kwh,
                    r.delta_relative,
                    ghg
                );
            }
            out
        }
    })
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (text, out) = match &cli.command {
        Command::Eval(a) => (eval(a)?, a.output.out.as_ref()),
        Command::Sweep(a) => (sweep(a)?, a.output.out.as_ref()),
        Command::Optimize(a) => (optimize(a)?, a.output.out.as_ref()),
        Command::Compare(a) => (compare(a)?, a.output.out.as_ref()),
        Command::Catalog(a) => (to_json(&builtin_catalog()), a.out.as_ref()),
    };
    write_out(&text, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
