//! `profilelab`: entropy profiles of sources and of their coordinate-wise
//! encodings, from the command line.
//!
//! Exit status is 0 on success, 2 when an input cannot be parsed or is
//! inconsistent, 3 when an instance exceeds a capacity limit and 4 when the
//! requested quantity does not exist (for example the stationary law of a
//! reducible chain). Other failures, such as unreadable files, exit with 1.

mod output;
mod plot;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use profilelab::bounds::BoundRequest;
use profilelab::experiment::{fluctuation_trend, run_experiment, ExperimentReport, ExperimentSpec, TrendSpec};
use profilelab::profiles::{convolve, ProfileFile};
use profilelab::sources::{ProfileOptions, RateBracket, RateKind};
use profilelab::{Caps, Error, ProfileVector, SourceSpec, Subset};

use output::{num, opt, Table};

#[derive(Parser)]
#[command(name = "profilelab", version, about = "Entropy profiles under coordinate-wise encodings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for the output files; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy-rate profile of a source.
    Profile {
        /// Source description (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Horizon at which rates are reported.
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Bracket depth for coordinate sub-processes that are not Markov.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Largest horizon for the explicit M'(X^(n))/n track.
        #[arg(long, default_value_t = 4)]
        fluctuation_horizon: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convolution of two profile files.
    Convolve {
        u: PathBuf,
        v: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Encoding sweep over horizons.
    EncodeExperiment {
        /// Experiment description (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluates a proportion bound.
    Bounds {
        /// Bound request (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Replaces the request's epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Relative mean fluctuation of growing blocks of a source.
    FluctTrend {
        /// Trend description (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Replaces the horizons listed in the description.
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Plot-ready data files from an encode-experiment report.
    Plotdata {
        /// Report written by encode-experiment (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip the SVG charts.
        #[arg(long)]
        no_svg: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::InvalidArgument(_) | Error::ShapeMismatch(_) => 2,
                Error::Capacity { .. } => 3,
                Error::Domain(_) => 4,
            };
        }
        if cause.is::<serde_path_to_error::Error<serde_json::Error>>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let value = serde_path_to_error::deserialize(de).with_context(|| format!("parsing {}", path.display()))?;
    Ok(value)
}

fn run(cli: Cli) -> Result<()> {
    let caps = Caps::default();
    match cli.command {
        Command::Profile {
            spec,
            horizon,
            depth,
            fluctuation_horizon,
            output,
        } => {
            let source: SourceSpec = read_json(&spec)?;
            let report = profile_report(source, horizon, depth, fluctuation_horizon, &caps)?;
            let table = profile_table(&report);
            emit("profile", to_value(&report, &["source"])?, table, &output)
        }
        Command::Convolve { u, v, output } => {
            let u: ProfileFile = read_json(&u)?;
            let v: ProfileFile = read_json(&v)?;
            let w = convolve(&ProfileVector::from_file(&u)?, &ProfileVector::from_file(&v)?)?;
            let value = to_value(&w.to_file(), &[])?;
            let table = output::flatten(&value);
            emit("convolution", value, table, &output)
        }
        Command::EncodeExperiment {
            spec,
            seed,
            trials,
            epsilon,
            output,
        } => {
            let mut spec: ExperimentSpec = read_json(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(e) = epsilon {
                spec.epsilon = e;
            }
            let start = Instant::now();
            let report = run_experiment(&spec, &caps)?;
            let envelope = ExperimentOutput {
                meta: Meta {
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    seed: spec.seed,
                    wall_time_seconds: start.elapsed().as_secs_f64(),
                },
                report,
            };
            let table = experiment_table(&envelope.report);
            emit("experiment", to_value(&envelope, &["spec"])?, table, &output)
        }
        Command::Bounds { spec, epsilon, output } => {
            let mut request: BoundRequest = read_json(&spec)?;
            if let Some(e) = epsilon {
                set_epsilon(&mut request, e)?;
            }
            let report = request.evaluate()?;
            let value = to_value(&report, &["input"])?;
            let table = output::flatten(&value);
            emit("bounds", value, table, &output)
        }
        Command::FluctTrend { spec, horizons, output } => {
            let mut spec: TrendSpec = read_json(&spec)?;
            if let Some(h) = horizons {
                spec.horizons = h;
            }
            let report = fluctuation_trend(&spec, &caps)?;
            let mut table = Table::new(vec![
                ("n", "horizon"),
                ("feasible", "false when the horizon exceeded a capacity limit"),
                ("method", "types (i.i.d. type-class sum) or explicit (law of the first n steps)"),
                ("entropy", "H(X^(n)) in nats"),
                ("m_rel", "M(X^(n)) / H(X^(n))"),
                ("d_rel", "D(X^(n)) / H(X^(n)), i.i.d. sources only"),
                ("d_rel_limit", "(ln #support - H) / H of one step, i.i.d. sources only"),
                ("conditional_m_rel", "M(X_target^(n) | X_given^(n)) / H(X_target^(n) | X_given^(n))"),
                ("error", "reason a row is infeasible"),
            ]);
            for r in &report.rows {
                table.push(vec![
                    r.n.to_string(),
                    r.feasible.to_string(),
                    r.method.map(|m| json_name(&m)).unwrap_or_default(),
                    opt(r.entropy),
                    opt(r.m_rel),
                    opt(r.d_rel),
                    opt(report.d_rel_limit),
                    opt(r.conditional_m_rel),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            emit("fluct_trend", to_value(&report, &["spec"])?, table, &output)
        }
        Command::Plotdata { spec, out, no_svg } => {
            let value: Value = read_json(&spec)?;
            let report: ExperimentReport = match value.get("report") {
                Some(inner) => serde_json::from_value(inner.clone()),
                None => serde_json::from_value(value),
            }
            .with_context(|| format!("parsing {}", spec.display()))?;
            for path in plot::write_panels(&report, &out, !no_svg)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn json_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn set_epsilon(request: &mut BoundRequest, value: f64) -> Result<()> {
    match request {
        BoundRequest::Thm1 { epsilon, .. }
        | BoundRequest::Thm2 { epsilon, .. }
        | BoundRequest::SmallAtoms { epsilon, .. }
        | BoundRequest::Simplified { epsilon, .. } => {
            *epsilon = value;
            Ok(())
        }
        _ => bail!(Error::InvalidArgument("this bound has no epsilon parameter".into())),
    }
}

fn to_value<T: Serialize>(v: &T, keep: &[&str]) -> Result<Value> {
    let mut value = serde_json::to_value(v)?;
    output::round_json(&mut value, keep);
    Ok(value)
}

fn emit(name: &str, value: Value, table: Table, args: &OutputArgs) -> Result<()> {
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            match args.format {
                Format::Json => {
                    let path = dir.join(format!("{name}.json"));
                    fs::write(&path, serde_json::to_string_pretty(&value)? + "\n")?;
                }
                Format::Csv => {
                    table.write_csv(fs::File::create(dir.join(format!("{name}.csv")))?)?;
                    let schema = dir.join(format!("{name}.columns.json"));
                    fs::write(schema, serde_json::to_string_pretty(&table.schema())? + "\n")?;
                }
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match args.format {
                Format::Json => writeln!(lock, "{}", serde_json::to_string_pretty(&value)?)?,
                Format::Csv => table.write_csv(&mut lock)?,
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Meta {
    version: String,
    seed: u64,
    wall_time_seconds: f64,
}

#[derive(Serialize)]
struct ExperimentOutput {
    report: ExperimentReport,
    meta: Meta,
}

#[derive(Serialize)]
struct SubsetRate {
    subset: Subset,
    kind: RateKind,
    rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bracket: Option<RateBracket>,
}

#[derive(Serialize)]
struct ProfileReport {
    source: SourceSpec,
    horizon: usize,
    bracket_depth: usize,
    irreducible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entropy_rate: Option<f64>,
    subsets: Vec<SubsetRate>,
    /// `M'(X^(n)) / n` for `n = 1, 2, ..`.
    fluctuation: Vec<f64>,
}

fn profile_report(
    source: SourceSpec,
    horizon: usize,
    depth: usize,
    fluctuation_horizon: usize,
    caps: &Caps,
) -> Result<ProfileReport> {
    let chain = source.build()?;
    let opts = ProfileOptions {
        bracket_depth: depth,
        fluctuation_horizon,
        caps: *caps,
    };
    let profile = chain.process_profile(horizon, &opts)?;
    let irreducible = chain.is_irreducible();
    let subsets = profile
        .tracks
        .iter()
        .map(|t| SubsetRate {
            subset: t.subset,
            kind: t.kind,
            rate: t.rates[horizon - 1],
            entropy: t.entropies.as_ref().map(|e| e[horizon - 1]),
            bracket: t.brackets.as_ref().and_then(|b| b.last().copied()),
        })
        .collect();
    Ok(ProfileReport {
        source,
        horizon,
        bracket_depth: depth,
        irreducible,
        period: if irreducible { Some(chain.period()?) } else { None },
        entropy_rate: if irreducible { Some(chain.entropy_rate()?) } else { None },
        subsets,
        fluctuation: profile.fluctuation,
    })
}

fn profile_table(r: &ProfileReport) -> Table {
    let mut t = Table::new(vec![
        ("subset", "one-based coordinates of the sub-process, empty for the empty set"),
        ("kind", "exact (sub-process is Markov) or bracketed (hidden sub-process)"),
        ("rate", "H(X_J^(n)) / n in nats, or the bracket midpoint"),
        ("entropy", "H(X_J^(n)) in nats for exact rows"),
        ("bracket_depth", "conditioning depth of the bracket"),
        ("bracket_lower", "lower end of the entropy-rate bracket in nats"),
        ("bracket_upper", "upper end of the entropy-rate bracket in nats"),
    ]);
    for s in &r.subsets {
        t.push(vec![
            s.subset.to_string(),
            json_name(&s.kind),
            num(s.rate),
            opt(s.entropy),
            s.bracket.map(|b| b.depth.to_string()).unwrap_or_default(),
            opt(s.bracket.map(|b| b.lower)),
            opt(s.bracket.map(|b| b.upper)),
        ]);
    }
    t
}

fn experiment_table(r: &ExperimentReport) -> Table {
    let mut t = Table::new(vec![
        ("n", "horizon"),
        ("feasible", "false when the horizon exceeded a capacity limit"),
        ("output_sizes", "output alphabet sizes, separated by ';'"),
        ("active_sizes", "input alphabet sizes after dropping unused words, separated by ';'"),
        ("trials", "encodings evaluated"),
        ("proportion", "share of encodings meeting both conditions at level epsilon"),
        ("proportion_lower", "lower end of the Wilson 95% interval (equal to proportion when exact)"),
        ("proportion_upper", "upper end of the Wilson 95% interval (equal to proportion when exact)"),
        ("distance_min", "minimum of max-norm distance / n to the convolution"),
        ("distance_q25", "first quartile of the scaled distance"),
        ("distance_median", "median of the scaled distance"),
        ("distance_q75", "third quartile of the scaled distance"),
        ("distance_max", "maximum of the scaled distance"),
        ("fluctuation_median", "median of M'(f(X^(n))) / n"),
        ("fluctuation_max", "maximum of M'(f(X^(n))) / n"),
        ("source_rate", "H(X^(n)) / n"),
        ("source_fluctuation", "M'(X^(n)) / n"),
        ("convolution_full", "full-set entry of the scaled convolution"),
        ("median_full", "median over encodings of H(f(X^(n))) / n"),
        ("thm1_bound", "single-shot proportion bound with H = H(X^(n))"),
        ("thm1_hypotheses_hold", "whether that bound's hypotheses hold"),
        ("thm2_bound", "asymptotic bound 1 - exp(-e^(delta n))"),
        ("thm2_admissible", "delta below its admissibility threshold"),
        ("error", "reason a row is infeasible"),
    ]);
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
    let full = |f: &ProfileFile| ProfileVector::from_file(f).map_or(f64::NAN, |p| p.full());
    for row in &r.rows {
        let mut cells = vec![row.n.to_string(), row.feasible.to_string(), join(&row.output_sizes)];
        match &row.measurements {
            Some(m) => cells.extend([
                join(&m.active_sizes),
                m.proportion.trials.to_string(),
                num(m.proportion.proportion),
                num(m.proportion.lower),
                num(m.proportion.upper),
                num(m.distance.min),
                num(m.distance.q25),
                num(m.distance.median),
                num(m.distance.q75),
                num(m.distance.max),
                num(m.fluctuation.median),
                num(m.fluctuation.max),
                num(full(&m.source_rates)),
                num(m.source_fluctuation),
                num(full(&m.convolution)),
                num(full(&m.median_profile)),
                num(m.thm1.proportion_lower_bound),
                m.thm1_hypotheses_hold.to_string(),
                num(m.thm2.bound.proportion_lower_bound),
                m.thm2.admissible.to_string(),
                String::new(),
            ]),
            None => {
                cells.extend(std::iter::repeat_n(String::new(), 20));
                cells.push(row.error.clone().unwrap_or_default());
            }
        }
        t.push(cells);
    }
    t
}
