use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wsint::diagnostics::{anova_table, circularity_report, DEFAULT_RATIO_THRESHOLD};
use wsint::intervals::{pairwise_difference_ci, DfChoice};
use wsint::io::{load_dataset, to_long_csv, to_wide_csv, DatasetSpec, Layout};
use wsint::plot::{emit_plot, PlotSeries};
use wsint::posterior::{
    conditional_posterior, gibbs_sample, mc_verify_modified_probability, modified_posterior_probability, GibbsConfig,
    Model, Prior,
};
use wsint::report::{compute_intervals, records, render, ComputeOptions, OutputFormat};
use wsint::sim::{load_simspec, simulate, SimSpec};
use wsint::{datasets, summarize, Method, RepeatedMeasuresTable};

const BUILTIN_EXPOSURE: &str = "builtin:exposure_duration";
const BUILTIN_HETERO: &str = "builtin:hetero_demo";

#[derive(Parser)]
#[command(name = "wsint", version, about = "Within-subject confidence and credible intervals for repeated-measures designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-condition intervals for one or more methods.
    Compute(ComputeArgs),
    /// Repeated-measures ANOVA, variance of difference scores and a circularity advisory.
    Diagnose(DiagnoseArgs),
    /// Posterior mass of a within-subject interval.
    PosteriorProb(PosteriorArgs),
    /// Generate a dataset from a simulation spec.
    Simulate(SimulateArgs),
    /// Error-bar chart comparing up to two methods.
    Plot(PlotArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Delimited data file, a `.toml` simulation spec, `builtin:exposure_duration` or `builtin:hetero_demo`.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = LayoutArg::Wide)]
    layout: LayoutArg,
    #[arg(long, default_value = "subject")]
    subject_column: String,
    #[arg(long, default_value = "condition")]
    condition_column: String,
    #[arg(long, default_value = "value")]
    value_column: String,
    /// Seed for simulation-spec inputs; overrides the spec's own seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Wide,
    Long,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Table,
    Json,
}

impl From<OutputArg> for OutputFormat {
    fn from(o: OutputArg) -> Self {
        match o {
            OutputArg::Table => OutputFormat::Table,
            OutputArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DfChoiceArg {
    NMinus1,
    CTimesNMinus1,
    Interaction,
}

impl From<DfChoiceArg> for DfChoice {
    fn from(d: DfChoiceArg) -> Self {
        match d {
            DfChoiceArg::NMinus1 => DfChoice::NMinus1,
            DfChoiceArg::CTimesNMinus1 => DfChoice::CTimesNMinus1,
            DfChoiceArg::Interaction => DfChoice::InteractionDf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    /// 1/σ² on the homoscedastic model.
    Jeffreys,
    /// The improper prior under which the within-subject CI is the HDI.
    Improper,
    /// Πⱼ 1/σⱼ² on the heteroscedastic model.
    PerCondition,
}

fn parse_level(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("level must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::from_short_name(s).ok_or_else(|| {
        let names: Vec<_> = Method::ALL.iter().map(|m| m.short_name()).collect();
        format!("unknown method {s:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated: between, wsci, hdi, hetero, large-sample, cm.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "between,wsci,hdi")]
    methods: Vec<Method>,
    #[arg(long, value_parser = parse_level, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    output: OutputArg,
    /// Rescale Cousineau-Morey half-widths by √(C/(C−1)).
    #[arg(long)]
    morey_correction: bool,
    /// Degrees of freedom for the Cousineau-Morey interval.
    #[arg(long, value_enum, default_value_t = DfChoiceArg::NMinus1)]
    df_choice: DfChoiceArg,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// max/min variance ratio above which heteroscedasticity is suspected.
    #[arg(long, default_value_t = DEFAULT_RATIO_THRESHOLD)]
    threshold: f64,
    /// Level of the pairwise difference intervals.
    #[arg(long, value_parser = parse_level, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    output: OutputArg,
}

#[derive(Args)]
struct PosteriorArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Condition label or 1-based index.
    #[arg(long)]
    condition: String,
    /// Interval to evaluate: hdi, wsci, hetero, cm, between or large-sample.
    #[arg(long, value_parser = parse_method, default_value = "hdi")]
    method: Method,
    #[arg(long, value_enum, default_value_t = PriorArg::Jeffreys)]
    prior: PriorArg,
    #[arg(long, value_parser = parse_level, default_value_t = 0.95)]
    level: f64,
    /// Monte Carlo draws for the check of the conditional probability.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    /// Also estimate the unconditional posterior probability with a Gibbs sampler.
    #[arg(long)]
    unconditional: bool,
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    output: OutputArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation spec (`.toml`) or `builtin:hetero_demo`.
    #[arg(long)]
    input: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = LayoutArg::Wide)]
    layout: LayoutArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    /// One or two comma-separated methods.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "hdi,hetero")]
    methods: Vec<Method>,
    #[arg(long, value_parser = parse_level, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value = "plot.svg")]
    svg: PathBuf,
    /// Companion plot data; defaults to the SVG path with a `.csv` extension.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "Means and within-subject intervals")]
    title: String,
    #[arg(long, default_value = "Response")]
    y_label: String,
}

fn read_simspec(input: &str, seed: Option<u64>) -> Result<SimSpec> {
    let spec = if input == BUILTIN_HETERO {
        datasets::hetero_demo_spec()
    } else {
        load_simspec(Path::new(input))?
    };
    Ok(match seed {
        Some(s) => spec.with_seed(s),
        None => spec,
    })
}

fn load_input(args: &InputArgs) -> Result<RepeatedMeasuresTable> {
    if args.input == BUILTIN_EXPOSURE {
        return Ok(datasets::exposure_duration());
    }
    if args.input == BUILTIN_HETERO || args.input.ends_with(".toml") {
        return Ok(simulate(&read_simspec(&args.input, args.seed)?)?);
    }
    let spec = DatasetSpec {
        path: PathBuf::from(&args.input),
        layout: match args.layout {
            LayoutArg::Wide => Layout::Wide,
            LayoutArg::Long => Layout::Long,
        },
        subject_column: args.subject_column.clone(),
        condition_column: Some(args.condition_column.clone()),
        value_column: Some(args.value_column.clone()),
    };
    Ok(load_dataset(&spec)?)
}

fn resolve_condition(table: &RepeatedMeasuresTable, which: &str) -> Result<usize> {
    if let Some(j) = table.condition_labels().iter().position(|l| l == which) {
        return Ok(j);
    }
    match which.parse::<usize>() {
        Ok(k) if (1..=table.n_conditions()).contains(&k) => Ok(k - 1),
        _ => bail!(
            "no condition {which:?}; labels are {:?} (or use 1..={})",
            table.condition_labels(),
            table.n_conditions()
        ),
    }
}

fn compute(args: &ComputeArgs) -> Result<String> {
    let table = load_input(&args.input)?;
    let opts = ComputeOptions {
        df_choice: args.df_choice.into(),
        morey_correction: args.morey_correction,
    };
    let results = compute_intervals(&table, &args.methods, args.level, opts)?;
    Ok(render(&records(&table, &results), args.output.into()))
}

fn diagnose(args: &DiagnoseArgs) -> Result<String> {
    if args.threshold.is_nan() || args.threshold <= 0.0 {
        bail!("threshold must be positive, got {}", args.threshold);
    }
    let table = load_input(&args.input)?;
    let stats = summarize(&table);
    let anova = anova_table(&stats, table.n_subjects(), table.n_conditions());
    let circ = circularity_report(&table, args.threshold);
    let labels = table.condition_labels();
    let mut pairs = Vec::new();
    for j in 0..table.n_conditions() {
        for l in j + 1..table.n_conditions() {
            let unpooled = pairwise_difference_ci(&table, j, l, args.level, false)?;
            let pooled = pairwise_difference_ci(&table, j, l, args.level, true)?;
            pairs.push((format!("{}-{}", labels[j], labels[l]), unpooled, pooled));
        }
    }
    Ok(match args.output {
        OutputArg::Json => {
            let pairwise: Vec<_> = pairs
                .iter()
                .map(|(name, u, p)| json!({ "pair": name, "unpooled": u, "pooled": p }))
                .collect();
            serde_json::to_string_pretty(&json!({
                "anova": anova,
                "circularity": circ,
                "pairwise_difference_ci": pairwise,
            }))? + "\n"
        }
        OutputArg::Table => {
            let mut out = anova.render();
            out.push('\n');
            out.push_str(&circ.render());
            out.push_str(&format!(
                "\n{:<24}{:>10}{:>14}{:>14}\n",
                "difference",
                "center",
                "unpooled",
                "pooled"
            ));
            for (name, u, p) in &pairs {
                out.push_str(&format!(
                    "{:<24}{:>10.2}{:>14}{:>14}\n",
                    name,
                    u.center,
                    format!("±{:.2}", u.half_width),
                    format!("±{:.2}", p.half_width)
                ));
            }
            out
        }
    })
}

fn posterior_prob(args: &PosteriorArgs) -> Result<String> {
    let table = load_input(&args.input)?;
    let j = resolve_condition(&table, &args.condition)?;
    let (model, prior) = match args.prior {
        PriorArg::Jeffreys => (Model::Homoscedastic, Prior::Jeffreys),
        PriorArg::Improper => (Model::Homoscedastic, Prior::Improper),
        PriorArg::PerCondition => (Model::Heteroscedastic, Prior::PerConditionJeffreys),
    };
    let post = conditional_posterior(&table, model, prior)?;
    let results = compute_intervals(&table, &[args.method], args.level, ComputeOptions::default())?;
    let interval = results[0].1[j];
    let seed = args.input.seed.unwrap_or(1);
    let analytic = modified_posterior_probability(&post, j, &interval)?;
    let mc = mc_verify_modified_probability(&post, j, &interval, args.draws, seed)?;
    let mc_se = (analytic * (1.0 - analytic) / args.draws as f64).sqrt();

    let unconditional = if args.unconditional {
        let cfg = GibbsConfig {
            iterations: args.iterations,
            burn_in: args.burn_in,
            seed,
            ..GibbsConfig::default()
        };
        let out = gibbs_sample(&table, &cfg)?;
        let ratio = out.variance_ratio(j);
        if ratio > wsint::posterior::CONVERGENCE_THRESHOLD {
            bail!(
                "Gibbs sampler did not converge (variance ratio {ratio:.3} > {}); increase --iterations",
                wsint::posterior::CONVERGENCE_THRESHOLD
            );
        }
        let (p, se) = out.probability_between(j, interval.lower, interval.upper);
        Some((p, se, ratio, out.posterior_sd(j)))
    } else {
        None
    };

    let label = &table.condition_labels()[j];
    Ok(match args.output {
        OutputArg::Json => {
            let mut v = json!({
                "condition": label,
                "model": post.model,
                "prior": post.prior,
                "interval": interval,
                "modified_probability": analytic,
                "monte_carlo": { "estimate": mc, "standard_error": mc_se, "draws": args.draws, "seed": seed },
            });
            if let Some((p, se, ratio, sd)) = unconditional {
                v["unconditional"] = json!({
                    "estimate": p,
                    "mc_standard_error": se,
                    "variance_ratio": ratio,
                    "posterior_sd": sd,
                });
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
        OutputArg::Table => {
            let mut out = format!(
                "condition:                 {label}\nposterior:                 {:?} model, {:?} prior\ninterval:                  {} {:.4} ± {:.4}  [{:.4}, {:.4}]\nmodified probability:      {analytic:.6}\nMonte Carlo check:         {mc:.6} (SE {mc_se:.6}, {} draws)\n",
                post.model,
                post.prior,
                interval.method,
                interval.center,
                interval.half_width,
                interval.lower,
                interval.upper,
                args.draws,
            );
            if let Some((p, se, ratio, sd)) = unconditional {
                out.push_str(&format!(
                    "unconditional probability: {p:.4} (MC SE {se:.4}, variance ratio {ratio:.3}, posterior SD {sd:.4})\n"
                ));
            }
            out
        }
    })
}

fn simulate_cmd(args: &SimulateArgs) -> Result<Option<String>> {
    let table = simulate(&read_simspec(&args.input, args.seed)?)?;
    let text = match args.layout {
        LayoutArg::Wide => to_wide_csv(&table),
        LayoutArg::Long => to_long_csv(&table),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn plot(args: &PlotArgs) -> Result<String> {
    let table = load_input(&args.input)?;
    let results = compute_intervals(&table, &args.methods, args.level, ComputeOptions::default())?;
    let series: Vec<PlotSeries> = results
        .into_iter()
        .map(|(m, ivs)| PlotSeries {
            name: m.description().to_owned(),
            conditions: table.condition_labels().to_vec(),
            intervals: ivs,
        })
        .collect();
    let out = emit_plot(&series, &args.title, &args.y_label)?;
    let data_path = args.data.clone().unwrap_or_else(|| args.svg.with_extension("csv"));
    std::fs::write(&args.svg, out.svg).with_context(|| format!("writing {}", args.svg.display()))?;
    std::fs::write(&data_path, out.data_csv).with_context(|| format!("writing {}", data_path.display()))?;
    Ok(format!("wrote {} and {}\n", args.svg.display(), data_path.display()))
}

fn run(cli: Cli) -> Result<Option<String>> {
    match cli.command {
        Command::Compute(a) => compute(&a).map(Some),
        Command::Diagnose(a) => diagnose(&a).map(Some),
        Command::PosteriorProb(a) => posterior_prob(&a).map(Some),
        Command::Simulate(a) => simulate_cmd(&a),
        Command::Plot(a) => plot(&a).map(Some),
    }
}

fn main() -> ExitCode {
    wsint::parallel::configure_threads_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            if let Some(t) = text {
                print!("{t}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
