//! Argument definitions and command dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdp_core::envelopes::{
    asymptotic_envelope, brownian_sup_quantile, confidence_thresholds, exact_confidence_set, exact_envelope,
    EnvelopeResult,
};
use fdp_core::estimation::{
    astar_lower, ecdf, kernel_a_consistent, project_f, storey_a0, EcdfVariant, NullFractionEstimate, ProjectionShape,
};
use fdp_core::examples::{example2_model, EXAMPLE1, EXAMPLE2_M};
use fdp_core::simulation::{run_validation, sample_from_model, ScenarioConfig, ValidationTarget};
use fdp_core::thresholds::{bayes_classifier_threshold, bh_threshold, plugin_threshold, simple_thresholds, SimpleKind};
use fdp_core::FdpError;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, InputFormat};
use crate::output::{
    comparison_csv, envelope_csv, estimate_csv, threshold_csv, Comparison, EstimateRow,
};

pub const DEFAULT_SEED: u64 = 20_040_101;
pub const SEED_ENV: &str = "FDP_SEED";

/// False discovery proportion thresholds, envelopes and estimates for
/// collections of p-values.
#[derive(Debug, Parser)]
#[command(name = "fdp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write output here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Emit JSON instead of CSV
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a rejection threshold
    Threshold(ThresholdArgs),
    /// Compute a confidence envelope for the FDP and thresholds derived from it
    Envelope(EnvelopeArgs),
    /// Estimate the alternative weight, the marginal CDF and the alternative CDF
    Estimate(EstimateArgs),
    /// Run a Monte Carlo validation target
    Simulate(SimulateArgs),
    /// Rerun one of the two worked examples and compare with the published numbers
    ReproduceExample(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// File of p-values: one per line, or a single CSV column with a header
    #[arg(long)]
    pub input: PathBuf,

    /// auto, lines or csv
    #[arg(long, default_value = "auto")]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdChoice {
    Uncorrected,
    Bonferroni,
    Fixed,
    FirstR,
    Bh,
    Plugin,
    BayesClassifier,
    RateCeiling,
    MinimumRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvelopeChoice {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullFractionChoice {
    Storey,
    Astar,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantChoice {
    Plain,
    Floor,
    Lcm,
}

impl From<VariantChoice> for EcdfVariant {
    fn from(v: VariantChoice) -> Self {
        match v {
            VariantChoice::Plain => EcdfVariant::Plain,
            VariantChoice::Floor => EcdfVariant::Floor,
            VariantChoice::Lcm => EcdfVariant::Lcm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeChoice {
    Step,
    Concave,
}

/// Settings of the asymptotic envelope and its bridge quantile.
#[derive(Debug, Clone, Args)]
pub struct AsymptoticArgs {
    /// Storey cutoff used for the null fraction inside the envelope
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,

    /// Lower end of the envelope's domain (default 0.1/m)
    #[arg(long)]
    pub t_min: Option<f64>,

    /// Seed of the bridge simulation; FDP_SEED takes precedence
    #[arg(long)]
    pub seed: Option<u64>,

    /// Bridge replications
    #[arg(long, default_value_t = 20_000)]
    pub reps: usize,

    /// Bridge grid points
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,

    /// Use this bridge quantile instead of simulating one
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum)]
    pub method: ThresholdChoice,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Threshold for `--method fixed`
    #[arg(long)]
    pub at: Option<f64>,

    /// Number of rejections for `--method first-r`
    #[arg(long)]
    pub r: Option<usize>,

    /// Known alternative weight for `--method plugin`, in place of an estimate
    #[arg(long)]
    pub a: Option<f64>,

    /// Estimator of the alternative weight for `--method plugin`
    #[arg(long, value_enum, default_value = "storey")]
    pub null_fraction: NullFractionChoice,

    #[arg(long, value_enum, default_value = "plain")]
    pub variant: VariantChoice,

    /// Kernel bandwidth (default m^(-1/5))
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// FDP ceiling for `--method rate-ceiling`
    #[arg(long)]
    pub ceiling: Option<f64>,

    /// Envelope behind the confidence thresholds
    #[arg(long, value_enum, default_value = "exact")]
    pub envelope: EnvelopeChoice,

    #[command(flatten)]
    pub asymptotic: AsymptoticArgs,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value = "exact")]
    pub method: EnvelopeChoice,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Derive the minimum-rate threshold (the default when no ceiling is given)
    #[arg(long)]
    pub min_rate: bool,

    /// Derive the rate-ceiling threshold for this ceiling
    #[arg(long)]
    pub ceiling: Option<f64>,

    #[command(flatten)]
    pub asymptotic: AsymptoticArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Level of the lower confidence bound a*
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,

    #[arg(long, value_enum, default_value = "plain")]
    pub variant: VariantChoice,

    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Shape of the projection estimate of F
    #[arg(long, value_enum, default_value = "step")]
    pub shape: ShapeChoice,

    /// Estimate of a fed to the projection
    #[arg(long, value_enum, default_value = "storey")]
    pub null_fraction: NullFractionChoice,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Validation target name, e.g. fdp-mean
    #[arg(long)]
    pub target: String,

    /// TOML scenario replacing the target's default scenario
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// FDP_SEED takes precedence
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// 1 or 2
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: u8,

    /// Seed for the synthetic data of example 2 and its bridge quantile
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, default_value_t = 20_000)]
    pub reps: usize,

    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
}

/// What a command produced, in both output forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub csv: String,
    pub json: Value,
}

/// FDP_SEED when set, else the flag, else the default seed.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> CliResult<u64> {
    match env {
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))),
        None => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

fn seed_from_env(flag: Option<u64>) -> CliResult<u64> {
    resolve_seed(flag, std::env::var(SEED_ENV).ok().as_deref())
}

fn to_json<T: serde::Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Usage(format!("serialization failed: {e}")))
}

pub fn run(cli: &Cli) -> CliResult<Emission> {
    match &cli.command {
        Command::Threshold(args) => threshold(args),
        Command::Envelope(args) => envelope(args),
        Command::Estimate(args) => estimate(args),
        Command::Simulate(args) => simulate(args),
        Command::ReproduceExample(args) => reproduce(args),
    }
}

fn build_envelope(pvalues: &[f64], method: EnvelopeChoice, alpha: f64, args: &AsymptoticArgs) -> CliResult<EnvelopeResult> {
    match method {
        EnvelopeChoice::Exact => {
            let set = exact_confidence_set(pvalues, alpha)?;
            Ok(exact_envelope(&set, pvalues)?)
        }
        EnvelopeChoice::Asymptotic => {
            let m = pvalues.len();
            let t_min = args.t_min.unwrap_or(0.1 / m as f64);
            let w = match args.w {
                Some(w) => w,
                None => {
                    let seed = seed_from_env(args.seed)?;
                    // the quantile needs t_min in (0, 1); the envelope reports a bad t_min itself
                    let floor = t_min.clamp(f64::MIN_POSITIVE, 0.5);
                    brownian_sup_quantile(alpha / 2.0, floor, args.grid, args.reps, seed)?.value
                }
            };
            Ok(asymptotic_envelope(pvalues, args.t0, alpha, Some(t_min), w)?)
        }
    }
}

fn null_fraction(pvalues: &[f64], choice: NullFractionChoice, args: (f64, f64, Option<f64>)) -> CliResult<NullFractionEstimate> {
    let (alpha, t0, bandwidth) = args;
    Ok(match choice {
        NullFractionChoice::Storey => storey_a0(pvalues, t0)?,
        NullFractionChoice::Astar => astar_lower(&ecdf(pvalues, EcdfVariant::Plain)?, alpha)?,
        NullFractionChoice::Kernel => kernel_a_consistent(pvalues, bandwidth)?,
    })
}

fn threshold(args: &ThresholdArgs) -> CliResult<Emission> {
    let p = ingest(&args.input.input, args.input.format)?;
    let missing = |flag: &str| CliError::Usage(format!("--method {:?} needs {flag}", args.method).to_lowercase());
    let result = match args.method {
        ThresholdChoice::Uncorrected => simple_thresholds(&p, args.alpha, SimpleKind::Uncorrected)?,
        ThresholdChoice::Bonferroni => simple_thresholds(&p, args.alpha, SimpleKind::Bonferroni)?,
        ThresholdChoice::Fixed => {
            let t = args.at.ok_or_else(|| missing("--at"))?;
            simple_thresholds(&p, args.alpha, SimpleKind::Fixed(t))?
        }
        ThresholdChoice::FirstR => {
            let r = args.r.ok_or_else(|| missing("--r"))?;
            simple_thresholds(&p, args.alpha, SimpleKind::FirstR(r))?
        }
        ThresholdChoice::Bh => bh_threshold(&p, args.alpha)?,
        ThresholdChoice::Plugin => {
            let ahat = match args.a {
                Some(a) => NullFractionEstimate::fixed(a)?,
                None => null_fraction(&p, args.null_fraction, (args.alpha, args.asymptotic.t0, args.bandwidth))?,
            };
            plugin_threshold(&p, &ahat, args.alpha, args.variant.into())?
        }
        ThresholdChoice::BayesClassifier => bayes_classifier_threshold(&p, args.bandwidth)?,
        ThresholdChoice::RateCeiling => {
            let c = args.ceiling.ok_or_else(|| missing("--ceiling"))?;
            let env = build_envelope(&p, args.envelope, args.alpha, &args.asymptotic)?;
            confidence_thresholds(&env, Some(c))?
        }
        ThresholdChoice::MinimumRate => {
            let env = build_envelope(&p, args.envelope, args.alpha, &args.asymptotic)?;
            confidence_thresholds(&env, None)?
        }
    };
    Ok(Emission {
        csv: threshold_csv(std::slice::from_ref(&result)),
        json: to_json(&result)?,
    })
}

fn envelope(args: &EnvelopeArgs) -> CliResult<Emission> {
    let p = ingest(&args.input.input, args.input.format)?;
    let env = build_envelope(&p, args.method, args.alpha, &args.asymptotic)?;
    let mut thresholds = Vec::new();
    if args.min_rate || args.ceiling.is_none() {
        thresholds.push(confidence_thresholds(&env, None)?);
    }
    if let Some(c) = args.ceiling {
        thresholds.push(confidence_thresholds(&env, Some(c))?);
    }
    Ok(Emission {
        csv: format!("{}\n{}", envelope_csv(&env), threshold_csv(&thresholds)),
        json: json!({ "envelope": to_json(&env)?, "thresholds": to_json(&thresholds)? }),
    })
}

fn estimate(args: &EstimateArgs) -> CliResult<Emission> {
    let p = ingest(&args.input.input, args.input.format)?;
    let scalar = |quantity: &str, t: Option<f64>, value: f64| EstimateRow {
        quantity: quantity.to_string(),
        t,
        value,
    };
    let storey = storey_a0(&p, args.t0)?;
    let ghat = ecdf(&p, args.variant.into())?;
    let astar = astar_lower(&ecdf(&p, EcdfVariant::Plain)?, args.alpha)?;
    let kernel = match kernel_a_consistent(&p, args.bandwidth) {
        Ok(k) => Some(k),
        Err(FdpError::InsufficientData { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut rows = vec![scalar("storey_a", Some(args.t0), storey.value), scalar("astar_lower", None, astar.value)];
    if let Some(k) = &kernel {
        rows.push(scalar("kernel_a", None, k.value));
    }
    rows.extend(ghat.breakpoints().into_iter().map(|t| scalar("ghat", Some(t), ghat.eval(t))));

    let a_used = match args.null_fraction {
        NullFractionChoice::Storey => Some(storey.value),
        NullFractionChoice::Astar => Some(astar.value),
        NullFractionChoice::Kernel => kernel.map(|k| k.value),
    };
    let shape = match args.shape {
        ShapeChoice::Step => ProjectionShape::Step,
        ShapeChoice::Concave => ProjectionShape::Concave,
    };
    // F is not identified when the estimated weight is zero
    let projection = match a_used {
        Some(a) if a > 0.0 => Some(project_f(&ghat, a, shape)?),
        _ => None,
    };
    if let Some(h) = &projection {
        rows.extend(h.knots.iter().zip(&h.values).map(|(&t, &v)| scalar("f_hat", Some(t), v)));
    }
    Ok(Emission {
        csv: estimate_csv(&rows),
        json: json!({
            "storey": to_json(&storey)?,
            "astar": to_json(&astar)?,
            "kernel": to_json(&kernel)?,
            "ghat": to_json(&rows.iter().filter(|r| r.quantity == "ghat").collect::<Vec<_>>())?,
            "projection": to_json(&projection)?,
        }),
    })
}

fn simulate(args: &SimulateArgs) -> CliResult<Emission> {
    let target: ValidationTarget = args.target.parse()?;
    let mut scenario = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ScenarioConfig::from_toml(&text)?
        }
        None => target.default_scenario(),
    };
    if args.seed.is_some() || std::env::var_os(SEED_ENV).is_some() {
        scenario.seed = seed_from_env(args.seed)?;
    }
    if let Some(reps) = args.reps {
        scenario.reps = reps;
    }
    let report = run_validation(target, Some(&scenario))?;
    Ok(Emission {
        csv: report.to_csv(),
        json: to_json(&report)?,
    })
}

/// Agreement to the precision of the reported value.
fn within(quantity: &str, reported: f64, computed: f64, tol: f64) -> Comparison {
    Comparison {
        quantity: quantity.to_string(),
        reported,
        computed,
        agrees: (computed - reported).abs() <= tol,
    }
}

/// Agreement up to a factor of ten, for quantities of a fresh random sample.
fn same_order(quantity: &str, reported: f64, computed: f64) -> Comparison {
    Comparison {
        quantity: quantity.to_string(),
        reported,
        computed,
        agrees: computed > 0.0 && (computed / reported).log10().abs() <= 1.0,
    }
}

fn reproduce(args: &ReproduceArgs) -> CliResult<Emission> {
    let alpha = 0.05;
    let rows = if args.example == 1 {
        let p = EXAMPLE1;
        let set = exact_confidence_set(&p, alpha)?;
        let env = exact_envelope(&set, &p)?;
        let bh = bh_threshold(&p, alpha)?;
        let ceiling = confidence_thresholds(&env, Some(0.25))?;
        let min = confidence_thresholds(&env, None)?;
        let at_bh = env.eval(bh.t).unwrap_or(f64::NAN);
        let floor = env.gamma_bar.values().iter().copied().fold(f64::INFINITY, f64::min);
        vec![
            within("bh_threshold", 0.0095, bh.t, 0.0),
            within("bh_rejections", 4.0, bh.rejected.unwrap_or(0) as f64, 0.0),
            Comparison {
                quantity: "envelope_minimum_at_least".into(),
                reported: 0.05,
                computed: floor,
                agrees: floor >= 0.05,
            },
            Comparison {
                quantity: "envelope_at_bh_at_most".into(),
                reported: 0.25,
                computed: at_bh,
                agrees: at_bh <= 0.25,
            },
            within("rate_ceiling_0.25_threshold", 0.4262, ceiling.t, 0.0),
            within("minimum_rate_threshold", 0.324, min.t, 5e-4),
            within("minimum_rate_z", 0.111, min.z.unwrap_or(f64::NAN), 5e-4),
        ]
    } else {
        let seed = seed_from_env(args.seed)?;
        let sample = sample_from_model(&example2_model()?, EXAMPLE2_M, seed, 0)?;
        let p = sample.pvalues();
        let asym_args = AsymptoticArgs {
            t0: 0.5,
            t_min: None,
            seed: Some(seed),
            reps: args.reps,
            grid: args.grid,
            w: None,
        };
        let exact = build_envelope(p, EnvelopeChoice::Exact, alpha, &asym_args)?;
        let asym = build_envelope(p, EnvelopeChoice::Asymptotic, alpha, &asym_args)?;
        let min = confidence_thresholds(&exact, None)?;
        vec![
            same_order("asymptotic_rate_ceiling_threshold", 0.00062, confidence_thresholds(&asym, Some(0.05))?.t),
            same_order("exact_rate_ceiling_threshold", 0.00046, confidence_thresholds(&exact, Some(0.05))?.t),
            same_order("exact_minimum_rate_threshold", 0.00039, min.t),
            same_order("exact_minimum_rate_z", 0.011, min.z.unwrap_or(f64::NAN)),
        ]
    };
    Ok(Emission {
        csv: comparison_csv(&rows),
        json: to_json(&rows)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(None, None).unwrap(), DEFAULT_SEED);
        assert_eq!(resolve_seed(Some(7), None).unwrap(), 7);
        assert_eq!(resolve_seed(Some(7), Some("11")).unwrap(), 11);
        assert_eq!(resolve_seed(Some(7), Some("x")).unwrap_err().kind(), "usage");
    }

    #[test]
    fn example_one_agrees() {
        let cli = Cli::parse_from(["fdp", "reproduce-example", "1"]);
        let out = run(&cli).unwrap();
        for row in out.json.as_array().unwrap() {
            assert_eq!(row["agrees"], true, "{row}");
        }
        assert!(out.csv.contains("bh_threshold,0.0095,0.0095,true"));
    }

    #[test]
    fn missing_method_parameters_are_usage_errors() {
        let dir = std::env::temp_dir().join(format!("fdp-cli-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.txt");
        std::fs::write(&path, "0.01\n0.2\n").unwrap();
        let path = path.to_str().unwrap();
        for method in ["fixed", "first-r", "rate-ceiling"] {
            let cli = Cli::parse_from(["fdp", "threshold", "--input", path, "--method", method]);
            assert_eq!(run(&cli).unwrap_err().kind(), "usage", "{method}");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
