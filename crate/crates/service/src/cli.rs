use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use promptrec::data::{generate_dataset, load_dataset, save_dataset, DedupPolicy, GeneratorConfig};
use promptrec::engine::{EngineConfig, PredictionRule};
use promptrec::eval::{cross_validate_thresholds, format_table, EmptyConvention, EvalConfig, PrecisionBase};
use promptrec::text::{MatchMethod, DEFAULT_MIN_SCORE};
use promptrec::{Execution, Recommender, RecommenderConfig};

use crate::{api, Service, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "promptrec",
    version,
    about = "Follow-up prompt recommendation with item-item collaborative filtering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a ratings CSV.
    Generate(GenerateArgs),
    /// K-fold cross-validation report.
    Evaluate(EvaluateArgs),
    /// One-shot recommendations for a prompt.
    Recommend(RecommendArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Ratings to draw [default: 3612]
    #[arg(long)]
    pub entries: Option<usize>,
    /// Distinct prompts [default: 60]
    #[arg(long)]
    pub prompts: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON generator settings; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Never repeat a (context, target) pair.
    #[arg(long)]
    pub unique_pairs: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dedup {
    Mean,
    Last,
    First,
}

impl From<Dedup> for DedupPolicy {
    fn from(d: Dedup) -> Self {
        match d {
            Dedup::Mean => DedupPolicy::Mean,
            Dedup::Last => DedupPolicy::Last,
            Dedup::First => DedupPolicy::First,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Rule {
    WeightedAverage,
    MeanCentered,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Neighbors per prediction.
    #[arg(long = "k", default_value_t = 40)]
    pub k: usize,
    /// Shared raters needed for a similarity to be defined.
    #[arg(long, default_value_t = 2)]
    pub min_support: usize,
    #[arg(long, value_enum, default_value = "mean")]
    pub dedup: Dedup,
    #[arg(long, value_enum, default_value = "weighted-average")]
    pub rule: Rule,
    /// Received ratings a prompt needs to appear in popular fallbacks.
    #[arg(long, default_value_t = 1)]
    pub min_received: usize,
}

impl EngineArgs {
    fn engine(&self) -> EngineConfig {
        EngineConfig {
            k_neighbors: self.k,
            min_support: self.min_support,
            rule: match self.rule {
                Rule::WeightedAverage => PredictionRule::WeightedAverage,
                Rule::MeanCentered => PredictionRule::MeanCentered,
            },
            min_received: self.min_received,
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Base {
    Gated,
    AllTopN,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Empty {
    One,
    Zero,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    /// Relevance threshold; repeat for one report row per value.
    #[arg(long = "threshold", default_values_t = [3.0])]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Which top-N entries the precision denominator counts.
    #[arg(long, value_enum, default_value = "gated")]
    pub precision_base: Base,
    /// Precision/recall reported for an empty denominator.
    #[arg(long, value_enum, default_value = "one")]
    pub empty: Empty,
    /// Run folds and similarity builds on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub prompt: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MIN_SCORE)]
    pub min_score: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, env = "PROMPTREC_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: String,
    #[arg(long, default_value_t = DEFAULT_MIN_SCORE)]
    pub min_score: f64,
    /// Keep accepted ratings in memory only.
    #[arg(long)]
    pub no_persist: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args, out),
        Command::Evaluate(args) => evaluate(args, out),
        Command::Recommend(args) => recommend(args, out),
        Command::Serve(args) => serve(args),
    }
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut config: GeneratorConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => GeneratorConfig::new(3612, 60, 1),
    };
    if let Some(n) = args.entries {
        config.n_entries = n;
    }
    if let Some(n) = args.prompts {
        config.n_prompts = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.unique_pairs |= args.unique_pairs;
    let dataset = generate_dataset(&config)?;
    save_dataset(&dataset, &args.out)?;
    writeln!(
        out,
        "wrote {} ratings over {} prompts to {}",
        dataset.len(),
        dataset.catalog.len(),
        args.out.display()
    )?;
    Ok(())
}

fn evaluate(args: EvaluateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if args.thresholds.is_empty() {
        bail!("at least one --threshold is required");
    }
    let dataset = load_dataset(&args.data)?;
    let config = EvalConfig {
        folds: args.folds,
        top_n: args.top_n,
        threshold: args.thresholds[0],
        seed: args.seed,
        engine: args.engine.engine(),
        dedup: args.engine.dedup.into(),
        empty: match args.empty {
            Empty::One => EmptyConvention::One,
            Empty::Zero => EmptyConvention::Zero,
        },
        precision_base: match args.precision_base {
            Base::Gated => PrecisionBase::Gated,
            Base::AllTopN => PrecisionBase::AllTopN,
        },
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let reports = cross_validate_thresholds(&dataset, &config, &args.thresholds)?;
    match args.format {
        Format::Table => write!(out, "{}", format_table(&reports))?,
        Format::Json if reports.len() == 1 => writeln!(out, "{}", serde_json::to_string_pretty(&reports[0])?)?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?,
    }
    Ok(())
}

fn recommender_config(engine: &EngineArgs, min_score: f64) -> RecommenderConfig {
    RecommenderConfig {
        engine: engine.engine(),
        dedup: engine.dedup.into(),
        min_score,
    }
}

fn recommend(args: RecommendArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.data)?;
    let rec: Recommender = Recommender::from_dataset(&dataset, recommender_config(&args.engine, args.min_score), Execution::default())?;
    let outcome = rec.recommend(&args.prompt, args.n, args.threshold)?;
    if let Format::Json = args.format {
        writeln!(out, "{}", serde_json::to_string_pretty(&outcome)?)?;
        return Ok(());
    }
    let r = &outcome.resolved;
    match (&r.matched, r.method) {
        (Some(m), MatchMethod::Exact) => writeln!(out, "matched exactly: {}", m.text)?,
        (Some(m), _) => writeln!(out, "matched by lexical similarity ({:.3}): {}", r.score, m.text)?,
        (None, _) => writeln!(out, "no matching prompt (best score {:.3}); showing popular prompts", r.score)?,
    }
    if outcome.items.is_empty() {
        writeln!(out, "no recommendations")?;
    }
    for item in &outcome.items {
        writeln!(
            out,
            "{:>3}. {:.2}  {:<16}  {}",
            item.rank,
            item.predicted,
            item.provenance.as_str(),
            item.text
        )?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = ServiceConfig {
        listen: args.listen,
        data: args.data,
        recommender: recommender_config(&args.engine, args.min_score),
        persist: !args.no_persist,
        execution: Execution::default(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listen = config.listen.clone();
        let service = Arc::new(tokio::task::spawn_blocking(move || Service::open(config)).await??);
        let health = service.health();
        let listener = tokio::net::TcpListener::bind(&listen)
            .await
            .with_context(|| format!("binding {listen}"))?;
        eprintln!(
            "serving {} prompts / {} ratings on http://{}",
            health.n_prompts,
            health.n_ratings,
            listener.local_addr()?
        );
        api::serve(service, listener).await?;
        Ok(())
    })
}
