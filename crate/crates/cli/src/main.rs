use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbdump::ntparse::{ParseOptions, Style};
use fbdump::pipeline::{self, GenerateSource, PipelineError, RunConfig, TrimInputs};
use fbdump::schema::DomainGroups;
use fbdump::slicer::Granularity;
use fbdump::synthgen::GeneratorSpec;

/// Slice, profile and deduplicate Freebase N-Triples dumps.
#[derive(Parser)]
#[command(name = "fbdump", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Input dump, plain or gzip.
    #[arg(long, global = true, env = "FBDUMP_INPUT")]
    input: Option<PathBuf>,
    /// Output directory shared by all stages.
    #[arg(long, global = true, env = "FBDUMP_OUT", default_value = "out")]
    out: PathBuf,
    /// Slice plan TSV used instead of a computed one.
    #[arg(long, global = true, env = "FBDUMP_PLAN")]
    plan: Option<PathBuf>,
    #[arg(long, global = true, env = "FBDUMP_GRANULARITY", value_enum, default_value = "domain")]
    granularity: GranularityArg,
    /// Spelling of normalized paths.
    #[arg(long, global = true, env = "FBDUMP_STYLE", value_enum, default_value = "dots")]
    style: StyleArg,
    /// Reject lines with whitespace runs instead of single tabs.
    #[arg(long, global = true, conflicts_with = "lenient", env = "FBDUMP_STRICT")]
    strict: bool,
    #[arg(long, global = true)]
    lenient: bool,
    #[arg(long, global = true, env = "FBDUMP_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Memory per external sort, in bytes.
    #[arg(long, global = true, env = "FBDUMP_SORT_MEM", default_value_t = 64 << 20)]
    sort_mem: usize,
    /// Gzip the normalized dump or generated dump.
    #[arg(long, global = true, env = "FBDUMP_GZIP")]
    gzip: bool,
    /// Print progress lines to stderr.
    #[arg(long, global = true, env = "FBDUMP_PROGRESS")]
    progress: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Domain,
    Predicate,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Dots,
    Slashes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Reference domain mix and identifier rates.
    Reference,
    /// The bicycles schema fixture.
    Bicycles,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize the dump to tab-separated triples.
    Prepare,
    /// Plan and write slices plus identifier slices.
    Slice,
    /// Domain, identifier and topic statistics.
    Stats,
    /// Duplicate detection, mediator compaction and trim summary.
    Dedup {
        /// JSON counts to summarize instead of reading slices.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Reconstruct one domain's schema.
    Schema {
        #[arg(long)]
        domain: String,
    },
    /// Write a synthetic dump and its ground truth.
    Generate {
        /// Generator spec as JSON.
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "reference")]
        preset: Preset,
        /// Lines to generate with a preset.
        #[arg(long, default_value_t = 1_000_000)]
        total: u64,
        #[arg(long, env = "FBDUMP_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Combine stage reports.
    Report,
}

fn config(c: &Common) -> RunConfig {
    RunConfig {
        input: c.input.clone(),
        out: c.out.clone(),
        parse: if c.strict { ParseOptions::strict() } else { ParseOptions::lenient() },
        style: match c.style {
            StyleArg::Dots => Style::Dots,
            StyleArg::Slashes => Style::Slashes,
        },
        gzip_out: c.gzip,
        workers: c.workers,
        sort_mem: c.sort_mem,
        granularity: match c.granularity {
            GranularityArg::Domain => Granularity::Domain,
            GranularityArg::Predicate => Granularity::Predicate,
        },
        plan: c.plan.clone(),
        progress: c.progress,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let cfg = config(&cli.common);
    match cli.command {
        Command::Prepare => {
            let r = pipeline::cmd_prepare(&cfg)?;
            println!(
                "{} lines: {} triples, {} malformed, {} skipped; size ratio {:.4}",
                r.counters.lines, r.counters.ok, r.counters.malformed, r.counters.skipped, r.size_ratio
            );
        }
        Command::Slice => {
            let r = pipeline::cmd_slice(&cfg)?;
            println!(
                "{} slices, {} residual triples, {} identifier slices",
                r.slices.slices.len(),
                r.slices.residual.triple_count,
                r.identifiers.slices.len()
            );
        }
        Command::Stats => {
            let r = pipeline::cmd_stats(&cfg, DomainGroups::shipped())?;
            println!(
                "{} triples, identifier share {}%, {} topics",
                r.total_triples, r.identifiers.identifier_percent, r.topics.topics
            );
        }
        Command::Dedup { counts } => {
            let inputs: Option<TrimInputs> = counts.as_ref().map(read_json).transpose()?;
            let r = pipeline::cmd_dedup(&cfg, inputs.as_ref())?;
            println!("{}", r.trim.identity);
        }
        Command::Schema { domain } => {
            let s = pipeline::cmd_schema(&cfg, &domain)?;
            println!("/{}: {} types, {} properties", s.domain, s.types.len(), s.properties.len());
        }
        Command::Generate { spec, preset, total, seed } => {
            let source = match (spec, preset) {
                (Some(path), _) => GenerateSource::Spec(read_json::<GeneratorSpec>(&path)?),
                (None, Preset::Reference) => GenerateSource::Spec(GeneratorSpec::reference_mix(seed, total)),
                (None, Preset::Bicycles) => GenerateSource::Bicycles,
            };
            pipeline::cmd_generate(&cfg, &source)?;
            println!("wrote {}", cfg.out.display());
        }
        Command::Report => {
            let r = pipeline::cmd_report(&cfg)?;
            print!("{}", pipeline::render_report(&r));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
