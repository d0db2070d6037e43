//! Pipeline stages behind the command-line tool. Each stage reads the
//! manifests of the previous one and writes its own outputs under a single
//! output directory:
//!
//! ```text
//! out/normalized.tsv        prepare
//! out/slices/               slice: plan slices, manifest.json, plan.tsv, histogram.tsv
//! out/identifiers/          slice: identifier and auxiliary slices
//! out/stats/                stats
//! out/dedup/                dedup
//! out/schema/<domain>.*     schema
//! out/report.json           report
//! ```

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dedup::{
    collect_mediator_groups, detect_owl_duplicates, detect_reverse_pairs, trim_summary, CompactionCounts, Compactor,
    DedupError, DuplicateKind, DuplicateReport, MediatorCounts, TrimReport,
};
use crate::extsort::{SortConfig, MIN_SORT_MEMORY};
use crate::ntparse::{
    open_path, write_malformed_record, write_triple, MalformedRecord, ParseOptions, ParseOutcome, StreamCounters,
    StreamOptions, Style, TripleStream,
};
use crate::profiler::{
    domain_stats, estimate_topics, identifier_stats, render_domain_tsv, render_identifier_tsv, DomainStatsRow,
    IdentifierTable, ProfilerError, TopicEstimate,
};
use crate::progress::Progress;
use crate::schema::{domain_of, known, parse_schema_path, DomainGroups, IdentifierSlice};
use crate::schemarec::{reconstruct_schema, render_listing, DomainSchema, SchemaRecError, SchemaSources};
use crate::slicer::{
    auxiliary_selectors, build_slice_plan, check_unique, enumerate_predicates, identifier_selectors, read_manifest,
    slice_labeled, write_manifest, Granularity, HistogramConfig, RunManifest, Selector, SliceManifest, SliceOptions,
    SlicePlan, SlicerError, MANIFEST_FILE,
};
use crate::synthgen::{fixtures, write_dump, GeneratorSpec, GroundTruth, SynthError};

pub const NORMALIZED_FILE: &str = "normalized.tsv";
pub const NORMALIZED_FILE_GZ: &str = "normalized.tsv.gz";
pub const MALFORMED_FILE: &str = "malformed.tsv";
pub const PREPARE_REPORT: &str = "prepare.json";
pub const SLICES_DIR: &str = "slices";
pub const IDENTIFIERS_DIR: &str = "identifiers";
pub const STATS_DIR: &str = "stats";
pub const DEDUP_DIR: &str = "dedup";
pub const SCHEMA_DIR: &str = "schema";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("missing prerequisite: {0}")]
    Prerequisite(String),
    #[error(transparent)]
    Slicer(#[from] SlicerError),
    #[error(transparent)]
    Profiler(#[from] ProfilerError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Schema(#[from] SchemaRecError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl PipelineError {
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const CONTRACT: i32 = 4;
    pub const PREREQUISITE: i32 = 5;

    pub fn exit_code(&self) -> i32 {
        use PipelineError::*;
        match self {
            Usage(_) => Self::USAGE,
            Io { .. } => Self::IO,
            Contract(_) => Self::CONTRACT,
            Prerequisite(_) => Self::PREREQUISITE,
            Slicer(e) => match e {
                SlicerError::InvalidPlan(_)
                | SlicerError::InvalidSelector(_)
                | SlicerError::FilenameCollision { .. } => Self::USAGE,
                SlicerError::Manifest { .. } => Self::PREREQUISITE,
                _ => Self::IO,
            },
            Profiler(ProfilerError::ContractViolation { .. }) => Self::CONTRACT,
            Profiler(_) => Self::IO,
            Dedup(e) => match e {
                DedupError::Io { .. } | DedupError::Stream { .. } => Self::IO,
                _ => Self::CONTRACT,
            },
            Schema(SchemaRecError::Schema(_)) => Self::CONTRACT,
            Schema(_) => Self::IO,
            Synth(SynthError::Io { .. }) => Self::IO,
            Synth(_) => Self::USAGE,
        }
    }
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_owned(), source }
}

/// Settings shared by every stage.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Dump to read; stages default to the previous stage's output.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub parse: ParseOptions,
    pub style: Style,
    pub gzip_out: bool,
    pub workers: usize,
    /// Bytes an external sort holds in memory; at least [`MIN_SORT_MEMORY`].
    pub sort_mem: usize,
    pub granularity: Granularity,
    pub plan: Option<PathBuf>,
    pub progress: bool,
}

impl RunConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: None,
            out: out.into(),
            parse: ParseOptions::lenient(),
            style: Style::Dots,
            gzip_out: false,
            workers: 1,
            sort_mem: SortConfig::default().mem_budget,
            granularity: Granularity::Domain,
            plan: None,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.workers == 0 {
            return Err(PipelineError::Usage("--workers must be at least 1".into()));
        }
        if self.sort_mem < MIN_SORT_MEMORY {
            return Err(PipelineError::Usage(format!("--sort-mem must be at least {MIN_SORT_MEMORY} bytes")));
        }
        Ok(())
    }

    fn sort(&self) -> SortConfig {
        SortConfig::with_budget(self.sort_mem)
    }

    fn dir(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let json = serde_json::to_string_pretty(value).expect("reports serialize");
    std::fs::write(path, json + "\n").map_err(io_at(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, hint: &str) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| PipelineError::Prerequisite(format!("{} not found; {hint}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Contract(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(path).map_err(io_at(path))
}

fn file_size(path: &Path) -> Option<u64> {
    std::fs::metadata(path).ok().map(|m| m.len())
}

/// Peak resident set size of this process in KiB, where the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Wall-clock and memory of one stage, kept apart from deterministic outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub elapsed_ms: u64,
    pub peak_rss_kib: Option<u64>,
}

fn write_timing(cfg: &RunConfig, stage: &str, started: Instant) -> Result<(), PipelineError> {
    let timing = StageTiming {
        stage: stage.to_owned(),
        elapsed_ms: started.elapsed().as_millis() as u64,
        peak_rss_kib: peak_rss_kib(),
    };
    write_json(&cfg.out.join(format!("{stage}.timing.json")), &timing)
}

fn output_writer(path: &Path, gzip: bool) -> Result<Box<dyn Write>, PipelineError> {
    let file = BufWriter::with_capacity(1 << 18, File::create(path).map_err(io_at(path))?);
    Ok(if gzip { Box::new(flate2::write::GzEncoder::new(file, flate2::Compression::fast())) } else { Box::new(file) })
}

fn stream_input(path: &Path, parse: ParseOptions) -> Result<TripleStream<Box<dyn io::BufRead + Send>>, PipelineError> {
    let reader = open_path(path).map_err(io_at(path))?;
    Ok(TripleStream::new(reader, StreamOptions { parse }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareReport {
    pub schema_version: u32,
    pub input: String,
    pub output: String,
    pub style: String,
    pub counters: StreamCounters,
    pub output_lines: u64,
    /// Decompressed input bytes.
    pub input_bytes: u64,
    /// Output bytes before any compression.
    pub output_bytes: u64,
    /// `output_bytes / input_bytes`.
    pub size_ratio: f64,
}

/// Rewrites the dump as normalized tab-separated triples and reports the
/// malformed lines. Fails when the output line count differs from the
/// input's well-formed count.
pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareReport, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let input = cfg.input.clone().ok_or_else(|| PipelineError::Usage("prepare needs --input".into()))?;
    create_dir(&cfg.out)?;
    let out_name = if cfg.gzip_out { NORMALIZED_FILE_GZ } else { NORMALIZED_FILE };
    let out_path = cfg.out.join(out_name);
    let malformed_path = cfg.out.join(MALFORMED_FILE);
    let mut out = output_writer(&out_path, cfg.gzip_out)?;
    let mut malformed = output_writer(&malformed_path, false)?;
    let mut stream = stream_input(&input, cfg.parse)?;
    let mut progress = Progress::new("prepare", file_size(&input), cfg.progress);

    let mut buf = Vec::with_capacity(1 << 16);
    let mut raw_line = Vec::new();
    let (mut output_lines, mut output_bytes) = (0u64, 0u64);
    loop {
        let outcome = stream.next_with_raw(&mut |raw| {
            raw_line.clear();
            raw_line.extend_from_slice(raw);
        });
        let Some(outcome) = outcome else { break };
        let outcome = outcome.map_err(|e| PipelineError::Io { path: input.clone(), source: io::Error::other(e) })?;
        match outcome {
            ParseOutcome::Ok(t) => {
                let before = buf.len();
                write_triple(&t, cfg.style, &mut buf);
                buf.push(b'\n');
                output_bytes += (buf.len() - before) as u64;
                output_lines += 1;
            }
            ParseOutcome::Malformed { line_no, reason } => {
                let rec = MalformedRecord::new(line_no, reason, &raw_line);
                write_malformed_record(&mut malformed, &rec).map_err(io_at(&malformed_path))?;
            }
            ParseOutcome::Skipped(_) => {}
        }
        if buf.len() >= 1 << 16 {
            out.write_all(&buf).map_err(io_at(&out_path))?;
            buf.clear();
            let c = stream.counters();
            progress.update(c.bytes, c.lines);
        }
    }
    out.write_all(&buf).map_err(io_at(&out_path))?;
    out.flush().map_err(io_at(&out_path))?;
    drop(out);
    malformed.flush().map_err(io_at(&malformed_path))?;
    let counters = *stream.counters();
    progress.finish(counters.bytes, counters.lines);
    if output_lines != counters.ok {
        return Err(PipelineError::Contract(format!(
            "wrote {output_lines} triples but parsed {} well-formed lines",
            counters.ok
        )));
    }
    let report = PrepareReport {
        schema_version: crate::SCHEMA_VERSION,
        input: input.display().to_string(),
        output: out_name.to_owned(),
        style: match cfg.style {
            Style::Dots => "dots".into(),
            Style::Slashes => "slashes".into(),
        },
        counters,
        output_lines,
        input_bytes: counters.bytes,
        output_bytes,
        size_ratio: if counters.bytes == 0 { 0.0 } else { output_bytes as f64 / counters.bytes as f64 },
    };
    write_json(&cfg.out.join(PREPARE_REPORT), &report)?;
    write_timing(cfg, "prepare", started)?;
    Ok(report)
}

/// The explicit input, else the prepared dump.
fn slice_input(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    if let Some(p) = &cfg.input {
        return Ok(p.clone());
    }
    [NORMALIZED_FILE, NORMALIZED_FILE_GZ].iter().map(|f| cfg.out.join(f)).find(|p| p.exists()).ok_or_else(|| {
        PipelineError::Prerequisite(format!("no prepared dump in {}; run prepare first", cfg.out.display()))
    })
}

fn slice_options(cfg: &RunConfig) -> SliceOptions {
    SliceOptions { parse: cfg.parse, workers: cfg.workers, ..SliceOptions::default() }
}

#[derive(Debug, Clone)]
pub struct SliceOutputs {
    pub slices: RunManifest,
    pub identifiers: RunManifest,
}

/// Enumerates predicates, plans (or loads a plan), slices, then extracts the
/// identifier and auxiliary slices.
pub fn cmd_slice(cfg: &RunConfig) -> Result<SliceOutputs, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let input = slice_input(cfg)?;
    let slices_dir = cfg.dir(SLICES_DIR);
    let ids_dir = cfg.dir(IDENTIFIERS_DIR);
    create_dir(&slices_dir)?;
    create_dir(&ids_dir)?;

    let stream = stream_input(&input, cfg.parse)?;
    let hist_cfg = HistogramConfig { sort: cfg.sort(), ..HistogramConfig::default() };
    let hist = enumerate_predicates(stream.triples(), &hist_cfg)?;
    std::fs::write(slices_dir.join("histogram.tsv"), hist.to_tsv()).map_err(io_at(&slices_dir))?;

    let plan = match &cfg.plan {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_at(p))?;
            let plan = SlicePlan::from_tsv(&text)?;
            check_unique(&plan)?;
            plan
        }
        None => build_slice_plan(&hist, cfg.granularity),
    };
    plan.validate(Some(&hist))?;
    std::fs::write(slices_dir.join("plan.tsv"), plan.to_tsv()).map_err(io_at(&slices_dir))?;

    let size = file_size(&input);
    let opts = slice_options(cfg);
    let mut progress = Progress::new("slice", size, cfg.progress);
    let mut reader = open_path(&input).map_err(io_at(&input))?;
    let run = slice_labeled(&mut reader, &plan, &[], &slices_dir, &opts, &mut |c| progress.update(c.bytes, c.lines))?;
    progress.finish(run.counters.bytes, run.counters.lines);
    if run.total_triples() != run.counters.ok {
        return Err(PipelineError::Contract(format!(
            "slices hold {} triples but the input has {} well-formed lines",
            run.total_triples(),
            run.counters.ok
        )));
    }
    let slices = RunManifest::new("slices", &plan.specs, &run);
    write_manifest(&slices_dir, &slices, &run)?;

    let mut selectors = identifier_selectors();
    selectors.extend(auxiliary_selectors());
    let labels: Vec<&str> = selectors.iter().map(|(l, _)| *l).collect();
    let id_plan = SlicePlan::from_selectors(selectors.iter().map(|(_, s)| s.clone()));
    let id_opts = SliceOptions { write_residual: false, ..opts };
    let mut progress = Progress::new("identifiers", size, cfg.progress);
    let mut reader = open_path(&input).map_err(io_at(&input))?;
    let id_run =
        slice_labeled(&mut reader, &id_plan, &labels, &ids_dir, &id_opts, &mut |c| progress.update(c.bytes, c.lines))?;
    progress.finish(id_run.counters.bytes, id_run.counters.lines);
    let identifiers = RunManifest::new("identifiers", &id_plan.specs, &id_run);
    write_manifest(&ids_dir, &identifiers, &id_run)?;
    write_timing(cfg, "slice", started)?;
    Ok(SliceOutputs { slices, identifiers })
}

fn load_manifest(dir: &Path) -> Result<RunManifest, PipelineError> {
    if !dir.join(MANIFEST_FILE).exists() {
        return Err(PipelineError::Prerequisite(format!("{} has no manifest; run slice first", dir.display())));
    }
    Ok(read_manifest(dir)?)
}

fn labelled_path(dir: &Path, manifest: &RunManifest, label: &str) -> Result<PathBuf, PipelineError> {
    let m = manifest.by_label(label).ok_or_else(|| {
        PipelineError::Prerequisite(format!("no {label} slice in {}; run slice first", dir.display()))
    })?;
    let rel = m.path.as_ref().ok_or_else(|| PipelineError::Contract(format!("{label} slice was not written")))?;
    Ok(dir.join(rel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub total_triples: u64,
    pub domains: Vec<DomainStatsRow>,
    pub identifiers: IdentifierTable,
    pub topics: TopicEstimate,
}

impl StatsReport {
    /// Triple count per domain key, for domain-granular runs.
    pub fn domain_counts(&self) -> std::collections::BTreeMap<String, u64> {
        self.domains
            .iter()
            .filter_map(|r| match Selector::parse(&r.selector) {
                Ok(Selector::Domain(d)) => Some((d, r.triple_count)),
                _ => None,
            })
            .collect()
    }

    /// Triple count per identifier slice label.
    pub fn identifier_counts(&self) -> std::collections::BTreeMap<String, u64> {
        self.identifiers.rows.iter().map(|r| (r.slice.clone(), r.triple_count)).collect()
    }
}

/// Domain and identifier tables plus the topic estimate.
pub fn cmd_stats(cfg: &RunConfig, groups: &DomainGroups) -> Result<StatsReport, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let slices_dir = cfg.dir(SLICES_DIR);
    let ids_dir = cfg.dir(IDENTIFIERS_DIR);
    let slices = load_manifest(&slices_dir)?;
    let identifiers = load_manifest(&ids_dir)?;
    let total = slices.total_triples();

    let mut all: Vec<SliceManifest> = slices.slices.clone();
    all.push(slices.residual.clone());
    let domains = domain_stats(&all, groups);
    let id_labels: Vec<&str> = IdentifierSlice::ALL.iter().map(|s| s.label()).collect();
    let id_manifests: Vec<SliceManifest> = identifiers
        .slices
        .iter()
        .filter(|m| m.label.as_deref().is_some_and(|l| id_labels.contains(&l)))
        .cloned()
        .collect();
    let id_table = identifier_stats(&id_manifests, total);
    let name_slice = labelled_path(&ids_dir, &identifiers, IdentifierSlice::Name.label())?;
    let topics = estimate_topics(&name_slice, &cfg.sort())?;

    let stats_dir = cfg.dir(STATS_DIR);
    create_dir(&stats_dir)?;
    let report = StatsReport {
        schema_version: crate::SCHEMA_VERSION,
        total_triples: total,
        domains,
        identifiers: id_table,
        topics,
    };
    let write = |name: &str, text: String| {
        let p = stats_dir.join(name);
        std::fs::write(&p, text).map_err(io_at(&p))
    };
    write("domains.tsv", render_domain_tsv(&report.domains))?;
    write("identifiers.tsv", render_identifier_tsv(&report.identifiers))?;
    write_json(&stats_dir.join("domains.json"), &report.domains)?;
    write_json(&stats_dir.join("identifiers.json"), &report.identifiers)?;
    write_json(&stats_dir.join("topics.json"), &report.topics)?;
    write_json(&stats_dir.join("stats.json"), &report)?;
    write_timing(cfg, "stats", started)?;
    Ok(report)
}

/// Published or hand-entered counts for a trim summary without slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimInputs {
    pub total_triples: u64,
    pub owl_label_duplicates: u64,
    pub owl_type_duplicates: u64,
    pub reverse_duplicates: u64,
    pub mediator_triples: u64,
    pub compacted_triples: u64,
}

impl TrimInputs {
    pub fn summarize(&self) -> Result<TrimReport, DedupError> {
        let report = |kind, duplicate_count| DuplicateReport {
            kind,
            duplicate_count,
            base_slice_count: duplicate_count,
            mirror_slice_count: duplicate_count,
        };
        let reports = [
            report(DuplicateKind::OwlLabel, self.owl_label_duplicates),
            report(DuplicateKind::OwlType, self.owl_type_duplicates),
            report(DuplicateKind::ReverseInstance, self.reverse_duplicates),
        ];
        let mediator =
            MediatorCounts { mediator_triples: self.mediator_triples, compacted_triples: self.compacted_triples };
        trim_summary(&reports, mediator, self.total_triples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub schema_version: u32,
    pub duplicates: Vec<DuplicateReport>,
    pub compaction: Option<CompactionCounts>,
    pub trim: TrimReport,
}

/// Duplicate detection, mediator compaction and the trim summary. With
/// `counts`, only the summary of those counts is produced.
pub fn cmd_dedup(cfg: &RunConfig, counts: Option<&TrimInputs>) -> Result<DedupReport, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let dedup_dir = cfg.dir(DEDUP_DIR);
    let report = match counts {
        Some(c) => DedupReport {
            schema_version: crate::SCHEMA_VERSION,
            duplicates: Vec::new(),
            compaction: None,
            trim: c.summarize()?,
        },
        None => {
            let ids_dir = cfg.dir(IDENTIFIERS_DIR);
            let ids = load_manifest(&ids_dir)?;
            let slice = |label: &str| labelled_path(&ids_dir, &ids, label);
            let sort = cfg.sort();
            let duplicates = vec![
                detect_owl_duplicates(&slice("name")?, &slice("owl_label")?, DuplicateKind::OwlLabel, &sort)?,
                detect_owl_duplicates(&slice("type")?, &slice("owl_type")?, DuplicateKind::OwlType, &sort)?,
                detect_reverse_pairs(&slice("type")?, &slice("instance")?, &sort)?,
            ];
            create_dir(&dedup_dir)?;
            let (links, attrs) = (slice("notable_for")?, slice("notable_attrs")?);
            let groups = collect_mediator_groups(&[links.as_path(), attrs.as_path()], &sort)?;
            let compacted_path = dedup_dir.join("compacted.tsv");
            let passthrough_path = dedup_dir.join("passthrough.tsv");
            let mut compacted = output_writer(&compacted_path, false)?;
            let mut passthrough = output_writer(&passthrough_path, false)?;
            let mut compactor = Compactor::new();
            let mut line = Vec::with_capacity(256);
            for g in groups {
                let g = g?;
                match compactor.push(&g) {
                    Some(t) => {
                        line.clear();
                        write_triple(&t, Style::Dots, &mut line);
                        line.push(b'\n');
                        compacted.write_all(&line).map_err(io_at(&compacted_path))?;
                    }
                    None => {
                        for t in &g.triples {
                            line.clear();
                            write_triple(t, Style::Dots, &mut line);
                            line.push(b'\n');
                            passthrough.write_all(&line).map_err(io_at(&passthrough_path))?;
                        }
                    }
                }
            }
            compacted.flush().map_err(io_at(&compacted_path))?;
            passthrough.flush().map_err(io_at(&passthrough_path))?;
            let counts = compactor.counts();
            let trim = trim_summary(&duplicates, MediatorCounts::from(&counts), ids.input.ok)?;
            DedupReport { schema_version: crate::SCHEMA_VERSION, duplicates, compaction: Some(counts), trim }
        }
    };
    create_dir(&dedup_dir)?;
    write_json(&dedup_dir.join(REPORT_FILE), &report)?;
    write_timing(cfg, "dedup", started)?;
    Ok(report)
}

fn written(dir: &Path, m: &SliceManifest) -> Option<PathBuf> {
    m.path.as_ref().map(|p| dir.join(p))
}

/// Schema of one domain, from the slices holding its predicates.
pub fn cmd_schema(cfg: &RunConfig, domain: &str) -> Result<DomainSchema, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    if domain.is_empty() || domain.contains(['/', '.', ':']) {
        return Err(PipelineError::Usage(format!("{domain:?} is not a domain key")));
    }
    let slices_dir = cfg.dir(SLICES_DIR);
    let ids_dir = cfg.dir(IDENTIFIERS_DIR);
    let slices = load_manifest(&slices_dir)?;
    let ids = load_manifest(&ids_dir)?;

    let in_domain = |m: &SliceManifest| match Selector::parse(&m.selector) {
        Ok(Selector::Domain(d)) => d == domain,
        Ok(Selector::Type(t)) | Ok(Selector::Predicate(t)) => {
            parse_schema_path(&t).is_ok_and(|p| p.domain() == domain) || domain_of(&known::resource(&t)) == domain
        }
        _ => false,
    };
    let mid_predicate = known::resource(known::MID);
    let binds = |m: &SliceManifest| Selector::parse(&m.selector).is_ok_and(|s| s.matches(&mid_predicate));
    let sources = SchemaSources {
        domain: slices.slices.iter().filter(|m| in_domain(m)).filter_map(|m| written(&slices_dir, m)).collect(),
        names: labelled_path(&ids_dir, &ids, IdentifierSlice::Name.label()).ok(),
        descriptions: labelled_path(&ids_dir, &ids, IdentifierSlice::Description.label()).ok(),
        types: labelled_path(&ids_dir, &ids, IdentifierSlice::Type.label()).ok(),
        bindings: slices.slices.iter().filter(|m| binds(m)).take(1).filter_map(|m| written(&slices_dir, m)).collect(),
    };
    let schema = reconstruct_schema(domain, &sources)?;
    let dir = cfg.dir(SCHEMA_DIR);
    create_dir(&dir)?;
    write_json(&dir.join(format!("{domain}.json")), &schema)?;
    let txt = dir.join(format!("{domain}.txt"));
    std::fs::write(&txt, render_listing(&schema)).map_err(io_at(&txt))?;
    write_timing(cfg, "schema", started)?;
    Ok(schema)
}

/// What `generate` writes.
#[derive(Debug, Clone)]
pub enum GenerateSource {
    Spec(GeneratorSpec),
    /// The bicycles fixture, which has no generator spec.
    Bicycles,
}

/// Writes a synthetic dump and, for generated specs, its ground truth.
pub fn cmd_generate(cfg: &RunConfig, source: &GenerateSource) -> Result<Option<GroundTruth>, PipelineError> {
    let started = Instant::now();
    create_dir(&cfg.out)?;
    let truth = match source {
        GenerateSource::Spec(spec) => Some(write_dump(spec, &cfg.out, cfg.gzip_out)?.1),
        GenerateSource::Bicycles => {
            let path = cfg.out.join(crate::synthgen::DUMP_FILE);
            let mut out = output_writer(&path, false)?;
            fixtures::write_bicycles_dump(&mut out).map_err(io_at(&path))?;
            out.flush().map_err(io_at(&path))?;
            None
        }
    };
    write_timing(cfg, "generate", started)?;
    Ok(truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub schema_version: u32,
    pub prepare: Option<PrepareReport>,
    pub stats: StatsReport,
    pub dedup: Option<DedupReport>,
}

/// Gathers the stage reports into `report.json` and a short text summary.
pub fn cmd_report(cfg: &RunConfig) -> Result<CombinedReport, PipelineError> {
    let stats: StatsReport = read_json(&cfg.dir(STATS_DIR).join("stats.json"), "run stats first")?;
    let optional = |p: PathBuf| p.exists().then_some(p);
    let prepare = optional(cfg.out.join(PREPARE_REPORT)).map(|p| read_json(&p, "")).transpose()?;
    let dedup = optional(cfg.dir(DEDUP_DIR).join(REPORT_FILE)).map(|p| read_json(&p, "")).transpose()?;
    let report = CombinedReport { schema_version: crate::SCHEMA_VERSION, prepare, stats, dedup };
    write_json(&cfg.out.join(REPORT_FILE), &report)?;
    let txt = cfg.out.join("report.txt");
    std::fs::write(&txt, render_report(&report)).map_err(io_at(&txt))?;
    Ok(report)
}

pub fn render_report(r: &CombinedReport) -> String {
    let mut out = String::new();
    if let Some(p) = &r.prepare {
        out.push_str(&format!(
            "prepare: {} lines, {} triples, {} malformed, size ratio {:.4}\n",
            p.counters.lines, p.counters.ok, p.counters.malformed, p.size_ratio
        ));
    }
    out.push_str(&format!("triples: {}\n", r.stats.total_triples));
    out.push_str(&format!(
        "identifier triples: {} ({}%)\n",
        r.stats.identifiers.identifier_triples, r.stats.identifiers.identifier_percent
    ));
    out.push_str(&format!("topics: {}\n", r.stats.topics.topics));
    out.push_str(&format!("domains: {}\n", r.stats.domains.len()));
    if let Some(d) = &r.dedup {
        out.push_str(&format!("trim: {}\n", d.trim.identity));
    }
    out
}
