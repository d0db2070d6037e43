//! Partitioning of a triple stream into predicate-defined slices.
//!
//! A [`SlicePlan`] lists selectors in descending frequency order. Slicing is
//! a single pass: each triple goes to the first matching selector, or to the
//! residual slice when none matches.

mod manifest;
mod sink;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extsort::{push_field, split_field, ExternalSorter, SortConfig};
use crate::ntparse::{
    normalize_iri, read_chunk, write_triple, LineChunk, ParseOptions, ParseOutcome, Resource, StreamCounters,
    StreamError, Style, Triple,
};
use crate::schema::{domain_of, known, type_of, IdentifierSlice};

pub use manifest::{
    read_manifest, write_manifest, RunManifest, SliceManifest, SliceTiming, MANIFEST_FILE, TIMINGS_FILE,
};
use sink::SinkPool;

/// File name of the residual slice.
pub const RESIDUAL_FILE: &str = "residual.tsv";
/// Selector key recorded for the residual slice.
pub const RESIDUAL_KEY: &str = "residual";

#[derive(Debug, Error)]
pub enum SlicerError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("spill failed after {position} triples: {source}")]
    Spill {
        position: u64,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Sink {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("selectors {first} and {second} map to the same file {file}")]
    FilenameCollision { first: String, second: String, file: String },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid selector {0:?}")]
    InvalidSelector(String),
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

/// What a slice selects, matched against the predicate of each triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Selector {
    All,
    /// A domain key as produced by [`domain_of`].
    Domain(String),
    /// A type-level path, e.g. `/common.notable_for`.
    Type(String),
    /// One exact predicate, by canonical value.
    Predicate(String),
}

impl Selector {
    pub fn predicate(id: &str) -> Self {
        Selector::Predicate(normalize_iri(id).value().to_owned())
    }

    pub fn domain(key: &str) -> Self {
        Selector::Domain(key.to_owned())
    }

    /// Stable text key, e.g. `domain:common` or `predicate:/type.object.name`.
    pub fn key(&self) -> String {
        match self {
            Selector::All => "all".to_owned(),
            Selector::Domain(d) => format!("domain:{d}"),
            Selector::Type(t) => format!("type:{t}"),
            Selector::Predicate(p) => format!("predicate:{p}"),
        }
    }

    pub fn parse(text: &str) -> Result<Self, SlicerError> {
        let bad = || SlicerError::InvalidSelector(text.to_owned());
        if text == "all" {
            return Ok(Selector::All);
        }
        let (kind, value) = text.split_once(':').ok_or_else(bad)?;
        if value.is_empty() {
            return Err(bad());
        }
        match kind {
            "domain" => Ok(Selector::Domain(value.to_owned())),
            "type" => Ok(Selector::Type(normalize_iri(value).value().to_owned())),
            "predicate" => Ok(Selector::predicate(value)),
            _ => Err(bad()),
        }
    }

    pub fn matches(&self, p: &Resource) -> bool {
        match self {
            Selector::All => true,
            Selector::Domain(d) => domain_of(p) == d,
            Selector::Type(t) => type_of(p) == Some(t.as_str()),
            Selector::Predicate(v) => known::is(p, v),
        }
    }

    /// True when some predicate could match both selectors.
    pub fn overlaps(&self, other: &Selector) -> bool {
        use Selector::*;
        let domain_of_path = |path: &str| domain_of(&normalize_iri(path)).to_owned();
        match (self, other) {
            (All, _) | (_, All) => true,
            (Domain(a), Domain(b)) | (Type(a), Type(b)) => a == b,
            (Predicate(a), Predicate(b)) => known::is(&normalize_iri(a), b) || known::is(&normalize_iri(b), a),
            (Domain(d), Type(t)) | (Type(t), Domain(d)) => domain_of_path(t) == *d,
            (Domain(d), Predicate(p)) | (Predicate(p), Domain(d)) => domain_of_path(p) == *d,
            (Type(t), Predicate(p)) | (Predicate(p), Type(t)) => type_of(&normalize_iri(p)) == Some(t.as_str()),
        }
    }

    /// File name stem. Distinct selectors always get distinct stems.
    pub fn file_stem(&self) -> String {
        use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
        const KEEP: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.');
        let (kind, value) = match self {
            Selector::All => return "all".to_owned(),
            Selector::Domain(v) => ("domain", v),
            Selector::Type(v) => ("type", v),
            Selector::Predicate(v) => ("predicate", v),
        };
        let stem = format!("{kind}-{}", utf8_percent_encode(value, KEEP));
        if stem.len() <= 180 {
            return stem;
        }
        // `~` is always escaped above, so hashed stems never equal plain ones.
        use sha2::Digest;
        let digest = hex::encode(sha2::Sha256::digest(stem.as_bytes()));
        format!("{}~{}", &stem[..120], &digest[..16])
    }

    pub fn file_name(&self) -> String {
        format!("{}.tsv", self.file_stem())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl From<Selector> for String {
    fn from(s: Selector) -> String {
        s.key()
    }
}

impl TryFrom<String> for Selector {
    type Error = SlicerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Selector::parse(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    Domain,
    Predicate,
}

/// Exact triple counts per distinct predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateHistogram {
    entries: BTreeMap<String, u64>,
    total: u64,
}

impl PredicateHistogram {
    pub fn from_counts<'a>(counts: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        let mut h = PredicateHistogram::default();
        for (p, c) in counts {
            *h.entries.entry(normalize_iri(p).value().to_owned()).or_default() += c;
            h.total += c;
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, predicate: &str) -> u64 {
        self.entries.get(normalize_iri(predicate).value()).copied().unwrap_or(0)
    }

    /// `(predicate, count)` in canonical-value order.
    pub fn iter(&self) -> impl Iterator<Item = (Resource, u64)> + '_ {
        self.entries.iter().map(|(p, c)| (normalize_iri(p), *c))
    }

    /// Counts summed per selector at the given granularity.
    pub fn aggregate(&self, granularity: Granularity) -> BTreeMap<Selector, u64> {
        let mut out = BTreeMap::new();
        for (p, c) in self.iter() {
            let sel = match granularity {
                Granularity::Domain => Selector::Domain(domain_of(&p).to_owned()),
                Granularity::Predicate => Selector::Predicate(p.value().to_owned()),
            };
            *out.entry(sel).or_default() += c;
        }
        out
    }

    /// TSV rendering: `predicate \t count`, descending by count.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        let mut out = String::from("predicate\tcount\n");
        for (p, c) in rows {
            out.push_str(&format!("{p}\t{c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HistogramConfig {
    /// Distinct predicates held in memory before counts spill to disk.
    pub max_in_memory: usize,
    pub sort: SortConfig,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig { max_in_memory: 1 << 20, sort: SortConfig::default() }
    }
}

/// Counts triples per predicate. Partial counts spill to an external sort
/// whenever more than `max_in_memory` distinct predicates are live.
pub fn enumerate_predicates<I>(triples: I, cfg: &HistogramConfig) -> Result<PredicateHistogram, SlicerError>
where
    I: IntoIterator<Item = Result<Triple, StreamError>>,
{
    let mut live: HashMap<String, u64> = HashMap::new();
    let mut sorter: Option<ExternalSorter> = None;
    let mut seen = 0u64;
    let spill_err = |position| move |source| SlicerError::Spill { position, source };
    for t in triples {
        let t = t?;
        seen += 1;
        if let Some(c) = live.get_mut(t.predicate.value()) {
            *c += 1;
            continue;
        }
        live.insert(t.predicate.value().to_owned(), 1);
        if live.len() > cfg.max_in_memory {
            let s = sorter.get_or_insert_with(|| ExternalSorter::new(cfg.sort.clone()));
            spill_counts(s, &mut live).map_err(spill_err(seen))?;
        }
    }
    let mut hist = PredicateHistogram { total: seen, ..Default::default() };
    match sorter {
        None => hist.entries.extend(live),
        Some(mut s) => {
            spill_counts(&mut s, &mut live).map_err(spill_err(seen))?;
            for rec in s.finish().map_err(spill_err(seen))? {
                let rec = rec.map_err(spill_err(seen))?;
                let (key, count) = split_field(&rec).expect("spilled count record");
                let key = String::from_utf8(key.to_vec()).expect("spilled predicates are UTF-8");
                let count = u64::from_be_bytes(count.try_into().expect("8-byte count"));
                *hist.entries.entry(key).or_default() += count;
            }
        }
    }
    Ok(hist)
}

fn spill_counts(sorter: &mut ExternalSorter, live: &mut HashMap<String, u64>) -> io::Result<()> {
    for (k, c) in live.drain() {
        let mut rec = Vec::with_capacity(k.len() + 12);
        push_field(&mut rec, k.as_bytes());
        rec.extend_from_slice(&c.to_be_bytes());
        sorter.push_owned(rec)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub selector: Selector,
    pub expected_count: u64,
}

/// Ordered selectors; plan order is match priority and reporting order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicePlan {
    pub specs: Vec<SliceSpec>,
}

/// Groups the histogram at `granularity`, largest first, ties by selector key.
pub fn build_slice_plan(h: &PredicateHistogram, granularity: Granularity) -> SlicePlan {
    let mut specs: Vec<SliceSpec> = h
        .aggregate(granularity)
        .into_iter()
        .map(|(selector, expected_count)| SliceSpec { selector, expected_count })
        .collect();
    specs.sort_by(|a, b| b.expected_count.cmp(&a.expected_count).then_with(|| a.selector.key().cmp(&b.selector.key())));
    SlicePlan { specs }
}

impl SlicePlan {
    pub fn from_selectors(selectors: impl IntoIterator<Item = Selector>) -> Self {
        SlicePlan { specs: selectors.into_iter().map(|selector| SliceSpec { selector, expected_count: 0 }).collect() }
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Checks ordering, disjointness and, given a histogram, coverage.
    pub fn validate(&self, h: Option<&PredicateHistogram>) -> Result<(), SlicerError> {
        for w in self.specs.windows(2) {
            if w[1].expected_count > w[0].expected_count {
                return Err(SlicerError::InvalidPlan(format!("{} is out of count order", w[1].selector)));
            }
        }
        for (i, a) in self.specs.iter().enumerate() {
            for b in &self.specs[i + 1..] {
                if a.selector.overlaps(&b.selector) {
                    return Err(SlicerError::InvalidPlan(format!("{} overlaps {}", a.selector, b.selector)));
                }
            }
        }
        if let Some(h) = h {
            if let Some((p, _)) = h.iter().find(|(p, _)| !self.specs.iter().any(|s| s.selector.matches(p))) {
                return Err(SlicerError::InvalidPlan(format!("no selector covers {p}")));
            }
        }
        Ok(())
    }

    /// Editable TSV: header, then `selector \t expected_count` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("selector\texpected_count\n");
        for s in &self.specs {
            out.push_str(&format!("{}\t{}\n", s.selector, s.expected_count));
        }
        out
    }

    /// Parses [`SlicePlan::to_tsv`] output. Blank lines and `#` comments are
    /// ignored, a missing count reads as 0.
    pub fn from_tsv(text: &str) -> Result<Self, SlicerError> {
        let mut specs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("selector\t")) {
                continue;
            }
            let (sel, count) = match line.rsplit_once('\t') {
                Some((s, c)) => (s, c.trim()),
                None => (line, "0"),
            };
            let expected_count =
                count.parse().map_err(|_| SlicerError::InvalidPlan(format!("line {}: bad count {count:?}", i + 1)))?;
            specs.push(SliceSpec { selector: Selector::parse(sel.trim())?, expected_count });
        }
        Ok(SlicePlan { specs })
    }
}

#[derive(Debug, Clone)]
pub struct SliceOptions {
    pub parse: ParseOptions,
    /// Chunk workers; 1 processes chunks on the calling thread.
    pub workers: usize,
    /// Lines per chunk.
    pub chunk_lines: usize,
    /// Open slice files allowed at once; least recently used ones close first.
    pub max_open_files: usize,
    /// Write the residual slice, or only count it.
    pub write_residual: bool,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            parse: ParseOptions::lenient(),
            workers: 1,
            chunk_lines: 64 * 1024,
            max_open_files: 128,
            write_residual: true,
        }
    }
}

/// Outcome of one slicing pass.
#[derive(Debug, Clone)]
pub struct SliceRun {
    /// One manifest per plan spec, in plan order.
    pub slices: Vec<SliceManifest>,
    pub residual: SliceManifest,
    pub counters: StreamCounters,
    /// Time spent writing each slice, in plan order.
    pub timings: Vec<Duration>,
}

impl SliceRun {
    pub fn total_triples(&self) -> u64 {
        self.slices.iter().map(|m| m.triple_count).sum::<u64>() + self.residual.triple_count
    }

    pub fn by_label(&self, label: &str) -> Option<&SliceManifest> {
        self.slices.iter().find(|m| m.label.as_deref() == Some(label))
    }
}

/// Constant-time first-match lookup over a plan.
struct Router {
    predicates: HashMap<String, usize>,
    types: HashMap<String, usize>,
    domains: HashMap<String, usize>,
    all: Option<usize>,
}

impl Router {
    fn new(plan: &SlicePlan) -> Self {
        let mut r = Router { predicates: HashMap::new(), types: HashMap::new(), domains: HashMap::new(), all: None };
        for (i, spec) in plan.specs.iter().enumerate() {
            match &spec.selector {
                Selector::All => {
                    r.all.get_or_insert(i);
                }
                Selector::Domain(d) => {
                    r.domains.entry(d.clone()).or_insert(i);
                }
                Selector::Type(t) => {
                    r.types.entry(t.clone()).or_insert(i);
                }
                Selector::Predicate(p) => {
                    r.predicates.entry(p.clone()).or_insert(i);
                }
            }
        }
        r
    }

    fn route(&self, p: &Resource) -> Option<usize> {
        let value = p.value();
        let exact = self.predicates.get(value).copied().or_else(|| {
            let rest = value.strip_prefix("https://")?;
            self.predicates.get(&format!("http://{rest}")).copied()
        });
        let by_type = type_of(p).and_then(|t| self.types.get(t).copied());
        let by_domain = self.domains.get(domain_of(p)).copied();
        [exact, by_type, by_domain, self.all].into_iter().flatten().min()
    }
}

struct RoutedChunk {
    buffers: Vec<Vec<u8>>,
    lines: Vec<u64>,
    counters: StreamCounters,
}

fn route_chunk(chunk: &LineChunk, router: &Router, slots: usize, opts: ParseOptions) -> RoutedChunk {
    let (outcomes, counters) = chunk.parse(opts);
    let mut buffers = vec![Vec::new(); slots + 1];
    let mut lines = vec![0u64; slots + 1];
    for outcome in outcomes {
        if let ParseOutcome::Ok(t) = outcome {
            let slot = router.route(&t.predicate).unwrap_or(slots);
            write_triple(&t, Style::Dots, &mut buffers[slot]);
            buffers[slot].push(b'\n');
            lines[slot] += 1;
        }
    }
    RoutedChunk { buffers, lines, counters }
}

/// Writes every well-formed triple of `source` to the first matching slice
/// of `plan` inside `sink`, or to the residual slice.
///
/// Chunks are routed in parallel and written in input order, so output is
/// identical for any worker count.
pub fn slice_stream(
    source: &mut dyn BufRead,
    plan: &SlicePlan,
    sink: &Path,
    opts: &SliceOptions,
) -> Result<SliceRun, SlicerError> {
    slice_labeled(source, plan, &[], sink, opts, &mut |_| {})
}

/// [`slice_stream`] with per-spec labels and a progress callback receiving
/// running counters after each batch of chunks.
pub fn slice_labeled(
    source: &mut dyn BufRead,
    plan: &SlicePlan,
    labels: &[&str],
    sink: &Path,
    opts: &SliceOptions,
    on_progress: &mut dyn FnMut(&StreamCounters),
) -> Result<SliceRun, SlicerError> {
    let mut names = HashMap::new();
    for spec in &plan.specs {
        let file = spec.selector.file_name();
        if let Some(prev) = names.insert(file.clone(), spec.selector.key()) {
            return Err(SlicerError::FilenameCollision { first: prev, second: spec.selector.key(), file });
        }
    }
    std::fs::create_dir_all(sink).map_err(|source| SlicerError::Sink { path: sink.to_owned(), source })?;

    let slots = plan.len();
    let mut files: Vec<String> = plan.specs.iter().map(|s| s.selector.file_name()).collect();
    files.push(RESIDUAL_FILE.to_owned());
    let mut writable = vec![true; slots];
    writable.push(opts.write_residual);
    let mut pool = SinkPool::new(sink, files, writable, opts.max_open_files.max(1));

    let router = Router::new(plan);
    let workers = opts.workers.max(1);
    let thread_pool = (workers > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(workers).build())
        .transpose()
        .map_err(|e| SlicerError::Sink { path: sink.to_owned(), source: io::Error::other(e) })?;

    let mut counters = StreamCounters::default();
    let mut chunks: Vec<LineChunk> = (0..workers).map(|_| LineChunk::default()).collect();
    let chunk_lines = opts.chunk_lines.max(1);
    loop {
        let mut filled = 0;
        for chunk in chunks.iter_mut() {
            if !read_chunk(source, chunk_lines, counters.lines + 1, counters.bytes, chunk)? {
                break;
            }
            counters.lines += chunk.len() as u64;
            counters.bytes += chunk.bytes;
            filled += 1;
        }
        if filled == 0 {
            break;
        }
        let batch = &chunks[..filled];
        let routed: Vec<RoutedChunk> = match &thread_pool {
            Some(tp) => tp.install(|| {
                use rayon::prelude::*;
                batch.par_iter().map(|c| route_chunk(c, &router, slots, opts.parse)).collect()
            }),
            None => batch.iter().map(|c| route_chunk(c, &router, slots, opts.parse)).collect(),
        };
        for r in routed {
            // Lines and bytes were counted while reading.
            counters.ok += r.counters.ok;
            counters.skipped += r.counters.skipped;
            counters.malformed += r.counters.malformed;
            counters.key_full_iri += r.counters.key_full_iri;
            counters.key_short_path += r.counters.key_short_path;
            for (slot, buf) in r.buffers.iter().enumerate() {
                if r.lines[slot] > 0 {
                    pool.write(slot, buf, r.lines[slot])?;
                }
            }
        }
        on_progress(&counters);
        if filled < workers {
            break;
        }
    }

    let (mut manifests, timings) = pool.finish()?;
    let residual = manifests.pop().expect("residual slot");
    for (i, (m, spec)) in manifests.iter_mut().zip(&plan.specs).enumerate() {
        m.selector = spec.selector.key();
        m.expected_count = Some(spec.expected_count);
        m.label = labels.get(i).map(|l| (*l).to_owned());
        if let Selector::Predicate(p) = &spec.selector {
            m.predicate = Some(p.clone());
        }
    }
    let mut residual = residual;
    residual.selector = RESIDUAL_KEY.to_owned();
    Ok(SliceRun { slices: manifests, residual, counters, timings: timings[..slots].to_vec() })
}

/// Selectors and labels of the five identifier slices.
pub fn identifier_selectors() -> Vec<(&'static str, Selector)> {
    IdentifierSlice::ALL.iter().map(|s| (s.label(), Selector::predicate(s.predicate()))).collect()
}

/// Auxiliary slices consumed by dedup: OWL mirrors, instance triples,
/// notable_for links and their mediator attributes.
pub fn auxiliary_selectors() -> Vec<(&'static str, Selector)> {
    vec![
        ("owl_label", Selector::predicate(known::OWL_LABEL)),
        ("owl_type", Selector::predicate(known::OWL_TYPE)),
        ("instance", Selector::predicate(known::INSTANCE)),
        ("notable_for", Selector::predicate(known::NOTABLE_FOR)),
        ("notable_attrs", Selector::Type(known::NOTABLE_FOR_TYPE.to_owned())),
    ]
}

/// Extracts labelled predicate slices in one pass. The residual is counted,
/// not written.
pub fn extract_labeled_slices(
    source: &mut dyn BufRead,
    selectors: &[(&str, Selector)],
    sink: &Path,
    opts: &SliceOptions,
) -> Result<SliceRun, SlicerError> {
    let labels: Vec<&str> = selectors.iter().map(|(l, _)| *l).collect();
    let plan = SlicePlan::from_selectors(selectors.iter().map(|(_, s)| s.clone()));
    let opts = SliceOptions { write_residual: false, ..opts.clone() };
    slice_labeled(source, &plan, &labels, sink, &opts, &mut |_| {})
}

/// The name, type, key, description and alias slices.
pub fn extract_identifier_slices(
    source: &mut dyn BufRead,
    sink: &Path,
    opts: &SliceOptions,
) -> Result<SliceRun, SlicerError> {
    extract_labeled_slices(source, &identifier_selectors(), sink, opts)
}

/// Distinct selectors, checked before a run so a bad plan fails fast.
pub fn check_unique(plan: &SlicePlan) -> Result<(), SlicerError> {
    let mut seen = HashSet::new();
    for s in &plan.specs {
        if !seen.insert(s.selector.key()) {
            return Err(SlicerError::InvalidPlan(format!("{} appears twice", s.selector)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntparse::{parse_line, stream_triples, StreamOptions};
    use proptest::prelude::*;

    fn triples(lines: &str) -> Vec<Result<Triple, StreamError>> {
        stream_triples(std::io::Cursor::new(lines.as_bytes().to_vec()), StreamOptions::default())
            .unwrap()
            .triples()
            .collect()
    }

    const SIX: &str = "/m.1\t/a.x.y\t/m.2\n/m.1\t/a.x.y\t/m.3\n/m.2\t/a.x.y\t/m.4\n/m.1\t/b.x.y\t\"v\"\n/m.2\t/b.x.y\t\"w\"\n/m.3\t/c.x.y\t/m.1\n";

    #[test]
    fn six_triple_histogram() {
        let h = enumerate_predicates(triples(SIX), &HistogramConfig::default()).unwrap();
        assert_eq!((h.get("/a.x.y"), h.get("/b.x.y"), h.get("/c.x.y"), h.total()), (3, 2, 1, 6));
    }

    #[test]
    fn histogram_spills_with_identical_counts() {
        let cfg = HistogramConfig { max_in_memory: 1, sort: SortConfig::with_budget(64) };
        let spilled = enumerate_predicates(triples(SIX), &cfg).unwrap();
        let direct = enumerate_predicates(triples(SIX), &HistogramConfig::default()).unwrap();
        assert_eq!(spilled, direct);
    }

    #[test]
    fn empty_stream_histogram() {
        let h = enumerate_predicates(triples(""), &HistogramConfig::default()).unwrap();
        assert_eq!((h.len(), h.total()), (0, 0));
        assert!(build_slice_plan(&h, Granularity::Domain).is_empty());
    }

    #[test]
    fn plan_orders_by_count_then_key() {
        let h = PredicateHistogram::from_counts([("/b.t.p", 5), ("/a.t.p", 5), ("/c.t.p", 9)]);
        let keys: Vec<_> = build_slice_plan(&h, Granularity::Domain).specs.iter().map(|s| s.selector.key()).collect();
        assert_eq!(keys, ["domain:c", "domain:a", "domain:b"]);
        let single = PredicateHistogram::from_counts([("/a.t.p", 4)]);
        assert_eq!(build_slice_plan(&single, Granularity::Predicate).len(), 1);
    }

    #[test]
    fn selector_keys_round_trip() {
        for text in ["all", "domain:rdf-schema#label", "type:/common.notable_for", "predicate:/type.object.name"] {
            assert_eq!(Selector::parse(text).unwrap().key(), text);
        }
        let owl = Selector::parse(&format!("predicate:{}", known::OWL_TYPE)).unwrap();
        assert_eq!(owl, Selector::predicate(known::OWL_TYPE));
        assert!(Selector::parse("column:x").is_err());
        assert!(Selector::parse("domain:").is_err());
    }

    #[test]
    fn overlap_rules() {
        let d = Selector::domain("common");
        let t = Selector::Type("/common.notable_for".into());
        let p = Selector::predicate("/common.topic.alias");
        assert!(d.overlaps(&t) && d.overlaps(&p) && !t.overlaps(&p));
        assert!(!d.overlaps(&Selector::domain("type")));
        assert!(Selector::All.overlaps(&p));
    }

    #[test]
    fn file_stems_are_escaped() {
        assert_eq!(Selector::domain("rdf-schema#label").file_stem(), "domain-rdf-schema%23label");
        assert_eq!(Selector::predicate("/a.b").file_stem(), "predicate-%2Fa.b");
        let long = Selector::predicate(&format!("/a.{}", "x".repeat(300)));
        assert!(long.file_stem().len() < 200);
    }

    #[test]
    fn router_takes_first_match() {
        let plan = SlicePlan::from_selectors([
            Selector::predicate("/common.topic.alias"),
            Selector::domain("common"),
            Selector::Type("/common.notable_for".into()),
        ]);
        let r = Router::new(&plan);
        let res = |id: &str| match parse_line(format!("/m.1\t{id}\t/m.2").as_bytes(), 1) {
            ParseOutcome::Ok(t) => t.predicate,
            other => panic!("{other:?}"),
        };
        assert_eq!(r.route(&res("/common.topic.alias")), Some(0));
        assert_eq!(r.route(&res("/common.notable_for.object")), Some(1));
        assert_eq!(r.route(&res("/film.film.genre")), None);
    }

    #[test]
    fn plan_tsv_round_trip_and_validation() {
        let h = PredicateHistogram::from_counts([("/a.t.p", 3), ("/b.t.p", 2), (known::OWL_LABEL, 1)]);
        let plan = build_slice_plan(&h, Granularity::Domain);
        plan.validate(Some(&h)).unwrap();
        assert_eq!(SlicePlan::from_tsv(&plan.to_tsv()).unwrap(), plan);
        let mut overlapping = plan.clone();
        overlapping.specs.push(SliceSpec { selector: Selector::predicate("/a.t.p"), expected_count: 0 });
        assert!(overlapping.validate(None).is_err());
        let partial = SlicePlan { specs: plan.specs[..1].to_vec() };
        assert!(partial.validate(Some(&h)).is_err());
    }

    proptest! {
        #[test]
        fn distinct_selectors_get_distinct_stems(a in "[a-z#%/._~-]{1,12}", b in "[a-z#%/._~-]{1,12}") {
            prop_assume!(a != b);
            prop_assert_ne!(Selector::Domain(a.clone()).file_stem(), Selector::Domain(b.clone()).file_stem());
            prop_assert_ne!(Selector::Domain(a).file_stem(), Selector::Type(b).file_stem());
        }

        #[test]
        fn histogram_sums_to_total(counts in proptest::collection::btree_map("/[a-d]\\.[a-c]\\.[a-c]", 1u64..50, 0..12)) {
            let h = PredicateHistogram::from_counts(counts.iter().map(|(k, v)| (k.as_str(), *v)));
            prop_assert_eq!(h.iter().map(|(_, c)| c).sum::<u64>(), h.total());
            for g in [Granularity::Domain, Granularity::Predicate] {
                let plan = build_slice_plan(&h, g);
                prop_assert!(plan.validate(Some(&h)).is_ok());
                prop_assert_eq!(plan.specs.iter().map(|s| s.expected_count).sum::<u64>(), h.total());
            }
        }
    }
}
