//! Redundancy measurement: OWL mirror duplicates, forward/reverse type
//! pairs, notable_for mediator compaction and the combined trim report.
//!
//! Every join is a sort-merge over external sorts, so memory stays bounded
//! by the sort budget whatever the slice sizes.

pub mod mediator;

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extsort::{count_intersection, dedup_sorted, push_field, ExternalSorter, SortConfig};
use crate::ntparse::{open_path, Node, ParseOptions, StreamError, StreamOptions, Triple, TripleStream};
use crate::schema::known;

pub use mediator::{
    collect_mediator_groups, compact_notable_for, CompactionCounts, Compactor, Completeness, MediatorGroup,
    MediatorGroups,
};

#[derive(Debug, Error)]
pub enum DedupError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Stream {
        path: PathBuf,
        #[source]
        source: StreamError,
    },
    #[error("{path} line {line}: expected {expected}, found {found}")]
    PredicateMismatch { path: PathBuf, line: u64, expected: String, found: String },
    #[error("trim summary needs a non-zero total")]
    ZeroTotal,
    #[error("{what} ({count}) exceeds the total of {total} triples")]
    CountExceedsTotal { what: &'static str, count: u64, total: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateKind {
    OwlLabel,
    OwlType,
    ReverseInstance,
}

impl DuplicateKind {
    /// `(base predicate, mirror predicate)`.
    pub fn predicates(self) -> (&'static str, &'static str) {
        match self {
            DuplicateKind::OwlLabel => (known::NAME, known::OWL_LABEL),
            DuplicateKind::OwlType => (known::TYPE, known::OWL_TYPE),
            DuplicateKind::ReverseInstance => (known::TYPE, known::INSTANCE),
        }
    }
}

/// `duplicate_count <= min(base_slice_count, mirror_slice_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateReport {
    pub kind: DuplicateKind,
    pub duplicate_count: u64,
    pub base_slice_count: u64,
    pub mirror_slice_count: u64,
}

pub(crate) fn open_slice(path: &Path) -> Result<TripleStream<Box<dyn io::BufRead + Send>>, DedupError> {
    let reader = open_path(path).map_err(|source| DedupError::Io { path: path.to_owned(), source })?;
    Ok(TripleStream::new(reader, StreamOptions { parse: ParseOptions::lenient() }))
}

pub(crate) fn io_err(path: &Path) -> impl Fn(io::Error) -> DedupError + '_ {
    move |source| DedupError::Io { path: path.to_owned(), source }
}

fn pair_key(first: &str, second: &str) -> Vec<u8> {
    let mut rec = Vec::with_capacity(first.len() + second.len() + 8);
    push_field(&mut rec, first.as_bytes());
    push_field(&mut rec, second.as_bytes());
    rec
}

fn node_token(n: &Node) -> String {
    n.to_token()
}

/// Sorted distinct pair keys of a slice plus its triple count. `swap` keys
/// on `(object, subject)`; `expected` rejects foreign predicates.
fn sorted_pairs(
    path: &Path,
    expected: Option<&str>,
    swap: bool,
    sort: &SortConfig,
) -> Result<(impl Iterator<Item = io::Result<Vec<u8>>>, u64), DedupError> {
    let mut sorter = ExternalSorter::new(sort.clone());
    let mut stream = open_slice(path)?;
    let mut count = 0;
    while let Some(outcome) = stream.next() {
        let outcome = outcome.map_err(|source| DedupError::Stream { path: path.to_owned(), source })?;
        let crate::ntparse::ParseOutcome::Ok(t) = outcome else { continue };
        if let Some(expected) = expected {
            if !known::is(&t.predicate, expected) {
                return Err(DedupError::PredicateMismatch {
                    path: path.to_owned(),
                    line: stream.counters().lines,
                    expected: expected.to_owned(),
                    found: t.predicate.value().to_owned(),
                });
            }
        }
        count += 1;
        let Triple { subject, object, .. } = t;
        let (s, o) = (subject.value().to_owned(), node_token(&object));
        let key = if swap { pair_key(&o, &s) } else { pair_key(&s, &o) };
        sorter.push_owned(key).map_err(io_err(path))?;
    }
    Ok((dedup_sorted(sorter.finish().map_err(io_err(path))?), count))
}

/// Distinct `(subject, object)` pairs present in both slices, ignoring
/// predicates. Symmetric in its arguments.
pub fn count_common_pairs(a: &Path, b: &Path, sort: &SortConfig) -> Result<u64, DedupError> {
    let (pa, _) = sorted_pairs(a, None, false, sort)?;
    let (pb, _) = sorted_pairs(b, None, false, sort)?;
    count_intersection(pa, pb).map_err(io_err(a))
}

/// Pairs shared by a Freebase name or type slice and its OWL mirror slice.
/// Objects compare in normalized form; literal language tags must match.
pub fn detect_owl_duplicates(
    base: &Path,
    mirror: &Path,
    kind: DuplicateKind,
    sort: &SortConfig,
) -> Result<DuplicateReport, DedupError> {
    let (base_pred, mirror_pred) = kind.predicates();
    let (pa, base_slice_count) = sorted_pairs(base, Some(base_pred), false, sort)?;
    let (pb, mirror_slice_count) = sorted_pairs(mirror, Some(mirror_pred), false, sort)?;
    let duplicate_count = count_intersection(pa, pb).map_err(io_err(base))?;
    Ok(DuplicateReport { kind, duplicate_count, base_slice_count, mirror_slice_count })
}

/// Type triples `(s, type, t)` whose reverse `(t, instance, s)` also exists.
pub fn detect_reverse_pairs(
    type_slice: &Path,
    instance_slice: &Path,
    sort: &SortConfig,
) -> Result<DuplicateReport, DedupError> {
    let (forward, base_slice_count) = sorted_pairs(type_slice, Some(known::TYPE), false, sort)?;
    let (reverse, mirror_slice_count) = sorted_pairs(instance_slice, Some(known::INSTANCE), true, sort)?;
    let duplicate_count = count_intersection(forward, reverse).map_err(io_err(type_slice))?;
    Ok(DuplicateReport { kind: DuplicateKind::ReverseInstance, duplicate_count, base_slice_count, mirror_slice_count })
}

/// Mediator triples removable by compaction and the direct triples replacing them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MediatorCounts {
    pub mediator_triples: u64,
    pub compacted_triples: u64,
}

impl From<&CompactionCounts> for MediatorCounts {
    fn from(c: &CompactionCounts) -> Self {
        MediatorCounts { mediator_triples: c.input_triples, compacted_triples: c.output_triples }
    }
}

/// Removable share of a dump. Every fraction lies in `[0, 1]` and
/// `total_trim_fraction == owl + reverse + (mediator - compacted)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimReport {
    pub schema_version: u32,
    pub total_triples: u64,
    pub owl_duplicates: u64,
    pub reverse_duplicates: u64,
    pub mediator_triples: u64,
    pub compacted_triples: u64,
    pub owl_fraction: f64,
    pub reverse_fraction: f64,
    pub mediator_fraction: f64,
    pub compacted_fraction: f64,
    pub total_trim_fraction: f64,
    /// The composition spelled out in percentages.
    pub identity: String,
}

impl TrimReport {
    pub fn redundant_fraction(&self) -> f64 {
        self.owl_fraction + self.reverse_fraction
    }
}

/// Combines duplicate reports and mediator counts into fractions of `total`.
pub fn trim_summary(
    reports: &[DuplicateReport],
    mediator: MediatorCounts,
    total: u64,
) -> Result<TrimReport, DedupError> {
    if total == 0 {
        return Err(DedupError::ZeroTotal);
    }
    let sum = |pred: fn(DuplicateKind) -> bool| {
        reports.iter().filter(|r| pred(r.kind)).map(|r| r.duplicate_count).sum::<u64>()
    };
    let owl = sum(|k| k != DuplicateKind::ReverseInstance);
    let reverse = sum(|k| k == DuplicateKind::ReverseInstance);
    let checks = [
        ("OWL duplicates", owl),
        ("reverse duplicates", reverse),
        ("mediator triples", mediator.mediator_triples),
        ("compacted triples", mediator.compacted_triples),
        ("removable triples", owl + reverse + mediator.mediator_triples.saturating_sub(mediator.compacted_triples)),
    ];
    for (what, count) in checks {
        if count > total {
            return Err(DedupError::CountExceedsTotal { what, count, total });
        }
    }
    if mediator.compacted_triples > mediator.mediator_triples {
        return Err(DedupError::CountExceedsTotal {
            what: "compacted triples",
            count: mediator.compacted_triples,
            total: mediator.mediator_triples,
        });
    }
    let frac = |c: u64| c as f64 / total as f64;
    let (o, r, m, c) = (frac(owl), frac(reverse), frac(mediator.mediator_triples), frac(mediator.compacted_triples));
    let total_trim_fraction = o + r + (m - c);
    let pct = |f: f64| format!("{:.2}%", f * 100.0);
    let identity = format!("{} = {} + ({} - {})", pct(total_trim_fraction), pct(o + r), pct(m), pct(c));
    Ok(TrimReport {
        schema_version: crate::SCHEMA_VERSION,
        total_triples: total,
        owl_duplicates: owl,
        reverse_duplicates: reverse,
        mediator_triples: mediator.mediator_triples,
        compacted_triples: mediator.compacted_triples,
        owl_fraction: o,
        reverse_fraction: r,
        mediator_fraction: m,
        compacted_fraction: c,
        total_trim_fraction,
        identity,
    })
}
