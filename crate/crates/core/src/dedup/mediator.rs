//! Assembly of notable_for mediator groups and their compaction into
//! direct triples.
//!
//! A group is keyed by its mediator: the link triple carries the mediator as
//! object, every attribute triple as subject. One external sort on that key
//! brings each group together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, open_slice, DedupError};
use crate::extsort::{push_field, split_field, ExternalSorter, SortConfig, SortedRecords};
use crate::ntparse::{parse_line, write_triple, Node, ParseOutcome, Resource, Style, Triple};
use crate::schema::{known, type_of};

const TAG_LINK: u8 = 0;
const TAG_ATTRIBUTE: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    /// Attributes without any inbound link.
    Orphan,
    MissingNotableObject,
    /// More than one topic links to the mediator.
    AmbiguousLink,
    /// Distinct notable_object values.
    AmbiguousNotableObject,
}

/// A mediator with its link and attribute triples. Links come first in
/// `triples`, each part in serialized order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediatorGroup {
    pub subject: Option<Resource>,
    pub mediator: Resource,
    /// `(lang, text)`; `lang` is empty for untagged literals.
    pub display_names: Vec<(String, String)>,
    pub object_path: Option<Resource>,
    pub predicate_path: Option<Resource>,
    pub notable_object_path: Option<Resource>,
    pub triple_count: u64,
    pub completeness: Completeness,
    pub triples: Vec<Triple>,
}

impl MediatorGroup {
    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    fn assemble(mediator: Resource, links: Vec<Triple>, attributes: Vec<Triple>) -> Self {
        let mut g = MediatorGroup {
            subject: links.first().map(|t| t.subject.clone()),
            mediator,
            display_names: Vec::new(),
            object_path: None,
            predicate_path: None,
            notable_object_path: None,
            triple_count: (links.len() + attributes.len()) as u64,
            completeness: Completeness::Complete,
            triples: Vec::new(),
        };
        let mut notable_values = Vec::new();
        for t in &attributes {
            let p = &t.predicate;
            if known::is(p, known::NOTABLE_DISPLAY_NAME) {
                if let Node::Literal(l) = &t.object {
                    g.display_names.push((l.lang().unwrap_or_default().to_owned(), l.lexical().to_owned()));
                }
                continue;
            }
            let Node::Resource(r) = &t.object else { continue };
            if known::is(p, known::NOTABLE_OBJECT) {
                g.object_path.get_or_insert_with(|| r.clone());
            } else if known::is(p, known::NOTABLE_PREDICATE) {
                g.predicate_path.get_or_insert_with(|| r.clone());
            } else if known::is(p, known::NOTABLE_NOTABLE_OBJECT) && !notable_values.contains(r) {
                notable_values.push(r.clone());
            }
        }
        g.notable_object_path = notable_values.first().cloned();
        g.completeness = if links.is_empty() {
            Completeness::Orphan
        } else if links.len() > 1 {
            Completeness::AmbiguousLink
        } else if notable_values.is_empty() {
            Completeness::MissingNotableObject
        } else if notable_values.len() > 1 {
            Completeness::AmbiguousNotableObject
        } else {
            Completeness::Complete
        };
        g.triples = links;
        g.triples.extend(attributes);
        g
    }
}

/// Sorted stream of groups, one per distinct mediator.
pub struct MediatorGroups {
    records: std::iter::Peekable<SortedRecords>,
    origin: PathBuf,
}

impl Iterator for MediatorGroups {
    type Item = Result<MediatorGroup, DedupError>;

    fn next(&mut self) -> Option<Self::Item> {
        let first = match self.records.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(io_err(&self.origin)(e))),
        };
        let key = split_field(&first).expect("mediator record").0.to_vec();
        let mut members = vec![first];
        loop {
            match self.records.peek() {
                Some(Ok(r)) if split_field(r).expect("mediator record").0 == key.as_slice() => {
                    members.push(self.records.next().expect("peeked").expect("peeked ok"));
                }
                Some(Err(_)) => {
                    let e = self.records.next().expect("peeked").unwrap_err();
                    return Some(Err(io_err(&self.origin)(e)));
                }
                _ => break,
            }
        }
        let mut links = Vec::new();
        let mut attributes = Vec::new();
        for rec in &members {
            let rest = split_field(rec).expect("mediator record").1;
            let triple = match parse_line(&rest[1..], 0) {
                ParseOutcome::Ok(t) => t,
                other => unreachable!("re-parsing a serialized triple gave {other:?}"),
            };
            if rest[0] == TAG_LINK {
                links.push(triple);
            } else {
                attributes.push(triple);
            }
        }
        let mediator = crate::ntparse::normalize_iri(std::str::from_utf8(&key).expect("mediator token is UTF-8"));
        Some(Ok(MediatorGroup::assemble(mediator, links, attributes)))
    }
}

fn group_record(mediator: &str, tag: u8, t: &Triple) -> Vec<u8> {
    let mut rec = Vec::with_capacity(mediator.len() + 96);
    push_field(&mut rec, mediator.as_bytes());
    rec.push(tag);
    write_triple(t, Style::Dots, &mut rec);
    rec
}

/// Scans `sources` for notable_for links and `/common.notable_for.*`
/// attributes and groups them by mediator. Other triples are ignored.
pub fn collect_mediator_groups(sources: &[&Path], sort: &SortConfig) -> Result<MediatorGroups, DedupError> {
    let mut sorter = ExternalSorter::new(sort.clone());
    for path in sources {
        for outcome in open_slice(path)? {
            let outcome = outcome.map_err(|source| DedupError::Stream { path: path.to_path_buf(), source })?;
            let ParseOutcome::Ok(t) = outcome else { continue };
            let rec = if known::is(&t.predicate, known::NOTABLE_FOR) {
                match &t.object {
                    Node::Resource(m) => group_record(m.value(), TAG_LINK, &t),
                    Node::Literal(_) => continue,
                }
            } else if type_of(&t.predicate) == Some(known::NOTABLE_FOR_TYPE) {
                group_record(t.subject.value(), TAG_ATTRIBUTE, &t)
            } else {
                continue;
            };
            sorter.push_owned(rec).map_err(io_err(path))?;
        }
    }
    let origin = sources.first().map_or_else(PathBuf::new, |p| p.to_path_buf());
    let records = sorter.finish().map_err(io_err(&origin))?.peekable();
    Ok(MediatorGroups { records, origin })
}

/// Totals of a compaction. For complete groups `input_triples` is the sum
/// of their sizes and `output_triples` their number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompactionCounts {
    pub complete_groups: u64,
    pub incomplete_groups: u64,
    pub input_triples: u64,
    pub output_triples: u64,
    pub passthrough_triples: u64,
    /// Complete groups whose `object` differs from `notable_object`.
    pub discrepancies: u64,
    pub dropped_display_names: u64,
}

impl CompactionCounts {
    /// Output triples per input triple of the complete groups.
    pub fn retained_fraction(&self) -> f64 {
        if self.input_triples == 0 {
            0.0
        } else {
            self.output_triples as f64 / self.input_triples as f64
        }
    }
}

/// Streaming compaction, one group at a time.
#[derive(Debug, Default)]
pub struct Compactor {
    counts: CompactionCounts,
}

impl Compactor {
    pub fn new() -> Self {
        Compactor::default()
    }

    /// The direct triple replacing a complete group, or `None` when the
    /// group passes through untouched.
    pub fn push(&mut self, g: &MediatorGroup) -> Option<Triple> {
        if !g.is_complete() {
            self.counts.incomplete_groups += 1;
            self.counts.passthrough_triples += g.triple_count;
            return None;
        }
        let subject = g.subject.clone().expect("complete groups have a subject");
        let notable = g.notable_object_path.clone().expect("complete groups have a notable object");
        self.counts.complete_groups += 1;
        self.counts.input_triples += g.triple_count;
        self.counts.output_triples += 1;
        self.counts.dropped_display_names += g.display_names.len() as u64;
        if g.object_path.as_ref().is_some_and(|o| *o != notable) {
            self.counts.discrepancies += 1;
        }
        Some(Triple::new(subject, known::resource(known::NOTABLE_FOR), notable))
    }

    pub fn counts(&self) -> CompactionCounts {
        self.counts
    }
}

/// In-memory convenience over [`Compactor`]: `(direct, passthrough, counts)`.
pub fn compact_notable_for(
    groups: impl IntoIterator<Item = MediatorGroup>,
) -> (Vec<Triple>, Vec<Triple>, CompactionCounts) {
    let mut c = Compactor::new();
    let mut direct = Vec::new();
    let mut passthrough = Vec::new();
    for g in groups {
        match c.push(&g) {
            Some(t) => direct.push(t),
            None => passthrough.extend(g.triples),
        }
    }
    (direct, passthrough, c.counts())
}
