//! Domain statistics tables, per-position distinct counts and topic estimates.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extsort::{dedup_sorted, ExternalSorter, SortConfig};
use crate::ntparse::{open_path, ParseOptions, ResourceKind, StreamError, StreamOptions, TripleStream};
use crate::schema::{known, DomainGroups, Group, OwlKind};
use crate::slicer::{Selector, SliceManifest, RESIDUAL_KEY};

#[derive(Debug, Error)]
pub enum ProfilerError {
    #[error("cannot read slice {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("slice {path}: {source}")]
    Stream {
        path: PathBuf,
        #[source]
        source: StreamError,
    },
    #[error("{path} line {line}: expected only name triples, found {predicate}")]
    ContractViolation { path: PathBuf, line: u64, predicate: String },
}

/// A percentage in ten-thousandths of a percent, truncated so that a column
/// of shares never sums past 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct FixedPercent(u64);

impl FixedPercent {
    pub fn from_ratio(count: u64, total: u64) -> Self {
        if total == 0 {
            return FixedPercent(0);
        }
        FixedPercent((count as u128 * 1_000_000 / total as u128) as u64)
    }

    pub fn ten_thousandths(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10_000.0
    }

    /// Three decimals, e.g. `45.658%`; shares under half a thousandth show
    /// as `0.000%`.
    pub fn display3(count: u64, total: u64) -> String {
        if total == 0 {
            return "0.000%".to_owned();
        }
        let scaled = count as u128 * 100_000;
        let thousandths = (2 * scaled + total as u128) / (2 * total as u128);
        format!("{}.{:03}%", thousandths / 1000, thousandths % 1000)
    }
}

impl fmt::Display for FixedPercent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:04}%", self.0 / 10_000, self.0 % 10_000)
    }
}

/// One row of the domain table. Percentages are derived from the counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainStatsRow {
    /// Position within the group, from 1.
    pub no: usize,
    pub name: String,
    pub selector: String,
    /// Human-readable scope, e.g. `/common/*` or `rdf-schema#label`.
    pub domain: String,
    pub group: Group,
    pub triple_count: u64,
    pub group_total: u64,
    pub grand_total: u64,
}

impl DomainStatsRow {
    pub fn percent_of_all(&self) -> FixedPercent {
        FixedPercent::from_ratio(self.triple_count, self.grand_total)
    }

    pub fn percent_of_group(&self) -> FixedPercent {
        FixedPercent::from_ratio(self.triple_count, self.group_total)
    }
}

#[derive(Serialize, Deserialize)]
struct RowJson<'a> {
    no: usize,
    #[serde(borrow)]
    name: std::borrow::Cow<'a, str>,
    #[serde(borrow)]
    selector: std::borrow::Cow<'a, str>,
    #[serde(borrow)]
    domain: std::borrow::Cow<'a, str>,
    group: Group,
    triples: u64,
    group_total: u64,
    grand_total: u64,
    total_percent: f64,
    group_percent: f64,
    total_display: String,
    group_display: String,
}

impl Serialize for DomainStatsRow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RowJson {
            no: self.no,
            name: self.name.as_str().into(),
            selector: self.selector.as_str().into(),
            domain: self.domain.as_str().into(),
            group: self.group,
            triples: self.triple_count,
            group_total: self.group_total,
            grand_total: self.grand_total,
            total_percent: self.percent_of_all().as_f64(),
            group_percent: self.percent_of_group().as_f64(),
            total_display: FixedPercent::display3(self.triple_count, self.grand_total),
            group_display: FixedPercent::display3(self.triple_count, self.group_total),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DomainStatsRow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RowJson::deserialize(d)?;
        Ok(DomainStatsRow {
            no: r.no,
            name: r.name.into_owned(),
            selector: r.selector.into_owned(),
            domain: r.domain.into_owned(),
            group: r.group,
            triple_count: r.triples,
            group_total: r.group_total,
            grand_total: r.grand_total,
        })
    }
}

fn describe(selector: &str, groups: &DomainGroups) -> (String, String, Group) {
    match Selector::parse(selector) {
        Ok(Selector::Domain(d)) => match OwlKind::from_domain_key(&d) {
            Some(k) => (k.name().to_owned(), d, Group::Owl),
            None => (d.clone(), format!("/{d}/*"), groups.group_of_domain(&d)),
        },
        Ok(Selector::Type(t)) => {
            let group = groups.classify_predicate(&known::resource(&format!("{t}.x"))).group();
            (t.clone(), format!("{}/*", t.replace('.', "/")), group)
        }
        Ok(Selector::Predicate(p)) => {
            let r = known::resource(&p);
            let group = groups.classify_predicate(&r).group();
            let name = OwlKind::from_resource(&r).map_or_else(|| p.clone(), |k| k.name().to_owned());
            (name, p, group)
        }
        Ok(Selector::All) => ("all".to_owned(), "*".to_owned(), Group::Other),
        Err(_) => (selector.to_owned(), selector.to_owned(), Group::Other),
    }
}

/// One row per non-residual slice plus the residual when it is non-empty.
/// Rows are grouped in [`Group::ALL`] order and sorted by descending count,
/// ties by name, within each group.
pub fn domain_stats(manifests: &[SliceManifest], groups: &DomainGroups) -> Vec<DomainStatsRow> {
    let mut rows: Vec<DomainStatsRow> = manifests
        .iter()
        .filter(|m| m.selector != RESIDUAL_KEY || m.triple_count > 0)
        .map(|m| {
            let (name, domain, group) = if m.selector == RESIDUAL_KEY {
                (RESIDUAL_KEY.to_owned(), "*".to_owned(), Group::Other)
            } else {
                describe(&m.selector, groups)
            };
            DomainStatsRow {
                no: 0,
                name,
                selector: m.selector.clone(),
                domain,
                group,
                triple_count: m.triple_count,
                group_total: 0,
                grand_total: 0,
            }
        })
        .collect();
    let grand_total: u64 = rows.iter().map(|r| r.triple_count).sum();
    let mut group_totals: BTreeMap<Group, u64> = BTreeMap::new();
    for r in &rows {
        *group_totals.entry(r.group).or_default() += r.triple_count;
    }
    rows.sort_by(|a, b| {
        a.group.cmp(&b.group).then(b.triple_count.cmp(&a.triple_count)).then_with(|| a.name.cmp(&b.name))
    });
    let mut no = 0;
    let mut last_group = None;
    for r in &mut rows {
        if last_group != Some(r.group) {
            no = 0;
            last_group = Some(r.group);
        }
        no += 1;
        r.no = no;
        r.grand_total = grand_total;
        r.group_total = group_totals[&r.group];
    }
    rows
}

/// Domain table TSV: a `# group` line before each group's rows.
pub fn render_domain_tsv(rows: &[DomainStatsRow]) -> String {
    let mut out = String::from("No.\tName\tDomain\tTriples\tTotal %\tGroup %\n");
    let mut last = None;
    for r in rows {
        if last != Some(r.group) {
            out.push_str(&format!("# {}\n", r.group.title()));
            last = Some(r.group);
        }
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.no,
            r.name,
            r.domain,
            r.triple_count,
            FixedPercent::display3(r.triple_count, r.grand_total),
            FixedPercent::display3(r.triple_count, r.group_total)
        ));
    }
    out
}

/// One identifier slice as a share of all triples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierRow {
    pub slice: String,
    pub predicate: String,
    pub triple_count: u64,
    pub percent_of_all: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierTable {
    pub total_triples: u64,
    pub rows: Vec<IdentifierRow>,
    pub identifier_triples: u64,
    pub identifier_percent: String,
}

impl IdentifierTable {
    /// Identifier share of all triples, as a fraction.
    pub fn share(&self) -> f64 {
        if self.total_triples == 0 {
            0.0
        } else {
            self.identifier_triples as f64 / self.total_triples as f64
        }
    }
}

fn two_decimals(count: u64, total: u64) -> String {
    if total == 0 {
        return "0.00".to_owned();
    }
    let hundredths = (2 * count as u128 * 10_000 + total as u128) / (2 * total as u128);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Shares of the labelled identifier manifests against `total_triples`.
pub fn identifier_stats(manifests: &[SliceManifest], total_triples: u64) -> IdentifierTable {
    let rows: Vec<IdentifierRow> = manifests
        .iter()
        .map(|m| IdentifierRow {
            slice: m.label.clone().unwrap_or_else(|| m.selector.clone()),
            predicate: m.predicate.clone().unwrap_or_default(),
            triple_count: m.triple_count,
            percent_of_all: two_decimals(m.triple_count, total_triples),
        })
        .collect();
    let identifier_triples = rows.iter().map(|r| r.triple_count).sum();
    IdentifierTable {
        total_triples,
        rows,
        identifier_triples,
        identifier_percent: two_decimals(identifier_triples, total_triples),
    }
}

pub fn render_identifier_tsv(table: &IdentifierTable) -> String {
    let mut out = String::from("Slice\tPredicate\tTriples\t% of All\n");
    out.push_str(&format!("All data\t\t{}\t100\n", table.total_triples));
    for r in &table.rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.slice, r.predicate, r.triple_count, r.percent_of_all));
    }
    out.push_str(&format!("Total\t\t{}\t{}\n", table.identifier_triples, table.identifier_percent));
    out
}

/// Distinct values per triple position. Each count is at most `triples`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PositionCardinality {
    pub triples: u64,
    pub unique_subjects: u64,
    pub unique_predicates: u64,
    pub unique_objects: u64,
}

fn open_slice(path: &Path) -> Result<TripleStream<Box<dyn std::io::BufRead + Send>>, ProfilerError> {
    let reader = open_path(path).map_err(|source| ProfilerError::Unreadable { path: path.to_owned(), source })?;
    Ok(TripleStream::new(reader, StreamOptions { parse: ParseOptions::lenient() }))
}

fn sort_err(path: &Path) -> impl Fn(std::io::Error) -> ProfilerError + '_ {
    move |source| ProfilerError::Unreadable { path: path.to_owned(), source }
}

/// Exact distinct counts through one external sort of position-tagged tokens.
pub fn unique_position_counts(path: &Path, sort: &SortConfig) -> Result<PositionCardinality, ProfilerError> {
    let mut sorter = ExternalSorter::new(sort.clone());
    let mut triples = 0;
    for t in open_slice(path)?.triples() {
        let t = t.map_err(|source| ProfilerError::Stream { path: path.to_owned(), source })?;
        triples += 1;
        let tokens = [t.subject.value().to_owned(), t.predicate.value().to_owned(), t.object.to_token()];
        for (tag, token) in tokens.into_iter().enumerate() {
            let mut rec = Vec::with_capacity(token.len() + 1);
            rec.push(tag as u8);
            rec.extend_from_slice(token.as_bytes());
            sorter.push_owned(rec).map_err(sort_err(path))?;
        }
    }
    let mut counts = [0u64; 3];
    for rec in dedup_sorted(sorter.finish().map_err(sort_err(path))?) {
        counts[rec.map_err(sort_err(path))?[0] as usize] += 1;
    }
    Ok(PositionCardinality {
        triples,
        unique_subjects: counts[0],
        unique_predicates: counts[1],
        unique_objects: counts[2],
    })
}

/// Distinct name-slice subjects, split by identifier kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopicEstimate {
    /// Distinct `/m.` and `/g.` subjects.
    pub topics: u64,
    pub mids: u64,
    pub gids: u64,
    /// Distinct subjects of any other kind, not counted as topics.
    pub other_subjects: u64,
    pub triples: u64,
}

/// Counts distinct topic subjects of a name slice.
pub fn estimate_topics(path: &Path, sort: &SortConfig) -> Result<TopicEstimate, ProfilerError> {
    let mut sorter = ExternalSorter::new(sort.clone());
    let mut stream = open_slice(path)?;
    let mut est = TopicEstimate::default();
    while let Some(outcome) = stream.next() {
        let outcome = outcome.map_err(|source| ProfilerError::Stream { path: path.to_owned(), source })?;
        let crate::ntparse::ParseOutcome::Ok(t) = outcome else { continue };
        if !known::is(&t.predicate, known::NAME) {
            return Err(ProfilerError::ContractViolation {
                path: path.to_owned(),
                line: stream.counters().lines,
                predicate: t.predicate.value().to_owned(),
            });
        }
        est.triples += 1;
        let tag = match t.subject.kind() {
            ResourceKind::Mid => 0u8,
            ResourceKind::Gid => 1,
            _ => 2,
        };
        let mut rec = vec![tag];
        rec.extend_from_slice(t.subject.value().as_bytes());
        sorter.push_owned(rec).map_err(sort_err(path))?;
    }
    for rec in dedup_sorted(sorter.finish().map_err(sort_err(path))?) {
        match rec.map_err(sort_err(path))?[0] {
            0 => est.mids += 1,
            1 => est.gids += 1,
            _ => est.other_subjects += 1,
        }
    }
    est.topics = est.mids + est.gids;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(selector: &str, count: u64) -> SliceManifest {
        SliceManifest {
            selector: selector.into(),
            label: None,
            predicate: None,
            path: None,
            triple_count: count,
            byte_count: 0,
            checksum: None,
            expected_count: None,
        }
    }

    #[test]
    fn reference_common_row() {
        let groups = DomainGroups::shipped();
        let manifests: Vec<_> = groups
            .reference_counts()
            .map(|(g, name, c)| {
                let key = match g {
                    Group::Owl => OwlKind::from_name(name).unwrap().domain_key().to_owned(),
                    _ => name.to_owned(),
                };
                manifest(&format!("domain:{key}"), c.unwrap())
            })
            .collect();
        let rows = domain_stats(&manifests, groups);
        let common = rows.iter().find(|r| r.name == "common").unwrap();
        assert_eq!(FixedPercent::display3(common.triple_count, common.grand_total), "45.658%");
        assert_eq!(FixedPercent::display3(common.triple_count, common.group_total), "58.507%");
        assert_eq!(common.group, Group::Implementation);
        let label = rows.iter().find(|r| r.name == "label").unwrap();
        assert_eq!((label.group, label.domain.as_str()), (Group::Owl, "rdf-schema#label"));
        assert_eq!(rows.len(), 105);
    }

    #[test]
    fn single_slice_is_whole() {
        let rows = domain_stats(&[manifest("domain:music", 7)], DomainGroups::shipped());
        assert_eq!(rows[0].percent_of_all(), FixedPercent(1_000_000));
        assert_eq!(rows[0].percent_of_group().to_string(), "100.0000%");
        assert!(domain_stats(&[], DomainGroups::shipped()).is_empty());
    }

    #[test]
    fn display_rounds_to_three_decimals() {
        assert_eq!(FixedPercent::display3(1089, 3_130_753_066), "0.000%");
        assert_eq!(FixedPercent::display3(22_880, 3_130_753_066), "0.001%");
        assert_eq!(FixedPercent::display3(0, 0), "0.000%");
    }

    #[test]
    fn rows_sort_within_groups() {
        let rows = domain_stats(
            &[
                manifest("domain:music", 2),
                manifest("domain:film", 9),
                manifest("domain:type", 1),
                manifest(RESIDUAL_KEY, 0),
            ],
            DomainGroups::shipped(),
        );
        let names: Vec<_> = rows.iter().map(|r| (r.name.as_str(), r.no)).collect();
        assert_eq!(names, [("type", 1), ("film", 1), ("music", 2)]);
    }

    fn write_slice(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        use std::io::Write;
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn repeated_triple_is_one_each() {
        let f = write_slice(&["/m.1\t/a.b.c\t/m.2"; 4]);
        let c = unique_position_counts(f.path(), &SortConfig::default()).unwrap();
        assert_eq!((c.triples, c.unique_subjects, c.unique_predicates, c.unique_objects), (4, 1, 1, 1));
    }

    #[test]
    fn languages_collapse_to_one_topic() {
        let f = write_slice(&[
            "/m.1\t/type.object.name\t\"A\"@en",
            "/m.1\t/type.object.name\t\"A\"@de",
            "/m.1\t/type.object.name\t\"A\"@fr",
            "/g.2\t/type.object.name\t\"B\"@en",
        ]);
        let est = estimate_topics(f.path(), &SortConfig::default()).unwrap();
        assert_eq!((est.topics, est.mids, est.gids, est.triples), (2, 1, 1, 4));
        let bad = write_slice(&["/m.1\t/type.object.type\t/a.b"]);
        assert!(matches!(
            estimate_topics(bad.path(), &SortConfig::default()),
            Err(ProfilerError::ContractViolation { line: 1, .. })
        ));
        assert!(matches!(
            estimate_topics(Path::new("/nonexistent/slice.tsv"), &SortConfig::default()),
            Err(ProfilerError::Unreadable { .. })
        ));
    }

    #[test]
    fn identifier_table_shares() {
        let mut m = manifest("predicate:/type.object.name", 25);
        m.label = Some("name".into());
        let t = identifier_stats(&[m], 200);
        assert_eq!((t.identifier_percent.as_str(), t.rows[0].slice.as_str()), ("12.50", "name"));
        assert!(render_identifier_tsv(&t).contains("Total\t\t25\t12.50"));
    }
}
