//! Reconstruction of one domain's types and properties from its slice, with
//! names, mids and descriptions looked up in the identifier slices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ntparse::{
    open_path, Node, ParseOptions, ParseOutcome, Resource, ResourceKind, StreamError, StreamOptions, TripleStream,
};
use crate::schema::{domain_of, known, parse_schema_path, type_of, Depth, SchemaError, SchemaPath};

#[derive(Debug, Error)]
pub enum SchemaRecError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Stream {
        path: PathBuf,
        #[source]
        source: StreamError,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// Which key a metadata value was found under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lookup {
    PathKeyed,
    MidKeyed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LangString {
    pub lang: String,
    pub text: String,
}

/// Metadata of one type or property; absent fields mean nothing was found.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub mids: Vec<String>,
    /// Set when more than one mid binds the path.
    pub multiple_mids: bool,
    pub names: Vec<LangString>,
    pub name_lookup: Option<Lookup>,
    pub descriptions: Vec<LangString>,
    pub description_lookup: Option<Lookup>,
}

impl Metadata {
    pub fn mid(&self) -> Option<&str> {
        self.mids.first().map(String::as_str)
    }

    pub fn name(&self, lang: &str) -> Option<&str> {
        self.names.iter().find(|n| n.lang == lang).map(|n| n.text.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.mids.is_empty() && self.names.is_empty() && self.descriptions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaType {
    pub path: String,
    #[serde(flatten)]
    pub metadata: Metadata,
}

/// A property-depth predicate of the domain with its triple count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaProperty {
    pub path: String,
    pub triple_count: u64,
    #[serde(flatten)]
    pub metadata: Metadata,
}

impl SchemaProperty {
    pub fn schema_path(&self) -> SchemaPath {
        parse_schema_path(&self.path).expect("stored property paths parse")
    }
}

/// Every property's parent type is listed in `types`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSchema {
    pub schema_version: u32,
    pub domain: String,
    pub source_triple_count: u64,
    /// Triples of the slice whose predicate lies outside the domain.
    pub foreign_triple_count: u64,
    /// Set when the domain slice held no triples of the domain.
    pub empty: bool,
    pub types: Vec<SchemaType>,
    pub properties: Vec<SchemaProperty>,
    /// Domain predicates that are not property-depth paths.
    pub other_predicates: Vec<String>,
    /// Schema paths of other domains that domain triples point at.
    pub references: Vec<String>,
}

impl DomainSchema {
    pub fn type_paths(&self) -> Vec<&str> {
        self.types.iter().map(|t| t.path.as_str()).collect()
    }

    pub fn property(&self, path: &str) -> Option<&SchemaProperty> {
        self.properties.iter().find(|p| p.path == path)
    }
}

/// Paths of the slices a reconstruction reads.
#[derive(Debug, Clone, Default)]
pub struct SchemaSources {
    /// Slices holding the domain's triples; none yields an empty schema.
    pub domain: Vec<PathBuf>,
    pub names: Option<PathBuf>,
    pub descriptions: Option<PathBuf>,
    pub types: Option<PathBuf>,
    /// Further slices scanned for mid bindings, e.g. the `type` domain slice.
    pub bindings: Vec<PathBuf>,
}

/// Distinct `/domain.type` prefixes of property paths, sorted.
pub fn infer_types_from_properties(props: &[SchemaPath]) -> Result<Vec<SchemaPath>, SchemaError> {
    let mut out = BTreeSet::new();
    for p in props {
        if p.depth() != Depth::Property {
            return Err(SchemaError::NotPropertyDepth(p.render()));
        }
        out.insert(p.parent().expect("property paths have a parent"));
    }
    Ok(out.into_iter().collect())
}

fn stream(path: &Path) -> Result<TripleStream<Box<dyn std::io::BufRead + Send>>, SchemaRecError> {
    let reader = open_path(path).map_err(|source| SchemaRecError::Unreadable { path: path.to_owned(), source })?;
    Ok(TripleStream::new(reader, StreamOptions { parse: ParseOptions::lenient() }))
}

fn for_each_triple(path: &Path, mut f: impl FnMut(crate::ntparse::Triple)) -> Result<(), SchemaRecError> {
    for outcome in stream(path)? {
        match outcome.map_err(|source| SchemaRecError::Stream { path: path.to_owned(), source })? {
            ParseOutcome::Ok(t) => f(t),
            _ => continue,
        }
    }
    Ok(())
}

fn domain_segment(path: &str) -> &str {
    path[1..].split('.').next().unwrap_or_default()
}

/// Builds the schema of `domain` from its slice, then annotates it.
pub fn reconstruct_schema(domain: &str, sources: &SchemaSources) -> Result<DomainSchema, SchemaRecError> {
    let mut predicates: BTreeMap<String, u64> = BTreeMap::new();
    let mut references = BTreeSet::new();
    let mut foreign = 0;
    for path in &sources.domain {
        for_each_triple(path, |t| {
            if domain_of(&t.predicate) != domain {
                foreign += 1;
                return;
            }
            *predicates.entry(t.predicate.value().to_owned()).or_default() += 1;
            if let Node::Resource(o) = &t.object {
                if o.kind() == ResourceKind::SchemaPath && domain_of(o) != domain {
                    references.insert(o.value().to_owned());
                }
            }
        })?;
    }
    let source_triple_count = predicates.values().sum();

    let mut props = Vec::new();
    let mut other_predicates = Vec::new();
    for (p, count) in &predicates {
        match parse_schema_path(p) {
            Ok(sp) if sp.depth() == Depth::Property && known::resource(p).kind() == ResourceKind::SchemaPath => {
                props.push((sp, *count))
            }
            _ => other_predicates.push(p.clone()),
        }
    }
    let paths: Vec<SchemaPath> = props.iter().map(|(p, _)| p.clone()).collect();
    let mut types: BTreeSet<String> = infer_types_from_properties(&paths)?.iter().map(SchemaPath::render).collect();
    if let Some(type_slice) = &sources.types {
        for_each_triple(type_slice, |t| {
            if !known::is(&t.predicate, known::TYPE) {
                return;
            }
            if let Node::Resource(o) = &t.object {
                let v = o.value();
                if o.kind() == ResourceKind::SchemaPath && domain_segment(v) == domain && type_of(o) == Some(v) {
                    types.insert(v.to_owned());
                }
            }
        })?;
    }

    let mut schema = DomainSchema {
        schema_version: crate::SCHEMA_VERSION,
        domain: domain.to_owned(),
        source_triple_count,
        foreign_triple_count: foreign,
        empty: source_triple_count == 0,
        types: types.into_iter().map(|path| SchemaType { path, metadata: Metadata::default() }).collect(),
        properties: props
            .into_iter()
            .map(|(p, triple_count)| SchemaProperty { path: p.render(), triple_count, metadata: Metadata::default() })
            .collect(),
        other_predicates,
        references: references.into_iter().collect(),
    };
    resolve_schema_metadata(&mut schema, sources)?;
    Ok(schema)
}

fn lang_string(n: &Node) -> Option<LangString> {
    let l = n.as_literal()?;
    Some(LangString { lang: l.lang().unwrap_or_default().to_owned(), text: l.lexical().to_owned() })
}

/// Fills names, mids and descriptions of every type and property.
///
/// A mid binds a path through `(path, /type.object.*, mid)`. Names and
/// descriptions are looked up keyed on the path first and on its mids
/// second; the lookup that succeeded is recorded.
pub fn resolve_schema_metadata(schema: &mut DomainSchema, sources: &SchemaSources) -> Result<(), SchemaRecError> {
    let wanted: BTreeSet<String> =
        schema.types.iter().map(|t| t.path.clone()).chain(schema.properties.iter().map(|p| p.path.clone())).collect();
    if wanted.is_empty() {
        return Ok(());
    }

    let mut mids: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let binding_sources =
        sources.bindings.iter().chain(&sources.names).chain(&sources.descriptions).chain(&sources.types);
    for path in binding_sources {
        for_each_triple(path, |t| {
            let binds = type_of(&t.predicate) == Some(known::OBJECT_TYPE);
            if binds && wanted.contains(t.subject.value()) {
                if let Node::Resource(o) = &t.object {
                    if o.kind() == ResourceKind::Mid {
                        mids.entry(t.subject.value().to_owned()).or_default().insert(o.value().to_owned());
                    }
                }
            }
        })?;
    }
    let mid_owner: BTreeMap<&str, Vec<&str>> = mids.iter().fold(BTreeMap::new(), |mut acc, (path, ms)| {
        for m in ms {
            acc.entry(m.as_str()).or_insert_with(Vec::new).push(path.as_str());
        }
        acc
    });

    type Found = BTreeMap<String, (BTreeSet<LangString>, BTreeSet<LangString>)>;
    let collect = |slice: &Option<PathBuf>, predicate: &str| -> Result<Found, SchemaRecError> {
        let mut found: Found = BTreeMap::new();
        let Some(slice) = slice else { return Ok(found) };
        for_each_triple(slice, |t| {
            if !known::is(&t.predicate, predicate) {
                return;
            }
            let Some(value) = lang_string(&t.object) else { return };
            let subject = t.subject.value();
            if wanted.contains(subject) {
                found.entry(subject.to_owned()).or_default().0.insert(value);
            } else if let Some(owners) = mid_owner.get(subject) {
                for owner in owners {
                    found.entry((*owner).to_owned()).or_default().1.insert(value.clone());
                }
            }
        })?;
        Ok(found)
    };
    let names = collect(&sources.names, known::NAME)?;
    let descriptions = collect(&sources.descriptions, known::DESCRIPTION)?;

    let pick = |found: &Found, path: &str| -> (Vec<LangString>, Option<Lookup>) {
        match found.get(path) {
            Some((by_path, _)) if !by_path.is_empty() => (by_path.iter().cloned().collect(), Some(Lookup::PathKeyed)),
            Some((_, by_mid)) if !by_mid.is_empty() => (by_mid.iter().cloned().collect(), Some(Lookup::MidKeyed)),
            _ => (Vec::new(), None),
        }
    };
    let annotate = |path: &str, meta: &mut Metadata| {
        meta.mids = mids.get(path).map(|m| m.iter().cloned().collect()).unwrap_or_default();
        meta.multiple_mids = meta.mids.len() > 1;
        (meta.names, meta.name_lookup) = pick(&names, path);
        (meta.descriptions, meta.description_lookup) = pick(&descriptions, path);
    };
    for t in &mut schema.types {
        annotate(&t.path, &mut t.metadata);
    }
    for p in &mut schema.properties {
        annotate(&p.path, &mut p.metadata);
    }
    Ok(())
}

fn bracket(path: &str) -> String {
    format!("<{path}>")
}

/// Plain-text listing: the types, the properties, then each annotated path
/// with its name and description triples.
pub fn render_listing(schema: &DomainSchema) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# /{}: {} triples, {} types, {} properties",
        schema.domain,
        schema.source_triple_count,
        schema.types.len(),
        schema.properties.len()
    );
    let _ = writeln!(out, "\n# types");
    for t in &schema.types {
        let _ = writeln!(out, "{}", bracket(&t.path));
    }
    let _ = writeln!(out, "\n# properties");
    for p in &schema.properties {
        let _ = writeln!(out, "{}", bracket(&p.path));
    }
    let entries = schema
        .types
        .iter()
        .map(|t| (&t.path, &t.metadata))
        .chain(schema.properties.iter().map(|p| (&p.path, &p.metadata)));
    for (path, meta) in entries.filter(|(_, m)| !m.is_empty()) {
        let _ = writeln!(out);
        match meta.mids.as_slice() {
            [] => {
                let _ = writeln!(out, "# {path}");
            }
            mids => {
                let _ = writeln!(out, "# {path} has mid {}", mids.join(", "));
            }
        }
        let name_subject = match meta.name_lookup {
            Some(Lookup::MidKeyed) => meta.mid().unwrap_or(path),
            _ => path,
        };
        for n in &meta.names {
            let _ = writeln!(out, "{}\t{}\t{}", bracket(name_subject), bracket(known::NAME), quoted(n));
        }
        let desc_subject = match meta.description_lookup {
            Some(Lookup::PathKeyed) => path.as_str(),
            _ => meta.mid().unwrap_or(path),
        };
        for d in &meta.descriptions {
            let _ = writeln!(out, "{}\t{}\t{}", bracket(desc_subject), bracket(known::DESCRIPTION), quoted(d));
        }
    }
    if !schema.references.is_empty() {
        let _ = writeln!(out, "\n# references");
        for r in &schema.references {
            let _ = writeln!(out, "{}", bracket(r));
        }
    }
    out
}

fn quoted(s: &LangString) -> String {
    if s.lang.is_empty() {
        format!("\"{}\"", s.text)
    } else {
        format!("\"{}\"@{}", s.text, s.lang)
    }
}

/// Resource of a schema path, for callers building fixtures.
pub fn path_resource(path: &str) -> Resource {
    known::resource(path)
}
