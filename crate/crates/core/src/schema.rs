//! Freebase's `/domain/type/property` identifier scheme and the grouping of
//! predicates into implementation, OWL and subject-matter domains.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ntparse::{normalize_iri, Resource, ResourceKind};

/// Domain key for predicates that have no usable domain.
pub const UNKNOWN_DOMAIN: &str = "__unknown__";

const DEFAULT_GROUPS: &str = include_str!("../data/domain_groups.txt");

/// Registry of the predicates other modules depend on. Nothing outside this
/// module spells these identifiers out.
pub mod known {
    use crate::ntparse::{normalize_iri, Resource};

    pub const NAME: &str = "/type.object.name";
    pub const TYPE: &str = "/type.object.type";
    pub const KEY: &str = "/type.object.key";
    pub const DESCRIPTION: &str = "/common.topic.description";
    pub const ALIAS: &str = "/common.topic.alias";
    pub const INSTANCE: &str = "/type.type.instance";
    pub const NOTABLE_FOR: &str = "/common.topic.notable_for";
    pub const NOTABLE_DISPLAY_NAME: &str = "/common.notable_for.display_name";
    pub const NOTABLE_OBJECT: &str = "/common.notable_for.object";
    pub const NOTABLE_PREDICATE: &str = "/common.notable_for.predicate";
    pub const NOTABLE_NOTABLE_OBJECT: &str = "/common.notable_for.notable_object";
    /// Type-level path owning the four `notable_for` attribute predicates.
    pub const NOTABLE_FOR_TYPE: &str = "/common.notable_for";
    /// Type-level path of the generic object properties (`name`, `type`, `mid`, ...).
    pub const OBJECT_TYPE: &str = "/type.object";
    /// Object-side id binding used when reconstructing schema metadata.
    pub const MID: &str = "/type.object.mid";

    pub const OWL_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const OWL_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const OWL_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const OWL_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const OWL_INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";

    /// Every registered predicate, for closure checks.
    pub const ALL: &[&str] = &[
        NAME,
        TYPE,
        KEY,
        DESCRIPTION,
        ALIAS,
        INSTANCE,
        NOTABLE_FOR,
        NOTABLE_DISPLAY_NAME,
        NOTABLE_OBJECT,
        NOTABLE_PREDICATE,
        NOTABLE_NOTABLE_OBJECT,
        MID,
        OWL_LABEL,
        OWL_TYPE,
        OWL_DOMAIN,
        OWL_RANGE,
        OWL_INVERSE_OF,
    ];

    pub fn resource(id: &str) -> Resource {
        normalize_iri(id)
    }

    /// True when `r` is the registered predicate `id`. W3C IRIs match under
    /// either URL scheme.
    pub fn is(r: &Resource, id: &str) -> bool {
        let value = r.value();
        if value == id {
            return true;
        }
        match (value.strip_prefix("https://"), id.strip_prefix("http://")) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

/// The five identifier slices: names, types, keys, descriptions and aliases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierSlice {
    Name,
    Type,
    Key,
    Description,
    Alias,
}

impl IdentifierSlice {
    pub const ALL: [IdentifierSlice; 5] = [
        IdentifierSlice::Name,
        IdentifierSlice::Type,
        IdentifierSlice::Key,
        IdentifierSlice::Description,
        IdentifierSlice::Alias,
    ];

    pub fn predicate(self) -> &'static str {
        match self {
            IdentifierSlice::Name => known::NAME,
            IdentifierSlice::Type => known::TYPE,
            IdentifierSlice::Key => known::KEY,
            IdentifierSlice::Description => known::DESCRIPTION,
            IdentifierSlice::Alias => known::ALIAS,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IdentifierSlice::Name => "name",
            IdentifierSlice::Type => "type",
            IdentifierSlice::Key => "keys",
            IdentifierSlice::Description => "desc",
            IdentifierSlice::Alias => "akas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OwlKind {
    #[serde(rename = "type")]
    Type,
    #[serde(rename = "label")]
    Label,
    #[serde(rename = "domain")]
    Domain,
    #[serde(rename = "range")]
    Range,
    #[serde(rename = "inverseOf")]
    InverseOf,
}

impl OwlKind {
    pub const ALL: [OwlKind; 5] = [OwlKind::Type, OwlKind::Label, OwlKind::Domain, OwlKind::Range, OwlKind::InverseOf];

    pub fn iri(self) -> &'static str {
        match self {
            OwlKind::Type => known::OWL_TYPE,
            OwlKind::Label => known::OWL_LABEL,
            OwlKind::Domain => known::OWL_DOMAIN,
            OwlKind::Range => known::OWL_RANGE,
            OwlKind::InverseOf => known::OWL_INVERSE_OF,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OwlKind::Type => "type",
            OwlKind::Label => "label",
            OwlKind::Domain => "domain",
            OwlKind::Range => "range",
            OwlKind::InverseOf => "inverseOf",
        }
    }

    /// The `namespace#fragment` domain key, e.g. `rdf-schema#label`.
    pub fn domain_key(self) -> &'static str {
        match self {
            OwlKind::Type => "rdf-syntax-ns#type",
            OwlKind::Label => "rdf-schema#label",
            OwlKind::Domain => "rdf-schema#domain",
            OwlKind::Range => "rdf-schema#range",
            OwlKind::InverseOf => "owl#inverseOf",
        }
    }

    pub fn from_resource(r: &Resource) -> Option<OwlKind> {
        OwlKind::ALL.into_iter().find(|k| known::is(r, k.iri()))
    }

    pub fn from_domain_key(key: &str) -> Option<OwlKind> {
        OwlKind::ALL.into_iter().find(|k| k.domain_key() == key)
    }

    pub fn from_name(name: &str) -> Option<OwlKind> {
        OwlKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Implementation,
    Owl,
    SubjectMatter,
    Other,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::Implementation, Group::Owl, Group::SubjectMatter, Group::Other];

    pub fn title(self) -> &'static str {
        match self {
            Group::Implementation => "Freebase Implementation Domains",
            Group::Owl => "OWL Domains",
            Group::SubjectMatter => "Subject Matter Domains",
            Group::Other => "Other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateClass {
    FreebaseImplementation(String),
    Owl(OwlKind),
    SubjectMatter(String),
    KeyNamespace,
    Unknown,
}

impl PredicateClass {
    pub fn group(&self) -> Group {
        match self {
            PredicateClass::FreebaseImplementation(_) | PredicateClass::KeyNamespace => Group::Implementation,
            PredicateClass::Owl(_) => Group::Owl,
            PredicateClass::SubjectMatter(_) => Group::SubjectMatter,
            PredicateClass::Unknown => Group::Other,
        }
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{0:?} is not a schema path")]
    NotASchemaPath(String),
    #[error("{0:?} has an empty path segment")]
    EmptySegment(String),
    #[error("{0:?} is not a property-depth path")]
    NotPropertyDepth(String),
    #[error("domain groups line {line}: {message}")]
    GroupsSyntax { line: usize, message: String },
    #[error("cannot read domain groups: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    Domain,
    Type,
    Property,
}

/// A decomposed `/domain[.type[.property]]` identifier.
///
/// Paths deeper than three segments keep their whole tail in `property` and
/// set `compound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SchemaPath {
    domain: String,
    #[serde(rename = "type")]
    type_: Option<String>,
    property: Option<String>,
    compound: bool,
}

impl SchemaPath {
    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn type_segment(&self) -> Option<&str> {
        self.type_.as_deref()
    }

    pub fn property(&self) -> Option<&str> {
        self.property.as_deref()
    }

    pub fn is_compound(&self) -> bool {
        self.compound
    }

    pub fn depth(&self) -> Depth {
        match (&self.type_, &self.property) {
            (None, _) => Depth::Domain,
            (Some(_), None) => Depth::Type,
            (Some(_), Some(_)) => Depth::Property,
        }
    }

    /// Canonical dotted rendering, `/d.t.p`.
    pub fn render(&self) -> String {
        let mut s = format!("/{}", self.domain);
        for seg in [&self.type_, &self.property].into_iter().flatten() {
            s.push('.');
            s.push_str(seg);
        }
        s
    }

    /// Drops the last level: property to type, type to domain.
    pub fn parent(&self) -> Option<SchemaPath> {
        match self.depth() {
            Depth::Domain => None,
            Depth::Type => {
                Some(SchemaPath { domain: self.domain.clone(), type_: None, property: None, compound: false })
            }
            Depth::Property => Some(SchemaPath {
                domain: self.domain.clone(),
                type_: self.type_.clone(),
                property: None,
                compound: false,
            }),
        }
    }

    pub fn to_resource(&self) -> Resource {
        normalize_iri(&self.render())
    }
}

impl fmt::Display for SchemaPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Splits a dotted Freebase path into its schema levels.
pub fn parse_schema_path(id: &str) -> Result<SchemaPath, SchemaError> {
    let r = normalize_iri(id);
    if !matches!(r.kind(), ResourceKind::SchemaPath | ResourceKind::Key) {
        return Err(SchemaError::NotASchemaPath(id.to_owned()));
    }
    let body = &r.value()[1..];
    let mut parts = body.splitn(3, '.');
    let domain = parts.next().unwrap_or_default();
    let type_ = parts.next();
    let property = parts.next();
    if domain.is_empty() || type_ == Some("") || property.is_some_and(|p| p.split('.').any(str::is_empty)) {
        return Err(SchemaError::EmptySegment(id.to_owned()));
    }
    Ok(SchemaPath {
        domain: domain.to_owned(),
        type_: type_.map(str::to_owned),
        property: property.map(str::to_owned),
        compound: property.is_some_and(|p| p.contains('.')),
    })
}

/// Domain key of a predicate: first path segment for Freebase paths,
/// `namespace#fragment` for OWL predicates, [`UNKNOWN_DOMAIN`] otherwise.
pub fn domain_of(p: &Resource) -> &str {
    match p.kind() {
        ResourceKind::SchemaPath | ResourceKind::Key => {
            let body = &p.value()[1..];
            body.split('.').next().filter(|s| !s.is_empty()).unwrap_or(UNKNOWN_DOMAIN)
        }
        ResourceKind::ExternalIri => OwlKind::from_resource(p).map_or(UNKNOWN_DOMAIN, OwlKind::domain_key),
        ResourceKind::Mid | ResourceKind::Gid => UNKNOWN_DOMAIN,
    }
}

/// Type-level prefix of a predicate, e.g. `/common.notable_for`.
pub fn type_of(p: &Resource) -> Option<&str> {
    if p.kind() != ResourceKind::SchemaPath {
        return None;
    }
    let v = p.value();
    let first = v[1..].find('.')? + 1;
    let second = v[first + 1..].find('.').map_or(v.len(), |i| first + 1 + i);
    Some(&v[..second])
}

/// Domain-group table: which domains implement Freebase itself, plus the
/// reference triple counts shipped with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainGroups {
    implementation: BTreeSet<String>,
    reference: Vec<(Group, String, Option<u64>)>,
}

impl Default for DomainGroups {
    fn default() -> Self {
        DomainGroups::parse(DEFAULT_GROUPS).expect("shipped domain groups parse")
    }
}

impl DomainGroups {
    /// Shared instance of the shipped table.
    pub fn shipped() -> &'static DomainGroups {
        static GROUPS: OnceLock<DomainGroups> = OnceLock::new();
        GROUPS.get_or_init(DomainGroups::default)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        DomainGroups::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `[implementation]`, `[owl]` and `[subject_matter]` sections of
    /// `name[\tcount]` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut implementation = BTreeSet::new();
        let mut reference = Vec::new();
        let mut group = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                group = Some(match header {
                    "implementation" => Group::Implementation,
                    "owl" => Group::Owl,
                    "subject_matter" => Group::SubjectMatter,
                    other => {
                        return Err(SchemaError::GroupsSyntax {
                            line: line_no,
                            message: format!("unknown group {other:?}"),
                        })
                    }
                });
                continue;
            }
            let group = group.ok_or_else(|| SchemaError::GroupsSyntax {
                line: line_no,
                message: "entry before any group header".into(),
            })?;
            let mut cols = line.split_whitespace();
            let name = cols.next().unwrap_or_default().to_owned();
            let count = cols
                .next()
                .map(|c| c.parse::<u64>())
                .transpose()
                .map_err(|e| SchemaError::GroupsSyntax { line: line_no, message: e.to_string() })?;
            match group {
                Group::Implementation => {
                    implementation.insert(name.clone());
                }
                Group::Owl if OwlKind::from_name(&name).is_none() => {
                    return Err(SchemaError::GroupsSyntax {
                        line: line_no,
                        message: format!("unknown OWL predicate {name:?}"),
                    })
                }
                _ => {}
            }
            reference.push((group, name, count));
        }
        Ok(DomainGroups { implementation, reference })
    }

    pub fn implementation_domains(&self) -> impl Iterator<Item = &str> {
        self.implementation.iter().map(String::as_str)
    }

    /// Reference counts in file order within each group: `(group, name, count)`.
    pub fn reference_counts(&self) -> impl Iterator<Item = (Group, &str, Option<u64>)> {
        self.reference.iter().map(|(g, n, c)| (*g, n.as_str(), *c))
    }

    pub fn reference_count(&self, group: Group, name: &str) -> Option<u64> {
        self.reference.iter().find(|(g, n, _)| *g == group && n == name).and_then(|(_, _, c)| *c)
    }

    pub fn classify_predicate(&self, p: &Resource) -> PredicateClass {
        match p.kind() {
            ResourceKind::ExternalIri => OwlKind::from_resource(p).map_or(PredicateClass::Unknown, PredicateClass::Owl),
            ResourceKind::Key => PredicateClass::KeyNamespace,
            ResourceKind::Mid | ResourceKind::Gid => PredicateClass::Unknown,
            ResourceKind::SchemaPath => {
                let domain = domain_of(p);
                if domain == UNKNOWN_DOMAIN {
                    PredicateClass::Unknown
                } else if self.implementation.contains(domain) {
                    PredicateClass::FreebaseImplementation(domain.to_owned())
                } else {
                    PredicateClass::SubjectMatter(domain.to_owned())
                }
            }
        }
    }

    /// Group of a domain key as produced by [`domain_of`].
    pub fn group_of_domain(&self, key: &str) -> Group {
        if self.implementation.contains(key) {
            Group::Implementation
        } else if OwlKind::from_domain_key(key).is_some() {
            Group::Owl
        } else if key == UNKNOWN_DOMAIN || key.is_empty() || key.contains(['#', ':', '/']) {
            Group::Other
        } else {
            Group::SubjectMatter
        }
    }
}

/// Classifies with the shipped domain-group table.
pub fn classify_predicate(p: &Resource) -> PredicateClass {
    DomainGroups::shipped().classify_predicate(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(d: &str, t: Option<&str>, p: Option<&str>) -> SchemaPath {
        SchemaPath {
            domain: d.into(),
            type_: t.map(Into::into),
            property: p.map(Into::into),
            compound: p.is_some_and(|p| p.contains('.')),
        }
    }

    #[test]
    fn parse_examples() {
        let p = parse_schema_path("/people.person.date_of_birth").unwrap();
        assert_eq!(p, path("people", Some("person"), Some("date_of_birth")));
        assert_eq!(p.depth(), Depth::Property);
        let d = parse_schema_path("/film").unwrap();
        assert_eq!(d, path("film", None, None));
        assert_eq!(d.depth(), Depth::Domain);
        assert!(matches!(parse_schema_path("/m.abc123"), Err(SchemaError::NotASchemaPath(_))));
        assert!(matches!(parse_schema_path("/g.125920_xt"), Err(SchemaError::NotASchemaPath(_))));
        assert!(matches!(parse_schema_path("/people..x"), Err(SchemaError::EmptySegment(_))));
    }

    #[test]
    fn deep_paths_are_kept_whole() {
        let p = parse_schema_path("/base.schemastaging.person_extra.height_meters").unwrap();
        assert!(p.is_compound());
        assert_eq!(p.depth(), Depth::Property);
        assert_eq!(p.property(), Some("person_extra.height_meters"));
        assert_eq!(p.render(), "/base.schemastaging.person_extra.height_meters");
    }

    #[test]
    fn parent_hops_one_level() {
        let p = parse_schema_path("/bicycles.bicycle_model.speeds").unwrap();
        assert_eq!(p.parent().unwrap().render(), "/bicycles.bicycle_model");
        assert_eq!(p.parent().unwrap().parent().unwrap().render(), "/bicycles");
    }

    #[test]
    fn classify_examples() {
        let g = DomainGroups::shipped();
        assert_eq!(
            g.classify_predicate(&known::resource(known::DESCRIPTION)),
            PredicateClass::FreebaseImplementation("common".into())
        );
        assert_eq!(
            g.classify_predicate(&known::resource("https://www.w3.org/2000/01/rdf-schema#label")),
            PredicateClass::Owl(OwlKind::Label)
        );
        assert_eq!(
            g.classify_predicate(&known::resource("/music.recording.artist")),
            PredicateClass::SubjectMatter("music".into())
        );
        assert_eq!(g.classify_predicate(&known::resource("/key.wikipedia.en")), PredicateClass::KeyNamespace);
        assert_eq!(g.classify_predicate(&known::resource("http://example.org/p")), PredicateClass::Unknown);
    }

    #[test]
    fn domain_of_examples() {
        assert_eq!(domain_of(&known::resource(known::NAME)), "type");
        assert_eq!(domain_of(&known::resource(known::OWL_LABEL)), "rdf-schema#label");
        assert_eq!(domain_of(&known::resource(known::OWL_TYPE)), "rdf-syntax-ns#type");
        assert_eq!(domain_of(&known::resource(known::OWL_INVERSE_OF)), "owl#inverseOf");
        assert_eq!(domain_of(&known::resource("")), UNKNOWN_DOMAIN);
        assert_eq!(domain_of(&known::resource("/key.wikipedia.en")), "key");
    }

    #[test]
    fn type_of_examples() {
        assert_eq!(type_of(&known::resource(known::NOTABLE_OBJECT)), Some(known::NOTABLE_FOR_TYPE));
        assert_eq!(type_of(&known::resource("/bicycles.bicycle_type")), Some("/bicycles.bicycle_type"));
        assert_eq!(type_of(&known::resource("/film")), None);
    }

    #[test]
    fn shipped_table_has_all_domains() {
        let g = DomainGroups::shipped();
        assert_eq!(g.implementation_domains().count(), 11);
        assert_eq!(g.reference_counts().count(), 105);
        let total: u64 = g.reference_counts().filter_map(|(_, _, c)| c).sum();
        assert_eq!(total, 3_130_753_066);
        assert_eq!(g.reference_count(Group::SubjectMatter, "american_football"), Some(483_372));
        assert_eq!(g.group_of_domain("rdf-schema#label"), Group::Owl);
        assert_eq!(g.group_of_domain("key"), Group::Implementation);
        assert_eq!(g.group_of_domain("bicycles"), Group::SubjectMatter);
        assert_eq!(g.group_of_domain(UNKNOWN_DOMAIN), Group::Other);
    }

    #[test]
    fn groups_are_overridable() {
        let g = DomainGroups::parse("[implementation]\nmusic\n[subject_matter]\ncommon 5\n").unwrap();
        assert_eq!(
            g.classify_predicate(&known::resource("/music.track.length")),
            PredicateClass::FreebaseImplementation("music".into())
        );
        assert_eq!(
            g.classify_predicate(&known::resource(known::DESCRIPTION)),
            PredicateClass::SubjectMatter("common".into())
        );
        assert!(DomainGroups::parse("music\n").is_err());
        assert!(DomainGroups::parse("[owl]\nsameAs\n").is_err());
    }

    /// Every registered predicate literal lives only in this file.
    #[test]
    fn registry_closure() {
        let sources = [
            ("ntparse/mod.rs", include_str!("ntparse/mod.rs")),
            ("slicer/mod.rs", include_str!("slicer/mod.rs")),
            ("profiler.rs", include_str!("profiler.rs")),
            ("dedup/mod.rs", include_str!("dedup/mod.rs")),
            ("dedup/mediator.rs", include_str!("dedup/mediator.rs")),
            ("schemarec.rs", include_str!("schemarec.rs")),
            ("synthgen/mod.rs", include_str!("synthgen/mod.rs")),
            ("pipeline.rs", include_str!("pipeline.rs")),
        ];
        for (file, src) in sources {
            let src = src.split("#[cfg(test)]").next().unwrap();
            for id in known::ALL {
                assert!(!src.contains(&format!("\"{id}\"")), "{file} spells out {id}");
            }
        }
    }

    fn segment() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,8}"
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(d in segment(), t in proptest::option::of(segment()), p in proptest::collection::vec(segment(), 0..3)) {
            let mut id = format!("/{d}");
            if let Some(t) = &t {
                id.push('.');
                id.push_str(t);
                for seg in &p {
                    id.push('.');
                    id.push_str(seg);
                }
            }
            prop_assume!(!(d == "m" || d == "g" || d == "key"));
            let parsed = parse_schema_path(&id).unwrap();
            prop_assert_eq!(parsed.render(), id.clone());
            prop_assert_eq!(parse_schema_path(&parsed.render()).unwrap(), parsed);
        }

        #[test]
        fn classification_is_total_and_consistent(id in "(/[a-z_]{1,6}(\\.[a-z_]{1,6}){0,3})|(https?://[a-z./#-]{0,20})") {
            let r = known::resource(&id);
            let class = classify_predicate(&r);
            if let PredicateClass::SubjectMatter(d) = &class {
                prop_assert_eq!(domain_of(&r), d.as_str());
            }
            prop_assert_eq!(class.clone(), classify_predicate(&r));
        }
    }
}
