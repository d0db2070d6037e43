//! Deterministic generator of Freebase-shaped dumps with exact ground truth.
//!
//! Every count is allocated up front: the valid-triple budget is split over
//! domains by largest remainder, identifier, mirror, reverse and mediator
//! triples are carved out of their domains' budgets, and the rest of each
//! domain is filler. Emission interleaves all categories by weighted draws
//! from a seeded ChaCha stream, so equal specs give equal bytes.

pub mod fixtures;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ntparse::{write_ntriples, Literal, Resource, Triple};
use crate::schema::{domain_of, known, DomainGroups, Group, IdentifierSlice, OwlKind};

pub const DUMP_FILE: &str = "dump.nt";
pub const DUMP_FILE_GZ: &str = "dump.nt.gz";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Types per filler domain and properties per type.
const FILLER_TYPES: u64 = 3;
const FILLER_PROPS: u64 = 4;
const FALLBACK_DOMAIN: &str = "synthgen_fallback";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("i/o error writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Identifier predicates as fractions of valid triples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentifierRates {
    pub name: f64,
    #[serde(rename = "type")]
    pub type_: f64,
    pub key: f64,
    pub description: f64,
    pub alias: f64,
}

impl IdentifierRates {
    fn get(&self, slice: IdentifierSlice) -> f64 {
        match slice {
            IdentifierSlice::Name => self.name,
            IdentifierSlice::Type => self.type_,
            IdentifierSlice::Key => self.key,
            IdentifierSlice::Description => self.description,
            IdentifierSlice::Alias => self.alias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    /// Output lines, malformed ones included.
    pub total_triples: u64,
    /// Domain keys as produced by [`domain_of`] with fractions summing to 1.
    pub domain_mix: Vec<(String, f64)>,
    pub identifier_rates: IdentifierRates,
    /// Fraction of name and type triples mirrored by the OWL label and type predicates.
    pub owl_mirror_rate: f64,
    /// Fraction of type triples with a reversed instance triple.
    pub reverse_pair_rate: f64,
    pub mediator_group_count: u64,
    /// Groups among `mediator_group_count` planted without a notable object.
    #[serde(default)]
    pub incomplete_mediator_count: u64,
    pub languages: Vec<String>,
    pub malformed_rate: f64,
    /// Fraction of each filler domain's properties given a name, mid and description.
    #[serde(default)]
    pub schema_metadata_rate: f64,
}

impl GeneratorSpec {
    /// A spec with every rate zero and the whole budget in one domain.
    pub fn single_domain(seed: u64, total_triples: u64, domain: &str) -> Self {
        GeneratorSpec {
            seed,
            total_triples,
            domain_mix: vec![(domain.to_owned(), 1.0)],
            identifier_rates: IdentifierRates::default(),
            owl_mirror_rate: 0.0,
            reverse_pair_rate: 0.0,
            mediator_group_count: 0,
            incomplete_mediator_count: 0,
            languages: vec!["en".to_owned()],
            malformed_rate: 0.0,
            schema_metadata_rate: 0.0,
        }
    }

    /// Domain shares of the shipped reference table and identifier rates
    /// of its identifier counts.
    pub fn reference_mix(seed: u64, total_triples: u64) -> Self {
        let groups = DomainGroups::shipped();
        let counts: Vec<(String, u64)> = groups
            .reference_counts()
            .filter_map(|(g, name, c)| {
                let key = match g {
                    Group::Owl => OwlKind::from_name(name)?.domain_key().to_owned(),
                    _ => name.to_owned(),
                };
                Some((key, c?))
            })
            .collect();
        let all: u64 = counts.iter().map(|(_, c)| c).sum();
        let share = |c: u64| c as f64 / all as f64;
        let domain_mix = counts.iter().map(|(k, c)| (k.clone(), share(*c))).collect();
        let identifier_rates = IdentifierRates {
            name: share(72_699_101),
            type_: share(266_321_867),
            key: share(146_583_100),
            description: share(20_472_070),
            alias: share(4_611_150),
        };
        let languages: Vec<String> = ["en", "de", "es", "fr", "it", "ja", "pt", "zh"].map(str::to_owned).to_vec();
        let mediator_target = total_triples as f64 * share(1_280_720_680);
        let mean_group = 4.0 + (languages.len() as f64 + 1.0) / 2.0;
        let groups_planted = (mediator_target / mean_group).floor() as u64;
        // Every annotated property consumes one description; small totals annotate fewer.
        let schema_domains = counts
            .iter()
            .filter(|(k, _)| OwlKind::from_domain_key(k).is_none() && !matches!(k.as_str(), "key" | "type" | "common"))
            .count();
        let descriptions = (total_triples as f64 * identifier_rates.description).floor();
        let per_domain =
            (0.9 * descriptions / schema_domains.max(1) as f64 - 0.5) / (FILLER_TYPES * FILLER_PROPS) as f64;
        let schema_metadata_rate = per_domain.clamp(0.0, 0.5);
        GeneratorSpec {
            seed,
            total_triples,
            domain_mix,
            identifier_rates,
            owl_mirror_rate: 0.999,
            reverse_pair_rate: 266_257_391.0 / 266_321_867.0,
            mediator_group_count: groups_planted,
            incomplete_mediator_count: groups_planted / 100,
            languages,
            malformed_rate: 0.0,
            schema_metadata_rate,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        let rates = [
            ("owl_mirror_rate", self.owl_mirror_rate),
            ("reverse_pair_rate", self.reverse_pair_rate),
            ("malformed_rate", self.malformed_rate),
            ("schema_metadata_rate", self.schema_metadata_rate),
        ]
        .into_iter()
        .chain(IdentifierSlice::ALL.map(|s| (s.label(), self.identifier_rates.get(s))))
        .chain(self.domain_mix.iter().map(|(k, f)| (k.as_str(), *f)));
        for (what, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{what} = {r} is outside [0, 1]"));
            }
        }
        let sum: f64 = self.domain_mix.iter().map(|(_, f)| f).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("domain_mix sums to {sum}, not 1"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (k, _) in &self.domain_mix {
            let plain = !k.is_empty() && k.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_');
            if !(plain || OwlKind::from_domain_key(k).is_some()) {
                return bad(format!("domain key {k:?} is not a domain"));
            }
            if !seen.insert(k) {
                return bad(format!("domain key {k:?} repeated"));
            }
        }
        if self.languages.is_empty() || self.languages.iter().any(|l| l.is_empty()) {
            return bad("languages must be a non-empty list of tags".into());
        }
        if self.incomplete_mediator_count > self.mediator_group_count {
            return bad("incomplete_mediator_count exceeds mediator_group_count".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopicTruth {
    /// Distinct mid and gid subjects of name triples.
    pub topics: u64,
    pub mids: u64,
    pub gids: u64,
    /// Distinct schema-path subjects of name triples.
    pub other_subjects: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DuplicateTruth {
    pub owl_label: u64,
    pub owl_type: u64,
    pub reverse: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MediatorTruth {
    pub groups: u64,
    pub complete: u64,
    pub incomplete: u64,
    /// Every triple of every group.
    pub triples: u64,
    pub complete_triples: u64,
    /// One direct triple per complete group.
    pub compacted: u64,
    pub passthrough: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlantedSchema {
    pub types: Vec<String>,
    pub properties: Vec<String>,
    /// Properties planted with a name, a mid binding and a description.
    pub annotated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub spec: GeneratorSpec,
    pub total_lines: u64,
    pub malformed_lines: u64,
    pub valid_triples: u64,
    pub domain_counts: BTreeMap<String, u64>,
    /// Keyed by identifier slice label.
    pub identifier_counts: BTreeMap<String, u64>,
    pub predicate_counts: BTreeMap<String, u64>,
    pub topics: TopicTruth,
    pub duplicates: DuplicateTruth,
    pub mediators: MediatorTruth,
    pub schemas: BTreeMap<String, PlantedSchema>,
}

impl GroundTruth {
    pub fn identifier_total(&self) -> u64 {
        self.identifier_counts.values().sum()
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Triple(Triple),
    Malformed(String),
}

fn largest_remainder(total: u64, shares: &[f64]) -> Vec<u64> {
    let exact: Vec<f64> = shares.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

fn base36(mut n: u64) -> String {
    const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";
    let mut out = Vec::new();
    loop {
        out.push(DIGITS[(n % 36) as usize]);
        n /= 36;
        if n == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("base-36 digits are ASCII")
}

/// Entity `e`: a gid when `e % 10 == 9`, a mid otherwise.
pub fn entity(e: u64) -> Resource {
    let prefix = if e % 10 == 9 { "/g.0" } else { "/m.0" };
    known::resource(&format!("{prefix}{}", base36(e)))
}

fn fresh(n: u64, tag: usize) -> Resource {
    known::resource(&format!("/m.1{}z{tag}", base36(n)))
}

fn mediator_id(g: u64) -> Resource {
    known::resource(&format!("/g.1{}", base36(g)))
}

fn metadata_mid(m: u64) -> Resource {
    known::resource(&format!("/m.2{}", base36(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Filler {
    Schema,
    KeyNamespace,
    Owl(OwlKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Malformed,
    Name,
    Type,
    Key,
    Description,
    Alias,
    Instance,
    Binding,
    MirrorLabel,
    MirrorType,
    Mediator,
    Filler(usize),
}

/// Fenwick tree over category weights.
struct Weights {
    tree: Vec<u64>,
    total: u64,
}

impl Weights {
    fn new(weights: &[u64]) -> Self {
        let mut w = Weights { tree: vec![0; weights.len() + 1], total: 0 };
        for (i, &x) in weights.iter().enumerate() {
            w.add(i, x);
        }
        w
    }

    fn add(&mut self, i: usize, x: u64) {
        self.total += x;
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += x;
            i += i & i.wrapping_neg();
        }
    }

    fn sub(&mut self, i: usize) {
        self.total -= 1;
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Index whose cumulative range contains `target < total`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len()).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step /= 2;
        }
        pos
    }
}

struct Plan {
    malformed: u64,
    valid: u64,
    domain_counts: BTreeMap<String, u64>,
    names: u64,
    types: u64,
    keys: u64,
    descriptions: u64,
    aliases: u64,
    instances: u64,
    mirror_label: u64,
    mirror_type: u64,
    mediator_triples: u64,
    /// `(path, mid)` of annotated properties, in emission order.
    metadata: Vec<String>,
    type_list: Vec<Resource>,
    fillers: Vec<(String, Filler, u64)>,
    schemas: BTreeMap<String, PlantedSchema>,
}

fn filler_property(domain: &str, idx: u64) -> String {
    format!("/{domain}.t{}.p{}", idx / FILLER_PROPS, idx % FILLER_PROPS)
}

fn group_size(g: u64, languages: u64, incomplete: u64) -> u64 {
    4 + 1 + g % languages - u64::from(g < incomplete)
}

impl Plan {
    fn new(spec: &GeneratorSpec) -> Result<Plan, SynthError> {
        spec.validate()?;
        let malformed = ((spec.malformed_rate * spec.total_triples as f64).round() as u64).min(spec.total_triples);
        let valid = spec.total_triples - malformed;
        let shares: Vec<f64> = spec.domain_mix.iter().map(|(_, f)| *f).collect();
        let domain_counts: BTreeMap<String, u64> =
            spec.domain_mix.iter().map(|(k, _)| k.clone()).zip(largest_remainder(valid, &shares)).collect();
        let budget = |k: &str| domain_counts.get(k).copied().unwrap_or(0);
        let rate = |s: IdentifierSlice| (spec.identifier_rates.get(s) * valid as f64).round() as u64;
        let names = rate(IdentifierSlice::Name);
        let types = rate(IdentifierSlice::Type);
        let keys = rate(IdentifierSlice::Key);
        let descriptions = rate(IdentifierSlice::Description);
        let aliases = rate(IdentifierSlice::Alias);
        let mirror_label = (spec.owl_mirror_rate * names as f64).round() as u64;
        let mirror_type = (spec.owl_mirror_rate * types as f64).round() as u64;
        let instances = (spec.reverse_pair_rate * types as f64).round() as u64;
        let languages = spec.languages.len() as u64;
        let mediator_triples: u64 =
            (0..spec.mediator_group_count).map(|g| group_size(g, languages, spec.incomplete_mediator_count)).sum();

        let mut schemas = BTreeMap::new();
        let mut fillers = Vec::new();
        let mut metadata = Vec::new();
        for (key, count) in &domain_counts {
            let shape = match (OwlKind::from_domain_key(key), key.as_str()) {
                (Some(kind), _) => Filler::Owl(kind),
                (None, "key") => Filler::KeyNamespace,
                _ => Filler::Schema,
            };
            if shape == Filler::Schema && !matches!(key.as_str(), "type" | "common") && *count > 0 {
                let emitted = (*count).min(FILLER_TYPES * FILLER_PROPS);
                let mut properties: Vec<String> = (0..emitted).map(|i| filler_property(key, i)).collect();
                properties.sort();
                let mut types: Vec<String> =
                    properties.iter().map(|p| p[..p.rfind('.').expect("filler path")].to_owned()).collect();
                types.dedup();
                let annotated_count = (spec.schema_metadata_rate * properties.len() as f64).round() as usize;
                let annotated = properties[..annotated_count].to_vec();
                metadata.extend(annotated.iter().cloned());
                schemas.insert(key.clone(), PlantedSchema { types, properties, annotated });
            }
            fillers.push((key.clone(), shape, *count));
        }
        let mut type_list: Vec<Resource> =
            schemas.values().flat_map(|s| s.types.iter().map(|t| known::resource(t))).collect();
        if type_list.len() < 2 {
            type_list.extend((0..2).map(|i| known::resource(&format!("/{FALLBACK_DOMAIN}.t{i}"))));
        }
        let n_meta = metadata.len() as u64;

        let mut carve = |key: &str, parts: &[(&str, u64)]| -> Result<(), SynthError> {
            let need: u64 = parts.iter().map(|(_, n)| n).sum();
            let have = budget(key);
            if need > have {
                let detail: Vec<String> = parts.iter().map(|(w, n)| format!("{w} {n}")).collect();
                return Err(SynthError::Infeasible(format!(
                    "domain {key:?} holds {have} triples but needs {need} ({})",
                    detail.join(", ")
                )));
            }
            let filler = fillers.iter_mut().find(|(k, _, _)| k == key).expect("carved domains have a budget");
            filler.2 -= need;
            Ok(())
        };
        if n_meta > names || n_meta > descriptions {
            return Err(SynthError::Infeasible(format!(
                "{n_meta} annotated properties need as many names and descriptions"
            )));
        }
        let identifier_domain = domain_of(&known::resource(known::NAME)).to_owned();
        let topic_domain = domain_of(&known::resource(known::DESCRIPTION)).to_owned();
        let type_parts =
            [("names", names), ("types", types), ("keys", keys), ("instances", instances), ("bindings", n_meta)];
        if type_parts.iter().any(|(_, n)| *n > 0) {
            carve(&identifier_domain, &type_parts)?;
        }
        let common_parts =
            [("descriptions", descriptions), ("aliases", aliases), ("mediator triples", mediator_triples)];
        if common_parts.iter().any(|(_, n)| *n > 0) {
            carve(&topic_domain, &common_parts)?;
        }
        if mirror_label > 0 {
            carve(OwlKind::Label.domain_key(), &[("label mirrors", mirror_label)])?;
        }
        if mirror_type > 0 {
            carve(OwlKind::Type.domain_key(), &[("type mirrors", mirror_type)])?;
        }
        fillers.retain(|(_, _, n)| *n > 0);

        Ok(Plan {
            malformed,
            valid,
            domain_counts,
            names,
            types,
            keys,
            descriptions,
            aliases,
            instances,
            mirror_label,
            mirror_type,
            mediator_triples,
            metadata,
            type_list,
            fillers,
            schemas,
        })
    }

    /// `(entity, language index)` of the `i`-th entity name: entity `e`
    /// carries `1 + e % L` names.
    fn name_slot(i: u64, languages: u64) -> (u64, u64) {
        let period = languages * (languages + 1) / 2;
        let (p, mut r) = (i / period, i % period);
        let mut c = 0;
        while r > c {
            r -= c + 1;
            c += 1;
        }
        (p * languages + c, r)
    }

    fn topics(&self, languages: u64) -> TopicTruth {
        let entity_names = self.names - self.metadata.len() as u64;
        let topics = if entity_names == 0 { 0 } else { Plan::name_slot(entity_names - 1, languages).0 + 1 };
        let gids = topics / 10;
        TopicTruth { topics, mids: topics - gids, gids, other_subjects: self.metadata.len() as u64 }
    }
}

/// Streaming emitter; [`Generator::ground_truth`] is known before the first record.
pub struct Generator {
    spec: GeneratorSpec,
    plan: Plan,
    truth: GroundTruth,
    rng: ChaCha8Rng,
    categories: Vec<Category>,
    weights: Weights,
    cursor: Vec<u64>,
    pending: VecDeque<Record>,
    emitted_domains: HashMap<String, u64>,
    emitted_predicates: HashMap<String, u64>,
    emitted_lines: u64,
}

impl Generator {
    pub fn new(spec: &GeneratorSpec) -> Result<Self, SynthError> {
        let plan = Plan::new(spec)?;
        let languages = spec.languages.len() as u64;
        let incomplete = spec.incomplete_mediator_count;
        let complete_triples: u64 =
            (incomplete..spec.mediator_group_count).map(|g| group_size(g, languages, incomplete)).sum();
        let complete = spec.mediator_group_count - incomplete;
        let truth = GroundTruth {
            schema_version: crate::SCHEMA_VERSION,
            spec: spec.clone(),
            total_lines: spec.total_triples,
            malformed_lines: plan.malformed,
            valid_triples: plan.valid,
            domain_counts: plan.domain_counts.iter().filter(|(_, n)| **n > 0).map(|(k, n)| (k.clone(), *n)).collect(),
            identifier_counts: IdentifierSlice::ALL
                .iter()
                .map(|s| {
                    let n = match s {
                        IdentifierSlice::Name => plan.names,
                        IdentifierSlice::Type => plan.types,
                        IdentifierSlice::Key => plan.keys,
                        IdentifierSlice::Description => plan.descriptions,
                        IdentifierSlice::Alias => plan.aliases,
                    };
                    (s.label().to_owned(), n)
                })
                .collect(),
            predicate_counts: BTreeMap::new(),
            topics: plan.topics(languages),
            duplicates: DuplicateTruth {
                owl_label: plan.mirror_label,
                owl_type: plan.mirror_type,
                reverse: plan.instances,
            },
            mediators: MediatorTruth {
                groups: spec.mediator_group_count,
                complete,
                incomplete,
                triples: plan.mediator_triples,
                complete_triples,
                compacted: complete,
                passthrough: plan.mediator_triples - complete_triples,
            },
            schemas: plan.schemas.clone(),
        };
        let n_meta = plan.metadata.len() as u64;
        let mut categories = vec![
            (Category::Malformed, plan.malformed),
            (Category::Name, plan.names),
            (Category::Type, plan.types),
            (Category::Key, plan.keys),
            (Category::Description, plan.descriptions),
            (Category::Alias, plan.aliases),
            (Category::Instance, plan.instances),
            (Category::Binding, n_meta),
            (Category::MirrorLabel, plan.mirror_label),
            (Category::MirrorType, plan.mirror_type),
            (Category::Mediator, spec.mediator_group_count),
        ];
        categories.extend(plan.fillers.iter().enumerate().map(|(i, (_, _, n))| (Category::Filler(i), *n)));
        let weights = Weights::new(&categories.iter().map(|(_, n)| *n).collect::<Vec<_>>());
        Ok(Generator {
            spec: spec.clone(),
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            cursor: vec![0; categories.len()],
            categories: categories.into_iter().map(|(c, _)| c).collect(),
            weights,
            plan,
            truth,
            pending: VecDeque::new(),
            emitted_domains: HashMap::new(),
            emitted_predicates: HashMap::new(),
            emitted_lines: 0,
        })
    }

    /// Planned truth; `predicate_counts` is filled by [`Generator::finish`].
    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    fn lang(&self, i: u64) -> &str {
        &self.spec.languages[(i % self.spec.languages.len() as u64) as usize]
    }

    fn type_triple(&self, j: u64) -> (Resource, Resource) {
        let n = self.plan.type_list.len() as u64;
        (entity(j / 2), self.plan.type_list[(j % n) as usize].clone())
    }

    fn name_triple(&self, i: u64) -> Triple {
        let pred = known::resource(known::NAME);
        let n_meta = self.plan.metadata.len() as u64;
        if i < n_meta {
            let path = &self.plan.metadata[i as usize];
            return Triple::new(
                known::resource(path),
                pred,
                Literal::with_lang(format!("Property {path}"), self.lang(0)),
            );
        }
        let (e, lang) = Plan::name_slot(i - n_meta, self.spec.languages.len() as u64);
        Triple::new(entity(e), pred, Literal::with_lang(format!("Entity {e}"), self.lang(lang)))
    }

    fn build(&self, cat: Category, i: u64) -> Vec<Record> {
        let one = |t: Triple| vec![Record::Triple(t)];
        match cat {
            Category::Malformed => {
                let s = entity(i).to_full_iri();
                let p = known::resource(known::NAME).to_full_iri();
                let line = match i % 3 {
                    0 => format!("<{s}\t<{p}>\t\"broken {i}\"\t."),
                    1 => format!("<{s}>\t<{p}>\t\"unterminated {i}\t."),
                    _ => format!("<{s}>\t<{p}>\t."),
                };
                vec![Record::Malformed(line)]
            }
            Category::Name => one(self.name_triple(i)),
            Category::Type => {
                let (s, o) = self.type_triple(i);
                one(Triple::new(s, known::resource(known::TYPE), o))
            }
            Category::Key => {
                one(Triple::new(entity(i), known::resource(known::KEY), Literal::plain(format!("k{}", base36(i)))))
            }
            Category::Description => {
                let pred = known::resource(known::DESCRIPTION);
                match self.plan.metadata.get(i as usize) {
                    Some(path) => one(Triple::new(
                        metadata_mid(i),
                        pred,
                        Literal::with_lang(format!("About {path}"), self.lang(0)),
                    )),
                    None => {
                        one(Triple::new(entity(i), pred, Literal::with_lang(format!("Description {i}"), self.lang(i))))
                    }
                }
            }
            Category::Alias => one(Triple::new(
                entity(i),
                known::resource(known::ALIAS),
                Literal::with_lang(format!("Alias {i}"), self.lang(i)),
            )),
            Category::Instance => {
                let (s, o) = self.type_triple(i);
                one(Triple::new(o, known::resource(known::INSTANCE), s))
            }
            Category::Binding => {
                let path = &self.plan.metadata[i as usize];
                one(Triple::new(known::resource(path), known::resource(known::MID), metadata_mid(i)))
            }
            Category::MirrorLabel => {
                let t = self.name_triple(i);
                one(Triple::new(t.subject, known::resource(known::OWL_LABEL), t.object))
            }
            Category::MirrorType => {
                let (s, o) = self.type_triple(i);
                one(Triple::new(s, known::resource(known::OWL_TYPE), o))
            }
            Category::Mediator => self.mediator(i),
            Category::Filler(f) => {
                let (domain, shape, _) = &self.plan.fillers[f];
                let t = match shape {
                    Filler::Schema => Triple::new(
                        entity(i),
                        known::resource(&filler_property(domain, i % (FILLER_TYPES * FILLER_PROPS))),
                        Literal::plain(format!("v{i}")),
                    ),
                    Filler::KeyNamespace => Triple::new(
                        entity(i),
                        known::resource(&format!("/{domain}.src{}", i % FILLER_PROPS)),
                        Literal::plain(format!("v{i}")),
                    ),
                    Filler::Owl(OwlKind::Label) => Triple::new(
                        fresh(i, f),
                        known::resource(known::OWL_LABEL),
                        Literal::with_lang(format!("Label {i}"), self.lang(i)),
                    ),
                    Filler::Owl(OwlKind::Type) => {
                        Triple::new(fresh(i, f), known::resource(known::OWL_TYPE), self.plan.type_list[0].clone())
                    }
                    Filler::Owl(kind) => Triple::new(fresh(i, f), known::resource(kind.iri()), fresh(i + 1, f)),
                };
                one(t)
            }
        }
    }

    /// Link, display names, object, predicate and, when complete, notable object.
    fn mediator(&self, g: u64) -> Vec<Record> {
        let m = mediator_id(g);
        let n = self.plan.type_list.len() as u64;
        let target = self.plan.type_list[(g % n) as usize].clone();
        let names = 1 + g % self.spec.languages.len() as u64;
        let mut out = vec![Triple::new(entity(g), known::resource(known::NOTABLE_FOR), m.clone())];
        for l in 0..names {
            out.push(Triple::new(
                m.clone(),
                known::resource(known::NOTABLE_DISPLAY_NAME),
                Literal::with_lang(format!("Notable {g}"), self.lang(l)),
            ));
        }
        out.push(Triple::new(m.clone(), known::resource(known::NOTABLE_OBJECT), target.clone()));
        out.push(Triple::new(m.clone(), known::resource(known::NOTABLE_PREDICATE), known::resource(known::TYPE)));
        if g >= self.spec.incomplete_mediator_count {
            out.push(Triple::new(m, known::resource(known::NOTABLE_NOTABLE_OBJECT), target));
        }
        out.into_iter().map(Record::Triple).collect()
    }

    fn tally(&mut self, r: &Record) {
        self.emitted_lines += 1;
        if let Record::Triple(t) = r {
            let p = t.predicate.value();
            match self.emitted_predicates.get_mut(p) {
                Some(n) => *n += 1,
                None => {
                    self.emitted_predicates.insert(p.to_owned(), 1);
                }
            }
            let d = domain_of(&t.predicate);
            match self.emitted_domains.get_mut(d) {
                Some(n) => *n += 1,
                None => {
                    self.emitted_domains.insert(d.to_owned(), 1);
                }
            }
        }
    }

    /// Final ground truth, after checking the emitted stream against the plan.
    pub fn finish(mut self) -> GroundTruth {
        assert!(self.pending.is_empty() && self.weights.total == 0, "generator not drained");
        let emitted: BTreeMap<String, u64> = self.emitted_domains.into_iter().collect();
        assert_eq!(emitted, self.truth.domain_counts, "emitted domains diverge from the plan");
        assert_eq!(self.emitted_lines, self.truth.total_lines, "emitted lines diverge from the plan");
        self.truth.predicate_counts = self.emitted_predicates.into_iter().collect();
        self.truth
    }
}

impl Iterator for Generator {
    type Item = Record;

    fn next(&mut self) -> Option<Record> {
        if self.pending.is_empty() {
            if self.weights.total == 0 {
                return None;
            }
            let slot = self.weights.find(self.rng.random_range(0..self.weights.total));
            self.weights.sub(slot);
            let i = self.cursor[slot];
            self.cursor[slot] += 1;
            let records = self.build(self.categories[slot], i);
            self.pending.extend(records);
        }
        let r = self.pending.pop_front()?;
        self.tally(&r);
        Some(r)
    }
}

/// Writes the dump to `sink` as N-Triples, one record per line.
pub fn generate_dump(spec: &GeneratorSpec, sink: &mut dyn Write) -> Result<GroundTruth, SynthError> {
    emit(Generator::new(spec)?, sink)
}

fn emit(mut g: Generator, sink: &mut dyn Write) -> Result<GroundTruth, SynthError> {
    let io = |source| SynthError::Io { path: PathBuf::from("<sink>"), source };
    let mut buf = Vec::with_capacity(1 << 16);
    for r in g.by_ref() {
        match &r {
            Record::Triple(t) => write_ntriples(t, &mut buf),
            Record::Malformed(line) => buf.extend_from_slice(line.as_bytes()),
        }
        buf.push(b'\n');
        if buf.len() >= 1 << 16 {
            sink.write_all(&buf).map_err(io)?;
            buf.clear();
        }
    }
    sink.write_all(&buf).map_err(io)?;
    sink.flush().map_err(io)?;
    Ok(g.finish())
}

/// Writes `dump.nt` (or `dump.nt.gz`) and `ground_truth.json` into `dir`.
/// An invalid or infeasible spec fails before any file is created.
pub fn write_dump(spec: &GeneratorSpec, dir: &Path, gzip: bool) -> Result<(PathBuf, GroundTruth), SynthError> {
    let g = Generator::new(spec)?;
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| SynthError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(if gzip { DUMP_FILE_GZ } else { DUMP_FILE });
    let file = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io(&path))?);
    let truth = if gzip {
        let mut enc = flate2::write::GzEncoder::new(file, flate2::Compression::fast());
        let truth = emit(g, &mut enc)?;
        enc.finish().and_then(|mut f| f.flush()).map_err(io(&path))?;
        truth
    } else {
        let mut file = file;
        emit(g, &mut file)?
    };
    let gt = dir.join(GROUND_TRUTH_FILE);
    let json = serde_json::to_string_pretty(&truth).expect("ground truth serializes");
    std::fs::write(&gt, json + "\n").map_err(io(&gt))?;
    Ok((path, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntparse::{parse_line_with, ParseOptions, ParseOutcome};
    use proptest::prelude::*;

    fn lines(spec: &GeneratorSpec) -> (Vec<u8>, GroundTruth) {
        let mut out = Vec::new();
        let truth = generate_dump(spec, &mut out).unwrap();
        (out, truth)
    }

    #[test]
    fn zero_total_is_empty() {
        let (out, truth) = lines(&GeneratorSpec::reference_mix(1, 0));
        assert!(out.is_empty());
        assert_eq!(truth.valid_triples, 0);
        assert!(truth.domain_counts.is_empty() && truth.predicate_counts.is_empty());
        assert_eq!(truth.identifier_total(), 0);
        assert_eq!(truth.topics, TopicTruth::default());
    }

    #[test]
    fn largest_remainder_is_exact() {
        assert_eq!(largest_remainder(10, &[0.5, 0.25, 0.25]), [5, 3, 2]);
        assert_eq!(largest_remainder(3, &[1.0 / 3.0; 3]), [1, 1, 1]);
        assert_eq!(largest_remainder(0, &[1.0]), [0]);
    }

    #[test]
    fn name_slots_follow_the_language_ramp() {
        let slots: Vec<_> = (0..7).map(|i| Plan::name_slot(i, 3)).collect();
        assert_eq!(slots, [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0)]);
    }

    #[test]
    fn fenwick_draws_cover_each_slot() {
        let w = Weights::new(&[2, 0, 3]);
        let picks: Vec<usize> = (0..5).map(|t| w.find(t)).collect();
        assert_eq!(picks, [0, 0, 2, 2, 2]);
    }

    #[test]
    fn malformed_lines_fail_both_modes() {
        let mut spec = GeneratorSpec::single_domain(3, 999, "music");
        spec.malformed_rate = 0.1;
        let (out, truth) = lines(&spec);
        for mode in [ParseOptions::strict(), ParseOptions::lenient()] {
            let malformed = out
                .split(|b| *b == b'\n')
                .filter(|l| !l.is_empty())
                .filter(|l| matches!(parse_line_with(l, 0, mode), ParseOutcome::Malformed { .. }))
                .count();
            assert_eq!(malformed as u64, truth.malformed_lines);
        }
        assert_eq!(truth.malformed_lines, 100);
    }

    #[test]
    fn infeasible_budget_is_rejected() {
        let mut spec = GeneratorSpec::single_domain(1, 100, "common");
        spec.mediator_group_count = 30;
        assert!(matches!(Generator::new(&spec), Err(SynthError::Infeasible(_))));
        spec.identifier_rates.name = 0.1;
        spec.mediator_group_count = 0;
        assert!(matches!(Generator::new(&spec), Err(SynthError::Infeasible(_))));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = GeneratorSpec::single_domain(1, 10, "music");
        spec.domain_mix.push(("film".into(), 0.5));
        assert!(matches!(spec.validate(), Err(SynthError::InvalidSpec(_))));
        let mut spec = GeneratorSpec::single_domain(1, 10, "mu.sic");
        assert!(spec.validate().is_err());
        spec.domain_mix[0].0 = "music".into();
        spec.owl_mirror_rate = 1.5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn reference_mix_is_feasible() {
        let truth = Generator::new(&GeneratorSpec::reference_mix(7, 100_000)).unwrap().ground_truth().clone();
        assert_eq!(truth.domain_counts.values().sum::<u64>(), 100_000);
        assert!(truth.mediators.groups > 0 && truth.duplicates.reverse > 0);
        for total in [0, 1, 10, 1_000, 20_000, 50_000, 3_000_000] {
            Generator::new(&GeneratorSpec::reference_mix(7, total)).unwrap();
        }
    }

    #[test]
    fn infeasible_spec_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = GeneratorSpec::single_domain(1, 100, "music");
        spec.identifier_rates.name = 0.5;
        assert!(matches!(write_dump(&spec, dir.path(), false), Err(SynthError::Infeasible(_))));
        assert!(!dir.path().join(DUMP_FILE).exists());
    }

    fn small_spec() -> impl Strategy<Value = GeneratorSpec> {
        (any::<u64>(), 1_000u64..3_000, 0.0..0.05f64, 0.0..=1.0f64, 0.0..=1.0f64, 0u64..40, 1usize..4).prop_map(
            |(seed, total, malformed, mirror, reverse, groups, langs)| GeneratorSpec {
                seed,
                total_triples: total,
                domain_mix: vec![
                    ("type".into(), 0.4),
                    ("common".into(), 0.3),
                    ("music".into(), 0.1),
                    ("key".into(), 0.05),
                    (OwlKind::Label.domain_key().into(), 0.05),
                    (OwlKind::Type.domain_key().into(), 0.05),
                    (OwlKind::Range.domain_key().into(), 0.05),
                ],
                identifier_rates: IdentifierRates {
                    name: 0.03,
                    type_: 0.04,
                    key: 0.02,
                    description: 0.01,
                    alias: 0.01,
                },
                owl_mirror_rate: mirror,
                reverse_pair_rate: reverse,
                mediator_group_count: groups.min(total / 60),
                incomplete_mediator_count: groups.min(total / 60) / 3,
                languages: ["en", "fr", "de"][..langs].iter().map(|s| s.to_string()).collect(),
                malformed_rate: malformed,
                schema_metadata_rate: 0.5,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn same_seed_same_bytes(spec in small_spec()) {
            let (a, ta) = lines(&spec);
            let (b, tb) = lines(&spec);
            prop_assert_eq!(a, b);
            prop_assert_eq!(ta, tb);
        }

        #[test]
        fn stream_matches_ground_truth(spec in small_spec()) {
            let (out, truth) = lines(&spec);
            let mut predicates: BTreeMap<String, u64> = BTreeMap::new();
            let (mut total, mut malformed) = (0u64, 0u64);
            for line in out.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
                total += 1;
                match parse_line_with(line, total, ParseOptions::strict()) {
                    ParseOutcome::Ok(t) => *predicates.entry(t.predicate.value().to_owned()).or_default() += 1,
                    ParseOutcome::Malformed { .. } => malformed += 1,
                    ParseOutcome::Skipped(_) => prop_assert!(false, "generator emitted a skippable line"),
                }
            }
            prop_assert_eq!(total, spec.total_triples);
            prop_assert_eq!(malformed, truth.malformed_lines);
            prop_assert_eq!(&predicates, &truth.predicate_counts);
            let name = predicates.get(known::NAME).copied().unwrap_or(0);
            prop_assert_eq!(name, truth.identifier_counts["name"]);
        }
    }
}
