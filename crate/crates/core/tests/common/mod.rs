#![allow(dead_code)]

use fbdump::ntparse::{parse_line_with, ParseOptions, Triple};
use fbdump::schema::OwlKind;
use fbdump::synthgen::{generate_dump, GeneratorSpec, GroundTruth, IdentifierRates};
use proptest::prelude::*;

/// Feasible specs of a few thousand lines with every category present.
pub fn small_spec() -> impl Strategy<Value = GeneratorSpec> {
    (any::<u64>(), 1_000u64..6_000, 0.0..0.03f64, 0.0..=1.0f64, 0.0..=1.0f64, 0u64..60, 1usize..4, 0.0..=0.3f64)
        .prop_map(|(seed, total, malformed, mirror, reverse, groups, langs, meta)| {
            let groups = groups.min(total / 60);
            GeneratorSpec {
                seed,
                total_triples: total,
                domain_mix: vec![
                    ("type".into(), 0.4),
                    ("common".into(), 0.3),
                    ("music".into(), 0.08),
                    ("film".into(), 0.02),
                    ("key".into(), 0.05),
                    (OwlKind::Label.domain_key().into(), 0.05),
                    (OwlKind::Type.domain_key().into(), 0.07),
                    (OwlKind::Range.domain_key().into(), 0.03),
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
                mediator_group_count: groups,
                incomplete_mediator_count: groups / 3,
                languages: ["en", "fr", "de"][..langs].iter().map(|s| s.to_string()).collect(),
                malformed_rate: malformed,
                schema_metadata_rate: meta,
            }
        })
}

pub fn dump(spec: &GeneratorSpec) -> (Vec<u8>, GroundTruth) {
    let mut out = Vec::new();
    let truth = generate_dump(spec, &mut out).expect("feasible spec");
    (out, truth)
}

/// Well-formed triples of a dump, in input order.
pub fn parse_all(dump: &[u8]) -> Vec<Triple> {
    dump.split(|b| *b == b'\n')
        .filter(|l| !l.is_empty())
        .enumerate()
        .filter_map(|(i, l)| parse_line_with(l, i as u64 + 1, ParseOptions::lenient()).triple())
        .collect()
}
