mod common;

use std::collections::{HashMap, HashSet};
use std::io::{BufReader, Cursor};

use fbdump::dedup::{collect_mediator_groups, detect_owl_duplicates, detect_reverse_pairs, Compactor, DuplicateKind};
use fbdump::extsort::SortConfig;
use fbdump::ntparse::{Node, Triple};
use fbdump::schema::{known, type_of};
use fbdump::slicer::{auxiliary_selectors, extract_labeled_slices, identifier_selectors, SliceOptions};
use proptest::prelude::*;

fn pairs(triples: &[Triple], predicate: &str, swap: bool) -> HashSet<(String, String)> {
    triples
        .iter()
        .filter(|t| known::is(&t.predicate, predicate))
        .map(|t| {
            let (s, o) = (t.subject.value().to_owned(), t.object.to_token());
            if swap {
                (o, s)
            } else {
                (s, o)
            }
        })
        .collect()
}

/// `(complete groups, their triples, incomplete groups, their triples)`.
fn mediator_oracle(triples: &[Triple]) -> (u64, u64, u64, u64) {
    let mut groups: HashMap<&str, (u64, HashSet<&str>, u64)> = HashMap::new();
    for t in triples {
        if known::is(&t.predicate, known::NOTABLE_FOR) {
            if let Node::Resource(m) = &t.object {
                let g = groups.entry(m.value()).or_default();
                g.0 += 1;
                g.2 += 1;
            }
        } else if type_of(&t.predicate) == Some(known::NOTABLE_FOR_TYPE) {
            let g = groups.entry(t.subject.value()).or_default();
            g.2 += 1;
            if let (true, Node::Resource(o)) = (known::is(&t.predicate, known::NOTABLE_NOTABLE_OBJECT), &t.object) {
                g.1.insert(o.value());
            }
        }
    }
    let mut out = (0, 0, 0, 0);
    for (links, notable, size) in groups.values() {
        if *links == 1 && notable.len() == 1 {
            out.0 += 1;
            out.1 += size;
        } else {
            out.2 += 1;
            out.3 += size;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn detectors_and_compactor_match_the_oracle(spec in common::small_spec()) {
        let (dump, truth) = common::dump(&spec);
        let triples = common::parse_all(&dump);
        let dir = tempfile::tempdir().unwrap();
        let mut selectors = identifier_selectors();
        selectors.extend(auxiliary_selectors());
        let run = extract_labeled_slices(&mut BufReader::new(Cursor::new(dump)), &selectors, dir.path(), &SliceOptions::default()).unwrap();
        let slice = |label: &str| dir.path().join(run.by_label(label).unwrap().path.as_ref().unwrap());
        let sort = SortConfig::with_budget(4 << 10);

        let label = detect_owl_duplicates(&slice("name"), &slice("owl_label"), DuplicateKind::OwlLabel, &sort).unwrap();
        let ty = detect_owl_duplicates(&slice("type"), &slice("owl_type"), DuplicateKind::OwlType, &sort).unwrap();
        let reverse = detect_reverse_pairs(&slice("type"), &slice("instance"), &sort).unwrap();
        let common = |a: HashSet<_>, b: HashSet<_>| a.intersection(&b).count() as u64;
        let oracle = (
            common(pairs(&triples, known::NAME, false), pairs(&triples, known::OWL_LABEL, false)),
            common(pairs(&triples, known::TYPE, false), pairs(&triples, known::OWL_TYPE, false)),
            common(pairs(&triples, known::TYPE, false), pairs(&triples, known::INSTANCE, true)),
        );
        prop_assert_eq!((label.duplicate_count, ty.duplicate_count, reverse.duplicate_count), oracle);
        prop_assert_eq!(oracle, (truth.duplicates.owl_label, truth.duplicates.owl_type, truth.duplicates.reverse));
        for r in [label, ty, reverse] {
            prop_assert!(r.duplicate_count <= r.base_slice_count.min(r.mirror_slice_count));
        }

        let (links, attrs) = (slice("notable_for"), slice("notable_attrs"));
        let mut compactor = Compactor::new();
        for g in collect_mediator_groups(&[links.as_path(), attrs.as_path()], &sort).unwrap() {
            let g = g.unwrap();
            let direct = compactor.push(&g);
            prop_assert_eq!(direct.is_some(), g.is_complete());
        }
        let c = compactor.counts();
        prop_assert_eq!(
            (c.complete_groups, c.input_triples, c.incomplete_groups, c.passthrough_triples),
            mediator_oracle(&triples)
        );
        prop_assert_eq!(c.output_triples, c.complete_groups);
    }
}
