mod common;

use std::collections::HashSet;

use fbdump::extsort::SortConfig;
use fbdump::ntparse::{serialize_triple, Style};
use fbdump::profiler::{domain_stats, estimate_topics, unique_position_counts};
use fbdump::schema::{known, DomainGroups};
use fbdump::slicer::SliceManifest;
use proptest::prelude::*;

/// Small enough that every fixture spills several sorted runs.
fn tiny_sort() -> SortConfig {
    SortConfig::with_budget(4 << 10)
}

fn manifest(selector: &str, triple_count: u64) -> SliceManifest {
    SliceManifest {
        selector: selector.to_owned(),
        label: None,
        predicate: None,
        path: None,
        triple_count,
        byte_count: 0,
        checksum: None,
        expected_count: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unique_counts_match_a_set_oracle(spec in common::small_spec(), repeat in 1usize..3) {
        let (dump, _) = common::dump(&spec);
        let triples = common::parse_all(&dump);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slice.tsv");
        let mut text = String::new();
        for _ in 0..repeat {
            for t in &triples {
                text.push_str(&serialize_triple(t, Style::Dots));
                text.push('\n');
            }
        }
        std::fs::write(&path, text).unwrap();
        let got = unique_position_counts(&path, &tiny_sort()).unwrap();

        let subjects: HashSet<&str> = triples.iter().map(|t| t.subject.value()).collect();
        let predicates: HashSet<&str> = triples.iter().map(|t| t.predicate.value()).collect();
        let objects: HashSet<String> = triples.iter().map(|t| t.object.to_token()).collect();
        prop_assert_eq!(got.triples, (triples.len() * repeat) as u64);
        prop_assert_eq!(got.unique_subjects, subjects.len() as u64);
        prop_assert_eq!(got.unique_predicates, predicates.len() as u64);
        prop_assert_eq!(got.unique_objects, objects.len() as u64);
    }

    #[test]
    fn topics_are_distinct_name_subjects(spec in common::small_spec()) {
        let (dump, truth) = common::dump(&spec);
        let names: Vec<_> = common::parse_all(&dump)
            .into_iter()
            .filter(|t| known::is(&t.predicate, known::NAME))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("name.tsv");
        let text: String = names.iter().map(|t| serialize_triple(t, Style::Dots) + "\n").collect();
        std::fs::write(&path, text).unwrap();
        let est = estimate_topics(&path, &tiny_sort()).unwrap();
        let topics: HashSet<&str> =
            names.iter().filter(|t| t.subject.is_topic_id()).map(|t| t.subject.value()).collect();
        prop_assert_eq!(est.topics, topics.len() as u64);
        prop_assert_eq!(est.topics, truth.topics.topics);
        prop_assert!(est.topics + est.other_subjects <= est.triples);
        let distinct: HashSet<&str> = names.iter().map(|t| t.subject.value()).collect();
        prop_assert_eq!(est.topics + est.other_subjects == est.triples, distinct.len() == names.len());
    }

    #[test]
    fn domain_percentages_derive_from_counts(counts in proptest::collection::vec(0u64..1_000_000_000, 1..40)) {
        let keys = ["common", "type", "music", "film", "key", "people", "book", "base", "user", "location"];
        let manifests: Vec<SliceManifest> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| manifest(&format!("domain:{}{}", keys[i % keys.len()], i), *c))
            .collect();
        let total: u64 = counts.iter().sum();
        let rows = domain_stats(&manifests, DomainGroups::shipped());
        prop_assert_eq!(rows.len(), counts.len());
        if total > 0 {
            let mut sum = 0u64;
            for r in &rows {
                let exact = 100.0 * r.triple_count as f64 / total as f64;
                prop_assert!((r.percent_of_all().as_f64() - exact).abs() < 0.0001);
                sum += r.percent_of_all().ten_thousandths();
            }
            // 99.9% to 100% in ten-thousandths of a percent.
            prop_assert!((999_000..=1_000_000).contains(&sum), "sum {}", sum);
        }
    }
}
