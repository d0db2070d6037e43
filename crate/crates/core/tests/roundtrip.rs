mod common;

use fbdump::ntparse::{normalize_iri, parse_line_with, serialize_triple, write_ntriples, Node, ParseOptions, Style};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_triples_round_trip(spec in common::small_spec()) {
        let (dump, _) = common::dump(&spec);
        for (i, t) in common::parse_all(&dump).into_iter().enumerate() {
            let line = serialize_triple(&t, Style::Dots);
            let back = parse_line_with(line.as_bytes(), i as u64 + 1, ParseOptions::strict()).triple();
            prop_assert_eq!(back.as_ref(), Some(&t), "{}", line);

            let mut nt = Vec::new();
            write_ntriples(&t, &mut nt);
            let back = parse_line_with(&nt, i as u64 + 1, ParseOptions::strict()).triple();
            prop_assert_eq!(back.as_ref(), Some(&t), "{}", String::from_utf8_lossy(&nt));

            let mut resources = vec![&t.subject, &t.predicate];
            if let Node::Resource(o) = &t.object {
                resources.push(o);
            }
            for r in resources {
                prop_assert_eq!(&normalize_iri(r.value()), r);
                prop_assert_eq!(&normalize_iri(&r.to_full_iri()), r);
            }
        }
    }
}
