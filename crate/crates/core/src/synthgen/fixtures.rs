//! Hand-shaped fixtures with known schema content.

use std::io::Write;

use crate::ntparse::{write_ntriples, Literal, Resource, Triple};
use crate::schema::known;

pub const BICYCLES_DOMAIN: &str = "bicycles";
pub const BICYCLES_DOMAIN_TRIPLES: u64 = 313;
pub const BICYCLE_TYPE_PROPERTY: &str = "/bicycles.bicycle_model.bicycle_type";
pub const BICYCLE_TYPE_MID: &str = "/m.05kdnfz";
pub const BICYCLE_TYPE_NAME: &str = "Bicycle type";
pub const BICYCLE_TYPE_DESCRIPTION: &str = "Category of a bicycle model";

const MODELS: u64 = 63;
const MODELS_WITH_SPEEDS: u64 = 61;
const MANUFACTURERS: u64 = 12;
const KINDS: u64 = 9;

const MODEL: &str = "/bicycles.bicycle_model";
const KIND: &str = "/bicycles.bicycle_type";
const MANUFACTURER: &str = "/bicycles.bicycle_manufacturer";
const SPEEDS: &str = "/bicycles.bicycle_model.speeds";
const MADE_BY: &str = "/bicycles.bicycle_model.manufacturer";
const MODELS_OF_MANUFACTURER: &str = "/bicycles.bicycle_manufacturer.bicycle_models";
const MODELS_OF_KIND: &str = "/bicycles.bicycle_type.bicycle_models_of_this_type";

fn r(id: &str) -> Resource {
    known::resource(id)
}

fn en(text: impl Into<String>) -> Literal {
    Literal::with_lang(text, "en")
}

/// A bicycles domain of 313 triples over five properties and three types,
/// with its entities' types and names and the metadata of the schema paths.
pub fn bicycles_triples() -> Vec<Triple> {
    let model = |i: u64| r(&format!("/m.0bm{i}"));
    let manufacturer = |i: u64| r(&format!("/m.0bf{i}"));
    let kind = |i: u64| r(&format!("/m.0bt{i}"));
    let mut out = Vec::new();
    for i in 0..MODELS {
        let (m, f, k) = (model(i), manufacturer(i % MANUFACTURERS), kind(i % KINDS));
        out.push(Triple::new(m.clone(), r(MADE_BY), f.clone()));
        out.push(Triple::new(m.clone(), r(BICYCLE_TYPE_PROPERTY), k.clone()));
        out.push(Triple::new(f, r(MODELS_OF_MANUFACTURER), m.clone()));
        out.push(Triple::new(k, r(MODELS_OF_KIND), m.clone()));
        if i < MODELS_WITH_SPEEDS {
            out.push(Triple::new(m, r(SPEEDS), Literal::plain(format!("{}", 1 + i % 27))));
        }
    }
    let entities = [(MODEL, MODELS, "Model"), (MANUFACTURER, MANUFACTURERS, "Maker"), (KIND, KINDS, "Kind")];
    for (ty, n, label) in entities {
        for i in 0..n {
            let e = match ty {
                MODEL => model(i),
                MANUFACTURER => manufacturer(i),
                _ => kind(i),
            };
            out.push(Triple::new(e.clone(), r(known::TYPE), r(ty)));
            out.push(Triple::new(e, r(known::NAME), en(format!("{label} {i}"))));
        }
    }
    out.push(Triple::new(r(BICYCLE_TYPE_PROPERTY), r(known::NAME), en(BICYCLE_TYPE_NAME)));
    out.push(Triple::new(r(BICYCLE_TYPE_PROPERTY), r(known::MID), r(BICYCLE_TYPE_MID)));
    out.push(Triple::new(r(BICYCLE_TYPE_MID), r(known::DESCRIPTION), en(BICYCLE_TYPE_DESCRIPTION)));
    for (i, (ty, name)) in [(MODEL, "Bicycle Model"), (KIND, "Bicycle Type"), (MANUFACTURER, "Bicycle Manufacturer")]
        .into_iter()
        .enumerate()
    {
        let mid = r(&format!("/m.0bs{i}"));
        out.push(Triple::new(r(ty), r(known::NAME), en(name)));
        out.push(Triple::new(r(ty), r(known::MID), mid));
    }
    out
}

pub fn write_bicycles_dump(sink: &mut dyn Write) -> std::io::Result<u64> {
    let triples = bicycles_triples();
    let mut buf = Vec::new();
    for t in &triples {
        write_ntriples(t, &mut buf);
        buf.push(b'\n');
    }
    sink.write_all(&buf)?;
    Ok(triples.len() as u64)
}
