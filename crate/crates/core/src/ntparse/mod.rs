//! Parsing and normalization of N-Triples dump lines.
//!
//! Every line maps to exactly one [`ParseOutcome`]. Malformed input is
//! reported as data and never aborts parsing. Three element shapes are
//! accepted in every position where they make sense:
//!
//! * bracketed IRIs, `<http://rdf.freebase.com/ns/m.abc123>` or `</m.abc123>`
//! * quoted literals with an optional `@lang` or `^^<datatype>` suffix
//! * bare normalized tokens, `/m.abc123`, as written by the TSV serializer
//!
//! All resources are normalized to the canonical dotted form, so a dump line
//! and its normalized TSV rendering parse to the same [`Triple`].

mod stream;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use stream::{
    open_path, open_reader, read_chunk, stream_triples, write_malformed_record, LineChunk, MalformedRecord,
    StreamCounters, StreamError, StreamOptions, TripleStream,
};

/// Namespace of Freebase machine ids and schema paths in the raw dump.
pub const FREEBASE_NS: &str = "http://rdf.freebase.com/ns/";
/// Namespace of Freebase key predicates in the raw dump.
pub const FREEBASE_KEY_NS: &str = "http://rdf.freebase.com/key/";

const FREEBASE_NS_HTTPS: &str = "https://rdf.freebase.com/ns/";
const FREEBASE_KEY_NS_HTTPS: &str = "https://rdf.freebase.com/key/";

/// Longest raw-line prefix kept in malformed-line reports.
pub const MALFORMED_PREFIX_LIMIT: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Mid,
    Gid,
    SchemaPath,
    Key,
    ExternalIri,
}

impl ResourceKind {
    /// Kinds living in a Freebase namespace (everything but external IRIs).
    pub fn is_freebase(self) -> bool {
        !matches!(self, ResourceKind::ExternalIri)
    }
}

/// A normalized identifier in subject, predicate or object position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Resource {
    kind: ResourceKind,
    value: String,
}

impl Resource {
    /// Normalizes `iri` and wraps it. Same as [`normalize_iri`].
    pub fn new(iri: &str) -> Self {
        normalize_iri(iri)
    }

    pub fn kind(&self) -> ResourceKind {
        self.kind
    }

    /// Canonical dotted value, e.g. `/m.abc123`, or the untouched external IRI.
    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn is_freebase(&self) -> bool {
        self.kind.is_freebase()
    }

    pub fn is_topic_id(&self) -> bool {
        matches!(self.kind, ResourceKind::Mid | ResourceKind::Gid)
    }

    /// Renders the bare token in the requested style.
    pub fn write_token(&self, style: Style, out: &mut Vec<u8>) {
        match (style, self.kind.is_freebase()) {
            (Style::Slashes, true) => out.extend(self.value.bytes().map(|b| if b == b'.' { b'/' } else { b })),
            _ => out.extend_from_slice(self.value.as_bytes()),
        }
    }

    /// Expands back to the full dump IRI (without angle brackets).
    pub fn to_full_iri(&self) -> String {
        match self.kind {
            ResourceKind::ExternalIri => self.value.clone(),
            ResourceKind::Key => match self.value.strip_prefix("/key.") {
                Some(rest) => format!("{FREEBASE_KEY_NS}{rest}"),
                None => format!("{FREEBASE_NS}key"),
            },
            _ => format!("{FREEBASE_NS}{}", &self.value[1..]),
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

/// A typed value. `lexical` holds the exact bytes between the quotes, escapes
/// included and unexpanded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    lang: Option<String>,
    datatype: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), lang: None, datatype: None }
    }

    pub fn with_lang(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), lang: Some(lang.into()), datatype: None }
    }

    pub fn with_datatype(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), lang: None, datatype: Some(datatype.into()) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn write_token(&self, out: &mut Vec<u8>) {
        out.push(b'"');
        out.extend_from_slice(self.lexical.as_bytes());
        out.push(b'"');
        if let Some(lang) = &self.lang {
            out.push(b'@');
            out.extend_from_slice(lang.as_bytes());
        } else if let Some(dt) = &self.datatype {
            out.extend_from_slice(b"^^<");
            out.extend_from_slice(dt.as_bytes());
            out.push(b'>');
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_token(&mut buf);
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Resource(Resource),
    Literal(Literal),
}

impl Node {
    pub fn as_resource(&self) -> Option<&Resource> {
        match self {
            Node::Resource(r) => Some(r),
            Node::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Node::Literal(l) => Some(l),
            Node::Resource(_) => None,
        }
    }

    pub fn write_token(&self, style: Style, out: &mut Vec<u8>) {
        match self {
            Node::Resource(r) => r.write_token(style, out),
            Node::Literal(l) => l.write_token(out),
        }
    }

    /// Canonical dotted token, used as a join and sort key.
    pub fn to_token(&self) -> String {
        match self {
            Node::Resource(r) => r.value.clone(),
            Node::Literal(l) => l.to_string(),
        }
    }
}

impl From<Resource> for Node {
    fn from(r: Resource) -> Self {
        Node::Resource(r)
    }
}

impl From<Literal> for Node {
    fn from(l: Literal) -> Self {
        Node::Literal(l)
    }
}

/// One dump line. Subject and predicate are resources by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Resource,
    pub predicate: Resource,
    pub object: Node,
}

impl Triple {
    pub fn new(subject: Resource, predicate: Resource, object: impl Into<Node>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Blank,
    Comment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MalformedReason {
    /// Missing tab, wrong delimiter, or a run of whitespace in strict mode.
    Delimiter,
    UnbalancedBracket,
    UnterminatedLiteral,
    MissingTerminator,
    MissingElement,
    /// A literal in subject or predicate position.
    LiteralPosition,
    BadLiteralSuffix,
    TrailingGarbage,
    InvalidUtf8,
}

impl MalformedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            MalformedReason::Delimiter => "delimiter",
            MalformedReason::UnbalancedBracket => "unbalanced_bracket",
            MalformedReason::UnterminatedLiteral => "unterminated_literal",
            MalformedReason::MissingTerminator => "missing_terminator",
            MalformedReason::MissingElement => "missing_element",
            MalformedReason::LiteralPosition => "literal_position",
            MalformedReason::BadLiteralSuffix => "bad_literal_suffix",
            MalformedReason::TrailingGarbage => "trailing_garbage",
            MalformedReason::InvalidUtf8 => "invalid_utf8",
        }
    }
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome {
    Ok(Triple),
    Skipped(SkipReason),
    Malformed { line_no: u64, reason: MalformedReason },
}

impl ParseOutcome {
    pub fn triple(self) -> Option<Triple> {
        match self {
            ParseOutcome::Ok(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    /// Accept whitespace runs as delimiters and tolerate a missing terminator.
    pub lenient: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions { lenient: false }
    }

    pub fn lenient() -> Self {
        ParseOptions { lenient: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    #[default]
    Dots,
    Slashes,
}

/// Which spelling of the key namespace a resource was normalized from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyForm {
    FullIri,
    ShortPath,
}

/// Normalizes a bracket-stripped IRI.
///
/// Freebase namespaces lose protocol and host and keep a dotted path;
/// anything unrecognized is an [`ResourceKind::ExternalIri`] kept verbatim.
pub fn normalize_iri(iri: &str) -> Resource {
    normalize_iri_traced(iri).0
}

/// Like [`normalize_iri`], also reporting which key-namespace spelling matched.
pub fn normalize_iri_traced(iri: &str) -> (Resource, Option<KeyForm>) {
    if let Some(rest) = iri.strip_prefix(FREEBASE_KEY_NS).or_else(|| iri.strip_prefix(FREEBASE_KEY_NS_HTTPS)) {
        let mut value = String::with_capacity(rest.len() + 5);
        value.push_str("/key");
        if !rest.is_empty() {
            value.push('.');
            push_dotted(&mut value, rest);
        }
        return (Resource { kind: ResourceKind::Key, value }, Some(KeyForm::FullIri));
    }
    if let Some(rest) = iri.strip_prefix(FREEBASE_NS).or_else(|| iri.strip_prefix(FREEBASE_NS_HTTPS)) {
        if !rest.is_empty() {
            let mut value = String::with_capacity(rest.len() + 1);
            value.push('/');
            push_dotted(&mut value, rest);
            let kind = classify_dotted(&value);
            let form = (kind == ResourceKind::Key).then_some(KeyForm::FullIri);
            return (Resource { kind, value }, form);
        }
    }
    if iri.len() > 1 && iri.starts_with('/') {
        let mut value = String::with_capacity(iri.len());
        value.push('/');
        push_dotted(&mut value, &iri[1..]);
        let kind = classify_dotted(&value);
        let form = (kind == ResourceKind::Key).then_some(KeyForm::ShortPath);
        return (Resource { kind, value }, form);
    }
    (Resource { kind: ResourceKind::ExternalIri, value: iri.to_owned() }, None)
}

fn push_dotted(out: &mut String, path: &str) {
    out.extend(path.chars().map(|c| if c == '/' { '.' } else { c }));
}

fn is_id_body(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn classify_dotted(value: &str) -> ResourceKind {
    if value.strip_prefix("/m.").is_some_and(is_id_body) {
        ResourceKind::Mid
    } else if value.strip_prefix("/g.").is_some_and(is_id_body) {
        ResourceKind::Gid
    } else if value == "/key" || value.starts_with("/key.") {
        ResourceKind::Key
    } else {
        ResourceKind::SchemaPath
    }
}

/// Appends the tab-delimited rendering of `t` (no newline).
pub fn write_triple(t: &Triple, style: Style, out: &mut Vec<u8>) {
    t.subject.write_token(style, out);
    out.push(b'\t');
    t.predicate.write_token(style, out);
    out.push(b'\t');
    t.object.write_token(style, out);
}

/// Tab-delimited rendering of `t`, e.g. `/m.abc123\t/type.object.name\t"X"@en`.
pub fn serialize_triple(t: &Triple, style: Style) -> String {
    let mut out = Vec::with_capacity(96);
    write_triple(t, style, &mut out);
    // Tokens are built from `str` values, so this cannot fail.
    String::from_utf8(out).expect("serialized triple is UTF-8")
}

/// Appends the original dump rendering: full bracketed IRIs and a `\t.` terminator.
pub fn write_ntriples(t: &Triple, out: &mut Vec<u8>) {
    let push_iri = |r: &Resource, out: &mut Vec<u8>| {
        out.push(b'<');
        out.extend_from_slice(r.to_full_iri().as_bytes());
        out.push(b'>');
    };
    push_iri(&t.subject, out);
    out.push(b'\t');
    push_iri(&t.predicate, out);
    out.push(b'\t');
    match &t.object {
        Node::Resource(r) => push_iri(r, out),
        Node::Literal(l) => l.write_token(out),
    }
    out.extend_from_slice(b"\t.");
}

/// Parses one line (without its newline) in strict mode.
pub fn parse_line(raw: &[u8], line_no: u64) -> ParseOutcome {
    parse_line_with(raw, line_no, ParseOptions::strict())
}

pub fn parse_line_with(raw: &[u8], line_no: u64, opts: ParseOptions) -> ParseOutcome {
    parse_line_traced(raw, line_no, opts, &mut |_| {})
}

pub(crate) fn parse_line_traced(
    raw: &[u8],
    line_no: u64,
    opts: ParseOptions,
    on_key: &mut dyn FnMut(KeyForm),
) -> ParseOutcome {
    let malformed = |reason| ParseOutcome::Malformed { line_no, reason };
    if raw.iter().all(|b| matches!(b, b' ' | b'\t' | b'\r')) {
        return ParseOutcome::Skipped(SkipReason::Blank);
    }
    let first = raw.iter().position(|b| !matches!(b, b' ' | b'\t')).unwrap_or(0);
    if raw[first] == b'#' {
        return ParseOutcome::Skipped(SkipReason::Comment);
    }
    if first > 0 && !opts.lenient {
        return malformed(MalformedReason::Delimiter);
    }
    let line = match std::str::from_utf8(&raw[first..]) {
        Ok(s) => s,
        Err(_) => return malformed(MalformedReason::InvalidUtf8),
    };
    let mut cur = Cursor { s: line, pos: 0, opts, on_key };
    match cur.parse_triple() {
        Ok(t) => ParseOutcome::Ok(t),
        Err(reason) => malformed(reason),
    }
}

struct Cursor<'a, 'k> {
    s: &'a str,
    pos: usize,
    opts: ParseOptions,
    on_key: &'k mut dyn FnMut(KeyForm),
}

enum Element {
    Resource { resource: Resource, bare: bool },
    Literal(Literal),
}

impl Cursor<'_, '_> {
    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.pos).copied()
    }

    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn parse_triple(&mut self) -> Result<Triple, MalformedReason> {
        let (subject, s_bare) = self.resource_element()?;
        self.delimiter()?;
        let (predicate, p_bare) = self.resource_element()?;
        self.delimiter()?;
        let (object, o_bare) = match self.element()? {
            Element::Resource { resource, bare } => (Node::Resource(resource), bare),
            Element::Literal(l) => (Node::Literal(l), true),
        };
        self.terminator(s_bare && p_bare && o_bare)?;
        Ok(Triple { subject, predicate, object })
    }

    fn resource_element(&mut self) -> Result<(Resource, bool), MalformedReason> {
        match self.element()? {
            Element::Resource { resource, bare } => Ok((resource, bare)),
            Element::Literal(_) => Err(MalformedReason::LiteralPosition),
        }
    }

    fn resource(&mut self, iri: &str) -> Resource {
        let (r, form) = normalize_iri_traced(iri);
        if let Some(form) = form {
            (self.on_key)(form);
        }
        r
    }

    fn element(&mut self) -> Result<Element, MalformedReason> {
        match self.peek() {
            None | Some(b'\t') | Some(b' ') => Err(MalformedReason::MissingElement),
            Some(b'<') => {
                let body = &self.s[self.pos + 1..];
                let end = body.find('>').ok_or(MalformedReason::UnbalancedBracket)?;
                let iri = &body[..end];
                if iri.contains('<') {
                    return Err(MalformedReason::UnbalancedBracket);
                }
                self.pos += end + 2;
                let resource = self.resource(iri);
                Ok(Element::Resource { resource, bare: false })
            }
            Some(b'"') => self.literal().map(Element::Literal),
            Some(b'>') => Err(MalformedReason::UnbalancedBracket),
            Some(_) => {
                let s = self.s;
                let rest = &s[self.pos..];
                let len = rest.find(['\t', ' ']).unwrap_or(rest.len());
                let token = &rest[..len];
                if token.contains(['<', '>']) {
                    return Err(MalformedReason::UnbalancedBracket);
                }
                if token.contains('"') {
                    return Err(MalformedReason::UnterminatedLiteral);
                }
                self.pos += len;
                // A lone "." is the terminator, never an element.
                if token == "." {
                    return Err(MalformedReason::MissingElement);
                }
                let resource = self.resource(token);
                Ok(Element::Resource { resource, bare: true })
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, MalformedReason> {
        let bytes = self.s.as_bytes();
        let start = self.pos + 1;
        let mut i = start;
        loop {
            match bytes.get(i) {
                None => return Err(MalformedReason::UnterminatedLiteral),
                Some(b'\\') => i += 2,
                Some(b'"') => break,
                Some(_) => i += 1,
            }
        }
        let lexical = self.s[start..i].to_owned();
        self.pos = i + 1;
        let mut lit = Literal { lexical, lang: None, datatype: None };
        match self.peek() {
            Some(b'@') => {
                let rest = &self.s[self.pos + 1..];
                let len = rest.bytes().position(|b| !(b.is_ascii_alphanumeric() || b == b'-')).unwrap_or(rest.len());
                if len == 0 {
                    return Err(MalformedReason::BadLiteralSuffix);
                }
                lit.lang = Some(rest[..len].to_owned());
                self.pos += 1 + len;
            }
            Some(b'^') => {
                let rest = &self.s[self.pos..];
                let body = rest.strip_prefix("^^<").ok_or(MalformedReason::BadLiteralSuffix)?;
                let end = body.find('>').ok_or(MalformedReason::UnbalancedBracket)?;
                lit.datatype = Some(body[..end].to_owned());
                self.pos += 3 + end + 1;
            }
            _ => {}
        }
        match self.peek() {
            None | Some(b'\t') | Some(b' ') => Ok(lit),
            Some(_) => Err(MalformedReason::BadLiteralSuffix),
        }
    }

    fn delimiter(&mut self) -> Result<(), MalformedReason> {
        let bytes = self.s.as_bytes();
        if self.opts.lenient {
            let start = self.pos;
            while matches!(self.peek(), Some(b'\t' | b' ')) {
                self.pos += 1;
            }
            return match (self.pos > start, self.peek()) {
                (_, None) => Err(MalformedReason::MissingElement),
                (false, _) => Err(MalformedReason::Delimiter),
                (true, _) => Ok(()),
            };
        }
        match bytes.get(self.pos) {
            Some(b'\t') => {
                self.pos += 1;
                match self.peek() {
                    Some(b'\t' | b' ') => Err(MalformedReason::Delimiter),
                    None => Err(MalformedReason::MissingElement),
                    Some(_) => Ok(()),
                }
            }
            None => Err(MalformedReason::MissingElement),
            Some(_) => Err(MalformedReason::Delimiter),
        }
    }

    fn terminator(&mut self, all_bare: bool) -> Result<(), MalformedReason> {
        let rest = self.rest();
        if self.opts.lenient {
            let trimmed = rest.trim_start_matches([' ', '\t']);
            let trimmed = trimmed.strip_prefix('.').unwrap_or(trimmed);
            return if trimmed.trim_matches([' ', '\t']).is_empty() {
                Ok(())
            } else {
                Err(MalformedReason::TrailingGarbage)
            };
        }
        match rest {
            // The normalized TSV form carries no terminator.
            "" if all_bare => Ok(()),
            "" => Err(MalformedReason::MissingTerminator),
            "." | "\t." | " ." => Ok(()),
            r if r.starts_with("\t.") || r.starts_with(" .") => Err(MalformedReason::TrailingGarbage),
            r if r.starts_with(['\t', ' ']) => {
                let after = r.trim_start_matches(['\t', ' ']);
                if after == "." {
                    Err(MalformedReason::Delimiter)
                } else {
                    Err(MalformedReason::TrailingGarbage)
                }
            }
            _ => Err(MalformedReason::TrailingGarbage),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(line: &str) -> Triple {
        match parse_line(line.as_bytes(), 1) {
            ParseOutcome::Ok(t) => t,
            other => panic!("expected Ok for {line:?}, got {other:?}"),
        }
    }

    fn reason(line: &str, opts: ParseOptions) -> MalformedReason {
        match parse_line_with(line.as_bytes(), 7, opts) {
            ParseOutcome::Malformed { line_no, reason } => {
                assert_eq!(line_no, 7);
                reason
            }
            other => panic!("expected Malformed for {line:?}, got {other:?}"),
        }
    }

    #[test]
    fn dump_line_with_gid_subject() {
        let t = ok("<http://rdf.freebase.com/ns/g.112ygbz6_>\t<http://rdf.freebase.com/ns/type.object.type>\t<http://rdf.freebase.com/ns/film.film>\t.");
        assert_eq!(t.subject, Resource { kind: ResourceKind::Gid, value: "/g.112ygbz6_".into() });
        assert_eq!(t.predicate.value(), "/type.object.type");
        assert_eq!(t.predicate.kind(), ResourceKind::SchemaPath);
        assert_eq!(t.object, Node::Resource(normalize_iri("/film.film")));
    }

    #[test]
    fn language_tagged_description() {
        let t = ok("<http://rdf.freebase.com/ns/m.05kdnfz>\t<http://rdf.freebase.com/ns/common.topic.description>\t\"The type or category of bike, eg. mountain bike, recumbent, hybrid\"@en\t.");
        assert_eq!(t.subject.kind(), ResourceKind::Mid);
        let lit = t.object.as_literal().unwrap();
        assert_eq!(lit.lexical(), "The type or category of bike, eg. mountain bike, recumbent, hybrid");
        assert_eq!(lit.lang(), Some("en"));
        assert_eq!(lit.datatype(), None);
    }

    #[test]
    fn blank_and_comment_lines_are_skipped() {
        assert_eq!(parse_line(b"", 1), ParseOutcome::Skipped(SkipReason::Blank));
        assert_eq!(parse_line(b"  \t", 1), ParseOutcome::Skipped(SkipReason::Blank));
        assert_eq!(parse_line(b"# header", 1), ParseOutcome::Skipped(SkipReason::Comment));
    }

    #[test]
    fn missing_tabs_is_a_delimiter_error() {
        let line = "<http://rdf.freebase.com/ns/m.1> <http://rdf.freebase.com/ns/type.object.type> <http://rdf.freebase.com/ns/film.film> .";
        assert_eq!(reason(line, ParseOptions::strict()), MalformedReason::Delimiter);
        // Lenient mode accepts whitespace runs.
        assert!(matches!(parse_line_with(line.as_bytes(), 1, ParseOptions::lenient()), ParseOutcome::Ok(_)));
    }

    #[test]
    fn malformed_reasons() {
        let strict = ParseOptions::strict();
        assert_eq!(reason("<a\t<b>\t<c>\t.", strict), MalformedReason::UnbalancedBracket);
        assert_eq!(reason("<a>\t<b>\t\"open\t.", strict), MalformedReason::UnterminatedLiteral);
        assert_eq!(reason("<a>\t<b>\t<c>", strict), MalformedReason::MissingTerminator);
        assert_eq!(reason("<a>\t<b>", strict), MalformedReason::MissingElement);
        assert_eq!(reason("\"x\"\t<b>\t<c>\t.", strict), MalformedReason::LiteralPosition);
        assert_eq!(reason("<a>\t<b>\t\"x\"@\t.", strict), MalformedReason::BadLiteralSuffix);
        assert_eq!(reason("<a>\t<b>\t<c>\t.\textra", strict), MalformedReason::TrailingGarbage);
        assert_eq!(reason("<a>\t\t<b>\t<c>\t.", strict), MalformedReason::Delimiter);
        assert_eq!(
            parse_line(b"<a>\t<b>\t\"\xff\"\t.", 3),
            ParseOutcome::Malformed { line_no: 3, reason: MalformedReason::InvalidUtf8 }
        );
    }

    #[test]
    fn lenient_tolerates_missing_terminator() {
        let line = "<a>\t<b>\t<c>";
        assert!(matches!(parse_line_with(line.as_bytes(), 1, ParseOptions::lenient()), ParseOutcome::Ok(_)));
    }

    #[test]
    fn tsv_form_needs_no_terminator() {
        let t = ok("/m.abc123\t/type.object.name\t\"X\"@en");
        assert_eq!(t.subject.value(), "/m.abc123");
        assert_eq!(t.object, Node::Literal(Literal::with_lang("X", "en")));
    }

    #[test]
    fn literal_escapes_are_preserved() {
        let t = ok(r#"<a>	<b>	"say \"hi\"\t\\ok\n"	."#);
        assert_eq!(t.object.as_literal().unwrap().lexical(), r#"say \"hi\"\t\\ok\n"#);
    }

    #[test]
    fn datatype_literal() {
        let t = ok("/m.1\t/people.person.date_of_birth\t\"1946-12-18\"^^<http://www.w3.org/2001/XMLSchema#date>\t.");
        let lit = t.object.as_literal().unwrap();
        assert_eq!(lit.datatype(), Some("http://www.w3.org/2001/XMLSchema#date"));
        assert_eq!(lit.lang(), None);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_iri("http://rdf.freebase.com/ns/m.abc123"),
            Resource { kind: ResourceKind::Mid, value: "/m.abc123".into() }
        );
        let w3 = "https://www.w3.org/2000/01/rdf-schema#label";
        assert_eq!(normalize_iri(w3), Resource { kind: ResourceKind::ExternalIri, value: w3.into() });
        assert_eq!(
            normalize_iri("/people.person"),
            Resource { kind: ResourceKind::SchemaPath, value: "/people.person".into() }
        );
        assert_eq!(normalize_iri("/people/person").value(), "/people.person");
        assert_eq!(normalize_iri("/m/abc123").kind(), ResourceKind::Mid);
        assert_eq!(normalize_iri("").kind(), ResourceKind::ExternalIri);
    }

    #[test]
    fn key_namespaces_map_to_key_kind() {
        let (full, form) = normalize_iri_traced("http://rdf.freebase.com/key/wikipedia.en");
        assert_eq!(full, Resource { kind: ResourceKind::Key, value: "/key.wikipedia.en".into() });
        assert_eq!(form, Some(KeyForm::FullIri));
        let (short, form) = normalize_iri_traced("/key/wikipedia.en");
        assert_eq!(short, full);
        assert_eq!(form, Some(KeyForm::ShortPath));
        assert_eq!(full.to_full_iri(), "http://rdf.freebase.com/key/wikipedia.en");
    }

    #[test]
    fn serialize_styles() {
        let t = Triple::new(
            normalize_iri("/m.abc123"),
            normalize_iri("/type.object.type"),
            normalize_iri("/people.person"),
        );
        assert_eq!(serialize_triple(&t, Style::Slashes), "/m/abc123\t/type/object/type\t/people/person");
        let t =
            Triple::new(normalize_iri("/m.abc123"), normalize_iri("/type.object.name"), Literal::with_lang("X", "en"));
        assert_eq!(serialize_triple(&t, Style::Dots), "/m.abc123\t/type.object.name\t\"X\"@en");
    }

    #[test]
    fn bracketed_dots_round_trip() {
        let t = ok("</bicycles.bicycle_model.bicycle_type>\t</type.object.name>\t\"Bicycle type\"@en\t.");
        assert_eq!(t.subject.value(), "/bicycles.bicycle_model.bicycle_type");
        let mut buf = Vec::new();
        write_ntriples(&t, &mut buf);
        assert_eq!(parse_line(&buf, 1), ParseOutcome::Ok(t));
    }
}
