use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{parse_line_traced, KeyForm, MalformedReason, ParseOptions, ParseOutcome, MALFORMED_PREFIX_LIMIT};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
const READ_BUFFER: usize = 256 * 1024;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("read failed at byte {offset} (line {line}): {source}")]
    Io {
        line: u64,
        offset: u64,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamOptions {
    pub parse: ParseOptions,
}

/// Running totals of a parse. `lines == ok + skipped + malformed` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamCounters {
    pub lines: u64,
    pub ok: u64,
    pub skipped: u64,
    pub malformed: u64,
    /// Decompressed bytes consumed, newlines included.
    pub bytes: u64,
    pub key_full_iri: u64,
    pub key_short_path: u64,
}

impl StreamCounters {
    pub fn record(&mut self, outcome: &ParseOutcome) {
        self.lines += 1;
        match outcome {
            ParseOutcome::Ok(_) => self.ok += 1,
            ParseOutcome::Skipped(_) => self.skipped += 1,
            ParseOutcome::Malformed { .. } => self.malformed += 1,
        }
    }

    pub fn record_key(&mut self, form: KeyForm) {
        match form {
            KeyForm::FullIri => self.key_full_iri += 1,
            KeyForm::ShortPath => self.key_short_path += 1,
        }
    }

    pub fn merge(&mut self, other: &StreamCounters) {
        self.lines += other.lines;
        self.ok += other.ok;
        self.skipped += other.skipped;
        self.malformed += other.malformed;
        self.bytes += other.bytes;
        self.key_full_iri += other.key_full_iri;
        self.key_short_path += other.key_short_path;
    }
}

/// Wraps `reader`, transparently decompressing when it starts with the gzip magic.
pub fn open_reader<R: Read + Send + 'static>(reader: R) -> io::Result<Box<dyn BufRead + Send>> {
    let mut buffered = BufReader::with_capacity(READ_BUFFER, reader);
    let head = buffered.fill_buf()?;
    if head.len() >= 2 && head[..2] == GZIP_MAGIC {
        Ok(Box::new(BufReader::with_capacity(READ_BUFFER, MultiGzDecoder::new(buffered))))
    } else {
        Ok(Box::new(buffered))
    }
}

pub fn open_path(path: impl AsRef<Path>) -> io::Result<Box<dyn BufRead + Send>> {
    open_reader(File::open(path)?)
}

/// Streams parse outcomes from a plain or gzip byte source.
///
/// Only the current line is buffered, so memory is bounded by the longest line.
pub fn stream_triples<R: Read + Send + 'static>(
    source: R,
    opts: StreamOptions,
) -> Result<TripleStream<Box<dyn BufRead + Send>>, StreamError> {
    let reader = open_reader(source).map_err(|source| StreamError::Io { line: 0, offset: 0, source })?;
    Ok(TripleStream::new(reader, opts))
}

pub struct TripleStream<R> {
    reader: R,
    buf: Vec<u8>,
    opts: StreamOptions,
    counters: StreamCounters,
    failed: bool,
}

impl<R: BufRead> TripleStream<R> {
    /// Wraps an already-decoded reader.
    pub fn new(reader: R, opts: StreamOptions) -> Self {
        TripleStream { reader, buf: Vec::with_capacity(512), opts, counters: StreamCounters::default(), failed: false }
    }

    pub fn counters(&self) -> &StreamCounters {
        &self.counters
    }

    /// Adapts the stream to yield only well-formed triples.
    pub fn triples(self) -> impl Iterator<Item = Result<super::Triple, StreamError>> {
        self.filter_map(|r| match r {
            Ok(ParseOutcome::Ok(t)) => Some(Ok(t)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
    }

    /// Like [`Iterator::next`], also handing the raw line to `on_raw`.
    pub fn next_with_raw(&mut self, on_raw: &mut dyn FnMut(&[u8])) -> Option<Result<ParseOutcome, StreamError>> {
        if self.failed {
            return None;
        }
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(n) => {
                self.counters.bytes += n as u64;
                let line = trim_newline(&self.buf);
                let line_no = self.counters.lines + 1;
                let counters = &mut self.counters;
                let outcome = parse_line_traced(line, line_no, self.opts.parse, &mut |form| counters.record_key(form));
                self.counters.record(&outcome);
                on_raw(line);
                Some(Ok(outcome))
            }
            Err(source) => {
                self.failed = true;
                Some(Err(StreamError::Io { line: self.counters.lines + 1, offset: self.counters.bytes, source }))
            }
        }
    }
}

impl<R: BufRead> Iterator for TripleStream<R> {
    type Item = Result<ParseOutcome, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_with_raw(&mut |_| {})
    }
}

fn trim_newline(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

/// A run of consecutive raw lines, the unit of work for parallel stages.
#[derive(Debug, Default)]
pub struct LineChunk {
    data: Vec<u8>,
    ends: Vec<usize>,
    /// 1-based number of the first line in the chunk.
    pub first_line_no: u64,
    /// Raw bytes consumed, newlines included.
    pub bytes: u64,
}

impl LineChunk {
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn lines(&self) -> impl Iterator<Item = (u64, &[u8])> {
        let starts = std::iter::once(0).chain(self.ends.iter().copied());
        starts
            .zip(self.ends.iter().copied())
            .enumerate()
            .map(move |(i, (s, e))| (self.first_line_no + i as u64, &self.data[s..e]))
    }

    /// Parses every line, returning outcomes in order plus chunk-local counters.
    pub fn parse(&self, opts: ParseOptions) -> (Vec<ParseOutcome>, StreamCounters) {
        let mut counters = StreamCounters { bytes: self.bytes, ..Default::default() };
        let outcomes = self
            .lines()
            .map(|(line_no, raw)| {
                let outcome = parse_line_traced(raw, line_no, opts, &mut |form| counters.record_key(form));
                counters.record(&outcome);
                outcome
            })
            .collect();
        (outcomes, counters)
    }
}

/// Fills `chunk` with up to `max_lines` lines. Returns false at end of input.
pub fn read_chunk(
    reader: &mut dyn BufRead,
    max_lines: usize,
    next_line_no: u64,
    offset: u64,
    chunk: &mut LineChunk,
) -> Result<bool, StreamError> {
    chunk.data.clear();
    chunk.ends.clear();
    chunk.first_line_no = next_line_no;
    chunk.bytes = 0;
    let mut raw = Vec::with_capacity(256);
    while chunk.ends.len() < max_lines {
        raw.clear();
        let n = reader.read_until(b'\n', &mut raw).map_err(|source| StreamError::Io {
            line: next_line_no + chunk.ends.len() as u64,
            offset: offset + chunk.bytes,
            source,
        })?;
        if n == 0 {
            break;
        }
        chunk.bytes += n as u64;
        chunk.data.extend_from_slice(trim_newline(&raw));
        chunk.ends.push(chunk.data.len());
    }
    Ok(!chunk.ends.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedRecord {
    pub line_no: u64,
    pub reason: MalformedReason,
    pub prefix: String,
}

impl MalformedRecord {
    pub fn new(line_no: u64, reason: MalformedReason, raw: &[u8]) -> Self {
        let mut end = raw.len().min(MALFORMED_PREFIX_LIMIT);
        // Do not split a UTF-8 sequence when the line is valid text.
        if let Ok(s) = std::str::from_utf8(raw) {
            while !s.is_char_boundary(end) {
                end -= 1;
            }
        }
        let prefix =
            String::from_utf8_lossy(&raw[..end]).replace('\\', "\\\\").replace('\t', "\\t").replace('\r', "\\r");
        MalformedRecord { line_no, reason, prefix }
    }
}

/// Writes one `line_no \t reason \t prefix` row of the malformed-line report.
pub fn write_malformed_record(out: &mut dyn Write, rec: &MalformedRecord) -> io::Result<()> {
    writeln!(out, "{}\t{}\t{}", rec.line_no, rec.reason, rec.prefix)
}
