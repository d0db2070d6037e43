//! Bounded-memory sorting of byte records.
//!
//! Records accumulate in memory until the budget is reached, then the buffer
//! is sorted and spilled to an anonymous temporary file as a run. Finishing
//! merges every run with the in-memory remainder through a binary heap.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::PathBuf;

/// Smallest budget the command line accepts.
pub const MIN_SORT_MEMORY: usize = 1 << 20;

const RECORD_OVERHEAD: usize = std::mem::size_of::<Vec<u8>>();

#[derive(Debug, Clone)]
pub struct SortConfig {
    /// Approximate bytes of records held in memory before spilling.
    pub mem_budget: usize,
    /// Directory for spill files; the system temp dir when unset.
    pub tmp_dir: Option<PathBuf>,
}

impl Default for SortConfig {
    fn default() -> Self {
        SortConfig { mem_budget: 64 << 20, tmp_dir: None }
    }
}

impl SortConfig {
    pub fn with_budget(mem_budget: usize) -> Self {
        SortConfig { mem_budget, ..Default::default() }
    }
}

pub struct ExternalSorter {
    cfg: SortConfig,
    buffer: Vec<Vec<u8>>,
    buffered_bytes: usize,
    runs: Vec<File>,
}

impl ExternalSorter {
    pub fn new(cfg: SortConfig) -> Self {
        ExternalSorter { cfg, buffer: Vec::new(), buffered_bytes: 0, runs: Vec::new() }
    }

    pub fn push(&mut self, record: &[u8]) -> io::Result<()> {
        self.push_owned(record.to_vec())
    }

    pub fn push_owned(&mut self, record: Vec<u8>) -> io::Result<()> {
        self.buffered_bytes += record.len() + RECORD_OVERHEAD;
        self.buffer.push(record);
        if self.buffered_bytes >= self.cfg.mem_budget {
            self.spill()?;
        }
        Ok(())
    }

    /// Number of runs spilled so far.
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    fn spill(&mut self) -> io::Result<()> {
        self.buffer.sort_unstable();
        let file = match &self.cfg.tmp_dir {
            Some(dir) => tempfile::tempfile_in(dir)?,
            None => tempfile::tempfile()?,
        };
        let mut w = BufWriter::with_capacity(1 << 16, file);
        for rec in self.buffer.drain(..) {
            w.write_all(&(rec.len() as u32).to_le_bytes())?;
            w.write_all(&rec)?;
        }
        let mut file = w.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(0))?;
        self.runs.push(file);
        self.buffered_bytes = 0;
        Ok(())
    }

    /// Sorted stream of every pushed record, duplicates included.
    pub fn finish(mut self) -> io::Result<SortedRecords> {
        self.buffer.sort_unstable();
        let mut runs: Vec<RunReader> =
            self.runs.into_iter().map(|f| RunReader { reader: BufReader::with_capacity(1 << 16, f) }).collect();
        let mut heap = BinaryHeap::with_capacity(runs.len() + 1);
        for (i, run) in runs.iter_mut().enumerate() {
            if let Some(rec) = run.next_record()? {
                heap.push(Reverse((rec, i)));
            }
        }
        let mut memory = self.buffer.into_iter();
        let mem_idx = runs.len();
        if let Some(rec) = memory.next() {
            heap.push(Reverse((rec, mem_idx)));
        }
        Ok(SortedRecords { runs, memory, heap })
    }
}

struct RunReader {
    reader: BufReader<File>,
}

impl RunReader {
    fn next_record(&mut self) -> io::Result<Option<Vec<u8>>> {
        let mut len = [0u8; 4];
        match self.reader.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
            Err(e) => return Err(e),
        }
        let mut rec = vec![0u8; u32::from_le_bytes(len) as usize];
        self.reader.read_exact(&mut rec)?;
        Ok(Some(rec))
    }
}

pub struct SortedRecords {
    runs: Vec<RunReader>,
    memory: std::vec::IntoIter<Vec<u8>>,
    heap: BinaryHeap<Reverse<(Vec<u8>, usize)>>,
}

impl Iterator for SortedRecords {
    type Item = io::Result<Vec<u8>>;

    fn next(&mut self) -> Option<Self::Item> {
        let Reverse((rec, src)) = self.heap.pop()?;
        let refill = if src == self.runs.len() { Ok(self.memory.next()) } else { self.runs[src].next_record() };
        match refill {
            Ok(Some(next)) => self.heap.push(Reverse((next, src))),
            Ok(None) => {}
            Err(e) => return Some(Err(e)),
        }
        Some(Ok(rec))
    }
}

/// Drops adjacent duplicates from a sorted stream.
pub fn dedup_sorted<I>(sorted: I) -> impl Iterator<Item = io::Result<Vec<u8>>>
where
    I: Iterator<Item = io::Result<Vec<u8>>>,
{
    let mut last: Option<Vec<u8>> = None;
    sorted.filter_map(move |r| match r {
        Ok(rec) if last.as_ref() == Some(&rec) => None,
        Ok(rec) => {
            last = Some(rec.clone());
            Some(Ok(rec))
        }
        Err(e) => Some(Err(e)),
    })
}

/// Counts records present in both sorted, duplicate-free streams.
pub fn count_intersection<A, B>(a: A, b: B) -> io::Result<u64>
where
    A: Iterator<Item = io::Result<Vec<u8>>>,
    B: Iterator<Item = io::Result<Vec<u8>>>,
{
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut count = 0;
    loop {
        let ord = match (a.peek(), b.peek()) {
            (Some(Err(_)), _) => return Err(a.next().unwrap().unwrap_err()),
            (_, Some(Err(_))) => return Err(b.next().unwrap().unwrap_err()),
            (Some(Ok(x)), Some(Ok(y))) => x.cmp(y),
            _ => return Ok(count),
        };
        match ord {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                count += 1;
                a.next();
                b.next();
            }
        }
    }
}

/// Appends `field` with a length prefix so concatenated fields sort and
/// compare unambiguously.
pub fn push_field(out: &mut Vec<u8>, field: &[u8]) {
    out.extend_from_slice(&(field.len() as u32).to_be_bytes());
    out.extend_from_slice(field);
}

/// Splits the first length-prefixed field off `rec`.
pub fn split_field(rec: &[u8]) -> Option<(&[u8], &[u8])> {
    let len = u32::from_be_bytes(rec.get(..4)?.try_into().ok()?) as usize;
    let body = rec.get(4..4 + len)?;
    Some((body, &rec[4 + len..]))
}
