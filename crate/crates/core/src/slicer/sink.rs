//! Slice files behind a bounded set of open handles.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::{SliceManifest, SlicerError};

struct Sink {
    file_name: String,
    writable: bool,
    created: bool,
    writer: Option<BufWriter<File>>,
    last_used: u64,
    triples: u64,
    bytes: u64,
    hasher: Sha256,
    elapsed: Duration,
}

/// Evicts the least recently used writer once `max_open` are open. Reopened
/// files are appended to, so eviction never changes content.
pub(super) struct SinkPool {
    dir: PathBuf,
    sinks: Vec<Sink>,
    open: usize,
    max_open: usize,
    clock: u64,
}

impl SinkPool {
    pub(super) fn new(dir: &Path, files: Vec<String>, writable: Vec<bool>, max_open: usize) -> Self {
        let sinks = files
            .into_iter()
            .zip(writable)
            .map(|(file_name, writable)| Sink {
                file_name,
                writable,
                created: false,
                writer: None,
                last_used: 0,
                triples: 0,
                bytes: 0,
                hasher: Sha256::new(),
                elapsed: Duration::ZERO,
            })
            .collect();
        SinkPool { dir: dir.to_owned(), sinks, open: 0, max_open, clock: 0 }
    }

    fn err(&self, slot: usize) -> impl Fn(std::io::Error) -> SlicerError + '_ {
        move |source| SlicerError::Sink { path: self.dir.join(&self.sinks[slot].file_name), source }
    }

    fn ensure_open(&mut self, slot: usize) -> Result<(), SlicerError> {
        if self.sinks[slot].writer.is_some() {
            return Ok(());
        }
        if self.open >= self.max_open {
            let victim = (0..self.sinks.len())
                .filter(|&i| self.sinks[i].writer.is_some())
                .min_by_key(|&i| self.sinks[i].last_used)
                .expect("an open sink to evict");
            let mut w = self.sinks[victim].writer.take().expect("open sink");
            w.flush().map_err(self.err(victim))?;
            self.open -= 1;
        }
        let path = self.dir.join(&self.sinks[slot].file_name);
        let file =
            if self.sinks[slot].created { OpenOptions::new().append(true).open(&path) } else { File::create(&path) }
                .map_err(self.err(slot))?;
        let sink = &mut self.sinks[slot];
        sink.created = true;
        sink.writer = Some(BufWriter::with_capacity(64 * 1024, file));
        self.open += 1;
        Ok(())
    }

    pub(super) fn write(&mut self, slot: usize, data: &[u8], triples: u64) -> Result<(), SlicerError> {
        let started = Instant::now();
        self.clock += 1;
        if self.sinks[slot].writable {
            self.ensure_open(slot)?;
            let sink = &mut self.sinks[slot];
            let result = sink.writer.as_mut().expect("open sink").write_all(data);
            result.map_err(self.err(slot))?;
        }
        let sink = &mut self.sinks[slot];
        sink.hasher.update(data);
        sink.last_used = self.clock;
        sink.triples += triples;
        sink.bytes += data.len() as u64;
        sink.elapsed += started.elapsed();
        Ok(())
    }

    /// Flushes everything and describes each slot, empty files included.
    pub(super) fn finish(mut self) -> Result<(Vec<SliceManifest>, Vec<Duration>), SlicerError> {
        let mut manifests = Vec::with_capacity(self.sinks.len());
        let mut timings = Vec::with_capacity(self.sinks.len());
        for slot in 0..self.sinks.len() {
            if self.sinks[slot].writable {
                if !self.sinks[slot].created {
                    self.ensure_open(slot)?;
                }
                if let Some(mut w) = self.sinks[slot].writer.take() {
                    w.flush().map_err(self.err(slot))?;
                    self.open -= 1;
                }
            }
            let sink = &mut self.sinks[slot];
            let checksum = hex::encode(std::mem::take(&mut sink.hasher).finalize());
            manifests.push(SliceManifest {
                selector: String::new(),
                label: None,
                predicate: None,
                path: sink.writable.then(|| sink.file_name.clone()),
                triple_count: sink.triples,
                byte_count: sink.bytes,
                checksum: sink.writable.then_some(checksum),
                expected_count: None,
            });
            timings.push(sink.elapsed);
        }
        Ok((manifests, timings))
    }
}
