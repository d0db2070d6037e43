//! Throttled progress lines on stderr.

use std::time::{Duration, Instant};

const INTERVAL: Duration = Duration::from_secs(2);

pub struct Progress {
    label: String,
    total_bytes: Option<u64>,
    started: Instant,
    last: Instant,
    enabled: bool,
}

impl Progress {
    /// `total_bytes` enables an ETA; it is the size of the input as read.
    pub fn new(label: impl Into<String>, total_bytes: Option<u64>, enabled: bool) -> Self {
        let now = Instant::now();
        Progress { label: label.into(), total_bytes, started: now, last: now, enabled }
    }

    pub fn silent() -> Self {
        Progress::new("", None, false)
    }

    pub fn update(&mut self, bytes: u64, lines: u64) {
        if !self.enabled || self.last.elapsed() < INTERVAL {
            return;
        }
        self.last = Instant::now();
        eprintln!("{}", self.render(bytes, lines));
    }

    pub fn finish(&self, bytes: u64, lines: u64) {
        if self.enabled {
            eprintln!("{} done", self.render(bytes, lines));
        }
    }

    fn render(&self, bytes: u64, lines: u64) -> String {
        let secs = self.started.elapsed().as_secs_f64().max(1e-9);
        let rate = bytes as f64 / secs;
        let mut line = format!(
            "{}: {lines} lines, {:.1} MiB, {:.1} MiB/s",
            self.label,
            bytes as f64 / 1048576.0,
            rate / 1048576.0
        );
        if let Some(total) = self.total_bytes.filter(|&t| t > bytes && rate > 0.0) {
            line.push_str(&format!(", ETA {:.0}s", (total - bytes) as f64 / rate));
        }
        line
    }
}
