//! Activation trace written as JSON lines.

use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

/// One hyperplane activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub split_var: usize,
    pub generator: String,
    pub step: usize,
    pub criterion: String,
    pub hyperplane: usize,
    pub hyperplane_name: String,
    pub rays_cut: Vec<usize>,
    pub points_added: usize,
    pub points_removed: usize,
    pub rays_added: usize,
    pub rays_removed: usize,
}

/// Thread-safe event sink.
#[derive(Debug, Default)]
pub struct Trace {
    events: Mutex<Vec<TraceEvent>>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, e: TraceEvent) {
        self.events.lock().unwrap().push(e);
    }

    /// Events ordered by split, generator and step.
    pub fn events(&self) -> Vec<TraceEvent> {
        let mut v = self.events.lock().unwrap().clone();
        v.sort_by(|a, b| {
            (a.split_var, &a.generator, a.step).cmp(&(b.split_var, &b.generator, b.step))
        });
        v
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in self.events() {
            serde_json::to_writer(&mut w, &e)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Parses a JSON-lines trace.
pub fn read_jsonl(text: &str) -> Result<Vec<TraceEvent>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
