//! Temporal edge lists, label files and per-node neighbor histories.
//!
//! Events are kept in time order with ties resolved by input order. Node
//! positions (the arrival order used by the positional encoder) are assigned
//! by scanning the sorted stream, source before destination.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

pub type NodeId = u64;

/// One timestamped interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub src: NodeId,
    pub dst: NodeId,
    pub time: f64,
}

/// A time-ordered event stream together with the node arrival order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    events: Vec<Event>,
    /// Node ids in order of first appearance.
    nodes: Vec<NodeId>,
    first_seen: HashMap<NodeId, usize>,
}

impl TemporalGraph {
    /// Builds a graph from events in arbitrary order.
    ///
    /// Events are stably sorted by time; self-loops and invalid timestamps
    /// are rejected (the reported line is the 1-based position in `events`).
    pub fn from_events(mut events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::NoEvents);
        }
        for (i, e) in events.iter().enumerate() {
            if e.src == e.dst {
                return Err(Error::SelfLoop {
                    line: i + 1,
                    node: e.src,
                });
            }
            if !(e.time.is_finite() && e.time >= 0.0) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("invalid timestamp {}", e.time),
                });
            }
        }
        // `sort_by` is stable, so equal times keep input order.
        events.sort_by(|a, b| a.time.total_cmp(&b.time));

        let mut nodes = Vec::new();
        let mut first_seen = HashMap::new();
        for e in &events {
            for id in [e.src, e.dst] {
                first_seen.entry(id).or_insert_with(|| {
                    nodes.push(id);
                    nodes.len() - 1
                });
            }
        }
        Ok(Self {
            events,
            nodes,
            first_seen,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids in arrival order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Arrival position of `id`, if it appears in the stream.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.first_seen.get(&id).copied()
    }

    pub fn first_seen(&self) -> &HashMap<NodeId, usize> {
        &self.first_seen
    }

    /// Events with endpoints replaced by arrival positions.
    pub fn indexed_events(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.events
            .iter()
            .map(|e| (self.first_seen[&e.src], self.first_seen[&e.dst], e.time))
    }

    /// Number of event endpoints per node, indexed by arrival position.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for (u, v, _) in self.indexed_events() {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// The first `n` events as a graph of their own.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::from_events(self.events[..n.min(self.events.len())].to_vec())
    }

    /// Serializes the stream in the edge-list format accepted by
    /// [`parse_edge_list`]. Timestamps use the shortest exact representation.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{} {} {}", e.src, e.dst, e.time);
        }
        out
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(err) => Some(Err(Error::Parse {
                line: i + 1,
                message: err.to_string(),
            })),
            Ok(line) => {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, trimmed.to_owned())))
                }
            }
        })
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {tok:?}"),
    })
}

/// Parses `src dst time` lines into a [`TemporalGraph`].
///
/// Blank lines and lines starting with `#` are skipped. Errors carry the
/// 1-based line number of the offending line.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<TemporalGraph> {
    let mut events = Vec::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let src: NodeId = field(toks.next(), line, "source node")?;
        let dst: NodeId = field(toks.next(), line, "destination node")?;
        let time: f64 = field(toks.next(), line, "timestamp")?;
        if toks.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "expected exactly three fields".into(),
            });
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::Parse {
                line,
                message: format!("timestamp must be finite and non-negative, got {time}"),
            });
        }
        if src == dst {
            return Err(Error::SelfLoop { line, node: src });
        }
        events.push(Event { src, dst, time });
    }
    TemporalGraph::from_events(events)
}

pub fn read_edge_list(path: &Path) -> Result<TemporalGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file))
}

/// Parses `node_id label` lines. Repeating a node with the same label is
/// allowed; a different label is a conflict.
pub fn parse_labels<R: BufRead>(reader: R) -> Result<BTreeMap<NodeId, i64>> {
    let mut labels = BTreeMap::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let node: NodeId = field(toks.next(), line, "node id")?;
        let label: i64 = field(toks.next(), line, "label")?;
        if toks.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "expected exactly two fields".into(),
            });
        }
        match labels.insert(node, label) {
            Some(prev) if prev != label => {
                return Err(Error::LabelConflict {
                    node,
                    first: prev,
                    second: label,
                })
            }
            _ => {}
        }
    }
    Ok(labels)
}

pub fn read_labels(path: &Path) -> Result<BTreeMap<NodeId, i64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_labels(BufReader::new(file))
}

/// The most recent interactions of one node, oldest first.
///
/// Neighbors are stored by arrival position.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborHistory {
    entries: VecDeque<(usize, f64)>,
    cap: usize,
}

impl NeighborHistory {
    pub fn new(cap: usize) -> Self {
        assert!(cap > 0, "history cap must be positive");
        Self {
            entries: VecDeque::with_capacity(cap),
            cap,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.entries.back().map(|&(_, t)| t)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Appends an interaction, evicting the oldest entry once the cap is
    /// exceeded. Times must not go backwards.
    pub fn push(&mut self, neighbor: usize, time: f64) -> Result<()> {
        if let Some(last) = self.last_time() {
            if time < last {
                return Err(Error::OutOfOrder { last, time });
            }
        }
        if self.entries.len() == self.cap {
            self.entries.pop_front();
        }
        self.entries.push_back((neighbor, time));
        Ok(())
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}
