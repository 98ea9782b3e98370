//! Plain-text embedding files: a `N d` header, then `node_id v_1 … v_d` per
//! node. Values use the shortest representation that reads back exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    ids: Vec<NodeId>,
    vectors: Vec<Vec<f64>>,
    dim: usize,
    index: HashMap<NodeId, usize>,
}

impl Embeddings {
    pub fn new(ids: Vec<NodeId>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::dim("embedding rows", ids.len(), vectors.len()));
        }
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::dim("embedding vector", dim, v.len()));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if index.insert(id, i).is_some() {
                return Err(Error::Contract(format!("node {id} appears twice")));
            }
        }
        Ok(Self {
            ids,
            vectors,
            dim,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, id: NodeId) -> Option<&[f64]> {
        self.index.get(&id).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[f64])> {
        self.ids.iter().copied().zip(self.vectors.iter().map(Vec::as_slice))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (id, v) in self.iter() {
            let _ = write!(out, "{id}");
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, d): (usize, usize) = match h.as_slice() {
            [n, d] => (
                n.parse().map_err(|_| parse_err(1, format!("bad count {n:?}")))?,
                d.parse().map_err(|_| parse_err(1, format!("bad dimension {d:?}")))?,
            ),
            _ => return Err(parse_err(1, "header must be `N d`".into())),
        };
        let mut ids = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for (i, line) in lines {
            let mut toks = line.split_whitespace();
            let id = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(i + 1, "bad node id".into()))?;
            let v: Vec<f64> = toks
                .map(|t| t.parse().map_err(|_| parse_err(i + 1, format!("bad value {t:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != d {
                return Err(parse_err(i + 1, format!("expected {d} values, got {}", v.len())));
            }
            ids.push(id);
            vectors.push(v);
        }
        if ids.len() != n {
            return Err(parse_err(1, format!("header promises {n} rows, found {}", ids.len())));
        }
        let mut e = Self::new(ids, vectors)?;
        e.dim = d;
        Ok(e)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Writes `embeddings` to `path` in the embedding file format.
pub fn export_embeddings(embeddings: &Embeddings, path: &Path) -> Result<()> {
    embeddings.save(path)
}
