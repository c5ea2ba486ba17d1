//! Σ-DAGs: edge-labeled DAGs with one source and one sink whose
//! source-to-sink paths spell a language of equal-length strings.
//!
//! [`RawDag`] is whatever a file or builder produced; [`SigmaDag`] can only
//! be obtained through [`validate`], so solvers never see a graph whose
//! vertices lack a well-defined depth.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::strings::{Alphabet, RString, StringSet, Symbol};

pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: VertexId,
    pub label: Symbol,
    pub to: VertexId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("graph has no vertices")]
    NoVertices,
    #[error("edge endpoint {0} does not name a vertex")]
    UnknownVertex(VertexId),
    #[error("edge label {0} is outside the alphabet")]
    UnknownLabel(Symbol),
    #[error("source and sink coincide; the language would be the empty string")]
    SourceIsSink,
    #[error("no vertex without incoming edges")]
    NoSource,
    #[error("multiple sources: {0:?}")]
    MultipleSources(Vec<String>),
    #[error("no vertex without outgoing edges")]
    NoSink,
    #[error("multiple sinks: {0:?}")]
    MultipleSinks(Vec<String>),
    #[error("declared {role} {declared} is not the graph's unique {role}")]
    EndpointMismatch {
        role: &'static str,
        declared: String,
    },
    #[error("cycle through vertex {0}")]
    Cycle(String),
    #[error("vertex {0} lies on no source-to-sink path")]
    OffPath(String),
    #[error("inconsistent depth at vertex {vertex}: paths of length {first} and {second}")]
    InconsistentDepth {
        vertex: String,
        first: usize,
        second: usize,
    },
    #[error("declared string length {declared} but sink has depth {actual}")]
    LengthMismatch { declared: usize, actual: usize },
}

/// An unvalidated labeled graph.
#[derive(Debug, Clone)]
pub struct RawDag {
    pub alphabet: Arc<Alphabet>,
    pub names: Vec<String>,
    pub edges: Vec<Edge>,
    pub source: Option<VertexId>,
    pub sink: Option<VertexId>,
    pub declared_r: Option<usize>,
}

impl RawDag {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        RawDag {
            alphabet,
            names: Vec::new(),
            edges: Vec::new(),
            source: None,
            sink: None,
            declared_r: None,
        }
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> VertexId {
        self.names.push(name.into());
        (self.names.len() - 1) as VertexId
    }

    pub fn add_edge(&mut self, from: VertexId, label: Symbol, to: VertexId) {
        self.edges.push(Edge { from, label, to });
    }

    fn name(&self, v: VertexId) -> String {
        self.names
            .get(v as usize)
            .cloned()
            .unwrap_or_else(|| v.to_string())
    }
}

/// Check the Σ-DAG conditions and return the depth of every vertex.
pub fn validate(raw: &RawDag) -> std::result::Result<Vec<usize>, DagError> {
    let n = raw.names.len();
    if n == 0 {
        return Err(DagError::NoVertices);
    }
    let sigma = raw.alphabet.size() as Symbol;
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for e in &raw.edges {
        for v in [e.from, e.to] {
            if v as usize >= n {
                return Err(DagError::UnknownVertex(v));
            }
        }
        if e.label >= sigma {
            return Err(DagError::UnknownLabel(e.label));
        }
        indeg[e.to as usize] += 1;
        outdeg[e.from as usize] += 1;
        adj[e.from as usize].push(e.to);
    }

    let source = unique_endpoint(raw, &indeg, raw.source, "source")?;
    let sink = unique_endpoint(raw, &outdeg, raw.sink, "sink")?;
    if source == sink {
        return Err(DagError::SourceIsSink);
    }

    // Kahn's algorithm; leftover vertices sit on a cycle.
    let mut remaining = indeg.clone();
    let mut order = Vec::with_capacity(n);
    let mut queue: VecDeque<VertexId> = (0..n as VertexId)
        .filter(|&v| indeg[v as usize] == 0)
        .collect();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v as usize] {
            remaining[w as usize] -= 1;
            if remaining[w as usize] == 0 {
                queue.push_back(w);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&v| remaining[v] > 0).unwrap_or(0);
        return Err(DagError::Cycle(raw.name(stuck as VertexId)));
    }

    let forward = reach(n, source, |v| adj[v as usize].clone());
    let mut radj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for e in &raw.edges {
        radj[e.to as usize].push(e.from);
    }
    let backward = reach(n, sink, |v| radj[v as usize].clone());
    if let Some(v) = (0..n).find(|&v| !forward[v] || !backward[v]) {
        return Err(DagError::OffPath(raw.name(v as VertexId)));
    }

    let mut depth: Vec<Option<usize>> = vec![None; n];
    depth[source as usize] = Some(0);
    for &v in &order {
        let Some(d) = depth[v as usize] else { continue };
        for &w in &adj[v as usize] {
            match depth[w as usize] {
                None => depth[w as usize] = Some(d + 1),
                Some(existing) if existing != d + 1 => {
                    return Err(DagError::InconsistentDepth {
                        vertex: raw.name(w),
                        first: existing,
                        second: d + 1,
                    });
                }
                Some(_) => {}
            }
        }
    }
    let depth: Vec<usize> = depth.into_iter().map(|d| d.unwrap_or(0)).collect();
    if let Some(r) = raw.declared_r {
        if depth[sink as usize] != r {
            return Err(DagError::LengthMismatch {
                declared: r,
                actual: depth[sink as usize],
            });
        }
    }
    Ok(depth)
}

fn unique_endpoint(
    raw: &RawDag,
    degree: &[usize],
    declared: Option<VertexId>,
    role: &'static str,
) -> std::result::Result<VertexId, DagError> {
    let candidates: Vec<VertexId> = (0..degree.len() as VertexId)
        .filter(|&v| degree[v as usize] == 0)
        .collect();
    if let Some(d) = declared {
        if d as usize >= degree.len() {
            return Err(DagError::UnknownVertex(d));
        }
        if degree[d as usize] != 0 {
            return Err(DagError::EndpointMismatch {
                role,
                declared: raw.name(d),
            });
        }
    }
    match candidates.as_slice() {
        [] if role == "source" => Err(DagError::NoSource),
        [] => Err(DagError::NoSink),
        [only] => Ok(*only),
        many => {
            let names = many.iter().map(|&v| raw.name(v)).collect();
            if role == "source" {
                Err(DagError::MultipleSources(names))
            } else {
                Err(DagError::MultipleSinks(names))
            }
        }
    }
}

fn reach(n: usize, start: VertexId, next: impl Fn(VertexId) -> Vec<VertexId>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start as usize] = true;
    while let Some(v) = stack.pop() {
        for w in next(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// A validated Σ-DAG. Immutable; out-edges are sorted by `(label, to)`.
#[derive(Debug, Clone)]
pub struct SigmaDag {
    alphabet: Arc<Alphabet>,
    names: Vec<String>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    source: VertexId,
    sink: VertexId,
    depth: Vec<usize>,
    layers: Vec<Vec<VertexId>>,
}

/// Result of [`SigmaDag::enumerate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub strings: Vec<RString>,
    pub truncated: bool,
}

impl SigmaDag {
    pub fn from_raw(raw: RawDag) -> std::result::Result<Self, DagError> {
        let depth = validate(&raw)?;
        let n = raw.names.len();
        let source = (0..n).find(|&v| depth[v] == 0).unwrap() as VertexId;
        let r = *depth.iter().max().unwrap();
        // only the sink can sit at the maximum depth
        let sink = (0..n).find(|&v| depth[v] == r).unwrap() as VertexId;
        let mut edges = raw.edges;
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0usize; n + 1];
        for e in &edges {
            offsets[e.from as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut layers = vec![Vec::new(); r + 1];
        for (v, &d) in depth.iter().enumerate() {
            layers[d].push(v as VertexId);
        }
        Ok(SigmaDag {
            alphabet: raw.alphabet,
            names: raw.names,
            edges,
            offsets,
            source,
            sink,
            depth,
            layers,
        })
    }

    /// Trie over `set` with every leaf merged into one sink. The sink takes
    /// the last vertex index.
    pub fn from_strings(set: &StringSet) -> Result<Self> {
        if set.is_empty() || set.r() == 0 {
            return Err(Error::InvalidInput(
                "a Σ-DAG needs a non-empty set of non-empty strings".into(),
            ));
        }
        let r = set.r();
        let mut children: HashMap<(VertexId, Symbol), VertexId> = HashMap::new();
        let mut trie_edges = Vec::new();
        let mut count: VertexId = 1;
        const SINK: VertexId = VertexId::MAX;
        for m in set.members() {
            let mut node: VertexId = 0;
            for (i, &c) in m.symbols().iter().enumerate() {
                node = match children.get(&(node, c)) {
                    Some(&next) => next,
                    None => {
                        let next = if i + 1 == r {
                            SINK
                        } else {
                            count += 1;
                            count - 1
                        };
                        children.insert((node, c), next);
                        trie_edges.push(Edge {
                            from: node,
                            label: c,
                            to: next,
                        });
                        next
                    }
                };
            }
        }
        let sink = count;
        let mut raw = RawDag::new(Arc::clone(set.alphabet()));
        raw.names.push("s".into());
        for v in 1..count {
            raw.names.push(format!("v{v}"));
        }
        raw.names.push("t".into());
        raw.edges = trie_edges
            .into_iter()
            .map(|e| Edge {
                to: if e.to == SINK { sink } else { e.to },
                ..e
            })
            .collect();
        raw.source = Some(0);
        raw.sink = Some(sink);
        raw.declared_r = Some(r);
        Ok(SigmaDag::from_raw(raw)?)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    /// Common length of every string in the language.
    pub fn r(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    /// Number of labeled edges.
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.edges[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v as usize]
    }

    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    pub fn layer(&self, d: usize) -> &[VertexId] {
        &self.layers[d]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v as usize]
    }

    pub fn to_raw(&self) -> RawDag {
        RawDag {
            alphabet: Arc::clone(&self.alphabet),
            names: self.names.clone(),
            edges: self.edges.clone(),
            source: Some(self.source),
            sink: Some(self.sink),
            declared_r: Some(self.r()),
        }
    }

    pub(crate) fn rstring(&self, symbols: Vec<Symbol>) -> RString {
        RString::new(Arc::clone(&self.alphabet), symbols).expect("labels are validated")
    }

    /// Distinct strings of the language in lexicographic order, at most
    /// `limit` of them. Runs an on-the-fly subset construction so strings
    /// spelled by several paths appear once.
    pub fn enumerate(&self, limit: usize) -> Enumeration {
        let mut strings = Vec::new();
        let mut prefix: Vec<Symbol> = Vec::with_capacity(self.r());
        let mut stack = vec![(self.transitions(&[self.source]), 0usize)];
        let mut truncated = false;
        while let Some((trans, next)) = stack.last_mut() {
            if *next == trans.len() {
                stack.pop();
                prefix.pop();
                continue;
            }
            let (label, targets) = trans[*next].clone();
            *next += 1;
            prefix.push(label);
            if prefix.len() == self.r() {
                if strings.len() == limit {
                    truncated = true;
                    break;
                }
                strings.push(self.rstring(prefix.clone()));
                prefix.pop();
            } else {
                stack.push((self.transitions(&targets), 0));
            }
        }
        Enumeration { strings, truncated }
    }

    fn transitions(&self, set: &[VertexId]) -> Vec<(Symbol, Vec<VertexId>)> {
        let mut by_label: BTreeMap<Symbol, BTreeSet<VertexId>> = BTreeMap::new();
        for &v in set {
            for e in self.out_edges(v) {
                by_label.entry(e.label).or_default().insert(e.to);
            }
        }
        by_label
            .into_iter()
            .map(|(c, ts)| (c, ts.into_iter().collect()))
            .collect()
    }

    /// Language as a [`StringSet`], failing if it has more than `limit` members.
    pub fn language(&self, limit: usize) -> Result<StringSet> {
        let en = self.enumerate(limit);
        if en.truncated {
            return Err(Error::Budget(format!(
                "language has more than {limit} strings"
            )));
        }
        StringSet::new(Arc::clone(&self.alphabet), en.strings)
    }

    /// Merge vertices of equal depth whose outgoing edge sets coincide after
    /// their targets have been merged, working from the sink upwards. The
    /// language is unchanged.
    pub fn merge_equivalent(&self) -> SigmaDag {
        let n = self.vertex_count();
        let mut canon: Vec<VertexId> = (0..n as VertexId).collect();
        for d in (0..self.r()).rev() {
            let mut classes: HashMap<Vec<(Symbol, VertexId)>, VertexId> = HashMap::new();
            for &v in self.layer(d) {
                let mut sig: Vec<(Symbol, VertexId)> = self
                    .out_edges(v)
                    .iter()
                    .map(|e| (e.label, canon[e.to as usize]))
                    .collect();
                sig.sort_unstable();
                sig.dedup();
                canon[v as usize] = *classes.entry(sig).or_insert(v);
            }
        }
        let kept: Vec<VertexId> = (0..n as VertexId)
            .filter(|&v| canon[v as usize] == v)
            .collect();
        let mut new_id = vec![VertexId::MAX; n];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v as usize] = i as VertexId;
        }
        let mut raw = RawDag::new(Arc::clone(&self.alphabet));
        raw.names = kept
            .iter()
            .map(|&v| self.names[v as usize].clone())
            .collect();
        raw.edges = self
            .edges
            .iter()
            .filter(|e| canon[e.from as usize] == e.from)
            .map(|e| Edge {
                from: new_id[e.from as usize],
                label: e.label,
                to: new_id[canon[e.to as usize] as usize],
            })
            .collect();
        raw.source = Some(new_id[self.source as usize]);
        raw.sink = Some(new_id[self.sink as usize]);
        raw.declared_r = Some(self.r());
        SigmaDag::from_raw(raw).expect("merging equivalent vertices preserves validity")
    }

    /// Parse the Σ-DAG file format and validate the result.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(SigmaDag::from_raw(parse_raw(text)?)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dag {}\n{}\n", self.r(), self.alphabet.header_line());
        for name in &self.names {
            out.push_str(&format!("vertex {name}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                self.names[e.from as usize],
                self.alphabet.token(e.label),
                self.names[e.to as usize]
            ));
        }
        out.push_str(&format!(
            "source {}\nsink {}\n",
            self.names[self.source as usize], self.names[self.sink as usize]
        ));
        out
    }
}

/// Parse the Σ-DAG file format without validating it.
pub fn parse_raw(text: &str) -> Result<RawDag> {
    let mut declared_r = None;
    let mut alphabet: Option<Arc<Alphabet>> = None;
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, VertexId> = HashMap::new();
    let mut edges = Vec::new();
    let mut source = None;
    let mut sink = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let lookup = |id: &str| {
            ids.get(id)
                .copied()
                .ok_or_else(|| err(format!("undeclared vertex {id:?}")))
        };
        match words.as_slice() {
            ["dag", r] => declared_r = Some(r.parse::<usize>().map_err(|e| err(e.to_string()))?),
            ["alphabet", toks @ ..] => {
                alphabet = Some(Arc::new(
                    Alphabet::new(toks.iter().copied()).map_err(|e| err(e.to_string()))?,
                ))
            }
            ["vertex", id] => {
                if ids.contains_key(*id) {
                    return Err(err(format!("vertex {id:?} declared twice")));
                }
                ids.insert(id.to_string(), names.len() as VertexId);
                names.push(id.to_string());
            }
            ["edge", from, label, to] => {
                let a = alphabet
                    .as_ref()
                    .ok_or_else(|| err("edge before alphabet".into()))?;
                let label = a
                    .symbol(label)
                    .ok_or_else(|| err(format!("label {label:?} not in alphabet")))?;
                edges.push(Edge {
                    from: lookup(from)?,
                    label,
                    to: lookup(to)?,
                });
            }
            ["source", id] => source = Some(lookup(id)?),
            ["sink", id] => sink = Some(lookup(id)?),
            _ => return Err(err(format!("unrecognised directive {line:?}"))),
        }
    }
    let alphabet = alphabet.ok_or(Error::Parse {
        line: 0,
        msg: "missing alphabet directive".into(),
    })?;
    if source.is_none() && !names.is_empty() {
        source = Some(0);
    }
    Ok(RawDag {
        alphabet,
        names,
        edges,
        source,
        sink,
        declared_r,
    })
}
