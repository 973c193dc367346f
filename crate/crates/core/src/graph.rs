//! Finite graphs and lazily generated infinite bounded-degree graph families.
//!
//! A [`GraphModel`] is immutable once built. Finite families are materialized
//! eagerly into a [`FiniteGraph`]; the integer lattice, regular trees and
//! custom generators answer neighbor queries on demand.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier: an encoded coordinate.
///
/// Finite graphs use a single integer label; lattice points use their
/// coordinates and tree vertices use the sequence of child indices from the
/// root (the root being the empty sequence).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub Vec<i64>);

impl VertexId {
    pub fn label(i: i64) -> Self {
        VertexId(vec![i])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<i64> for VertexId {
    fn from(i: i64) -> Self {
        VertexId::label(i)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Undirected edge; the endpoints are stored in sorted order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct EdgeId {
    a: VertexId,
    b: VertexId,
}

impl EdgeId {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u <= v {
            EdgeId { a: u, b: v }
        } else {
            EdgeId { a: v, b: u }
        }
    }

    pub fn endpoints(&self) -> (&VertexId, &VertexId) {
        (&self.a, &self.b)
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        &self.a == v || &self.b == v
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.a, self.b)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {vertex} has {degree} neighbors, exceeding the declared degree bound {bound}")]
    DegreeViolation {
        vertex: VertexId,
        degree: usize,
        bound: usize,
    },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no edges")]
    Empty,
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeId),
    #[error("invalid graph parameter: {0}")]
    InvalidParameter(String),
    #[error("operation requires a finite graph")]
    NotFinite,
    #[error("cannot answer structural query for custom generator {0}")]
    Unsupported(String),
    #[error("vertex {0} not found within the search budget")]
    SearchBudget(VertexId),
    #[error("edge-list parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A neighbor oracle for user-defined infinite graphs.
pub trait NeighborGenerator: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    /// Upper bound on every vertex degree, declared up front.
    fn degree_bound(&self) -> usize;
    fn neighbors(&self, v: &VertexId) -> Vec<VertexId>;
}

/// Graph family tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GraphFamily {
    FiniteExplicit,
    Lattice { dim: usize },
    RegularTree { arity: usize },
    Cycle { n: usize },
    Complete { n: usize },
    Path { n: usize },
    Star { leaves: usize },
    Custom { name: String },
}

impl GraphFamily {
    pub fn is_finite(&self) -> bool {
        !matches!(
            self,
            GraphFamily::Lattice { .. } | GraphFamily::RegularTree { .. } | GraphFamily::Custom { .. }
        )
    }
}

/// Materialized finite graph with dense indices.
///
/// Vertices are sorted by id, adjacency lists are sorted by neighbor id and
/// edges are sorted lexicographically by their (sorted) endpoint indices.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    edges: Vec<(usize, usize)>,
    root: usize,
    distances: Vec<u64>,
}

impl FiniteGraph {
    fn build(edge_list: &[(VertexId, VertexId)], root: &VertexId) -> Result<Self, GraphError> {
        if edge_list.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vset = BTreeSet::new();
        let mut eset = BTreeSet::new();
        for (u, v) in edge_list {
            if u == v {
                return Err(GraphError::SelfLoop(u.clone()));
            }
            let e = EdgeId::new(u.clone(), v.clone());
            if !eset.insert(e.clone()) {
                return Err(GraphError::DuplicateEdge(e));
            }
            vset.insert(u.clone());
            vset.insert(v.clone());
        }
        let vertices: Vec<VertexId> = vset.into_iter().collect();
        let index: HashMap<VertexId, usize> =
            vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let root_idx = *index
            .get(root)
            .ok_or_else(|| GraphError::UnknownVertex(root.clone()))?;
        let mut edges: Vec<(usize, usize)> = eset
            .iter()
            .map(|e| {
                let (a, b) = e.endpoints();
                let (i, j) = (index[a], index[b]);
                (i.min(j), i.max(j))
            })
            .collect();
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (ei, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push((j, ei));
            adjacency[j].push((i, ei));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let distances = bfs(&adjacency, root_idx);
        if distances.contains(&u64::MAX) {
            return Err(GraphError::Disconnected);
        }
        Ok(FiniteGraph {
            vertices,
            index,
            adjacency,
            edges,
            root: root_idx,
            distances,
        })
    }

    fn rerooted(&self, root: usize) -> Self {
        let mut g = self.clone();
        g.root = root;
        g.distances = bfs(&g.adjacency, root);
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.vertices[i]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Edges as pairs of vertex indices with the smaller index first.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_id(&self, e: usize) -> EdgeId {
        let (i, j) = self.edges[e];
        EdgeId::new(self.vertices[i].clone(), self.vertices[j].clone())
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
    }

    /// `(neighbor, edge)` index pairs in neighbor-id order.
    pub fn adjacent(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn distance(&self, v: usize) -> u64 {
        self.distances[v]
    }

    /// Two-coloring by BFS parity, or `None` if an odd cycle exists.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let side: Vec<u64> = self.distances.iter().map(|d| d % 2).collect();
        if self.edges.iter().any(|&(i, j)| side[i] == side[j]) {
            return None;
        }
        let (mut u1, mut u2) = (Vec::new(), Vec::new());
        for (i, s) in side.iter().enumerate() {
            if *s == 0 {
                u1.push(i)
            } else {
                u2.push(i)
            }
        }
        Some((u1, u2))
    }

    pub fn is_triangle_free(&self) -> bool {
        let n = self.vertices.len();
        let mut mark = vec![false; n];
        for u in 0..n {
            for &(v, _) in &self.adjacency[u] {
                mark[v] = true;
            }
            for &(v, _) in &self.adjacency[u] {
                if v > u && self.adjacency[v].iter().any(|&(w, _)| w > v && mark[w]) {
                    return false;
                }
            }
            for &(v, _) in &self.adjacency[u] {
                mark[v] = false;
            }
        }
        true
    }
}

fn bfs(adjacency: &[Vec<(usize, usize)>], root: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adjacency.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adjacency[u] {
            if dist[v] == u64::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Result of a bipartiteness query.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartiteness {
    pub bipartite: bool,
    /// Explicit sides for finite graphs; `None` for infinite families
    /// (answered by construction rule) or non-bipartite graphs.
    pub parts: Option<(Vec<VertexId>, Vec<VertexId>)>,
}

/// A graph with a distinguished start vertex.
#[derive(Clone)]
pub struct GraphModel {
    family: GraphFamily,
    root: VertexId,
    degree_bound: usize,
    finite: Option<Arc<FiniteGraph>>,
    generator: Option<Arc<dyn NeighborGenerator>>,
}

impl fmt::Debug for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphModel")
            .field("family", &self.family)
            .field("root", &self.root)
            .field("degree_bound", &self.degree_bound)
            .finish()
    }
}

const CUSTOM_SEARCH_BUDGET: usize = 1_000_000;

impl GraphModel {
    fn finite_family(
        family: GraphFamily,
        edges: Vec<(VertexId, VertexId)>,
        root: VertexId,
    ) -> Result<Self, GraphError> {
        let fg = FiniteGraph::build(&edges, &root)?;
        Ok(GraphModel {
            family,
            root,
            degree_bound: fg.max_degree(),
            finite: Some(Arc::new(fg)),
            generator: None,
        })
    }

    /// Explicit finite graph; the first endpoint of the first edge is the root.
    pub fn from_edges(edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        let root = edges.first().ok_or(GraphError::Empty)?.0.clone();
        Self::finite_family(GraphFamily::FiniteExplicit, edges, root)
    }

    /// Parses one `u v` pair per line. Blank lines and `#` comments are skipped.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<i64, GraphError> {
                let tok = tok.ok_or_else(|| GraphError::Parse {
                    line: lineno + 1,
                    message: "expected two vertex labels".into(),
                })?;
                tok.parse::<i64>().map_err(|e| GraphError::Parse {
                    line: lineno + 1,
                    message: format!("bad vertex label {tok:?}: {e}"),
                })
            };
            let mut toks = line.split_whitespace();
            let u = parse(toks.next())?;
            let v = parse(toks.next())?;
            if toks.next().is_some() {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    message: "trailing tokens".into(),
                });
            }
            edges.push((VertexId::label(u), VertexId::label(v)));
        }
        Self::from_edges(edges)
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
        }
        let edges = (0..n)
            .map(|i| (VertexId::label(i as i64), VertexId::label(((i + 1) % n) as i64)))
            .collect();
        Self::finite_family(GraphFamily::Cycle { n }, edges, VertexId::label(0))
    }

    pub fn triangle() -> Self {
        Self::cycle(3).expect("triangle is valid")
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::InvalidParameter(format!("complete graph needs n >= 2, got {n}")));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((VertexId::label(i as i64), VertexId::label(j as i64)));
            }
        }
        Self::finite_family(GraphFamily::Complete { n }, edges, VertexId::label(0))
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::InvalidParameter(format!("path needs n >= 2, got {n}")));
        }
        let edges = (0..n - 1)
            .map(|i| (VertexId::label(i as i64), VertexId::label(i as i64 + 1)))
            .collect();
        Self::finite_family(GraphFamily::Path { n }, edges, VertexId::label(0))
    }

    /// Star with center `0` and leaves `1..=leaves`; the center is the root.
    pub fn star(leaves: usize) -> Result<Self, GraphError> {
        if leaves < 1 {
            return Err(GraphError::InvalidParameter("star needs at least one leaf".into()));
        }
        let edges = (1..=leaves)
            .map(|i| (VertexId::label(0), VertexId::label(i as i64)))
            .collect();
        Self::finite_family(GraphFamily::Star { leaves }, edges, VertexId::label(0))
    }

    /// The integer lattice Z^d rooted at the origin.
    pub fn lattice(dim: usize) -> Result<Self, GraphError> {
        if dim == 0 {
            return Err(GraphError::InvalidParameter("lattice dimension must be >= 1".into()));
        }
        Ok(GraphModel {
            family: GraphFamily::Lattice { dim },
            root: VertexId(vec![0; dim]),
            degree_bound: 2 * dim,
            finite: None,
            generator: None,
        })
    }

    /// Rooted tree in which every vertex has `arity` children.
    pub fn regular_tree(arity: usize) -> Result<Self, GraphError> {
        if arity == 0 {
            return Err(GraphError::InvalidParameter("tree arity must be >= 1".into()));
        }
        Ok(GraphModel {
            family: GraphFamily::RegularTree { arity },
            root: VertexId(Vec::new()),
            degree_bound: arity + 1,
            finite: None,
            generator: None,
        })
    }

    pub fn custom(generator: Arc<dyn NeighborGenerator>, root: VertexId) -> Self {
        GraphModel {
            family: GraphFamily::Custom {
                name: generator.name(),
            },
            root,
            degree_bound: generator.degree_bound(),
            finite: None,
            generator: Some(generator),
        }
    }

    /// Same graph, different start vertex.
    pub fn with_root(&self, root: VertexId) -> Result<Self, GraphError> {
        let mut g = self.clone();
        if let Some(fg) = &self.finite {
            let idx = fg
                .index_of(&root)
                .ok_or_else(|| GraphError::UnknownVertex(root.clone()))?;
            g.finite = Some(Arc::new(fg.rerooted(idx)));
        } else {
            self.check_infinite_vertex(&root)?;
        }
        g.root = root;
        Ok(g)
    }

    pub fn family(&self) -> &GraphFamily {
        &self.family
    }

    pub fn root(&self) -> &VertexId {
        &self.root
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn is_finite(&self) -> bool {
        self.finite.is_some()
    }

    pub fn finite(&self) -> Option<&Arc<FiniteGraph>> {
        self.finite.as_ref()
    }

    fn check_infinite_vertex(&self, v: &VertexId) -> Result<(), GraphError> {
        match &self.family {
            GraphFamily::Lattice { dim } if v.0.len() != *dim => Err(GraphError::UnknownVertex(v.clone())),
            GraphFamily::RegularTree { arity } if v.0.iter().any(|&c| c < 0 || c >= *arity as i64) => {
                Err(GraphError::UnknownVertex(v.clone()))
            }
            _ => Ok(()),
        }
    }

    /// All neighbors of `v` in lexicographic order of their ids.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        let out = match (&self.finite, &self.family) {
            (Some(fg), _) => {
                let i = fg
                    .index_of(v)
                    .ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
                fg.adjacent(i).iter().map(|&(j, _)| fg.vertex(j).clone()).collect()
            }
            (None, GraphFamily::Lattice { .. }) => {
                self.check_infinite_vertex(v)?;
                let mut out = Vec::with_capacity(2 * v.0.len());
                for axis in 0..v.0.len() {
                    for delta in [-1i64, 1] {
                        let mut c = v.0.clone();
                        c[axis] += delta;
                        out.push(VertexId(c));
                    }
                }
                out.sort_unstable();
                out
            }
            (None, GraphFamily::RegularTree { arity }) => {
                self.check_infinite_vertex(v)?;
                let mut out = Vec::with_capacity(arity + 1);
                if !v.0.is_empty() {
                    out.push(VertexId(v.0[..v.0.len() - 1].to_vec()));
                }
                for child in 0..*arity as i64 {
                    let mut c = v.0.clone();
                    c.push(child);
                    out.push(VertexId(c));
                }
                out.sort_unstable();
                out
            }
            (None, _) => {
                let gen = self.generator.as_ref().expect("custom graphs carry a generator");
                let mut out = gen.neighbors(v);
                out.sort_unstable();
                out.dedup();
                out
            }
        };
        if out.len() > self.degree_bound {
            return Err(GraphError::DegreeViolation {
                vertex: v.clone(),
                degree: out.len(),
                bound: self.degree_bound,
            });
        }
        Ok(out)
    }

    /// Length of a shortest path from the root to `v`.
    pub fn graph_distance(&self, v: &VertexId) -> Result<u64, GraphError> {
        match (&self.finite, &self.family) {
            (Some(fg), _) => fg
                .index_of(v)
                .map(|i| fg.distance(i))
                .ok_or_else(|| GraphError::UnknownVertex(v.clone())),
            (None, GraphFamily::Lattice { .. }) => {
                self.check_infinite_vertex(v)?;
                Ok(v.0.iter().zip(&self.root.0).map(|(a, b)| a.abs_diff(*b)).sum())
            }
            (None, GraphFamily::RegularTree { .. }) => {
                self.check_infinite_vertex(v)?;
                let common = v.0.iter().zip(&self.root.0).take_while(|(a, b)| a == b).count();
                Ok((v.0.len() - common + self.root.0.len() - common) as u64)
            }
            (None, _) => {
                let mut seen = HashMap::from([(self.root.clone(), 0u64)]);
                let mut queue = VecDeque::from([self.root.clone()]);
                while let Some(u) = queue.pop_front() {
                    if &u == v {
                        return Ok(seen[&u]);
                    }
                    if seen.len() > CUSTOM_SEARCH_BUDGET {
                        break;
                    }
                    let d = seen[&u];
                    for w in self.neighbors(&u)? {
                        if !seen.contains_key(&w) {
                            seen.insert(w.clone(), d + 1);
                            queue.push_back(w);
                        }
                    }
                }
                Err(GraphError::SearchBudget(v.clone()))
            }
        }
    }

    pub fn is_bipartite(&self) -> Result<Bipartiteness, GraphError> {
        match (&self.finite, &self.family) {
            (Some(fg), _) => Ok(match fg.bipartition() {
                Some((u1, u2)) => Bipartiteness {
                    bipartite: true,
                    parts: Some((
                        u1.into_iter().map(|i| fg.vertex(i).clone()).collect(),
                        u2.into_iter().map(|i| fg.vertex(i).clone()).collect(),
                    )),
                },
                None => Bipartiteness {
                    bipartite: false,
                    parts: None,
                },
            }),
            (None, GraphFamily::Lattice { .. }) | (None, GraphFamily::RegularTree { .. }) => Ok(Bipartiteness {
                bipartite: true,
                parts: None,
            }),
            (None, GraphFamily::Custom { name }) => Err(GraphError::Unsupported(name.clone())),
            (None, _) => unreachable!("finite families are materialized"),
        }
    }

    pub fn is_triangle_free(&self) -> Result<bool, GraphError> {
        match (&self.finite, &self.family) {
            (Some(fg), _) => Ok(fg.is_triangle_free()),
            (None, GraphFamily::Lattice { .. }) | (None, GraphFamily::RegularTree { .. }) => Ok(true),
            (None, GraphFamily::Custom { name }) => Err(GraphError::Unsupported(name.clone())),
            (None, _) => unreachable!("finite families are materialized"),
        }
    }

    /// The finite ball of radius `n` around the root, with all edges between
    /// its vertices.
    pub fn truncate(&self, n: u64) -> Result<GraphModel, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameter("truncation radius must be >= 1".into()));
        }
        let mut dist = HashMap::from([(self.root.clone(), 0u64)]);
        let mut queue = VecDeque::from([self.root.clone()]);
        let mut edges = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for w in self.neighbors(&u)? {
                match dist.get(&w) {
                    Some(_) => {
                        edges.insert(EdgeId::new(u.clone(), w.clone()));
                    }
                    None if d < n => {
                        dist.insert(w.clone(), d + 1);
                        edges.insert(EdgeId::new(u.clone(), w.clone()));
                        queue.push_back(w);
                    }
                    None => {}
                }
            }
        }
        let edge_list = edges
            .into_iter()
            .map(|e| {
                let (a, b) = e.endpoints();
                (a.clone(), b.clone())
            })
            .collect();
        Self::finite_family(GraphFamily::FiniteExplicit, edge_list, self.root.clone())
    }
}

/// Textual graph description used by configuration files.
///
/// Grammar: `triangle`, `path:N`, `cycle:N`, `complete:N`, `star:N`,
/// `lattice:D`, `tree:ARITY`, `truncate:R:<spec>`, `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Triangle,
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Star(usize),
    Lattice(usize),
    Tree(usize),
    Truncate(u64, Box<GraphSpec>),
    File(String),
}

impl GraphSpec {
    pub fn build(&self) -> Result<GraphModel, GraphError> {
        match self {
            GraphSpec::Triangle => Ok(GraphModel::triangle()),
            GraphSpec::Path(n) => GraphModel::path(*n),
            GraphSpec::Cycle(n) => GraphModel::cycle(*n),
            GraphSpec::Complete(n) => GraphModel::complete(*n),
            GraphSpec::Star(n) => GraphModel::star(*n),
            GraphSpec::Lattice(d) => GraphModel::lattice(*d),
            GraphSpec::Tree(a) => GraphModel::regular_tree(*a),
            GraphSpec::Truncate(r, inner) => inner.build()?.truncate(*r),
            GraphSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| GraphError::Parse {
                    line: 0,
                    message: format!("cannot read {path}: {e}"),
                })?;
                GraphModel::from_edge_list(&text)
            }
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Triangle => write!(f, "triangle"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Star(n) => write!(f, "star:{n}"),
            GraphSpec::Lattice(d) => write!(f, "lattice:{d}"),
            GraphSpec::Tree(a) => write!(f, "tree:{a}"),
            GraphSpec::Truncate(r, inner) => write!(f, "truncate:{r}:{inner}"),
            GraphSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |r: Option<&str>| -> Result<usize, String> {
            let r = r.ok_or_else(|| format!("graph spec {s:?} needs a size parameter"))?;
            r.parse::<usize>()
                .map_err(|_| format!("graph spec {s:?}: bad size parameter {r:?}"))
        };
        match head {
            "triangle" if rest.is_none() => Ok(GraphSpec::Triangle),
            "path" => Ok(GraphSpec::Path(num(rest)?)),
            "cycle" => Ok(GraphSpec::Cycle(num(rest)?)),
            "complete" => Ok(GraphSpec::Complete(num(rest)?)),
            "star" => Ok(GraphSpec::Star(num(rest)?)),
            "lattice" => Ok(GraphSpec::Lattice(num(rest)?)),
            "tree" => Ok(GraphSpec::Tree(num(rest)?)),
            "truncate" => {
                let rest = rest.ok_or_else(|| format!("graph spec {s:?}: expected truncate:R:<graph>"))?;
                let (r, inner) = rest
                    .split_once(':')
                    .ok_or_else(|| format!("graph spec {s:?}: expected truncate:R:<graph>"))?;
                let r = r
                    .parse::<u64>()
                    .map_err(|_| format!("graph spec {s:?}: bad radius {r:?}"))?;
                Ok(GraphSpec::Truncate(r, Box::new(inner.parse()?)))
            }
            "file" => Ok(GraphSpec::File(
                rest.filter(|r| !r.is_empty())
                    .ok_or_else(|| format!("graph spec {s:?}: missing path"))?
                    .to_string(),
            )),
            _ => Err(format!("unknown graph spec {s:?}")),
        }
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(g: GraphSpec) -> String {
        g.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[i64]) -> Vec<VertexId> {
        v.iter().map(|&i| VertexId::label(i)).collect()
    }

    #[test]
    fn path_middle_vertex_has_both_endpoints() {
        let g = GraphModel::path(3).unwrap();
        assert_eq!(g.neighbors(&VertexId::label(1)).unwrap(), ids(&[0, 2]));
    }

    #[test]
    fn lattice_origin_has_four_neighbors() {
        let g = GraphModel::lattice(2).unwrap();
        let n = g.neighbors(g.root()).unwrap();
        assert_eq!(
            n,
            vec![
                VertexId(vec![-1, 0]),
                VertexId(vec![0, -1]),
                VertexId(vec![0, 1]),
                VertexId(vec![1, 0])
            ]
        );
    }

    #[test]
    fn star_center_and_leaf_neighbors() {
        let g = GraphModel::star(5).unwrap();
        assert_eq!(g.neighbors(&VertexId::label(0)).unwrap(), ids(&[1, 2, 3, 4, 5]));
        assert_eq!(g.neighbors(&VertexId::label(3)).unwrap(), ids(&[0]));
        assert_eq!(g.degree_bound(), 5);
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let g = GraphModel::cycle(4).unwrap();
        assert_eq!(
            g.neighbors(&VertexId::label(9)),
            Err(GraphError::UnknownVertex(VertexId::label(9)))
        );
    }

    #[test]
    fn distances() {
        let z = GraphModel::lattice(1).unwrap();
        assert_eq!(z.graph_distance(z.root()).unwrap(), 0);
        assert_eq!(z.graph_distance(&VertexId::label(-3)).unwrap(), 3);
        let c6 = GraphModel::cycle(6).unwrap();
        assert_eq!(c6.graph_distance(&VertexId::label(3)).unwrap(), 3);
        let t = GraphModel::regular_tree(2).unwrap();
        assert_eq!(t.graph_distance(&VertexId(vec![1, 0, 1])).unwrap(), 3);
    }

    #[test]
    fn bipartiteness() {
        let c4 = GraphModel::cycle(4).unwrap().is_bipartite().unwrap();
        assert!(c4.bipartite);
        let (u1, u2) = c4.parts.unwrap();
        assert_eq!(u1, ids(&[0, 2]));
        assert_eq!(u2, ids(&[1, 3]));
        assert!(!GraphModel::cycle(3).unwrap().is_bipartite().unwrap().bipartite);
        let boxed = GraphModel::lattice(2).unwrap().truncate(3).unwrap();
        assert!(boxed.is_bipartite().unwrap().bipartite);
        assert!(GraphModel::lattice(3).unwrap().is_bipartite().unwrap().bipartite);
        assert!(!GraphModel::complete(3).unwrap().is_bipartite().unwrap().bipartite);
    }

    #[test]
    fn triangle_freeness() {
        assert!(!GraphModel::complete(4).unwrap().is_triangle_free().unwrap());
        assert!(GraphModel::cycle(5).unwrap().is_triangle_free().unwrap());
        assert!(GraphModel::star(7).unwrap().is_triangle_free().unwrap());
        assert!(!GraphModel::triangle().is_triangle_free().unwrap());
    }

    #[test]
    fn truncations() {
        let seg = GraphModel::lattice(1).unwrap().truncate(2).unwrap();
        let fg = seg.finite().unwrap();
        assert_eq!(fg.vertex_count(), 5);
        assert_eq!(fg.edge_count(), 4);
        assert_eq!(seg.root(), &VertexId::label(0));

        let ball = GraphModel::regular_tree(2).unwrap().truncate(1).unwrap();
        let fg = ball.finite().unwrap();
        assert_eq!(fg.vertex_count(), 3);
        assert_eq!(fg.degree(fg.root()), 2);

        let k5 = GraphModel::complete(5).unwrap().truncate(1).unwrap();
        assert_eq!(k5.finite().unwrap().edge_count(), 10);
    }

    #[test]
    fn edge_list_parsing() {
        let g = GraphModel::from_edge_list("# square\n3 4\n4 5\n5 6\n6 3\n").unwrap();
        assert_eq!(g.root(), &VertexId::label(3));
        assert_eq!(g.finite().unwrap().edge_count(), 4);
        assert!(matches!(
            GraphModel::from_edge_list("1 2\n3 4\n"),
            Err(GraphError::Disconnected)
        ));
        assert!(matches!(
            GraphModel::from_edge_list("1 x\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(GraphModel::from_edge_list("1 1\n"), Err(GraphError::SelfLoop(_))));
    }

    #[derive(Debug)]
    struct Ladder;
    impl NeighborGenerator for Ladder {
        fn name(&self) -> String {
            "bad-ladder".into()
        }
        fn degree_bound(&self) -> usize {
            2
        }
        fn neighbors(&self, v: &VertexId) -> Vec<VertexId> {
            let x = v.0[0];
            vec![VertexId::label(x - 1), VertexId::label(x + 1), VertexId::label(x + 2)]
        }
    }

    #[test]
    fn custom_generator_degree_violation_is_hard_error() {
        let g = GraphModel::custom(Arc::new(Ladder), VertexId::label(0));
        assert!(matches!(
            g.neighbors(&VertexId::label(0)),
            Err(GraphError::DegreeViolation { degree: 3, bound: 2, .. })
        ));
    }

    #[test]
    fn spec_roundtrip() {
        for s in ["triangle", "path:5", "cycle:4", "complete:4", "star:3", "lattice:2", "tree:3", "truncate:5:lattice:1"] {
            let g: GraphSpec = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
            g.build().unwrap();
        }
        assert!("hexagon".parse::<GraphSpec>().is_err());
    }
}
