//! Simple undirected graphs on dense vertex ids `0..n`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest edge count accepted by [`brute_force_graph_tsp`].
pub const BRUTE_FORCE_MAX_EDGES: usize = 16;
/// Configuration-model samples tried before giving up.
pub const GENERATOR_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("graph has {n} vertices, need at least {min}")]
    TooSmall { n: usize, min: usize },
    #[error("graph has {m} edges, brute force is limited to {max}")]
    TooManyEdges { m: usize, max: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no admissible graph on {n} vertices after {retries} samples")]
    GenerationFailed { n: usize, retries: usize },
    #[error("invalid sparsity {0}, expected a value in [0, 1]")]
    InvalidSparsity(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Simple undirected graph. Edges are stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        Graph::new(raw.n, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph { n: g.n, edges: g.edges }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            let e = list.len();
            list.push((u, v));
            adj[u].push(e);
            adj[v].push(e);
        }
        Ok(Graph { n, edges: list, adj })
    }

    /// Builds a graph from arbitrary vertex labels. Labels are numbered in
    /// order of first appearance; the returned vector maps ids back to labels.
    pub fn from_labeled_edges<L, I>(edges: I) -> Result<(Self, Vec<L>), GraphError>
    where
        L: Clone + Eq + std::hash::Hash,
        I: IntoIterator<Item = (L, L)>,
    {
        let mut index: HashMap<L, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut id = |l: L| {
            *index.entry(l.clone()).or_insert_with(|| {
                labels.push(l);
                labels.len() - 1
            })
        };
        let pairs: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (id(a), id(b))).collect();
        let g = Graph::new(labels.len(), pairs)?;
        Ok((g, labels))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Ids of the edges incident to `v`, in insertion order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v);
            a
        }
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].iter().copied().find(|&e| self.other(e, u) == v)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let w = self.other(e, u);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Spanning subgraph on the same vertex set keeping the listed edges.
    /// Returns the subgraph and, for each new edge id, the old edge id.
    pub fn spanning_subgraph(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let g = Graph::new(self.n, keep.iter().map(|&e| self.edges[e])).expect("subgraph of a simple graph");
        (g, keep.to_vec())
    }

    /// Subgraph formed by the listed edges and their endpoints, with
    /// vertices renumbered in increasing order of their old ids.
    pub fn edge_induced_subgraph(&self, keep: &[usize]) -> Subgraph {
        let mut vertices: Vec<usize> = keep.iter().flat_map(|&e| [self.edges[e].0, self.edges[e].1]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            new_id[v] = i;
        }
        let graph = Graph::new(
            vertices.len(),
            keep.iter().map(|&e| {
                let (u, v) = self.edges[e];
                (new_id[u], new_id[v])
            }),
        )
        .expect("subgraph of a simple graph");
        Subgraph { graph, vertex_map: vertices, edge_map: keep.to_vec() }
    }

    /// Edge-list text: `n m` then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let parse_pair = |line: usize, l: &str| -> Result<(usize, usize), GraphError> {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(GraphError::Parse { line, msg: format!("expected two integers, got `{l}`") });
            }
            let num = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| GraphError::Parse { line, msg: format!("`{t}` is not a non-negative integer") })
            };
            Ok((num(toks[0])?, num(toks[1])?))
        };
        let (line, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty input".into() })?;
        let (n, m) = parse_pair(line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines.by_ref() {
            let (u, v) = parse_pair(line, l)?;
            if u == v {
                return Err(GraphError::Parse { line, msg: format!("self-loop at vertex {u}") });
            }
            if u > v {
                return Err(GraphError::Parse { line, msg: format!("edge `{u} {v}` must be written with u < v") });
            }
            if u >= n || v >= n {
                return Err(GraphError::Parse { line, msg: format!("vertex {} out of range for n = {n}", v.max(u)) });
            }
            if edges.contains(&(u, v)) {
                return Err(GraphError::Parse { line, msg: format!("duplicate edge `{u} {v}`") });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges)
    }

    /// Short content hash of the edge list, used to identify instances.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_edge_list().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// An edge-induced subgraph together with its id maps back to the parent.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    /// new vertex id → parent vertex id
    pub vertex_map: Vec<usize>,
    /// new edge id → parent edge id
    pub edge_map: Vec<usize>,
}

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle needs n >= 3")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

/// Two vertices `0` and `1` joined by internally disjoint paths with the
/// given numbers of interior vertices.
pub fn theta(interiors: [usize; 3]) -> Graph {
    let mut edges = Vec::new();
    let mut next = 2;
    for k in interiors {
        let mut prev = 0;
        for _ in 0..k {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    Graph::new(next, edges).expect("at most one path may be a direct edge")
}

pub fn is_subquartic(g: &Graph) -> bool {
    g.max_degree() <= 4
}

/// DFS low-link data: for each vertex its discovery time, low value and
/// DFS parent, and the edges grouped into blocks (biconnected components).
struct LowLink {
    cut_vertices: Vec<bool>,
    blocks: Vec<Vec<usize>>,
}

fn low_link(g: &Graph) -> LowLink {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut cut = vec![false; n];
    let mut blocks = Vec::new();
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        // (vertex, parent edge, next incident index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (u, pe, ref mut idx)) = stack.last_mut() {
            if *idx < g.adj[u].len() {
                let e = g.adj[u][*idx];
                *idx += 1;
                if e == pe {
                    continue;
                }
                let w = g.other(e, u);
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((w, e, 0));
                } else if disc[w] < disc[u] {
                    edge_stack.push(e);
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        if p != root {
                            cut[p] = true;
                        }
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
        }
        if root_children > 1 {
            cut[root] = true;
        }
    }
    LowLink { cut_vertices: cut, blocks }
}

/// Connected with no cut vertex. Defined for `n ≥ 3` only.
pub fn is_two_vertex_connected(g: &Graph) -> Result<bool, GraphError> {
    if g.n() < 3 {
        return Err(GraphError::TooSmall { n: g.n(), min: 3 });
    }
    Ok(g.is_connected() && !low_link(g).cut_vertices.iter().any(|&c| c))
}

pub fn cut_vertices(g: &Graph) -> Vec<usize> {
    low_link(g).cut_vertices.iter().enumerate().filter(|(_, &c)| c).map(|(v, _)| v).collect()
}

/// Edge sets of the blocks, ordered by smallest edge id.
pub fn blocks(g: &Graph) -> Vec<Vec<usize>> {
    let mut b = low_link(g).blocks;
    b.sort();
    b
}

/// Connected and bridgeless.
pub fn is_two_edge_connected(g: &Graph) -> bool {
    g.n() >= 2 && g.is_connected() && low_link(g).blocks.iter().all(|b| b.len() > 1)
}

/// Knobs for [`generate_random_subquartic_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    /// Fraction of edges (in `[0, 1]`) for which a deletion is attempted
    /// after sampling the 4-regular graph. A deletion is kept only if the
    /// graph stays 2-vertex-connected.
    pub sparsity: f64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions { sparsity: 0.0 }
    }
}

/// A random 2-vertex-connected 4-regular graph (configuration model with
/// rejection).
pub fn generate_random_subquartic(n: usize, seed: u64) -> Result<Graph, GraphError> {
    generate_random_subquartic_with(n, seed, &GeneratorOptions::default())
}

pub fn generate_random_subquartic_with(n: usize, seed: u64, opts: &GeneratorOptions) -> Result<Graph, GraphError> {
    if n < 5 {
        return Err(GraphError::TooSmall { n, min: 5 });
    }
    if !(0.0..=1.0).contains(&opts.sparsity) {
        return Err(GraphError::InvalidSparsity(opts.sparsity));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| [v; 4]).collect();
    let mut g = None;
    'sample: for _ in 0..GENERATOR_RETRIES {
        points.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(2 * n);
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'sample;
            }
        }
        let candidate = Graph::new(n, points.chunks(2).map(|p| (p[0], p[1]))).expect("checked simple");
        if is_two_vertex_connected(&candidate)? {
            g = Some(candidate);
            break;
        }
    }
    let mut g = g.ok_or(GraphError::GenerationFailed { n, retries: GENERATOR_RETRIES })?;

    let attempts = (opts.sparsity * g.m() as f64).round() as usize;
    if attempts > 0 {
        let mut order: Vec<(usize, usize)> = g.edges().to_vec();
        order.shuffle(&mut rng);
        let mut alive: Vec<(usize, usize)> = g.edges().to_vec();
        for edge in order.into_iter().take(attempts) {
            let trial: Vec<(usize, usize)> = alive.iter().copied().filter(|&e| e != edge).collect();
            let h = Graph::new(n, trial.iter().copied()).expect("subgraph of a simple graph");
            if is_two_vertex_connected(&h)? {
                alive = trial;
            }
        }
        g = Graph::new(n, alive).expect("subgraph of a simple graph");
    }
    Ok(g)
}

/// Exact graph-TSP optimum: a minimum-size connected spanning Eulerian
/// multigraph using each edge at most twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourOracleResult {
    pub opt_len: usize,
    pub multiplicity: Vec<u8>,
}

pub fn brute_force_graph_tsp(g: &Graph) -> Result<TourOracleResult, GraphError> {
    if g.m() > BRUTE_FORCE_MAX_EDGES {
        return Err(GraphError::TooManyEdges { m: g.m(), max: BRUTE_FORCE_MAX_EDGES });
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    if g.n() <= 1 {
        return Ok(TourOracleResult { opt_len: 0, multiplicity: vec![0; g.m()] });
    }
    // Vertices whose incident edges are all decided once edge e is assigned.
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); g.m()];
    for v in 0..g.n() {
        let last = *g.incident(v).iter().max().expect("connected graph with n >= 2");
        closes[last].push(v);
    }
    let mut search = TspSearch {
        g,
        closes,
        mult: vec![0; g.m()],
        deg: vec![0; g.n()],
        open_deficit: 2 * g.n(),
        total: 0,
        best: usize::MAX,
        best_mult: Vec::new(),
    };
    search.run(0);
    Ok(TourOracleResult { opt_len: search.best, multiplicity: search.best_mult })
}

struct TspSearch<'a> {
    g: &'a Graph,
    closes: Vec<Vec<usize>>,
    mult: Vec<u8>,
    deg: Vec<usize>,
    /// Σ_v max(0, 2 − deg(v)): every vertex needs degree ≥ 2.
    open_deficit: usize,
    total: usize,
    best: usize,
    best_mult: Vec<u8>,
}

impl TspSearch<'_> {
    fn run(&mut self, e: usize) {
        if self.total + self.open_deficit.div_ceil(2) >= self.best {
            return;
        }
        if e == self.g.m() {
            if self.support_connected() {
                self.best = self.total;
                self.best_mult = self.mult.clone();
            }
            return;
        }
        let (u, v) = self.g.edge(e);
        for k in [1u8, 0, 2] {
            let before = self.open_deficit;
            for w in [u, v] {
                let add = 2usize.saturating_sub(self.deg[w]).min(k as usize);
                self.open_deficit -= add;
                self.deg[w] += k as usize;
            }
            self.mult[e] = k;
            self.total += k as usize;
            let ok = self.closes[e].iter().all(|&w| self.deg[w].is_multiple_of(2) && self.deg[w] >= 2);
            if ok {
                self.run(e + 1);
            }
            self.total -= k as usize;
            self.mult[e] = 0;
            for w in [u, v] {
                self.deg[w] -= k as usize;
            }
            self.open_deficit = before;
        }
    }

    fn support_connected(&self) -> bool {
        let n = self.g.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &e in self.g.incident(u) {
                if self.mult[e] == 0 {
                    continue;
                }
                let w = self.g.other(e, u);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}
