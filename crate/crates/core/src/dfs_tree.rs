//! Greedy DFS trees, tree cuts and their covers, and vertex classes.
//!
//! Tree edges point parent → child. Every non-tree edge of an undirected
//! DFS joins a vertex to one of its ancestors and is oriented toward the
//! ancestor (a "back edge"). A tree edge `(u, v)` is identified by its
//! child `v`.

use serde::{Deserialize, Serialize};

use crate::audit::Violation;
use crate::graph::Graph;
use crate::lp::LpSolution;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("root {root} out of range for {n} vertices")]
    RootOutOfRange { root: usize, n: usize },
    #[error("graph is disconnected; DFS from {root} reached {reached} of {n} vertices")]
    Disconnected { root: usize, reached: usize, n: usize },
    #[error("edge {0} is not a tree edge")]
    NotTreeEdge(usize),
    #[error("valuation has {got} entries for {expected} back edges")]
    LengthMismatch { got: usize, expected: usize },
    #[error("classification check failed: {0}")]
    Classification(Violation),
}

/// A non-tree edge oriented from descendant `tail` to ancestor `head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackEdge {
    pub edge: usize,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfsTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub parent_edge: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub pre: Vec<usize>,
    pub post: Vec<usize>,
    /// Vertices in preorder.
    pub order: Vec<usize>,
    /// Sorted by tail preorder, then head preorder.
    pub back_edges: Vec<BackEdge>,
    /// graph edge id → back edge index
    pub back_index: Vec<Option<usize>>,
    /// Cover of the tree edge into each non-root vertex, as back edge indices.
    covers: Vec<Vec<usize>>,
}

/// The cut obtained by deleting tree edge `(parent, child)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCut {
    pub edge: usize,
    pub parent: usize,
    pub child: usize,
    /// Back edge indices, ordered by tail preorder.
    pub cover: Vec<usize>,
}

/// True when `x` should be explored before `y` (larger value first, then smaller id).
fn prefer(xv: &Q, xw: usize, yv: &Q, yw: usize) -> bool {
    xv > yv || (xv == yv && xw < yw)
}

/// DFS from `root` that always follows the unvisited neighbor joined by
/// the largest `x`, ties to the smaller vertex id.
pub fn build_greedy_dfs(g: &Graph, sol: &LpSolution, root: usize) -> Result<DfsTree, TreeError> {
    let n = g.n();
    if root >= n {
        return Err(TreeError::RootOutOfRange { root, n });
    }
    assert_eq!(sol.x.len(), g.m(), "solution does not match graph");
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut pre = vec![usize::MAX; n];
    let mut post = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut clock = 0;

    pre[root] = clock;
    clock += 1;
    order.push(root);
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        let mut best: Option<(usize, usize)> = None;
        for &e in g.incident(u) {
            let w = g.other(e, u);
            if pre[w] != usize::MAX {
                continue;
            }
            if best.is_none_or(|(be, bw)| prefer(&sol.x[e], w, &sol.x[be], bw)) {
                best = Some((e, w));
            }
        }
        match best {
            Some((e, w)) => {
                parent[w] = Some(u);
                parent_edge[w] = Some(e);
                children[u].push(w);
                pre[w] = clock;
                clock += 1;
                order.push(w);
                stack.push(w);
            }
            None => {
                post[u] = clock;
                clock += 1;
                stack.pop();
            }
        }
    }
    if order.len() != n {
        return Err(TreeError::Disconnected { root, reached: order.len(), n });
    }

    let mut is_tree = vec![false; g.m()];
    for e in parent_edge.iter().flatten() {
        is_tree[*e] = true;
    }
    let mut back_edges: Vec<BackEdge> = (0..g.m())
        .filter(|&e| !is_tree[e])
        .map(|e| {
            let (a, b) = g.edge(e);
            let (tail, head) = if pre[a] > pre[b] { (a, b) } else { (b, a) };
            BackEdge { edge: e, tail, head }
        })
        .collect();
    back_edges.sort_by_key(|be| (pre[be.tail], pre[be.head]));
    let mut back_index = vec![None; g.m()];
    for (i, be) in back_edges.iter().enumerate() {
        back_index[be.edge] = Some(i);
    }

    let mut t =
        DfsTree { root, parent, parent_edge, children, pre, post, order, back_edges, back_index, covers: Vec::new() };
    t.covers = (0..n)
        .map(|v| match t.parent[v] {
            Some(u) => t.compute_cover(u, v),
            None => Vec::new(),
        })
        .collect();
    Ok(t)
}

impl DfsTree {
    pub fn n(&self) -> usize {
        self.pre.len()
    }

    /// True iff `a` is an ancestor of `d` (or `a == d`).
    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        self.pre[a] <= self.pre[d] && self.post[d] <= self.post[a]
    }

    fn compute_cover(&self, u: usize, v: usize) -> Vec<usize> {
        (0..self.back_edges.len())
            .filter(|&i| {
                let be = self.back_edges[i];
                self.is_ancestor(v, be.tail) && !self.is_ancestor(v, be.head) && be.head != u
            })
            .collect()
    }

    /// Cover of the tree edge entering `child`.
    pub fn cover(&self, child: usize) -> &[usize] {
        &self.covers[child]
    }

    /// Tree edges as `(edge id, parent, child)` in child preorder.
    pub fn tree_edges(&self) -> Vec<(usize, usize, usize)> {
        self.order.iter().filter_map(|&v| Some((self.parent_edge[v]?, self.parent[v]?, v))).collect()
    }

    pub fn tree_cut(&self, edge: usize) -> Result<TreeCut, TreeError> {
        let child = (0..self.n()).find(|&v| self.parent_edge[v] == Some(edge)).ok_or(TreeError::NotTreeEdge(edge))?;
        Ok(TreeCut { edge, parent: self.parent[child].expect("non-root"), child, cover: self.covers[child].clone() })
    }

    /// b-mass on the cover of the tree edge entering `child`.
    pub fn cover_mass(&self, b: &[Q], child: usize) -> Q {
        self.covers[child].iter().map(|&i| &b[i]).sum()
    }

    /// Every outgoing tree edge of `v` has cover mass at least 1 under `b`.
    pub fn is_satisfied_by(&self, b: &[Q], v: usize) -> bool {
        assert_eq!(b.len(), self.back_edges.len(), "valuation length");
        let one = Q::one();
        self.children[v].iter().all(|&c| self.cover_mass(b, c) >= one)
    }

    /// `b` with `b_i = x_e` for back edge `i` on edge `e`.
    pub fn restrict_to_back_edges(&self, x: &[Q]) -> Vec<Q> {
        self.back_edges.iter().map(|be| x[be.edge].clone()).collect()
    }

    /// Back edge indices entering `v`.
    pub fn incoming(&self, v: usize) -> Vec<usize> {
        (0..self.back_edges.len()).filter(|&i| self.back_edges[i].head == v).collect()
    }

    pub fn is_internal(&self, v: usize) -> bool {
        v != self.root && !self.children[v].is_empty()
    }
}

/// Lowest endpoint over all edges with `x < 1`, or 0 when every edge is 1.
pub fn choose_root(g: &Graph, sol: &LpSolution) -> usize {
    let one = Q::one();
    (0..g.m()).filter(|&e| sol.x[e] < one).map(|e| g.edge(e).0).min().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexClassification {
    pub internal: Vec<bool>,
    pub branch: Vec<bool>,
    pub expensive: Vec<bool>,
    pub heavy: Vec<bool>,
    /// Satisfied by `x` on the back edges; true outside the internal set.
    pub lp_satisfied: Vec<bool>,
    /// For LP-unsatisfied vertices: the child whose tree cut `x` leaves
    /// uncovered (the first in visit order if there were several).
    pub unsat_cut: Vec<Option<usize>>,
    /// Incoming back edge indices per vertex.
    pub incoming: Vec<Vec<usize>>,
    /// Number of uncovered outgoing tree cuts per vertex.
    pub unsat_count: Vec<usize>,
}

impl VertexClassification {
    pub fn expensive_vertices(&self) -> Vec<usize> {
        (0..self.expensive.len()).filter(|&v| self.expensive[v]).collect()
    }

    pub fn internal_vertices(&self) -> Vec<usize> {
        (0..self.internal.len()).filter(|&v| self.internal[v]).collect()
    }

    pub fn lp_unsatisfied(&self, v: usize) -> bool {
        !self.lp_satisfied[v]
    }

    /// `(x_min, x_max)` over the two incoming back edges of an expensive vertex.
    pub fn incoming_extremes(&self, t: &DfsTree, sol: &LpSolution, j: usize) -> Option<(Q, Q)> {
        if !self.expensive[j] {
            return None;
        }
        let a = &sol.x[t.back_edges[self.incoming[j][0]].edge];
        let b = &sol.x[t.back_edges[self.incoming[j][1]].edge];
        Some((a.clone().min(b.clone()), a.clone().max(b.clone())))
    }
}

/// Computes the vertex classes without checking any of their properties.
pub fn build_classification(sol: &LpSolution, t: &DfsTree) -> VertexClassification {
    let n = t.n();
    let x_back = t.restrict_to_back_edges(&sol.x);
    let one = Q::one();
    let mut incoming = vec![Vec::new(); n];
    for (i, be) in t.back_edges.iter().enumerate() {
        incoming[be.head].push(i);
    }
    let internal: Vec<bool> = (0..n).map(|v| t.is_internal(v)).collect();
    let branch: Vec<bool> = (0..n).map(|v| t.children[v].len() >= 2).collect();
    let expensive: Vec<bool> = (0..n).map(|v| internal[v] && incoming[v].len() == 2).collect();
    let heavy: Vec<bool> = (0..n).map(|v| sol.is_heavy(v)).collect();
    let mut lp_satisfied = vec![true; n];
    let mut unsat_cut = vec![None; n];
    let mut unsat_count = vec![0; n];
    for v in 0..n {
        let uncovered: Vec<usize> = t.children[v].iter().copied().filter(|&c| t.cover_mass(&x_back, c) < one).collect();
        unsat_count[v] = uncovered.len();
        if internal[v] && !uncovered.is_empty() {
            lp_satisfied[v] = false;
            unsat_cut[v] = Some(uncovered[0]);
        }
    }
    VertexClassification { internal, branch, expensive, heavy, lp_satisfied, unsat_cut, incoming, unsat_count }
}

/// Checks every structural property the classification must have on a
/// subquartic graph with an optimal `x ≤ 1`.
pub fn audit_classification(g: &Graph, sol: &LpSolution, t: &DfsTree, cls: &VertexClassification) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = t.n();
    for v in 0..n {
        if cls.internal[v] && cls.branch[v] && cls.expensive[v] {
            out.push(Violation::new(
                "branch_not_expensive",
                format!("vertex {v} has {} children and 2 incoming back edges", t.children[v].len()),
            ));
        }
        if cls.internal[v] && cls.unsat_count[v] > 1 {
            out.push(Violation::new(
                "at_most_one_unsatisfied_cut",
                format!("vertex {v} has {} uncovered outgoing cuts", cls.unsat_count[v]),
            ));
        }
        if cls.expensive[v] && !cls.lp_satisfied[v] {
            out.push(Violation::new("expensive_is_lp_satisfied", format!("vertex {v}")));
        }
        if !cls.lp_satisfied[v] && !cls.heavy[v] {
            out.push(Violation::new("unsatisfied_is_heavy", format!("vertex {v} has excess {}", sol.excess[v])));
        }
    }
    let n_exp = cls.expensive.iter().filter(|&&e| e).count();
    if 2 * n_exp > n {
        out.push(Violation::new("expensive_at_most_half", format!("{n_exp} expensive of {n}")));
    }
    out.extend(audit_tree(g, sol, t));
    out
}

/// Structural checks on the tree itself: back edges point to proper
/// ancestors, the back edge count is `m − n + 1`, and every tree edge was
/// a greedy choice at the moment it was taken.
pub fn audit_tree(g: &Graph, sol: &LpSolution, t: &DfsTree) -> Vec<Violation> {
    let mut out = Vec::new();
    if t.back_edges.len() + g.n() != g.m() + 1 {
        out.push(Violation::new(
            "back_edge_count",
            format!("{} back edges for m = {}, n = {}", t.back_edges.len(), g.m(), g.n()),
        ));
    }
    for be in &t.back_edges {
        if be.head == be.tail || !t.is_ancestor(be.head, be.tail) {
            out.push(Violation::new("back_edge_to_ancestor", format!("edge {} ({} -> {})", be.edge, be.tail, be.head)));
        }
    }
    // When child c of u was taken, exactly the neighbors with larger
    // preorder than c were still unvisited.
    for u in 0..g.n() {
        for &c in &t.children[u] {
            let ec = t.parent_edge[c].expect("child has a parent edge");
            for &e in g.incident(u) {
                let w = g.other(e, u);
                if w != c && t.pre[w] > t.pre[c] && prefer(&sol.x[e], w, &sol.x[ec], c) {
                    out.push(Violation::new(
                        "greedy_choice",
                        format!("at {u}: took {c} (x = {}) over {w} (x = {})", sol.x[ec], sol.x[e]),
                    ));
                }
            }
        }
    }
    out
}

/// Classification with all property checks; the first failure is an error.
pub fn classify(g: &Graph, sol: &LpSolution, t: &DfsTree) -> Result<VertexClassification, TreeError> {
    let cls = build_classification(sol, t);
    match audit_classification(g, sol, t, &cls).into_iter().next() {
        Some(v) => Err(TreeError::Classification(v)),
        None => Ok(cls),
    }
}

/// When every edge with `x = 1` should be a tree edge: lists the back edges at 1.
pub fn audit_ones_in_tree(sol: &LpSolution, t: &DfsTree) -> Vec<Violation> {
    let one = Q::one();
    t.back_edges
        .iter()
        .filter(|be| sol.x[be.edge] == one)
        .map(|be| {
            Violation::new(
                "unit_edges_in_tree",
                format!("back edge {} ({} -> {}) has x = 1", be.edge, be.tail, be.head),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexFlags {
    pub internal: bool,
    pub branch: bool,
    pub expensive: bool,
    pub heavy: bool,
    pub lp_satisfied: bool,
}

/// Debug dump of a tree with its vertex classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDump {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub back_edges: Vec<(usize, usize)>,
    pub flags: Vec<VertexFlags>,
}

impl TreeDump {
    pub fn new(t: &DfsTree, cls: &VertexClassification) -> Self {
        TreeDump {
            root: t.root,
            parent: t.parent.clone(),
            back_edges: t.back_edges.iter().map(|be| (be.tail, be.head)).collect(),
            flags: (0..t.n())
                .map(|v| VertexFlags {
                    internal: cls.internal[v],
                    branch: cls.branch[v],
                    expensive: cls.expensive[v],
                    heavy: cls.heavy[v],
                    lp_satisfied: cls.lp_satisfied[v],
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, generate_random_subquartic_with, theta, GeneratorOptions};
    use crate::lp::solve_lp;
    use crate::rational::q;

    fn unit(g: &Graph) -> LpSolution {
        LpSolution::from_values(g, vec![Q::one(); g.m()]).unwrap()
    }

    /// Subtree membership by walking parent pointers.
    fn in_subtree_naive(t: &DfsTree, v: usize, mut w: usize) -> bool {
        loop {
            if w == v {
                return true;
            }
            match t.parent[w] {
                Some(p) => w = p,
                None => return false,
            }
        }
    }

    #[test]
    fn cycle_tree_is_a_path() {
        let g = cycle(6);
        let sol = solve_lp(&g).unwrap();
        assert_eq!(choose_root(&g, &sol), 0);
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(t.back_edges.len(), 1);
        assert_eq!((t.back_edges[0].tail, t.back_edges[0].head), (5, 0));
        // the back edge ends at the root, so it does not cover the root's own cut
        for (e, u, _) in t.tree_edges() {
            let expected: Vec<usize> = if u == 0 { vec![] } else { vec![0] };
            assert_eq!(t.tree_cut(e).unwrap().cover, expected);
        }
        let back = t.back_edges[0].edge;
        assert_eq!(t.tree_cut(back), Err(TreeError::NotTreeEdge(back)));
        let cls = classify(&g, &sol, &t).unwrap();
        assert!(cls.expensive.iter().all(|e| !e));
        assert!(cls.heavy.iter().all(|e| !e));
        assert!(cls.lp_satisfied.iter().all(|&s| s));
        assert_eq!(cls.internal_vertices(), vec![1, 2, 3, 4]);
        assert!((1..5).all(|v| t.is_satisfied_by(&[Q::one()], v)));
    }

    #[test]
    fn root_out_of_range() {
        let g = cycle(4);
        assert_eq!(build_greedy_dfs(&g, &unit(&g), 4), Err(TreeError::RootOutOfRange { root: 4, n: 4 }));
    }

    #[test]
    fn choose_root_picks_lowest_fractional_endpoint() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 5), (4, 5), (0, 4), (1, 4)]).unwrap();
        let mut x = vec![Q::one(); 7];
        x[3] = q(1, 2);
        let sol = LpSolution::from_values(&g, x).unwrap();
        assert_eq!(choose_root(&g, &sol), 3);
    }

    #[test]
    fn theta_has_two_back_edges_covering_the_trunk() {
        // 0 and 1 joined by paths 0-2-1, 0-3-1, 0-4-1
        let g = theta([1, 1, 1]);
        let sol = unit(&g);
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        assert_eq!(t.back_edges.len(), g.m() - (g.n() - 1));
        assert_eq!(t.back_edges.len(), 2);
        // tree 0-2-1 with leaves 3 and 4 under 1; back edges 3->0 and 4->0
        let first = t.children[0][0];
        let trunk = t.children[first][0];
        let cut = t.tree_cut(t.parent_edge[trunk].unwrap()).unwrap();
        assert_eq!(cut.cover.len(), 2);
    }

    #[test]
    fn cover_excludes_back_edges_into_the_cut_parent() {
        // path 0-1-2 plus back edge 2->1 and 2->0: cut (1,2) is covered only by 2->0
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let x = vec![Q::one(), Q::from_int(2), Q::zero()];
        let sol = LpSolution::from_values(&g, x).unwrap();
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        assert_eq!(t.order, vec![0, 1, 2]);
        assert_eq!(t.tree_cut(1).unwrap().cover, vec![0]);
        // a cut whose only crossing back edge ends at the cut's parent
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let sol = unit(&g);
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        let cut = t.tree_cut(t.parent_edge[2].unwrap()).unwrap();
        assert_eq!((cut.parent, cut.child), (1, 2));
        assert!(cut.cover.is_empty());
    }

    #[test]
    fn fractional_cover_is_unsatisfied() {
        // 0-1-2-3 path with back edges 3->0 (1/2) and 2->0 (1/4): cut (1,2) has mass 3/4
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let x = vec![Q::one(), Q::one(), Q::one(), q(1, 2), q(1, 4)];
        let sol = LpSolution::from_values(&g, x).unwrap();
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3]);
        let b = t.restrict_to_back_edges(&sol.x);
        assert_eq!(t.cover_mass(&b, 2), q(3, 4));
        assert!(!t.is_satisfied_by(&b, 1));
    }

    #[test]
    fn random_instances_pass_all_audits() {
        for seed in 0..25 {
            let sparsity = [0.0, 0.3, 0.6][seed as usize % 3];
            let g = generate_random_subquartic_with(14 + seed as usize, seed, &GeneratorOptions { sparsity }).unwrap();
            let sol = solve_lp(&g).unwrap();
            let root = choose_root(&g, &sol);
            let t = build_greedy_dfs(&g, &sol, root).unwrap();
            let cls = build_classification(&sol, &t);
            let v = audit_classification(&g, &sol, &t, &cls);
            assert!(v.is_empty(), "seed {seed}: {v:?}");
            // covers agree with the definition evaluated by parent walks
            for (_, u, v) in t.tree_edges() {
                let naive: Vec<usize> = (0..t.back_edges.len())
                    .filter(|&i| {
                        let be = t.back_edges[i];
                        in_subtree_naive(&t, v, be.tail) && !in_subtree_naive(&t, v, be.head) && be.head != u
                    })
                    .collect();
                assert_eq!(t.cover(v), naive.as_slice());
            }
        }
    }

    #[test]
    fn dump_round_trips() {
        let g = cycle(5);
        let sol = unit(&g);
        let t = build_greedy_dfs(&g, &sol, 0).unwrap();
        let cls = classify(&g, &sol, &t).unwrap();
        let dump = TreeDump::new(&t, &cls);
        let s = serde_json::to_string(&dump).unwrap();
        assert_eq!(serde_json::from_str::<TreeDump>(&s).unwrap(), dump);
    }
}
