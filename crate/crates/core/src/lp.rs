//! The cut relaxation of graph-TSP:
//!
//! ```text
//! min Σ_e y_e   s.t.  y(δ(S)) ≥ 2  for all ∅ ≠ S ⊊ V,   y ≥ 0
//! ```
//!
//! solved exactly by a cutting-plane loop over [`DualSimplex`], with the
//! global minimum cut of the current point as separation oracle.

use serde::{Deserialize, Serialize};

use crate::graph::{self, Graph, GraphError};
use crate::mincut::{self, global_min_cut, min_st_cut};
use crate::rational::Q;
use crate::simplex::{DualSimplex, SimplexError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("graph has {n} vertices, need at least 3")]
    TooSmall { n: usize },
    #[error("graph is disconnected; the relaxation is infeasible")]
    Disconnected,
    #[error("relaxation is infeasible (a bridge cannot carry value 2 under x <= 1)")]
    Infeasible,
    #[error("cutting-plane loop did not converge within {rounds} rounds")]
    RoundLimit { rounds: usize },
    #[error("simplex failure: {0}")]
    Simplex(SimplexError),
    #[error("graph is not 2-edge-connected")]
    NotTwoEdgeConnected,
    #[error("solution violates a cut constraint: min cut {min_cut}")]
    InfeasibleSolution { min_cut: Q },
    #[error("solution has {got} values for {expected} edges")]
    LengthMismatch { got: usize, expected: usize },
    #[error("internal inconsistency: edge {edge} with x = {value} lies in two tight cuts")]
    TwoTightCuts { edge: usize, value: Q },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed solution JSON: {0}")]
    Json(String),
}

impl From<SimplexError> for LpError {
    fn from(e: SimplexError) -> Self {
        match e {
            SimplexError::Infeasible => LpError::Infeasible,
            other => LpError::Simplex(other),
        }
    }
}

/// An exact point of the relaxation with its derived quantities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub n: usize,
    /// Per-edge values, indexed like the graph's edges.
    pub x: Vec<Q>,
    /// `Σ_e x_e`.
    pub value: Q,
    /// `value = (1 + eps) · n`.
    pub eps: Q,
    /// `x(δ(v)) − 2` per vertex.
    pub excess: Vec<Q>,
}

impl LpSolution {
    pub fn from_values(g: &Graph, x: Vec<Q>) -> Result<Self, LpError> {
        if x.len() != g.m() {
            return Err(LpError::LengthMismatch { got: x.len(), expected: g.m() });
        }
        if g.n() == 0 {
            return Err(LpError::TooSmall { n: 0 });
        }
        let value: Q = x.iter().sum();
        let n = Q::from(g.n());
        let eps = &value / &n - Q::one();
        let excess = excesses(g, &x);
        Ok(LpSolution { n: g.n(), x, value, eps, excess })
    }

    /// Edge ids with `x_e > 0`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&e| self.x[e].is_positive()).collect()
    }

    pub fn is_heavy(&self, v: usize) -> bool {
        self.excess[v].is_positive()
    }

    fn weighted_edges(&self, g: &Graph) -> Vec<(usize, usize, Q)> {
        g.edges().iter().zip(&self.x).map(|(&(u, v), x)| (u, v, x.clone())).collect()
    }

    /// Global minimum cut of the x-weighted graph.
    pub fn min_cut(&self, g: &Graph) -> Q {
        global_min_cut(g.n(), &self.weighted_edges(g)).map_or(Q::zero(), |c| c.value)
    }

    pub fn to_json(&self, g: &Graph) -> LpSolutionJson {
        LpSolutionJson {
            n: self.n,
            value: self.value.clone(),
            eps: self.eps.clone(),
            x: g.edges().iter().zip(&self.x).map(|(&(u, v), x)| (u.to_string(), v.to_string(), x.clone())).collect(),
        }
    }
}

/// Wire form: `{"n":…, "value":"p/q", "eps":"p/q", "x":[["u","v","p/q"],…]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolutionJson {
    pub n: usize,
    pub value: Q,
    pub eps: Q,
    pub x: Vec<(String, String, Q)>,
}

impl LpSolutionJson {
    /// Rebuilds the graph (edges in listed order) and the solution; the
    /// stated value and eps must match the recomputed ones.
    pub fn into_solution(self) -> Result<(Graph, LpSolution), LpError> {
        let mut edges = Vec::with_capacity(self.x.len());
        let mut values = Vec::with_capacity(self.x.len());
        for (u, v, x) in self.x {
            let id = |s: &str| s.trim().parse::<usize>().map_err(|_| LpError::Json(format!("bad vertex id `{s}`")));
            edges.push((id(&u)?, id(&v)?));
            values.push(x);
        }
        let g = Graph::new(self.n, edges)?;
        let sol = LpSolution::from_values(&g, values)?;
        if sol.value != self.value || sol.eps != self.eps {
            return Err(LpError::Json(format!(
                "stated value {} / eps {} disagree with recomputed {} / {}",
                self.value, self.eps, sol.value, sol.eps
            )));
        }
        Ok((g, sol))
    }
}

/// `x(δ(v)) − 2` for every vertex.
pub fn excesses(g: &Graph, x: &[Q]) -> Vec<Q> {
    let two = Q::from_int(2);
    (0..g.n()).map(|v| g.incident(v).iter().map(|&e| &x[e]).sum::<Q>() - &two).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Add the box `x ≤ 1`. Some optimum satisfies it on 2-edge-connected
    /// graphs, so the optimal value is unchanged there.
    pub upper_bound_one: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { upper_bound_one: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub rounds: usize,
    pub cuts_added: usize,
    pub pivots: usize,
}

/// Optimal extreme point of the relaxation with `x ≤ 1`.
pub fn solve_lp(g: &Graph) -> Result<LpSolution, LpError> {
    solve_lp_with(g, &LpOptions::default()).map(|(s, _)| s)
}

fn cut_row(g: &Graph, side: &[bool]) -> Vec<(usize, Q)> {
    g.edges().iter().enumerate().filter(|(_, (u, v))| side[*u] != side[*v]).map(|(e, _)| (e, Q::one())).collect()
}

fn new_program(g: &Graph, opts: &LpOptions) -> Result<DualSimplex, LpError> {
    let bound = opts.upper_bound_one.then(Q::one);
    Ok(DualSimplex::new(vec![Q::one(); g.m()], vec![bound; g.m()])?)
}

pub fn solve_lp_with(g: &Graph, opts: &LpOptions) -> Result<(LpSolution, SolveStats), LpError> {
    if g.n() < 3 {
        return Err(LpError::TooSmall { n: g.n() });
    }
    if !g.is_connected() {
        return Err(LpError::Disconnected);
    }
    let mut lp = new_program(g, opts)?;
    for v in 0..g.n() {
        let row: Vec<(usize, Q)> = g.incident(v).iter().map(|&e| (e, Q::one())).collect();
        lp.add_row(&row, Q::from_int(2));
    }
    let max_rounds = 10 * g.n();
    let two = Q::from_int(2);
    let mut stats = SolveStats::default();
    loop {
        lp.solve()?;
        stats.rounds += 1;
        let x = lp.primal();
        let weighted: Vec<(usize, usize, Q)> = g.edges().iter().zip(&x).map(|(&(u, v), x)| (u, v, x.clone())).collect();
        let cut = global_min_cut(g.n(), &weighted).expect("n >= 3");
        if cut.value >= two {
            stats.pivots = lp.pivots();
            let sol = LpSolution::from_values(g, x)?;
            return Ok((sol, stats));
        }
        if stats.rounds >= max_rounds {
            return Err(LpError::RoundLimit { rounds: stats.rounds });
        }
        lp.add_row(&cut_row(g, &cut.side), two.clone());
        stats.cuts_added += 1;
    }
}

/// Solves the relaxation with every cut constraint written out explicitly.
/// Exponential in `n`; meant as an independent check for small graphs.
pub fn solve_lp_enumerated(g: &Graph, opts: &LpOptions) -> Result<LpSolution, LpError> {
    const MAX_N: usize = 16;
    if g.n() < 3 {
        return Err(LpError::TooSmall { n: g.n() });
    }
    assert!(g.n() <= MAX_N, "explicit cut enumeration is limited to n <= {MAX_N}");
    if !g.is_connected() {
        return Err(LpError::Disconnected);
    }
    let mut lp = new_program(g, opts)?;
    let n = g.n();
    // S ranges over sets not containing the last vertex.
    for mask in 1u32..(1 << (n - 1)) {
        let side: Vec<bool> = (0..n).map(|v| v < n - 1 && mask >> v & 1 == 1).collect();
        lp.add_row(&cut_row(g, &side), Q::from_int(2));
    }
    lp.solve()?;
    LpSolution::from_values(g, lp.primal())
}

/// Result of [`restrict_to_support`].
#[derive(Debug, Clone)]
pub struct Restriction {
    pub graph: Graph,
    pub solution: LpSolution,
    /// restricted edge id → original edge id
    pub edge_map: Vec<usize>,
    /// Number of restrict-and-resolve passes performed.
    pub rounds: usize,
}

/// Drops zero-valued edges and re-solves on the remaining graph until the
/// support of the returned extreme point is the whole edge set.
pub fn restrict_to_support(g: &Graph, sol: &LpSolution) -> Result<Restriction, LpError> {
    let mut graph = g.clone();
    let mut solution = sol.clone();
    let mut edge_map: Vec<usize> = (0..g.m()).collect();
    let mut rounds = 0;
    loop {
        let support = solution.support();
        if support.len() == graph.m() {
            return Ok(Restriction { graph, solution, edge_map, rounds });
        }
        let (sub, map) = graph.spanning_subgraph(&support);
        let resolved = solve_lp(&sub)?;
        if resolved.value != solution.value {
            return Err(LpError::Internal(format!(
                "restriction changed the optimal value from {} to {}",
                solution.value, resolved.value
            )));
        }
        edge_map = map.iter().map(|&e| edge_map[e]).collect();
        graph = sub;
        solution = resolved;
        rounds += 1;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeStats {
    /// Steps where an edge above 1 in no tight cut was lowered.
    pub decreases: usize,
    /// Steps where value moved across a tight cut to another edge.
    pub transfers: usize,
}

/// Turns a feasible solution into one with `x ≤ 1` and no larger value;
/// the value is unchanged when the input is optimal.
///
/// While some `x_e > 1`: if `e` lies in no tight cut it is lowered until it
/// reaches 1 or a cut becomes tight; if it lies in exactly one tight cut,
/// value moves from `e` to another edge of that cut with `x < 1`. An edge
/// above 1 can never lie in two tight cuts of a feasible point, so meeting
/// that case is reported as [`LpError::TwoTightCuts`].
pub fn normalize_below_one(g: &Graph, sol: &LpSolution) -> Result<(LpSolution, NormalizeStats), LpError> {
    if sol.x.len() != g.m() {
        return Err(LpError::LengthMismatch { got: sol.x.len(), expected: g.m() });
    }
    let mut stats = NormalizeStats::default();
    let one = Q::one();
    if sol.x.iter().all(|v| *v <= one) {
        return Ok((sol.clone(), stats));
    }
    if !graph::is_two_edge_connected(g) {
        return Err(LpError::NotTwoEdgeConnected);
    }
    let two = Q::from_int(2);
    let min_cut = sol.min_cut(g);
    if min_cut < two {
        return Err(LpError::InfeasibleSolution { min_cut });
    }

    let mut x = sol.x.clone();
    // Only decreases change the value; an optimal input never takes one.
    let mut lowered = Q::zero();
    let guard = 4 * g.m() + 4;
    for _ in 0..guard {
        let Some(e) = (0..x.len()).find(|&e| x[e] > one) else {
            let out = LpSolution::from_values(g, x)?;
            if out.value != &sol.value - &lowered {
                return Err(LpError::Internal("normalization value bookkeeping is off".into()));
            }
            let after = out.min_cut(g);
            if after < two {
                return Err(LpError::InfeasibleSolution { min_cut: after });
            }
            return Ok((out, stats));
        };
        let (a, b) = g.edge(e);
        let weighted: Vec<(usize, usize, Q)> = g.edges().iter().zip(&x).map(|(&(u, v), w)| (u, v, w.clone())).collect();
        let st = min_st_cut(g.n(), &weighted, a, b);
        if st.value > two {
            let dec = (&x[e] - &one).min(&st.value - &two);
            x[e] -= &dec;
            lowered += dec;
            stats.decreases += 1;
            continue;
        }
        if st.value < two {
            return Err(LpError::InfeasibleSolution { min_cut: st.value });
        }
        if !st.is_unique() {
            return Err(LpError::TwoTightCuts { edge: e, value: x[e].clone() });
        }
        let side = &st.source_side;
        let f = (0..g.m())
            .find(|&f| {
                let (u, v) = g.edge(f);
                f != e && side[u] != side[v] && x[f] < one
            })
            .ok_or_else(|| LpError::Internal(format!("tight cut through edge {e} has no edge below 1")))?;
        // Slack of the cuts that separate e's endpoints but not f's.
        let (fu, fv) = g.edge(f);
        let big: Q = x.iter().sum::<Q>() + Q::one();
        let mut contracted = weighted.clone();
        contracted.push((fu, fv, big));
        let slack = min_st_cut(g.n(), &contracted, a, b).value - &two;
        if !slack.is_positive() {
            return Err(LpError::TwoTightCuts { edge: e, value: x[e].clone() });
        }
        let delta = (&x[e] - &one).min(&one - &x[f]).min(slack);
        x[e] -= &delta;
        x[f] += &delta;
        stats.transfers += 1;
    }
    Err(LpError::Internal(format!("normalization did not finish within {guard} steps")))
}

/// Exact global minimum cut of an arbitrary valuation; exposed for audits.
pub fn min_cut_of(g: &Graph, x: &[Q]) -> Q {
    let weighted: Vec<(usize, usize, Q)> = g.edges().iter().zip(x).map(|(&(u, v), w)| (u, v, w.clone())).collect();
    mincut::global_min_cut(g.n(), &weighted).map_or(Q::zero(), |c| c.value)
}
