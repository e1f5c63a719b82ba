//! Back-edge valuations that satisfy every internal vertex, and their cost
//!
//! ```text
//! cost(b) = Σ_{j expensive} max(0, in_b(j) − 1),   in_b(j) = Σ_{(i,j) back} b(i,j)
//! ```

use serde::{Deserialize, Serialize};

use crate::dfs_tree::{DfsTree, VertexClassification};
use crate::graph::Graph;
use crate::lp::LpSolution;
use crate::rational::Q;
use crate::simplex::{DualSimplex, SimplexError};

/// Root contribution added to tour bounds unless overridden.
pub const DEFAULT_ROOT_TERM: i64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CirculationError {
    #[error("vertex {0} is not expensive")]
    NotExpensive(usize),
    #[error("c2 must be non-negative, got {0}")]
    NegativeC2(Q),
    #[error("vertex {vertex}: cut into {child} has cover capacity {capacity} < 1")]
    CoverCapacity { vertex: usize, child: usize, capacity: Q },
    #[error("vertex {vertex} is LP-satisfied but the rounded values leave the cut into {child} at {mass}")]
    RoundingUnsatisfied { vertex: usize, child: usize, mass: Q },
    #[error("vertex {vertex} is still unsatisfied after fix-up")]
    Unsatisfied { vertex: usize },
    #[error("oracle LP failed: {0}")]
    Oracle(SimplexError),
    #[error("oracle LP objective {objective} disagrees with recomputed cost {cost}")]
    OracleMismatch { objective: Q, cost: Q },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    X,
    F,
    Best,
    Oracle,
    Half,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" => Ok(Method::X),
            "f" => Ok(Method::F),
            "best" => Ok(Method::Best),
            "oracle" => Ok(Method::Oracle),
            "half" => Ok(Method::Half),
            other => Err(format!("unknown method `{other}` (expected x, f, best, oracle or half)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::X => "x",
            Method::F => "f",
            Method::Best => "best",
            Method::Oracle => "oracle",
            Method::Half => "half",
        })
    }
}

/// Raise paid on behalf of one LP-unsatisfied vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payment {
    pub vertex: usize,
    /// Total increase of b spent on this vertex.
    pub amount: Q,
    /// Part of `amount` beyond the prescribed raise (repair).
    pub overage: Q,
}

/// Outcome of the best-of selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestOf {
    /// cost + payments of the x-circulation
    pub x: Q,
    /// cost + payments of the f-circulation
    pub f: Q,
    pub chosen: Method,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circulation {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c2: Option<Q>,
    /// `(tail, head)` per back edge, aligned with `b`.
    pub arcs: Vec<(usize, usize)>,
    pub b: Vec<Q>,
    /// `(j, max(0, in(j) − 1))` for every expensive `j`.
    pub vertex_cost: Vec<(usize, Q)>,
    pub total_cost: Q,
    pub root_term: Q,
    pub payments: Vec<Payment>,
    pub payment_total: Q,
    /// Number of vertices whose prescribed raise was not enough.
    pub repairs: usize,
    /// Upper bound on `total_cost` from the per-vertex terms; absent for
    /// valuations that are not built by fix-up.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic_bound: Option<Q>,
    /// Internal vertices left unsatisfied (only ever non-empty for `half`).
    pub unsatisfied: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_of: Option<BestOf>,
}

impl Circulation {
    fn assemble(method: Method, t: &DfsTree, cls: &VertexClassification, b: Vec<Q>) -> Self {
        let vertex_cost: Vec<(usize, Q)> =
            cls.expensive_vertices().into_iter().map(|j| (j, vertex_cost(cls, &b, j))).collect();
        let total_cost = vertex_cost.iter().map(|(_, c)| c).sum();
        let unsatisfied = cls.internal_vertices().into_iter().filter(|&v| !t.is_satisfied_by(&b, v)).collect();
        Circulation {
            method,
            c2: None,
            arcs: t.back_edges.iter().map(|be| (be.tail, be.head)).collect(),
            b,
            vertex_cost,
            total_cost,
            root_term: Q::from_int(DEFAULT_ROOT_TERM),
            payments: Vec::new(),
            payment_total: Q::zero(),
            repairs: 0,
            analytic_bound: None,
            unsatisfied,
            best_of: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.unsatisfied.is_empty()
    }

    /// `total_cost + payment_total`, the figure compared between methods.
    pub fn charged(&self) -> Q {
        &self.total_cost + &self.payment_total
    }

    pub fn with_root_term(mut self, root_term: Q) -> Self {
        self.root_term = root_term;
        self
    }

    pub fn repair_overage(&self) -> Q {
        self.payments.iter().map(|p| &p.overage).sum()
    }
}

fn vertex_cost(cls: &VertexClassification, b: &[Q], j: usize) -> Q {
    let inflow: Q = cls.incoming[j].iter().map(|&i| &b[i]).sum();
    (inflow - Q::one()).max(Q::zero())
}

/// `Σ_{j expensive} max(0, in_b(j) − 1)`.
pub fn cost(t: &DfsTree, cls: &VertexClassification, b: &[Q]) -> Q {
    assert_eq!(b.len(), t.back_edges.len(), "valuation length");
    cls.expensive_vertices().into_iter().map(|j| vertex_cost(cls, b, j)).sum()
}

fn extremes(sol: &LpSolution, t: &DfsTree, cls: &VertexClassification, j: usize) -> Result<(Q, Q), CirculationError> {
    cls.incoming_extremes(t, sol, j).ok_or(CirculationError::NotExpensive(j))
}

/// `x_min(j) + x_max(j) − 1 − ε(j)`.
pub fn c_x(j: usize, sol: &LpSolution, t: &DfsTree, cls: &VertexClassification) -> Result<Q, CirculationError> {
    let (lo, hi) = extremes(sol, t, cls, j)?;
    Ok(lo + hi - Q::one() - &sol.excess[j])
}

/// Lower and upper breakpoints of the rounding map.
pub fn f_breakpoints(c2: &Q) -> (Q, Q) {
    let shift = c2 / &(Q::from_int(4) * (c2 + &Q::from_int(2)));
    (Q::new(1, 4) - &shift, Q::new(3, 4) + &shift)
}

/// Rounds one x-value: scaled up below the lower breakpoint, to 1/2 in
/// between, and scaled toward 1 above the upper one.
pub fn f_value(x: &Q, c2: &Q) -> Q {
    let (lo, hi) = f_breakpoints(c2);
    let slope = c2 + &Q::from_int(2);
    if *x < lo {
        slope * x
    } else if *x > hi {
        slope * x - c2 - Q::one()
    } else {
        Q::new(1, 2)
    }
}

/// Rounded values on the back edges of `t`.
pub fn f_values(sol: &LpSolution, t: &DfsTree, c2: &Q) -> Result<Vec<Q>, CirculationError> {
    if c2.is_negative() {
        return Err(CirculationError::NegativeC2(c2.clone()));
    }
    Ok(t.back_edges.iter().map(|be| f_value(&sol.x[be.edge], c2)).collect())
}

/// `Σ f(i,j) − 1 − ε(j)` over the incoming back edges of expensive `j`.
pub fn c_f(j: usize, sol: &LpSolution, t: &DfsTree, cls: &VertexClassification, c2: &Q) -> Result<Q, CirculationError> {
    if c2.is_negative() {
        return Err(CirculationError::NegativeC2(c2.clone()));
    }
    if !cls.expensive[j] {
        return Err(CirculationError::NotExpensive(j));
    }
    let inflow: Q = cls.incoming[j].iter().map(|&i| f_value(&sol.x[t.back_edges[i].edge], c2)).sum();
    Ok(inflow - Q::one() - &sol.excess[j])
}

/// Covering edges of the cut into `child`, largest current b first, ties
/// by tail preorder.
fn raise_order(t: &DfsTree, b: &[Q], child: usize) -> Vec<usize> {
    let mut cover = t.cover(child).to_vec();
    // back edge indices already follow tail preorder, and the sort is stable
    cover.sort_by(|&p, &q| b[q].cmp(&b[p]));
    cover
}

/// Raises b on the cover of each LP-unsatisfied vertex's uncovered cut by
/// `rate · ε(j)`, capped at 1, then repairs any cut still short.
fn fix_up(
    t: &DfsTree,
    cls: &VertexClassification,
    sol: &LpSolution,
    b: &mut [Q],
    rate: &Q,
) -> Result<(Vec<Payment>, usize), CirculationError> {
    let one = Q::one();
    let mut payments = Vec::new();
    let mut repairs = 0;
    for &j in &t.order {
        let Some(child) = cls.unsat_cut[j] else { continue };
        let order = raise_order(t, b, child);
        let capacity = order.len();
        let Some(&first) = order.first() else {
            return Err(CirculationError::CoverCapacity { vertex: j, child, capacity: Q::zero() });
        };
        let before = b[first].clone();
        b[first] = (&before + &(rate * &sol.excess[j])).min(one.clone());
        let mut amount = &b[first] - &before;
        let mut overage = Q::zero();

        let mut mass = t.cover_mass(b, child);
        if mass < one {
            repairs += 1;
            for &i in &order {
                if mass >= one {
                    break;
                }
                let room = &one - &b[i];
                let step = room.min(&one - &mass);
                if step.is_positive() {
                    b[i] += &step;
                    mass += &step;
                    amount += &step;
                    overage += step;
                }
            }
            if mass < one {
                return Err(CirculationError::CoverCapacity { vertex: j, child, capacity: Q::from(capacity) });
            }
        }
        payments.push(Payment { vertex: j, amount, overage });
    }
    Ok((payments, repairs))
}

fn finish_fixed(
    method: Method,
    t: &DfsTree,
    cls: &VertexClassification,
    b: Vec<Q>,
    payments: Vec<Payment>,
    repairs: usize,
    analytic_bound: Q,
) -> Result<Circulation, CirculationError> {
    let mut c = Circulation::assemble(method, t, cls, b);
    if let Some(&vertex) = c.unsatisfied.first() {
        return Err(CirculationError::Unsatisfied { vertex });
    }
    c.payment_total = payments.iter().map(|p| &p.amount).sum();
    c.payments = payments;
    c.repairs = repairs;
    c.analytic_bound = Some(analytic_bound);
    Ok(c)
}

fn internal_excess(cls: &VertexClassification, sol: &LpSolution, expensive: bool) -> Q {
    cls.internal_vertices().into_iter().filter(|&v| cls.expensive[v] == expensive).map(|v| &sol.excess[v]).sum()
}

/// Starts from `b = x` and raises by `ε(j)/2` for each LP-unsatisfied `j`.
pub fn x_circulation(
    _g: &Graph,
    sol: &LpSolution,
    t: &DfsTree,
    cls: &VertexClassification,
) -> Result<Circulation, CirculationError> {
    let mut b = t.restrict_to_back_edges(&sol.x);
    let (payments, repairs) = fix_up(t, cls, sol, &mut b, &Q::new(1, 2))?;
    let mut bound: Q = Q::zero();
    for j in cls.expensive_vertices() {
        bound += c_x(j, sol, t, cls)?.max(Q::zero());
    }
    bound += internal_excess(cls, sol, true) + internal_excess(cls, sol, false);
    finish_fixed(Method::X, t, cls, b, payments, repairs, bound)
}

/// Starts from the rounded values and raises by `(1 + c2/2)·ε(j)` for each
/// LP-unsatisfied `j`. LP-satisfied vertices must already be satisfied by
/// the rounding.
pub fn f_circulation(
    _g: &Graph,
    sol: &LpSolution,
    t: &DfsTree,
    cls: &VertexClassification,
    c2: &Q,
) -> Result<Circulation, CirculationError> {
    let mut b = f_values(sol, t, c2)?;
    let one = Q::one();
    for v in cls.internal_vertices() {
        if cls.lp_satisfied[v] {
            for &child in &t.children[v] {
                let mass = t.cover_mass(&b, child);
                if mass < one {
                    return Err(CirculationError::RoundingUnsatisfied { vertex: v, child, mass });
                }
            }
        }
    }
    let rate = Q::one() + c2 / &Q::from_int(2);
    let (payments, repairs) = fix_up(t, cls, sol, &mut b, &rate)?;
    let mut bound: Q = Q::zero();
    for j in cls.expensive_vertices() {
        bound += c_f(j, sol, t, cls, c2)?.max(Q::zero()) + &sol.excess[j];
    }
    bound += &rate * &internal_excess(cls, sol, false);
    let mut c = finish_fixed(Method::F, t, cls, b, payments, repairs, bound)?;
    c.c2 = Some(c2.clone());
    Ok(c)
}

/// The cheaper of the x- and f-circulations by cost + payments; ties go to f.
pub fn best_circulation(
    g: &Graph,
    sol: &LpSolution,
    t: &DfsTree,
    cls: &VertexClassification,
    c2: &Q,
) -> Result<Circulation, CirculationError> {
    let x = x_circulation(g, sol, t, cls)?;
    let f = f_circulation(g, sol, t, cls, c2)?;
    Ok(pick_best(x, f))
}

/// Best-of selection from already built circulations.
pub fn pick_best(x: Circulation, f: Circulation) -> Circulation {
    let (xc, fc) = (x.charged(), f.charged());
    let (mut winner, chosen) = if xc < fc { (x, Method::X) } else { (f, Method::F) };
    winner.method = Method::Best;
    winner.best_of = Some(BestOf { x: xc, f: fc, chosen });
    winner
}

/// Exact minimum of the cost functional over all valuations satisfying
/// every internal vertex, by rational LP.
pub fn oracle_min_circulation(t: &DfsTree, cls: &VertexClassification) -> Result<Circulation, CirculationError> {
    let nb = t.back_edges.len();
    let exp = cls.expensive_vertices();
    let mut cost = vec![Q::zero(); nb];
    cost.extend(std::iter::repeat_n(Q::one(), exp.len()));
    let mut upper = vec![Some(Q::one()); nb];
    upper.extend(std::iter::repeat_n(None, exp.len()));
    let mut lp = DualSimplex::new(cost, upper).map_err(CirculationError::Oracle)?;
    for (k, &j) in exp.iter().enumerate() {
        let mut row = vec![(nb + k, Q::one())];
        row.extend(cls.incoming[j].iter().map(|&i| (i, -Q::one())));
        lp.add_row(&row, -Q::one());
    }
    for v in cls.internal_vertices() {
        for &child in &t.children[v] {
            let row: Vec<(usize, Q)> = t.cover(child).iter().map(|&i| (i, Q::one())).collect();
            lp.add_row(&row, Q::one());
        }
    }
    lp.solve().map_err(CirculationError::Oracle)?;
    let objective = lp.objective();
    let b = lp.primal()[..nb].to_vec();
    let c = Circulation::assemble(Method::Oracle, t, cls, b);
    if c.total_cost != objective {
        return Err(CirculationError::OracleMismatch { objective, cost: c.total_cost });
    }
    if let Some(&vertex) = c.unsatisfied.first() {
        return Err(CirculationError::Unsatisfied { vertex });
    }
    Ok(c)
}

/// `b ≡ 1/2`. Infeasibility is reported in `unsatisfied`, not as an error.
pub fn half_circulation(t: &DfsTree, cls: &VertexClassification) -> Circulation {
    Circulation::assemble(Method::Half, t, cls, vec![Q::new(1, 2); t.back_edges.len()])
}
