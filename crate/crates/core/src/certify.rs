//! End-to-end certification of one instance, and sweeps over many.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulation::{
    self, c_f, c_x, f_circulation, half_circulation, oracle_min_circulation, pick_best, x_circulation, Circulation,
    Method, DEFAULT_ROOT_TERM,
};
use crate::dfs_tree::{self, build_classification, build_greedy_dfs, choose_root, DfsTree, VertexClassification};
use crate::graph::{self, GeneratorOptions, Graph, BRUTE_FORCE_MAX_EDGES};
use crate::lp::{self, LpError, LpSolution};
use crate::rational::Q;

/// Ratio the best-of construction is measured against.
pub fn target_ratio() -> Q {
    Q::new(46, 33)
}

const MAX_WITNESSES: usize = 8;

/// Every check a certificate reports, in output order.
pub const CHECK_NAMES: &[&str] = &[
    "subquartic_input",
    "lp_min_cut_at_least_two",
    "lp_values_in_unit_interval",
    "lp_support_at_most_2n_minus_1",
    "lp_excess_sum",
    "lp_eps_in_unit_interval",
    "lp_excess_nonnegative",
    "normalization",
    "restriction",
    "block_solution_feasible",
    "back_edge_count",
    "back_edge_to_ancestor",
    "greedy_choice",
    "branch_not_expensive",
    "at_most_one_unsatisfied_cut",
    "expensive_is_lp_satisfied",
    "unsatisfied_is_heavy",
    "expensive_at_most_half",
    "unit_edges_in_tree",
    "half_feasible_zero_cost",
    "greedy_degree_bound",
    "c_x_halfway_bound",
    "c_x_at_most_third",
    "c_f_nonpositive_outside_window",
    "c_f_window_bound",
    "c_f_at_most_quarter",
    "min_c_at_most_quarter",
    "x_circulation",
    "f_circulation",
    "oracle_circulation",
    "values_in_unit_interval",
    "oracle_dominates",
    "x_payments_bound",
    "f_payments_bound",
    "x_cost_within_analytic",
    "f_cost_within_analytic",
    "x_theorem_bound",
    "f_theorem_bound",
    "best_theorem_bound",
    "balance",
    "ratio_target",
    "ratio_with_root_term",
    "tour_bound_dominates_opt",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// False when the check's hypothesis never held on this instance.
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn new() -> Self {
        Checks(
            CHECK_NAMES
                .iter()
                .map(|n| Check { name: n.to_string(), passed: true, applicable: false, witnesses: Vec::new() })
                .collect(),
        )
    }

    fn slot(&mut self, name: &str) -> &mut Check {
        let i = self.0.iter().position(|c| c.name == name).unwrap_or_else(|| panic!("unknown check `{name}`"));
        &mut self.0[i]
    }

    fn fail(&mut self, name: &str, witness: String) {
        let c = self.slot(name);
        c.applicable = true;
        c.passed = false;
        if c.witnesses.len() < MAX_WITNESSES {
            c.witnesses.push(witness);
        }
    }

    fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.slot(name).applicable = true;
        } else {
            self.fail(name, witness());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Added once per tree to the circulation cost in the tour bound.
    pub root_term: Q,
    /// Widening parameter of the rounding map; theorem-level bounds are
    /// only checked at 0.
    pub c2: Q,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { root_term: Q::from_int(DEFAULT_ROOT_TERM), c2: Q::zero() }
    }
}

/// Construction costs `Σ max(0, in − 1)` of each valuation, summed over blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Costs {
    pub x: Q,
    pub f: Q,
    pub best: Q,
    pub oracle: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payments {
    pub x: Q,
    pub f: Q,
    pub best: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repairs {
    pub x: usize,
    pub f: usize,
}

/// Per-block figures; a 2-vertex-connected support is a single block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub n: usize,
    pub m: usize,
    pub value: Q,
    pub eps: Q,
    pub root: usize,
    pub expensive: usize,
    pub lp_unsatisfied: usize,
    pub best_method: Method,
    /// best cost + payments
    pub charged: Q,
    pub tour_bound: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Fingerprint of the input graph.
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub lp_value: Q,
    pub eps: Q,
    pub support_size: usize,
    pub lp_rounds: usize,
    pub restrict_rounds: usize,
    /// True when the support had a cut vertex and was processed per block.
    pub split_into_blocks: bool,
    pub blocks: Vec<BlockSummary>,
    pub root_term: Q,
    pub c2: Q,
    pub checks: Vec<Check>,
    pub costs: Option<Costs>,
    pub payments: Option<Payments>,
    pub repairs: Option<Repairs>,
    /// `Σ_blocks 4n_B/3 + (2/3)(best cost + payments + root_term)`.
    pub tour_bound: Option<Q>,
    /// `tour_bound / lp_value`.
    pub ratio: Option<Q>,
    /// Same as `ratio` with the root term dropped.
    pub ratio_without_root: Option<Q>,
    pub max_c_x: Option<Q>,
    pub max_c_f: Option<Q>,
    pub opt_tsp: Option<usize>,
}

impl Certificate {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.tour_bound.is_some()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn repairs_total(&self) -> usize {
        self.repairs.as_ref().map_or(0, |r| r.x + r.f)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}

/// `(4n/3 + (2/3)c) / ((1 + eps)n) ≤ 46/33`.
pub fn ratio_holds(n: usize, c: &Q, eps: &Q) -> bool {
    let n = Q::from(n);
    let bound = Q::new(4, 3) * &n + Q::new(2, 3) * c;
    bound / ((Q::one() + eps) * n) <= target_ratio()
}

/// The ratio of the best-of bound to the LP value, root term excluded, is
/// at most 46/33.
pub fn ratio_check(cert: &Certificate) -> bool {
    cert.ratio_without_root.as_ref().is_some_and(|r| *r <= target_ratio())
}

struct BlockOutcome {
    summary: BlockSummary,
    x: Circulation,
    f: Circulation,
    best: Circulation,
    oracle: Circulation,
    max_c_x: Option<Q>,
    max_c_f: Option<Q>,
}

fn sum_excess<'a>(sol: &LpSolution, vs: impl Iterator<Item = &'a usize>) -> Q {
    vs.map(|&v| &sol.excess[v]).sum()
}

fn per_vertex_checks(
    sol: &LpSolution,
    t: &DfsTree,
    cls: &VertexClassification,
    c2: &Q,
    checks: &mut Checks,
) -> (Option<Q>, Option<Q>, Vec<(Q, Q)>) {
    let zero = Q::zero();
    let half = Q::new(1, 2);
    let quarter = Q::new(1, 4);
    let three_quarters = Q::new(3, 4);
    let mut max_cx: Option<Q> = None;
    let mut max_cf: Option<Q> = None;
    let mut pairs = Vec::new();
    for j in cls.expensive_vertices() {
        let (lo, hi) = cls.incoming_extremes(t, sol, j).expect("expensive");
        let eps = &sol.excess[j];
        let cx = c_x(j, sol, t, cls).expect("expensive");
        let cf0 = c_f(j, sol, t, cls, &zero).expect("expensive");
        let tag = || format!("j = {j}: x_min = {lo}, x_max = {hi}, eps = {eps}");

        checks.record("greedy_degree_bound", Q::from_int(2) * &hi + &lo <= Q::from_int(2) + eps, tag);
        let halfway = &lo / &Q::from_int(2) - eps / &Q::from_int(2);
        checks.record("c_x_halfway_bound", cx <= halfway && halfway <= Q::one() - &lo, || {
            format!("{}, c_x = {cx}", tag())
        });
        checks.record("c_x_at_most_third", cx <= Q::new(1, 3), || format!("{}, c_x = {cx}", tag()));
        if lo >= half || hi <= three_quarters {
            checks.record("c_f_nonpositive_outside_window", !cf0.is_positive(), || format!("{}, c_f = {cf0}", tag()));
        }
        if hi >= three_quarters && lo.is_positive() && lo <= half {
            let cap = lo.clone().min(&half - &lo);
            checks.record("c_f_window_bound", cf0 <= cap, || format!("{}, c_f = {cf0}", tag()));
        }
        checks.record("c_f_at_most_quarter", cf0 <= quarter, || format!("{}, c_f = {cf0}", tag()));
        checks.record("min_c_at_most_quarter", cx.clone().min(cf0.clone()) <= quarter, tag);

        max_cx = Some(max_cx.map_or(cx.clone(), |m| m.max(cx.clone())));
        let cf = if c2.is_zero() { cf0 } else { c_f(j, sol, t, cls, c2).expect("expensive") };
        max_cf = Some(max_cf.map_or(cf.clone(), |m| m.max(cf.clone())));
        pairs.push((cx, cf));
    }
    (max_cx, max_cf, pairs)
}

fn certify_block(g: &Graph, sol: &LpSolution, opts: &CertifyOptions, checks: &mut Checks) -> Option<BlockOutcome> {
    let n = g.n();
    let root = choose_root(g, sol);
    let t = match build_greedy_dfs(g, sol, root) {
        Ok(t) => t,
        Err(e) => {
            checks.fail("back_edge_count", format!("tree construction failed: {e}"));
            return None;
        }
    };
    let cls = build_classification(sol, &t);
    for v in dfs_tree::audit_classification(g, sol, &t, &cls) {
        checks.fail(&v.check, v.witness);
    }
    for name in [
        "back_edge_count",
        "back_edge_to_ancestor",
        "greedy_choice",
        "branch_not_expensive",
        "at_most_one_unsatisfied_cut",
        "expensive_is_lp_satisfied",
        "unsatisfied_is_heavy",
        "expensive_at_most_half",
    ] {
        checks.slot(name).applicable = true;
    }

    let integral_case = sol.eps.is_zero() && g.m() > n;
    if integral_case {
        checks.record("unit_edges_in_tree", true, String::new);
        for v in dfs_tree::audit_ones_in_tree(sol, &t) {
            checks.fail(&v.check, v.witness);
        }
        let h = half_circulation(&t, &cls);
        checks.record("half_feasible_zero_cost", h.is_feasible() && h.total_cost.is_zero(), || {
            format!("unsatisfied {:?}, cost {}", h.unsatisfied, h.total_cost)
        });
    }

    let (max_c_x, max_c_f, pairs) = per_vertex_checks(sol, &t, &cls, &opts.c2, checks);

    let x = x_circulation(g, sol, &t, &cls);
    let f = f_circulation(g, sol, &t, &cls, &opts.c2);
    let oracle = oracle_min_circulation(&t, &cls);
    checks.record("x_circulation", x.is_ok(), || format!("{}", x.as_ref().unwrap_err()));
    checks.record("f_circulation", f.is_ok(), || format!("{}", f.as_ref().unwrap_err()));
    checks.record("oracle_circulation", oracle.is_ok(), || format!("{}", oracle.as_ref().unwrap_err()));
    let (Ok(x), Ok(f), Ok(oracle)) = (x, f, oracle) else {
        return None;
    };
    let root_term = opts.root_term.clone();
    let (x, f, oracle) = (
        x.with_root_term(root_term.clone()),
        f.with_root_term(root_term.clone()),
        oracle.with_root_term(root_term.clone()),
    );
    let best = pick_best(x.clone(), f.clone());

    for c in [&x, &f, &oracle] {
        let bad: Vec<usize> = (0..c.b.len()).filter(|&i| c.b[i].is_negative() || c.b[i] > Q::one()).collect();
        checks.record("values_in_unit_interval", bad.is_empty(), || format!("{}: back edges {bad:?}", c.method));
    }
    for c in [&x, &f, &best] {
        checks.record("oracle_dominates", oracle.total_cost <= c.total_cost, || {
            format!("oracle {} > {} {}", oracle.total_cost, c.method, c.total_cost)
        });
    }

    let unsat: Vec<usize> = cls.internal_vertices().into_iter().filter(|&v| !cls.expensive[v]).collect();
    let plain_excess = sum_excess(sol, unsat.iter());
    if x.repairs == 0 {
        let cap = &plain_excess / &Q::from_int(2);
        checks.record("x_payments_bound", x.payment_total <= cap, || format!("paid {} > {cap}", x.payment_total));
    }
    if f.repairs == 0 {
        let cap = (Q::one() + &opts.c2 / &Q::from_int(2)) * &plain_excess;
        checks.record("f_payments_bound", f.payment_total <= cap, || format!("paid {} > {cap}", f.payment_total));
    }
    for (name, c) in [("x_cost_within_analytic", &x), ("f_cost_within_analytic", &f)] {
        let bound = c.analytic_bound.clone().expect("fix-up constructions carry a bound") + c.repair_overage();
        checks.record(name, c.total_cost <= bound, || format!("cost {} > {bound}", c.total_cost));
    }

    let nq = Q::from(n);
    let slack = Q::from_int(2) * &sol.eps * &nq;
    let x_cap = &nq / &Q::from_int(6) + &slack;
    checks.record("x_theorem_bound", x.charged() <= x_cap, || format!("{} > {x_cap}", x.charged()));
    if opts.c2.is_zero() {
        let f_cap = &nq / &Q::from_int(8) + &slack;
        checks.record("f_theorem_bound", f.charged() <= f_cap, || format!("{} > {f_cap}", f.charged()));
        let best_cap = &nq / &Q::from_int(11) + &slack;
        checks.record("best_theorem_bound", best.charged() <= best_cap, || format!("{} > {best_cap}", best.charged()));
        if !pairs.is_empty() {
            let k = Q::from(pairs.len());
            let avg_x: Q = pairs.iter().map(|(cx, _)| cx.clone().max(Q::zero())).sum::<Q>() / &k;
            let avg_f: Q = pairs.iter().map(|(_, cf)| cf.clone().max(Q::zero())).sum::<Q>() / &k;
            let combo = Q::new(6, 11) * &avg_x + Q::new(5, 11) * &avg_f;
            checks.record("balance", combo <= Q::new(2, 11), || format!("{combo} with averages {avg_x}, {avg_f}"));
        }
    }

    let charged = best.charged();
    let tour_bound = Q::new(4, 3) * &nq + Q::new(2, 3) * &(&charged + &root_term);
    let summary = BlockSummary {
        n,
        m: g.m(),
        value: sol.value.clone(),
        eps: sol.eps.clone(),
        root,
        expensive: cls.expensive_vertices().len(),
        lp_unsatisfied: (0..n).filter(|&v| cls.lp_unsatisfied(v)).count(),
        best_method: best.best_of.as_ref().expect("best-of").chosen,
        charged,
        tour_bound,
    };
    Some(BlockOutcome { summary, x, f, best, oracle, max_c_x, max_c_f })
}

fn max_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Runs the whole pipeline on `g`. Only failures to solve the relaxation
/// are errors; every later inconsistency becomes a failed check.
pub fn certify(g: &Graph, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    let mut checks = Checks::new();
    checks.record("subquartic_input", graph::is_subquartic(g), || format!("max degree {}", g.max_degree()));

    let (sol, stats) = lp::solve_lp_with(g, &lp::LpOptions::default())?;
    let n = g.n();
    let nq = Q::from(n);
    let two = Q::from_int(2);
    let min_cut = sol.min_cut(g);
    checks.record("lp_min_cut_at_least_two", min_cut >= two, || format!("min cut {min_cut}"));
    let out_of_box: Vec<usize> = (0..g.m()).filter(|&e| sol.x[e].is_negative() || sol.x[e] > Q::one()).collect();
    checks.record("lp_values_in_unit_interval", out_of_box.is_empty(), || format!("edges {out_of_box:?}"));
    let support = sol.support().len();
    checks.record("lp_support_at_most_2n_minus_1", support < 2 * n, || format!("support {support}, n {n}"));
    let excess_sum: Q = sol.excess.iter().sum();
    checks
        .record("lp_excess_sum", excess_sum == &two * &sol.eps * &nq, || format!("sum {excess_sum}, eps {}", sol.eps));
    checks.record("lp_eps_in_unit_interval", !sol.eps.is_negative() && sol.eps <= Q::one(), || {
        format!("eps {}", sol.eps)
    });
    let negative: Vec<usize> = (0..n).filter(|&v| sol.excess[v].is_negative()).collect();
    checks.record("lp_excess_nonnegative", negative.is_empty(), || format!("vertices {negative:?}"));

    let mut cert = Certificate {
        instance: g.fingerprint(),
        n,
        m: g.m(),
        lp_value: sol.value.clone(),
        eps: sol.eps.clone(),
        support_size: support,
        lp_rounds: stats.rounds,
        restrict_rounds: 0,
        split_into_blocks: false,
        blocks: Vec::new(),
        root_term: opts.root_term.clone(),
        c2: opts.c2.clone(),
        checks: Vec::new(),
        costs: None,
        payments: None,
        repairs: None,
        tour_bound: None,
        ratio: None,
        ratio_without_root: None,
        max_c_x: None,
        max_c_f: None,
        opt_tsp: None,
    };
    if g.m() <= BRUTE_FORCE_MAX_EDGES {
        cert.opt_tsp = Some(graph::brute_force_graph_tsp(g)?.opt_len);
    }

    let finish = |mut cert: Certificate, checks: Checks| {
        cert.checks = checks.0;
        Ok(cert)
    };

    let sol = match lp::normalize_below_one(g, &sol) {
        Ok((normalized, _)) => {
            let ok = normalized.value == sol.value && normalized.x.iter().all(|v| *v <= Q::one());
            checks.record("normalization", ok, || format!("value {} -> {}", sol.value, normalized.value));
            normalized
        }
        Err(e) => {
            checks.fail("normalization", e.to_string());
            return finish(cert, checks);
        }
    };
    let restricted = match lp::restrict_to_support(g, &sol) {
        Ok(r) => {
            checks.record("restriction", r.solution.value == sol.value, String::new);
            r
        }
        Err(e) => {
            checks.fail("restriction", e.to_string());
            return finish(cert, checks);
        }
    };
    cert.restrict_rounds = restricted.rounds;
    let gs = &restricted.graph;
    let xs = &restricted.solution;

    let block_edges: Vec<Vec<usize>> = if graph::cut_vertices(gs).is_empty() {
        vec![(0..gs.m()).collect()]
    } else {
        cert.split_into_blocks = true;
        graph::blocks(gs)
    };

    let mut outcomes = Vec::new();
    for edges in &block_edges {
        let sub = gs.edge_induced_subgraph(edges);
        let xb: Vec<Q> = sub.edge_map.iter().map(|&e| xs.x[e].clone()).collect();
        let block_sol = match LpSolution::from_values(&sub.graph, xb) {
            Ok(s) => s,
            Err(e) => {
                checks.fail("block_solution_feasible", e.to_string());
                return finish(cert, checks);
            }
        };
        let cut = block_sol.min_cut(&sub.graph);
        checks.record("block_solution_feasible", cut >= two && sub.graph.n() >= 3, || {
            format!("block on {:?}: min cut {cut}", sub.vertex_map)
        });
        if sub.graph.n() < 3 {
            return finish(cert, checks);
        }
        match certify_block(&sub.graph, &block_sol, opts, &mut checks) {
            Some(o) => outcomes.push(o),
            None => return finish(cert, checks),
        }
    }

    let sum = |f: &dyn Fn(&BlockOutcome) -> Q| outcomes.iter().map(f).sum::<Q>();
    cert.costs = Some(Costs {
        x: sum(&|o| o.x.total_cost.clone()),
        f: sum(&|o| o.f.total_cost.clone()),
        best: sum(&|o| o.best.total_cost.clone()),
        oracle: sum(&|o| o.oracle.total_cost.clone()),
    });
    cert.payments = Some(Payments {
        x: sum(&|o| o.x.payment_total.clone()),
        f: sum(&|o| o.f.payment_total.clone()),
        best: sum(&|o| o.best.payment_total.clone()),
    });
    cert.repairs =
        Some(Repairs { x: outcomes.iter().map(|o| o.x.repairs).sum(), f: outcomes.iter().map(|o| o.f.repairs).sum() });
    let tour_bound = sum(&|o| o.summary.tour_bound.clone());
    let roots = Q::from(outcomes.len());
    let root_share = Q::new(2, 3) * &opts.root_term * &roots;
    let without_root = &tour_bound - &root_share;
    let ratio = &tour_bound / &cert.lp_value;
    let ratio_without_root = &without_root / &cert.lp_value;
    for o in &outcomes {
        cert.max_c_x = max_opt(cert.max_c_x.take(), o.max_c_x.clone());
        cert.max_c_f = max_opt(cert.max_c_f.take(), o.max_c_f.clone());
    }
    cert.blocks = outcomes.into_iter().map(|o| o.summary).collect();

    if opts.c2.is_zero() {
        checks.record("ratio_target", ratio_without_root <= target_ratio(), || format!("ratio {ratio_without_root}"));
    }
    let allowance = target_ratio() + &root_share / &cert.lp_value;
    if opts.c2.is_zero() {
        checks.record("ratio_with_root_term", ratio <= allowance, || format!("ratio {ratio} > {allowance}"));
    }
    if let Some(opt) = cert.opt_tsp {
        checks.record("tour_bound_dominates_opt", tour_bound >= Q::from(opt), || {
            format!("bound {tour_bound} < opt {opt}")
        });
    }
    cert.tour_bound = Some(tour_bound);
    cert.ratio = Some(ratio);
    cert.ratio_without_root = Some(ratio_without_root);
    finish(cert, checks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub count: usize,
    pub n: usize,
    pub seed: u64,
    pub sparsity: f64,
    pub certify: CertifyOptions,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.certificate.as_ref().is_some_and(Certificate::all_checks_pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    pub passed: usize,
    pub errors: usize,
    pub max_ratio: Option<Q>,
    pub max_c_x: Option<Q>,
    pub max_c_f: Option<Q>,
    pub repairs: usize,
    pub split_into_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

pub const CSV_HEADER: &str =
    "instance,seed,n,m,eps,cost_x,cost_f,cost_best,cost_oracle,repairs,tour_bound,ratio,all_checks_pass";

fn opt_q(q: Option<&Q>) -> String {
    q.map_or(String::new(), Q::to_pq)
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let c = row.certificate.as_ref();
            let costs = c.and_then(|c| c.costs.as_ref());
            let fields = [
                row.instance.to_string(),
                row.seed.to_string(),
                c.map_or(String::new(), |c| c.n.to_string()),
                c.map_or(String::new(), |c| c.m.to_string()),
                opt_q(c.map(|c| &c.eps)),
                opt_q(costs.map(|k| &k.x)),
                opt_q(costs.map(|k| &k.f)),
                opt_q(costs.map(|k| &k.best)),
                opt_q(costs.map(|k| &k.oracle)),
                c.map_or(String::new(), |c| c.repairs_total().to_string()),
                opt_q(c.and_then(|c| c.tour_bound.as_ref())),
                opt_q(c.and_then(|c| c.ratio.as_ref())),
                row.passed().to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn certify_row(i: usize, opts: &SweepOptions) -> SweepRow {
    let seed = opts.seed.wrapping_add(i as u64);
    let result = graph::generate_random_subquartic_with(opts.n, seed, &GeneratorOptions { sparsity: opts.sparsity })
        .map_err(|e| e.to_string())
        .and_then(|g| certify(&g, &opts.certify).map_err(|e| e.to_string()));
    match result {
        Ok(c) => SweepRow { instance: i, seed, certificate: Some(c), error: None },
        Err(e) => SweepRow { instance: i, seed, certificate: None, error: Some(e) },
    }
}

/// Certifies `count` generated instances; instance `i` uses seed `seed + i`.
/// Rows come back in instance order whatever the thread count.
pub fn sweep(opts: &SweepOptions) -> SweepReport {
    let run = || (0..opts.count).into_par_iter().map(|i| certify_row(i, opts)).collect::<Vec<_>>();
    let rows = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build().expect("thread pool").install(run),
        None => run(),
    };
    let mut summary = SweepSummary {
        count: rows.len(),
        passed: 0,
        errors: 0,
        max_ratio: None,
        max_c_x: None,
        max_c_f: None,
        repairs: 0,
        split_into_blocks: 0,
    };
    for row in &rows {
        if row.passed() {
            summary.passed += 1;
        }
        match &row.certificate {
            None => summary.errors += 1,
            Some(c) => {
                summary.max_ratio = max_opt(summary.max_ratio.take(), c.ratio.clone());
                summary.max_c_x = max_opt(summary.max_c_x.take(), c.max_c_x.clone());
                summary.max_c_f = max_opt(summary.max_c_f.take(), c.max_c_f.clone());
                summary.repairs += c.repairs_total();
                summary.split_into_blocks += usize::from(c.split_into_blocks);
            }
        }
    }
    SweepReport { rows, summary }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Tree(#[from] dfs_tree::TreeError),
    #[error(transparent)]
    Circulation(#[from] circulation::CirculationError),
}

/// Solution, tree and classes on the support of an optimal solution.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Graph,
    pub solution: LpSolution,
    pub tree: DfsTree,
    pub classes: VertexClassification,
}

/// Solve, normalize, restrict to the support, and build the tree; every
/// classification check must pass.
pub fn prepare(g: &Graph) -> Result<Prepared, StageError> {
    let sol = lp::solve_lp(g)?;
    let (sol, _) = lp::normalize_below_one(g, &sol)?;
    let r = lp::restrict_to_support(g, &sol)?;
    let (graph, solution) = (r.graph, r.solution);
    let tree = build_greedy_dfs(&graph, &solution, choose_root(&graph, &solution))?;
    let classes = dfs_tree::classify(&graph, &solution, &tree)?;
    Ok(Prepared { graph, solution, tree, classes })
}

/// The circulation selected by `method` on a prepared instance.
pub fn circulation_for(p: &Prepared, method: Method, opts: &CertifyOptions) -> Result<Circulation, StageError> {
    let (g, x, t, cls) = (&p.graph, &p.solution, &p.tree, &p.classes);
    let c = match method {
        Method::X => x_circulation(g, x, t, cls)?,
        Method::F => f_circulation(g, x, t, cls, &opts.c2)?,
        Method::Best => circulation::best_circulation(g, x, t, cls, &opts.c2)?,
        Method::Oracle => oracle_min_circulation(t, cls)?,
        Method::Half => half_circulation(t, cls),
    };
    Ok(c.with_root_term(opts.root_term.clone()))
}
