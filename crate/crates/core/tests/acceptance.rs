//! Acceptance criteria 1 to 9, one PASS/FAIL line each.
//!
//! Tree facts, costs and bounds are recomputed here from the raw tree and
//! LP values rather than read back from the library's own checks; the
//! certificate checks are required to pass as well.

use std::process::Command;
use std::time::{Duration, Instant};

use subquartic_tsp::certify::{self, CertifyOptions};
use subquartic_tsp::circulation::{self, Circulation};
use subquartic_tsp::dfs_tree::{self, DfsTree};
use subquartic_tsp::graph::{self, GeneratorOptions, Graph};
use subquartic_tsp::lp::{self, LpOptions, LpSolution};
use subquartic_tsp::mincut;
use subquartic_tsp::rational::Q;

const CORPUS: usize = 1000;
const SPARSITIES: [f64; 8] = [0.0, 0.15, 0.35, 0.35, 0.6, 0.6, 0.8, 1.0];

fn q(p: i64, r: i64) -> Q {
    Q::new(p, r)
}

fn int(v: i64) -> Q {
    Q::from_int(v)
}

/// Failure log for one criterion.
#[derive(Default)]
struct Log {
    violations: usize,
    examples: Vec<String>,
}

impl Log {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(what());
            }
        }
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, log: &Log, detail: String, elapsed: Duration, limit: Option<Duration>) {
        let slow = limit.is_some_and(|l| elapsed > l);
        let ok = log.violations == 0 && !slow;
        if !ok {
            self.failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        let time = match limit {
            Some(l) => format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!("criterion {id}: {verdict} {title}: {detail}, {} violations, {time}", log.violations);
        for e in &log.examples {
            println!("    {e}");
        }
    }
}

// Independent facts about a rooted tree on a block.

struct Facts {
    n: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    /// (graph edge, tail, head) with the head a proper ancestor of the tail
    back: Vec<(usize, usize, usize)>,
    internal: Vec<bool>,
    incoming: Vec<Vec<usize>>,
    expensive: Vec<bool>,
    excess: Vec<Q>,
    eps: Q,
    value: Q,
    /// library back edge index of each entry of `back`
    lib_index: Vec<usize>,
}

impl Facts {
    fn is_ancestor(&self, a: usize, mut v: usize) -> bool {
        while self.depth[v] > self.depth[a] {
            v = self.parent[v].unwrap();
        }
        v == a
    }

    /// Back edges leaving the subtree of `c` whose head is neither inside
    /// it nor the parent of `c`.
    fn cover(&self, c: usize) -> Vec<usize> {
        let p = self.parent[c].unwrap();
        (0..self.back.len())
            .filter(|&i| {
                let (_, tail, head) = self.back[i];
                self.is_ancestor(c, tail) && !self.is_ancestor(c, head) && head != p
            })
            .collect()
    }

    fn mass(&self, b: &[Q], c: usize) -> Q {
        self.cover(c).iter().map(|&i| b[i].clone()).sum()
    }

    /// A valuation indexed like the library's back edges, reindexed like `back`.
    fn own_order(&self, b: &[Q]) -> Vec<Q> {
        self.lib_index.iter().map(|&k| b[k].clone()).collect()
    }

    fn x_back(&self, sol: &LpSolution) -> Vec<Q> {
        self.back.iter().map(|&(e, _, _)| sol.x[e].clone()).collect()
    }

    fn extremes(&self, sol: &LpSolution, j: usize) -> (Q, Q) {
        let a = sol.x[self.back[self.incoming[j][0]].0].clone();
        let b = sol.x[self.back[self.incoming[j][1]].0].clone();
        (a.clone().min(b.clone()), a.max(b))
    }

    /// `Σ_exp max(0, in(j) − 1)`.
    fn cost(&self, b: &[Q]) -> Q {
        (0..self.n)
            .filter(|&j| self.expensive[j])
            .map(|j| (self.incoming[j].iter().map(|&i| b[i].clone()).sum::<Q>() - Q::one()).max(Q::zero()))
            .sum()
    }

    /// Every internal vertex has all its child cuts covered by at least 1.
    fn feasible(&self, b: &[Q]) -> bool {
        b.iter().all(|v| !v.is_negative() && *v <= Q::one())
            && (0..self.n)
                .filter(|&v| self.internal[v])
                .all(|v| self.children[v].iter().all(|&c| self.mass(b, c) >= Q::one()))
    }
}

/// Checks that `t` is a spanning DFS tree of `g` and derives the facts.
fn facts(g: &Graph, sol: &LpSolution, t: &DfsTree, log: &mut Log) -> Option<Facts> {
    let n = g.n();
    let mut depth = vec![usize::MAX; n];
    depth[t.root] = 0;
    let mut children = vec![Vec::new(); n];
    let mut tree_edge = vec![false; g.m()];
    // parents come before children in preorder
    for &v in &t.order {
        if v == t.root {
            continue;
        }
        let (Some(p), Some(e)) = (t.parent[v], t.parent_edge[v]) else {
            log.check(false, || format!("vertex {v} has no parent"));
            return None;
        };
        let (a, b) = g.edge(e);
        log.check((a, b) == (p.min(v), p.max(v)) && depth[p] != usize::MAX, || format!("bad tree edge {e} into {v}"));
        depth[v] = depth[p] + 1;
        children[p].push(v);
        tree_edge[e] = true;
    }
    if depth.contains(&usize::MAX) || t.order.len() != n {
        log.check(false, || "tree is not spanning".to_string());
        return None;
    }
    let mut f = Facts {
        n,
        parent: t.parent.clone(),
        children,
        depth,
        back: Vec::new(),
        internal: vec![false; n],
        incoming: vec![Vec::new(); n],
        expensive: vec![false; n],
        excess: Vec::new(),
        eps: Q::zero(),
        value: Q::zero(),
        lib_index: Vec::new(),
    };
    for e in (0..g.m()).filter(|&e| !tree_edge[e]) {
        let (a, b) = g.edge(e);
        let (tail, head) = if f.depth[a] > f.depth[b] { (a, b) } else { (b, a) };
        log.check(f.is_ancestor(head, tail), || format!("non-tree edge {e} = ({a},{b}) is a cross edge"));
        f.back.push((e, tail, head));
        match t.back_index[e] {
            Some(k) if t.back_edges[k].edge == e && (t.back_edges[k].tail, t.back_edges[k].head) == (tail, head) => {
                f.lib_index.push(k)
            }
            other => {
                log.check(false, || format!("back edge {e} indexed as {other:?}"));
                return None;
            }
        }
    }
    log.check(t.back_edges.len() == f.back.len(), || {
        format!("{} back edges, expected {}", t.back_edges.len(), f.back.len())
    });
    for (i, &(_, _, head)) in f.back.iter().enumerate() {
        f.incoming[head].push(i);
    }
    for v in 0..n {
        f.internal[v] = v != t.root && !f.children[v].is_empty();
        f.expensive[v] = f.internal[v] && f.incoming[v].len() == 2;
    }
    f.value = sol.x.iter().sum();
    f.eps = (&f.value - &Q::from(n)) / &Q::from(n);
    f.excess = (0..n).map(|v| g.incident(v).iter().map(|&e| sol.x[e].clone()).sum::<Q>() - int(2)).collect();
    Some(f)
}

/// `f` at `c2 = 0`.
fn round(x: &Q) -> Q {
    if *x < q(1, 4) {
        int(2) * x
    } else if *x > q(3, 4) {
        int(2) * x - Q::one()
    } else {
        q(1, 2)
    }
}

struct Block {
    graph: Graph,
    sol: LpSolution,
    tree: DfsTree,
}

/// The blocks handed to the tree stage: support of the normalized optimum,
/// split at cut vertices.
fn blocks_of(g: &Graph) -> Result<(LpSolution, Vec<Block>), String> {
    let sol = lp::solve_lp(g).map_err(|e| e.to_string())?;
    let (norm, _) = lp::normalize_below_one(g, &sol).map_err(|e| e.to_string())?;
    let r = lp::restrict_to_support(g, &norm).map_err(|e| e.to_string())?;
    let parts = if graph::cut_vertices(&r.graph).is_empty() {
        vec![(0..r.graph.m()).collect()]
    } else {
        graph::blocks(&r.graph)
    };
    let mut out = Vec::new();
    for edges in parts {
        let sub = r.graph.edge_induced_subgraph(&edges);
        let x = sub.edge_map.iter().map(|&e| r.solution.x[e].clone()).collect();
        let bs = LpSolution::from_values(&sub.graph, x).map_err(|e| e.to_string())?;
        let root = dfs_tree::choose_root(&sub.graph, &bs);
        let tree = dfs_tree::build_greedy_dfs(&sub.graph, &bs, root).map_err(|e| e.to_string())?;
        out.push(Block { graph: sub.graph, sol: bs, tree });
    }
    Ok((sol, out))
}

struct Instance {
    label: String,
    graph: Graph,
}

fn corpus() -> Vec<Instance> {
    (0..CORPUS)
        .map(|i| {
            let n = 10 + (i * 37) % 51;
            let sparsity = SPARSITIES[i % SPARSITIES.len()];
            let seed = 10_000 + i as u64;
            let graph =
                graph::generate_random_subquartic_with(n, seed, &GeneratorOptions { sparsity }).expect("generator");
            Instance { label: format!("n={n} seed={seed} sparsity={sparsity}"), graph }
        })
        .collect()
}

fn criterion_1(report: &mut Report) {
    let start = Instant::now();
    let mut log = Log::default();
    let opts = CertifyOptions { root_term: Q::zero(), c2: Q::zero() };
    for n in 3..=12usize {
        let c = graph::cycle(n);
        let cert = certify::certify(&c, &opts).expect("cycle certifies");
        let nq = Q::from(n);
        log.check(cert.lp_value == nq, || format!("C{n}: value {}", cert.lp_value));
        log.check(cert.eps.is_zero(), || format!("C{n}: eps {}", cert.eps));
        let best = cert.costs.as_ref().map(|c| c.best.clone());
        log.check(best == Some(Q::zero()), || format!("C{n}: best cost {best:?}"));
        let expect = q(4, 3) * &nq;
        log.check(cert.tour_bound.as_ref() == Some(&expect), || format!("C{n}: tour bound {:?}", cert.tour_bound));
        log.check(cert.all_checks_pass(), || format!("C{n}: failed {:?}", cert.failed_checks()));
    }
    report.line(1, "cycle regression", &log, "C3..C12".into(), start.elapsed(), Some(Duration::from_secs(1)));
}

fn criterion_2(report: &mut Report) {
    let start = Instant::now();
    let mut log = Log::default();
    let mut found = 0;
    let mut tried = 0;
    let mut seed = 500u64;
    while found < 60 && tried < 2000 {
        tried += 1;
        seed += 1;
        let n = 8 + (seed as usize * 13) % 33;
        let sparsity = if seed.is_multiple_of(2) { 0.0 } else { 0.15 };
        let g = graph::generate_random_subquartic_with(n, seed, &GeneratorOptions { sparsity }).expect("generator");
        let (sol, blocks) = match blocks_of(&g) {
            Ok(b) => b,
            Err(e) => {
                log.check(false, || format!("seed {seed}: {e}"));
                continue;
            }
        };
        if !sol.eps.is_zero() || blocks.len() != 1 || blocks[0].graph.m() <= blocks[0].graph.n() {
            continue;
        }
        found += 1;
        let b = &blocks[0];
        let Some(f) = facts(&b.graph, &b.sol, &b.tree, &mut log) else { continue };
        for e in 0..b.graph.m() {
            if b.sol.x[e] == Q::one() {
                log.check(f.back.iter().all(|&(be, _, _)| be != e), || {
                    format!("seed {seed}: x = 1 edge {e} is a back edge")
                });
            }
        }
        let half = vec![q(1, 2); f.back.len()];
        log.check(f.feasible(&half), || format!("seed {seed}: half valuation infeasible"));
        log.check(f.cost(&half).is_zero(), || format!("seed {seed}: half cost {}", f.cost(&half)));
        let cls = dfs_tree::build_classification(&b.sol, &b.tree);
        let h = circulation::half_circulation(&b.tree, &cls);
        log.check(h.is_feasible() && h.total_cost.is_zero(), || {
            format!("seed {seed}: library half {:?}", h.unsatisfied)
        });
    }
    log.check(found >= 50, || format!("only {found} qualifying instances"));
    let detail = format!("{found} instances with eps = 0 and a support with |E| > n ({tried} generated)");
    report.line(2, "zero-excess instances", &log, detail, start.elapsed(), Some(Duration::from_secs(30)));
}

/// Everything criteria 3 to 6 and 8 need from one corpus instance.
#[derive(Default)]
struct CorpusLogs {
    per_vertex: Log,
    classes: Log,
    theorems: Log,
    oracle: Log,
    normalization: Log,
    moved: [usize; 3],
    expensive: usize,
    unsatisfied: usize,
    fractional: usize,
}

const PER_VERTEX_CHECKS: &[&str] = &[
    "greedy_degree_bound",
    "c_x_halfway_bound",
    "c_x_at_most_third",
    "c_f_nonpositive_outside_window",
    "c_f_window_bound",
    "c_f_at_most_quarter",
    "min_c_at_most_quarter",
];
const CLASS_CHECKS: &[&str] = &[
    "back_edge_count",
    "back_edge_to_ancestor",
    "greedy_choice",
    "branch_not_expensive",
    "at_most_one_unsatisfied_cut",
    "expensive_is_lp_satisfied",
    "unsatisfied_is_heavy",
    "expensive_at_most_half",
    "lp_excess_sum",
];
const THEOREM_CHECKS: &[&str] =
    &["x_theorem_bound", "f_theorem_bound", "best_theorem_bound", "balance", "ratio_target"];
const ORACLE_CHECKS: &[&str] =
    &["x_circulation", "f_circulation", "oracle_circulation", "oracle_dominates", "values_in_unit_interval"];

fn certificate_checks(cert: &certify::Certificate, names: &[&str], label: &str, log: &mut Log) {
    for name in names {
        let c = cert.check(name).expect("known check");
        log.check(c.passed, || format!("{label}: {name} {:?}", c.witnesses));
    }
}

fn block_checks(label: &str, b: &Block, logs: &mut CorpusLogs) -> Option<(Q, Q)> {
    let f = facts(&b.graph, &b.sol, &b.tree, &mut logs.classes)?;
    let cls = dfs_tree::build_classification(&b.sol, &b.tree);
    let n = f.n;
    let nq = Q::from(n);

    // classification
    let log = &mut logs.classes;
    let excess_sum: Q = f.excess.iter().sum();
    log.check(excess_sum == int(2) * &f.eps * &nq, || format!("{label}: excess sum {excess_sum}, eps {}", f.eps));
    log.check(2 * f.expensive.iter().filter(|&&e| e).count() <= n, || format!("{label}: too many expensive"));
    let x_back = f.x_back(&b.sol);
    for v in 0..n {
        log.check(cls.expensive[v] == f.expensive[v] && cls.internal[v] == f.internal[v], || {
            format!("{label}: classes differ at {v}")
        });
        if !f.internal[v] {
            continue;
        }
        let uncovered = f.children[v].iter().filter(|&&c| f.mass(&x_back, c) < Q::one()).count();
        log.check(cls.lp_satisfied[v] == (uncovered == 0), || format!("{label}: satisfaction differs at {v}"));
        log.check(!(f.children[v].len() >= 2 && f.expensive[v]), || format!("{label}: branch vertex {v} expensive"));
        log.check(uncovered <= 1, || format!("{label}: {v} has {uncovered} uncovered cuts"));
        if f.expensive[v] {
            log.check(uncovered == 0, || format!("{label}: expensive {v} unsatisfied"));
        }
        if uncovered > 0 {
            logs.unsatisfied += 1;
            log.check(f.excess[v].is_positive(), || format!("{label}: unsatisfied {v} not heavy"));
        }
    }

    // per-vertex bounds
    let log = &mut logs.per_vertex;
    let mut pairs = Vec::new();
    for j in (0..n).filter(|&j| f.expensive[j]) {
        logs.expensive += 1;
        let (lo, hi) = f.extremes(&b.sol, j);
        let e = &f.excess[j];
        let tag = format!("{label}: j={j} x_min={lo} x_max={hi} eps={e}");
        let cx = &lo + &hi - Q::one() - e;
        let cf: Q = f.incoming[j].iter().map(|&i| round(&b.sol.x[f.back[i].0])).sum::<Q>() - Q::one() - e;
        log.check(int(2) * &hi + &lo <= int(2) + e, || format!("{tag}: 2x_max + x_min"));
        let mid = &lo / &int(2) - e / &int(2);
        log.check(cx <= mid && mid <= Q::one() - &lo, || format!("{tag}: c_x = {cx}"));
        log.check(cx <= q(1, 3), || format!("{tag}: c_x = {cx} > 1/3"));
        if lo >= q(1, 2) || hi <= q(3, 4) {
            log.check(!cf.is_positive(), || format!("{tag}: c_f = {cf} > 0"));
        }
        if hi >= q(3, 4) && lo.is_positive() && lo <= q(1, 2) {
            let cap = lo.clone().min(q(1, 2) - &lo);
            log.check(cf <= cap, || format!("{tag}: c_f = {cf} > {cap}"));
        }
        log.check(cf <= q(1, 4), || format!("{tag}: c_f = {cf} > 1/4"));
        let lib = circulation::c_x(j, &b.sol, &b.tree, &cls).ok();
        log.check(lib.as_ref() == Some(&cx), || format!("{tag}: library c_x {lib:?} vs {cx}"));
        pairs.push((cx.max(Q::zero()), cf.max(Q::zero())));
    }

    // circulations
    let built: Vec<Circulation> = match (
        circulation::x_circulation(&b.graph, &b.sol, &b.tree, &cls),
        circulation::f_circulation(&b.graph, &b.sol, &b.tree, &cls, &Q::zero()),
    ) {
        (Ok(x), Ok(fc)) => vec![x, fc],
        (x, fc) => {
            logs.oracle.check(false, || format!("{label}: construction failed {:?} {:?}", x.err(), fc.err()));
            return None;
        }
    };
    let oracle = match circulation::oracle_min_circulation(&b.tree, &cls) {
        Ok(o) => o,
        Err(e) => {
            logs.oracle.check(false, || format!("{label}: oracle failed {e}"));
            return None;
        }
    };
    let log = &mut logs.oracle;
    let ob = f.own_order(&oracle.b);
    log.check(f.feasible(&ob), || format!("{label}: oracle infeasible"));
    let oracle_cost = f.cost(&ob);
    log.check(oracle_cost == oracle.total_cost, || {
        format!("{label}: oracle cost {} vs {oracle_cost}", oracle.total_cost)
    });
    let mut charged = Vec::new();
    for c in &built {
        let b = f.own_order(&c.b);
        log.check(f.feasible(&b) && c.is_feasible(), || format!("{label}: {} infeasible", c.method));
        let cost = f.cost(&b);
        log.check(cost == c.total_cost, || format!("{label}: {} cost {} vs {cost}", c.method, c.total_cost));
        log.check(oracle_cost <= cost, || format!("{label}: oracle {oracle_cost} > {} {cost}", c.method));
        charged.push(cost + &c.payment_total);
    }

    // theorem bounds, root excluded
    let log = &mut logs.theorems;
    let slack = int(2) * &f.eps * &nq;
    let (xc, fc) = (charged[0].clone(), charged[1].clone());
    let best = xc.clone().min(fc.clone());
    for (name, got, cap) in [
        ("X", &xc, &nq / &int(6) + &slack),
        ("F", &fc, &nq / &int(8) + &slack),
        ("BEST", &best, &nq / &int(11) + &slack),
    ] {
        log.check(*got <= cap, || format!("{label}: {name} charged {got} > {cap}"));
    }
    if !pairs.is_empty() {
        let k = Q::from(pairs.len());
        let ax: Q = pairs.iter().map(|p| p.0.clone()).sum::<Q>() / &k;
        let af: Q = pairs.iter().map(|p| p.1.clone()).sum::<Q>() / &k;
        let combo = q(6, 11) * &ax + q(5, 11) * &af;
        log.check(combo <= q(2, 11), || format!("{label}: balance {combo}"));
    }
    Some((q(4, 3) * &nq + q(2, 3) * &best, f.value.clone()))
}

/// Counts instances whose unboxed optimum had a value above 1, and the
/// decrease and transfer steps spent on them.
fn normalization_checks(label: &str, g: &Graph, log: &mut Log, moved: &mut [usize; 3]) {
    let (sol, _) = match lp::solve_lp_with(g, &LpOptions { upper_bound_one: false }) {
        Ok(s) => s,
        Err(e) => return log.check(false, || format!("{label}: unboxed solve {e}")),
    };
    match lp::normalize_below_one(g, &sol) {
        Ok((out, stats)) => {
            if sol.x.iter().any(|v| *v > Q::one()) {
                moved[0] += 1;
            }
            moved[1] += stats.decreases;
            moved[2] += stats.transfers;
            log.check(out.x.iter().all(|v| *v <= Q::one() && !v.is_negative()), || format!("{label}: value above 1"));
            log.check(out.value == sol.value, || format!("{label}: value {} -> {}", sol.value, out.value));
            let recomputed: Q = out.x.iter().sum();
            log.check(recomputed == sol.value, || format!("{label}: edge sum {recomputed}"));
            let cut = min_cut(g, &out.x);
            log.check(cut >= int(2), || format!("{label}: min cut {cut}"));
        }
        Err(e) => log.check(false, || format!("{label}: {e}")),
    }
}

/// Global min cut; exhaustive over vertex subsets on small graphs.
fn min_cut(g: &Graph, x: &[Q]) -> Q {
    let n = g.n();
    if n > 16 {
        let edges: Vec<(usize, usize, Q)> = (0..g.m()).map(|e| (g.edge(e).0, g.edge(e).1, x[e].clone())).collect();
        return mincut::global_min_cut(n, &edges).expect("n >= 2").value;
    }
    let mut best: Option<Q> = None;
    for mask in 1u32..(1 << (n - 1)) {
        let side = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let w: Q = (0..g.m()).filter(|&e| side(g.edge(e).0) != side(g.edge(e).1)).map(|e| x[e].clone()).sum();
        best = Some(best.map_or(w.clone(), |b: Q| b.min(w)));
    }
    best.unwrap()
}

fn criteria_3_to_6_and_8(report: &mut Report) {
    let start = Instant::now();
    let instances = corpus();
    let mut logs = CorpusLogs::default();
    let mut blocks_seen = 0;
    let opts = CertifyOptions::default();
    for inst in &instances {
        let label = &inst.label;
        let g = &inst.graph;
        logs.classes.check(graph::is_subquartic(g) && graph::is_two_vertex_connected(g).unwrap(), || {
            format!("{label}: not a 2VC subquartic graph")
        });
        let cert = match certify::certify(g, &opts) {
            Ok(c) => c,
            Err(e) => {
                logs.classes.check(false, || format!("{label}: {e}"));
                continue;
            }
        };
        if cert.eps.is_positive() {
            logs.fractional += 1;
        }
        certificate_checks(&cert, PER_VERTEX_CHECKS, label, &mut logs.per_vertex);
        certificate_checks(&cert, CLASS_CHECKS, label, &mut logs.classes);
        certificate_checks(&cert, THEOREM_CHECKS, label, &mut logs.theorems);
        certificate_checks(&cert, ORACLE_CHECKS, label, &mut logs.oracle);
        let other: Vec<&str> = cert.failed_checks().iter().map(|c| c.name.as_str()).collect();
        logs.theorems.check(cert.all_checks_pass(), || format!("{label}: failed {other:?}"));

        let (sol, blocks) = match blocks_of(g) {
            Ok(b) => b,
            Err(e) => {
                logs.classes.check(false, || format!("{label}: {e}"));
                continue;
            }
        };
        let mut bound = Q::zero();
        for (k, b) in blocks.iter().enumerate() {
            blocks_seen += 1;
            let Some((tb, _)) = block_checks(&format!("{label} block {k}"), b, &mut logs) else { continue };
            bound += tb;
        }
        let ratio = &bound / &sol.value;
        logs.theorems.check(ratio <= q(46, 33), || format!("{label}: ratio {ratio}"));
        let lib = cert.ratio_without_root.clone();
        logs.theorems.check(lib.as_ref() == Some(&ratio), || format!("{label}: certificate ratio {lib:?} vs {ratio}"));

        normalization_checks(label, g, &mut logs.normalization, &mut logs.moved);
    }
    let elapsed = start.elapsed();
    let summary = format!(
        "{} instances, {} blocks, {} with eps > 0, {} expensive vertices, {} LP-unsatisfied vertices",
        instances.len(),
        blocks_seen,
        logs.fractional,
        logs.expensive,
        logs.unsatisfied
    );
    let limit = Some(Duration::from_secs(600));
    report.line(3, "per-vertex bounds", &logs.per_vertex, summary.clone(), elapsed, limit);
    report.line(4, "classification", &logs.classes, summary.clone(), elapsed, limit);
    report.line(5, "aggregate theorem bounds", &logs.theorems, summary.clone(), elapsed, limit);
    report.line(6, "oracle dominance and feasibility", &logs.oracle, summary, elapsed, limit);
    normalization_small(instances, &mut logs.normalization, &mut logs.moved, report, elapsed);
}

fn small_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 77u64;
    while out.len() < 120 {
        seed += 1;
        let n = 5 + (seed as usize) % 6;
        let sparsity = SPARSITIES[(seed as usize / 6) % SPARSITIES.len()];
        let g = graph::generate_random_subquartic_with(n, seed, &GeneratorOptions { sparsity }).expect("generator");
        if g.m() <= graph::BRUTE_FORCE_MAX_EDGES {
            out.push(Instance { label: format!("n={n} seed={seed} sparsity={sparsity}"), graph: g });
        }
    }
    out
}

fn normalization_small(
    corpus: Vec<Instance>,
    log: &mut Log,
    moved: &mut [usize; 3],
    report: &mut Report,
    corpus_time: Duration,
) {
    let start = Instant::now();
    let small = small_instances();
    let mut extra = vec![graph::complete(4), graph::complete(5), graph::theta([1, 1, 1]), graph::theta([2, 2, 2])];
    extra.extend((3..=12).map(graph::cycle));
    for (i, g) in extra.iter().enumerate() {
        normalization_checks(&format!("family {i}"), g, log, moved);
    }
    for inst in &small {
        normalization_checks(&inst.label, &inst.graph, log, moved);
    }
    let total = corpus.len() + small.len() + extra.len();
    report.line(
        8,
        "normalization below one",
        log,
        format!(
            "{total} instances, {} unboxed optima above 1, {} decreases, {} transfers",
            moved[0], moved[1], moved[2]
        ),
        corpus_time + start.elapsed(),
        None,
    );
}

fn criterion_7(report: &mut Report) {
    let start = Instant::now();
    let mut log = Log::default();
    let small = small_instances();
    let mut enumerated = 0;
    for inst in &small {
        let (label, g) = (&inst.label, &inst.graph);
        let cert = certify::certify(g, &CertifyOptions::default()).expect("certify");
        let opt = graph::brute_force_graph_tsp(g).expect("brute force").opt_len;
        let bound = cert.tour_bound.clone().unwrap_or_else(Q::zero);
        log.check(Q::from(opt) <= bound, || format!("{label}: opt {opt} > bound {bound}"));
        log.check(Q::from(opt) >= cert.lp_value, || format!("{label}: opt {opt} below LP {}", cert.lp_value));
        log.check(cert.all_checks_pass(), || format!("{label}: failed {:?}", cert.failed_checks()));
        if g.n() <= 10 {
            enumerated += 1;
            let full = lp::solve_lp_enumerated(g, &LpOptions::default()).expect("enumerated LP");
            log.check(full.value == cert.lp_value, || {
                format!("{label}: enumerated {} vs {}", full.value, cert.lp_value)
            });
        }
    }
    let detail = format!("{} instances with |E| <= 16, {enumerated} LP cross-checks", small.len());
    report.line(7, "small-instance ground truth", &log, detail, start.elapsed(), Some(Duration::from_secs(300)));
}

fn criterion_9(report: &mut Report) {
    let start = Instant::now();
    let mut log = Log::default();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_sqtsp"))
            .args(["sweep", "--n", "20", "--count", "50", "--seed", "9"])
            .args(extra)
            .output()
            .expect("run sqtsp")
    };
    let a = run(&[]);
    let b = run(&[]);
    let c = run(&["--jobs", "3"]);
    log.check(a.status.success(), || format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr)));
    log.check(!a.stdout.is_empty(), || "empty output".into());
    log.check(a.stdout == b.stdout, || "two runs differ".into());
    log.check(a.stdout == c.stdout, || "output depends on --jobs".into());
    let detail = format!("sweep --n 20 --count 50 --seed 9, {} bytes", a.stdout.len());
    report.line(9, "determinism", &log, detail, start.elapsed(), None);
}

fn main() {
    // `cargo test -- --list` and similar harness probes
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut report = Report { failed: 0 };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criteria_3_to_6_and_8(&mut report);
    criterion_7(&mut report);
    criterion_9(&mut report);
    if report.failed > 0 {
        println!("{} acceptance criteria failed", report.failed);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
