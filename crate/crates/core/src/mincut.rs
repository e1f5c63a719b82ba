//! Exact minimum cuts on rationally weighted undirected graphs.

use std::collections::VecDeque;

use crate::rational::Q;

/// A vertex bipartition; `side[v]` is true for vertices in `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub value: Q,
    pub side: Vec<bool>,
}

impl Cut {
    pub fn members(&self) -> Vec<usize> {
        self.side.iter().enumerate().filter(|(_, &s)| s).map(|(v, _)| v).collect()
    }
}

/// Stoer–Wagner global minimum cut. Returns `None` when `n < 2`.
///
/// Ties between phases keep the first cut found. The returned side is the
/// merged vertex group that was added last in the winning phase.
pub fn global_min_cut(n: usize, edges: &[(usize, usize, Q)]) -> Option<Cut> {
    if n < 2 {
        return None;
    }
    let mut w = vec![vec![Q::zero(); n]; n];
    for (u, v, c) in edges {
        if u != v && !c.is_zero() {
            w[*u][*v] += c;
            w[*v][*u] += c;
        }
    }
    let mut groups: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best: Option<(Q, Vec<usize>)> = None;

    while active.len() > 1 {
        let mut in_a = vec![false; n];
        let mut key: Vec<Q> = vec![Q::zero(); n];
        let mut prev = active[0];
        let mut last = active[0];
        in_a[last] = true;
        for &v in &active {
            key[v] = w[last][v].clone();
        }
        for _ in 1..active.len() {
            let mut pick: Option<usize> = None;
            for &v in &active {
                if !in_a[v] && pick.is_none_or(|p| key[v] > key[p]) {
                    pick = Some(v);
                }
            }
            let z = pick.expect("active vertices remain");
            in_a[z] = true;
            prev = last;
            last = z;
            for &v in &active {
                if !in_a[v] && !w[z][v].is_zero() {
                    let add = w[z][v].clone();
                    key[v] += add;
                }
            }
        }
        let phase_cut = key[last].clone();
        if best.as_ref().is_none_or(|(b, _)| phase_cut < *b) {
            best = Some((phase_cut, groups[last].clone()));
        }
        // merge `last` into `prev`
        let moved = std::mem::take(&mut groups[last]);
        groups[prev].extend(moved);
        for &v in &active {
            if v != last && v != prev {
                let add = w[last][v].clone();
                if !add.is_zero() {
                    w[prev][v] += &add;
                    w[v][prev] += &add;
                }
            }
        }
        active.retain(|&v| v != last);
    }

    let (value, members) = best?;
    let mut side = vec![false; n];
    for v in members {
        side[v] = true;
    }
    Some(Cut { value, side })
}

/// Result of an `s`–`t` maximum flow.
#[derive(Debug, Clone)]
pub struct StCut {
    pub value: Q,
    /// Vertices reachable from `s` in the residual graph: the source side
    /// of the minimum cut closest to `s`.
    pub source_side: Vec<bool>,
    /// Vertices that can reach `t` in the residual graph.
    pub sink_side: Vec<bool>,
}

impl StCut {
    /// True iff the minimum `s`–`t` cut is unique.
    pub fn is_unique(&self) -> bool {
        self.source_side.iter().zip(&self.sink_side).all(|(a, b)| *a != *b)
    }
}

/// Edmonds–Karp maximum flow between `s` and `t` on an undirected graph.
pub fn min_st_cut(n: usize, edges: &[(usize, usize, Q)], s: usize, t: usize) -> StCut {
    assert!(s != t && s < n && t < n);
    // arc 2k is u→v, arc 2k+1 is v→u; both start with the edge capacity.
    let mut head = Vec::with_capacity(2 * edges.len());
    let mut residual = Vec::with_capacity(2 * edges.len());
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v, c) in edges {
        out[*u].push(head.len());
        head.push(*v);
        residual.push(c.clone());
        out[*v].push(head.len());
        head.push(*u);
        residual.push(c.clone());
    }
    let mut value = Q::zero();
    loop {
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &a in &out[u] {
                let w = head[a];
                if !seen[w] && residual[a].is_positive() {
                    seen[w] = true;
                    via[w] = Some(a);
                    queue.push_back(w);
                }
            }
        }
        if !seen[t] {
            break;
        }
        let mut path = Vec::new();
        let mut v = t;
        while let Some(a) = via[v] {
            path.push(a);
            v = head[a ^ 1];
        }
        let push = path.iter().map(|&a| residual[a].clone()).min().expect("non-empty path");
        for a in path {
            residual[a] -= &push;
            residual[a ^ 1] += &push;
        }
        value += push;
    }

    let reach = |start: usize, forward: bool| {
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &a in &out[u] {
                let w = head[a];
                // forward: u→w usable; backward: w→u usable, i.e. the reverse arc.
                let cap = if forward { &residual[a] } else { &residual[a ^ 1] };
                if !seen[w] && cap.is_positive() {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    StCut { value, source_side: reach(s, true), sink_side: reach(t, false) }
}

/// Total weight of edges with exactly one endpoint in `side`.
pub fn cut_weight(edges: &[(usize, usize, Q)], side: &[bool]) -> Q {
    edges.iter().filter(|(u, v, _)| side[*u] != side[*v]).map(|(_, _, c)| c).sum()
}
