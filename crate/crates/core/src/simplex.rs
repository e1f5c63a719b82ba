//! Exact bounded-variable dual simplex.
//!
//! Solves `min c·x` subject to rows `a·x ≥ r` and bounds `0 ≤ x_j ≤ u_j`
//! (`u_j` may be absent). The start basis is all-slack with every
//! structural variable at the bound that makes its reduced cost dual
//! feasible, so no phase one is needed. Rows can be appended after a
//! solve and the next `solve` warm-starts from the current basis, which
//! is what a cutting-plane loop wants.
//!
//! Pivoting follows Bland's rule: the leaving variable is the infeasible
//! basic variable of smallest index, the entering variable is the
//! smallest index among ratio-test ties.

use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplexError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("variable {0} has negative cost and no upper bound; start basis is not dual feasible")]
    NotDualFeasible(usize),
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Basic(usize),
    Nonbasic(usize),
}

/// Dictionary form: `x_basic[i] = const + Σ_k coef[i][k] · x_nonbasic[k]`.
/// Variable values are tracked explicitly, so constants are not stored.
#[derive(Debug, Clone)]
pub struct DualSimplex {
    num_structural: usize,
    cost: Vec<Q>,
    upper: Vec<Option<Q>>,
    value: Vec<Q>,
    at_upper: Vec<bool>,
    slot: Vec<Slot>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    coef: Vec<Vec<Q>>,
    reduced: Vec<Q>,
    pivots: usize,
    max_pivots: usize,
}

impl DualSimplex {
    pub fn new(cost: Vec<Q>, upper: Vec<Option<Q>>) -> Result<Self, SimplexError> {
        assert_eq!(cost.len(), upper.len());
        let n = cost.len();
        let mut value = Vec::with_capacity(n);
        let mut at_upper = Vec::with_capacity(n);
        for (j, (c, u)) in cost.iter().zip(&upper).enumerate() {
            if c.is_negative() {
                match u {
                    Some(u) => {
                        value.push(u.clone());
                        at_upper.push(true);
                    }
                    None => return Err(SimplexError::NotDualFeasible(j)),
                }
            } else {
                value.push(Q::zero());
                at_upper.push(false);
            }
        }
        Ok(DualSimplex {
            num_structural: n,
            reduced: cost.clone(),
            cost,
            upper,
            value,
            at_upper,
            slot: (0..n).map(Slot::Nonbasic).collect(),
            basic: Vec::new(),
            nonbasic: (0..n).collect(),
            coef: Vec::new(),
            pivots: 0,
            max_pivots: 200_000,
        })
    }

    pub fn with_max_pivots(mut self, max_pivots: usize) -> Self {
        self.max_pivots = max_pivots;
        self
    }

    pub fn num_rows(&self) -> usize {
        self.basic.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Appends the row `Σ a_j x_j ≥ rhs` and returns its index.
    pub fn add_row(&mut self, terms: &[(usize, Q)], rhs: Q) -> usize {
        let mut row = vec![Q::zero(); self.nonbasic.len()];
        let mut activity = Q::zero();
        for (j, a) in terms {
            assert!(*j < self.num_structural, "row references unknown variable {j}");
            if a.is_zero() {
                continue;
            }
            activity += a * &self.value[*j];
            match self.slot[*j] {
                Slot::Nonbasic(k) => row[k] += a,
                Slot::Basic(i) => {
                    for (dst, c) in row.iter_mut().zip(&self.coef[i]) {
                        if !c.is_zero() {
                            *dst += a * c;
                        }
                    }
                }
            }
        }
        let var = self.value.len();
        self.value.push(activity - rhs);
        self.cost.push(Q::zero());
        self.upper.push(None);
        self.at_upper.push(false);
        self.slot.push(Slot::Basic(self.basic.len()));
        self.basic.push(var);
        self.coef.push(row);
        self.basic.len() - 1
    }

    fn infeasibility(&self, var: usize) -> Option<bool> {
        let v = &self.value[var];
        if v.is_negative() {
            Some(true)
        } else if matches!(&self.upper[var], Some(u) if v > u) {
            Some(false)
        } else {
            None
        }
    }

    /// Runs dual simplex pivots until the current rows are satisfied.
    pub fn solve(&mut self) -> Result<(), SimplexError> {
        loop {
            let leaving = self
                .basic
                .iter()
                .enumerate()
                .filter_map(|(r, &p)| self.infeasibility(p).map(|up| (p, r, up)))
                .min_by_key(|(p, _, _)| *p);
            let Some((p, r, increase)) = leaving else {
                return Ok(());
            };
            if self.pivots >= self.max_pivots {
                return Err(SimplexError::IterationLimit(self.max_pivots));
            }

            let mut entering: Option<(usize, Q, usize)> = None;
            for (k, d) in self.coef[r].iter().enumerate() {
                if d.is_zero() {
                    continue;
                }
                let q = self.nonbasic[k];
                let can_raise = !self.at_upper[q];
                // Moving x_q in its feasible direction must push x_p toward its bound.
                let eligible = if increase { can_raise == d.is_positive() } else { can_raise == d.is_negative() };
                if !eligible {
                    continue;
                }
                let ratio = (&self.reduced[k] / d).abs();
                let better = match &entering {
                    None => true,
                    Some((_, best, bq)) => ratio < *best || (ratio == *best && q < *bq),
                };
                if better {
                    entering = Some((k, ratio, q));
                }
            }
            let Some((s, _, _)) = entering else {
                return Err(SimplexError::Infeasible);
            };
            let target = if increase {
                Q::zero()
            } else {
                self.upper[p].clone().expect("upper violation implies an upper bound")
            };
            self.pivot(r, s, target, !increase);
        }
    }

    fn pivot(&mut self, r: usize, s: usize, target: Q, leave_at_upper: bool) {
        self.pivots += 1;
        let p = self.basic[r];
        let q = self.nonbasic[s];
        let d_rs = self.coef[r][s].clone();

        let theta = (&target - &self.value[p]) / &d_rs;
        for (i, row) in self.coef.iter().enumerate() {
            let c = &row[s];
            if !c.is_zero() {
                let b = self.basic[i];
                self.value[b] += c * &theta;
            }
        }
        self.value[q] += &theta;
        self.value[p] = target;

        // New row r expresses x_q in terms of x_p and the other nonbasics.
        let inv = d_rs.recip();
        let mut pivot_row = std::mem::take(&mut self.coef[r]);
        for (k, c) in pivot_row.iter_mut().enumerate() {
            if k == s {
                *c = inv.clone();
            } else if !c.is_zero() {
                *c = -(&*c * &inv);
            }
        }
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&k| k != s && !pivot_row[k].is_zero()).collect();

        let substitute = |row: &mut Vec<Q>| {
            let c_s = std::mem::take(&mut row[s]);
            if c_s.is_zero() {
                return;
            }
            for &k in &nz {
                row[k] += &c_s * &pivot_row[k];
            }
            row[s] = &c_s * &inv;
        };
        for (i, row) in self.coef.iter_mut().enumerate() {
            if i != r {
                substitute(row);
            }
        }
        substitute(&mut self.reduced);
        self.coef[r] = pivot_row;

        self.basic[r] = q;
        self.nonbasic[s] = p;
        self.slot[q] = Slot::Basic(r);
        self.slot[p] = Slot::Nonbasic(s);
        self.at_upper[q] = false;
        self.at_upper[p] = leave_at_upper;
    }

    /// Current values of the structural variables.
    pub fn primal(&self) -> Vec<Q> {
        self.value[..self.num_structural].to_vec()
    }

    pub fn objective(&self) -> Q {
        self.cost[..self.num_structural].iter().zip(&self.value).filter(|(c, _)| !c.is_zero()).map(|(c, v)| c * v).sum()
    }

    /// True when every nonbasic reduced cost has the sign its bound requires.
    pub fn is_dual_feasible(&self) -> bool {
        self.nonbasic.iter().zip(&self.reduced).all(
            |(&v, d)| {
                if self.at_upper[v] {
                    !d.is_positive()
                } else {
                    !d.is_negative()
                }
            },
        )
    }
}
