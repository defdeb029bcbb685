//! Dense two-phase primal simplex with Bland fallback, generic over the
//! scalar. The same kernel runs in f64 (tolerance 1e-9) and in exact
//! rationals (tolerance zero); problems here are tiny (≤ a few hundred
//! columns) so a full tableau is the simplest thing that is obviously
//! correct.
//!
//! Supports incremental column generation: `add_column` prices a new
//! column into the current basis via the artificial block (which started
//! as the identity and therefore carries `B^{-1}`). Callers doing column
//! generation must stay in phase 1 (`phase1`) and never trigger
//! `expel_artificials`, because dropping a row that is redundant for the
//! current columns may not be redundant for columns added later.

use crate::error::{Error, Result};
use crate::ratio::Scalar;


#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub rel: Rel,
    pub rhs: S,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Surplus,
    Artificial,
}

pub struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    cost: Vec<S>,
    kind: Vec<ColKind>,
    /// Reduced-cost row for the phase-1 objective (sum of artificials).
    obj1: Vec<S>,
    /// Reduced-cost row for the real objective.
    obj2: Vec<S>,
    /// Column index of the artificial introduced for original row i.
    art_col: Vec<usize>,
    /// True when original row i was negated to make its rhs nonnegative.
    row_negated: Vec<bool>,
    /// Current position of original row i; None once deleted as redundant.
    live_row: Vec<Option<usize>>,
    pivots: usize,
    max_pivots: usize,
    phase1_done: bool,
}

/// Pivot budget before declaring a stall; generous for desk-scale LPs.
const MAX_PIVOTS: usize = 200_000;
/// Dantzig→Bland switch point, as a multiple of the tableau perimeter.
const BLAND_AFTER_FACTOR: usize = 20;

impl<S: Scalar> Tableau<S> {
    pub fn new(costs: Vec<S>, constraints: Vec<Constraint<S>>) -> Self {
        let n_struct = costs.len();
        let n_ge = constraints.iter().filter(|c| c.rel == Rel::Ge).count();
        let m = constraints.len();
        let n_total = n_struct + n_ge + m;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut row_negated = Vec::with_capacity(m);
        let mut cost = costs;
        cost.resize(n_total, S::zero());
        let mut kind = vec![ColKind::Structural; n_struct];
        kind.resize(n_struct + n_ge, ColKind::Surplus);
        kind.resize(n_total, ColKind::Artificial);

        let mut surplus_at = n_struct;
        for c in &constraints {
            let mut coeffs = c.coeffs.clone();
            assert_eq!(coeffs.len(), n_struct, "constraint width mismatch");
            coeffs.resize(n_total, S::zero());
            if c.rel == Rel::Ge {
                coeffs[surplus_at] = -S::one();
                surplus_at += 1;
            }
            let mut b = c.rhs.clone();
            let negate = b < S::zero();
            if negate {
                for v in coeffs.iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
                b = -b;
            }
            row_negated.push(negate);
            rows.push(coeffs);
            rhs.push(b);
        }

        let art_start = n_struct + n_ge;
        let mut basis = Vec::with_capacity(m);
        let mut art_col = Vec::with_capacity(m);
        for (i, row) in rows.iter_mut().enumerate() {
            row[art_start + i] = S::one();
            basis.push(art_start + i);
            art_col.push(art_start + i);
        }

        // Phase-1 reduced costs: c_j minus column sums over the artificial
        // basis (whose phase-1 costs are all one).
        let mut obj1 = vec![S::zero(); n_total];
        for (j, o) in obj1.iter_mut().enumerate() {
            if kind[j] == ColKind::Artificial {
                continue; // basic artificials have reduced cost zero
            }
            let mut acc = S::zero();
            for row in rows.iter() {
                acc = acc - row[j].clone();
            }
            *o = acc;
        }
        let obj2 = cost.clone();

        Tableau {
            rows,
            rhs,
            basis,
            cost,
            kind,
            obj1,
            obj2,
            art_col,
            row_negated,
            live_row: (0..m).map(Some).collect(),
            pivots: 0,
            max_pivots: MAX_PIVOTS,
            phase1_done: false,
        }
    }

    fn ncols(&self) -> usize {
        self.kind.len()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j].clone();
        debug_assert!(!piv.is_zero());
        let inv = S::one() / piv;
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() * inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][j].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *v = v.clone() - factor.clone() * p.clone();
                }
            }
            self.rhs[i] = self.rhs[i].clone() - factor * pivot_rhs.clone();
        }
        for obj in [&mut self.obj1, &mut self.obj2] {
            let factor = obj[j].clone();
            if !factor.is_zero() {
                for (v, p) in obj.iter_mut().zip(pivot_row.iter()) {
                    if !p.is_zero() {
                        *v = v.clone() - factor.clone() * p.clone();
                    }
                }
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
        self.pivots += 1;
    }

    /// Entering column under the given reduced-cost row, or None at optimum.
    fn entering(&self, phase1: bool, bland: bool) -> Option<usize> {
        let obj = if phase1 { &self.obj1 } else { &self.obj2 };
        let mut best: Option<usize> = None;
        for j in 0..self.ncols() {
            if self.kind[j] == ColKind::Artificial {
                continue;
            }
            if obj[j] < -S::tol() {
                if bland {
                    return Some(j);
                }
                match best {
                    None => best = Some(j),
                    Some(b) if obj[j] < obj[b] => best = Some(j),
                    _ => {}
                }
            }
        }
        best
    }

    /// Min-ratio leaving row; ties broken by smallest basis variable index
    /// so that the Bland regime is cycle-free.
    fn leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for r in 0..self.rows.len() {
            if self.rows[r][j] > S::tol() {
                let ratio = self.rhs[r].clone() / self.rows[r][j].clone();
                match &best {
                    None => best = Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                        {
                            best = Some((r, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn run(&mut self, phase1: bool) -> Result<()> {
        let bland_after = self
            .pivots
            .saturating_add(BLAND_AFTER_FACTOR * (self.rows.len() + self.ncols()).max(16));
        loop {
            if self.pivots > self.max_pivots {
                return Err(Error::LpStall(self.pivots));
            }
            let bland = self.pivots >= bland_after;
            let Some(j) = self.entering(phase1, bland) else {
                return Ok(());
            };
            let Some(r) = self.leaving(j) else {
                return Err(Error::Lp(if phase1 {
                    "phase-1 objective unbounded".into()
                } else {
                    "objective unbounded below".into()
                }));
            };
            self.pivot(r, j);
        }
    }

    pub fn phase1_value(&self) -> S {
        let mut acc = S::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if self.kind[b] == ColKind::Artificial {
                acc = acc + self.rhs[r].clone();
            }
        }
        acc
    }

    /// Run (or resume) phase 1 to optimality and return the residual
    /// infeasibility. Zero means a feasible basis exists; basic artificials
    /// stuck at value zero are left in place.
    pub fn phase1(&mut self) -> Result<S> {
        self.run(true)?;
        Ok(self.phase1_value())
    }

    /// Pivot basic artificials out; delete rows that prove redundant.
    /// Only safe once the column set is final.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.kind[self.basis[r]] != ColKind::Artificial {
                r += 1;
                continue;
            }
            let col = (0..self.ncols())
                .find(|&j| self.kind[j] != ColKind::Artificial && !self.rows[r][j].is_negligible());
            match col {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    let removed_art = self.basis[r];
                    self.rows.remove(r);
                    self.rhs.remove(r);
                    self.basis.remove(r);
                    self.drop_live_row(removed_art);
                }
            }
        }
    }

    fn drop_live_row(&mut self, removed_art: usize) {
        for (orig, lr) in self.live_row.iter_mut().enumerate() {
            if self.art_col[orig] == removed_art {
                *lr = None;
            }
        }
        // Rows keep their relative order, so renumber live rows in sequence.
        let mut next = 0usize;
        for lr in self.live_row.iter_mut() {
            if lr.is_some() {
                *lr = Some(next);
                next += 1;
            }
        }
        debug_assert_eq!(next, self.rows.len());
    }

    /// Full solve: phase 1 then phase 2.
    pub fn solve(&mut self) -> Result<()> {
        if !self.phase1_done {
            let residual = self.phase1()?;
            if !residual.is_negligible() {
                return Err(Error::Lp("infeasible".into()));
            }
            self.expel_artificials();
            self.phase1_done = true;
        }
        self.run(false)
    }

    pub fn objective_value(&self) -> S {
        let mut acc = S::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if !self.cost[b].is_zero() {
                acc = acc + self.cost[b].clone() * self.rhs[r].clone();
            }
        }
        acc
    }

    /// Value of column j in the current basic solution.
    pub fn primal(&self, j: usize) -> S {
        for (r, &b) in self.basis.iter().enumerate() {
            if b == j {
                return self.rhs[r].clone();
            }
        }
        S::zero()
    }

    /// Duals for the *original* constraint rows under the phase-2 (or, with
    /// `phase1`, the phase-1) objective. Deleted rows get dual zero.
    pub fn duals(&self, phase1: bool) -> Vec<S> {
        let obj = if phase1 { &self.obj1 } else { &self.obj2 };
        let mut out = Vec::with_capacity(self.live_row.len());
        for (orig, lr) in self.live_row.iter().enumerate() {
            if lr.is_none() {
                out.push(S::zero());
                continue;
            }
            let mut y = -obj[self.art_col[orig]].clone();
            if phase1 {
                // the artificial's own unit cost shows up in its reduced cost
                y = y + S::one();
            }
            if self.row_negated[orig] {
                y = -y;
            }
            out.push(y);
        }
        out
    }

    /// Append a structural column given in original row coordinates, pricing
    /// it into the current basis. Returns its column index.
    pub fn add_column(&mut self, col_orig: &[S], cost: S) -> usize {
        assert_eq!(col_orig.len(), self.live_row.len());
        let j = self.ncols();
        // Tableau coordinates: B^{-1} a = sum_k a_k * (current artificial col k).
        let mut tab = vec![S::zero(); self.rows.len()];
        for (orig, a) in col_orig.iter().enumerate() {
            if a.is_zero() || self.live_row[orig].is_none() {
                continue;
            }
            let signed = if self.row_negated[orig] {
                -a.clone()
            } else {
                a.clone()
            };
            let ac = self.art_col[orig];
            for (r, row) in self.rows.iter().enumerate() {
                if !row[ac].is_zero() {
                    tab[r] = tab[r].clone() + signed.clone() * row[ac].clone();
                }
            }
        }
        for (r, v) in tab.into_iter().enumerate() {
            self.rows[r].push(v);
        }
        let y1 = self.duals(true);
        let y2 = self.duals(false);
        let mut rc1 = S::zero();
        let mut rc2 = cost.clone();
        for (orig, a) in col_orig.iter().enumerate() {
            if !a.is_zero() {
                rc1 = rc1 - y1[orig].clone() * a.clone();
                rc2 = rc2 - y2[orig].clone() * a.clone();
            }
        }
        self.obj1.push(rc1);
        self.obj2.push(rc2);
        self.cost.push(cost);
        self.kind.push(ColKind::Structural);
        j
    }

    pub fn pivot_count(&self) -> usize {
        self.pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, rat_int};
    use num_rational::BigRational;
    use num_traits::Zero;

    fn r(v: i64) -> BigRational {
        rat_int(v)
    }

    #[test]
    fn simple_min_exact() {
        // min x0 + 2 x1  s.t. x0 + x1 = 3, x0 >= 1  -> x = (3, 0), value 3
        let mut t = Tableau::new(
            vec![r(1), r(2)],
            vec![
                Constraint {
                    coeffs: vec![r(1), r(1)],
                    rel: Rel::Eq,
                    rhs: r(3),
                },
                Constraint {
                    coeffs: vec![r(1), r(0)],
                    rel: Rel::Ge,
                    rhs: r(1),
                },
            ],
        );
        t.solve().unwrap();
        assert_eq!(t.objective_value(), r(3));
        assert_eq!(t.primal(0), r(3));
        assert_eq!(t.primal(1), r(0));
    }

    #[test]
    fn negative_rhs_normalization() {
        // max x0 + x1 s.t. x0 + x1 <= 4, encoded min -x0 - x1, -x0-x1 >= -4
        let mut t = Tableau::new(
            vec![r(-1), r(-1)],
            vec![Constraint {
                coeffs: vec![r(-1), r(-1)],
                rel: Rel::Ge,
                rhs: r(-4),
            }],
        );
        t.solve().unwrap();
        assert_eq!(t.objective_value(), r(-4));
    }

    #[test]
    fn duals_satisfy_strong_duality() {
        // min 3x0 + 2x1 s.t. x0 + x1 >= 2, x0 + 3x1 >= 3
        let cons = vec![
            Constraint {
                coeffs: vec![r(1), r(1)],
                rel: Rel::Ge,
                rhs: r(2),
            },
            Constraint {
                coeffs: vec![r(1), r(3)],
                rel: Rel::Ge,
                rhs: r(3),
            },
        ];
        let mut t = Tableau::new(vec![r(3), r(2)], cons);
        t.solve().unwrap();
        let y = t.duals(false);
        let dual_val = y[0].clone() * r(2) + y[1].clone() * r(3);
        assert_eq!(dual_val, t.objective_value());
        assert!(y.iter().all(|v| *v >= r(0)));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let cons = vec![
            Constraint {
                coeffs: vec![r(1)],
                rel: Rel::Eq,
                rhs: r(2),
            },
            Constraint {
                coeffs: vec![r(1)],
                rel: Rel::Eq,
                rhs: r(2),
            },
        ];
        let mut t = Tableau::new(vec![r(1)], cons);
        t.solve().unwrap();
        assert_eq!(t.primal(0), r(2));
        assert_eq!(t.duals(false).len(), 2);
    }

    #[test]
    fn infeasible_detected() {
        let cons = vec![
            Constraint {
                coeffs: vec![r(1)],
                rel: Rel::Eq,
                rhs: r(1),
            },
            Constraint {
                coeffs: vec![r(1)],
                rel: Rel::Eq,
                rhs: r(2),
            },
        ];
        let mut t = Tableau::new(vec![r(0)], cons);
        assert!(!t.phase1().unwrap().is_zero());
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Beale's cycling example (as >= rows); Bland fallback must finish.
        // min -3/4 a + 150 b - 1/50 c + 6 d
        //   1/4 a - 60 b - 1/25 c + 9 d <= 0
        //   1/2 a - 90 b - 1/50 c + 3 d <= 0
        //   c <= 1
        // optimum -1/20 at (1/25, 0, 1, 0)
        let cons = vec![
            Constraint {
                coeffs: vec![rat(-1, 4), r(60), rat(1, 25), r(-9)],
                rel: Rel::Ge,
                rhs: r(0),
            },
            Constraint {
                coeffs: vec![rat(-1, 2), r(90), rat(1, 50), r(-3)],
                rel: Rel::Ge,
                rhs: r(0),
            },
            Constraint {
                coeffs: vec![r(0), r(0), r(-1), r(0)],
                rel: Rel::Ge,
                rhs: r(-1),
            },
        ];
        let mut t = Tableau::new(vec![rat(-3, 4), r(150), rat(-1, 50), r(6)], cons);
        t.solve().unwrap();
        assert_eq!(t.objective_value(), rat(-1, 20));
    }

    #[test]
    fn add_column_reprices() {
        // x0 never helps the equality; feasibility arrives with the new column.
        let cons = vec![Constraint {
            coeffs: vec![r(0)],
            rel: Rel::Eq,
            rhs: r(2),
        }];
        let mut t = Tableau::new(vec![r(0)], cons);
        assert!(!t.phase1().unwrap().is_zero());
        let j = t.add_column(&[r(1)], r(0));
        assert!(t.phase1().unwrap().is_zero());
        assert_eq!(t.primal(j), r(2));
    }

    #[test]
    fn float_mode_agrees() {
        let cons_f = vec![
            Constraint {
                coeffs: vec![1.0, 1.0],
                rel: Rel::Ge,
                rhs: 2.0,
            },
            Constraint {
                coeffs: vec![1.0, 3.0],
                rel: Rel::Ge,
                rhs: 3.0,
            },
        ];
        let mut t = Tableau::new(vec![3.0f64, 2.0], cons_f);
        t.solve().unwrap();
        assert!((t.objective_value() - 4.0).abs() < 1e-9);
    }
}
