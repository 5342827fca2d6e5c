//! Dense two-phase tableau simplex over exact rationals.
//!
//! Phase 1 starts from an all-artificial basis and drives the artificial sum
//! to zero; phase 2 optimizes the real objective with artificial columns
//! dropped. Bland's rule guarantees termination; the default pricing picks
//! the most negative reduced cost and falls back to Bland after a run of
//! degenerate pivots, which keeps the anti-cycling guarantee while pivoting
//! far less on these highly degenerate programs.

use std::cmp::Ordering;

use super::rational::SimplexScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Lowest-index entering column with negative reduced cost.
    Bland,
    /// Most negative reduced cost, switching to Bland while degenerate.
    DantzigThenBland,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    pub max_iterations: u64,
    /// Abort when any pivot scalar outgrows this many bits.
    pub max_scalar_bits: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            rule: PivotRule::Bland,
            max_iterations: 2_000_000,
            max_scalar_bits: 65_536,
        }
    }
}

#[derive(Debug)]
pub enum SimplexError {
    Overflow(String),
    IterationLimit(u64),
    Infeasible,
    Unbounded,
}

pub struct SimplexOutcome<S> {
    pub value: S,
    pub solution: Vec<S>,
    pub iterations: u64,
}

/// Consecutive degenerate pivots tolerated before switching to Bland.
const STALL_LIMIT: u32 = 48;

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    cost: Vec<S>,
    cost_value: S,
    basis: Vec<usize>,
    iterations: u64,
    degenerate_run: u32,
    opts: SimplexOptions,
}

fn overflow<S>(_: Option<S>) -> SimplexError {
    SimplexError::Overflow("exact scalar overflow".into())
}

macro_rules! try_op {
    ($e:expr) => {
        match $e {
            Some(v) => v,
            None => return Err(SimplexError::Overflow("exact scalar overflow".into())),
        }
    };
}

impl<S: SimplexScalar> Tableau<S> {
    fn width(&self) -> usize {
        self.cost.len()
    }

    /// Entering column under the active rule, or None at optimality.
    fn entering(&self, limit: usize) -> Option<usize> {
        let bland = match self.opts.rule {
            PivotRule::Bland => true,
            PivotRule::DantzigThenBland => self.degenerate_run >= STALL_LIMIT,
        };
        if bland {
            (0..limit).find(|&j| self.cost[j].is_negative())
        } else {
            let mut best: Option<(usize, &S)> = None;
            for j in 0..limit {
                if !self.cost[j].is_negative() {
                    continue;
                }
                match best {
                    None => best = Some((j, &self.cost[j])),
                    Some((_, b)) => {
                        if matches!(self.cost[j].cmp_value(b), Some(Ordering::Less)) {
                            best = Some((j, &self.cost[j]));
                        }
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by exact minimum ratio; ties broken by smallest basic
    /// variable index (keeps Bland's guarantee intact).
    fn leaving(&self, col: usize) -> Result<Option<usize>, SimplexError> {
        let mut best: Option<(usize, S)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = try_op!(self.rhs[i].checked_div(a));
            best = match best {
                None => Some((i, ratio)),
                Some((bi, bratio)) => {
                    match ratio
                        .cmp_value(&bratio)
                        .ok_or_else(|| overflow::<S>(None))?
                    {
                        Ordering::Less => Some((i, ratio)),
                        Ordering::Equal if self.basis[i] < self.basis[bi] => Some((i, ratio)),
                        _ => Some((bi, bratio)),
                    }
                }
            };
        }
        Ok(best.map(|(i, _)| i))
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<(), SimplexError> {
        let width = self.width();
        let pivot_value = self.rows[row][col].clone();
        if pivot_value.magnitude_bits() > self.opts.max_scalar_bits {
            return Err(SimplexError::Overflow(format!(
                "pivot scalar exceeded {} bits",
                self.opts.max_scalar_bits
            )));
        }
        let degenerate = self.rhs[row].is_zero();

        // normalize the pivot row
        for j in 0..width {
            if !self.rows[row][j].is_zero() {
                self.rows[row][j] = try_op!(self.rows[row][j].checked_div(&pivot_value));
            }
        }
        self.rhs[row] = try_op!(self.rhs[row].checked_div(&pivot_value));

        // nonzero columns of the pivot row, visited instead of the full width
        let support: Vec<usize> = (0..width)
            .filter(|&j| !self.rows[row][j].is_zero())
            .collect();

        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut self.rows[i][col], S::zero());
            for &j in &support {
                if j == col {
                    continue;
                }
                let delta = try_op!(factor.checked_mul(&self.rows[row][j]));
                self.rows[i][j] = try_op!(self.rows[i][j].checked_sub(&delta));
            }
            if !self.rhs[row].is_zero() {
                let delta = try_op!(factor.checked_mul(&self.rhs[row]));
                self.rhs[i] = try_op!(self.rhs[i].checked_sub(&delta));
            }
        }
        if !self.cost[col].is_zero() {
            let factor = std::mem::replace(&mut self.cost[col], S::zero());
            for &j in &support {
                if j == col {
                    continue;
                }
                let delta = try_op!(factor.checked_mul(&self.rows[row][j]));
                self.cost[j] = try_op!(self.cost[j].checked_sub(&delta));
            }
            if !self.rhs[row].is_zero() {
                let delta = try_op!(factor.checked_mul(&self.rhs[row]));
                self.cost_value = try_op!(self.cost_value.checked_sub(&delta));
            }
        }

        self.basis[row] = col;
        self.iterations += 1;
        if degenerate {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        Ok(())
    }

    /// Run pivots until the cost row over `0..limit` is nonnegative.
    fn optimize(&mut self, limit: usize) -> Result<(), SimplexError> {
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SimplexError::IterationLimit(self.iterations));
            }
            let Some(col) = self.entering(limit) else {
                return Ok(());
            };
            let Some(row) = self.leaving(col)? else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(row, col)?;
        }
    }
}

/// Maximize `objective . x` subject to `coeffs x = rhs`, `x >= 0`.
/// Right-hand sides must be nonnegative (they are 0/1 here).
pub fn maximize<S: SimplexScalar>(
    coeffs: &[Vec<i8>],
    rhs: &[u8],
    objective: &[num_rational::BigRational],
    opts: &SimplexOptions,
) -> Result<SimplexOutcome<S>, SimplexError> {
    let m = coeffs.len();
    let nv = objective.len();
    assert_eq!(rhs.len(), m);

    // tableau with one artificial per row
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(m);
    for (i, row) in coeffs.iter().enumerate() {
        assert_eq!(row.len(), nv);
        let mut r: Vec<S> = row.iter().map(|&v| S::from_int(v as i64)).collect();
        r.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
        rows.push(r);
    }
    let rhs_col: Vec<S> = rhs.iter().map(|&b| S::from_int(b as i64)).collect();

    // phase 1 reduced costs: -(column sums) on real columns, 0 on artificials
    let mut cost = vec![S::zero(); nv + m];
    for j in 0..nv {
        let mut acc = S::zero();
        for row in coeffs {
            if row[j] != 0 {
                acc = acc
                    .checked_add(&S::from_int(row[j] as i64))
                    .ok_or_else(|| overflow::<S>(None))?;
            }
        }
        cost[j] = acc.neg();
    }
    let mut cost_value = S::zero();
    for b in &rhs_col {
        cost_value = cost_value
            .checked_sub(b)
            .ok_or_else(|| overflow::<S>(None))?;
    }

    let mut tab = Tableau {
        rows,
        rhs: rhs_col,
        cost,
        cost_value,
        basis: (nv..nv + m).collect(),
        iterations: 0,
        degenerate_run: 0,
        opts: opts.clone(),
    };

    // phase 1: price real columns only; artificial reduced costs stay >= 0
    tab.optimize(nv)?;
    if !tab.cost_value.is_zero() {
        return Err(SimplexError::Infeasible);
    }

    // pivot lingering artificials out of the basis (degenerate rows) or drop
    // rows that turned out redundant
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= nv {
            match (0..nv).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j)?,
                None => {
                    tab.rows.swap_remove(i);
                    tab.rhs.swap_remove(i);
                    tab.basis.swap_remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // drop artificial columns
    for row in &mut tab.rows {
        row.truncate(nv);
    }

    // phase 2 reduced costs: sum_i c_{basis_i} row_i - c
    let c: Vec<S> = objective
        .iter()
        .map(|v| S::from_big(v).ok_or_else(|| overflow::<S>(None)))
        .collect::<Result<_, _>>()?;
    let mut cost = vec![S::zero(); nv];
    let mut cost_value = S::zero();
    for (j, slot) in cost.iter_mut().enumerate() {
        let mut acc = c[j].neg();
        for i in 0..tab.rows.len() {
            let cb = &c[tab.basis[i]];
            if cb.is_zero() || tab.rows[i][j].is_zero() {
                continue;
            }
            let delta = cb
                .checked_mul(&tab.rows[i][j])
                .ok_or_else(|| overflow::<S>(None))?;
            acc = acc.checked_add(&delta).ok_or_else(|| overflow::<S>(None))?;
        }
        *slot = acc;
    }
    for i in 0..tab.rows.len() {
        let cb = &c[tab.basis[i]];
        if cb.is_zero() || tab.rhs[i].is_zero() {
            continue;
        }
        let delta = cb
            .checked_mul(&tab.rhs[i])
            .ok_or_else(|| overflow::<S>(None))?;
        cost_value = cost_value
            .checked_add(&delta)
            .ok_or_else(|| overflow::<S>(None))?;
    }
    tab.cost = cost;
    tab.cost_value = cost_value;
    tab.degenerate_run = 0;

    tab.optimize(nv)?;

    let mut solution = vec![S::zero(); nv];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            solution[b] = tab.rhs[i].clone();
        }
    }
    Ok(SimplexOutcome {
        value: tab.cost_value,
        solution,
        iterations: tab.iterations,
    })
}
