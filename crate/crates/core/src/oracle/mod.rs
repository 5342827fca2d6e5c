//! Exact classical oracle: maximize the game's success probability over
//! preparation-noncontextual hidden-variable models.
//!
//! The ontic space is modeled as the 2^n deterministic response vertices
//! (one answer bit per question); convexity makes richer spaces redundant.
//! Variables are the epistemic weights `mu[lambda][delta]` (probability of
//! vertex lambda given preparation delta), constrained by normalization per
//! preparation and, for every parity string s, by equality of the two
//! class sums per vertex. The objective counts matching answer bits, scaled
//! by `1 / (2^n n)`. The program is solved with a self-contained exact
//! rational simplex: an `i128` fast path that falls back to
//! arbitrary-precision arithmetic when it overflows.

mod rational;
mod simplex;

pub use rational::{Rat128, SimplexScalar};
pub use simplex::{PivotRule, SimplexOptions};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::task::{parity_set, BitString};

/// Default cap on n: 4^n variables get out of hand quickly.
pub const ORACLE_MAX_N: u32 = 5;

/// Row identity inside the LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpRow {
    /// `sum_lambda mu[lambda][delta] = 1`.
    Normalization { delta: u64 },
    /// `sum_{delta : x.s = 0} mu[lambda][delta] = sum_{delta : x.s = 1} ...`.
    Parity { s: u64, lambda: u64 },
}

#[derive(Clone, Debug)]
pub struct LpConstraint {
    pub label: LpRow,
    /// Dense coefficients over all `4^n` variables, entries in {-1, 0, 1}.
    pub coeffs: Vec<i8>,
    /// 1 for normalization rows, 0 for parity rows.
    pub rhs: u8,
}

/// The full equality-form program over variables `mu[lambda][delta]`,
/// indexed lambda-major: `var = (lambda << n) | delta`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub n: u32,
    pub num_vars: usize,
    /// `matches(lambda, delta) / (2^n n)` per variable.
    pub objective: Vec<BigRational>,
    pub constraints: Vec<LpConstraint>,
}

/// Variable index of `mu[lambda][delta]`.
pub fn var_index(n: u32, lambda: u64, delta: u64) -> usize {
    ((lambda << n) | delta) as usize
}

pub fn build_lp(n: u32) -> Result<LinearProgram, Error> {
    build_lp_with_cap(n, ORACLE_MAX_N)
}

/// Same as [`build_lp`] with an explicit cap (the CLI raises it with
/// `--force`).
pub fn build_lp_with_cap(n: u32, cap: u32) -> Result<LinearProgram, Error> {
    if n < 2 || n > cap {
        return Err(Error::UnsupportedN {
            n,
            reason: format!("the exact oracle accepts 2 <= n <= {cap}"),
        });
    }
    let size = 1u64 << n;
    let num_vars = (size * size) as usize;
    let scale = BigInt::from(size) * BigInt::from(n);

    let mut objective = Vec::with_capacity(num_vars);
    for lambda in BitString::all(n) {
        for delta in BitString::all(n) {
            let matches = n - lambda.hamming(&delta).expect("equal n");
            objective.push(BigRational::new(BigInt::from(matches), scale.clone()));
        }
    }

    let mut constraints = Vec::new();
    for delta in 0..size {
        let mut coeffs = vec![0i8; num_vars];
        for lambda in 0..size {
            coeffs[var_index(n, lambda, delta)] = 1;
        }
        constraints.push(LpConstraint {
            label: LpRow::Normalization { delta },
            coeffs,
            rhs: 1,
        });
    }
    for s in parity_set(n)?.members() {
        for lambda in 0..size {
            let mut coeffs = vec![0i8; num_vars];
            for delta in BitString::all(n) {
                let sign = if delta.dot(s).expect("equal n") == 0 {
                    1
                } else {
                    -1
                };
                coeffs[var_index(n, lambda, delta.delta())] = sign;
            }
            constraints.push(LpConstraint {
                label: LpRow::Parity {
                    s: s.delta(),
                    lambda,
                },
                coeffs,
                rhs: 0,
            });
        }
    }

    Ok(LinearProgram {
        n,
        num_vars,
        objective,
        constraints,
    })
}

/// Epistemic weights of a noncontextual model, lambda-major.
#[derive(Clone, Debug)]
pub struct NoncontextualModel {
    pub n: u32,
    pub weights: Vec<Vec<BigRational>>,
}

/// Exact optimum plus the witness model attaining it.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: BigRational,
    pub model: NoncontextualModel,
    pub iterations: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub simplex: SimplexOptions,
}

pub fn solve_exact(lp: &LinearProgram) -> Result<LpSolution, Error> {
    solve_exact_with(lp, &SolveOptions::default())
}

pub fn solve_exact_with(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, Error> {
    // fast path first; retry with arbitrary precision only on overflow
    match run::<Rat128>(lp, opts) {
        Err(Error::NumericOverflow(_)) => run::<BigRational>(lp, opts),
        other => other,
    }
}

fn run<S: SimplexScalar>(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, Error> {
    let coeffs: Vec<Vec<i8>> = lp.constraints.iter().map(|c| c.coeffs.clone()).collect();
    let rhs: Vec<u8> = lp.constraints.iter().map(|c| c.rhs).collect();
    let out =
        simplex::maximize::<S>(&coeffs, &rhs, &lp.objective, &opts.simplex).map_err(
            |e| match e {
                simplex::SimplexError::Overflow(msg) => Error::NumericOverflow(msg),
                simplex::SimplexError::IterationLimit(n) => Error::IterationLimit(n),
                simplex::SimplexError::Infeasible => Error::LpInfeasible,
                simplex::SimplexError::Unbounded => Error::LpUnbounded,
            },
        )?;
    let size = 1u64 << lp.n;
    let mut weights = Vec::with_capacity(size as usize);
    for lambda in 0..size {
        let row: Vec<BigRational> = (0..size)
            .map(|delta| out.solution[var_index(lp.n, lambda, delta)].to_big())
            .collect();
        weights.push(row);
    }
    Ok(LpSolution {
        value: out.value.to_big(),
        model: NoncontextualModel { n: lp.n, weights },
        iterations: out.iterations,
    })
}

/// Feasibility report for a model, all checks exact.
#[derive(Clone, Debug)]
pub struct ModelReport {
    pub nonnegative: bool,
    pub normalized: bool,
    pub parity_ok: bool,
    pub feasible: bool,
    /// The model's success probability, whether or not it is feasible.
    pub objective: BigRational,
    pub violations: Vec<String>,
}

pub fn verify_model(model: &NoncontextualModel) -> Result<ModelReport, Error> {
    let n = model.n;
    let size = 1u64 << n;
    if model.weights.len() != size as usize
        || model.weights.iter().any(|row| row.len() != size as usize)
    {
        return Err(Error::InvalidArgument(format!(
            "weight matrix must be {size}x{size} for n = {n}"
        )));
    }
    let mut violations = Vec::new();

    let mut nonnegative = true;
    for (lambda, row) in model.weights.iter().enumerate() {
        for (delta, w) in row.iter().enumerate() {
            if num_traits::Signed::is_negative(w) {
                nonnegative = false;
                if violations.len() < 8 {
                    violations.push(format!("mu[{lambda}][{delta}] = {w} < 0"));
                }
            }
        }
    }

    let mut normalized = true;
    for delta in 0..size as usize {
        let total: BigRational = model
            .weights
            .iter()
            .map(|row| row[delta].clone())
            .fold(<BigRational as Zero>::zero(), |a, b| a + b);
        if !total.is_one() {
            normalized = false;
            if violations.len() < 8 {
                violations.push(format!("sum_lambda mu[lambda][{delta}] = {total} != 1"));
            }
        }
    }

    let mut parity_ok = true;
    for s in parity_set(n)?.members() {
        for (lambda, row) in model.weights.iter().enumerate() {
            let mut balance = <BigRational as Zero>::zero();
            for delta in BitString::all(n) {
                let term = &row[delta.delta() as usize];
                if delta.dot(s)? == 0 {
                    balance += term;
                } else {
                    balance -= term;
                }
            }
            if !num_traits::Zero::is_zero(&balance) {
                parity_ok = false;
                if violations.len() < 8 {
                    violations.push(format!(
                        "parity s = {} unbalanced at lambda = {lambda}: {balance}",
                        s.delta()
                    ));
                }
            }
        }
    }

    let scale = BigRational::new(BigInt::one(), BigInt::from(size) * BigInt::from(n));
    let mut objective = <BigRational as Zero>::zero();
    for lambda in BitString::all(n) {
        for delta in BitString::all(n) {
            let matches = n - lambda.hamming(&delta)?;
            if matches == 0 {
                continue;
            }
            objective += &model.weights[lambda.delta() as usize][delta.delta() as usize]
                * BigRational::from_integer(BigInt::from(matches));
        }
    }
    objective *= &scale;

    Ok(ModelReport {
        nonnegative,
        normalized,
        parity_ok,
        feasible: nonnegative && normalized && parity_ok,
        objective,
        violations,
    })
}
