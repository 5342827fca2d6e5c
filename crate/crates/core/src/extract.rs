//! Device-independent certification: given black-box observables (and
//! optionally states) in an unknown dimension, build the unitary that maps
//! them onto the canonical Pauli tensor forms, and report residuals plus the
//! conjugation-sector structure.
//!
//! The construction is recursive. Each level diagonalizes the first
//! observable into `diag(1, -1) tensor 1` (possible exactly when its +/-1
//! eigenspaces have equal dimension, which anticommutation forces), reads
//! the remaining observables as off-diagonal blocks, rotates the second one
//! to `sigma_y tensor 1` with a block unitary built from its own coupling
//! block, and reduces every later observable to an operator on the half
//! space. The reduced set anticommutes again, so the level repeats; after
//! `ceil((n-1)/2)` levels either nothing is left (n even) or a single
//! dichotomic operator remains (n odd).
//!
//! That terminal operator is the chirality of the input representation: its
//! +1/-1 eigenspace dimensions `(J_+, J_-)` split the junk space into blocks
//! carrying the two inequivalent representation classes. The minus class is
//! the complex-conjugate one whenever conjugation is not already a unitary
//! equivalence (it is for n = 1 mod 4, where the product of all observables
//! is real). The certified form is `U B_y U^dag = B'_y tensor 1` for all but
//! the last observable, and `B'_n tensor diag(1_{J+}, -1_{J-})` for the
//! last. The factorization is not unique; no uniqueness is claimed.

use crate::error::Error;
use crate::matrix::{ComplexMatrix, HermitianOperator};
use crate::optimal::{anticommutation_residual, canonical_matrices, min_qubits};
use crate::task::{
    check_parity_oblivious, classical_bound, quantum_bound, success_probability, BitString,
    MeasurementSet, ParityReport, PreparationEnsemble, Strategy,
};
use crate::tol::Tolerances;

/// A matrix cut into four equal blocks along the half-dimension.
#[derive(Clone, Debug)]
pub struct BlockSplit {
    pub top_left: ComplexMatrix,
    pub top_right: ComplexMatrix,
    pub bottom_left: ComplexMatrix,
    pub bottom_right: ComplexMatrix,
}

impl BlockSplit {
    pub fn split(m: &ComplexMatrix) -> Result<Self, Error> {
        let d = m.dim();
        if d % 2 != 0 {
            return Err(Error::DimensionNotDivisible { dim: d, factor: 2 });
        }
        let h = d / 2;
        let block =
            |ri: usize, ci: usize| ComplexMatrix::from_fn(h, |i, j| m.get(ri * h + i, ci * h + j));
        Ok(BlockSplit {
            top_left: block(0, 0),
            top_right: block(0, 1),
            bottom_left: block(1, 0),
            bottom_right: block(1, 1),
        })
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let h = self.top_left.dim();
        ComplexMatrix::from_fn(2 * h, |i, j| {
            let src = match (i / h, j / h) {
                (0, 0) => &self.top_left,
                (0, 1) => &self.top_right,
                (1, 0) => &self.bottom_left,
                _ => &self.bottom_right,
            };
            src.get(i % h, j % h)
        })
    }
}

/// Outcome of the certification: the extracted unitary, the reference forms
/// it maps to, the junk dimension, the sector split, and the residuals in
/// max-entry norm per observable.
#[derive(Clone, Debug)]
pub struct UnitaryFactorization {
    pub unitary: ComplexMatrix,
    /// Qubit count of the reference space, `ceil((n-1)/2)`.
    pub qubits: u32,
    /// Junk dimension J with `d = 2^qubits * J`.
    pub junk_dim: usize,
    /// `(J_+, J_-)`: junk-space multiplicities of the reference
    /// representation and its complex conjugate.
    pub sectors: (usize, usize),
    /// Canonical reference observables in dimension `2^qubits`.
    pub reference: Vec<ComplexMatrix>,
    /// `max |U B_y U^dag - target_y|` per observable.
    pub residuals: Vec<f64>,
    /// Number of two-observable elimination levels performed.
    pub depth: u32,
}

impl UnitaryFactorization {
    pub fn n(&self) -> u32 {
        self.reference.len() as u32
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `diag(1_{J+}, -1_{J-})` on the junk space.
    pub fn sector_matrix(&self) -> ComplexMatrix {
        let (plus, _minus) = self.sectors;
        ComplexMatrix::from_fn(self.junk_dim, |i, j| {
            if i != j {
                num_complex::Complex64::new(0.0, 0.0)
            } else if i < plus {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::new(-1.0, 0.0)
            }
        })
    }

    /// The certified targets `B'_y tensor 1_J`, with the sector matrix in
    /// place of the identity on the last observable (it is the identity
    /// whenever `J_- = 0`, in particular for even n).
    pub fn target_observables(&self) -> Vec<ComplexMatrix> {
        let id_junk = ComplexMatrix::identity(self.junk_dim);
        let last = self.reference.len() - 1;
        self.reference
            .iter()
            .enumerate()
            .map(|(k, r)| {
                if k == last {
                    r.tensor(&self.sector_matrix())
                } else {
                    r.tensor(&id_junk)
                }
            })
            .collect()
    }
}

/// Split eigenvalues into the +1 and -1 classes, rejecting anything outside
/// the classification bands.
fn classify_pm1(values: &[f64], band: f64) -> Result<(Vec<usize>, Vec<usize>), Error> {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if (v - 1.0).abs() <= band {
            plus.push(k);
        } else if (v + 1.0).abs() <= band {
            minus.push(k);
        } else {
            return Err(Error::NonDichotomic {
                detail: format!("eigenvalue {v} is outside the +/-1 bands (width {band:.1e})"),
            });
        }
    }
    Ok((plus, minus))
}

/// Eigenbasis rotation with +1 eigenvectors ordered first; returns the
/// rotation and the two multiplicities.
fn pm1_basis(
    op: &HermitianOperator,
    tols: &Tolerances,
) -> Result<(ComplexMatrix, usize, usize), Error> {
    let eig = op.eig()?;
    let (plus, minus) = classify_pm1(&eig.values, tols.eigen_classify)?;
    let d = op.dim();
    let order: Vec<usize> = plus.iter().chain(minus.iter()).copied().collect();
    let reordered = ComplexMatrix::from_fn(d, |i, j| eig.vectors.get(i, order[j]));
    Ok((reordered.adjoint(), plus.len(), minus.len()))
}

/// Rotate the first observable to `diag(1_{d/2}, -1_{d/2})`. Fails when the
/// spectrum is not +/-1 or the multiplicities differ (an unbalanced spectrum
/// admits no anticommuting partner).
pub fn diagonalizing_step(
    b1: &HermitianOperator,
    tols: &Tolerances,
) -> Result<(ComplexMatrix, usize), Error> {
    let (u1, plus, minus) = pm1_basis(b1, tols)?;
    if plus != minus {
        return Err(Error::UnbalancedSpectrum { plus, minus });
    }
    Ok((u1, plus))
}

/// Read the coupling block (top-right) of an observable expressed in the
/// basis where the first observable is `diag(1, -1) tensor 1`. The diagonal
/// blocks must vanish; they are half the anticommutator with the
/// diagonalized observable.
pub fn offdiagonal_block(
    rotated: &HermitianOperator,
    tols: &Tolerances,
) -> Result<ComplexMatrix, Error> {
    let blocks = BlockSplit::split(rotated.matrix())?;
    let leakage = blocks.top_left.max_abs().max(blocks.bottom_right.max_abs());
    if leakage > tols.anticommutation {
        return Err(Error::DiagonalLeakage { residual: leakage });
    }
    Ok(blocks.top_right)
}

/// Block unitary `diag(1, i X2)`. It leaves `diag(1, -1) tensor 1`
/// invariant and rotates the observable that produced `X2` onto
/// `sigma_y tensor 1`. `X2` must be unitary, which dichotomy forces.
pub fn second_step_unitary(x2: &ComplexMatrix, tols: &Tolerances) -> Result<ComplexMatrix, Error> {
    let residual = x2.unitarity_residual();
    if residual > tols.certification {
        return Err(Error::NonUnitaryBlock { residual });
    }
    let h = x2.dim();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let i_unit = num_complex::Complex64::new(0.0, 1.0);
    Ok(ComplexMatrix::from_fn(2 * h, |i, j| match (i < h, j < h) {
        (true, true) => {
            if i == j {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        }
        (false, false) => i_unit * x2.get(i - h, j - h),
        _ => zero,
    }))
}

/// Map the coupling blocks of the third and later observables down to the
/// half space: `R_y = -i X_y X2^dag`. Each result must stay Hermitian,
/// dichotomic, and pairwise anticommuting; indices in errors refer to
/// positions within `couplings`.
pub fn reduce_observables(
    couplings: &[ComplexMatrix],
    x2: &ComplexMatrix,
    tols: &Tolerances,
) -> Result<Vec<HermitianOperator>, Error> {
    let x2a = x2.adjoint();
    let minus_i = num_complex::Complex64::new(0.0, -1.0);
    let mut reduced = Vec::with_capacity(couplings.len());
    for (index, xy) in couplings.iter().enumerate() {
        let r = xy.mul(&x2a)?.scale(minus_i);
        let herm_residual = r.hermiticity_residual();
        if herm_residual > tols.hermiticity {
            return Err(Error::HermiticityLost {
                index,
                residual: herm_residual,
            });
        }
        let sq = r.mul(&r)?;
        let dich = sq.max_abs_diff(&ComplexMatrix::identity(r.dim()))?;
        if dich > tols.dichotomy {
            return Err(Error::NonDichotomic {
                detail: format!("reduced observable {index}: |R^2 - 1| = {dich:.3e}"),
            });
        }
        reduced.push(HermitianOperator::new_unchecked(r));
    }
    for a in 0..reduced.len() {
        for b in (a + 1)..reduced.len() {
            let residual = reduced[a].anticommutator(&reduced[b])?.matrix().max_abs();
            if residual > tols.anticommutation {
                return Err(Error::AnticommutationLost {
                    first: a,
                    second: b,
                    residual,
                });
            }
        }
    }
    Ok(reduced)
}

/// One level of the recursion; returns the accumulated unitary, the junk
/// dimension, the sector split, and the level count.
fn recurse(
    ops: &[ComplexMatrix],
    tols: &Tolerances,
) -> Result<(ComplexMatrix, usize, (usize, usize), u32), Error> {
    if ops.len() == 1 {
        // Terminal chirality operator: order its eigenbasis +1 first and
        // record the split.
        let op = HermitianOperator::new_unchecked(ops[0].clone());
        let (w, plus, minus) = pm1_basis(&op, tols)?;
        return Ok((w, ops[0].dim(), (plus, minus), 0));
    }
    let b1 = HermitianOperator::new_unchecked(ops[0].clone());
    let (u1, half) = diagonalizing_step(&b1, tols)?;
    let u1a = u1.adjoint();
    let mut couplings = Vec::with_capacity(ops.len() - 1);
    for b in &ops[1..] {
        let rotated = HermitianOperator::new_unchecked(u1.mul(b)?.mul(&u1a)?);
        couplings.push(offdiagonal_block(&rotated, tols)?);
    }
    let u2 = second_step_unitary(&couplings[0], tols)?;
    let u21 = u2.mul(&u1)?;
    if ops.len() == 2 {
        return Ok((u21, half, (half, 0), 1));
    }
    let reduced = reduce_observables(&couplings[1..], &couplings[0], tols)?;
    let inner: Vec<ComplexMatrix> = reduced.into_iter().map(|h| h.into_matrix()).collect();
    let (v, junk, sectors, depth) = recurse(&inner, tols)?;
    let u = ComplexMatrix::identity(2).tensor(&v).mul(&u21)?;
    Ok((u, junk, sectors, depth + 1))
}

/// Build the unitary mapping a measurement set onto the canonical reference
/// forms. Preconditions: n >= 2, the dimension is divisible by
/// `2^ceil((n-1)/2)`, and the observables pairwise anticommute within
/// tolerance.
pub fn extract_unitary(
    set: &MeasurementSet,
    tols: &Tolerances,
) -> Result<UnitaryFactorization, Error> {
    let n = set.n();
    if n < 2 {
        return Err(Error::UnsupportedN {
            n,
            reason: "extraction requires n >= 2".into(),
        });
    }
    let qubits = min_qubits(n);
    let min_dim = 1usize << qubits;
    let d = set.dim();
    if d % min_dim != 0 {
        return Err(Error::DimensionNotDivisible {
            dim: d,
            factor: min_dim,
        });
    }
    let obs = set.observables();
    for y in 0..obs.len() {
        for z in (y + 1)..obs.len() {
            let residual = anticommutation_residual(&obs[y], &obs[z])?;
            if residual > tols.anticommutation {
                return Err(Error::AnticommutationLost {
                    first: y + 1,
                    second: z + 1,
                    residual,
                });
            }
        }
    }

    let ops: Vec<ComplexMatrix> = obs.iter().map(|o| o.matrix().clone()).collect();
    let (unitary, junk_dim, sectors, depth) = recurse(&ops, tols)?;
    debug_assert_eq!(junk_dim, d / min_dim);

    let mut fact = UnitaryFactorization {
        unitary,
        qubits,
        junk_dim,
        sectors,
        reference: canonical_matrices(n),
        residuals: Vec::new(),
        depth,
    };
    let ua = fact.unitary.adjoint();
    let targets = fact.target_observables();
    for (b, target) in ops.iter().zip(&targets) {
        let mapped = fact.unitary.mul(b)?.mul(&ua)?;
        fact.residuals.push(mapped.max_abs_diff(target)?);
    }
    Ok(fact)
}

/// Residual of each state against its reference image
/// `(1 + sum_y (-1)^{x_y} target_y / sqrt(n)) / d`, i.e. the sector-aware
/// form of `rho'_x tensor 1_J / J`.
pub fn certify_states(
    prep: &PreparationEnsemble,
    fact: &UnitaryFactorization,
) -> Result<Vec<f64>, Error> {
    let n = prep.n();
    if n != fact.n() {
        return Err(Error::DimensionMismatch {
            left: n as usize,
            right: fact.n() as usize,
        });
    }
    let d = prep.dim();
    if d != fact.unitary.dim() {
        return Err(Error::DimensionMismatch {
            left: d,
            right: fact.unitary.dim(),
        });
    }
    let targets = fact.target_observables();
    let ua = fact.unitary.adjoint();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut residuals = Vec::with_capacity(1usize << n);
    for x in BitString::all(n) {
        let mut bias = ComplexMatrix::zeros(d);
        for y in 1..=n {
            let sign = if x.bit(y) == 0 { 1.0 } else { -1.0 };
            bias = bias.add(&targets[(y - 1) as usize].scale_re(sign))?;
        }
        let reference_state = ComplexMatrix::identity(d)
            .add(&bias.scale_re(inv_sqrt_n))?
            .scale_re(1.0 / d as f64);
        let mapped = fact.unitary.mul(prep.state(x.delta()).matrix())?.mul(&ua)?;
        residuals.push(mapped.max_abs_diff(&reference_state)?);
    }
    Ok(residuals)
}

/// Pass/fail per stage of the certification pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertificationChecks {
    /// Success probability reaches the quantum bound within the margin.
    pub success: bool,
    /// Parity-obliviousness residual within tolerance.
    pub parity: bool,
    /// Pairwise anticommutation residuals within tolerance.
    pub anticommutation: bool,
    /// Extraction succeeded with residuals within tolerance.
    pub extraction: bool,
    /// State-map residuals within tolerance.
    pub states: bool,
}

/// Everything `certify` measures. Failures never raise; they land here.
#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub n: u32,
    pub dim: usize,
    pub label: String,
    pub success_probability: f64,
    pub classical_bound: f64,
    pub quantum_bound: f64,
    pub parity: ParityReport,
    /// Off-diagonal: max entry of the pairwise anticommutator. Diagonal:
    /// max entry of |B_y^2 - 1| (dichotomy drift).
    pub anticommutation_residuals: Vec<Vec<f64>>,
    pub max_anticommutation_residual: f64,
    pub extraction: Option<UnitaryFactorization>,
    pub extraction_error: Option<String>,
    pub state_residuals: Option<Vec<f64>>,
    pub max_state_residual: Option<f64>,
    pub checks: CertificationChecks,
    pub pass: bool,
}

impl CertificationReport {
    /// One line per stage, for terminal output.
    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        lines.push(format!(
            "strategy `{}`: n = {}, d = {}",
            self.label, self.n, self.dim
        ));
        lines.push(format!(
            "  success probability {:.10} vs quantum bound {:.10} (classical {:.10}): {}",
            self.success_probability,
            self.quantum_bound,
            self.classical_bound,
            mark(self.checks.success)
        ));
        lines.push(format!(
            "  parity-obliviousness residual {:.3e}: {}",
            self.parity.max_residual,
            mark(self.checks.parity)
        ));
        lines.push(format!(
            "  anticommutation residual {:.3e}: {}",
            self.max_anticommutation_residual,
            mark(self.checks.anticommutation)
        ));
        match (&self.extraction, &self.extraction_error) {
            (Some(fact), _) => lines.push(format!(
                "  extraction residual {:.3e}, J = {}, sectors (J+, J-) = ({}, {}): {}",
                fact.max_residual(),
                fact.junk_dim,
                fact.sectors.0,
                fact.sectors.1,
                mark(self.checks.extraction)
            )),
            (None, Some(err)) => lines.push(format!("  extraction failed: {err}: FAIL")),
            (None, None) => lines.push("  extraction skipped".into()),
        }
        match self.max_state_residual {
            Some(r) => lines.push(format!(
                "  state-map residual {:.3e}: {}",
                r,
                mark(self.checks.states)
            )),
            None => lines.push("  state map not evaluated".into()),
        }
        lines.push(format!(
            "  overall: {}",
            if self.pass { "PASS" } else { "FAIL" }
        ));
        lines.join("\n")
    }
}

/// Full pipeline: score, bound comparison, parity check, anticommutation
/// matrix, unitary extraction, state mapping. States are certified only
/// after measurement extraction succeeds.
pub fn certify(strategy: &Strategy, tols: &Tolerances) -> CertificationReport {
    let n = strategy.n();
    let score = success_probability(strategy);
    let cb = classical_bound(n)
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .unwrap_or(f64::NAN);
    let qb = quantum_bound(n).unwrap_or(f64::NAN);
    let parity = check_parity_oblivious(strategy.preparations(), tols.parity)
        .expect("strategy invariants guarantee n >= 2");

    let obs = strategy.measurements().observables();
    let count = obs.len();
    let mut anticommutation_residuals = vec![vec![0.0; count]; count];
    let mut max_off = 0.0f64;
    for y in 0..count {
        anticommutation_residuals[y][y] = obs[y].squared_identity_residual();
        for z in (y + 1)..count {
            let r = anticommutation_residual(&obs[y], &obs[z]).expect("matching dimensions");
            anticommutation_residuals[y][z] = r;
            anticommutation_residuals[z][y] = r;
            max_off = max_off.max(r);
        }
    }

    let anticommutation_ok = max_off <= tols.anticommutation;
    let (extraction, extraction_error) = match extract_unitary(strategy.measurements(), tols) {
        Ok(fact) => (Some(fact), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let extraction_ok = extraction
        .as_ref()
        .map(|f| f.max_residual() <= tols.certification)
        .unwrap_or(false);

    let (state_residuals, max_state_residual) = match &extraction {
        Some(fact) => match certify_states(strategy.preparations(), fact) {
            Ok(residuals) => {
                let max = residuals.iter().copied().fold(0.0, f64::max);
                (Some(residuals), Some(max))
            }
            Err(_) => (None, None),
        },
        None => (None, None),
    };
    let states_ok = max_state_residual
        .map(|r| r <= tols.certification)
        .unwrap_or(false);

    let checks = CertificationChecks {
        success: score >= qb - tols.score_margin,
        parity: parity.pass,
        anticommutation: anticommutation_ok,
        extraction: extraction_ok,
        states: states_ok,
    };
    let pass = checks.success
        && checks.parity
        && checks.anticommutation
        && checks.extraction
        && checks.states;

    CertificationReport {
        n,
        dim: strategy.dim(),
        label: strategy.label().to_string(),
        success_probability: score,
        classical_bound: cb,
        quantum_bound: qb,
        parity,
        anticommutation_residuals,
        max_anticommutation_residual: max_off,
        extraction,
        extraction_error,
        state_residuals,
        max_state_residual,
        checks,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DichotomicObservable;
    use crate::optimal::{
        canonical_observables, optimal_preparations, optimal_strategy, random_unitary, scramble,
    };
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn herm(m: ComplexMatrix) -> HermitianOperator {
        HermitianOperator::new_unchecked(m)
    }

    fn obs(m: ComplexMatrix) -> DichotomicObservable {
        DichotomicObservable::new(herm(m), 1e-9).unwrap()
    }

    #[test]
    fn block_split_round_trip() {
        let m = ComplexMatrix::from_fn(4, |i, j| c((4 * i + j) as f64, (i as f64) - (j as f64)));
        let blocks = BlockSplit::split(&m).unwrap();
        assert_eq!(blocks.reassemble(), m);
        assert!(BlockSplit::split(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn diagonalizing_step_cases() {
        let t = tols();
        // already diagonal with +1 block first: residual 0
        let b1 = ComplexMatrix::pauli_z().tensor(&ComplexMatrix::identity(2));
        let (u1, half) = diagonalizing_step(&herm(b1.clone()), &t).unwrap();
        assert_eq!(half, 2);
        let rotated = u1.mul(&b1).unwrap().mul(&u1.adjoint()).unwrap();
        assert!(rotated.max_abs_diff(&b1).unwrap() <= 1e-12);

        // sigma_x rotates onto sigma_z; oracle via its known eigensystem
        let (u1, _) = diagonalizing_step(&herm(ComplexMatrix::pauli_x()), &t).unwrap();
        let rotated = u1
            .mul(&ComplexMatrix::pauli_x())
            .unwrap()
            .mul(&u1.adjoint())
            .unwrap();
        assert!(rotated.max_abs_diff(&ComplexMatrix::pauli_z()).unwrap() <= 1e-12);

        // unbalanced spectrum: diag(1, 1, 1, -1)
        let unbalanced = ComplexMatrix::from_fn(4, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i < 3 {
                c(1.0, 0.0)
            } else {
                c(-1.0, 0.0)
            }
        });
        match diagonalizing_step(&herm(unbalanced), &t) {
            Err(Error::UnbalancedSpectrum { plus, minus }) => {
                assert_eq!((plus, minus), (3, 1));
            }
            other => panic!("expected UnbalancedSpectrum, got {other:?}"),
        }

        // spectrum away from +/-1
        let stretched = ComplexMatrix::pauli_z().scale_re(1.5);
        assert!(matches!(
            diagonalizing_step(&herm(stretched), &t),
            Err(Error::NonDichotomic { .. })
        ));
    }

    #[test]
    fn offdiagonal_block_cases() {
        let t = tols();
        let x = offdiagonal_block(&herm(ComplexMatrix::pauli_x()), &t).unwrap();
        assert_eq!(x.dim(), 1);
        assert_eq!(x.get(0, 0), c(1.0, 0.0));

        let x = offdiagonal_block(&herm(ComplexMatrix::pauli_y()), &t).unwrap();
        assert_eq!(x.get(0, 0), c(0.0, -1.0));

        // sigma_x tensor sigma_z: coupling block sigma_z
        let m = ComplexMatrix::pauli_x().tensor(&ComplexMatrix::pauli_z());
        let x = offdiagonal_block(&herm(m), &t).unwrap();
        assert_eq!(x, ComplexMatrix::pauli_z());

        // anything with diagonal blocks leaks
        let leaky = ComplexMatrix::pauli_z().tensor(&ComplexMatrix::identity(2));
        assert!(matches!(
            offdiagonal_block(&herm(leaky), &t),
            Err(Error::DiagonalLeakage { .. })
        ));
    }

    #[test]
    fn second_step_unitary_cases() {
        let t = tols();
        // X2 = 1: maps the sigma_x-form onto sigma_y tensor 1
        let u2 = second_step_unitary(&ComplexMatrix::identity(2), &t).unwrap();
        let b2 = ComplexMatrix::pauli_x().tensor(&ComplexMatrix::identity(2));
        let rotated = u2.mul(&b2).unwrap().mul(&u2.adjoint()).unwrap();
        let expected = ComplexMatrix::pauli_y().tensor(&ComplexMatrix::identity(2));
        assert!(rotated.max_abs_diff(&expected).unwrap() <= 1e-12);
        // and leaves the diagonalized observable invariant
        let b1 = ComplexMatrix::pauli_z().tensor(&ComplexMatrix::identity(2));
        let fixed = u2.mul(&b1).unwrap().mul(&u2.adjoint()).unwrap();
        assert!(fixed.max_abs_diff(&b1).unwrap() <= 1e-12);

        // X2 = -i (from sigma_y itself): sigma_y stays sigma_y
        let u2 = second_step_unitary(&ComplexMatrix::scalar(c(0.0, -1.0)), &t).unwrap();
        let rotated = u2
            .mul(&ComplexMatrix::pauli_y())
            .unwrap()
            .mul(&u2.adjoint())
            .unwrap();
        assert!(rotated.max_abs_diff(&ComplexMatrix::pauli_y()).unwrap() <= 1e-12);

        // non-unitary block
        let bad = ComplexMatrix::from_fn(2, |i, j| {
            if i == j {
                c(if i == 0 { 1.0 } else { 0.5 }, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(matches!(
            second_step_unitary(&bad, &t),
            Err(Error::NonUnitaryBlock { .. })
        ));
    }

    #[test]
    fn reduction_of_canonical_sets() {
        let t = tols();
        // canonical n=5 reduces to canonical n=3 on the half space
        let c5 = canonical_observables(5).unwrap();
        let couplings: Vec<ComplexMatrix> = c5.set().observables()[1..]
            .iter()
            .map(|o| offdiagonal_block(o.op(), &t).unwrap())
            .collect();
        let reduced = reduce_observables(&couplings[1..], &couplings[0], &t).unwrap();
        let c3 = canonical_matrices(3);
        for (r, want) in reduced.iter().zip(&c3) {
            assert!(r.matrix().max_abs_diff(want).unwrap() <= 1e-14);
        }

        // canonical n=3 reduces to the single scalar +1
        let c3set = canonical_observables(3).unwrap();
        let couplings: Vec<ComplexMatrix> = c3set.set().observables()[1..]
            .iter()
            .map(|o| offdiagonal_block(o.op(), &t).unwrap())
            .collect();
        let reduced = reduce_observables(&couplings[1..], &couplings[0], &t).unwrap();
        assert_eq!(reduced.len(), 1);
        assert_eq!(reduced[0].dim(), 1);
        assert!((reduced[0].matrix().get(0, 0) - c(1.0, 0.0)).norm() <= 1e-14);

        // lost hermiticity is caught: -i sigma_z I is anti-Hermitian
        let x2 = ComplexMatrix::identity(2);
        assert!(matches!(
            reduce_observables(&[ComplexMatrix::pauli_z()], &x2, &t),
            Err(Error::HermiticityLost { .. })
        ));

        // violated anticommutation is caught: both blocks reduce to sigma_z
        let izet = ComplexMatrix::pauli_z().scale(c(0.0, 1.0));
        assert!(matches!(
            reduce_observables(&[izet.clone(), izet], &x2, &t),
            Err(Error::AnticommutationLost { .. })
        ));
    }

    #[test]
    fn extraction_fixed_point() {
        let t = tols();
        let set = canonical_observables(3).unwrap().into_set();
        let fact = extract_unitary(&set, &t).unwrap();
        assert_eq!(fact.qubits, 1);
        assert_eq!(fact.junk_dim, 1);
        assert_eq!(fact.sectors, (1, 0));
        assert_eq!(fact.depth, 1);
        assert!(fact.max_residual() <= 1e-14);
        assert!(fact.unitary.is_unitary(1e-10));
    }

    #[test]
    fn extraction_detects_conjugate_representation() {
        let t = tols();
        let set = MeasurementSet::new(
            3,
            vec![
                obs(ComplexMatrix::pauli_z()),
                obs(ComplexMatrix::pauli_y()),
                obs(ComplexMatrix::pauli_x().scale_re(-1.0)),
            ],
        )
        .unwrap();
        let fact = extract_unitary(&set, &t).unwrap();
        assert_eq!(fact.sectors, (0, 1));
        assert!(fact.max_residual() <= 1e-14);

        // flipping the reported sector strictly breaks the last target
        let flipped = fact.reference[2].tensor(&fact.sector_matrix().scale_re(-1.0));
        let mapped = fact
            .unitary
            .mul(set.observable(3).matrix())
            .unwrap()
            .mul(&fact.unitary.adjoint())
            .unwrap();
        assert!(mapped.max_abs_diff(&flipped).unwrap() >= 1.0);
    }

    #[test]
    fn extraction_round_trips_scrambles() {
        let t = tols();
        for n in 2..=5u32 {
            let base = optimal_strategy(n, &t).unwrap();
            for junk in 1..=2usize {
                let (scrambled, _) = scramble(&base, junk, 1000 + n as u64, &t).unwrap();
                let fact = extract_unitary(scrambled.measurements(), &t).unwrap();
                assert_eq!(fact.junk_dim, junk, "n = {n}");
                assert_eq!(fact.sectors, (junk, 0), "n = {n}");
                assert_eq!(fact.depth, min_qubits(n), "n = {n}");
                assert!(fact.unitary.unitarity_residual() <= 1e-10);
                assert!(
                    fact.max_residual() <= 1e-8,
                    "n = {n}: {}",
                    fact.max_residual()
                );
                let residuals = certify_states(scrambled.preparations(), &fact).unwrap();
                let max = residuals.iter().copied().fold(0.0, f64::max);
                assert!(max <= 1e-8, "n = {n}: state residual {max}");
            }
        }
    }

    #[test]
    fn extraction_rejects_bad_dimension_and_bad_sets() {
        let t = tols();
        // n = 4 needs a dimension divisible by 4; six is not
        let balanced6 = ComplexMatrix::from_fn(6, |i, j| {
            if i == j {
                c(if i < 3 { 1.0 } else { -1.0 }, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let set = MeasurementSet::new(4, vec![obs(balanced6); 4]).unwrap();
        assert!(matches!(
            extract_unitary(&set, &t),
            Err(Error::DimensionNotDivisible { .. })
        ));

        // duplicated observable: anticommutation precondition fails
        let set = MeasurementSet::new(
            2,
            vec![obs(ComplexMatrix::pauli_z()), obs(ComplexMatrix::pauli_z())],
        )
        .unwrap();
        assert!(matches!(
            extract_unitary(&set, &t),
            Err(Error::AnticommutationLost { .. })
        ));
    }

    #[test]
    fn junk_with_unequal_sectors_is_handled() {
        // three anticommuting observables in d = 6 carry one reference copy
        // and two conjugate copies (or vice versa); extraction succeeds with
        // an unbalanced terminal split
        let t = tols();
        let id3 = ComplexMatrix::identity(3);
        let b1 = ComplexMatrix::pauli_z().tensor(&id3);
        let b2 = ComplexMatrix::pauli_y().tensor(&id3);
        let chirality = ComplexMatrix::from_fn(3, |i, j| {
            if i == j {
                c(if i == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let b3 = ComplexMatrix::pauli_x().tensor(&chirality);
        let set = MeasurementSet::new(3, vec![obs(b1), obs(b2), obs(b3)]).unwrap();
        let fact = extract_unitary(&set, &t).unwrap();
        assert_eq!(fact.junk_dim, 3);
        assert_eq!(fact.sectors, (1, 2));
        assert!(fact.max_residual() <= 1e-12);
    }

    #[test]
    fn state_certification_flags_wrong_states() {
        let t = tols();
        let set = canonical_observables(2).unwrap().into_set();
        let fact = extract_unitary(&set, &t).unwrap();
        // maximally mixed states: residual is exactly the bias scale 1/(d sqrt(n))
        let mixed = PreparationEnsemble::new(
            2,
            vec![herm(ComplexMatrix::identity(2).scale_re(0.5)); 4],
            &t,
        )
        .unwrap();
        let residuals = certify_states(&mixed, &fact).unwrap();
        let expected = 1.0 / (2.0 * 2.0f64.sqrt());
        for r in residuals {
            assert!((r - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn certify_passes_scrambled_optimal_and_fails_classical() {
        let t = tols();
        let base = optimal_strategy(4, &t).unwrap();
        let (scrambled, _) = scramble(&base, 2, 5, &t).unwrap();
        let report = certify(&scrambled, &t);
        assert!(report.pass, "{}", report.summary());
        assert!((report.success_probability - 0.75).abs() <= 1e-10);
        assert_eq!(report.extraction.as_ref().unwrap().sectors, (2, 0));

        // deterministic classical strategy embedded as diagonal matrices
        let zero = herm(ComplexMatrix::from_fn(2, |i, j| {
            if i == 0 && j == 0 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }));
        let states = vec![zero.clone(), zero.clone(), zero.clone(), zero];
        let prep = PreparationEnsemble::new(2, states, &t).unwrap();
        let meas = MeasurementSet::new(
            2,
            vec![obs(ComplexMatrix::pauli_z()), obs(ComplexMatrix::pauli_z())],
        )
        .unwrap();
        let classical = Strategy::new(prep, meas, "classical").unwrap();
        let report = certify(&classical, &t);
        assert!(!report.pass);
        assert!(!report.checks.anticommutation);
        assert!((report.max_anticommutation_residual - 2.0).abs() <= 1e-12);
        assert!(report.success_probability <= 0.75 + 1e-12);
    }

    #[test]
    fn certify_fails_monotonically_under_perturbation() {
        let t = tols();
        let base = optimal_strategy(3, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = ComplexMatrix::from_fn(2, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let sigma_raw = herm(g.add(&g.adjoint()).unwrap().scale_re(0.5));
        let norm = sigma_raw.operator_norm().unwrap();
        let sigma = sigma_raw.matrix().scale_re(1.0 / norm);

        let residual_at = |eps: f64| -> (f64, bool) {
            let perturbed_matrix = base
                .measurements()
                .observable(1)
                .matrix()
                .add(&sigma.scale_re(eps))
                .unwrap();
            // loose structural gate so the drift lands in the report
            let perturbed = DichotomicObservable::new(herm(perturbed_matrix), 10.0).unwrap();
            let mut observables = base.measurements().observables().to_vec();
            observables[0] = perturbed;
            let meas = MeasurementSet::new(3, observables).unwrap();
            let strategy = Strategy::new(base.preparations().clone(), meas, "perturbed").unwrap();
            let report = certify(&strategy, &t);
            (report.max_anticommutation_residual, report.pass)
        };

        let (r3, pass3) = residual_at(1e-3);
        let (r5, pass5) = residual_at(1e-5);
        assert!(!pass3 && !pass5);
        // residual scales linearly with the perturbation
        let ratio = r3 / r5;
        assert!((30.0..300.0).contains(&ratio), "ratio {ratio}");
        assert!(r5 > t.anticommutation);
    }

    #[test]
    fn mixed_sector_direct_sums_split_correctly() {
        let t = tols();
        // direct sum of one reference copy and two conjugate copies, n = 3
        let (j_plus, j_minus) = (1usize, 2usize);
        let d = 2 * (j_plus + j_minus);
        let reference = canonical_matrices(3);
        let build = |k: usize| -> ComplexMatrix {
            let std_block = reference[k].tensor(&ComplexMatrix::identity(j_plus));
            let conj_block = reference[k]
                .conj()
                .tensor(&ComplexMatrix::identity(j_minus));
            let mut m = ComplexMatrix::zeros(d);
            let off = 2 * j_plus;
            for i in 0..2 * j_plus {
                for j in 0..2 * j_plus {
                    m.set(i, j, std_block.get(i, j));
                }
            }
            for i in 0..2 * j_minus {
                for j in 0..2 * j_minus {
                    m.set(off + i, off + j, conj_block.get(i, j));
                }
            }
            m
        };
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let u = random_unitary(d, &mut rng);
        let ua = u.adjoint();
        let observables: Vec<DichotomicObservable> = (0..3)
            .map(|k| obs(u.mul(&build(k)).unwrap().mul(&ua).unwrap()))
            .collect();
        let set = MeasurementSet::new(3, observables).unwrap();
        let fact = extract_unitary(&set, &t).unwrap();
        assert_eq!(fact.junk_dim, j_plus + j_minus);
        assert_eq!(fact.sectors, (j_plus, j_minus));
        assert!(fact.max_residual() <= 1e-8, "{}", fact.max_residual());

        // the matching ensemble certifies against the sector-signed targets
        let prep = optimal_preparations(&set, &t).unwrap();
        let residuals = certify_states(&prep, &fact).unwrap();
        let max = residuals.iter().copied().fold(0.0, f64::max);
        assert!(max <= 1e-8, "state residual {max}");

        // and the scores still sit at the bound
        let strategy = Strategy::new(prep, set, "mixed-sector").unwrap();
        let score = success_probability(&strategy);
        assert!((score - quantum_bound(3).unwrap()).abs() <= 1e-10);
    }
}
