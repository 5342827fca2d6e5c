//! The n-bit parity-oblivious multiplexing game: bit strings, parity sets,
//! strategies, the obliviousness checker, and the success functional.
//!
//! Conventions fixed here and used everywhere else:
//!
//! - Bit strings are indexed big-endian: bit 1 is the leftmost and most
//!   significant, so `delta = 0` is `00..00` and `delta = 2^n - 1` is
//!   `11..11`.
//! - The receiver's outcome bit `b` in {0, 1} corresponds to the projector
//!   `(1 + (-1)^b B) / 2`; the game is won when `b` equals the requested bit.
//! - Residuals are max-entry norms.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::Error;
use crate::matrix::{pairwise_sum, ComplexMatrix, DichotomicObservable, HermitianOperator};
use crate::tol::Tolerances;

/// An n-bit string together with its decimal index.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    n: u32,
    delta: u64,
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({})", self)
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for y in 1..=self.n {
            write!(f, "{}", self.bit(y))?;
        }
        Ok(())
    }
}

impl BitString {
    pub fn new(n: u32, delta: u64) -> Result<Self, Error> {
        if n == 0 || n > 32 {
            return Err(Error::UnsupportedN {
                n,
                reason: "bit strings support 1 <= n <= 32".into(),
            });
        }
        if delta >= (1u64 << n) {
            return Err(Error::InvalidArgument(format!(
                "delta {delta} out of range for n = {n}"
            )));
        }
        Ok(BitString { n, delta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    /// Bit at position `y` (1-indexed, big-endian).
    pub fn bit(&self, y: u32) -> u8 {
        assert!(y >= 1 && y <= self.n, "bit index out of range");
        ((self.delta >> (self.n - y)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.n).map(|y| self.bit(y)).collect()
    }

    pub fn weight(&self) -> u32 {
        self.delta.count_ones()
    }

    /// Bitwise complement (same length).
    pub fn complement(&self) -> Self {
        BitString {
            n: self.n,
            delta: self.delta ^ ((1u64 << self.n) - 1),
        }
    }

    /// Decimal index of the bitwise complement.
    pub fn delta_bar(&self) -> u64 {
        self.complement().delta
    }

    /// Parity of the bitwise AND: `xor_y (x_y s_y)`.
    pub fn dot(&self, s: &BitString) -> Result<u8, Error> {
        self.check_n(s)?;
        Ok(((self.delta & s.delta).count_ones() & 1) as u8)
    }

    pub fn hamming(&self, other: &BitString) -> Result<u32, Error> {
        self.check_n(other)?;
        Ok((self.delta ^ other.delta).count_ones())
    }

    fn check_n(&self, other: &BitString) -> Result<(), Error> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n as usize,
                right: other.n as usize,
            });
        }
        Ok(())
    }

    /// All strings of length n in delta order.
    pub fn all(n: u32) -> impl Iterator<Item = BitString> {
        (0..(1u64 << n)).map(move |delta| BitString { n, delta })
    }
}

/// The set of parity strings: all n-bit strings of Hamming weight >= 2,
/// one obliviousness constraint each.
#[derive(Clone, Debug)]
pub struct ParitySet {
    n: u32,
    members: Vec<BitString>,
}

impl ParitySet {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// All weight->=2 strings of length n, sorted by delta. The game degenerates
/// for n < 2 (no constraint exists), so that is rejected.
pub fn parity_set(n: u32) -> Result<ParitySet, Error> {
    if n < 2 {
        return Err(Error::UnsupportedN {
            n,
            reason: "the parity set is empty for n < 2".into(),
        });
    }
    if n > 24 {
        return Err(Error::UnsupportedN {
            n,
            reason: "parity-set enumeration capped at n = 24".into(),
        });
    }
    let members = BitString::all(n).filter(|x| x.weight() >= 2).collect();
    Ok(ParitySet { n, members })
}

/// The 2^n density matrices of a sender strategy, indexed by delta.
#[derive(Clone, Debug)]
pub struct PreparationEnsemble {
    n: u32,
    dim: usize,
    states: Vec<HermitianOperator>,
}

impl PreparationEnsemble {
    /// Validate and wrap: 2^n states of equal dimension, each with unit trace
    /// and no eigenvalue below `-tols.state`.
    pub fn new(n: u32, states: Vec<HermitianOperator>, tols: &Tolerances) -> Result<Self, Error> {
        if n == 0 || n > 32 {
            return Err(Error::UnsupportedN {
                n,
                reason: "preparation ensembles support 1 <= n <= 32".into(),
            });
        }
        let expected = 1usize << n;
        if states.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} states for n = {n}, got {}",
                states.len()
            )));
        }
        let dim = states[0].dim();
        for (delta, rho) in states.iter().enumerate() {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: rho.dim(),
                });
            }
            let trace = rho.matrix().trace();
            if (trace - Complex64::new(1.0, 0.0)).norm() > tols.state * dim as f64 {
                return Err(Error::StateInvalid {
                    delta: delta as u64,
                    detail: format!("trace {:.6} + {:.3e}i is not 1", trace.re, trace.im),
                });
            }
            let eig = rho.eig()?;
            let min = eig.values.first().copied().unwrap_or(0.0);
            if min < -tols.state {
                return Err(Error::StateInvalid {
                    delta: delta as u64,
                    detail: format!("not positive semidefinite (min eigenvalue {min:.3e})"),
                });
            }
        }
        Ok(PreparationEnsemble { n, dim, states })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[HermitianOperator] {
        &self.states
    }

    pub fn state(&self, delta: u64) -> &HermitianOperator {
        &self.states[delta as usize]
    }
}

/// The receiver's n dichotomic observables in a common dimension.
#[derive(Clone, Debug)]
pub struct MeasurementSet {
    n: u32,
    dim: usize,
    observables: Vec<DichotomicObservable>,
}

impl MeasurementSet {
    pub fn new(n: u32, observables: Vec<DichotomicObservable>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::UnsupportedN {
                n,
                reason: "a measurement set needs at least one observable".into(),
            });
        }
        if observables.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "expected {n} observables, got {}",
                observables.len()
            )));
        }
        let dim = observables[0].dim();
        for obs in &observables {
            if obs.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: obs.dim(),
                });
            }
        }
        Ok(MeasurementSet {
            n,
            dim,
            observables,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observables(&self) -> &[DichotomicObservable] {
        &self.observables
    }

    /// Observable for question `y` (1-indexed).
    pub fn observable(&self, y: u32) -> &DichotomicObservable {
        &self.observables[(y - 1) as usize]
    }
}

/// A full strategy: preparations plus measurements in matching dimension.
#[derive(Clone, Debug)]
pub struct Strategy {
    preparations: PreparationEnsemble,
    measurements: MeasurementSet,
    label: String,
}

impl Strategy {
    pub fn new(
        preparations: PreparationEnsemble,
        measurements: MeasurementSet,
        label: impl Into<String>,
    ) -> Result<Self, Error> {
        if preparations.n() != measurements.n() {
            return Err(Error::DimensionMismatch {
                left: preparations.n() as usize,
                right: measurements.n() as usize,
            });
        }
        if preparations.dim() != measurements.dim() {
            return Err(Error::DimensionMismatch {
                left: preparations.dim(),
                right: measurements.dim(),
            });
        }
        Ok(Strategy {
            preparations,
            measurements,
            label: label.into(),
        })
    }

    pub fn n(&self) -> u32 {
        self.preparations.n()
    }

    pub fn dim(&self) -> usize {
        self.preparations.dim()
    }

    pub fn preparations(&self) -> &PreparationEnsemble {
        &self.preparations
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.measurements
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Projector onto the outcome-`b` eigenspace: `(1 + (-1)^b B) / 2`.
pub fn projector(b: u8, obs: &DichotomicObservable) -> HermitianOperator {
    assert!(b <= 1, "outcome bit must be 0 or 1");
    let sign = if b == 0 { 1.0 } else { -1.0 };
    let m = ComplexMatrix::identity(obs.dim())
        .add(&obs.matrix().scale_re(sign))
        .expect("same dimension")
        .scale_re(0.5);
    HermitianOperator::new_unchecked(m)
}

/// Residual of one obliviousness constraint and the report over all of them.
#[derive(Clone, Debug)]
pub struct ParityResidual {
    pub s: BitString,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ParityReport {
    pub tolerance: f64,
    pub max_residual: f64,
    pub per_parity: Vec<ParityResidual>,
    pub pass: bool,
}

/// For each parity string s, compare the summed states over the two classes
/// `x . s = 0` and `x . s = 1` in max-entry norm.
pub fn check_parity_oblivious(prep: &PreparationEnsemble, tol: f64) -> Result<ParityReport, Error> {
    let n = prep.n();
    let set = parity_set(n)?;
    let dim = prep.dim();
    let mut per_parity = Vec::with_capacity(set.len());
    let mut max_residual: f64 = 0.0;
    for s in set.members() {
        let mut even = ComplexMatrix::zeros(dim);
        let mut odd = ComplexMatrix::zeros(dim);
        for x in BitString::all(n) {
            let side = if x.dot(s)? == 0 { &mut even } else { &mut odd };
            *side = side.add(prep.state(x.delta()).matrix())?;
        }
        let residual = even.max_abs_diff(&odd)?;
        max_residual = max_residual.max(residual);
        per_parity.push(ParityResidual { s: *s, residual });
    }
    Ok(ParityReport {
        tolerance: tol,
        max_residual,
        per_parity,
        pass: max_residual <= tol,
    })
}

/// Average winning probability of a strategy:
/// `(1 / (2^n n)) sum_{delta, y} Tr[rho_delta P_y^{x_y}]`.
///
/// Terms are accumulated in (delta, y) order with pairwise summation, so the
/// result is bit-stable across runs.
pub fn success_probability(strategy: &Strategy) -> f64 {
    let n = strategy.n();
    let prep = strategy.preparations();
    let meas = strategy.measurements();
    // Projectors for both outcomes of every question, built once.
    let projectors: Vec<[HermitianOperator; 2]> = (1..=n)
        .map(|y| {
            let obs = meas.observable(y);
            [projector(0, obs), projector(1, obs)]
        })
        .collect();
    let mut terms = Vec::with_capacity((1usize << n) * n as usize);
    for x in BitString::all(n) {
        let rho = prep.state(x.delta());
        for y in 1..=n {
            let pi = &projectors[(y - 1) as usize][x.bit(y) as usize];
            let p = rho
                .matrix()
                .trace_product(pi.matrix())
                .expect("matching dimensions")
                .re;
            terms.push(p);
        }
    }
    pairwise_sum(&terms) / ((1u64 << n) as f64 * n as f64)
}

/// Optimal classical (preparation-noncontextual) success probability,
/// `(1 + 1/n) / 2`, as an exact rational.
pub fn classical_bound(n: u32) -> Result<Ratio<i64>, Error> {
    if n < 2 {
        return Err(Error::UnsupportedN {
            n,
            reason: "the game requires n >= 2".into(),
        });
    }
    Ok(Ratio::new(n as i64 + 1, 2 * n as i64))
}

/// Optimal quantum success probability, `(1 + 1/sqrt(n)) / 2`.
pub fn quantum_bound(n: u32) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::UnsupportedN {
            n,
            reason: "the game requires n >= 2".into(),
        });
    }
    Ok(0.5 * (1.0 + 1.0 / (n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit_state(a: Complex64, b: Complex64) -> HermitianOperator {
        // |psi><psi| for psi = (a, b), assumed normalized.
        let m = ComplexMatrix::from_fn(2, |i, j| {
            let v = [a, b];
            v[i] * v[j].conj()
        });
        HermitianOperator::new_unchecked(m)
    }

    fn maximally_mixed(dim: usize) -> HermitianOperator {
        HermitianOperator::new_unchecked(ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64))
    }

    fn sz_obs() -> DichotomicObservable {
        DichotomicObservable::new(
            HermitianOperator::new_unchecked(ComplexMatrix::pauli_z()),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn bitstring_conventions() {
        // delta = 1 is 00..01: last bit set.
        let x = BitString::new(3, 1).unwrap();
        assert_eq!(x.bits(), vec![0, 0, 1]);
        assert_eq!(x.to_string(), "001");
        assert_eq!(x.bit(3), 1);
        assert_eq!(x.complement().delta(), 6);
        assert_eq!(x.complement().complement(), x);
        assert_eq!(x.delta_bar(), 6);

        let s = BitString::new(3, 0b101).unwrap();
        assert_eq!(x.dot(&s).unwrap(), 1);
        assert_eq!(x.hamming(&s).unwrap(), 1);
    }

    #[test]
    fn complement_is_involutive_for_all_small_strings() {
        for n in 1..=10 {
            for x in BitString::all(n) {
                assert_eq!(x.complement().complement(), x);
                assert_eq!(x.hamming(&x.complement()).unwrap(), n);
            }
        }
    }

    #[test]
    fn parity_set_small_cases() {
        let p2 = parity_set(2).unwrap();
        assert_eq!(p2.len(), 1);
        assert_eq!(p2.members()[0].to_string(), "11");

        let p3 = parity_set(3).unwrap();
        let names: Vec<String> = p3.members().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, vec!["011", "101", "110", "111"]);

        // Independent enumeration oracle for n = 4.
        let expected: Vec<u64> = (0..16u64).filter(|d| d.count_ones() >= 2).collect();
        let p4 = parity_set(4).unwrap();
        assert_eq!(p4.len(), 11);
        assert_eq!(
            p4.members().iter().map(|s| s.delta()).collect::<Vec<_>>(),
            expected
        );

        assert!(matches!(parity_set(1), Err(Error::UnsupportedN { .. })));
    }

    #[test]
    fn parity_set_size_formula() {
        for n in 2..=10u32 {
            let p = parity_set(n).unwrap();
            assert_eq!(p.len() as u64, (1u64 << n) - n as u64 - 1);
            let mut seen = std::collections::HashSet::new();
            for s in p.members() {
                assert!(s.weight() >= 2);
                assert!(seen.insert(s.delta()));
            }
        }
    }

    #[test]
    fn projector_cases() {
        let obs = sz_obs();
        let p0 = projector(0, &obs);
        let p1 = projector(1, &obs);
        assert_eq!(p0.matrix().get(0, 0), c(1.0, 0.0));
        assert_eq!(p0.matrix().get(1, 1), c(0.0, 0.0));
        assert_eq!(p1.matrix().get(0, 0), c(0.0, 0.0));
        assert_eq!(p1.matrix().get(1, 1), c(1.0, 0.0));

        let sx = DichotomicObservable::new(
            HermitianOperator::new_unchecked(ComplexMatrix::pauli_x()),
            1e-12,
        )
        .unwrap();
        let px0 = projector(0, &sx);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(px0.matrix().get(i, j), c(0.5, 0.0));
            }
        }

        // completeness is exact; idempotence within 1e-12
        let sum = p0.matrix().add(p1.matrix()).unwrap();
        assert_eq!(sum.max_abs_diff(&ComplexMatrix::identity(2)).unwrap(), 0.0);
        let sq = px0.matrix().mul(px0.matrix()).unwrap();
        assert!(sq.max_abs_diff(px0.matrix()).unwrap() <= 1e-12);
    }

    #[test]
    fn parity_check_mixed_ensemble_passes_and_biased_fails() {
        let tols = Tolerances::default();
        let mixed = PreparationEnsemble::new(2, vec![maximally_mixed(2); 4], &tols).unwrap();
        let report = check_parity_oblivious(&mixed, 1e-12).unwrap();
        assert_eq!(report.max_residual, 0.0);
        assert!(report.pass);

        // |0>,|0>,|0>,|1>: the single s = 11 split gives
        // (rho_00 + rho_11) - (rho_01 + rho_10) = diag(-1, 1), residual 1.
        let zero = qubit_state(c(1.0, 0.0), c(0.0, 0.0));
        let one = qubit_state(c(0.0, 0.0), c(1.0, 0.0));
        let biased =
            PreparationEnsemble::new(2, vec![zero.clone(), zero.clone(), zero, one], &tols)
                .unwrap();
        let report = check_parity_oblivious(&biased, 1e-12).unwrap();
        assert!(!report.pass);
        assert!((report.max_residual - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn maximally_mixed_scores_one_half() {
        let tols = Tolerances::default();
        let prep = PreparationEnsemble::new(2, vec![maximally_mixed(2); 4], &tols).unwrap();
        let sy = DichotomicObservable::new(
            HermitianOperator::new_unchecked(ComplexMatrix::pauli_y()),
            1e-12,
        )
        .unwrap();
        let meas = MeasurementSet::new(2, vec![sz_obs(), sy]).unwrap();
        let strategy = Strategy::new(prep, meas, "mixed").unwrap();
        assert!((success_probability(&strategy) - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn bounds_table() {
        assert_eq!(classical_bound(2).unwrap(), Ratio::new(3, 4));
        assert_eq!(classical_bound(3).unwrap(), Ratio::new(2, 3));
        assert_eq!(classical_bound(8).unwrap(), Ratio::new(9, 16));
        assert!(matches!(
            classical_bound(1),
            Err(Error::UnsupportedN { .. })
        ));

        assert!((quantum_bound(2).unwrap() - 0.8535533905932737).abs() <= 1e-15);
        assert!((quantum_bound(3).unwrap() - 0.7886751345948129).abs() <= 1e-15);
        assert_eq!(quantum_bound(4).unwrap(), 0.75);
        assert!(matches!(quantum_bound(1), Err(Error::UnsupportedN { .. })));
    }

    #[test]
    fn quantum_bound_strictly_beats_classical_up_to_64() {
        for n in 2..=64u32 {
            let q = quantum_bound(n).unwrap();
            let c = classical_bound(n).unwrap();
            let c_float = *c.numer() as f64 / *c.denom() as f64;
            assert!(q - c_float > 1e-3, "margin too small at n = {n}");
        }
    }

    #[test]
    fn ensemble_validation_names_the_offender() {
        let tols = Tolerances::default();
        let zero = qubit_state(c(1.0, 0.0), c(0.0, 0.0));
        let shrunk = HermitianOperator::new_unchecked(zero.matrix().scale_re(0.9));
        let err =
            PreparationEnsemble::new(2, vec![zero.clone(), zero.clone(), shrunk, zero], &tols)
                .unwrap_err();
        match err {
            Error::StateInvalid { delta, .. } => assert_eq!(delta, 2),
            other => panic!("expected StateInvalid, got {other:?}"),
        }
    }
}
