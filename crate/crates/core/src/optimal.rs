//! Construction of the bound-attaining strategy for any n, plus the
//! hypercube geometry of its states and a seeded scrambler for round-trip
//! certification tests.
//!
//! The canonical observables are built recursively: the first two are
//! `sigma_z` and `sigma_y` on the current qubit factor (padded with
//! identities), and every later one is `sigma_x` tensored with a member of
//! the canonical set for n - 2. The result is n mutually anticommuting
//! traceless involutions in dimension `2^m` with `m = ceil((n-1)/2)`, with
//! entries drawn from {0, +/-1, +/-i} so all algebraic identities hold
//! exactly in floating point. The convention maps the second observable to
//! `sigma_y`; treatments that use `sigma_x` there differ only by relabeling.
//!
//! Given any anticommuting measurement set, the matching sender states are
//! `rho_x = (1 + sum_y (-1)^{x_y} B_y / sqrt(n)) / d`: rank-d/2 projectors
//! scaled by 2/d, sitting at the vertices of an n-dimensional hypercube
//! inscribed in the unit sphere of the observable span.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::matrix::{ComplexMatrix, DichotomicObservable, HermitianOperator};
use crate::task::{BitString, MeasurementSet, PreparationEnsemble, Strategy};
use crate::tol::Tolerances;

/// Largest n for which canonical observables are constructed (d* = 64).
pub const CANONICAL_MAX_N: u32 = 12;
/// Largest n for which the full 2^n-state ensemble is constructed.
pub const PREPARATION_MAX_N: u32 = 8;

/// Qubit count of the minimal carrier space: `ceil((n-1)/2)`.
pub fn min_qubits(n: u32) -> u32 {
    n / 2
}

/// Minimal carrier dimension `2^ceil((n-1)/2)`.
pub fn min_dim(n: u32) -> usize {
    1usize << min_qubits(n)
}

/// The canonical mutually anticommuting observable set in minimal dimension.
#[derive(Clone, Debug)]
pub struct CanonicalObservables {
    n: u32,
    qubits: u32,
    set: MeasurementSet,
}

impl CanonicalObservables {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `m = ceil((n-1)/2)`.
    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn min_dim(&self) -> usize {
        1usize << self.qubits
    }

    pub fn set(&self) -> &MeasurementSet {
        &self.set
    }

    pub fn into_set(self) -> MeasurementSet {
        self.set
    }
}

/// Recursive matrix construction. `k = 1` yields the 1x1 scalar `[1]` so
/// that `sigma_x tensor [1] = sigma_x` closes the odd case.
pub(crate) fn canonical_matrices(k: u32) -> Vec<ComplexMatrix> {
    match k {
        0 => Vec::new(),
        1 => vec![ComplexMatrix::scalar(Complex64::new(1.0, 0.0))],
        _ => {
            let pad = ComplexMatrix::identity(1usize << (min_qubits(k) - 1));
            let mut out = vec![
                ComplexMatrix::pauli_z().tensor(&pad),
                ComplexMatrix::pauli_y().tensor(&pad),
            ];
            let sx = ComplexMatrix::pauli_x();
            for inner in canonical_matrices(k - 2) {
                out.push(sx.tensor(&inner));
            }
            out
        }
    }
}

/// n mutually anticommuting observables in dimension `2^ceil((n-1)/2)`.
pub fn canonical_observables(n: u32) -> Result<CanonicalObservables, Error> {
    if !(2..=CANONICAL_MAX_N).contains(&n) {
        return Err(Error::UnsupportedN {
            n,
            reason: format!("canonical observables support 2 <= n <= {CANONICAL_MAX_N}"),
        });
    }
    let observables = canonical_matrices(n)
        .into_iter()
        .map(|m| DichotomicObservable::new(HermitianOperator::new_unchecked(m), 1e-12))
        .collect::<Result<Vec<_>, _>>()?;
    let set = MeasurementSet::new(n, observables)?;
    Ok(CanonicalObservables {
        n,
        qubits: min_qubits(n),
        set,
    })
}

/// Max entry of the anticommutator of two observables; zero when they
/// anticommute.
pub fn anticommutation_residual(
    a: &DichotomicObservable,
    b: &DichotomicObservable,
) -> Result<f64, Error> {
    Ok(a.op().anticommutator(b.op())?.matrix().max_abs())
}

/// The ensemble `rho_x = (1 + sum_y (-1)^{x_y} B_y / sqrt(n)) / d` over all
/// 2^n strings. Requires the observables to anticommute pairwise (otherwise
/// some states would fail positivity).
pub fn optimal_preparations(
    set: &MeasurementSet,
    tols: &Tolerances,
) -> Result<PreparationEnsemble, Error> {
    let n = set.n();
    if n < 2 {
        return Err(Error::UnsupportedN {
            n,
            reason: "the game requires n >= 2".into(),
        });
    }
    if n > PREPARATION_MAX_N {
        return Err(Error::UnsupportedN {
            n,
            reason: format!("preparation ensembles capped at n = {PREPARATION_MAX_N}"),
        });
    }
    for y in 0..n as usize {
        for z in (y + 1)..n as usize {
            let residual = anticommutation_residual(&set.observables()[y], &set.observables()[z])?;
            if residual > tols.anticommutation {
                return Err(Error::NotAnticommuting {
                    first: y + 1,
                    second: z + 1,
                    residual,
                });
            }
        }
    }
    let dim = set.dim();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut states = Vec::with_capacity(1usize << n);
    for x in BitString::all(n) {
        let mut bias = ComplexMatrix::zeros(dim);
        for y in 1..=n {
            let sign = if x.bit(y) == 0 { 1.0 } else { -1.0 };
            bias = bias.add(&set.observable(y).matrix().scale_re(sign))?;
        }
        let rho = ComplexMatrix::identity(dim)
            .add(&bias.scale_re(inv_sqrt_n))?
            .scale_re(1.0 / dim as f64);
        states.push(HermitianOperator::new_unchecked(rho));
    }
    PreparationEnsemble::new(n, states, tols)
}

/// Canonical observables plus their matching ensemble.
pub fn optimal_strategy(n: u32, tols: &Tolerances) -> Result<Strategy, Error> {
    if n > PREPARATION_MAX_N {
        return Err(Error::UnsupportedN {
            n,
            reason: format!("full strategies capped at n = {PREPARATION_MAX_N}"),
        });
    }
    let set = canonical_observables(n)?.into_set();
    let preparations = optimal_preparations(&set, tols)?;
    Strategy::new(preparations, set, format!("optimal-n{n}"))
}

/// Coordinates of a state on the unit sphere of the observable span:
/// component y is `(-1)^{x_y} / sqrt(n)`.
#[derive(Clone, Debug)]
pub struct BlochVector {
    pub n: u32,
    pub coords: Vec<f64>,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn bloch_vector(x: &BitString) -> BlochVector {
    let n = x.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let coords = (1..=n)
        .map(|y| {
            if x.bit(y) == 0 {
                inv_sqrt_n
            } else {
                -inv_sqrt_n
            }
        })
        .collect();
    BlochVector { n, coords }
}

/// Squared Euclidean distance between two vertex vectors, computed from the
/// coordinates. Equals `4 h / n` for Hamming distance h.
pub fn hypercube_distance_sq(a: &BitString, b: &BitString) -> Result<f64, Error> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n() as usize,
            right: b.n() as usize,
        });
    }
    let va = bloch_vector(a);
    let vb = bloch_vector(b);
    Ok(va
        .coords
        .iter()
        .zip(&vb.coords)
        .map(|(p, q)| (p - q) * (p - q))
        .sum())
}

/// Haar-like random unitary: QR of a complex Gaussian matrix with the
/// diagonal of R phase-normalized.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = faer::Mat::<Complex64>::from_fn(dim, dim, |_, _| {
        // Box-Muller keeps the draw isotropic.
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        Complex64::new(
            r * (std::f64::consts::TAU * u2).cos(),
            r * (std::f64::consts::TAU * u2).sin(),
        )
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut out = ComplexMatrix::from_fn(dim, |i, j| q[(i, j)]);
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rjj / Complex64::new(rjj.norm(), 0.0)
        };
        for i in 0..dim {
            out.set(i, j, out.get(i, j) * phase);
        }
    }
    out
}

/// Hide a strategy inside a larger space: embed states as
/// `rho tensor 1_J / J` and observables as `B tensor 1_J`, then conjugate
/// everything by one seeded random unitary on dimension `d * J`. Returns the
/// scrambled strategy and the hiding unitary for round-trip tests.
pub fn scramble(
    strategy: &Strategy,
    junk_dim: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<(Strategy, ComplexMatrix), Error> {
    if junk_dim < 1 {
        return Err(Error::InvalidArgument(
            "junk dimension must be at least 1".into(),
        ));
    }
    let n = strategy.n();
    let big_dim = strategy.dim() * junk_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(big_dim, &mut rng);
    let ua = u.adjoint();

    let id_junk = ComplexMatrix::identity(junk_dim);
    let mixed_junk = id_junk.scale_re(1.0 / junk_dim as f64);

    let states = strategy
        .preparations()
        .states()
        .iter()
        .map(|rho| {
            let embedded = rho.matrix().tensor(&mixed_junk);
            Ok(HermitianOperator::new_unchecked(
                u.mul(&embedded)?.mul(&ua)?,
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let observables = strategy
        .measurements()
        .observables()
        .iter()
        .map(|obs| {
            let embedded = obs.matrix().tensor(&id_junk);
            DichotomicObservable::new(
                HermitianOperator::new_unchecked(u.mul(&embedded)?.mul(&ua)?),
                tols.dichotomy,
            )
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let preparations = PreparationEnsemble::new(n, states, tols)?;
    let measurements = MeasurementSet::new(n, observables)?;
    let label = format!("scramble(J={junk_dim},seed={seed}) of {}", strategy.label());
    Ok((Strategy::new(preparations, measurements, label)?, u))
}
