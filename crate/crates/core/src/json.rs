//! Canonical file formats.
//!
//! All JSON artifacts are written through one serializer: struct fields in
//! fixed (alphabetical) order and every float rendered with 17 significant
//! digits (`{:.16e}`), which round-trips `f64` bit-exactly and makes re-runs
//! byte-identical. Matrices serialize as
//! `{"dim": d, "entries": [[re, im], ...]}` flattened row-major.
//!
//! Geometry data is CSV, not JSON: one vertex table and one pair-distance
//! table, both deterministic functions of n.

use std::io;
use std::path::Path;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::extract::CertificationReport;
use crate::matrix::{ComplexMatrix, DichotomicObservable, HermitianOperator};
use crate::optimal::{bloch_vector, hypercube_distance_sq};
use crate::oracle::LpSolution;
use crate::task::{
    check_parity_oblivious, classical_bound, quantum_bound, success_probability, BitString,
    MeasurementSet, PreparationEnsemble, Strategy,
};
use crate::tol::Tolerances;

/// `serde_json` formatter with fixed 17-significant-digit floats.
struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize with canonical float formatting (no trailing newline).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| Error::Parse(e.to_string()))
}

/// Write canonical JSON plus a trailing newline.
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = to_canonical_json(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixJson {
            dim: m.dim(),
            entries: m.entries().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, Error> {
        let entries = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_entries(self.dim, entries)
    }
}

/// On-disk strategy: 2^n states and n observables plus provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyJson {
    pub d: usize,
    pub label: String,
    pub measurements: Vec<MatrixJson>,
    pub n: u32,
    pub preparations: Vec<MatrixJson>,
    #[serde(default)]
    pub seed: u64,
}

pub fn strategy_to_json(strategy: &Strategy, seed: u64) -> StrategyJson {
    StrategyJson {
        d: strategy.dim(),
        label: strategy.label().to_string(),
        measurements: strategy
            .measurements()
            .observables()
            .iter()
            .map(|o| MatrixJson::from_matrix(o.matrix()))
            .collect(),
        n: strategy.n(),
        preparations: strategy
            .preparations()
            .states()
            .iter()
            .map(|s| MatrixJson::from_matrix(s.matrix()))
            .collect(),
        seed,
    }
}

/// Rebuild and re-certify a strategy from its file form. Every structural
/// invariant (hermiticity, dichotomy, state validity, dimensions) is checked
/// against the given tolerances.
pub fn strategy_from_json(js: &StrategyJson, tols: &Tolerances) -> Result<Strategy, Error> {
    if js.n < 2 {
        return Err(Error::UnsupportedN {
            n: js.n,
            reason: "strategy files require n >= 2".into(),
        });
    }
    let states = js
        .preparations
        .iter()
        .enumerate()
        .map(|(delta, mj)| {
            let m = mj.to_matrix()?;
            HermitianOperator::new(m, tols.hermiticity).map_err(|e| match e {
                Error::ResidualExceeded { residual, .. } => Error::StateInvalid {
                    delta: delta as u64,
                    detail: format!("not Hermitian (residual {residual:.3e})"),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let preparations = PreparationEnsemble::new(js.n, states, tols)?;
    let observables = js
        .measurements
        .iter()
        .map(|mj| {
            let m = mj.to_matrix()?;
            DichotomicObservable::new(HermitianOperator::new(m, tols.hermiticity)?, tols.dichotomy)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let measurements = MeasurementSet::new(js.n, observables)?;
    if preparations.dim() != js.d || measurements.dim() != js.d {
        return Err(Error::DimensionMismatch {
            left: js.d,
            right: preparations.dim(),
        });
    }
    Strategy::new(preparations, measurements, js.label.clone())
}

pub fn write_strategy_file(path: &Path, strategy: &Strategy, seed: u64) -> Result<(), Error> {
    write_json_file(path, &strategy_to_json(strategy, seed))
}

pub fn read_strategy_file(path: &Path, tols: &Tolerances) -> Result<(Strategy, u64), Error> {
    let js: StrategyJson = read_json_file(path)?;
    let strategy = strategy_from_json(&js, tols)?;
    Ok((strategy, js.seed))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyFlagsJson {
    pub parity: bool,
    pub success_meets_quantum_bound: bool,
}

/// Scoring report: success probability against both bounds plus the
/// obliviousness residual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReportJson {
    pub classical_bound: f64,
    pub classical_bound_exact: String,
    pub d: usize,
    pub label: String,
    pub n: u32,
    pub parity_residual: f64,
    pub pass_flags: VerifyFlagsJson,
    pub quantum_bound: f64,
    pub seed: u64,
    pub success_probability: f64,
}

impl VerifyReportJson {
    pub fn pass(&self) -> bool {
        self.pass_flags.parity && self.pass_flags.success_meets_quantum_bound
    }
}

pub fn build_verify_report(
    strategy: &Strategy,
    tols: &Tolerances,
    seed: u64,
) -> Result<VerifyReportJson, Error> {
    let n = strategy.n();
    let score = success_probability(strategy);
    let cb = classical_bound(n)?;
    let qb = quantum_bound(n)?;
    let parity = check_parity_oblivious(strategy.preparations(), tols.parity)?;
    Ok(VerifyReportJson {
        classical_bound: *cb.numer() as f64 / *cb.denom() as f64,
        classical_bound_exact: format!("{}/{}", cb.numer(), cb.denom()),
        d: strategy.dim(),
        label: strategy.label().to_string(),
        n,
        parity_residual: parity.max_residual,
        pass_flags: VerifyFlagsJson {
            parity: parity.pass,
            success_meets_quantum_bound: score >= qb - tols.score_margin,
        },
        quantum_bound: qb,
        seed,
        success_probability: score,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChecksJson {
    pub anticommutation: bool,
    pub extraction: bool,
    pub parity: bool,
    pub states: bool,
    pub success: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractionJson {
    pub depth: u32,
    pub junk_dim: usize,
    pub qubits: u32,
    pub residuals: Vec<f64>,
    pub sectors: [usize; 2],
    pub unitary: MatrixJson,
}

/// Full certification output of `extract`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationJson {
    pub anticommutation_residuals: Vec<Vec<f64>>,
    pub checks: ChecksJson,
    pub classical_bound: f64,
    pub d: usize,
    pub extraction: Option<ExtractionJson>,
    pub extraction_error: Option<String>,
    pub label: String,
    pub n: u32,
    pub parity_residual: f64,
    pub pass: bool,
    pub quantum_bound: f64,
    pub seed: u64,
    pub state_residuals: Option<Vec<f64>>,
    pub success_probability: f64,
}

pub fn certification_to_json(report: &CertificationReport, seed: u64) -> CertificationJson {
    CertificationJson {
        anticommutation_residuals: report.anticommutation_residuals.clone(),
        checks: ChecksJson {
            anticommutation: report.checks.anticommutation,
            extraction: report.checks.extraction,
            parity: report.checks.parity,
            states: report.checks.states,
            success: report.checks.success,
        },
        classical_bound: report.classical_bound,
        d: report.dim,
        extraction: report.extraction.as_ref().map(|fact| ExtractionJson {
            depth: fact.depth,
            junk_dim: fact.junk_dim,
            qubits: fact.qubits,
            residuals: fact.residuals.clone(),
            sectors: [fact.sectors.0, fact.sectors.1],
            unitary: MatrixJson::from_matrix(&fact.unitary),
        }),
        extraction_error: report.extraction_error.clone(),
        label: report.label.clone(),
        n: report.n,
        parity_residual: report.parity.max_residual,
        pass: report.pass,
        quantum_bound: report.quantum_bound,
        seed,
        state_residuals: report.state_residuals.clone(),
        success_probability: report.success_probability,
    }
}

/// Sidecar written next to a scrambled strategy: the hiding unitary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScrambleSidecarJson {
    #[serde(rename = "J")]
    pub junk_dim: usize,
    pub seed: u64,
    pub unitary: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessModelJson {
    pub n: u32,
    /// Exact fraction strings, lambda-major.
    pub weights: Vec<Vec<String>>,
}

/// Exact-oracle result: `value = value_numerator / value_denominator`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpResultJson {
    pub iterations: u64,
    pub matches_formula: bool,
    pub n: u32,
    pub value_denominator: u64,
    pub value_numerator: u64,
    pub witness_model: WitnessModelJson,
}

pub fn lp_result_to_json(n: u32, solution: &LpSolution) -> Result<LpResultJson, Error> {
    let cb = classical_bound(n)?;
    let formula =
        num_rational::BigRational::new(cb.numer().to_owned().into(), cb.denom().to_owned().into());
    let numer = solution
        .value
        .numer()
        .to_u64()
        .ok_or_else(|| Error::NumericOverflow("LP value numerator does not fit u64".into()))?;
    let denom =
        solution.value.denom().to_u64().ok_or_else(|| {
            Error::NumericOverflow("LP value denominator does not fit u64".into())
        })?;
    Ok(LpResultJson {
        iterations: solution.iterations,
        matches_formula: solution.value == formula,
        n,
        value_denominator: denom,
        value_numerator: numer,
        witness_model: WitnessModelJson {
            n,
            weights: solution
                .model
                .weights
                .iter()
                .map(|row| row.iter().map(|w| w.to_string()).collect())
                .collect(),
        },
    })
}

/// Bounds summary, with the exact oracle attached when it was run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsJson {
    pub classical_denominator: u64,
    pub classical_numerator: u64,
    pub lp: Option<LpResultJson>,
    pub n: u32,
    pub quantum_bound: f64,
    pub seed: u64,
}

/// Vertex table: `delta,bits,coord_1..coord_n,norm`.
pub fn geometry_vertices_csv(n: u32) -> Result<String, Error> {
    if !(2..=10).contains(&n) {
        return Err(Error::UnsupportedN {
            n,
            reason: "geometry emission supports 2 <= n <= 10".into(),
        });
    }
    let mut out = String::from("delta,bits");
    for y in 1..=n {
        out.push_str(&format!(",coord_{y}"));
    }
    out.push_str(",norm\n");
    for x in BitString::all(n) {
        let v = bloch_vector(&x);
        out.push_str(&format!("{},{}", x.delta(), x));
        for c in &v.coords {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{}\n", v.norm()));
    }
    Ok(out)
}

/// Pair table: `delta_a,delta_b,hamming,dist_sq,expected_4h_over_n` over all
/// unordered pairs.
pub fn geometry_pairs_csv(n: u32) -> Result<String, Error> {
    if !(2..=10).contains(&n) {
        return Err(Error::UnsupportedN {
            n,
            reason: "geometry emission supports 2 <= n <= 10".into(),
        });
    }
    let mut out = String::from("delta_a,delta_b,hamming,dist_sq,expected_4h_over_n\n");
    let size = 1u64 << n;
    for a in 0..size {
        let xa = BitString::new(n, a)?;
        for b in (a + 1)..size {
            let xb = BitString::new(n, b)?;
            let h = xa.hamming(&xb)?;
            let d2 = hypercube_distance_sq(&xa, &xb)?;
            let expected = 4.0 * h as f64 / n as f64;
            out.push_str(&format!("{a},{b},{h},{d2},{expected}\n"));
        }
    }
    Ok(out)
}
