//! Validated quantum states and the families used throughout the crate.
//!
//! States are stored as full matrices even when diagonal; the spectrum is
//! computed once at validation time and cached, so later spectral queries
//! are free. Constructors that build states from already-validated pieces
//! (tensor products of valid states, diagonal probability vectors) fill
//! the cache directly instead of re-running the eigensolver.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, ComplexMatrix, Spectrum, Subsystem, C64};
use crate::tol;

/// A validated density matrix: Hermitian, unit trace, positive
/// semidefinite, all within the central tolerances.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: usize,
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl DensityMatrix {
    /// Validates `matrix` as a density matrix.
    ///
    /// Checks, in order: squareness, Hermiticity, unit trace, positive
    /// semidefiniteness. The eigendecomposition run for the PSD check is
    /// kept as the state's cached spectrum.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let tols = tol::current();
        if matrix.rows() != matrix.cols() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let dim = matrix.rows();
        if dim == 0 {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        let dev = matrix.hermiticity_deviation();
        // NaN deviations must fail, so the comparison is written to reject them.
        if dev.is_nan() || dev > tols.hermiticity {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tols.hermiticity,
            });
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > tols.hermiticity {
            return Err(Error::TraceNotOne {
                trace: trace.re,
                tolerance: tols.hermiticity,
            });
        }
        let spectrum = matrix.hermitian_eig()?;
        if let Some(&min) = spectrum.eigenvalues().last() {
            if min < -tols.psd {
                return Err(Error::NotPositive {
                    eigenvalue: min,
                    tolerance: tols.psd,
                });
            }
        }
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Ok(DensityMatrix {
            dim,
            matrix,
            spectrum: cell,
        })
    }

    /// Builds a state from parts already known to satisfy the invariants.
    /// Callers are responsible for `matrix` being a valid density matrix
    /// and `spectrum` being its eigendecomposition.
    pub(crate) fn from_validated_parts(matrix: ComplexMatrix, spectrum: Spectrum) -> Self {
        let dim = matrix.rows();
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        DensityMatrix {
            dim,
            matrix,
            spectrum: cell,
        }
    }

    /// Diagonal state from a probability vector, kept in the given order.
    ///
    /// Entries inside the tolerated window below zero are clamped to zero;
    /// anything lower is rejected, as is a sum away from one.
    pub fn from_eigenvalues(probs: &[f64]) -> Result<Self> {
        let tols = tol::current();
        if probs.is_empty() {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        let mut entries = Vec::with_capacity(probs.len());
        for &p in probs {
            if p < -tols.psd {
                return Err(Error::NegativeProbability { value: p });
            }
            entries.push(p.max(0.0));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > tols.equality {
            return Err(Error::ProbabilitiesNotNormalized {
                sum,
                tolerance: tols.equality,
            });
        }
        let matrix = ComplexMatrix::from_diag(&entries);
        let spectrum = diag_spectrum(&entries);
        Ok(Self::from_validated_parts(matrix, spectrum))
    }

    /// The qubit-in-d-dimensions family diag(p, 1-p, 0, ..., 0).
    pub fn effective_qubit(p: f64, d: usize) -> Result<Self> {
        if !(0.5..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: p,
                min: 0.5,
                max: 1.0,
            });
        }
        if d < 2 {
            return Err(Error::DimensionTooSmall { dim: d, min: 2 });
        }
        let mut probs = vec![0.0; d];
        probs[0] = p;
        probs[1] = 1.0 - p;
        Self::from_eigenvalues(&probs)
    }

    /// Convex mixture of a pure state with the maximally mixed one:
    /// p |psi><psi| + (1-p) I/d.
    pub fn dephased_pure(p: f64, psi: &[C64], d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let tols = tol::current();
        let norm = crate::linalg::vec_norm(psi);
        if (norm - 1.0).abs() > tols.hermiticity {
            return Err(Error::VectorNotNormalized {
                norm,
                tolerance: tols.hermiticity,
            });
        }
        let uniform = (1.0 - p) / d as f64;
        let matrix = ComplexMatrix::from_fn(d, d, |i, j| {
            let mut x = psi[i] * psi[j].conj() * p;
            if i == j {
                x += uniform;
            }
            x
        });
        Self::new(matrix)
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::DimensionTooSmall { dim: d, min: 1 });
        }
        Self::from_eigenvalues(&vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The cached eigendecomposition. Every constructor fills the cache,
    /// so this never recomputes.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get()
            .expect("spectrum is cached at construction")
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum().eigenvalues()
    }

    /// Largest eigenvalue; for a state this is also the operator norm.
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Parses the JSON state format: either
    /// `{"dim": d, "matrix": [[{"re":..,"im":..}, ..], ..]}` or
    /// `{"eigenvalues": [..]}` for diagonal states.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "expected a {{dim, matrix}} or {{eigenvalues}} object: {e}"
            ))
        })?;
        match file {
            StateFile::Matrix { dim, matrix } => {
                if matrix.len() != dim {
                    return Err(Error::Parse(format!(
                        "matrix has {} rows, header says dim = {dim}",
                        matrix.len()
                    )));
                }
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != dim {
                        return Err(Error::Parse(format!(
                            "row {i} has {} entries, header says dim = {dim}",
                            row.len()
                        )));
                    }
                }
                let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
                    C64::new(matrix[i][j].re, matrix[i][j].im)
                });
                Self::new(m)
            }
            StateFile::Diagonal { eigenvalues } => Self::from_eigenvalues(&eigenvalues),
        }
    }

    /// Serializes in the matrix form of the JSON state format at full
    /// precision, so a round-trip reproduces the entries exactly.
    pub fn to_json(&self) -> String {
        let matrix: Vec<Vec<EntryDto>> = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let x = self.matrix.get(i, j);
                        EntryDto { re: x.re, im: x.im }
                    })
                    .collect()
            })
            .collect();
        let file = StateFile::Matrix {
            dim: self.dim,
            matrix,
        };
        serde_json::to_string(&file).expect("state serialization cannot fail")
    }
}

/// Spectrum of a diagonal matrix: stable descending sort with basis-vector
/// eigenvectors, no iteration involved.
fn diag_spectrum(entries: &[f64]) -> Spectrum {
    let n = entries.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| entries[j].partial_cmp(&entries[i]).unwrap().then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| entries[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set(src, col, C64::new(1.0, 0.0));
    }
    Spectrum::from_parts(eigenvalues, vectors)
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Matrix {
        dim: usize,
        matrix: Vec<Vec<EntryDto>>,
    },
    Diagonal {
        eigenvalues: Vec<f64>,
    },
}

/// A validated state on a tensor product of two subsystems.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    joint: DensityMatrix,
}

impl BipartiteState {
    /// Validates `matrix` as a state on dimensions `dim_a * dim_b`.
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim_a < 2 {
            return Err(Error::DimensionTooSmall { dim: dim_a, min: 2 });
        }
        if dim_b < 2 {
            return Err(Error::DimensionTooSmall { dim: dim_b, min: 2 });
        }
        if matrix.rows() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                got: matrix.rows(),
            });
        }
        let joint = DensityMatrix::new(matrix)?;
        Ok(BipartiteState {
            dim_a,
            dim_b,
            joint,
        })
    }

    /// Tensor product of two validated states.
    ///
    /// The joint spectrum is assembled from the factor spectra (eigenvalue
    /// products, Kronecker eigenvectors) with ties broken by lexicographic
    /// factor index, so no eigensolver run is needed.
    pub fn product(rho: &DensityMatrix, eta: &DensityMatrix) -> Self {
        let matrix = rho.matrix().kron(eta.matrix());
        let sa = rho.spectrum();
        let sb = eta.spectrum();
        let da = rho.dim();
        let db = eta.dim();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(da * db);
        for i in 0..da {
            for j in 0..db {
                pairs.push((sa.eigenvalues()[i] * sb.eigenvalues()[j], i, j));
            }
        }
        pairs.sort_by(|x, y| {
            y.0.partial_cmp(&x.0)
                .unwrap()
                .then(x.1.cmp(&y.1))
                .then(x.2.cmp(&y.2))
        });
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut vectors = ComplexMatrix::zeros(da * db, da * db);
        for (col, &(_, i, j)) in pairs.iter().enumerate() {
            let v = kron_vec(&sa.eigenvector(i), &sb.eigenvector(j));
            for (row, &x) in v.iter().enumerate() {
                vectors.set(row, col, x);
            }
        }
        let spectrum = Spectrum::from_parts(eigenvalues, vectors);
        BipartiteState {
            dim_a: da,
            dim_b: db,
            joint: DensityMatrix::from_validated_parts(matrix, spectrum),
        }
    }

    /// The isotropic family p |phi+><phi+| + (1-p) I/d^2 on two copies of
    /// dimension `d`, with |phi+> = sum_i |ii> / sqrt(d).
    pub fn isotropic(p: f64, d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        if d < 2 {
            return Err(Error::DimensionTooSmall { dim: d, min: 2 });
        }
        let n = d * d;
        let pair_weight = p / d as f64;
        let uniform = (1.0 - p) / n as f64;
        let matrix = ComplexMatrix::from_fn(n, n, |r, c| {
            let mut x = C64::new(0.0, 0.0);
            if r % (d + 1) == 0 && c % (d + 1) == 0 {
                x += pair_weight;
            }
            if r == c {
                x += uniform;
            }
            x
        });
        Self::new(d, d, matrix)
    }

    /// Mixture of a state's canonical purification with the uncorrelated
    /// product: p |rho><rho| + (1-p) rho (x) rho, where
    /// |rho> = sum_i sqrt(a_i) |v_i v_i> over the eigenbasis of rho.
    ///
    /// Both marginals equal rho for every p.
    pub fn purified_mixture(p: f64, rho: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        if rho.dim() < 2 {
            return Err(Error::DimensionTooSmall {
                dim: rho.dim(),
                min: 2,
            });
        }
        let d = rho.dim();
        let eig = rho.spectrum();
        let mut purification = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let w = eig.eigenvalues()[i].max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            let v = eig.eigenvector(i);
            let vv = kron_vec(&v, &v);
            for (slot, &x) in purification.iter_mut().zip(&vv) {
                *slot += x * w;
            }
        }
        let product = rho.matrix().kron(rho.matrix());
        let n = d * d;
        let matrix = ComplexMatrix::from_fn(n, n, |r, c| {
            purification[r] * purification[c].conj() * p + product.get(r, c) * (1.0 - p)
        });
        Self::new(d, d, matrix)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// The joint state over both subsystems.
    pub fn joint(&self) -> &DensityMatrix {
        &self.joint
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.joint.matrix()
    }

    pub fn marginal_a(&self) -> Result<DensityMatrix> {
        let m = self
            .matrix()
            .partial_trace(self.dim_a, self.dim_b, Subsystem::A)?;
        DensityMatrix::new(m)
    }

    pub fn marginal_b(&self) -> Result<DensityMatrix> {
        let m = self
            .matrix()
            .partial_trace(self.dim_a, self.dim_b, Subsystem::B)?;
        DensityMatrix::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validation_accepts_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        assert_eq!(rho.dim(), 3);
        assert!((rho.max_eigenvalue() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_trace() {
        let m = ComplexMatrix::from_diag(&[0.9, 0.9]);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn validation_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::from_diag(&[1.2, -0.2]);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn validation_rejects_non_hermitian() {
        let mut m = ComplexMatrix::from_diag(&[0.5, 0.5]);
        m.set(0, 1, c(0.3, 0.0));
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn from_eigenvalues_keeps_order_but_sorts_spectrum() {
        let rho = DensityMatrix::from_eigenvalues(&[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(rho.matrix().get(0, 0), c(0.2, 0.0));
        assert_eq!(rho.eigenvalues(), &[0.5, 0.3, 0.2]);
    }

    #[test]
    fn from_eigenvalues_rejects_bad_input() {
        assert!(matches!(
            DensityMatrix::from_eigenvalues(&[0.6, 0.6]),
            Err(Error::ProbabilitiesNotNormalized { .. })
        ));
        assert!(matches!(
            DensityMatrix::from_eigenvalues(&[1.1, -0.1]),
            Err(Error::NegativeProbability { .. })
        ));
    }

    #[test]
    fn effective_qubit_range_checks() {
        assert!(DensityMatrix::effective_qubit(0.7, 3).is_ok());
        assert!(matches!(
            DensityMatrix::effective_qubit(0.3, 3),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(matches!(
            DensityMatrix::effective_qubit(0.7, 1),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn dephased_pure_spectrum() {
        // p |0><0| + (1-p) I/3 at p = 1/2 has eigenvalues (2/3, 1/6, 1/6).
        let e0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let rho = DensityMatrix::dephased_pure(0.5, &e0, 3).unwrap();
        let ev = rho.eigenvalues();
        assert!((ev[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((ev[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((ev[2] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn dephased_pure_rejects_unnormalized() {
        let bad = vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            DensityMatrix::dephased_pure(0.5, &bad, 3),
            Err(Error::VectorNotNormalized { .. })
        ));
    }

    #[test]
    fn isotropic_matches_hand_built_matrix_and_purity() {
        // Independent assembly of 0.5 |phi+><phi+| + 0.5 I/4 on two qubits.
        let mut by_hand = ComplexMatrix::zeros(4, 4);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                by_hand.set(i, j, c(0.5 * 0.5, 0.0));
            }
        }
        for i in 0..4 {
            let x = by_hand.get(i, i) + 0.5 / 4.0;
            by_hand.set(i, i, x);
        }
        let iso = BipartiteState::isotropic(0.5, 2).unwrap();
        assert!(iso.matrix().max_abs_diff(&by_hand) < 1e-15);

        // Purity tr(rho^2) = sum over entries of |entry|^2 = 7/16.
        let mut purity = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                purity += iso.matrix().get(i, j).norm_sqr();
            }
        }
        assert!((purity - 0.4375).abs() < 1e-14);
    }

    #[test]
    fn isotropic_marginals_are_exactly_maximally_mixed() {
        for &p in &[0.0, 0.3, 1.0] {
            let iso = BipartiteState::isotropic(p, 3).unwrap();
            let target = ComplexMatrix::identity(3).scale(1.0 / 3.0);
            assert!(iso.marginal_a().unwrap().matrix().max_abs_diff(&target) < 1e-12);
            assert!(iso.marginal_b().unwrap().matrix().max_abs_diff(&target) < 1e-12);
        }
    }

    #[test]
    fn product_marginals_recover_factors() {
        let rho = DensityMatrix::from_eigenvalues(&[0.7, 0.3]).unwrap();
        let eta = DensityMatrix::from_eigenvalues(&[0.5, 0.25, 0.25]).unwrap();
        let joint = BipartiteState::product(&rho, &eta);
        assert!(
            joint
                .marginal_a()
                .unwrap()
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-14
        );
        assert!(
            joint
                .marginal_b()
                .unwrap()
                .matrix()
                .max_abs_diff(eta.matrix())
                < 1e-14
        );
        // Joint spectrum is the sorted eigenvalue products.
        assert_eq!(
            joint.joint().eigenvalues(),
            &[0.35, 0.7 * 0.25, 0.7 * 0.25, 0.15, 0.3 * 0.25, 0.3 * 0.25]
        );
    }

    #[test]
    fn purified_mixture_marginals_equal_rho_for_all_p() {
        let rho = DensityMatrix::from_eigenvalues(&[0.6, 0.3, 0.1]).unwrap();
        for &p in &[0.0, 0.4, 1.0] {
            let joint = BipartiteState::purified_mixture(p, &rho).unwrap();
            assert!(
                joint
                    .marginal_a()
                    .unwrap()
                    .matrix()
                    .max_abs_diff(rho.matrix())
                    < 1e-12
            );
            assert!(
                joint
                    .marginal_b()
                    .unwrap()
                    .matrix()
                    .max_abs_diff(rho.matrix())
                    < 1e-12
            );
        }
    }

    #[test]
    fn purified_mixture_is_pure_at_p_one() {
        let rho = DensityMatrix::from_eigenvalues(&[0.7, 0.3]).unwrap();
        let joint = BipartiteState::purified_mixture(1.0, &rho).unwrap();
        let ev = joint.joint().eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1].abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip_preserves_entries() {
        let e0 = vec![c(0.6f64.sqrt(), 0.0), c(0.0, 0.4f64.sqrt()), c(0.0, 0.0)];
        let rho = DensityMatrix::dephased_pure(0.8, &e0, 3).unwrap();
        let text = rho.to_json();
        let back = DensityMatrix::from_json(&text).unwrap();
        assert!(rho.matrix().max_abs_diff(back.matrix()) < 1e-12);
    }

    #[test]
    fn json_accepts_eigenvalue_form() {
        let rho = DensityMatrix::from_json(r#"{"eigenvalues": [0.5, 0.5, 0.0]}"#).unwrap();
        assert_eq!(rho.eigenvalues(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn json_rejects_malformed_input() {
        assert!(matches!(
            DensityMatrix::from_json("{"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            DensityMatrix::from_json(r#"{"dim": 2, "matrix": []}"#),
            Err(Error::Parse(_))
        ));
        // Well-formed file, invalid state: surfaces as validation, not parse.
        assert!(matches!(
            DensityMatrix::from_json(r#"{"eigenvalues": [0.9, 0.9]}"#),
            Err(Error::ProbabilitiesNotNormalized { .. })
        ));
    }
}
