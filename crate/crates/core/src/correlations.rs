//! Entropies and correlations of concentrated outputs.
//!
//! Concentrating non-equilibrium onto one subsystem of a product pair
//! necessarily builds correlations between the parts; this module
//! quantifies them, compares concentrated outputs across input purities,
//! and runs the converse protocol that consumes correlations to activate
//! otherwise locked non-equilibrium.

use crate::concentration::{
    self, evolve_and_trace, noneq_measure, ordered_products, ConcentrationReport, UnitaryMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_completion, ComplexMatrix, Spectrum};
use crate::states::{BipartiteState, DensityMatrix};

/// Eigenvalues at or below this contribute nothing to entropies; it
/// absorbs the tolerated negative window around zero without producing
/// NaN from the logarithm.
pub const ENTROPY_CLAMP: f64 = 1e-12;

/// Shannon entropy (base 2) of an eigenvalue list.
pub fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in eigenvalues {
        if x > ENTROPY_CLAMP {
            s -= x * x.log2();
        }
    }
    s
}

/// Von Neumann entropy of a state, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_eigenvalues(rho.eigenvalues())
}

/// Entropies of a bipartite state and its marginals.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationReport {
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub entropy_ab: f64,
    /// I(A:B) = S(A) + S(B) - S(AB); nonnegative up to numerics.
    pub mutual_information: f64,
}

/// Mutual information of a bipartite state.
pub fn mutual_information(sigma: &BipartiteState) -> Result<CorrelationReport> {
    let entropy_a = von_neumann_entropy(&sigma.marginal_a()?);
    let entropy_b = von_neumann_entropy(&sigma.marginal_b()?);
    let entropy_ab = von_neumann_entropy(sigma.joint());
    Ok(CorrelationReport {
        entropy_a,
        entropy_b,
        entropy_ab,
        mutual_information: entropy_a + entropy_b - entropy_ab,
    })
}

/// Closed-form marginals of the optimally concentrated qutrit pair, as
/// diagonal states in the eigenbasis of the input.
///
/// For a descending spectrum (a0, a1, a2) the optimal swap moves the
/// |1,0> population onto |0,2>, so
/// sigma_A = diag(a0(a0 + 2 a1), a1^2 + (1 - a2) a2, a2) and
/// sigma_B = diag(a0(a0 + 2 a2), a1, a2^2 + (1 - a1) a1).
pub fn qutrit_optimal_marginals(spectrum: &Spectrum) -> Result<(DensityMatrix, DensityMatrix)> {
    if spectrum.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: spectrum.dim(),
        });
    }
    let a = spectrum.eigenvalues();
    let sigma_a = DensityMatrix::from_eigenvalues(&[
        a[0] * (a[0] + 2.0 * a[1]),
        a[1] * a[1] + (1.0 - a[2]) * a[2],
        a[2],
    ])?;
    let sigma_b = DensityMatrix::from_eigenvalues(&[
        a[0] * (a[0] + 2.0 * a[2]),
        a[1],
        a[2] * a[2] + (1.0 - a[1]) * a[1],
    ])?;
    Ok((sigma_a, sigma_b))
}

/// Gain and output mutual information for the optimally concentrated
/// qutrit pair: the two are positive together.
///
/// Returns `(delta_p, mutual_information)` where the mutual information
/// is S(sigma_A) + S(sigma_B) - 2 S(rho) of the concentrated output.
pub fn gain_and_mutual_information(spectrum: &Spectrum) -> Result<(f64, f64)> {
    let delta = concentration::qutrit_delta_p(spectrum)?;
    let (sigma_a, sigma_b) = qutrit_optimal_marginals(spectrum)?;
    let mi = von_neumann_entropy(&sigma_a) + von_neumann_entropy(&sigma_b)
        - 2.0 * entropy_of_eigenvalues(spectrum.eigenvalues());
    Ok((delta, mi))
}

/// Concentrated-output comparison of two qutrit-embedded qubit states
/// diag(p, 1-p, 0).
#[derive(Clone, Copy, Debug)]
pub struct MpembaComparison {
    pub p1: f64,
    pub p2: f64,
    /// Measure of the two inputs.
    pub measure_in_1: f64,
    pub measure_in_2: f64,
    /// Measure of the B marginal after optimal concentration.
    pub measure_out_1: f64,
    pub measure_out_2: f64,
    /// True when the input order and the output order strictly disagree:
    /// the purer input ends up less pure after concentration.
    pub inversion: bool,
}

fn concentrated_output_measures(p: f64) -> Result<(f64, f64)> {
    let rho = DensityMatrix::effective_qubit(p, 3)?;
    let (_, sigma_b) = qutrit_optimal_marginals(rho.spectrum())?;
    Ok((noneq_measure(&rho), noneq_measure(&sigma_b)))
}

/// Compares the concentrated outputs of diag(p1, 1-p1, 0) and
/// diag(p2, 1-p2, 0); both p must lie in [1/2, 1].
pub fn mpemba_compare(p1: f64, p2: f64) -> Result<MpembaComparison> {
    let (in1, out1) = concentrated_output_measures(p1)?;
    let (in2, out2) = concentrated_output_measures(p2)?;
    let inversion = (in1 > in2 && out1 < out2) || (in1 < in2 && out1 > out2);
    Ok(MpembaComparison {
        p1,
        p2,
        measure_in_1: in1,
        measure_in_2: in2,
        measure_out_1: out1,
        measure_out_2: out2,
        inversion,
    })
}

/// Scans p over [1/2, 1] with the given step, comparing each point
/// against the reference p = 1/2.
pub fn mpemba_scan(step: f64) -> Result<Vec<MpembaComparison>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::ParameterOutOfRange {
            name: "step",
            value: step,
            min: f64::MIN_POSITIVE,
            max: 0.5,
        });
    }
    let count = (0.5 / step).round() as usize;
    let mut rows = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let p = (0.5 + k as f64 * step).min(1.0);
        rows.push(mpemba_compare(p, 0.5)?);
    }
    Ok(rows)
}

/// Qutrit spectra (a0, a1, a2) on a regular grid over the probability
/// simplex with `divisions` steps per edge.
///
/// By default only the sorted sector a0 >= a1 >= a2 is produced, which
/// covers every spectrum up to relabeling; `full_triangle` emits the
/// whole simplex for symmetric surface plots. Rows are ordered by
/// descending a0, then descending a1, so output is deterministic.
pub fn qutrit_grid(divisions: usize, full_triangle: bool) -> Result<Vec<[f64; 3]>> {
    if divisions == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "divisions",
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let n = divisions;
    let step = 1.0 / n as f64;
    let mut rows = Vec::new();
    for i in (0..=n).rev() {
        for j in (0..=(n - i)).rev() {
            let k = n - i - j;
            if full_triangle || (i >= j && j >= k) {
                rows.push([i as f64 * step, j as f64 * step, k as f64 * step]);
            }
        }
    }
    Ok(rows)
}

/// Measure gain unlocked by consuming correlations with a purification:
/// -log2 ||rho||_inf, the full activation to a pure output.
pub fn activation_delta(rho: &DensityMatrix) -> f64 {
    -rho.max_eigenvalue().log2()
}

/// How much the correlated protocol beats the uncorrelated optimum:
/// activation_delta(rho) - delta_p(rho) = -log2 of the d largest
/// eigenvalue products of rho (x) rho.
///
/// Strictly positive for every state that is not pure, including bound
/// states that have no uncorrelated gain at all.
pub fn entanglement_advantage(rho: &DensityMatrix) -> f64 {
    let a = rho.eigenvalues();
    let top: f64 = ordered_products(a, a)
        .iter()
        .take(rho.dim())
        .map(|l| l.value)
        .sum();
    -top.log2()
}

/// Runs the activation protocol: rotate the dominant eigenvector of the
/// joint state onto |0,0> (the general form of the |phi+> to |00> swap),
/// complete to a unitary, evolve and report.
///
/// On a pure purification this concentrates everything: the A marginal
/// comes out pure. On an uncorrelated product of sorted diagonal states
/// the rotation is the identity and nothing happens.
pub fn activation_demo(joint: &BipartiteState) -> Result<ConcentrationReport> {
    let n = joint.dim_a() * joint.dim_b();
    let dominant = joint.joint().spectrum().eigenvector(0);
    let basis = orthonormal_completion(&[dominant], n);
    let u = ComplexMatrix::from_fn(n, n, |r, c| basis[r][c].conj());
    evolve_and_trace(joint, &UnitaryMatrix::new(u)?)
}
