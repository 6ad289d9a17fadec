//! Measurement randomness against an adversary holding a purification.
//!
//! The figure of merit is the guessing probability (tr sqrt(rho))^2 / d,
//! minimized over rank-one projective measurements: 1/d for pure states
//! (perfect randomness is extractable) and 1 for the maximally mixed
//! state (the adversary's purification predicts every outcome). It is not
//! monotone in the non-equilibrium measure, but any state with a strict
//! concentration gain admits a two-level unitary on two copies that
//! strictly lowers it.

use crate::concentration::{delta_p, ordered_products, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use crate::tol;

/// Guessing probability (tr sqrt(rho))^2 / d against quantum side
/// information, for the best randomness-generating projective measurement.
pub fn guess_prob(rho: &DensityMatrix) -> f64 {
    let root_sum: f64 = rho.eigenvalues().iter().map(|&x| x.max(0.0).sqrt()).sum();
    root_sum * root_sum / rho.dim() as f64
}

/// A pair (sigma, rho) witnessing that the non-equilibrium measure does
/// not order guessing probabilities: sigma is further from equilibrium
/// than rho yet easier to guess.
pub fn order_counterexample() -> (DensityMatrix, DensityMatrix) {
    let sigma = DensityMatrix::from_eigenvalues(&[0.5, 0.125, 0.125, 0.125, 0.125])
        .expect("hand-picked spectrum is valid");
    let third = 1.0 / 3.0;
    let rho = DensityMatrix::from_eigenvalues(&[third, third, third, 0.0, 0.0])
        .expect("hand-picked spectrum is valid");
    (sigma, rho)
}

/// Everything produced by [`randomness_unitary`].
#[derive(Clone, Debug)]
pub struct RandomnessReport {
    pub p_guess_before: f64,
    pub p_guess_after: f64,
    /// Non-equilibrium measure of the input and of the improved marginal.
    pub p_before: f64,
    pub p_after: f64,
    /// Population moved from eigenlevel `source_pair.0` up to level 0.
    pub delta_star: f64,
    /// Eigenlevel pair (i, j) of the two copies whose joint population
    /// feeds the swap.
    pub source_pair: (usize, usize),
    /// Eigenlevel k of the second copy receiving the swapped weight.
    pub target_level: usize,
    /// Eigenvalues of the improved A marginal, in the eigenbasis order of
    /// the input (not re-sorted).
    pub output_eigenvalues: Vec<f64>,
    /// The two-level swap in the computational basis.
    pub unitary: UnitaryMatrix,
}

/// Builds the two-level unitary on rho (x) rho that strictly increases
/// the measure and strictly lowers the guessing probability.
///
/// Works in the eigenbasis: with products c_k of the descending spectrum
/// sorted descending, a strict gain guarantees some k < d with
/// c_k > a_0 a_k. The swap |i*, j*> <-> |0, k> for a factorization
/// c_k = a_i* a_j* moves delta* = c_k - a_0 a_k of population from level
/// i* to level 0. Among factorizations of the same value the
/// lexicographically smallest pair with i != 0 is preferred, since i = 0
/// would cancel the level-0 update; the result is conjugated back to the
/// computational basis.
pub fn randomness_unitary(rho: &DensityMatrix) -> Result<RandomnessReport> {
    let tols = tol::current();
    let gain = delta_p(rho);
    if gain <= tols.equality {
        return Err(Error::NoConstruction {
            delta_p: gain,
            tolerance: tols.equality,
        });
    }
    let d = rho.dim();
    let a = rho.eigenvalues();
    let levels = ordered_products(a, a);
    let k_star = (1..d)
        .find(|&k| levels[k].value > a[0] * a[k])
        .ok_or(Error::NoConstruction {
            delta_p: gain,
            tolerance: tols.equality,
        })?;
    let target = levels[k_star].value;

    // All exact factorizations of the chosen product value.
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if a[i] * a[j] == target {
                candidates.push((i, j));
            }
        }
    }
    let (i_star, j_star) = candidates
        .iter()
        .filter(|&&(i, _)| i != 0)
        .min()
        .or_else(|| candidates.iter().min())
        .copied()
        .expect("the sorted product list contains its own entry");

    let delta_star = target - a[0] * a[k_star];
    let mut output = a.to_vec();
    output[0] += delta_star;
    output[i_star] = (output[i_star] - delta_star).max(0.0);

    // Two-level permutation in the eigenbasis, conjugated back.
    let n = d * d;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(i_star * d + j_star, k_star);
    let p = UnitaryMatrix::from_permutation(&perm)?;
    let w = rho.spectrum().eigenvectors();
    let basis_change = w.kron(w);
    let v = basis_change.mul(p.matrix()).mul(&basis_change.adjoint());
    let unitary = UnitaryMatrix::new(v)?;

    let df = d as f64;
    let root_before: f64 = a.iter().map(|&x| x.max(0.0).sqrt()).sum();
    let root_after: f64 = output.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(RandomnessReport {
        p_guess_before: root_before * root_before / df,
        p_guess_after: root_after * root_after / df,
        p_before: (df * a[0]).log2(),
        p_after: (df * (a[0] + delta_star)).log2(),
        delta_star,
        source_pair: (i_star, j_star),
        target_level: k_star,
        output_eigenvalues: output,
        unitary,
    })
}

/// Drop in tr sqrt between the input and the improved marginal:
/// sqrt(a_0) + sqrt(a_i*) - sqrt(a_0 + delta*) - sqrt(a_i* - delta*),
/// strictly positive whenever the construction exists.
pub fn randomness_gain(rho: &DensityMatrix) -> Result<f64> {
    let report = randomness_unitary(rho)?;
    let a = rho.eigenvalues();
    let i = report.source_pair.0;
    let d = report.delta_star;
    Ok(a[0].sqrt() + a[i].sqrt() - (a[0] + d).sqrt() - (a[i] - d).max(0.0).sqrt())
}
