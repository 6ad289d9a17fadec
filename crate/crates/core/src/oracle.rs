//! Seeded random generators and brute-force cross-checks.
//!
//! The verifiers here are deliberately independent of the closed forms
//! they confirm: the Ky Fan check enumerates index subsets, the unitary
//! search samples Haar matrices blindly, and the permutation search tries
//! every population reshuffle. Each takes an explicit seed or exhausts a
//! finite space, so every result is reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::concentration::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, ComplexMatrix, C64};
use crate::states::DensityMatrix;

/// Largest joint dimension the subset-enumeration verifier accepts.
pub const BRUTE_FORCE_DIM_CAP: usize = 36;

/// Largest number of subsets the enumeration verifier will walk.
pub const BRUTE_FORCE_SUBSET_CAP: u128 = 20_000_000;

/// Deterministic generator for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector of length `d`, sorted descending.
///
/// Entries are normalized unit-exponential samples, which is the flat
/// (Lebesgue) distribution on the probability simplex.
pub fn random_spectrum(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut spectrum: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = spectrum.iter().sum();
    for x in &mut spectrum {
        *x /= total;
    }
    spectrum.sort_by(|a, b| b.partial_cmp(a).expect("finite samples"));
    spectrum
}

/// Haar-distributed `n x n` unitary.
///
/// Orthonormalizes a complex Gaussian matrix column by column with a
/// re-orthogonalization pass. The normalization fixes each diagonal of
/// the implicit triangular factor to be positive real, which is the
/// gauge that makes the result Haar-distributed.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> UnitaryMatrix {
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for _pass in 0..2 {
            for prev in 0..k {
                let (head, tail) = cols.split_at_mut(k);
                let prev_col = &head[prev];
                let col_k = &mut tail[0];
                let overlap: C64 = prev_col
                    .iter()
                    .zip(col_k.iter())
                    .map(|(p, x)| p.conj() * *x)
                    .sum();
                for (x, p) in col_k.iter_mut().zip(prev_col.iter()) {
                    *x -= overlap * *p;
                }
            }
        }
        let norm = vec_norm(&cols[k]);
        assert!(norm > 1e-12, "Gaussian matrix is almost surely full rank");
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    let matrix = ComplexMatrix::from_fn(n, n, |r, c| cols[c][r]);
    UnitaryMatrix::new(matrix).expect("orthonormalized columns form a unitary")
}

/// Random density matrix: a flat-simplex spectrum conjugated by a Haar
/// unitary. The cached spectrum is inherited from the construction.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let spectrum = random_spectrum(d, rng);
    let u = haar_unitary(d, rng);
    let matrix = ComplexMatrix::from_diag(&spectrum).conjugate_by(u.matrix());
    DensityMatrix::new(matrix).expect("conjugated spectrum stays a valid state")
}

/// Random Hermitian matrix with independent Gaussian entries, as
/// (G + G^dagger) / 2.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    g.add(&g.adjoint()).scale(0.5)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut value: u128 = 1;
    for i in 0..k {
        value = value * (n - i) as u128 / (i + 1) as u128;
    }
    value
}

/// Largest sum of `k` products a_i b_j, found by enumerating every
/// k-subset of the product grid. No sorting is involved, so this is an
/// independent witness for the top-k product formula.
pub fn ky_fan_bruteforce(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    let n = a.len() * b.len();
    if n > BRUTE_FORCE_DIM_CAP {
        return Err(Error::SizeCapExceeded {
            size: n,
            cap: BRUTE_FORCE_DIM_CAP,
        });
    }
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange { k, max: n });
    }
    let subsets = binomial(n, k);
    if subsets > BRUTE_FORCE_SUBSET_CAP {
        return Err(Error::SizeCapExceeded {
            size: subsets.min(usize::MAX as u128) as usize,
            cap: BRUTE_FORCE_SUBSET_CAP as usize,
        });
    }
    let mut values = Vec::with_capacity(n);
    for &x in a {
        for &y in b {
            values.push(x * y);
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sum: f64 = idx.iter().map(|&i| values[i]).sum();
        best = best.max(sum);
        // Advance to the next combination in lexicographic order.
        let mut t = k;
        while t > 0 && idx[t - 1] == n - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        idx[t - 1] += 1;
        for u in t..k {
            idx[u] = idx[u - 1] + 1;
        }
    }
    Ok(best)
}

/// Best non-equilibrium measure of the A marginal over `samples` Haar
/// unitaries applied to rho_a (x) eta_b; seed-deterministic regardless
/// of thread count. Returns negative infinity when `samples` is zero.
pub fn random_unitary_search(
    rho_a: &DensityMatrix,
    eta_b: &DensityMatrix,
    samples: usize,
    seed: u64,
) -> f64 {
    let joint = rho_a.matrix().kron(eta_b.matrix());
    let dim_a = rho_a.dim();
    let dim_b = eta_b.dim();
    let n = dim_a * dim_b;
    (0..samples)
        .into_par_iter()
        .map(|idx| {
            let mut rng = seeded_rng(seed.wrapping_add(idx as u64));
            let u = haar_unitary(n, &mut rng);
            let rotated = u.matrix().mul(&joint);
            // sigma_A[r][c] = sum_{b, k} rotated[r dB + b][k] conj(u[c dB + b][k])
            let sigma_a = ComplexMatrix::from_fn(dim_a, dim_a, |r, c| {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..dim_b {
                    for k in 0..n {
                        acc +=
                            rotated.get(r * dim_b + b, k) * u.matrix().get(c * dim_b + b, k).conj();
                    }
                }
                acc
            });
            let spectrum = sigma_a.hermitian_eig().expect("marginal is Hermitian");
            (dim_a as f64 * spectrum.eigenvalues()[0]).log2()
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Exhaustive search over eigenbasis permutations of two copies of rho.
///
/// Every way of filling the first marginal row with d of the d^2 product
/// populations is tried; the reported value is the true measure gain of
/// the best permutation, judged by its largest marginal row sum. Returns
/// the gain and a witness permutation (input index to output index).
pub fn permutation_search(rho: &DensityMatrix) -> Result<(f64, Vec<usize>)> {
    let d = rho.dim();
    if d > 4 {
        return Err(Error::SizeCapExceeded { size: d, cap: 4 });
    }
    let a = rho.eigenvalues();
    let n = d * d;
    let mut values = Vec::with_capacity(n);
    for &x in a {
        for &y in a {
            values.push(x * y);
        }
    }
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_perm: Vec<usize> = (0..n).collect();
    let mut chosen: Vec<usize> = (0..d).collect();
    loop {
        // Row sums of the permuted populations: the chosen subset fills
        // row 0, the complement fills the rest in ascending order.
        let mut rows = vec![0.0f64; d];
        let mut in_subset = vec![false; n];
        for &i in &chosen {
            rows[0] += values[i];
            in_subset[i] = true;
        }
        let mut slot = 0;
        for i in 0..n {
            if !in_subset[i] {
                rows[1 + slot / d] += values[i];
                slot += 1;
            }
        }
        let top = rows.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gain = (top / a[0]).log2();
        if gain > best_gain {
            best_gain = gain;
            let mut perm = vec![0usize; n];
            let mut out = d;
            for (t, &i) in chosen.iter().enumerate() {
                perm[i] = t;
            }
            for i in 0..n {
                if !in_subset[i] {
                    perm[i] = out;
                    out += 1;
                }
            }
            best_perm = perm;
        }
        let mut t = d;
        while t > 0 && chosen[t - 1] == n - d + t - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        chosen[t - 1] += 1;
        for u in t..d {
            chosen[u] = chosen[u - 1] + 1;
        }
    }
    Ok((best_gain, best_perm))
}
