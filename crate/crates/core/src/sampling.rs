// SPDX-License-Identifier: Apache-2.0

//! Seeded random matrices for sweeps and property checks.

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{hermitian_part, scale_real, trace, CMatrix};

pub type SweepRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-task seed: `splitmix64(root ^ splitmix64(index))`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

pub fn rng_for(root: u64, index: u64) -> SweepRng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, index))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c64::new(s * re, s * im);
        }
    }
    m
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    hermitian_part(&ginibre(d, rng))
}

/// `G G* / Tr(G G*)`; full rank with probability one.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rng);
    let m = hermitian_part(&(&g * g.adjoint()));
    let t = trace(&m).re;
    scale_real(&m, 1.0 / t)
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rng);
    let norm2: f64 = (0..d).map(|i| g[(i, 0)].norm_sqr()).sum();
    Mat::from_fn(d, d, |i, j| g[(i, 0)] * g[(j, 0)].conj() / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{herm_eig, max_abs_diff};

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
        let a = random_density(4, &mut rng_for(1, 2));
        let b = random_density(4, &mut rng_for(1, 2));
        assert_eq!(max_abs_diff(&a, &b), 0.0);
    }

    #[test]
    fn random_states_are_states() {
        let mut rng = rng_for(11, 0);
        for _ in 0..10 {
            let r = random_density(8, &mut rng);
            assert!((trace(&r).re - 1.0).abs() < 1e-14);
            assert!(herm_eig(&r).unwrap().min_eigenvalue() > 0.0);
            let p = random_pure(4, &mut rng);
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-14);
        }
    }
}
