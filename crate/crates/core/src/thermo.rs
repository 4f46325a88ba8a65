// SPDX-License-Identifier: Apache-2.0

//! Relative entropy, entropy production and the detailed balance check.
//!
//! Relative entropy uses the nonpositive convention
//! `S(ρ|σ) = Tr(ρ(log σ − log ρ))`. Along a flow towards `ρ_ref` it rises to
//! 0, and the entropy production `σ(ρ) = Tr(𝓛*(ρ)(log ρ_ref − log ρ))` is its
//! time derivative, which is nonnegative.

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{validate_density, Lindbladian, Picture, DENSITY_TOL};
use crate::model::{gibbs_weights, LindbladModel};
use crate::operators::{
    embed_site, gns_inner, herm_eig, matrix_unit, max_abs, sigma_plus, CMatrix, ChainOperator,
    COMPARISON_TOL, PSD_FLOOR,
};
use crate::sampling::rng_for;

/// Largest chain checked exhaustively over all matrix-unit pairs.
pub const EXHAUSTIVE_BALANCE_SITES: usize = 4;
/// Pairs drawn when the check is sampled.
pub const SAMPLED_BALANCE_PAIRS: usize = 4096;
/// Root seed of the sampled check.
pub const BALANCE_SEED: u64 = 0x5EED_BA1A;

/// Spectral weight below which a diagonal term counts as off-support.
const SUPPORT_TOL: f64 = 1e-12;
/// Pairs with both the gap and the matrix element below this contribute 0.
const PAIR_ZERO_TOL: f64 = 1e-14;

/// `Tr(ρ(log σ − log ρ))`, or `−∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &ChainOperator, sigma: &ChainOperator) -> Result<f64> {
    validate_density(rho, DENSITY_TOL)?;
    validate_density(sigma, DENSITY_TOL)?;
    relative_entropy_unchecked(rho.matrix(), sigma.matrix())
}

/// Same as [`relative_entropy`] for raw Hermitian PSD matrices.
pub fn relative_entropy_unchecked(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let er = herm_eig(rho)?;
    let es = herm_eig(sigma)?;
    let d = rho.nrows();
    // weight of ρ on each eigenvector of σ
    let w = es.eigenvectors.adjoint() * rho * &es.eigenvectors;
    let mut cross = 0.0;
    for k in 0..d {
        let p = w[(k, k)].re;
        let s = es.eigenvalues[k];
        if s <= PSD_FLOOR {
            if p > SUPPORT_TOL {
                return Ok(f64::NEG_INFINITY);
            }
        } else {
            cross += p * s.ln();
        }
    }
    let own: f64 = er
        .eigenvalues
        .iter()
        .filter(|&&x| x > PSD_FLOOR)
        .map(|&x| x * x.ln())
        .sum();
    Ok(cross - own)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMethod {
    Definition,
    ClosedForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub sigma_total: f64,
    pub per_bath: Vec<f64>,
    /// Contribution of `−i[H_S, ρ]`; zero when `ρ_ref` commutes with `H_S`.
    pub hamiltonian_part: f64,
    pub method: EntropyMethod,
    /// Eigen-index pairs of `ρ` that hit the `0·log 0` or `−∞` conventions.
    pub support_warnings: Vec<(usize, usize)>,
}

/// `Tr(𝓛*(ρ)(log ρ_ref − log ρ))`, split into the Hamiltonian part and one
/// term per bath.
///
/// Where `ρ` has a zero eigenvalue the term `⟨Ψ_j, 𝓛*(ρ)Ψ_j⟩ log ρ_j` is 0 if
/// the flow into `Ψ_j` vanishes and `+∞` production otherwise; both cases are
/// flagged.
pub fn entropy_production_def(
    model: &LindbladModel,
    rho: &ChainOperator,
    rho_ref: &ChainOperator,
) -> Result<EntropyReport> {
    validate_density(rho, DENSITY_TOL)?;
    validate_density(rho_ref, DENSITY_TOL)?;
    let eref = herm_eig(rho_ref.matrix())?;
    let min_ref = eref.min_eigenvalue();
    if min_ref <= PSD_FLOOR {
        return Err(Error::NotFaithful {
            min_eigenvalue: min_ref,
        });
    }
    let log_ref = eref.apply_fn(|x| c64::new(x.ln(), 0.0));
    let er = herm_eig(rho.matrix())?;
    let d = rho.dim();
    let gen = Lindbladian::new(model)?;

    let mut warnings = Vec::new();
    // Tr(A (log ρ_ref − log ρ)) with the support conventions for log ρ
    let pair = |a: &CMatrix, warnings: &mut Vec<(usize, usize)>| -> f64 {
        let t_ref = trace_product(a, &log_ref);
        let diag = er.eigenvectors.adjoint() * a * &er.eigenvectors;
        let mut t_log = 0.0;
        for j in 0..d {
            let x = er.eigenvalues[j];
            let flow = diag[(j, j)].re;
            if x > PSD_FLOOR {
                t_log += flow * x.ln();
            } else {
                if !warnings.contains(&(j, j)) {
                    warnings.push((j, j));
                }
                if flow.abs() > SUPPORT_TOL {
                    t_log += if flow > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    };
                }
            }
        }
        t_ref - t_log
    };

    let h = gen.hamiltonian_part(rho, Picture::Schrodinger)?;
    let hamiltonian_part = pair(h.matrix(), &mut warnings);
    let mut per_bath = Vec::with_capacity(model.baths.len());
    for j in 0..model.baths.len() {
        let dj = gen.dissipator(j, rho, Picture::Schrodinger)?;
        per_bath.push(pair(dj.matrix(), &mut warnings));
    }
    let sigma_total = hamiltonian_part + per_bath.iter().sum::<f64>();
    warnings.sort();
    Ok(EntropyReport {
        sigma_total,
        per_bath,
        hamiltonian_part,
        method: EntropyMethod::Definition,
        support_warnings: warnings,
    })
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Closed form for baths at a common finite `β` and faithful `ρ`:
/// `σ_k = 4β_0 Σ_{j,l} |⟨Ψ_l, σ_+^{(k)} Ψ_j⟩|² (e^{2β}ρ_l − ρ_j)(log ρ_l − log ρ_j + 2β)`.
pub fn entropy_production_closed(
    model: &LindbladModel,
    rho: &ChainOperator,
) -> Result<EntropyReport> {
    let beta = model.common_beta().ok_or(Error::UnequalTemperatures)?;
    if !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    validate_density(rho, DENSITY_TOL)?;
    let (b0, _) = gibbs_weights(beta)?;
    let e = herm_eig(rho.matrix())?;
    let min = e.min_eigenvalue();
    if min <= PSD_FLOOR {
        return Err(Error::Singular { value: min });
    }
    let n = rho.n_sites();
    let d = rho.dim();
    let boltz = (2.0 * beta).exp();
    let logs: Vec<f64> = e.eigenvalues.iter().map(|x| x.ln()).collect();
    let mut per_bath = Vec::with_capacity(model.baths.len());
    for b in &model.baths {
        let sp = embed_site(&sigma_plus(), b.site, n)?;
        let me = e.eigenvectors.adjoint() * sp.matrix() * &e.eigenvectors;
        let mut acc = 0.0;
        for j in 0..d {
            for l in 0..d {
                let amp = me[(l, j)].norm();
                let (rj, rl) = (e.eigenvalues[j], e.eigenvalues[l]);
                if amp < PAIR_ZERO_TOL && (rl - rj).abs() < PAIR_ZERO_TOL {
                    continue;
                }
                acc += amp * amp * (boltz * rl - rj) * (logs[l] - logs[j] + 2.0 * beta);
            }
        }
        per_bath.push(4.0 * b0 * acc);
    }
    Ok(EntropyReport {
        sigma_total: per_bath.iter().sum(),
        per_bath,
        hamiltonian_part: 0.0,
        method: EntropyMethod::ClosedForm,
        support_warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DetailedBalanceReport {
    /// `‖[H_S, ρ]‖_max`.
    pub commutation_residual: f64,
    /// `max |⟨𝓛_d(A), B⟩_ρ − ⟨A, 𝓛_d(B)⟩_ρ|` over matrix units `A, B`.
    pub symmetry_residual: f64,
    pub satisfied: bool,
    pub pairs_checked: usize,
    pub exhaustive: bool,
}

/// Checks `[H_S, ρ] = 0` and self-adjointness of the observable-picture
/// dissipator `𝓛_d` in `⟨A, B⟩_ρ = Tr(ρA*B)`.
pub fn detailed_balance_certificate(
    model: &LindbladModel,
    rho: &ChainOperator,
) -> Result<DetailedBalanceReport> {
    detailed_balance_certificate_seeded(model, rho, BALANCE_SEED)
}

pub fn detailed_balance_certificate_seeded(
    model: &LindbladModel,
    rho: &ChainOperator,
    seed: u64,
) -> Result<DetailedBalanceReport> {
    validate_density(rho, DENSITY_TOL)?;
    let min = herm_eig(rho.matrix())?.min_eigenvalue();
    if min <= PSD_FLOOR {
        return Err(Error::NotFaithful {
            min_eigenvalue: min,
        });
    }
    let gen = Lindbladian::new(model)?;
    if rho.dim() != gen.dim() {
        return Err(Error::ShapeMismatch {
            left: (rho.dim(), rho.dim()),
            right: (gen.dim(), gen.dim()),
        });
    }
    let h = gen.hamiltonian().matrix();
    let r = rho.matrix();
    let commutation_residual = max_abs(&(h * r - r * h));
    let d = gen.dim();
    let n = gen.n_sites();

    let (symmetry_residual, pairs_checked, exhaustive) = if n <= EXHAUSTIVE_BALANCE_SITES {
        let mut dm = Mat::<c64>::zeros(d * d, d * d);
        for j in 0..model.baths.len() {
            dm += gen.dissipator_superoperator(j, Picture::Heisenberg)?;
        }
        // ⟨A, B⟩_ρ = vec(A)* W vec(B) with W = ρᵀ ⊗ I
        let mut w = Mat::<c64>::zeros(d * d, d * d);
        crate::lindblad::add_kron(
            &mut w,
            c64::new(1.0, 0.0),
            &r.transpose().to_owned(),
            &crate::operators::identity(d),
        );
        let res = dm.adjoint() * &w - &w * &dm;
        (max_abs(&res), d * d * d * d, true)
    } else {
        let mut rng = rng_for(seed, n as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..SAMPLED_BALANCE_PAIRS {
            let (a0, a1, b0, b1) = (
                rng.random_range(0..d),
                rng.random_range(0..d),
                rng.random_range(0..d),
                rng.random_range(0..d),
            );
            let ea = ChainOperator::new(n, matrix_unit(d, a0, a1))?;
            let eb = ChainOperator::new(n, matrix_unit(d, b0, b1))?;
            let la = gen.dissipative_part(&ea, Picture::Heisenberg)?;
            let lb = gen.dissipative_part(&eb, Picture::Heisenberg)?;
            let lhs = gns_inner(r, la.matrix(), eb.matrix())?;
            let rhs = gns_inner(r, ea.matrix(), lb.matrix())?;
            worst = worst.max((lhs - rhs).norm());
        }
        (worst, SAMPLED_BALANCE_PAIRS, false)
    };
    Ok(DetailedBalanceReport {
        commutation_residual,
        symmetry_residual,
        satisfied: commutation_residual <= COMPARISON_TOL && symmetry_residual <= COMPARISON_TOL,
        pairs_checked,
        exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{evolve, EvolveMethod};
    use crate::model::{product_gibbs, ChainParams};
    use crate::operators::{diag, identity, scale_real};
    use crate::sampling::random_density;
    use crate::steady::stationary_kernel;

    fn op(n: usize, m: CMatrix) -> ChainOperator {
        ChainOperator::new(n, m).unwrap()
    }

    fn two_bath(n: usize, b: f64, bp: f64) -> LindbladModel {
        LindbladModel::two_bath(ChainParams::paper_default(n), b, bp).unwrap()
    }

    #[test]
    fn relative_entropy_examples() {
        let r = op(1, diag(&[0.3, 0.7]));
        assert!(relative_entropy(&r, &r).unwrap().abs() < 1e-15);
        let s = relative_entropy(&op(1, diag(&[1.0, 0.0])), &op(1, diag(&[0.0, 1.0]))).unwrap();
        assert_eq!(s, f64::NEG_INFINITY);
        let s = relative_entropy(&op(1, diag(&[0.5, 0.5])), &op(1, diag(&[0.25, 0.75]))).unwrap();
        assert!((s - 0.5 * 0.75f64.ln()).abs() < 1e-14);
        // pure state inside the support of a faithful state stays finite
        let s = relative_entropy(&op(1, diag(&[1.0, 0.0])), &op(1, diag(&[0.5, 0.5]))).unwrap();
        assert!((s - 0.5f64.ln()).abs() < 1e-14);
        assert!(relative_entropy(&op(1, diag(&[0.6, 0.6])), &r).is_err());
    }

    #[test]
    fn entropy_production_vanishes_at_equilibrium() {
        let m = two_bath(3, 0.8, 0.8);
        let g = product_gibbs(0.8, 3).unwrap();
        let r = entropy_production_def(&m, &g, &g).unwrap();
        assert!(r.sigma_total.abs() < 1e-12);
        let c = entropy_production_closed(&m, &g).unwrap();
        assert!(c.sigma_total.abs() < 1e-12);
    }

    #[test]
    fn definition_matches_closed_form_on_mixed_gibbs() {
        let m = two_bath(2, 0.8, 0.8);
        let g = product_gibbs(0.8, 2).unwrap();
        let rho = op(
            2,
            scale_real(g.matrix(), 0.9) + scale_real(&identity(4), 0.1 / 4.0),
        );
        let a = entropy_production_def(&m, &rho, &g).unwrap();
        let b = entropy_production_closed(&m, &rho).unwrap();
        assert!((a.sigma_total - b.sigma_total).abs() <= 1e-9);
        assert!(a.sigma_total > 0.0);
        for (x, y) in a.per_bath.iter().zip(&b.per_bath) {
            assert!((x - y).abs() <= 1e-9);
        }
        assert!(a.hamiltonian_part.abs() < 1e-12);
        assert!((b.sigma_total - b.per_bath.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_bad_inputs() {
        let m = two_bath(2, 0.5, 1.0);
        let g = product_gibbs(0.5, 2).unwrap();
        assert!(matches!(
            entropy_production_closed(&m, &g),
            Err(Error::UnequalTemperatures)
        ));
        let m = two_bath(2, 0.5, 0.5);
        let pure = op(2, diag(&[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(
            entropy_production_closed(&m, &pure),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            entropy_production_def(&m, &g, &pure),
            Err(Error::NotFaithful { .. })
        ));
    }

    #[test]
    fn singular_state_conventions() {
        let m = two_bath(2, 0.5, 0.5);
        let g = product_gibbs(0.5, 2).unwrap();
        // |↑↑⟩ is pumped out of, and the bath refills empty levels: +∞
        let pure = op(2, diag(&[1.0, 0.0, 0.0, 0.0]));
        let r = entropy_production_def(&m, &pure, &g).unwrap();
        assert_eq!(r.sigma_total, f64::INFINITY);
        assert!(!r.support_warnings.is_empty());
    }

    #[test]
    fn entropy_production_nonnegative_on_random_states() {
        let m = two_bath(2, 0.6, 0.6);
        let g = product_gibbs(0.6, 2).unwrap();
        let mut rng = rng_for(3, 0);
        for _ in 0..20 {
            let rho = op(2, random_density(4, &mut rng));
            let a = entropy_production_def(&m, &rho, &g).unwrap();
            let b = entropy_production_closed(&m, &rho).unwrap();
            assert!(a.sigma_total >= -1e-10);
            assert!((a.sigma_total - b.sigma_total).abs() <= 1e-9);
        }
    }

    #[test]
    fn derivative_of_relative_entropy() {
        let m = two_bath(2, 0.7, 0.7);
        let g = product_gibbs(0.7, 2).unwrap();
        let rho0 = op(2, random_density(4, &mut rng_for(5, 0)));
        let t = 0.3;
        let delta = 1e-5;
        let a = evolve(&m, &rho0, t, EvolveMethod::ExactExpm, 1e-12)
            .unwrap()
            .state;
        let b = evolve(&m, &rho0, t + delta, EvolveMethod::ExactExpm, 1e-12)
            .unwrap()
            .state;
        // S ≤ 0 rises to 0 along the flow, so σ is its forward derivative
        let fd = (relative_entropy(&b, &g).unwrap() - relative_entropy(&a, &g).unwrap()) / delta;
        let s = entropy_production_def(&m, &a, &g).unwrap().sigma_total;
        assert!((fd - s).abs() <= 1e-3 * s.abs(), "fd {fd} sigma {s}");
    }

    #[test]
    fn detailed_balance_at_equal_temperature() {
        for n in 1..=3 {
            let m = two_bath(n, 0.9, 0.9);
            let g = product_gibbs(0.9, n).unwrap();
            let r = detailed_balance_certificate(&m, &g).unwrap();
            assert!(r.satisfied, "{r:?}");
            assert!(r.commutation_residual <= 1e-10 && r.symmetry_residual <= 1e-10);
            assert!(r.exhaustive);
        }
        let all = LindbladModel::all_sites(ChainParams::paper_default(3), 0.4).unwrap();
        let r = detailed_balance_certificate(&all, &product_gibbs(0.4, 3).unwrap()).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn detailed_balance_fails_out_of_equilibrium() {
        let m = two_bath(2, 0.5, 1.0);
        let rho = stationary_kernel(&m).unwrap().state.unwrap();
        let r = detailed_balance_certificate(&m, &rho).unwrap();
        assert!(!r.satisfied);
        assert!(r.commutation_residual > 1e-3);
    }

    #[test]
    fn sampled_check_is_seeded_and_passes() {
        let m = two_bath(5, 0.9, 0.9);
        let g = product_gibbs(0.9, 5).unwrap();
        let r = detailed_balance_certificate(&m, &g).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.pairs_checked, SAMPLED_BALANCE_PAIRS);
        assert!(r.satisfied);
        let r2 = detailed_balance_certificate(&m, &g).unwrap();
        assert_eq!(r.symmetry_residual, r2.symmetry_residual);
    }
}
