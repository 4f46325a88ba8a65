// SPDX-License-Identifier: Apache-2.0

//! Chain parameters, Hamiltonians, single-spin Gibbs states and bath specifications.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    axpy, chain_dim, diag, embed_site, kron_all, sigma_x, sigma_y, sigma_z, CMatrix, ChainOperator,
};

/// Parameters of the XY chain Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub b_field: f64,
    pub jx: f64,
    pub jy: f64,
}

impl ChainParams {
    pub fn new(n_sites: usize, b_field: f64, jx: f64, jy: f64) -> Result<Self> {
        let p = Self {
            n_sites,
            b_field,
            jx,
            jy,
        };
        p.validate()?;
        Ok(p)
    }

    /// `B = J_x = J_y = 1`.
    pub fn paper_default(n_sites: usize) -> Self {
        Self {
            n_sites,
            b_field: 1.0,
            jx: 1.0,
            jy: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidModel("n_sites must be >= 1".into()));
        }
        chain_dim(self.n_sites)?;
        for (name, v) in [("b_field", self.b_field), ("jx", self.jx), ("jy", self.jy)] {
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Gibbs weights `(β_0, β_1)` of `e^{-βσ_z}/Tr e^{-βσ_z}`.
///
/// Evaluated as logistic functions so that large `|β|` neither overflows nor
/// loses the small weight.
pub fn gibbs_weights(beta: f64) -> Result<(f64, f64)> {
    if beta.is_nan() || beta == f64::NEG_INFINITY {
        return Err(Error::InvalidBeta(beta));
    }
    if beta == f64::INFINITY {
        return Ok((0.0, 1.0));
    }
    let b0 = 1.0 / (1.0 + (2.0 * beta).exp());
    let b1 = 1.0 / (1.0 + (-2.0 * beta).exp());
    Ok((b0, b1))
}

/// One heat bath attached to a chain site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// 1-based site index.
    pub site: usize,
    pub beta: f64,
    pub beta0: f64,
    pub beta1: f64,
}

impl BathSpec {
    pub fn new(site: usize, beta: f64) -> Result<Self> {
        let (beta0, beta1) = gibbs_weights(beta)?;
        if site == 0 {
            return Err(Error::InvalidModel("bath site must be >= 1".into()));
        }
        Ok(Self {
            site,
            beta,
            beta0,
            beta1,
        })
    }

    pub fn gibbs(&self) -> CMatrix {
        diag(&[self.beta0, self.beta1])
    }
}

/// Chain parameters together with the attached baths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    pub params: ChainParams,
    pub baths: Vec<BathSpec>,
}

impl LindbladModel {
    pub fn new(params: ChainParams, baths: Vec<BathSpec>) -> Result<Self> {
        params.validate()?;
        let n = params.n_sites;
        if baths.is_empty() {
            return Err(Error::InvalidModel("at least one bath required".into()));
        }
        if baths.len() > n {
            return Err(Error::InvalidModel(format!(
                "{} baths on a {n}-site chain",
                baths.len()
            )));
        }
        for (i, b) in baths.iter().enumerate() {
            if b.site == 0 || b.site > n {
                return Err(Error::SiteOutOfRange {
                    site: b.site,
                    n_sites: n,
                });
            }
            if baths[..i].iter().any(|o| o.site == b.site) {
                return Err(Error::InvalidModel(format!(
                    "duplicate bath site {}",
                    b.site
                )));
            }
        }
        Ok(Self { params, baths })
    }

    /// Baths at sites 1 and N with inverse temperatures `beta` and `beta_prime`.
    ///
    /// For a single site only the first bath is attached.
    pub fn two_bath(params: ChainParams, beta: f64, beta_prime: f64) -> Result<Self> {
        let n = params.n_sites;
        let mut baths = vec![BathSpec::new(1, beta)?];
        if n > 1 {
            baths.push(BathSpec::new(n, beta_prime)?);
        }
        Self::new(params, baths)
    }

    /// One bath at every site, all at the same `beta`.
    pub fn all_sites(params: ChainParams, beta: f64) -> Result<Self> {
        let baths = (1..=params.n_sites)
            .map(|k| BathSpec::new(k, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, baths)
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.params.n_sites
    }

    /// The common inverse temperature when all baths agree exactly.
    pub fn common_beta(&self) -> Option<f64> {
        let b = self.baths[0].beta;
        self.baths.iter().all(|x| x.beta == b).then_some(b)
    }
}

/// `diag(β_0, β_1)`.
pub fn gibbs_qubit(beta: f64) -> Result<CMatrix> {
    let (b0, b1) = gibbs_weights(beta)?;
    Ok(diag(&[b0, b1]))
}

/// `ρ_β ⊗ ... ⊗ ρ_β` over `n` sites.
pub fn product_gibbs(beta: f64, n: usize) -> Result<ChainOperator> {
    chain_dim(n)?;
    let g = gibbs_qubit(beta)?;
    ChainOperator::new(n, kron_all(std::iter::repeat_n(&g, n)))
}

/// `B Σ σ_z^{(k)} + Σ (J_x σ_x^{(k)}σ_x^{(k+1)} + J_y σ_y^{(k)}σ_y^{(k+1)})`.
pub fn build_hs(params: &ChainParams) -> Result<ChainOperator> {
    params.validate()?;
    let n = params.n_sites;
    let mut h = ChainOperator::zeros(n)?.into_matrix();
    let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
    for k in 1..=n {
        axpy(
            &mut h,
            c64::new(params.b_field, 0.0),
            embed_site(&sz, k, n)?.matrix(),
        );
    }
    for k in 1..n {
        let xx = embed_site(&sx, k, n)?.matrix() * embed_site(&sx, k + 1, n)?.matrix();
        let yy = embed_site(&sy, k, n)?.matrix() * embed_site(&sy, k + 1, n)?.matrix();
        axpy(&mut h, c64::new(params.jx, 0.0), &xx);
        axpy(&mut h, c64::new(params.jy, 0.0), &yy);
    }
    ChainOperator::new(n, h)
}

/// `H^{(S)} = Σ σ_z^{(k)}`, diagonal with entries `N − 2·popcount(index)`.
pub fn build_free_hamiltonian(n: usize) -> Result<ChainOperator> {
    let d = chain_dim(n)?;
    let entries: Vec<f64> = (0..d)
        .map(|i| n as f64 - 2.0 * (i.count_ones() as f64))
        .collect();
    ChainOperator::new(n, diag(&entries))
}
