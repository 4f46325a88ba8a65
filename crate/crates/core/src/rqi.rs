// SPDX-License-Identifier: Apache-2.0

//! Repeated quantum interactions: the chain meets a fresh thermal spin per
//! bath for a time `h` with coupling `1/√h`, and the reduced one-step map
//! `L_h` approaches `e^{h𝓛}` as `h → 0`.
//!
//! Each bath spin is represented in its GNS space `M_2(ℂ)` with inner product
//! `⟨A, B⟩_β = Tr(ρ_β A*B)` and cyclic vector `I`.

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{Lindbladian, Picture};
use crate::model::{build_hs, gibbs_weights, BathSpec, ChainParams, LindbladModel};
use crate::operators::{
    diag, embed_site, exp_hermitian, identity, kron, kron_all, matrix_exp, matvec, max_abs,
    max_abs_diff, scale, scale_real, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z,
    unvectorize, vectorize, CMatrix, ChainOperator,
};

pub const MAX_RQI_SITES: usize = 4;
pub const MAX_RQI_BATHS: usize = 3;

/// Default probe grid.
pub const DEFAULT_H_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Endpoint bound relative to `‖𝓛(X)‖_max`.
pub const ENDPOINT_REL_BOUND: f64 = 1e-2;
/// Below this `‖𝓛(X)‖_max` the probe only checks that residuals vanish.
pub const TRIVIAL_GENERATOR_NORM: f64 = 1e-12;
pub const TRIVIAL_RESIDUAL_BOUND: f64 = 1e-11;

#[derive(Debug, Clone, Serialize)]
pub struct InteractionSetup {
    pub params: ChainParams,
    pub baths: Vec<BathSpec>,
    pub h: f64,
}

impl InteractionSetup {
    pub fn new(params: ChainParams, baths: Vec<BathSpec>, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be > 0, got {h}")));
        }
        // reuse the model's site and duplicate checks
        LindbladModel::new(params.clone(), baths.clone())?;
        if params.n_sites > MAX_RQI_SITES {
            return Err(Error::SizeGuard {
                what: "repeated interactions",
                n_sites: params.n_sites,
                max: MAX_RQI_SITES,
            });
        }
        if baths.len() > MAX_RQI_BATHS {
            return Err(Error::InvalidModel(format!(
                "at most {MAX_RQI_BATHS} baths supported, got {}",
                baths.len()
            )));
        }
        for b in &baths {
            if b.beta == f64::INFINITY {
                return Err(Error::DegenerateGns(b.beta));
            }
            if !(b.beta > 0.0) || !b.beta.is_finite() {
                return Err(Error::InvalidBeta(b.beta));
            }
        }
        Ok(Self { params, baths, h })
    }

    pub fn from_model(model: &LindbladModel, h: f64) -> Result<Self> {
        Self::new(model.params.clone(), model.baths.clone(), h)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.params.clone(), self.baths.clone(), h)
    }

    pub fn system_dim(&self) -> usize {
        1 << self.params.n_sites
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.baths.len()
    }

    pub fn model(&self) -> Result<LindbladModel> {
        LindbladModel::new(self.params.clone(), self.baths.clone())
    }
}

/// Orthonormal basis of `M_2(ℂ)` under `⟨A, B⟩_β`.
#[derive(Debug, Clone)]
pub struct GnsBasis {
    pub beta: f64,
    pub x: [CMatrix; 4],
}

impl GnsBasis {
    pub fn new(beta: f64) -> Result<Self> {
        if beta == f64::INFINITY {
            return Err(Error::DegenerateGns(beta));
        }
        let (b0, b1) = gibbs_weights(beta)?;
        if !(b0 > 0.0 && b1 > 0.0) {
            return Err(Error::DegenerateGns(beta));
        }
        let x = [
            identity(2),
            scale_real(&sigma_minus(), 1.0 / b0.sqrt()),
            scale_real(&sigma_plus(), 1.0 / b1.sqrt()),
            scale_real(&diag(&[b1, -b0]), 1.0 / (b0 * b1).sqrt()),
        ];
        Ok(Self { beta, x })
    }

    /// Gram matrix `G_ij = ⟨X_i, X_j⟩_β`.
    pub fn gram(&self) -> Result<CMatrix> {
        let rho = crate::model::gibbs_qubit(self.beta)?;
        let mut g = Mat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                g[(i, j)] = crate::operators::gns_inner(&rho, &self.x[i], &self.x[j])?;
            }
        }
        Ok(g)
    }
}

/// `H_S ⊗ I + I ⊗ Σ_j σ_z[j] + h^{-1/2} Σ_j (σ_x^{(k_j)} ⊗ σ_x[j] + σ_y^{(k_j)} ⊗ σ_y[j])`,
/// system factor leftmost, bath spins in bath order.
pub fn build_interaction_hamiltonian(setup: &InteractionSetup) -> Result<CMatrix> {
    let n = setup.params.n_sites;
    let r = setup.baths.len();
    let ds = setup.system_dim();
    let dr = setup.bath_dim();
    let hs = build_hs(&setup.params)?;
    let bath_op = |op: &CMatrix, j: usize| -> CMatrix {
        let factors: Vec<CMatrix> = (0..r)
            .map(|i| if i == j { op.clone() } else { identity(2) })
            .collect();
        kron_all(factors.iter())
    };
    let mut hr = Mat::zeros(dr, dr);
    for j in 0..r {
        hr += bath_op(&sigma_z(), j);
    }
    let mut h = kron(hs.matrix(), &identity(dr)) + kron(&identity(ds), &hr);
    let g = 1.0 / setup.h.sqrt();
    for (j, b) in setup.baths.iter().enumerate() {
        for p in [sigma_x(), sigma_y()] {
            let sys = embed_site(&p, b.site, n)?;
            h += scale_real(&kron(sys.matrix(), &bath_op(&p, j)), g);
        }
    }
    Ok(h)
}

/// `𝕃 = e^{−ihH}`.
pub fn one_step_unitary(setup: &InteractionSetup) -> Result<CMatrix> {
    let h = build_interaction_hamiltonian(setup)?;
    exp_hermitian(&h, c64::new(0.0, -setup.h))
}

/// Blocks `𝕃̃^0_i` for every bath multi-index `i ∈ {0,1,2,3}^r`, first bath
/// most significant.
#[derive(Debug, Clone)]
pub struct RqiBlocks {
    pub h: f64,
    pub n_sites: usize,
    pub n_baths: usize,
    pub blocks: Vec<CMatrix>,
}

impl RqiBlocks {
    /// `Σ_i 𝕃̃^{0*}_i 𝕃̃^0_i`.
    pub fn isometry_sum(&self) -> CMatrix {
        let d = 1 << self.n_sites;
        let mut acc = Mat::zeros(d, d);
        for b in &self.blocks {
            acc += b.adjoint() * b;
        }
        acc
    }

    pub fn isometry_defect(&self) -> f64 {
        let d = 1 << self.n_sites;
        max_abs_diff(&self.isometry_sum(), &identity(d))
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        (0..self.n_baths)
            .map(|j| (flat >> (2 * (self.n_baths - 1 - j))) & 3)
            .collect()
    }
}

/// Decomposes `𝕃 = Σ_{a,c} M_{ac} ⊗ E_{ac}` over the bath matrix units and
/// projects `𝕃(ψ ⊗ Ω)` on the lifted basis:
/// `𝕃̃^0_i = Σ_{a,c} M_{ac} ⟨X_i, E_{ac}⟩_β = Σ_{a,c} M_{ac} (ρ X_i*)_{ca}`.
pub fn gns_blocks(setup: &InteractionSetup) -> Result<RqiBlocks> {
    let u = one_step_unitary(setup)?;
    blocks_from_unitary(setup, &u)
}

pub fn blocks_from_unitary(setup: &InteractionSetup, u: &CMatrix) -> Result<RqiBlocks> {
    let r = setup.baths.len();
    let ds = setup.system_dim();
    let dr = setup.bath_dim();
    let bases = setup
        .baths
        .iter()
        .map(|b| GnsBasis::new(b.beta))
        .collect::<Result<Vec<_>>>()?;
    let rhos = setup
        .baths
        .iter()
        .map(|b| crate::model::gibbs_qubit(b.beta))
        .collect::<Result<Vec<_>>>()?;
    let n_blocks = 1usize << (2 * r);
    let mut blocks = Vec::with_capacity(n_blocks);
    for flat in 0..n_blocks {
        let factors: Vec<CMatrix> = (0..r)
            .map(|j| {
                let i = (flat >> (2 * (r - 1 - j))) & 3;
                &rhos[j] * bases[j].x[i].adjoint()
            })
            .collect();
        let w = kron_all(factors.iter());
        let mut acc = Mat::<c64>::zeros(ds, ds);
        for a in 0..dr {
            for c in 0..dr {
                let coef = w[(c, a)];
                if coef == c64::new(0.0, 0.0) {
                    continue;
                }
                for t in 0..ds {
                    for s in 0..ds {
                        acc[(s, t)] += coef * u[(s * dr + a, t * dr + c)];
                    }
                }
            }
        }
        blocks.push(acc);
    }
    Ok(RqiBlocks {
        h: setup.h,
        n_sites: setup.params.n_sites,
        n_baths: r,
        blocks,
    })
}

/// `L(X) = Σ_i 𝕃̃^{0*}_i X 𝕃̃^0_i`.
pub fn discrete_map(blocks: &RqiBlocks, x: &ChainOperator) -> Result<ChainOperator> {
    let d = 1 << blocks.n_sites;
    if x.dim() != d {
        return Err(Error::ShapeMismatch {
            left: (x.dim(), x.dim()),
            right: (d, d),
        });
    }
    let mut acc = Mat::zeros(d, d);
    for b in &blocks.blocks {
        acc += b.adjoint() * x.matrix() * b;
    }
    ChainOperator::new(blocks.n_sites, acc)
}

/// `L^n(X)`.
pub fn repeated_evolution(
    blocks: &RqiBlocks,
    x: &ChainOperator,
    n: usize,
) -> Result<ChainOperator> {
    let mut y = x.clone();
    for _ in 0..n {
        y = discrete_map(blocks, &y)?;
    }
    Ok(y)
}

/// `e^{t𝓛}(X)` through the observable-picture superoperator.
pub fn heisenberg_flow(model: &LindbladModel, x: &ChainOperator, t: f64) -> Result<ChainOperator> {
    let gen = Lindbladian::new(model)?;
    let l = gen.superoperator(Picture::Heisenberg)?;
    let p = matrix_exp(&scale_real(&l.matrix, t))?;
    let d = x.dim();
    ChainOperator::new(
        x.n_sites(),
        unvectorize(&matvec(&p, &vectorize(x.matrix())), d),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveHamiltonian {
    pub h: f64,
    /// Real scalar `c` with `i·antiHerm((𝕃̃^0_0 − I)/h) ≈ H_S + cI`.
    pub scalar_shift: f64,
    /// `Σ_j (β_0 − β_1)` over the baths.
    pub expected_shift: f64,
    /// `‖(H_eff − cI) − H_S‖_max`.
    pub traceless_deviation: f64,
    pub hs_norm: f64,
}

pub fn effective_hamiltonian(
    setup: &InteractionSetup,
    blocks: &RqiBlocks,
) -> Result<EffectiveHamiltonian> {
    let d = setup.system_dim();
    let a = scale_real(&(&blocks.blocks[0] - identity(d)), 1.0 / blocks.h);
    let anti = scale_real(&(&a - a.adjoint()), 0.5);
    let heff = scale(&anti, c64::new(0.0, 1.0));
    let c = crate::operators::trace(&heff).re / d as f64;
    let hs = build_hs(&setup.params)?;
    let shifted = &heff - scale_real(&identity(d), c);
    Ok(EffectiveHamiltonian {
        h: blocks.h,
        scalar_shift: c,
        expected_shift: setup.baths.iter().map(|b| b.beta0 - b.beta1).sum(),
        traceless_deviation: max_abs_diff(&shifted, hs.matrix()),
        hs_norm: max_abs(hs.matrix()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub h: f64,
    /// `‖(L_h(X) − X)/h − 𝓛(X)‖_max`.
    pub residual: f64,
    pub isometry_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ProbeRow>,
    pub generator_norm: f64,
    pub strictly_decreasing: bool,
    pub endpoint_bound: f64,
    pub endpoint_ok: bool,
    /// Log-log slope of the residual over the last two grid points.
    pub empirical_order: Option<f64>,
    pub passed: bool,
}

/// Residual of `(L_h(X) − X)/h` against `𝓛(X)` on a strictly decreasing `h` grid.
pub fn convergence_probe(
    params: &ChainParams,
    baths: &[BathSpec],
    h_grid: &[f64],
    x: &ChainOperator,
) -> Result<ConvergenceTable> {
    if h_grid.is_empty() {
        return Err(Error::InvalidArgument("empty h grid".into()));
    }
    if h_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "h grid must be strictly decreasing".into(),
        ));
    }
    let base = InteractionSetup::new(params.clone(), baths.to_vec(), h_grid[0])?;
    let model = base.model()?;
    let lx = Lindbladian::new(&model)?.apply_heisenberg(x)?;
    let generator_norm = max_abs(lx.matrix());

    let rows = h_grid
        .par_iter()
        .map(|&h| {
            let setup = base.with_h(h)?;
            let blocks = gns_blocks(&setup)?;
            let lh = discrete_map(&blocks, x)?;
            let diff = scale_real(&(lh.matrix() - x.matrix()), 1.0 / h) - lx.matrix();
            Ok(ProbeRow {
                h,
                residual: max_abs(&diff),
                isometry_defect: blocks.isometry_defect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let trivial = generator_norm <= TRIVIAL_GENERATOR_NORM;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].residual < w[0].residual);
    let endpoint_bound = if trivial {
        TRIVIAL_RESIDUAL_BOUND
    } else {
        ENDPOINT_REL_BOUND * generator_norm
    };
    let last = rows.last().expect("nonempty grid");
    let endpoint_ok = last.residual <= endpoint_bound;
    let empirical_order = if rows.len() >= 2 {
        let (a, b) = (&rows[rows.len() - 2], last);
        if a.residual > 0.0 && b.residual > 0.0 {
            Some((a.residual / b.residual).ln() / (a.h / b.h).ln())
        } else {
            None
        }
    } else {
        None
    };
    let passed = if trivial {
        rows.iter().all(|r| r.residual <= TRIVIAL_RESIDUAL_BOUND)
    } else {
        strictly_decreasing && endpoint_ok
    };
    Ok(ConvergenceTable {
        rows,
        generator_norm,
        strictly_decreasing,
        endpoint_bound,
        endpoint_ok,
        empirical_order,
        passed,
    })
}
