// SPDX-License-Identifier: Apache-2.0

//! Lindblad generator of the chain in both pictures, its superoperator matrix,
//! and time evolution of states.
//!
//! The dissipator of a bath at site `k` is realized by the Schrödinger-picture
//! jump operators `2√β_0 σ_+^{(k)}` and `2√β_1 σ_-^{(k)}`:
//!
//! ```text
//! 𝓛*(ρ) = -i[H_S, ρ] + Σ_k 2β_0 (2σ_+ ρ σ_- - {n_-, ρ}) + 2β_1 (2σ_- ρ σ_+ - {n_+, ρ})
//! 𝓛(X)  =  i[H_S, X] + Σ_k 2β_0 (2σ_- X σ_+ - {n_-, X}) + 2β_1 (2σ_+ X σ_- - {n_+, X})
//! ```

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_hs, LindbladModel};
use crate::operators::{
    axpy, embed_site, herm_eig, hermiticity_defect, matrix_exp, matvec, max_abs, n_minus, n_plus,
    sigma_minus, sigma_plus, singular_values, trace, unvectorize, vectorize, CMatrix,
    ChainOperator,
};

/// Largest chain for which a dense `4^N × 4^N` superoperator is assembled.
pub const MAX_SUPEROPERATOR_SITES: usize = 7;

/// Tolerance used to validate density-matrix inputs.
pub const DENSITY_TOL: f64 = 1e-9;

const ZERO: c64 = c64::new(0.0, 0.0);
const ONE: c64 = c64::new(1.0, 0.0);
const I: c64 = c64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// Action on observables, `𝓛`.
    Heisenberg,
    /// Action on states, `𝓛*`.
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKind {
    /// `2√β_0 σ_+`
    Up,
    /// `2√β_1 σ_-`
    Down,
}

#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub label: String,
    pub bath_index: usize,
    pub site: usize,
    pub kind: JumpKind,
    /// Scalar multiplying `σ_±`.
    pub coefficient: f64,
    pub operator: ChainOperator,
}

/// Jump operators ordered by bath, then (up, down).
#[derive(Debug, Clone)]
pub struct JumpOperatorFamily {
    pub ops: Vec<JumpOperator>,
}

impl JumpOperatorFamily {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &JumpOperator> {
        self.ops.iter()
    }

    /// `Σ V*V`.
    pub fn sum_vdag_v(&self) -> CMatrix {
        let d = self.ops[0].operator.dim();
        let mut acc = Mat::zeros(d, d);
        for v in &self.ops {
            let m = v.operator.matrix();
            acc += m.adjoint() * m;
        }
        acc
    }

    /// Whether `span{V_j}` is closed under adjoints.
    pub fn span_is_self_adjoint(&self) -> Result<bool> {
        let d = self.ops[0].operator.dim();
        let k = self.ops.len();
        let stack = |with_adjoints: bool| -> CMatrix {
            let cols = if with_adjoints { 2 * k } else { k };
            let mut m = Mat::zeros(d * d, cols);
            for (c, v) in self.ops.iter().enumerate() {
                let vv = vectorize(v.operator.matrix());
                for (r, x) in vv.iter().enumerate() {
                    m[(r, c)] = *x;
                }
                if with_adjoints {
                    let va = vectorize(&v.operator.adjoint().into_matrix());
                    for (r, x) in va.iter().enumerate() {
                        m[(r, k + c)] = *x;
                    }
                }
            }
            m
        };
        Ok(numerical_rank(&stack(false))? == numerical_rank(&stack(true))?)
    }
}

fn numerical_rank(m: &CMatrix) -> Result<usize> {
    let s = singular_values(m)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > 1e-10 * smax).count())
}

/// Builds the jump family of a model.
pub fn jump_operators(model: &LindbladModel) -> Result<JumpOperatorFamily> {
    let n = model.n_sites();
    let mut ops = Vec::with_capacity(2 * model.baths.len());
    for (j, b) in model.baths.iter().enumerate() {
        let up = 2.0 * b.beta0.sqrt();
        let down = 2.0 * b.beta1.sqrt();
        let sp = embed_site(&sigma_plus(), b.site, n)?;
        let sm = embed_site(&sigma_minus(), b.site, n)?;
        ops.push(JumpOperator {
            label: format!("up@{}", b.site),
            bath_index: j,
            site: b.site,
            kind: JumpKind::Up,
            coefficient: up,
            operator: sp.map(|m| crate::operators::scale_real(m, up)),
        });
        ops.push(JumpOperator {
            label: format!("down@{}", b.site),
            bath_index: j,
            site: b.site,
            kind: JumpKind::Down,
            coefficient: down,
            operator: sm.map(|m| crate::operators::scale_real(m, down)),
        });
    }
    Ok(JumpOperatorFamily { ops })
}

#[derive(Debug, Clone)]
struct BathOps {
    beta0: f64,
    beta1: f64,
    sigma_plus: CMatrix,
    sigma_minus: CMatrix,
    n_plus: CMatrix,
    n_minus: CMatrix,
}

/// Precomputed generator of a model; applies `𝓛` and `𝓛*` matrix-free.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    model: LindbladModel,
    hs: ChainOperator,
    baths: Vec<BathOps>,
}

impl Lindbladian {
    pub fn new(model: &LindbladModel) -> Result<Self> {
        let n = model.n_sites();
        let hs = build_hs(&model.params)?;
        let baths = model
            .baths
            .iter()
            .map(|b| {
                Ok(BathOps {
                    beta0: b.beta0,
                    beta1: b.beta1,
                    sigma_plus: embed_site(&sigma_plus(), b.site, n)?.into_matrix(),
                    sigma_minus: embed_site(&sigma_minus(), b.site, n)?.into_matrix(),
                    n_plus: embed_site(&n_plus(), b.site, n)?.into_matrix(),
                    n_minus: embed_site(&n_minus(), b.site, n)?.into_matrix(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model: model.clone(),
            hs,
            baths,
        })
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn hamiltonian(&self) -> &ChainOperator {
        &self.hs
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites()
    }

    pub fn dim(&self) -> usize {
        self.hs.dim()
    }

    fn check(&self, x: &ChainOperator) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                left: (x.dim(), x.dim()),
                right: (self.dim(), self.dim()),
            });
        }
        Ok(())
    }

    /// `±i[H_S, X]` (`+` in the Heisenberg picture).
    pub fn hamiltonian_part(&self, x: &ChainOperator, picture: Picture) -> Result<ChainOperator> {
        self.check(x)?;
        let h = self.hs.matrix();
        let xm = x.matrix();
        let comm = h * xm - xm * h;
        let s = match picture {
            Picture::Heisenberg => I,
            Picture::Schrodinger => -I,
        };
        ChainOperator::new(self.n_sites(), crate::operators::scale(&comm, s))
    }

    /// Dissipator of one bath, written in the coefficient form.
    pub fn dissipator(
        &self,
        bath_index: usize,
        x: &ChainOperator,
        picture: Picture,
    ) -> Result<ChainOperator> {
        self.check(x)?;
        let b = self.baths.get(bath_index).ok_or_else(|| {
            Error::InvalidArgument(format!("bath index {bath_index} out of range"))
        })?;
        let xm = x.matrix();
        // Heisenberg sandwiches σ_- X σ_+ (with β_0); Schrödinger σ_+ ρ σ_-.
        let (s0l, s0r, s1l, s1r) = match picture {
            Picture::Heisenberg => (&b.sigma_minus, &b.sigma_plus, &b.sigma_plus, &b.sigma_minus),
            Picture::Schrodinger => (&b.sigma_plus, &b.sigma_minus, &b.sigma_minus, &b.sigma_plus),
        };
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        let sand0 = s0l * xm * s0r;
        let anti0 = &b.n_minus * xm + xm * &b.n_minus;
        let sand1 = s1l * xm * s1r;
        let anti1 = &b.n_plus * xm + xm * &b.n_plus;
        let c0 = c64::new(2.0 * b.beta0, 0.0);
        let c1 = c64::new(2.0 * b.beta1, 0.0);
        axpy(&mut out, c0 * 2.0, &sand0);
        axpy(&mut out, -c0, &anti0);
        axpy(&mut out, c1 * 2.0, &sand1);
        axpy(&mut out, -c1, &anti1);
        ChainOperator::new(self.n_sites(), out)
    }

    /// Sum of all bath dissipators.
    pub fn dissipative_part(&self, x: &ChainOperator, picture: Picture) -> Result<ChainOperator> {
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        for j in 0..self.baths.len() {
            out += self.dissipator(j, x, picture)?.into_matrix();
        }
        ChainOperator::new(self.n_sites(), out)
    }

    pub fn apply(&self, x: &ChainOperator, picture: Picture) -> Result<ChainOperator> {
        let h = self.hamiltonian_part(x, picture)?.into_matrix();
        let d = self.dissipative_part(x, picture)?.into_matrix();
        ChainOperator::new(self.n_sites(), h + d)
    }

    pub fn apply_heisenberg(&self, x: &ChainOperator) -> Result<ChainOperator> {
        self.apply(x, Picture::Heisenberg)
    }

    pub fn apply_schrodinger(&self, rho: &ChainOperator) -> Result<ChainOperator> {
        self.apply(rho, Picture::Schrodinger)
    }

    /// Matrix of the generator under column-stacking vectorization.
    pub fn superoperator(&self, picture: Picture) -> Result<SuperOperator> {
        let mut m = self.hamiltonian_superoperator(picture)?;
        for j in 0..self.baths.len() {
            let dj = self.dissipator_superoperator(j, picture)?;
            m += dj;
        }
        Ok(SuperOperator {
            n_sites: self.n_sites(),
            picture,
            matrix: m,
        })
    }

    fn guard(&self) -> Result<()> {
        if self.n_sites() > MAX_SUPEROPERATOR_SITES {
            return Err(Error::SizeGuard {
                what: "superoperator",
                n_sites: self.n_sites(),
                max: MAX_SUPEROPERATOR_SITES,
            });
        }
        Ok(())
    }

    pub fn hamiltonian_superoperator(&self, picture: Picture) -> Result<CMatrix> {
        self.guard()?;
        let d = self.dim();
        let id = crate::operators::identity(d);
        let h = self.hs.matrix();
        let ht = h.transpose().to_owned();
        let s = match picture {
            Picture::Heisenberg => I,
            Picture::Schrodinger => -I,
        };
        let mut m = Mat::zeros(d * d, d * d);
        // vec(HX - XH) = (I ⊗ H - Hᵀ ⊗ I) vec X
        add_kron(&mut m, s, &id, h);
        add_kron(&mut m, -s, &ht, &id);
        Ok(m)
    }

    /// Matrix of one bath's dissipator.
    pub fn dissipator_superoperator(&self, bath_index: usize, picture: Picture) -> Result<CMatrix> {
        self.guard()?;
        let b = self.baths.get(bath_index).ok_or_else(|| {
            Error::InvalidArgument(format!("bath index {bath_index} out of range"))
        })?;
        let d = self.dim();
        let id = crate::operators::identity(d);
        let (s0l, s0r, s1l, s1r) = match picture {
            Picture::Heisenberg => (&b.sigma_minus, &b.sigma_plus, &b.sigma_plus, &b.sigma_minus),
            Picture::Schrodinger => (&b.sigma_plus, &b.sigma_minus, &b.sigma_minus, &b.sigma_plus),
        };
        let c0 = c64::new(2.0 * b.beta0, 0.0);
        let c1 = c64::new(2.0 * b.beta1, 0.0);
        let mut m = Mat::zeros(d * d, d * d);
        // A X B -> Bᵀ ⊗ A ; {n, X} -> I ⊗ n + nᵀ ⊗ I
        add_kron(&mut m, c0 * 2.0, &s0r.transpose().to_owned(), s0l);
        add_kron(&mut m, -c0, &id, &b.n_minus);
        add_kron(&mut m, -c0, &b.n_minus.transpose().to_owned(), &id);
        add_kron(&mut m, c1 * 2.0, &s1r.transpose().to_owned(), s1l);
        add_kron(&mut m, -c1, &id, &b.n_plus);
        add_kron(&mut m, -c1, &b.n_plus.transpose().to_owned(), &id);
        Ok(m)
    }
}

/// `out += s · (a ⊗ b)`, skipping structural zeros.
pub fn add_kron(out: &mut CMatrix, s: c64, a: &CMatrix, b: &CMatrix) {
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut b_nz = Vec::new();
    for l in 0..cb {
        for k in 0..rb {
            let v = b[(k, l)];
            if v != ZERO {
                b_nz.push((k, l, v));
            }
        }
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            let f = s * aij;
            for &(k, l, v) in &b_nz {
                out[(i * rb + k, j * cb + l)] += f * v;
            }
        }
    }
}

/// A generator as a `4^N × 4^N` matrix acting on column-stacked operators.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    pub n_sites: usize,
    pub picture: Picture,
    pub matrix: CMatrix,
}

impl SuperOperator {
    pub fn apply(&self, x: &ChainOperator) -> Result<ChainOperator> {
        let d = 1usize << self.n_sites;
        if x.dim() != d {
            return Err(Error::ShapeMismatch {
                left: (x.dim(), x.dim()),
                right: (d, d),
            });
        }
        let v = matvec(&self.matrix, &vectorize(x.matrix()));
        ChainOperator::new(self.n_sites, unvectorize(&v, d))
    }
}

pub fn apply_heisenberg(model: &LindbladModel, x: &ChainOperator) -> Result<ChainOperator> {
    Lindbladian::new(model)?.apply_heisenberg(x)
}

pub fn apply_schrodinger(model: &LindbladModel, rho: &ChainOperator) -> Result<ChainOperator> {
    Lindbladian::new(model)?.apply_schrodinger(rho)
}

pub fn superoperator(model: &LindbladModel, picture: Picture) -> Result<SuperOperator> {
    Lindbladian::new(model)?.superoperator(picture)
}

/// Checks Hermiticity, unit trace and positivity within `tol`.
pub fn validate_density(rho: &ChainOperator, tol: f64) -> Result<()> {
    let m = rho.matrix();
    let herm = hermiticity_defect(m);
    if herm > tol.max(crate::operators::HERMITICITY_TOL) {
        return Err(Error::NotDensityMatrix(format!(
            "Hermiticity defect {herm:e}"
        )));
    }
    let tr = trace(m);
    if (tr - ONE).norm() > tol {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let min = herm_eig(m)?.min_eigenvalue();
    if min < -tol {
        return Err(Error::NotDensityMatrix(format!("min eigenvalue {min:e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMethod {
    /// Multiply by the exponential of the superoperator.
    ExactExpm,
    /// Matrix-free Dormand–Prince 5(4) with step control.
    RkAdaptive,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: ChainOperator,
    /// `|Tr ρ(t) − Tr ρ(0)|`; never corrected.
    pub trace_drift: f64,
    /// Accepted integrator steps (0 for the exact method).
    pub steps: usize,
}

/// `ρ(t) = e^{t𝓛*} ρ_0`.
pub fn evolve(
    model: &LindbladModel,
    rho0: &ChainOperator,
    t: f64,
    method: EvolveMethod,
    tol: f64,
) -> Result<Evolution> {
    let gen = Lindbladian::new(model)?;
    evolve_with(&gen, rho0, t, method, tol)
}

pub fn evolve_with(
    gen: &Lindbladian,
    rho0: &ChainOperator,
    t: f64,
    method: EvolveMethod,
    tol: f64,
) -> Result<Evolution> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time must be >= 0, got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    if rho0.dim() != gen.dim() {
        return Err(Error::ShapeMismatch {
            left: (rho0.dim(), rho0.dim()),
            right: (gen.dim(), gen.dim()),
        });
    }
    validate_density(rho0, tol.max(DENSITY_TOL))?;
    let tr0 = rho0.trace();
    let (state, steps) = match method {
        EvolveMethod::ExactExpm => (Propagator::new(gen, t)?.apply(rho0)?, 0),
        EvolveMethod::RkAdaptive => dormand_prince(gen, rho0, t, tol)?,
    };
    let trace_drift = (state.trace() - tr0).norm();
    Ok(Evolution {
        state,
        trace_drift,
        steps,
    })
}

/// `e^{t𝓛*}` as a dense matrix, reusable across initial states.
#[derive(Debug, Clone)]
pub struct Propagator {
    n_sites: usize,
    pub t: f64,
    pub matrix: CMatrix,
}

impl Propagator {
    pub fn new(gen: &Lindbladian, t: f64) -> Result<Self> {
        let l = gen.superoperator(Picture::Schrodinger)?;
        Self::from_superoperator(&l, t)
    }

    pub fn from_superoperator(l: &SuperOperator, t: f64) -> Result<Self> {
        if l.picture != Picture::Schrodinger {
            return Err(Error::InvalidArgument(
                "propagator needs the Schrödinger-picture generator".into(),
            ));
        }
        let matrix = matrix_exp(&crate::operators::scale_real(&l.matrix, t))?;
        Ok(Self {
            n_sites: l.n_sites,
            t,
            matrix,
        })
    }

    pub fn apply(&self, rho: &ChainOperator) -> Result<ChainOperator> {
        let d = 1usize << self.n_sites;
        if rho.dim() != d {
            return Err(Error::ShapeMismatch {
                left: (rho.dim(), rho.dim()),
                right: (d, d),
            });
        }
        let v = matvec(&self.matrix, &vectorize(rho.matrix()));
        ChainOperator::new(self.n_sites, unvectorize(&v, d))
    }
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dormand_prince(
    gen: &Lindbladian,
    rho0: &ChainOperator,
    t_end: f64,
    tol: f64,
) -> Result<(ChainOperator, usize)> {
    let n = gen.n_sites();
    let d = gen.dim();
    let mut y = rho0.matrix().clone();
    if t_end == 0.0 {
        return Ok((rho0.clone(), 0));
    }
    let rhs = |m: &CMatrix| -> Result<CMatrix> {
        Ok(gen
            .apply_schrodinger(&ChainOperator::new(n, m.clone())?)?
            .into_matrix())
    };
    let mut t = 0.0;
    let mut k1 = rhs(&y)?;
    let rate = max_abs(&k1).max(1e-12);
    let mut h = (0.01 * tol.powf(0.2) / rate).min(t_end).max(1e-12);
    let mut steps = 0usize;
    let mut guard = 0usize;
    while t < t_end {
        guard += 1;
        if guard > 10_000_000 {
            return Err(Error::Numerical("rk-adaptive step limit exceeded".into()));
        }
        let h_try = h.min(t_end - t);
        let mut ks: Vec<CMatrix> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for s in 1..7 {
            let mut stage = y.clone();
            for (j, k) in ks.iter().enumerate() {
                let a = DP_A[s][j];
                if a != 0.0 {
                    axpy(&mut stage, c64::new(h_try * a, 0.0), k);
                }
            }
            let _ = DP_C[s];
            ks.push(rhs(&stage)?);
        }
        let mut y5 = y.clone();
        let mut err = Mat::<c64>::zeros(d, d);
        for (s, k) in ks.iter().enumerate() {
            if DP_B5[s] != 0.0 {
                axpy(&mut y5, c64::new(h_try * DP_B5[s], 0.0), k);
            }
            let e = DP_B5[s] - DP_B4[s];
            if e != 0.0 {
                axpy(&mut err, c64::new(h_try * e, 0.0), k);
            }
        }
        let scale = tol * (1.0 + max_abs(&y).max(max_abs(&y5)));
        let err_norm = max_abs(&err) / scale;
        if err_norm <= 1.0 {
            t += h_try;
            y = y5;
            // FSAL: the last stage is the derivative at the new point
            k1 = ks.pop().expect("seven stages");
            steps += 1;
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = h_try * factor;
    }
    Ok((ChainOperator::new(n, y)?, steps))
}
