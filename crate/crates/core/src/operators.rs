// SPDX-License-Identifier: Apache-2.0

//! Dense complex-matrix algebra for qubit chains.
//!
//! Conventions used throughout the crate:
//!
//! * site 1 is the leftmost Kronecker factor of `C^2 ⊗ ... ⊗ C^2`;
//! * the single-spin basis is `Ω = (1, 0)` first and `X = (0, 1)` second;
//! * `kron` is row-major: `(a ⊗ b)[i*rb + k, j*cb + l] = a[i,j] * b[k,l]`;
//! * vectorization is column stacking, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use faer::{Mat, Side};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

pub type CMatrix = Mat<c64>;

/// Absolute tolerance for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues at or below this floor are treated as outside the support.
pub const PSD_FLOOR: f64 = 1e-12;
/// Default entrywise comparison tolerance.
pub const COMPARISON_TOL: f64 = 1e-9;

const ZERO: c64 = c64::new(0.0, 0.0);
const ONE: c64 = c64::new(1.0, 0.0);
const I: c64 = c64::new(0.0, 1.0);

/// An operator on the `2^N`-dimensional Hilbert space of an `N`-spin chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    n_sites: usize,
    data: CMatrix,
}

impl ChainOperator {
    pub fn new(n_sites: usize, data: CMatrix) -> Result<Self> {
        let dim = chain_dim(n_sites)?;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::NotChainOperator {
                rows: data.nrows(),
                cols: data.ncols(),
                n_sites,
            });
        }
        Ok(Self { n_sites, data })
    }

    /// Wraps a square matrix whose side is a power of two.
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        let n = data.nrows();
        if n == 0 || !n.is_power_of_two() || data.ncols() != n || n == 1 {
            return Err(Error::NotChainOperator {
                rows: data.nrows(),
                cols: data.ncols(),
                n_sites: 0,
            });
        }
        Ok(Self {
            n_sites: n.trailing_zeros() as usize,
            data,
        })
    }

    pub fn zeros(n_sites: usize) -> Result<Self> {
        let d = chain_dim(n_sites)?;
        Ok(Self {
            n_sites,
            data: Mat::zeros(d, d),
        })
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        let d = chain_dim(n_sites)?;
        Ok(Self {
            n_sites,
            data: Mat::identity(d, d),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            data: self.data.adjoint().to_owned(),
        }
    }

    pub fn trace(&self) -> c64 {
        trace(&self.data)
    }

    /// Entrywise comparison within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n_sites == other.n_sites && max_abs_diff(&self.data, &other.data) <= tol
    }

    /// Applies `f` to the underlying matrix, keeping the site count.
    pub fn map(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Self {
        Self {
            n_sites: self.n_sites,
            data: f(&self.data),
        }
    }
}

/// `2^n` for a valid site count.
pub fn chain_dim(n_sites: usize) -> Result<usize> {
    if n_sites == 0 || n_sites > 30 {
        return Err(Error::InvalidArgument(format!(
            "n_sites must be in 1..=30, got {n_sites}"
        )));
    }
    Ok(1usize << n_sites)
}

/// The fixed single-spin matrices.
#[derive(Debug, Clone)]
pub struct PauliSet {
    pub sigma_x: CMatrix,
    pub sigma_y: CMatrix,
    pub sigma_z: CMatrix,
    pub sigma_plus: CMatrix,
    pub sigma_minus: CMatrix,
    pub n_plus: CMatrix,
    pub n_minus: CMatrix,
    pub identity: CMatrix,
}

impl PauliSet {
    pub fn new() -> Self {
        Self {
            sigma_x: sigma_x(),
            sigma_y: sigma_y(),
            sigma_z: sigma_z(),
            sigma_plus: sigma_plus(),
            sigma_minus: sigma_minus(),
            n_plus: n_plus(),
            n_minus: n_minus(),
            identity: Mat::identity(2, 2),
        }
    }
}

impl Default for PauliSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds a 2×2 matrix from its entries in row order.
pub fn mat2(a: c64, b: c64, c: c64, d: c64) -> CMatrix {
    let e = [[a, b], [c, d]];
    Mat::from_fn(2, 2, |i, j| e[i][j])
}

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn sigma_plus() -> CMatrix {
    mat2(ZERO, ONE, ZERO, ZERO)
}

pub fn sigma_minus() -> CMatrix {
    mat2(ZERO, ZERO, ONE, ZERO)
}

pub fn n_plus() -> CMatrix {
    mat2(ONE, ZERO, ZERO, ZERO)
}

pub fn n_minus() -> CMatrix {
    mat2(ZERO, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> CMatrix {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> CMatrix {
    mat2(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> CMatrix {
    mat2(ONE, ZERO, ZERO, -ONE)
}

pub fn identity(d: usize) -> CMatrix {
    Mat::identity(d, d)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { ZERO })
}

pub fn scale(m: &CMatrix, s: c64) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn scale_real(m: &CMatrix, s: f64) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

/// `a + s·b`.
pub fn add_scaled(a: &CMatrix, s: c64, b: &CMatrix) -> CMatrix {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + s * b[(i, j)])
}

/// In-place `a += s·b`.
pub fn axpy(a: &mut CMatrix, s: c64, b: &CMatrix) {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[(i, j)] += s * b[(i, j)];
        }
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint().to_owned()
}

pub fn trace(m: &CMatrix) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

fn check_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch {
            left: (a.nrows(), a.ncols()),
            right: (b.nrows(), b.ncols()),
        });
    }
    Ok(())
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            left: (m.nrows(), m.ncols()),
            right: (m.ncols(), m.nrows()),
        });
    }
    Ok(())
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut out = Mat::zeros(a.nrows() * rb, a.ncols() * cb);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Left-to-right Kronecker product of a list of factors.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut acc = Mat::identity(1, 1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// `I^{⊗(k-1)} ⊗ op ⊗ I^{⊗(n-k)}` with sites numbered from 1.
pub fn embed_site(op: &CMatrix, k: usize, n: usize) -> Result<ChainOperator> {
    chain_dim(n)?;
    if k == 0 || k > n {
        return Err(Error::SiteOutOfRange {
            site: k,
            n_sites: n,
        });
    }
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(Error::ShapeMismatch {
            left: (op.nrows(), op.ncols()),
            right: (2, 2),
        });
    }
    let left = identity(1 << (k - 1));
    let right = identity(1 << (n - k));
    ChainOperator::new(n, kron(&kron(&left, op), &right))
}

/// `ab − ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_shape(a, b)?;
    check_square(a)?;
    Ok(a * b - b * a)
}

/// `ab + ba`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_shape(a, b)?;
    check_square(a)?;
    Ok(a * b + b * a)
}

/// Reduced 2×2 state of site `i`: `Tr(ρ_i A) = Tr(ρ A^{(i)})` for every 2×2 `A`.
pub fn partial_trace_keep(rho: &ChainOperator, i: usize) -> Result<CMatrix> {
    let n = rho.n_sites();
    if i == 0 || i > n {
        return Err(Error::SiteOutOfRange {
            site: i,
            n_sites: n,
        });
    }
    let m = rho.matrix();
    // basis index = left * 2^(n-i+1) + s * 2^(n-i) + right
    let right_dim = 1usize << (n - i);
    let left_dim = 1usize << (i - 1);
    let mut out = Mat::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = ZERO;
            for l in 0..left_dim {
                for r in 0..right_dim {
                    let row = (l * 2 + a) * right_dim + r;
                    let col = (l * 2 + b) * right_dim + r;
                    acc += m[(row, col)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `U f(Λ) U*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> c64) -> CMatrix {
        let u = &self.eigenvectors;
        let d = u.nrows();
        let fl: Vec<c64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let scaled = Mat::from_fn(d, d, |i, j| u[(i, j)] * fl[j]);
        &scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }
}

/// Hermitian eigendecomposition with a deterministic eigenvector convention.
///
/// Degenerate clusters are re-spanned by orthonormalizing the columns of the
/// cluster projector in index order; every column is then phased so that its
/// first entry of near-maximal modulus is real and positive.
pub fn herm_eig(m: &CMatrix) -> Result<SpectralDecomposition> {
    check_square(m)?;
    let defect = hermiticity_defect(m);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let h = hermitian_part(m);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let d = h.nrows();
    let s = evd.S().column_vector();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
    let u = evd.U();
    let mut vecs = Mat::from_fn(d, d, |i, j| u[(i, order[j])]);

    let scale_ref = eigenvalues.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let cluster_tol = 1e-10 * scale_ref;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eigenvalues[end] - eigenvalues[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut vecs, start, end);
        }
        start = end;
    }
    for j in 0..d {
        fix_phase(&mut vecs, j);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vecs,
    })
}

fn canonicalize_cluster(vecs: &mut CMatrix, start: usize, end: usize) {
    let d = vecs.nrows();
    let m = end - start;
    // projector column k = Σ_c u_c conj(u_c[k])
    let projector_column = |k: usize, v: &CMatrix| -> Vec<c64> {
        let mut col = vec![ZERO; d];
        for c in start..end {
            let w = v[(k, c)].conj();
            for (i, x) in col.iter_mut().enumerate() {
                *x += v[(i, c)] * w;
            }
        }
        col
    };
    let threshold = 0.5 / (d as f64).sqrt();
    let mut accepted: Vec<Vec<c64>> = Vec::with_capacity(m);
    for k in 0..d {
        if accepted.len() == m {
            break;
        }
        let mut v = projector_column(k, vecs);
        for _ in 0..2 {
            for a in &accepted {
                let ov: c64 = a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (y, x) in v.iter_mut().zip(a) {
                    *y -= ov * x;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > threshold {
            accepted.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    if accepted.len() == m {
        for (c, a) in accepted.iter().enumerate() {
            for i in 0..d {
                vecs[(i, start + c)] = a[i];
            }
        }
    }
}

fn fix_phase(vecs: &mut CMatrix, j: usize) {
    let d = vecs.nrows();
    let max = (0..d).map(|i| vecs[(i, j)].norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = (0..d)
        .find(|&i| vecs[(i, j)].norm() >= 0.5 * max)
        .unwrap_or(0);
    let p = vecs[(pivot, j)];
    let phase = p.conj() / p.norm();
    for i in 0..d {
        vecs[(i, j)] *= phase;
    }
}

/// `exp(s·H)` for Hermitian `H` and complex scalar `s`, via eigendecomposition.
pub fn exp_hermitian(h: &CMatrix, s: c64) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    Ok(eig.apply_fn(|x| (s * x).exp()))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Induced 1-norm (max column sum).
pub fn norm_one(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn matrix_exp(m: &CMatrix) -> Result<CMatrix> {
    check_square(m)?;
    let n = m.nrows();
    let norm = norm_one(m);
    if !norm.is_finite() {
        return Err(Error::Numerical("non-finite matrix in exp".into()));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale_real(m, 0.5f64.powi(s));
    let b = &PADE13;
    let id: CMatrix = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> CMatrix {
        Mat::from_fn(n, n, |i, j| {
            a6[(i, j)] * c6 + a4[(i, j)] * c4 + a2[(i, j)] * c2 + id[(i, j)] * c0
        })
    };
    let u_inner = &a6 * lin(b[13], b[11], b[9], 0.0) + lin(b[7], b[5], b[3], b[1]);
    let u = &a * u_inner;
    let v = &a6 * lin(b[12], b[10], b[8], 0.0) + lin(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    use faer::linalg::solvers::Solve;
    let lu = a.partial_piv_lu();
    let x = lu.solve(b);
    if max_abs(&x).is_finite() {
        Ok(x)
    } else {
        Err(Error::Numerical("singular system".into()))
    }
}

/// How [`matrix_log_psd`] treats eigenvalues at or below [`PSD_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportRule {
    Error,
    ProjectToSupport,
}

/// Logarithm of a positive semidefinite Hermitian matrix, taken on its support.
pub fn matrix_log_psd(m: &CMatrix, rule: SupportRule) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -HERMITICITY_TOL {
            return Err(Error::NegativeEigenvalue { value: min });
        }
        if min <= PSD_FLOOR && rule == SupportRule::Error {
            return Err(Error::Singular { value: min });
        }
    }
    Ok(eig.apply_fn(|x| if x > PSD_FLOOR { re(x.ln()) } else { ZERO }))
}

/// `Tr(ρ a* b)`.
pub fn gns_inner(rho: &CMatrix, a: &CMatrix, b: &CMatrix) -> Result<c64> {
    check_same_shape(rho, a)?;
    check_same_shape(rho, b)?;
    // Tr(ρ a* b) = Σ_{i,j,k} ρ_ij conj(a_kj) b_ki
    let ab = a.adjoint() * b;
    let d = rho.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += rho[(i, j)] * ab[(j, i)];
        }
    }
    Ok(acc)
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    m.singular_values()
        .map_err(|e| Error::Numerical(format!("{e:?}")))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().fold(0.0, f64::max))
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> Vec<c64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for a `d × d` matrix.
pub fn unvectorize(v: &[c64], d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d);
    Mat::from_fn(d, d, |i, j| v[j * d + i])
}

pub fn matvec(m: &CMatrix, v: &[c64]) -> Vec<c64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * x;
        }
    }
    out
}

/// Choi matrix `Σ_{ab} E_ab ⊗ Φ(E_ab)` of a linear map on `d × d` matrices.
pub fn choi_matrix(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut out = Mat::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let mut e = Mat::zeros(d, d);
            e[(a, b)] = ONE;
            let img = map(&e);
            for k in 0..d {
                for l in 0..d {
                    out[(a * d + k, b * d + l)] = img[(k, l)];
                }
            }
        }
    }
    out
}

/// Matrix unit `E_ab` of size `d`.
pub fn matrix_unit(d: usize, a: usize, b: usize) -> CMatrix {
    let mut e = Mat::zeros(d, d);
    e[(a, b)] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gibbs_qubit;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn pauli_relations() {
        let p = PauliSet::new();
        assert_eq!(&p.sigma_plus * &p.sigma_minus, p.n_plus);
        assert_eq!(&p.sigma_minus * &p.sigma_plus, p.n_minus);
        assert_eq!(&p.sigma_plus + &p.sigma_minus, p.sigma_x);
        let y = add_scaled(&scale(&p.sigma_plus, -I), I, &p.sigma_minus);
        assert_eq!(y, p.sigma_y);
        assert_eq!(&p.n_plus - &p.n_minus, p.sigma_z);
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        assert_eq!(kron(&sigma_z(), &sigma_z()), diag(&[1.0, -1.0, -1.0, 1.0]));
        let k = kron(&sigma_plus(), &sigma_minus());
        let mut expected = Mat::zeros(4, 4);
        expected[(1, 2)] = ONE;
        assert_eq!(k, expected);
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_site(&sigma_z(), 1, 1).unwrap().matrix(), &sigma_z());
        assert_eq!(
            embed_site(&sigma_z(), 2, 2).unwrap().into_matrix(),
            diag(&[1.0, -1.0, 1.0, -1.0])
        );
        assert_eq!(
            embed_site(&n_plus(), 1, 2).unwrap().into_matrix(),
            diag(&[1.0, 1.0, 0.0, 0.0])
        );
        assert!(matches!(
            embed_site(&sigma_z(), 3, 2),
            Err(Error::SiteOutOfRange {
                site: 3,
                n_sites: 2
            })
        ));
        assert!(embed_site(&sigma_z(), 0, 2).is_err());
    }

    #[test]
    fn commutator_examples() {
        assert_eq!(max_abs(&commutator(&sigma_z(), &sigma_z()).unwrap()), 0.0);
        assert_eq!(
            commutator(&sigma_plus(), &sigma_minus()).unwrap(),
            sigma_z()
        );
        assert_eq!(
            anticommutator(&n_minus(), &identity(2)).unwrap(),
            scale_real(&n_minus(), 2.0)
        );
        assert!(matches!(
            commutator(&identity(2), &identity(4)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let a = gibbs_qubit(0.3).unwrap();
        let b = gibbs_qubit(1.1).unwrap();
        let rho = ChainOperator::new(2, kron(&a, &b)).unwrap();
        assert!(max_abs_diff(&partial_trace_keep(&rho, 2).unwrap(), &b) < 1e-15);
        assert!(max_abs_diff(&partial_trace_keep(&rho, 1).unwrap(), &a) < 1e-15);

        let mixed = ChainOperator::new(2, scale_real(&identity(4), 0.25)).unwrap();
        let half = scale_real(&identity(2), 0.5);
        assert!(max_abs_diff(&partial_trace_keep(&mixed, 1).unwrap(), &half) < 1e-15);

        // |Φ+> = (|00> + |11>)/√2
        let mut bell = Mat::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(0.5, 0.0);
        }
        let bell = ChainOperator::new(2, bell).unwrap();
        assert!(max_abs_diff(&partial_trace_keep(&bell, 1).unwrap(), &half) < 1e-15);
        assert!(partial_trace_keep(&bell, 3).is_err());
    }

    #[test]
    fn partial_trace_matches_embedded_expectation() {
        // Tr(ρ_i A) = Tr(ρ A^{(i)}) on a non-product 3-site operator.
        let d = 8;
        let rho = Mat::from_fn(d, d, |i, j| {
            c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        let rho = ChainOperator::new(3, rho).unwrap();
        let a = mat2(c(0.3, 0.0), c(1.0, -2.0), c(0.5, 0.7), c(-1.2, 0.0));
        for site in 1..=3 {
            let local = partial_trace_keep(&rho, site).unwrap();
            let lhs = trace(&(&local * &a));
            let emb = embed_site(&a, site, 3).unwrap();
            let rhs = trace(&(rho.matrix() * emb.matrix()));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn herm_eig_examples() {
        let e = herm_eig(&diag(&[0.25, 0.75])).unwrap();
        assert_eq!(e.eigenvalues, vec![0.25, 0.75]);
        assert!(max_abs_diff(&e.eigenvectors, &identity(2)) < 1e-15);

        let e = herm_eig(&sigma_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);

        let beta = 0.7;
        let g = gibbs_qubit(beta).unwrap();
        let (b0, b1) = (g[(0, 0)].re, g[(1, 1)].re);
        let e = herm_eig(&kron(&g, &g)).unwrap();
        let mut want = [b0 * b0, b0 * b1, b0 * b1, b1 * b1];
        want.sort_by(f64::total_cmp);
        for (x, y) in e.eigenvalues.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        assert!(matches!(
            herm_eig(&sigma_plus()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn herm_eig_degenerate_cluster_is_canonical() {
        // Same Hermitian matrix presented two ways must give identical vectors.
        let a = kron(&sigma_z(), &identity(2));
        let e1 = herm_eig(&a).unwrap();
        let e2 = herm_eig(&hermitian_part(&a)).unwrap();
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
        // ascending: the -1 cluster (e_2, e_3) first, then the +1 cluster (e_0, e_1)
        let want = Mat::from_fn(4, 4, |i, j| if i == (j + 2) % 4 { ONE } else { ZERO });
        assert!(max_abs_diff(&e1.eigenvectors, &want) < 1e-15);
    }

    #[test]
    fn matrix_exp_examples() {
        assert!(max_abs_diff(&matrix_exp(&Mat::zeros(3, 3)).unwrap(), &identity(3)) < 1e-15);
        let m = scale(&sigma_z(), c(0.0, -std::f64::consts::PI / 2.0));
        let e = matrix_exp(&m).unwrap();
        let want = mat2(c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0));
        assert!(max_abs_diff(&e, &want) < 1e-14);
        // nilpotent: exp(t σ_+) = I + t σ_+
        let e = matrix_exp(&scale_real(&sigma_plus(), 40.0)).unwrap();
        assert!(max_abs_diff(&e, &add_scaled(&identity(2), re(40.0), &sigma_plus())) < 1e-10);
    }

    #[test]
    fn matrix_exp_agrees_with_eigen_route() {
        let h = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64 - 1.5, 0.0)
            } else {
                c(0.3 * (i + j) as f64, 0.2 * (i as f64 - j as f64))
            }
        });
        let h = hermitian_part(&h);
        let s = c(0.0, -2.3);
        let a = matrix_exp(&scale(&h, s)).unwrap();
        let b = exp_hermitian(&h, s).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn matrix_log_examples() {
        let e = std::f64::consts::E;
        let l = matrix_log_psd(&diag(&[e, 1.0]), SupportRule::Error).unwrap();
        assert!(max_abs_diff(&l, &diag(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(
            matrix_log_psd(&diag(&[1.0, 0.0]), SupportRule::Error),
            Err(Error::Singular { .. })
        ));
        let l = matrix_log_psd(&diag(&[e, 0.0]), SupportRule::ProjectToSupport).unwrap();
        assert!(max_abs_diff(&l, &diag(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(
            matrix_log_psd(&diag(&[1.0, -0.1]), SupportRule::ProjectToSupport),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&Mat::zeros(2, 2)).unwrap(), 0.0);
        assert!((trace_norm(&sigma_z()).unwrap() - 2.0).abs() < 1e-14);
        let a = gibbs_qubit(0.4).unwrap();
        let b = gibbs_qubit(1.3).unwrap();
        let want = 2.0 * (a[(0, 0)].re - b[(0, 0)].re).abs();
        assert!((trace_norm(&(&a - &b)).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn vectorization_convention() {
        // vec(A X B) = (Bᵀ ⊗ A) vec(X)
        let a = Mat::from_fn(3, 3, |i, j| c(i as f64 + 0.5 * j as f64, j as f64 * 0.1));
        let x = Mat::from_fn(3, 3, |i, j| c((i * j) as f64 - 1.0, i as f64));
        let b = Mat::from_fn(3, 3, |i, j| c(0.2 * i as f64, (j as f64) - 0.4));
        let lhs = vectorize(&(&(&a * &x) * &b));
        let op = kron(&b.transpose().to_owned(), &a);
        let rhs = matvec(&op, &vectorize(&x));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
        assert_eq!(unvectorize(&vectorize(&x), 3), x);
    }

    #[test]
    fn chain_operator_shape_checks() {
        assert!(ChainOperator::new(2, identity(3)).is_err());
        assert!(ChainOperator::new(0, identity(1)).is_err());
        let op = ChainOperator::from_matrix(identity(8)).unwrap();
        assert_eq!(op.n_sites(), 3);
    }
}
