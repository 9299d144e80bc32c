//! Matrix Lie algebras: bases, brackets, adjoint representations, invariant
//! forms and one-parameter subgroups.
//!
//! The catalog is the orthogonal family `so(n)` with basis `E_ij − E_ji`
//! (`i < j`) in lexicographic order. Subalgebras are described by index sets
//! into that basis; the lower-right `so(k)` blocks nest by index containment.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::{exp_dense, Matrix};

/// Closure and Jacobi tolerance for catalog construction (relative to the
/// size of the bracket).
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Span tolerance for `Ad(g)X`.
pub const ADJOINT_TOL: f64 = 1e-11;
/// Orthogonality tolerance for group elements of `SO(n)`.
pub const GROUP_TOL: f64 = 1e-10;
/// Ad-invariance tolerance for invariant forms.
pub const INVARIANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `so(n)`, the Lie algebra of `SO(n)`.
    SpecialOrthogonal(usize),
    /// A user-supplied matrix basis.
    Custom,
}

/// A finite-dimensional matrix Lie algebra with a fixed basis.
///
/// `[E_i, E_j] = Σ_k c[i][j][k] E_k`; the constants are computed once at
/// construction together with the adjoint matrices of the basis.
pub struct LieAlgebraBasis {
    name: String,
    family: Family,
    matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    frob_gram_inv: DMatrix<f64>,
    structure: Vec<f64>,
    ad_basis: Vec<DMatrix<f64>>,
}

impl fmt::Debug for LieAlgebraBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebraBasis")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("matrix_size", &self.matrix_size)
            .finish()
    }
}

impl LieAlgebraBasis {
    /// Builds an algebra from its basis matrices, checking linear
    /// independence, closure under the commutator and the Jacobi identity.
    pub fn new(name: impl Into<String>, basis: Vec<DMatrix<f64>>) -> Result<Arc<Self>> {
        Self::with_family(name.into(), Family::Custom, basis)
    }

    fn with_family(name: String, family: Family, basis: Vec<DMatrix<f64>>) -> Result<Arc<Self>> {
        let dim = basis.len();
        let n = basis.first().map(|b| b.nrows()).unwrap_or(0);
        if dim == 0 || n == 0 {
            return Err(Error::Dimension("empty basis".into()));
        }
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::Dimension("basis matrices must be square and of equal size".into()));
        }
        if basis.iter().any(|b| b.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("basis"));
        }
        let gram = DMatrix::from_fn(dim, dim, |i, j| basis[i].dot(&basis[j]));
        let frob_gram_inv = gram
            .clone()
            .try_inverse()
            .filter(|g| g.amax() * gram.amax() < 1e12)
            .ok_or_else(|| Error::Dimension("basis matrices are linearly dependent".into()))?;

        let mut alg = Self {
            name,
            family,
            matrix_size: n,
            basis,
            frob_gram_inv,
            structure: vec![0.0; dim * dim * dim],
            ad_basis: Vec::new(),
        };
        for i in 0..dim {
            for j in 0..dim {
                let br = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let (coeffs, residual) = alg.expand_dense(&br);
                if residual > STRUCTURE_TOL * (1.0 + br.norm()) {
                    return Err(Error::Closure(residual));
                }
                for k in 0..dim {
                    alg.structure[(i * dim + j) * dim + k] = coeffs[k];
                }
            }
        }
        alg.ad_basis =
            (0..dim).map(|i| DMatrix::from_fn(dim, dim, |k, j| alg.structure[(i * dim + j) * dim + k])).collect();
        let jacobi = alg.jacobi_violation();
        if jacobi > STRUCTURE_TOL {
            return Err(Error::Closure(jacobi));
        }
        Ok(Arc::new(alg))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size `n` of the ambient `n × n` matrices.
    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    /// `c[i][j][k]` with `[E_i, E_j] = Σ_k c[i][j][k] E_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    /// Matrix of `ad(E_i)` in the basis.
    pub fn ad_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.ad_basis[i]
    }

    /// Largest Jacobi-identity defect over all basis triples.
    pub fn jacobi_violation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let ei = unit(d, i);
                    let ej = unit(d, j);
                    let ek = unit(d, k);
                    let a = self.bracket_coeffs(&self.bracket_coeffs(&ei, &ej), &ek);
                    let b = self.bracket_coeffs(&self.bracket_coeffs(&ej, &ek), &ei);
                    let c = self.bracket_coeffs(&self.bracket_coeffs(&ek, &ei), &ej);
                    worst = worst.max((a + b + c).amax());
                }
            }
        }
        worst
    }

    /// Coefficients of a matrix in the basis together with the Frobenius
    /// norm of what the basis cannot represent.
    pub fn expand(&self, m: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
        let n = self.matrix_size;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!("expected {n}x{n} matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        Ok(self.expand_dense(m))
    }

    pub(crate) fn expand_dense(&self, m: &DMatrix<f64>) -> (DVector<f64>, f64) {
        let rhs = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| b.dot(m)));
        let coeffs = &self.frob_gram_inv * rhs;
        let residual = (m - self.combine(&coeffs)).norm();
        (coeffs, residual)
    }

    /// `Σ_i x_i E_i`.
    pub fn combine(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let n = self.matrix_size;
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// `ad(x)` in the basis.
    pub fn ad_coeffs(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (c, a) in x.iter().zip(&self.ad_basis) {
            if *c != 0.0 {
                m += a * *c;
            }
        }
        m
    }

    /// Bracket of coefficient vectors through the structure constants.
    pub fn bracket_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += w * self.structure[base + k];
                }
            }
        }
        out
    }

    /// Coefficient matrix of `Ad(g)` for a group matrix `g` (columns are
    /// `g E_j g⁻¹`), with the largest span residual encountered.
    pub(crate) fn adjoint_dense(&self, g: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        let mut worst = 0.0f64;
        for (j, b) in self.basis.iter().enumerate() {
            let conj = g * b * g_inv;
            let (c, r) = self.expand_dense(&conj);
            worst = worst.max(r / (1.0 + conj.norm()));
            out.set_column(j, &c);
        }
        (out, worst)
    }

    /// Whether `indices` spans a subalgebra, returning the largest bracket
    /// component that escapes the span.
    pub fn subalgebra_violation(&self, indices: &[usize]) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for &i in indices {
            for &j in indices {
                for k in 0..d {
                    if !indices.contains(&k) {
                        worst = worst.max(self.structure_constant(i, j, k).abs());
                    }
                }
            }
        }
        worst
    }
}

pub(crate) fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

fn same_algebra(a: &Arc<LieAlgebraBasis>, b: &Arc<LieAlgebraBasis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.name == b.name && a.dim() == b.dim() && a.basis == b.basis) {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch(a.name.clone(), b.name.clone()))
    }
}

/// Element of the algebra as coefficients over its basis.
#[derive(Debug, Clone)]
pub struct AlgebraVector {
    algebra: Arc<LieAlgebraBasis>,
    coeffs: DVector<f64>,
}

impl AlgebraVector {
    pub fn new(algebra: &Arc<LieAlgebraBasis>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != algebra.dim() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} of dimension {}",
                coeffs.len(),
                algebra.name(),
                algebra.dim()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("algebra vector"));
        }
        Ok(Self { algebra: Arc::clone(algebra), coeffs })
    }

    pub fn from_slice(algebra: &Arc<LieAlgebraBasis>, coeffs: &[f64]) -> Result<Self> {
        Self::new(algebra, DVector::from_row_slice(coeffs))
    }

    pub fn zero(algebra: &Arc<LieAlgebraBasis>) -> Self {
        Self { algebra: Arc::clone(algebra), coeffs: DVector::zeros(algebra.dim()) }
    }

    pub fn basis_element(algebra: &Arc<LieAlgebraBasis>, i: usize) -> Result<Self> {
        if i >= algebra.dim() {
            return Err(Error::Index(format!("basis index {i} out of range")));
        }
        Ok(Self { algebra: Arc::clone(algebra), coeffs: unit(algebra.dim(), i) })
    }

    /// Expands a matrix in the basis; fails if it is not in the span.
    pub fn from_matrix(algebra: &Arc<LieAlgebraBasis>, m: &DMatrix<f64>) -> Result<Self> {
        let (coeffs, residual) = algebra.expand(m)?;
        if residual > ADJOINT_TOL * (1.0 + m.norm()) {
            return Err(Error::Closure(residual));
        }
        Self::new(algebra, coeffs)
    }

    /// Uniform random coefficients in `[-1, 1)`.
    pub fn random<R: Rng + ?Sized>(algebra: &Arc<LieAlgebraBasis>, rng: &mut R) -> Self {
        let coeffs = DVector::from_fn(algebra.dim(), |_, _| rng.random_range(-1.0..1.0));
        Self { algebra: Arc::clone(algebra), coeffs }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    /// The vector as an `n × n` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.algebra.combine(&self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { algebra: Arc::clone(&self.algebra), coeffs: &self.coeffs * s }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(Self { algebra: Arc::clone(&self.algebra), coeffs: &self.coeffs + &other.coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(Self { algebra: Arc::clone(&self.algebra), coeffs: &self.coeffs - &other.coeffs })
    }

    pub(crate) fn with_coeffs(&self, coeffs: DVector<f64>) -> Self {
        Self { algebra: Arc::clone(&self.algebra), coeffs }
    }
}

/// Element of the matrix group generated by an algebra.
#[derive(Debug, Clone)]
pub struct GroupElement {
    algebra: Arc<LieAlgebraBasis>,
    matrix: Matrix,
}

impl GroupElement {
    /// Wraps a group matrix. For the orthogonal family the matrix must be
    /// special orthogonal to [`GROUP_TOL`].
    pub fn new(algebra: &Arc<LieAlgebraBasis>, matrix: Matrix) -> Result<Self> {
        let n = algebra.matrix_size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension(format!("group matrix must be {n}x{n}")));
        }
        if let Family::SpecialOrthogonal(_) = algebra.family() {
            let orth = (matrix.inner().transpose() * matrix.inner() - DMatrix::<f64>::identity(n, n)).amax();
            let det = matrix.determinant();
            if orth > GROUP_TOL || (det - 1.0).abs() > GROUP_TOL {
                return Err(Error::Closure(orth.max((det - 1.0).abs())));
            }
        }
        Ok(Self { algebra: Arc::clone(algebra), matrix })
    }

    pub(crate) fn new_unchecked(algebra: &Arc<LieAlgebraBasis>, matrix: DMatrix<f64>) -> Self {
        Self { algebra: Arc::clone(algebra), matrix: Matrix::new(matrix).expect("finite group matrix") }
    }

    pub fn identity(algebra: &Arc<LieAlgebraBasis>) -> Self {
        Self { algebra: Arc::clone(algebra), matrix: Matrix::identity(algebra.matrix_size()) }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        &self.algebra
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(Self { algebra: Arc::clone(&self.algebra), matrix: &self.matrix * &other.matrix })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = match self.algebra.family() {
            Family::SpecialOrthogonal(_) => self.matrix.transpose(),
            Family::Custom => self.matrix.inverse()?,
        };
        Ok(Self { algebra: Arc::clone(&self.algebra), matrix: inv })
    }
}

/// Nondegenerate symmetric bilinear form on the algebra, stored by its Gram
/// matrix `Q(E_i, E_j)`.
#[derive(Debug, Clone)]
pub struct InvariantForm {
    algebra: Arc<LieAlgebraBasis>,
    gram: DMatrix<f64>,
}

impl InvariantForm {
    /// Accepts any symmetric nondegenerate Gram matrix. Ad-invariance is not
    /// enforced here; query [`InvariantForm::ad_invariance_violation`].
    pub fn from_gram(algebra: &Arc<LieAlgebraBasis>, gram: DMatrix<f64>) -> Result<Self> {
        let d = algebra.dim();
        if gram.nrows() != d || gram.ncols() != d {
            return Err(Error::Dimension(format!("gram must be {d}x{d}")));
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("gram"));
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 * gram.amax().max(1.0) {
            return Err(Error::Symmetry(asym));
        }
        if gram.determinant().abs() <= 1e-12 {
            return Err(Error::Singular("invariant form"));
        }
        Ok(Self { algebra: Arc::clone(algebra), gram })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        &self.algebra
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn eval(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        same_algebra(&self.algebra, x.algebra())?;
        same_algebra(&self.algebra, y.algebra())?;
        Ok(self.eval_coeffs(x.coeffs(), y.coeffs()))
    }

    pub fn eval_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * y))
    }

    /// `max |Q([E_i,E_j],E_k) + Q(E_j,[E_i,E_k])|` over basis triples.
    pub fn ad_invariance_violation(&self) -> f64 {
        let d = self.algebra.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            // ad(E_i)ᵀ G + G ad(E_i) must vanish.
            let a = self.algebra.ad_basis(i);
            let m = a.transpose() * &self.gram + &self.gram * a;
            worst = worst.max(m.amax());
        }
        worst
    }
}

/// `[X, Y]` expanded in the basis.
pub fn bracket(x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
    same_algebra(x.algebra(), y.algebra())?;
    let alg = x.algebra();
    let m = x.matrix() * y.matrix() - y.matrix() * x.matrix();
    let (coeffs, residual) = alg.expand_dense(&m);
    if residual > STRUCTURE_TOL * (1.0 + m.norm()) {
        return Err(Error::Closure(residual));
    }
    AlgebraVector::new(alg, coeffs)
}

/// Matrix of `ad(X)` in the basis.
pub fn ad_matrix(x: &AlgebraVector) -> Matrix {
    Matrix::new(x.algebra().ad_coeffs(x.coeffs())).expect("finite coefficients")
}

/// `Ad(g)X = g X g⁻¹`.
pub fn adjoint(g: &GroupElement, x: &AlgebraVector) -> Result<AlgebraVector> {
    same_algebra(g.algebra(), x.algebra())?;
    let ginv = g.inverse()?;
    let conj = g.matrix().inner() * x.matrix() * ginv.matrix().inner();
    let (coeffs, residual) = x.algebra().expand_dense(&conj);
    if residual > ADJOINT_TOL * (1.0 + conj.norm()) {
        return Err(Error::Closure(residual));
    }
    AlgebraVector::new(x.algebra(), coeffs)
}

/// Coefficient matrix of `Ad(g)`.
pub fn adjoint_matrix(g: &GroupElement) -> Result<Matrix> {
    let ginv = g.inverse()?;
    let (m, residual) = g.algebra().adjoint_dense(g.matrix().inner(), ginv.matrix().inner());
    if residual > ADJOINT_TOL {
        return Err(Error::Closure(residual));
    }
    Matrix::new(m)
}

/// `B(X, Y) = tr(ad X · ad Y)`.
pub fn killing_form(x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
    same_algebra(x.algebra(), y.algebra())?;
    let alg = x.algebra();
    Ok((alg.ad_coeffs(x.coeffs()) * alg.ad_coeffs(y.coeffs())).trace())
}

/// `φ_X(t) = exp(tX)`.
pub fn one_param(x: &AlgebraVector, t: f64) -> Result<GroupElement> {
    let m = exp_dense(&(x.matrix() * t))?;
    Ok(GroupElement { algebra: Arc::clone(x.algebra()), matrix: Matrix::new(m)? })
}

/// `Q(X, Y) = −tr(XY)`, a positive multiple of the negative Killing form on
/// `so(n)`.
pub fn trace_form(algebra: &Arc<LieAlgebraBasis>) -> Result<InvariantForm> {
    match algebra.family() {
        Family::SpecialOrthogonal(_) => {}
        Family::Custom => return Err(Error::Unsupported(format!("no trace form implemented for {}", algebra.name()))),
    }
    let b = algebra.basis();
    let gram = DMatrix::from_fn(b.len(), b.len(), |i, j| -(&b[i] * &b[j]).trace());
    let form = InvariantForm::from_gram(algebra, gram)?;
    let v = form.ad_invariance_violation();
    if v > INVARIANCE_TOL {
        return Err(Error::Unsupported(format!("trace form not ad-invariant ({v:.3e})")));
    }
    Ok(form)
}

/// Index pairs `(i, j)`, `i < j`, of the `so(n)` basis in lexicographic order.
pub fn so_index_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// `so(n)` with basis `E_ij − E_ji`, `i < j`, lexicographic.
pub fn catalog_so(n: usize) -> Result<Arc<LieAlgebraBasis>> {
    if n < 2 {
        return Err(Error::Dimension(format!("so(n) needs n >= 2, got {n}")));
    }
    let basis = so_index_pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            m
        })
        .collect();
    LieAlgebraBasis::with_family(format!("so({n})"), Family::SpecialOrthogonal(n), basis)
}

/// Indices of the `so(n)` basis spanning `so(k)` in the lower-right `k × k`
/// block.
pub fn catalog_so_block(n: usize, k: usize) -> Result<Vec<usize>> {
    if k < 2 || k > n {
        return Err(Error::Dimension(format!("so({k}) block needs 2 <= k <= n = {n}")));
    }
    let lo = n - k;
    Ok(so_index_pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(_, (i, j))| *i >= lo && *j >= lo)
        .map(|(idx, _)| idx)
        .collect())
}

/// The zero subalgebra.
pub fn catalog_trivial(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::Dimension(format!("so(n) needs n >= 2, got {n}")));
    }
    Ok(Vec::new())
}

/// The rotation generators `L1, L2, L3` of `so(3)` with `[L1, L2] = L3` and
/// cyclic permutations. In the lexicographic basis `(e01, e02, e12)` they
/// are `L1 = −e12`, `L2 = e02`, `L3 = −e01`.
pub fn so3_generators(algebra: &Arc<LieAlgebraBasis>) -> Result<[AlgebraVector; 3]> {
    if algebra.family() != Family::SpecialOrthogonal(3) {
        return Err(Error::Unsupported(format!("{} is not so(3)", algebra.name())));
    }
    Ok([
        AlgebraVector::from_slice(algebra, &[0.0, 0.0, -1.0])?,
        AlgebraVector::from_slice(algebra, &[0.0, 1.0, 0.0])?,
        AlgebraVector::from_slice(algebra, &[-1.0, 0.0, 0.0])?,
    ])
}
