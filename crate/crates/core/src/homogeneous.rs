//! Reductive decompositions `g = h ⊕ m`, metrics built from subalgebra
//! chains, and numerical checkers for the algebraic hypotheses the
//! closed-form geodesics rely on.
//!
//! Vectors of `m` are handled in two ways: as [`AlgebraVector`]s (coefficients
//! over the basis of `g`, with a domain check on the `h`-component) and as
//! *m-coordinates*, i.e. coefficients over the Q-orthonormal basis of `m`
//! stored in the split. For a [`ChainMetric`] that basis is the concatenation
//! of the eigenspace bases `m_1, …, m_N`, so the projector `π_i` is a block of
//! coordinates.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::liealgebra::{unit, AlgebraVector, InvariantForm, LieAlgebraBasis};
use crate::numkernel::eig_sym_dense;

/// Orthogonality `Q(h, m) = 0`, idempotence and decomposition tolerances.
pub const SPLIT_TOL: f64 = 1e-12;
/// Tolerance for `[h, m] ⊆ m`, `[h, m_i] ⊆ m_i` and `[m_i, m_j] ⊆ m_i`.
pub const BRACKET_TOL: f64 = 1e-11;
/// Natural-reductivity sweep threshold.
pub const NATRED_TOL: f64 = 1e-11;
/// Largest `h`-component accepted for a vector declared to lie in `m`.
pub const DOMAIN_TOL: f64 = 1e-11;
/// Number of random triples added to every basis sweep.
pub const RANDOM_DRAWS: usize = 100;

/// A chain of subalgebras `h_0 ⊂ h_1 ⊂ … ⊂ h_N = g`, each level given by
/// indices into the basis of `g`.
#[derive(Debug, Clone)]
pub struct SubalgebraChain {
    algebra: Arc<LieAlgebraBasis>,
    levels: Vec<Vec<usize>>,
}

impl SubalgebraChain {
    /// `levels` lists `h_0, …, h_N`; the last level must be all of `g`.
    pub fn new(algebra: &Arc<LieAlgebraBasis>, levels: Vec<Vec<usize>>) -> Result<Self> {
        let d = algebra.dim();
        if levels.len() < 2 {
            return Err(Error::Chain("a chain needs at least h_0 and g".into()));
        }
        let mut levels = levels;
        for level in levels.iter_mut() {
            level.sort_unstable();
            let before = level.len();
            level.dedup();
            if level.len() != before {
                return Err(Error::Chain("duplicate basis index in a level".into()));
            }
            if level.iter().any(|&i| i >= d) {
                return Err(Error::Chain(format!("basis index out of range for {}", algebra.name())));
            }
            let v = algebra.subalgebra_violation(level);
            if v > SPLIT_TOL {
                return Err(Error::Chain(format!("level {level:?} is not a subalgebra ({v:.3e})")));
            }
        }
        for pair in levels.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            if lo.len() >= hi.len() || lo.iter().any(|i| !hi.contains(i)) {
                return Err(Error::Chain(format!("{lo:?} is not strictly contained in {hi:?}")));
            }
        }
        if levels.last().map(Vec::len) != Some(d) {
            return Err(Error::Chain("the top level must be the whole algebra".into()));
        }
        Ok(Self { algebra: Arc::clone(algebra), levels })
    }

    /// Chain of lower-right `so(k)` blocks of `so(n)`; `k = 0` stands for the
    /// trivial subalgebra. `g = so(n)` is appended.
    pub fn so_blocks(algebra: &Arc<LieAlgebraBasis>, ks: &[usize]) -> Result<Self> {
        let n = match algebra.family() {
            crate::liealgebra::Family::SpecialOrthogonal(n) => n,
            crate::liealgebra::Family::Custom => return Err(Error::Unsupported("block chains need so(n)".into())),
        };
        let mut levels = Vec::with_capacity(ks.len() + 1);
        for &k in ks {
            if k >= n {
                return Err(Error::Chain(format!("block so({k}) must be smaller than so({n})")));
            }
            levels.push(if k == 0 {
                crate::liealgebra::catalog_trivial(n)?
            } else {
                crate::liealgebra::catalog_so_block(n, k)?
            });
        }
        levels.push((0..algebra.dim()).collect());
        Self::new(algebra, levels)
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        &self.algebra
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Q-orthonormal basis vector with the sign of `Q(b, b)`.
#[derive(Debug, Clone)]
struct SignedVector {
    v: DVector<f64>,
    sign: f64,
}

/// Modified Gram–Schmidt under `gram`, run twice for stability. Vectors are
/// first made Q-orthogonal to `against`. Fails on (numerically) dependent or
/// Q-null candidates.
fn q_orthonormalize(
    gram: &DMatrix<f64>,
    candidates: Vec<DVector<f64>>,
    against: &[SignedVector],
) -> Result<Vec<SignedVector>> {
    let mut out: Vec<SignedVector> = Vec::with_capacity(candidates.len());
    for mut x in candidates {
        let scale0 = x.norm().max(1.0);
        for _ in 0..2 {
            for b in against.iter().chain(out.iter()) {
                let c = b.sign * b.v.dot(&(gram * &x));
                x -= &b.v * c;
            }
        }
        let q = x.dot(&(gram * &x));
        if q.abs() <= 1e-10 * scale0 * scale0 * gram.amax().max(1.0) {
            return Err(Error::Singular("Q-orthonormalization"));
        }
        let sign = q.signum();
        out.push(SignedVector { v: x / q.abs().sqrt(), sign });
    }
    Ok(out)
}

fn columns(vs: &[SignedVector], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, vs.len());
    for (j, s) in vs.iter().enumerate() {
        m.set_column(j, &s.v);
    }
    m
}

/// Q-orthogonal reductive decomposition `g = h ⊕ m` with `m = h^⊥`.
#[derive(Debug, Clone)]
pub struct ReductiveSplit {
    form: InvariantForm,
    h_indices: Vec<usize>,
    h_basis: Vec<SignedVector>,
    m_basis: DMatrix<f64>,
    to_m: DMatrix<f64>,
    proj_m: DMatrix<f64>,
    proj_h: DMatrix<f64>,
}

impl ReductiveSplit {
    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        self.form.algebra()
    }

    pub fn form(&self) -> &InvariantForm {
        &self.form
    }

    pub fn h_indices(&self) -> &[usize] {
        &self.h_indices
    }

    pub fn dim_h(&self) -> usize {
        self.h_basis.len()
    }

    pub fn dim_m(&self) -> usize {
        self.m_basis.ncols()
    }

    /// Columns are a Q-orthonormal basis of `h` (signs given by
    /// [`ReductiveSplit::h_signs`]).
    pub fn h_basis(&self) -> DMatrix<f64> {
        columns(&self.h_basis, self.algebra().dim())
    }

    pub fn h_signs(&self) -> Vec<f64> {
        self.h_basis.iter().map(|s| s.sign).collect()
    }

    /// Columns are the Q-orthonormal basis of `m` defining m-coordinates.
    pub fn m_basis(&self) -> &DMatrix<f64> {
        &self.m_basis
    }

    /// Projector onto `m` along `h`, acting on coefficient vectors of `g`.
    pub fn proj_m(&self) -> &DMatrix<f64> {
        &self.proj_m
    }

    pub fn proj_h(&self) -> &DMatrix<f64> {
        &self.proj_h
    }

    /// m-coordinates of the `m`-component of `x`.
    pub fn to_m_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.to_m * x
    }

    /// Coefficient vector in `g` of the m-coordinates `c`.
    pub fn from_m_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.m_basis * c
    }

    /// Norm of `x` in the coordinates of the Q-orthonormal basis of `h ⊕ m`.
    pub fn g_norm(&self, x: &DVector<f64>) -> f64 {
        let m = self.to_m_coords(x).norm_squared();
        let g = self.form.gram();
        let gx = g * x;
        let h: f64 = self.h_basis.iter().map(|b| b.v.dot(&gx).powi(2)).sum();
        (m + h).sqrt()
    }

    /// Norm of the `h`-component of `x`.
    pub fn h_component_norm(&self, x: &DVector<f64>) -> f64 {
        let g = self.form.gram();
        let gx = g * x;
        self.h_basis.iter().map(|b| b.v.dot(&gx).powi(2)).sum::<f64>().sqrt()
    }

    /// `⟨v, w⟩₀ = Q(v, w)` on `m`.
    pub fn base_inner(&self, v: &AlgebraVector, w: &AlgebraVector) -> Result<f64> {
        let a = self.m_coords(v)?;
        let b = self.m_coords(w)?;
        Ok(a.dot(&b))
    }

    /// m-coordinates of a vector that must lie in `m`.
    pub fn m_coords(&self, v: &AlgebraVector) -> Result<DVector<f64>> {
        if v.coeffs().len() != self.algebra().dim() {
            return Err(Error::Dimension("vector from another algebra".into()));
        }
        let h = self.h_component_norm(v.coeffs());
        if h > DOMAIN_TOL * v.norm().max(1.0) {
            return Err(Error::Domain(h));
        }
        Ok(self.to_m_coords(v.coeffs()))
    }

    /// The vector of `g` with m-coordinates `c`.
    pub fn m_vector(&self, c: &[f64]) -> Result<AlgebraVector> {
        if c.len() != self.dim_m() {
            return Err(Error::Dimension(format!("{} m-coordinates, expected {}", c.len(), self.dim_m())));
        }
        AlgebraVector::new(self.algebra(), self.from_m_coords(&DVector::from_row_slice(c)))
    }

    fn with_m_basis(
        form: InvariantForm,
        h_indices: Vec<usize>,
        h_basis: Vec<SignedVector>,
        m_basis: DMatrix<f64>,
    ) -> Result<Self> {
        let d = form.algebra().dim();
        let to_m = m_basis.transpose() * form.gram();
        let proj_m = &m_basis * &to_m;
        let proj_h = DMatrix::<f64>::identity(d, d) - &proj_m;
        let split = Self { form, h_indices, h_basis, m_basis, to_m, proj_m, proj_h };
        split.validate()?;
        Ok(split)
    }

    fn validate(&self) -> Result<()> {
        let d = self.algebra().dim();
        if self.dim_h() + self.dim_m() != d {
            return Err(Error::Reductivity(format!("dim h + dim m = {} + {} != {d}", self.dim_h(), self.dim_m())));
        }
        let g = self.form.gram();
        let hb = self.h_basis();
        let cross = (hb.transpose() * g * &self.m_basis).amax();
        if cross > SPLIT_TOL {
            return Err(Error::Reductivity(format!("Q(h, m) = {cross:.3e}")));
        }
        let gram_m = self.m_basis.transpose() * g * &self.m_basis;
        let ortho = (gram_m - DMatrix::<f64>::identity(self.dim_m(), self.dim_m())).amax();
        if ortho > SPLIT_TOL * 10.0 {
            return Err(Error::Reductivity(format!("m-basis not Q-orthonormal ({ortho:.3e})")));
        }
        let r = self.isotropy_violation();
        if r > BRACKET_TOL {
            return Err(Error::Reductivity(format!("[h, m] leaves m by {r:.3e}")));
        }
        Ok(())
    }

    /// `max ‖[a, x]_h‖` over basis vectors `a ∈ h`, `x ∈ m`.
    pub fn isotropy_violation(&self) -> f64 {
        let alg = self.algebra();
        let mut worst = 0.0f64;
        for a in &self.h_basis {
            for j in 0..self.dim_m() {
                let x = self.m_basis.column(j).into_owned();
                let br = alg.bracket_coeffs(&a.v, &x);
                worst = worst.max(self.h_component_norm(&br));
            }
        }
        worst
    }

    /// `max |⟨[a,X],Y⟩₀ + ⟨X,[a,Y]⟩₀|` for `a ∈ h`, `X, Y` in the m-basis.
    pub fn ad_h_skew_violation(&self) -> f64 {
        let alg = self.algebra();
        let mut worst = 0.0f64;
        for a in &self.h_basis {
            let ad = self.to_m.clone() * alg.ad_coeffs(&a.v) * &self.m_basis;
            worst = worst.max((&ad + ad.transpose()).amax());
        }
        worst
    }
}

/// Builds the Q-orthogonal split `g = h ⊕ h^⊥` for `h` spanned by the given
/// basis indices.
pub fn reductive_split(
    algebra: &Arc<LieAlgebraBasis>,
    h_indices: &[usize],
    form: &InvariantForm,
) -> Result<ReductiveSplit> {
    if !Arc::ptr_eq(algebra, form.algebra()) && algebra.name() != form.algebra().name() {
        return Err(Error::AlgebraMismatch(algebra.name().into(), form.algebra().name().into()));
    }
    let d = algebra.dim();
    let mut h_idx = h_indices.to_vec();
    h_idx.sort_unstable();
    h_idx.dedup();
    if h_idx.iter().any(|&i| i >= d) {
        return Err(Error::Index("h index out of range".into()));
    }
    let v = algebra.subalgebra_violation(&h_idx);
    if v > SPLIT_TOL {
        return Err(Error::Chain(format!("h is not a subalgebra ({v:.3e})")));
    }
    let gram = form.gram();
    let h_basis = q_orthonormalize(gram, h_idx.iter().map(|&i| unit(d, i)).collect(), &[])?;
    let m_basis = complement_basis(gram, &h_basis, (0..d).filter(|i| !h_idx.contains(i)), d)?;
    ReductiveSplit::with_m_basis(form.clone(), h_idx, h_basis, columns(&m_basis, d))
}

/// Q-orthonormal basis of the Q-complement of `inner` spanned by the given
/// extra basis directions. Q must be positive definite there.
fn complement_basis(
    gram: &DMatrix<f64>,
    inner: &[SignedVector],
    extra: impl Iterator<Item = usize>,
    d: usize,
) -> Result<Vec<SignedVector>> {
    let mut projected: Vec<DVector<f64>> = extra
        .map(|j| {
            let mut x = unit(d, j);
            for b in inner {
                let c = b.sign * b.v.dot(&(gram * &x));
                x -= &b.v * c;
            }
            x
        })
        .collect();
    if projected.is_empty() {
        return Ok(Vec::new());
    }
    // Signature of Q on the complement.
    let k = projected.len();
    let restricted = DMatrix::from_fn(k, k, |i, j| projected[i].dot(&(gram * &projected[j])));
    let (vals, _) = eig_sym_dense(&restricted)?;
    let min = vals[0];
    if min <= 1e-12 * vals[k - 1].abs().max(1.0) {
        return Err(Error::Signature(min));
    }
    let basis = q_orthonormalize(gram, std::mem::take(&mut projected), inner)?;
    Ok(basis)
}

/// Metric `⟨X, Y⟩ = Q(A X, Y)` on `m` with `A = Σ λ_i Id|_{m_i}`.
#[derive(Debug, Clone)]
pub struct ChainMetric {
    split: ReductiveSplit,
    lambdas: Vec<f64>,
    blocks: Vec<Range<usize>>,
    hand_assembled: bool,
    warnings: Vec<String>,
}

/// Builds the eigenspaces `m_{N−i+1} = h_i ⊖ h_{i−1}` from the chain.
///
/// Eigenspaces are stored as `m_1, …, m_N`: `m_1` is the complement of
/// `h_{N−1}` in `g` (the largest step) and `m_N` the complement of `h_0` in
/// `h_1`. `lambdas[i]` belongs to `m_{i+1}`.
pub fn build_chain_metric(chain: &SubalgebraChain, form: &InvariantForm, lambdas: &[f64]) -> Result<ChainMetric> {
    let n_steps = chain.steps();
    if lambdas.len() != n_steps {
        return Err(Error::Dimension(format!("{} eigenvalues for a chain with {n_steps} steps", lambdas.len())));
    }
    check_lambdas(lambdas)?;
    let alg = chain.algebra();
    let d = alg.dim();
    let gram = form.gram();
    let levels = chain.levels();

    let base = reductive_split(alg, &levels[0], form)?;
    // spaces[k] holds m_{k+1}.
    let mut spaces: Vec<Vec<SignedVector>> = vec![Vec::new(); n_steps];
    for i in 1..=n_steps {
        let prev = &levels[i - 1];
        let prev_basis = q_orthonormalize(gram, prev.iter().map(|&j| unit(d, j)).collect(), &[])?;
        let extra = levels[i].iter().copied().filter(|j| !prev.contains(j));
        spaces[n_steps - i] = complement_basis(gram, &prev_basis, extra, d)?;
    }
    let cm = assemble(base, spaces, lambdas.to_vec(), false)?;

    // Invariance of each m_i under h and the bracket condition follow from the
    // construction; both are still verified.
    let iso = cm.isotropy_violation();
    if iso > BRACKET_TOL {
        return Err(Error::Reductivity(format!("[h, m_i] leaves m_i by {iso:.3e}")));
    }
    let br = check_bracket_condition(&cm);
    if br.max_violation > BRACKET_TOL {
        return Err(Error::Chain(format!(
            "bracket condition fails by {:.3e} at {:?}",
            br.max_violation, br.worst_pair
        )));
    }
    Ok(cm)
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Dimension("at least one eigenvalue is required".into()));
    }
    for (i, l) in lambdas.iter().enumerate() {
        if !l.is_finite() {
            return Err(Error::NonFinite("eigenvalue"));
        }
        if *l == 0.0 {
            return Err(Error::DegenerateMetric { index: i });
        }
    }
    Ok(())
}

fn assemble(
    split: ReductiveSplit,
    spaces: Vec<Vec<SignedVector>>,
    lambdas: Vec<f64>,
    hand_assembled: bool,
) -> Result<ChainMetric> {
    let d = split.algebra().dim();
    let mut blocks = Vec::with_capacity(spaces.len());
    let mut all = Vec::new();
    for s in &spaces {
        if s.is_empty() {
            return Err(Error::Chain("empty eigenspace".into()));
        }
        let start = all.len();
        all.extend(s.iter().cloned());
        blocks.push(start..all.len());
    }
    if all.len() != split.dim_m() {
        return Err(Error::Chain(format!("eigenspaces have total dimension {}, m has {}", all.len(), split.dim_m())));
    }
    let m_basis = columns(&all, d);
    let split = ReductiveSplit::with_m_basis(split.form, split.h_indices, split.h_basis, m_basis)?;
    let mut warnings = Vec::new();
    for (i, w) in lambdas.windows(2).enumerate() {
        if w[0] == w[1] {
            warnings.push(format!("lambda_{} = lambda_{} = {}: eigenspaces are not maximal", i + 1, i + 2, w[0]));
        }
    }
    Ok(ChainMetric { split, lambdas, blocks, hand_assembled, warnings })
}

impl ChainMetric {
    /// Accepts an arbitrary Q-orthogonal decomposition of `m` into spaces
    /// spanned by the given vectors. Nothing beyond orthogonality and span is
    /// checked; the result is flagged as hand-assembled.
    pub fn from_eigenspaces(split: &ReductiveSplit, spaces: &[Vec<AlgebraVector>], lambdas: &[f64]) -> Result<Self> {
        if spaces.len() != lambdas.len() {
            return Err(Error::Dimension("one eigenvalue per eigenspace".into()));
        }
        check_lambdas(lambdas)?;
        let gram = split.form().gram();
        let mut done: Vec<SignedVector> = split.h_basis.clone();
        let mut out = Vec::with_capacity(spaces.len());
        for space in spaces {
            for v in space {
                split.m_coords(v)?;
            }
            let start = done.len();
            let basis = q_orthonormalize(gram, space.iter().map(|v| v.coeffs().clone()).collect(), &done)?;
            let earlier = columns(&done[split.h_basis.len()..start], split.algebra().dim());
            for v in space {
                let cross = (earlier.transpose() * gram * v.coeffs()).amax();
                if earlier.ncols() > 0 && cross > SPLIT_TOL * v.norm().max(1.0) {
                    return Err(Error::Chain(format!("eigenspaces are not Q-orthogonal ({cross:.3e})")));
                }
            }
            if basis.iter().any(|b| b.sign < 0.0) {
                return Err(Error::Signature(-1.0));
            }
            done.extend(basis.iter().cloned());
            out.push(basis);
        }
        assemble(split.clone(), out, lambdas.to_vec(), true)
    }

    pub fn split(&self) -> &ReductiveSplit {
        &self.split
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        self.split.algebra()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of eigenspaces `N`.
    pub fn steps(&self) -> usize {
        self.lambdas.len()
    }

    /// Coordinate range of `m_{i+1}` inside m-coordinates.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.blocks[i].clone()
    }

    pub fn eigenspace_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Columns form a Q-orthonormal basis of `m_{i+1}`.
    pub fn eigenspace_basis(&self, i: usize) -> DMatrix<f64> {
        let b = &self.blocks[i];
        self.split.m_basis().columns(b.start, b.len()).into_owned()
    }

    pub fn is_hand_assembled(&self) -> bool {
        self.hand_assembled
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn apply_a_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut out = c.clone();
        for (b, l) in self.blocks.iter().zip(&self.lambdas) {
            out.rows_mut(b.start, b.len()).scale_mut(*l);
        }
        out
    }

    pub fn apply_a_inv_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut out = c.clone();
        for (b, l) in self.blocks.iter().zip(&self.lambdas) {
            out.rows_mut(b.start, b.len()).scale_mut(1.0 / l);
        }
        out
    }

    pub fn project_coords(&self, i: usize, c: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(c.len());
        let b = &self.blocks[i];
        out.rows_mut(b.start, b.len()).copy_from(&c.rows(b.start, b.len()));
        out
    }

    /// `⟨A c, c⟩₀` in m-coordinates.
    pub fn energy_coords(&self, c: &DVector<f64>) -> f64 {
        c.dot(&self.apply_a_coords(c))
    }

    pub fn apply_a(&self, v: &AlgebraVector) -> Result<AlgebraVector> {
        let c = self.split.m_coords(v)?;
        Ok(v.with_coeffs(self.split.from_m_coords(&self.apply_a_coords(&c))))
    }

    pub fn apply_a_inv(&self, v: &AlgebraVector) -> Result<AlgebraVector> {
        let c = self.split.m_coords(v)?;
        Ok(v.with_coeffs(self.split.from_m_coords(&self.apply_a_inv_coords(&c))))
    }

    /// `π_{i+1}(v)`.
    pub fn project_i(&self, i: usize, v: &AlgebraVector) -> Result<AlgebraVector> {
        if i >= self.steps() {
            return Err(Error::Index(format!("eigenspace {i} of {}", self.steps())));
        }
        let c = self.split.m_coords(v)?;
        Ok(v.with_coeffs(self.split.from_m_coords(&self.project_coords(i, &c))))
    }

    /// `⟨v, w⟩ = ⟨A v, w⟩₀`; indefinite when some eigenvalue is negative.
    pub fn metric_inner(&self, v: &AlgebraVector, w: &AlgebraVector) -> Result<f64> {
        let a = self.split.m_coords(v)?;
        let b = self.split.m_coords(w)?;
        Ok(self.apply_a_coords(&a).dot(&b))
    }

    /// `max ‖[a, x]‖` outside `m_i` over `a ∈ h` and `x` in the basis of `m_i`.
    pub fn isotropy_violation(&self) -> f64 {
        let alg = self.algebra();
        let mut worst = 0.0f64;
        for a in &self.split.h_basis {
            for i in 0..self.steps() {
                let basis = self.eigenspace_basis(i);
                for x in basis.column_iter() {
                    let br = alg.bracket_coeffs(&a.v, &x.into_owned());
                    worst = worst.max(self.outside_norm(i, &br));
                }
            }
        }
        worst
    }

    /// Norm of the part of `x ∈ g` not in `m_{i+1}`.
    fn outside_norm(&self, i: usize, x: &DVector<f64>) -> f64 {
        let c = self.split.to_m_coords(x);
        let b = &self.blocks[i];
        let inside = c.rows(b.start, b.len()).norm_squared();
        let total = self.split.g_norm(x).powi(2);
        (total - inside).max(0.0).sqrt()
    }

    /// `max ‖A ad(a)|_m − ad(a)|_m A‖` over the basis of `h`.
    pub fn equivariance_violation(&self) -> f64 {
        let alg = self.algebra();
        let dm = self.split.dim_m();
        let a_mat = DMatrix::from_fn(dm, dm, |r, c| {
            if r == c {
                let i = self.blocks.iter().position(|b| b.contains(&r)).unwrap();
                self.lambdas[i]
            } else {
                0.0
            }
        });
        let mut worst = 0.0f64;
        for a in &self.split.h_basis {
            let ad = self.split.to_m.clone() * alg.ad_coeffs(&a.v) * self.split.m_basis();
            worst = worst.max((&a_mat * &ad - &ad * &a_mat).amax());
        }
        worst
    }

    /// Defect of the eigenspace union as a Q-orthonormal basis of `m`:
    /// `max |BᵀQB − I|` together with `Σ dim m_i` and `dim g − dim h`.
    pub fn decomposition_defect(&self) -> (f64, usize, usize) {
        let b = self.split.m_basis();
        let g = self.split.form().gram();
        let k = b.ncols();
        let defect = (b.transpose() * g * b - DMatrix::<f64>::identity(k, k)).amax();
        let dims: usize = self.eigenspace_dims().iter().sum();
        (defect, dims, self.split.algebra().dim() - self.split.dim_h())
    }
}

/// Result of [`check_natural_reductivity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalReductivityReport {
    pub max_violation: f64,
}

/// `max |⟨[X,Y]_m, Z⟩₀ + ⟨Y, [X,Z]_m⟩₀|` over basis triples of `m` and
/// [`RANDOM_DRAWS`] random triples.
pub fn check_natural_reductivity<R: Rng + ?Sized>(split: &ReductiveSplit, rng: &mut R) -> NaturalReductivityReport {
    let dm = split.dim_m();
    let alg = split.algebra();
    let term = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| -> f64 {
        let (gx, gy, gz) = (split.from_m_coords(x), split.from_m_coords(y), split.from_m_coords(z));
        let xy = split.to_m_coords(&alg.bracket_coeffs(&gx, &gy));
        let xz = split.to_m_coords(&alg.bracket_coeffs(&gx, &gz));
        (xy.dot(z) + y.dot(&xz)).abs()
    };
    let mut worst = 0.0f64;
    for i in 0..dm {
        for j in 0..dm {
            for k in 0..dm {
                worst = worst.max(term(&unit(dm, i), &unit(dm, j), &unit(dm, k)));
            }
        }
    }
    for _ in 0..RANDOM_DRAWS {
        let mut draw = || DVector::from_fn(dm, |_, _| rng.random_range(-1.0..1.0));
        let (x, y, z) = (draw(), draw(), draw());
        worst = worst.max(term(&x, &y, &z));
    }
    NaturalReductivityReport { max_violation: worst }
}

/// Result of [`check_bracket_condition`]; `worst_pair` is 0-based `(i, j)`,
/// `i < j`, or `None` when `N = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketReport {
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Largest norm of the component of `[x_i, x_j]` outside `m_i` for `i < j`
/// and Q-orthonormal basis vectors `x_i ∈ m_i`, `x_j ∈ m_j`.
pub fn check_bracket_condition(cm: &ChainMetric) -> BracketReport {
    let alg = cm.algebra();
    let mut report = BracketReport { max_violation: 0.0, worst_pair: None };
    for i in 0..cm.steps() {
        let bi = cm.eigenspace_basis(i);
        for j in (i + 1)..cm.steps() {
            let bj = cm.eigenspace_basis(j);
            let mut local = 0.0f64;
            for x in bi.column_iter() {
                for y in bj.column_iter() {
                    let br = alg.bracket_coeffs(&x.into_owned(), &y.into_owned());
                    local = local.max(cm.outside_norm(i, &br));
                }
            }
            if report.worst_pair.is_none() || local > report.max_violation {
                report = BracketReport { max_violation: local, worst_pair: Some((i, j)) };
            }
        }
    }
    report
}

/// `|⟨X_m, [W, X]_m⟩ − ⟨X_m, [W_m, X]_m⟩|` in the metric of `cm`.
pub fn check_lem2(cm: &ChainMetric, x: &AlgebraVector, w: &AlgebraVector) -> Result<f64> {
    let split = cm.split();
    let alg = cm.algebra();
    if x.coeffs().len() != alg.dim() || w.coeffs().len() != alg.dim() {
        return Err(Error::Dimension("vectors from another algebra".into()));
    }
    let xm = split.to_m_coords(x.coeffs());
    let wm = split.from_m_coords(&split.to_m_coords(w.coeffs()));
    let lhs = split.to_m_coords(&alg.bracket_coeffs(w.coeffs(), x.coeffs()));
    let rhs = split.to_m_coords(&alg.bracket_coeffs(&wm, x.coeffs()));
    let ax = cm.apply_a_coords(&xm);
    Ok((ax.dot(&lhs) - ax.dot(&rhs)).abs())
}
